#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qfb/ald.hpp"
#include "qfb/aldl.hpp"
#include "qfb/config.hpp"
#include "qfb/detector.hpp"
#include "qfb/greens.hpp"
#include "qfb/mirror.hpp"
#include "qfb/noise.hpp"

namespace qfb {

inline constexpr const char* kVersion = "0.1.0";

struct ScenarioInfo {
    std::string name;
    std::string description;
    std::vector<std::string> required;
};

inline const std::vector<ScenarioInfo>& list_scenarios()
{
    static const std::vector<ScenarioInfo> s{
        {"ald-causality",
         "dressed radiation-reaction equation with m(tau), g(tau): a force switched on at tau_f leaves "
         "the worldline untouched before tau_f",
         {"particle.m0", "particle.e", "particle.cutoff", "potential.variant"}},
        {"ald-runaway",
         "undressed third-order equation (g = 1): exponential runaway at rate m/e^2",
         {"particle.m0", "particle.e", "particle.cutoff"}},
        {"uniform-acceleration-unruh",
         "mean equation under a constant push, then the ALD-Langevin ensemble driven by Hadamard noise "
         "on the hyperbola; effective temperature from transverse fluctuations",
         {"particle.m0", "particle.e", "particle.cutoff", "potential.force", "potential.k"}},
        {"fdr-check",
         "noise and dissipation spectra of the Wightman pullback on a stationary trajectory, "
         "ratio against coth(omega/2T)",
         {"trajectory.kind", "field.state", "fdr.omegas"}},
        {"detector-response",
         "oscillator detector transition rate along a stationary trajectory",
         {"trajectory.kind", "field.state", "detector.omegas", "detector.coupling", "detector.e"}},
        {"mirror-static",
         "detector rate versus distance from a Dirichlet plane (image-method kernel)",
         {"field.state", "mirror.offset", "mirror.normal", "detector.omega", "detector.coupling", "detector.e",
          "detector.z"}},
        {"mirror-moving",
         "1+1 moving mirror: ray-tracing map p(u), its derivatives and the Schwarzian energy flux",
         {"mirror.motion"}},
    };
    return s;
}

namespace detail {

inline const std::map<std::string, std::vector<std::string>>& config_sections()
{
    static const std::map<std::string, std::vector<std::string>> m{
        {"particle", {"m0", "e", "cutoff", "kappa", "r0"}},
        {"switch", {"shape", "tau_d"}},
        {"potential", {"variant", "force", "k", "center", "axes"}},
        {"integrator", {"mode", "dt", "tau_max"}},
        {"ald", {"force_onset", "x0", "u0", "a0"}},
        {"trajectory", {"kind", "accel", "position", "velocity"}},
        {"field", {"state", "temperature", "dim", "eps"}},
        {"noise", {"dt", "n", "channels", "weight", "hbar"}},
        {"ensemble", {"n", "base_seed"}},
        {"aldl", {"window_lo", "window_hi", "component", "use_m_inf", "switch_tensors", "hessian_sign", "segment"}},
        {"fdr", {"omegas", "t_obs"}},
        {"detector", {"omega", "omegas", "coupling", "e", "t_obs", "deexcitation", "z"}},
        {"mirror", {"offset", "normal", "motion", "beta", "accel_length", "kappa", "u_min", "u_max", "u_n"}},
    };
    return m;
}

inline const std::map<std::string, std::vector<std::string>>& scenario_sections()
{
    static const std::map<std::string, std::vector<std::string>> m{
        {"ald-causality", {"particle", "switch", "potential", "integrator", "ald"}},
        {"ald-runaway", {"particle", "potential", "integrator", "ald"}},
        {"uniform-acceleration-unruh",
         {"particle", "switch", "potential", "integrator", "field", "noise", "ensemble", "aldl"}},
        {"fdr-check", {"trajectory", "field", "fdr"}},
        {"detector-response", {"trajectory", "field", "detector"}},
        {"mirror-static", {"field", "mirror", "detector"}},
        {"mirror-moving", {"mirror"}},
        {"custom",
         {"particle", "switch", "potential", "integrator", "ald", "trajectory", "field", "noise", "ensemble",
          "aldl"}},
    };
    return m;
}

inline std::set<std::string> allowed_keys(const std::string& scenario)
{
    std::set<std::string> keys{"scenario", "output.dir"};
    for (const auto& sec : scenario_sections().at(scenario))
        for (const auto& k : config_sections().at(sec)) keys.insert(sec + "." + k);
    return keys;
}

template <class E>
E pick(const ConfigFile& c, const std::string& key, const std::map<std::string, E>& options)
{
    const auto v = c.text(key);
    const auto it = options.find(v);
    if (it == options.end()) {
        std::string all;
        for (const auto& [k, _] : options) all += (all.empty() ? "" : ", ") + k;
        c.fail(key, "unknown value '" + v + "' (expected one of: " + all + ")");
    }
    return it->second;
}

} // namespace detail

//---------------------------------------------------------------------------//
// Typed readers
//---------------------------------------------------------------------------//
inline ParticleParams read_particle(const ConfigFile& c)
{
    return ParticleParams::make(c.number("particle.m0"), c.number("particle.e"), c.number("particle.cutoff"),
                                c.number_or("particle.kappa", 1), c.maybe_number("particle.r0"));
}

inline SwitchProfile read_switch(const ConfigFile& c, const ParticleParams& p)
{
    const auto shape = c.has("switch.shape")
                           ? detail::pick<SwitchShape>(c, "switch.shape",
                                                       {{"exponential", SwitchShape::exponential},
                                                        {"smoothstep", SwitchShape::smoothstep}})
                           : SwitchShape::exponential;
    return SwitchProfile::make(shape, c.number_or("switch.tau_d", p.default_tau_d()));
}

inline std::array<bool, 3> read_axes(const ConfigFile& c, const std::string& key)
{
    if (!c.has(key)) return {true, true, true};
    std::array<bool, 3> a{false, false, false};
    for (const auto& w : c.words(key)) {
        if (w == "x") a[0] = true;
        else if (w == "y") a[1] = true;
        else if (w == "z") a[2] = true;
        else c.fail(key, "axes are x, y, z");
    }
    return a;
}

inline ExternalPotential read_potential(const ConfigFile& c)
{
    if (!c.has("potential.variant")) {
        // the push and confinement keys alone imply the combined form
        if (c.has("potential.force") && c.has("potential.k"))
            return ExternalPotential::combined(c.vec<3>("potential.force"), c.number("potential.k"),
                                               c.vec_or<3>("potential.center", {0, 0, 0}),
                                               read_axes(c, "potential.axes"));
        check(!c.has("potential.force") && !c.has("potential.k"), "potential.variant", "required");
        return ExternalPotential::none();
    }
    const auto kind = detail::pick<PotentialKind>(c, "potential.variant",
                                                  {{"none", PotentialKind::none},
                                                   {"linear", PotentialKind::linear},
                                                   {"harmonic", PotentialKind::harmonic},
                                                   {"combined", PotentialKind::combined}});
    const auto center = c.vec_or<3>("potential.center", {0, 0, 0});
    switch (kind) {
    case PotentialKind::none: return ExternalPotential::none();
    case PotentialKind::linear: return ExternalPotential::linear(c.vec<3>("potential.force"));
    case PotentialKind::harmonic:
        return ExternalPotential::harmonic(c.number("potential.k"), center, read_axes(c, "potential.axes"));
    case PotentialKind::combined:
        return ExternalPotential::combined(c.vec<3>("potential.force"), c.number("potential.k"), center,
                                           read_axes(c, "potential.axes"));
    }
    return {};
}

inline void read_integrator(const ConfigFile& c, ALDConfig& a)
{
    if (c.has("integrator.mode"))
        a.mode = detail::pick<IntegratorMode>(c, "integrator.mode",
                                              {{"order_reduced", IntegratorMode::order_reduced},
                                               {"naive", IntegratorMode::naive}});
    a.dt = c.number_or("integrator.dt", 1e-3);
    a.tau_max = c.number_or("integrator.tau_max", 10);
    check(a.dt > 0, "integrator.dt", "must be > 0");
    check(a.tau_max >= a.dt, "integrator.tau_max", "must be >= integrator.dt");
    check(a.tau_max / a.dt <= 2e7, "integrator.tau_max", "more than 2e7 steps");
}

inline FourVector spatial_velocity(const std::array<double, 3>& u)
{
    return four_velocity_from_spatial(u[0], u[1], u[2]);
}

inline ALDConfig read_ald(const ConfigFile& c, bool dressed)
{
    ALDConfig a;
    a.params = read_particle(c);
    a.sw = dressed ? read_switch(c, a.params) : SwitchProfile::for_particle(a.params);
    a.potential = read_potential(c);
    read_integrator(c, a);
    a.force_onset = c.number_or("ald.force_onset", 0);
    check(a.force_onset >= 0, "ald.force_onset", "must be >= 0");
    const auto x = c.vec_or<3>("ald.x0", {0, 0, 0});
    a.x0 = {{0, x[0], x[1], x[2]}};
    a.u0 = spatial_velocity(c.vec_or<3>("ald.u0", {0, 0, 0}));
    const auto a0 = c.vec_or<3>("ald.a0", {0, 0, 0});
    a.a0 = {{0, a0[0], a0[1], a0[2]}};
    return a;
}

inline AnalyticTrajectory read_trajectory(const ConfigFile& c)
{
    enum class K { stat, inertial, hyper };
    const auto k = detail::pick<K>(c, "trajectory.kind",
                                   {{"static", K::stat}, {"inertial", K::inertial}, {"hyperbolic", K::hyper}});
    const auto pos = c.vec_or<3>("trajectory.position", {0, 0, 0});
    switch (k) {
    case K::stat: return AnalyticTrajectory::at_position(pos[0], pos[1], pos[2]);
    case K::inertial: {
        auto t = AnalyticTrajectory::inertial(spatial_velocity(c.vec<3>("trajectory.velocity")));
        t.origin = {{0, pos[0], pos[1], pos[2]}};
        return t;
    }
    case K::hyper: {
        const double a = c.number("trajectory.accel");
        check(a > 0, "trajectory.accel", "must be > 0");
        return AnalyticTrajectory::hyperbolic(a);
    }
    }
    return AnalyticTrajectory::at_position(0, 0, 0);
}

inline FieldState read_field(const ConfigFile& c)
{
    const auto dim = c.integer_or("field.dim", 3);
    check(dim == 1 || dim == 3, "field.dim", "must be 1 or 3");
    enum class S { vac, hot };
    const auto s = detail::pick<S>(c, "field.state", {{"vacuum", S::vac}, {"thermal", S::hot}});
    if (s == S::vac) {
        check(!c.has("field.temperature"), "field.temperature", "only for field.state = thermal");
        return FieldState::vacuum(int(dim));
    }
    const double T = c.number("field.temperature");
    check(T > 0, "field.temperature", "must be > 0");
    return FieldState::thermal(T, int(dim));
}

inline double read_eps(const ConfigFile& c, double d)
{
    const double e = c.number_or("field.eps", d);
    check(e > 0, "field.eps", "regulator must be > 0");
    return e;
}

struct NoiseSettings {
    NoiseGrid grid;
    CovarianceOptions cov;
    double weight = 0.5;
};

inline NoiseSettings read_noise(const ConfigFile& c, const std::string& default_channels)
{
    NoiseSettings s;
    const double dt = c.number_or("noise.dt", 0.1);
    const auto n = c.integer_or("noise.n", 512);
    check(dt > 0, "noise.dt", "must be > 0");
    check(n >= 2 && n <= 8192, "noise.n", "must lie in [2, 8192]");
    s.grid = NoiseGrid::make(0, dt, n);
    s.cov.mask = {false, false, false, false, false};
    const ConfigFile d = ConfigFile::parse("noise.channels = " + default_channels);
    for (const auto& w : (c.has("noise.channels") ? c : d).words("noise.channels")) {
        static const std::map<std::string, int> ids{{"chi", 0}, {"d0", 1}, {"d1", 2}, {"d2", 3}, {"d3", 4}};
        const auto it = ids.find(w);
        if (it == ids.end()) c.fail("noise.channels", "channels are chi, d0, d1, d2, d3");
        s.cov.mask[std::size_t(it->second)] = true;
    }
    s.cov.hbar = c.number_or("noise.hbar", 1);
    check(s.cov.hbar > 0, "noise.hbar", "must be > 0");
    s.weight = c.number_or("noise.weight", 0.5);
    return s;
}

struct EnsembleSettings {
    std::size_t n = 400;
    std::uint64_t base_seed = 0;
};

inline EnsembleSettings read_ensemble(const ConfigFile& c)
{
    EnsembleSettings e;
    e.n = c.integer_or("ensemble.n", 400);
    e.base_seed = c.integer_or("ensemble.base_seed", 0);
    check(e.n >= 2, "ensemble.n", "must be >= 2");
    return e;
}

inline LangevinOptions read_langevin(const ConfigFile& c)
{
    LangevinOptions o;
    o.use_m_inf = c.boolean_or("aldl.use_m_inf", false);
    o.switch_tensors = c.boolean_or("aldl.switch_tensors", true);
    o.hessian_sign = c.number_or("aldl.hessian_sign", 1);
    check(o.hessian_sign == 1 || o.hessian_sign == -1, "aldl.hessian_sign", "must be +1 or -1");
    return o;
}

inline EnsembleOptions read_window(const ConfigFile& c, double tau_end)
{
    EnsembleOptions o;
    o.window_lo = c.number_or("aldl.window_lo", 0.5 * tau_end);
    o.window_hi = c.number_or("aldl.window_hi", tau_end);
    check(o.window_hi > o.window_lo, "aldl.window_hi", "must exceed aldl.window_lo");
    o.component = int(c.integer_or("aldl.component", 2));
    check(o.component >= 0 && o.component <= 3, "aldl.component", "must be 0..3");
    o.segment = c.integer_or("aldl.segment", 0);
    return o;
}

inline std::vector<double> positive_list(const ConfigFile& c, const std::string& key)
{
    const auto v = c.numbers(key);
    for (double x : v) check(x > 0, key, "entries must be > 0");
    return v;
}

inline DetectorConfig read_detector(const ConfigFile& c, double omega)
{
    DetectorConfig d;
    d.omega = omega;
    d.coupling = detail::pick<Coupling>(c, "detector.coupling",
                                        {{"monopole", Coupling::monopole}, {"minimal", Coupling::minimal}});
    d.e = c.number("detector.e");
    d.deexcitation = c.boolean_or("detector.deexcitation", false);
    return d;
}

//---------------------------------------------------------------------------//
// Config and manifest
//---------------------------------------------------------------------------//
struct ScenarioConfig {
    std::string scenario;
    ConfigFile raw;
    std::filesystem::path out = "out";
    std::uint64_t seed = 0;
};

/// Strict parse plus a dry validation of every typed sub-config.
inline ScenarioConfig parse_config(const ConfigFile& raw)
{
    ScenarioConfig s;
    s.raw = raw;
    s.scenario = raw.text("scenario");
    if (!detail::scenario_sections().count(s.scenario)) raw.fail("scenario", "unknown scenario '" + s.scenario + "'");
    raw.reject_unknown(detail::allowed_keys(s.scenario));
    s.out = raw.text_or("output.dir", "out");
    s.seed = raw.integer_or("ensemble.base_seed", 0);

    const auto& secs = detail::scenario_sections().at(s.scenario);
    auto uses = [&](const std::string& sec) { return std::find(secs.begin(), secs.end(), sec) != secs.end(); };
    if (uses("particle")) (void)read_ald(raw, uses("switch"));
    if (uses("trajectory")) (void)read_trajectory(raw);
    if (uses("field")) {
        (void)read_eps(raw, 0.1);
        if (s.scenario != "uniform-acceleration-unruh") (void)read_field(raw);
        else check(!raw.has("field.state") || raw.text("field.state") == "vacuum", "field.state",
                   "this scenario runs the vacuum on the hyperbola");
    }
    if (uses("noise")) (void)read_noise(raw, "chi");
    if (uses("ensemble")) (void)read_ensemble(raw);
    if (uses("aldl")) {
        (void)read_langevin(raw);
        (void)read_window(raw, 1);
    }
    if (uses("fdr")) {
        (void)positive_list(raw, "fdr.omegas");
        check(raw.number_or("fdr.t_obs", 400) > 0, "fdr.t_obs", "must be > 0");
    }
    if (uses("detector")) {
        const auto key = s.scenario == "mirror-static" ? "detector.omega" : "detector.omegas";
        for (double w : positive_list(raw, key)) {
            auto d = DetectorConfig{};
            d.omega = w;
            d.t_obs = raw.number_or("detector.t_obs", (s.scenario == "mirror-static" ? 2000 : 200) / w);
            d.validate();
        }
        (void)read_detector(raw, 1);
        if (s.scenario == "mirror-static") {
            (void)positive_list(raw, "detector.z");
            (void)raw.number("mirror.offset");
            (void)raw.vec<3>("mirror.normal");
        }
    }
    if (s.scenario == "mirror-moving" && raw.text("mirror.motion") == "hyperbolic") {
        const double A = raw.number("mirror.accel_length");
        check(A > 0, "mirror.accel_length", "must be > 0");
        check(raw.number_or("mirror.u_min", 0) > -A, "mirror.u_min",
              "rays with u <= -A never reach the hyperbolic mirror");
    }
    if (s.scenario == "ald-causality")
        check(raw.has("ald.force_onset"), "ald.force_onset", "required for ald-causality");
    if (s.scenario == "uniform-acceleration-unruh") {
        const auto a = read_ald(raw, true);
        check(a.potential.has_linear() && a.potential.force[0] > 0 && a.potential.force[1] == 0
                  && a.potential.force[2] == 0,
              "potential.force", "push must point along +x");
        check(a.potential.has_harmonic() && !a.potential.axes[0], "potential.axes",
              "confinement must be transverse (y and/or z)");
    }
    return s;
}

inline ScenarioConfig parse_config(const std::filesystem::path& p) { return parse_config(ConfigFile::load(p)); }

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct RunManifest {
    std::string scenario;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = kVersion;
    struct File {
        std::string name;
        std::size_t bytes = 0;
        std::string fnv1a;
    };
    std::vector<File> files;
    std::map<std::string, double> summary;

    nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json j;
        j["scenario"] = scenario;
        j["config_hash"] = config_hash;
        j["seed"] = seed;
        j["version"] = version;
        j["files"] = nlohmann::ordered_json::array();
        for (const auto& f : files) j["files"].push_back({{"name", f.name}, {"bytes", f.bytes}, {"fnv1a", f.fnv1a}});
        j["summary"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : summary) {
            if (std::isfinite(v)) j["summary"][k] = v;
            else j["summary"][k] = nullptr;
        }
        return j;
    }
};

//---------------------------------------------------------------------------//
// Pipelines
//---------------------------------------------------------------------------//
namespace detail {

struct Outputs {
    std::vector<std::pair<std::string, std::string>> files;
    std::map<std::string, double> summary;

    std::ostringstream& open(const std::string& name)
    {
        streams_.emplace_back(name, std::make_unique<std::ostringstream>());
        return *streams_.back().second;
    }
    void close_all()
    {
        for (auto& [n, s] : streams_) files.emplace_back(n, s->str());
        streams_.clear();
        std::ostringstream os;
        os << "key,value\n";
        for (const auto& [k, v] : summary) os << k << ',' << format_double(v) << '\n';
        files.emplace_back("summary.csv", os.str());
    }

private:
    std::vector<std::pair<std::string, std::unique_ptr<std::ostringstream>>> streams_;
};

inline void run_ald_causality(const ConfigFile& c, Outputs& o)
{
    const auto cfg = read_ald(c, true);
    const auto res = integrate_ald(cfg);
    write_worldline_csv(o.open("worldline.csv"), res.worldline);
    o.summary["preacceleration_probe"] = preacceleration_probe(res.worldline, cfg.force_onset);
    o.summary["force_onset"] = cfg.force_onset;
    o.summary["tau_d"] = cfg.sw.tau_d;
    o.summary["runaway_flag"] = res.runaway ? 1 : 0;
}

inline void run_ald_runaway(const ConfigFile& c, Outputs& o)
{
    auto cfg = read_ald(c, false);
    cfg.mode = IntegratorMode::naive;
    cfg.runaway_bound = std::numeric_limits<double>::infinity();
    const auto res = integrate_ald(cfg);
    write_worldline_csv(o.open("worldline.csv"), res.worldline);
    o.summary["growth_rate"] = fit_growth_rate(res.worldline);
    o.summary["expected_rate"] = cfg.params.m_inf() / cfg.params.e2();
}

inline void run_unruh(const ConfigFile& c, Outputs& o, std::uint64_t seed)
{
    // mean equation: the dressing transient relaxes onto a hyperbola
    const auto ald = read_ald(c, true);
    const auto mean = integrate_ald(ald);
    write_worldline_csv(o.open("mean_worldline.csv"), mean.worldline);
    const double a = ald.potential.force[0] / ald.params.m_inf();
    const auto& last = mean.worldline.back();
    o.summary["accel"] = a;
    o.summary["mean_accel_rel_dev"] = std::abs(std::sqrt(-minkowski_dot(last.acc, last.acc)) / a - 1);

    // fluctuations about the closed-form hyperbola, and a static reference
    const auto ns = read_noise(c, "d2");
    const auto ens = read_ensemble(c);
    const auto lopt = read_langevin(c);
    const auto win = read_window(c, ns.grid.tau(ns.grid.n - 1));
    const CorrelatorKernel vac(KernelKind::hadamard, FieldState::vacuum(), read_eps(c, 0.6));
    ExternalPotential confine = ald.potential;
    confine.kind = PotentialKind::harmonic;
    auto run = [&](const NoisePath& path) {
        const auto setup = make_ensemble_setup(path, ns.grid, vac, ald.params, ald.sw, confine, ns.cov, lopt, ns.weight);
        return run_ensemble(setup, ens.n, seed, win);
    };
    const auto acc = run(AnalyticTrajectory::hyperbolic(a));
    const auto rest = run(AnalyticTrajectory::at_position(0, 0, 0));
    write_stats_csv(o.open("stats_accelerated.csv"), acc);
    write_stats_csv(o.open("stats_static.csv"), rest);
    if (acc.velocity_spectrum) write_spectrum_csv(o.open("velocity_spectrum.csv"), *acc.velocity_spectrum);

    const double m = lopt.use_m_inf ? ald.params.m_inf() : mass_m(win.window_lo, ald.params, ald.sw);
    const double omega0 = std::sqrt(confine.k / m);
    const double ratio = acc.window_mean_sq / rest.window_mean_sq;
    o.summary["omega0"] = omega0;
    o.summary["variance_accelerated"] = acc.window_mean_sq;
    o.summary["variance_accelerated_sem"] = acc.window_sem;
    o.summary["variance_static"] = rest.window_mean_sq;
    o.summary["variance_static_sem"] = rest.window_sem;
    o.summary["variance_ratio"] = ratio;
    o.summary["t_unruh"] = a / (2 * std::numbers::pi);
    const double ratio_sem = ratio * std::hypot(acc.window_sem / acc.window_mean_sq, rest.window_sem / rest.window_mean_sq);
    const double t_eff = ratio > 1 ? fit_temperature_from_variance(ratio, omega0) : std::nan("");
    o.summary["variance_ratio_sem"] = ratio_sem;
    o.summary["t_eff"] = t_eff;
    if (ratio - ratio_sem > 1) {
        // first-order propagation through the coth inversion
        const double lo = fit_temperature_from_variance(ratio - ratio_sem, omega0);
        const double hi = fit_temperature_from_variance(ratio + ratio_sem, omega0);
        o.summary["t_eff_sem"] = 0.5 * (hi - lo);
    }
    o.summary["members"] = double(ens.n);
}

inline void run_fdr(const ConfigFile& c, Outputs& o)
{
    const auto traj = read_trajectory(c);
    const auto st = read_field(c);
    const auto w = positive_list(c, "fdr.omegas");
    const auto r = fdr_check(traj, CorrelatorKernel(KernelKind::wightman, st, read_eps(c, 0.01)), w,
                             c.number_or("fdr.t_obs", 400));
    auto& os = o.open("fdr.csv");
    os << "omega,noise,dissipation,ratio,coth_fit\n";
    for (std::size_t i = 0; i < r.omega.size(); ++i)
        os << format_double(r.omega[i]) << ',' << format_double(r.noise[i]) << ','
           << format_double(r.dissipation[i]) << ',' << format_double(r.ratio[i]) << ','
           << format_double(1 / std::tanh(r.omega[i] / (2 * r.t_eff))) << '\n';
    o.summary["t_eff"] = r.t_eff;
    o.summary["max_rel_dev"] = r.max_rel_dev;
    if (traj.kind == TrajectoryKind::uniform_acceleration) o.summary["t_expected"] = traj.accel / (2 * std::numbers::pi);
    else if (st.is_thermal() && traj.kind == TrajectoryKind::static_point) o.summary["t_expected"] = st.temperature;
}

inline void run_detector(const ConfigFile& c, Outputs& o)
{
    const auto traj = read_trajectory(c);
    const auto st = read_field(c);
    const CorrelatorKernel k(KernelKind::wightman, st, read_eps(c, 1e-3));
    std::vector<DistanceRow> rows;
    double worst = 0;
    for (double w : positive_list(c, "detector.omegas")) {
        auto d = read_detector(c, w);
        d.trajectory = traj;
        d.kernel = k;
        d.t_obs = c.number_or("detector.t_obs", 200 / w);
        const auto r = response_rate(d);
        rows.push_back({w, std::numeric_limits<double>::infinity(), r.rate, r.error, 0, 0});
        // closed form where one exists
        double T = 0;
        if (traj.kind == TrajectoryKind::uniform_acceleration) T = traj.accel / (2 * std::numbers::pi);
        else if (st.is_thermal() && traj.kind == TrajectoryKind::static_point) T = st.temperature;
        if (T > 0 && d.coupling == Coupling::monopole && st.spatial_dim == 3) {
            const double sw = d.deexcitation ? -w : w;
            const double ref = d.e * d.e * sw / (2 * std::numbers::pi) / std::expm1(sw / T);
            worst = std::max(worst, std::abs(r.rate / ref - 1));
        }
    }
    write_response_csv(o.open("response.csv"), rows);
    o.summary["max_rel_dev_planck"] = worst;
}

inline void run_mirror_static(const ConfigFile& c, Outputs& o)
{
    const auto st = read_field(c);
    check(st.spatial_dim == 3, "field.dim", "the static plane mirror lives in 3+1");
    const auto normal = c.vec<3>("mirror.normal");
    const double w = c.number("detector.omega");
    check(w > 0, "detector.omega", "must be > 0");
    auto d = read_detector(c, w);
    d.kernel = CorrelatorKernel(KernelKind::wightman, st, read_eps(c, 1e-3),
                                MirrorConfig::plane(c.number("mirror.offset"), normal));
    d.t_obs = c.number_or("detector.t_obs", 2000 / w);
    const auto zs = positive_list(c, "detector.z");
    const auto rows = response_vs_distance(d, zs);
    write_response_csv(o.open("response.csv"), rows);
    auto& os = o.open("modification.csv");
    os << "z,modification,bracket\n";
    double worst = 0;
    for (const auto& r : rows) {
        const double x = 2 * w * r.z;
        const double bracket = 1 - std::sin(x) / x;
        os << format_double(r.z) << ',' << format_double(r.modification) << ',' << format_double(bracket) << '\n';
        if (r.free_rate != 0) worst = std::max(worst, std::abs(r.modification - bracket));
    }
    o.summary["free_rate"] = rows.empty() ? 0 : rows.front().free_rate;
    o.summary["max_abs_dev_bracket"] = worst;
}

inline void run_mirror_moving(const ConfigFile& c, Outputs& o)
{
    enum class M { rest, uniform, hyper, expo };
    const auto kind = pick<M>(c, "mirror.motion",
                              {{"rest", M::rest},
                               {"uniform", M::uniform},
                               {"hyperbolic", M::hyper},
                               {"exponential_map", M::expo}});
    const double offset = c.number_or("mirror.offset", 0);
    std::optional<RayMap> map;
    double u_lo_bound = -std::numeric_limits<double>::infinity();
    switch (kind) {
    case M::rest: map = build_ray_map(MirrorMotion::at_rest(offset)); break;
    case M::uniform: map = build_ray_map(MirrorMotion::uniform(c.number("mirror.beta"), offset)); break;
    case M::hyper: {
        const double A = c.number("mirror.accel_length");
        check(A > 0, "mirror.accel_length", "must be > 0");
        map = build_ray_map(MirrorMotion::hyperbolic(A));
        u_lo_bound = -A;
        break;
    }
    case M::expo: {
        const double kappa = c.number("mirror.kappa");
        check(kappa > 0, "mirror.kappa", "must be > 0");
        map = RayMap::analytic([kappa](double u) {
            const double e = std::exp(-kappa * u);
            return RayJet{-e / kappa, e, -kappa * e, kappa * kappa * e};
        });
        break;
    }
    }
    const double lo = c.number_or("mirror.u_min", kind == M::hyper ? 0.0 : -2.0);
    const double hi = c.number_or("mirror.u_max", 2.0);
    const auto n = c.integer_or("mirror.u_n", 41);
    check(lo > u_lo_bound, "mirror.u_min", "rays with u <= -A never reach the hyperbolic mirror");
    check(hi > lo && n >= 2, "mirror.u_max", "need u_max > u_min and u_n >= 2");
    auto& os = o.open("raymap.csv");
    os << "u,p,dp,ddp,dddp,flux\n";
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = lo + (hi - lo) * double(i) / double(n - 1);
        const auto j = map->jet(u);
        const double f = mirror_energy_flux(*map, u);
        worst = std::max(worst, std::abs(f));
        os << format_double(u);
        for (double v : j) os << ',' << format_double(v);
        os << ',' << format_double(f) << '\n';
    }
    o.summary["max_abs_flux"] = worst;
}

inline void run_custom(const ConfigFile& c, Outputs& o, std::uint64_t seed)
{
    const auto ald = read_ald(c, true);
    const auto mean = integrate_ald(ald);
    write_worldline_csv(o.open("worldline.csv"), mean.worldline);
    const auto traj = read_trajectory(c);
    const auto st = read_field(c);
    const auto ns = read_noise(c, "chi,d0,d1,d2,d3");
    const CorrelatorKernel k(KernelKind::hadamard, st, read_eps(c, 0.3));
    const auto setup = make_ensemble_setup(traj, ns.grid, k, ald.params, ald.sw, ald.potential, ns.cov,
                                           read_langevin(c), ns.weight);
    const auto r = sample_noise(setup.cov, seed);
    const auto eta = assemble_eta(setup.mean, r, ald.params.e, ns.weight);
    write_realization_csv(o.open("realization.csv"), r, eta);
    const auto f = integrate_aldl(setup.coeffs, eta, seed);
    write_fluctuation_csv(o.open("fluctuation.csv"), f);
    o.summary["noise_jitter"] = setup.cov.jitter;
    o.summary["runaway_flag"] = (mean.runaway || f.runaway) ? 1 : 0;
}

} // namespace detail

/// Run the named pipeline, write its CSVs and manifest.json into cfg.out.
inline RunManifest run_scenario(const ScenarioConfig& cfg)
{
    const auto& c = cfg.raw;
    detail::Outputs o;
    const std::string& s = cfg.scenario;
    if (s == "ald-causality") detail::run_ald_causality(c, o);
    else if (s == "ald-runaway") detail::run_ald_runaway(c, o);
    else if (s == "uniform-acceleration-unruh") detail::run_unruh(c, o, cfg.seed);
    else if (s == "fdr-check") detail::run_fdr(c, o);
    else if (s == "detector-response") detail::run_detector(c, o);
    else if (s == "mirror-static") detail::run_mirror_static(c, o);
    else if (s == "mirror-moving") detail::run_mirror_moving(c, o);
    else detail::run_custom(c, o, cfg.seed);
    o.close_all();

    RunManifest m;
    m.scenario = s;
    m.config_hash = hex64(fnv1a(c.canonical()));
    m.seed = cfg.seed;
    m.summary = o.summary;
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    require(!ec, Errc::IoError, "cannot create output directory " + cfg.out.string());
    for (const auto& [name, body] : o.files) {
        std::ofstream f(cfg.out / name, std::ios::binary);
        f << body;
        require(f.good(), Errc::IoError, "cannot write " + (cfg.out / name).string());
        m.files.push_back({name, body.size(), hex64(fnv1a(body))});
    }
    std::ofstream mf(cfg.out / "manifest.json", std::ios::binary);
    mf << m.to_json().dump(2) << '\n';
    require(mf.good(), Errc::IoError, "cannot write manifest.json");
    return m;
}

} // namespace qfb
