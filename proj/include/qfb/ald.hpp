#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qfb/errors.hpp"
#include "qfb/geometry.hpp"

namespace qfb {

//---------------------------------------------------------------------------//
// Particle parameters and dressing profiles
//---------------------------------------------------------------------------//
struct ParticleParams {
    double m0 = 1;
    double e = 0;
    double cutoff = 1; // Lambda
    double kappa = 1;
    double r0 = 0;

    /// Validating factory; r0 defaults to e^2 / (4 pi m0).
    static ParticleParams make(double m0, double e, double cutoff, double kappa = 1,
                               std::optional<double> r0 = std::nullopt)
    {
        ParticleParams p{m0, e, cutoff, kappa, 0};
        require(m0 > 0, Errc::ValidationError, "particle.m0 must be > 0");
        require(cutoff > 0, Errc::ValidationError, "particle.cutoff must be > 0");
        require(kappa >= 0, Errc::ValidationError, "particle.kappa must be >= 0");
        require(m0 > p.mass_shift(), Errc::ValidationError,
                "runaway-free condition m0 > kappa e^2 Lambda / 8pi violated: m0 = "
                    + std::to_string(m0) + ", kappa e^2 Lambda / 8pi = "
                    + std::to_string(p.mass_shift()));
        p.r0 = r0 ? *r0 : e * e / (4 * std::numbers::pi * m0);
        require(p.r0 > 0, Errc::ValidationError, "particle.r0 must be > 0 (charge e = 0?)");
        return p;
    }

    double e2() const { return e * e; }
    /// kappa e^2 Lambda / 8 pi
    double mass_shift() const { return kappa * e * e * cutoff / (8 * std::numbers::pi); }
    double m_inf() const { return m0 - mass_shift(); }
    double default_tau_d() const { return m0 * r0 / cutoff; }
};

enum class SwitchShape { exponential, smoothstep };

struct SwitchProfile {
    SwitchShape shape = SwitchShape::exponential;
    double tau_d = 1;

    static SwitchProfile make(SwitchShape s, double tau_d)
    {
        require(tau_d > 0, Errc::ValidationError, "switch.tau_d must be > 0");
        return {s, tau_d};
    }
    static SwitchProfile for_particle(const ParticleParams& p,
                                      SwitchShape s = SwitchShape::exponential)
    {
        return make(s, p.default_tau_d());
    }
};

/// g(tau): 0 at tau = 0, monotone, 1 at late times.
inline double switch_g(double tau, const SwitchProfile& p)
{
    if (tau <= 0) return 0;
    if (p.shape == SwitchShape::exponential) return -std::expm1(-tau / p.tau_d);
    const double s = tau / (3 * p.tau_d);
    if (s >= 1) return 1;
    return s * s * s * (10 + s * (-15 + 6 * s));
}

/// dg/dtau
inline double switch_dg(double tau, const SwitchProfile& p)
{
    if (tau < 0) return 0;
    if (p.shape == SwitchShape::exponential) return std::exp(-tau / p.tau_d) / p.tau_d;
    const double s = tau / (3 * p.tau_d);
    if (s >= 1) return 0;
    return 30 * s * s * (1 - s) * (1 - s) / (3 * p.tau_d);
}

/// m(tau) = m0 - (kappa e^2 Lambda / 8 pi) g_m(tau)
inline double mass_m(double tau, const ParticleParams& params, const SwitchProfile& profile)
{
    return params.m0 - params.mass_shift() * switch_g(tau, profile);
}

inline double mass_dm(double tau, const ParticleParams& params, const SwitchProfile& profile)
{
    return -params.mass_shift() * switch_dg(tau, profile);
}

/// e^2 g (u (a.a) + jerk)
inline FourVector rr_force(const WorldlineState& s, double g, double e)
{
    require(s.jerk.has_value(), Errc::MissingJerk, "rr_force needs jerk data");
    const double a2 = s.acc_sq ? *s.acc_sq : minkowski_dot(s.acc, s.acc);
    return (s.u * a2 + *s.jerk) * (e * e * g);
}

//---------------------------------------------------------------------------//
// External potential
//---------------------------------------------------------------------------//
enum class PotentialKind { none, linear, harmonic, combined };

/*!
 * Scalar potential energy V(x) = -F.x + (k/2) sum_i (x^i - c^i)^2 over the
 * confined axes.
 *
 * The lab gradient E = -grad V acts as an electric-type push,
 * f^0 = E.u, f^i = E^i u^0, which is orthogonal to u and reduces to
 * m d^2x/dt^2 = -grad V at low speed. A constant E gives exact hyperbolic
 * motion with a = |E| / m.
 */
struct ExternalPotential {
    PotentialKind kind = PotentialKind::none;
    std::array<double, 3> force{0, 0, 0};
    double k = 0;
    std::array<double, 3> center{0, 0, 0};
    std::array<bool, 3> axes{true, true, true};

    static ExternalPotential none() { return {}; }
    static ExternalPotential linear(std::array<double, 3> F)
    {
        ExternalPotential p;
        p.kind = PotentialKind::linear;
        p.force = F;
        return p;
    }
    static ExternalPotential harmonic(double k, std::array<double, 3> center = {0, 0, 0},
                                      std::array<bool, 3> axes = {true, true, true})
    {
        require(k > 0, Errc::ValidationError, "potential.k must be > 0");
        ExternalPotential p;
        p.kind = PotentialKind::harmonic;
        p.k = k;
        p.center = center;
        p.axes = axes;
        return p;
    }
    static ExternalPotential combined(std::array<double, 3> F, double k,
                                      std::array<double, 3> center = {0, 0, 0},
                                      std::array<bool, 3> axes = {true, true, true})
    {
        ExternalPotential p = harmonic(k, center, axes);
        p.kind = PotentialKind::combined;
        p.force = F;
        return p;
    }

    bool has_linear() const { return kind == PotentialKind::linear || kind == PotentialKind::combined; }
    bool has_harmonic() const { return kind == PotentialKind::harmonic || kind == PotentialKind::combined; }

    double V(const FourVector& x) const
    {
        double v = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            if (has_linear()) v -= force[i] * x[i + 1];
            if (has_harmonic() && axes[i]) v += 0.5 * k * (x[i + 1] - center[i]) * (x[i + 1] - center[i]);
        }
        return v;
    }
    /// dV/dx^mu
    FourVector gradient(const FourVector& x) const
    {
        FourVector g{};
        for (std::size_t i = 0; i < 3; ++i) {
            if (has_linear()) g[i + 1] -= force[i];
            if (has_harmonic() && axes[i]) g[i + 1] += k * (x[i + 1] - center[i]);
        }
        return g;
    }
    /// d^2 V / dx^mu dx^nu
    std::array<std::array<double, 4>, 4> hessian() const
    {
        std::array<std::array<double, 4>, 4> h{};
        if (has_harmonic())
            for (std::size_t i = 0; i < 3; ++i)
                if (axes[i]) h[i + 1][i + 1] = k;
        return h;
    }

    /// E^i = -dV/dx^i
    std::array<double, 3> field(const FourVector& x) const
    {
        const FourVector g = gradient(x);
        return {-g[1], -g[2], -g[3]};
    }
    FourVector force_at(const FourVector& x, const FourVector& u) const
    {
        const auto E = field(x);
        return {{E[0] * u[1] + E[1] * u[2] + E[2] * u[3], E[0] * u[0], E[1] * u[0], E[2] * u[0]}};
    }
    /// d f / d tau along (x, u, a).
    FourVector force_rate(const FourVector& x, const FourVector& u, const FourVector& a) const
    {
        const auto E = field(x);
        std::array<double, 3> dE{0, 0, 0};
        if (has_harmonic())
            for (std::size_t i = 0; i < 3; ++i)
                if (axes[i]) dE[i] = -k * u[i + 1];
        FourVector r{};
        for (std::size_t i = 0; i < 3; ++i) {
            r[0] += dE[i] * u[i + 1] + E[i] * a[i + 1];
            r[i + 1] = dE[i] * u[0] + E[i] * a[0];
        }
        return r;
    }
};

//---------------------------------------------------------------------------//
// Integration
//---------------------------------------------------------------------------//
enum class IntegratorMode { order_reduced, naive };

struct ALDConfig {
    ParticleParams params;
    ExternalPotential potential;
    SwitchProfile sw;
    std::optional<SwitchProfile> mass_switch; // defaults to sw
    IntegratorMode mode = IntegratorMode::order_reduced;
    double dt = 1e-3;
    double tau_max = 10;
    FourVector x0{};
    FourVector u0 = at_rest();
    FourVector a0{};            // naive mode only
    double force_onset = 0;     // external force acts for tau >= force_onset
    bool naive_use_switch = false;
    double runaway_bound = 1e6; // |a| above this raises the runaway flag

    const SwitchProfile& mass_profile() const { return mass_switch ? *mass_switch : sw; }
};

struct ALDResult {
    Worldline worldline;
    bool runaway = false; // warning-level flag
    std::vector<FourVector> rr; // radiation-reaction force at each sample
};

namespace detail {

struct ReducedAcc {
    FourVector acc, jerk;
    double g;
};

inline ReducedAcc reduced_acceleration(const ALDConfig& c, double tau, const FourVector& x,
                                       const FourVector& u)
{
    const bool on = tau >= c.force_onset;
    const FourVector f = on ? c.potential.force_at(x, u) : FourVector{};
    const double m = mass_m(tau, c.params, c.mass_profile());
    const double dm = mass_dm(tau, c.params, c.mass_profile());
    const double g = switch_g(tau, c.sw);
    const double e2 = c.params.e2();
    FourVector a = f * (1 / m), j{};
    for (int sweep = 0; sweep < 2; ++sweep) {
        const FourVector df = on ? c.potential.force_rate(x, u, a) : FourVector{};
        j = df * (1 / m) - f * (dm / (m * m));
        a = (f + (u * minkowski_dot(a, a) + j) * (e2 * g)) * (1 / m);
    }
    return {project_orthogonal(a, u), j, g};
}

} // namespace detail

/*!
 * Integrate the dressed radiation-reaction equation with fixed-step RK4.
 *
 * Order-reduced mode replaces the jerk by the derivative of the lower-order
 * acceleration and needs only (x, u). Naive mode evolves (x, u, a) with the
 * third-order equation and g = 1.
 */
inline ALDResult integrate_ald(const ALDConfig& c)
{
    require(c.dt > 0 && c.tau_max > 0, Errc::ValidationError, "integrator dt and tau_max must be > 0");
    const auto n = static_cast<std::size_t>(std::llround(c.tau_max / c.dt));
    require(n >= 1, Errc::ValidationError, "tau_max must be at least dt");
    ALDResult res;
    std::vector<WorldlineState> out;
    out.reserve(n + 1);
    res.rr.reserve(n + 1);
    FourVector x = c.x0, u = renormalize_velocity(c.u0);
    const double e2 = c.params.e2();

    auto check = [](const FourVector& v, double tau) {
        const double s = minkowski_dot(v, v);
        require(std::isfinite(s) && s > 0, Errc::NonTimelikeStep,
                "velocity left the future cone at tau = " + std::to_string(tau));
    };

    if (c.mode == IntegratorMode::order_reduced) {
        for (std::size_t i = 0;; ++i) {
            const double tau = c.dt * double(i);
            const auto r = detail::reduced_acceleration(c, tau, x, u);
            WorldlineState s{tau, x, u, r.acc, r.jerk, std::nullopt};
            res.rr.push_back((u * minkowski_dot(r.acc, r.acc) + r.jerk) * (e2 * r.g));
            if (max_abs(r.acc) > c.runaway_bound) res.runaway = true;
            out.push_back(s);
            if (i == n) break;
            const double h = c.dt;
            auto acc = [&](double t, const FourVector& xx, const FourVector& uu) {
                return detail::reduced_acceleration(c, t, xx, uu).acc;
            };
            const FourVector k1x = u, k1u = r.acc;
            const FourVector k2x = u + k1u * (h / 2), k2u = acc(tau + h / 2, x + k1x * (h / 2), k2x);
            const FourVector k3x = u + k2u * (h / 2), k3u = acc(tau + h / 2, x + k2x * (h / 2), k3x);
            const FourVector k4x = u + k3u * h, k4u = acc(tau + h, x + k3x * h, k4x);
            x = x + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6);
            const FourVector un = u + (k1u + k2u * 2.0 + k3u * 2.0 + k4u) * (h / 6);
            check(un, tau + h);
            u = renormalize_velocity(un);
        }
    } else {
        require(!c.naive_use_switch, Errc::GSingular,
                "naive third-order mode cannot divide by g(tau): g(0) = 0");
        require(e2 > 0, Errc::ValidationError, "naive mode needs e != 0");
        const double m = c.params.m_inf();
        FourVector a = project_orthogonal(c.a0, u);
        auto jerk = [&](double t, const FourVector& xx, const FourVector& uu, const FourVector& aa) {
            const FourVector f = t >= c.force_onset ? c.potential.force_at(xx, uu) : FourVector{};
            return (aa * m - f) * (1 / e2) - uu * minkowski_dot(aa, aa);
        };
        for (std::size_t i = 0;; ++i) {
            const double tau = c.dt * double(i);
            const FourVector j = jerk(tau, x, u, a);
            out.push_back({tau, x, u, a, j, std::nullopt});
            res.rr.push_back((u * minkowski_dot(a, a) + j) * e2);
            if (max_abs(a) > c.runaway_bound) res.runaway = true;
            if (i == n) break;
            const double h = c.dt;
            const FourVector k1x = u, k1u = a, k1a = j;
            const FourVector k2x = u + k1u * (h / 2), k2u = a + k1a * (h / 2);
            const FourVector k2a = jerk(tau + h / 2, x + k1x * (h / 2), k2x, k2u);
            const FourVector k3x = u + k2u * (h / 2), k3u = a + k2a * (h / 2);
            const FourVector k3a = jerk(tau + h / 2, x + k2x * (h / 2), k3x, k3u);
            const FourVector k4x = u + k3u * h, k4u = a + k3a * h;
            const FourVector k4a = jerk(tau + h, x + k3x * h, k4x, k4u);
            x = x + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6);
            const FourVector un = u + (k1u + k2u * 2.0 + k3u * 2.0 + k4u) * (h / 6);
            a = a + (k1a + k2a * 2.0 + k3a * 2.0 + k4a) * (h / 6);
            check(un, tau + h);
            require(std::isfinite(max_abs(a)), Errc::NonTimelikeStep,
                    "acceleration overflowed at tau = " + std::to_string(tau + h));
            u = renormalize_velocity(un);
            a = project_orthogonal(a, u);
        }
    }
    res.worldline = Worldline(std::move(out), InterpOrder::cubic);
    return res;
}

/// max |u(tau) - u(0)| over samples strictly before the force onset.
inline double preacceleration_probe(const Worldline& w, double force_onset)
{
    double worst = 0;
    const FourVector u0 = w.front().u;
    for (const auto& s : w.samples()) {
        if (s.tau >= force_onset) break;
        worst = std::max(worst, max_abs(s.u - u0));
    }
    return worst;
}

inline double preacceleration_probe(const ALDConfig& c)
{
    if (c.force_onset <= 0) return 0;
    return preacceleration_probe(integrate_ald(c).worldline, c.force_onset);
}

/// Least-squares slope of ln|a| against tau over samples with |a| > 0.
inline double fit_growth_rate(const Worldline& w)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = 0;
    for (const auto& s : w.samples()) {
        const double m = std::sqrt(std::abs(minkowski_dot(s.acc, s.acc)));
        if (!(m > 0)) continue;
        const double y = std::log(m);
        sx += s.tau; sy += y; sxx += s.tau * s.tau; sxy += s.tau * y;
        n += 1;
    }
    require(n >= 2, Errc::InvalidArgument, "growth fit needs two nonzero samples");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace qfb
