#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "qfb/ald.hpp"
#include "qfb/noise.hpp"
#include "qfb/parallel.hpp"
#include "qfb/spectral.hpp"

namespace qfb {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

inline Vec4 to_eigen(const FourVector& v) { return {v[0], v[1], v[2], v[3]}; }
inline FourVector from_eigen(const Vec4& v) { return {{v[0], v[1], v[2], v[3]}}; }

inline const Mat4& metric()
{
    static const Mat4 g = Eigen::Vector4d(1, -1, -1, -1).asDiagonal();
    return g;
}

//---------------------------------------------------------------------------//
// Coefficients
//---------------------------------------------------------------------------//
struct LangevinOptions {
    bool switch_tensors = true; // multiply R, S by g(tau)
    bool use_m_inf = false;     // m_inf instead of m(tau)
    double hessian_sign = 1;    // +1: restoring for a confining V
};

/*!
 * R, S and the potential Hessian on the noise grid, stored as mixed tensors
 * T^mu_nu so that they act directly on upper-index z.
 */
struct LangevinCoefficients {
    NoiseGrid grid;
    double c = 0; // e^2 / 8 pi
    std::vector<Mat4> R, S, dR;
    std::vector<double> g, m, dm;
    Mat4 H = Mat4::Zero();

    Mat4 R_lower(std::size_t i) const { return metric() * R[i]; }
    Mat4 S_lower(std::size_t i) const { return metric() * S[i]; }
};

inline LangevinCoefficients build_coefficients(std::span<const WorldlineState> mean, const NoiseGrid& grid,
                                               const ParticleParams& params, const SwitchProfile& sw,
                                               const ExternalPotential& potential = {},
                                               const LangevinOptions& opt = {},
                                               std::optional<SwitchProfile> mass_switch = std::nullopt)
{
    require(mean.size() == grid.n, Errc::GridMismatch, "mean worldline does not match the grid");
    LangevinCoefficients k;
    k.grid = grid;
    k.c = params.e2() / (8 * std::numbers::pi);
    const auto h = potential.hessian();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) k.H(a, b) = opt.hessian_sign * h[a][b];
    const SwitchProfile& mp = mass_switch ? *mass_switch : sw;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const auto& s = mean[i];
        require(s.jerk.has_value(), Errc::MissingJerk, "mean worldline has no jerk data");
        const double g = opt.switch_tensors ? switch_g(s.tau, sw) : 1.0;
        const double dg = opt.switch_tensors ? switch_dg(s.tau, sw) : 0.0;
        const Vec4 u = to_eigen(s.u), a = to_eigen(s.acc), j = to_eigen(*s.jerk);
        const Vec4 ul = metric() * u, al = metric() * a, jl = metric() * j;
        const double a2 = s.acc_sq ? *s.acc_sq : minkowski_dot(s.acc, s.acc);
        const Mat4 P = Mat4::Identity() - u * ul.transpose();
        k.g.push_back(g);
        k.R.push_back(g * P);
        k.dR.push_back(dg * P - g * (a * ul.transpose() + u * al.transpose()));
        k.S.push_back(g * (a2 * Mat4::Identity() - u * jl.transpose()));
        if (opt.use_m_inf) {
            k.m.push_back(params.m_inf());
            k.dm.push_back(0);
        } else {
            k.m.push_back(mass_m(s.tau, params, mp));
            k.dm.push_back(mass_dm(s.tau, params, mp));
        }
    }
    return k;
}

//---------------------------------------------------------------------------//
// Integration
//---------------------------------------------------------------------------//
struct FluctuationTrajectory {
    NoiseGrid grid;
    std::uint64_t seed = 0;
    std::vector<FourVector> z, zdot, zddot;
    bool runaway = false;
};

struct AldlInitial {
    FourVector z{}, zdot{};
};

/*!
 * Solve m z'' = eta - H z + c (S z' + R z''') with z''' replaced by the
 * derivative of the lower-order acceleration (eta - H z) / m.
 *
 * The noise derivative that this produces is absorbed by evolving
 * p = z' - Q eta, Q = c R / m^2, so eta is only ever sampled, never
 * differentiated. eta is lower-index, as assembled by the noise module.
 * RK4 with coefficients and eta averaged at the half step.
 */
inline FluctuationTrajectory integrate_aldl(const LangevinCoefficients& k, std::span<const FourVector> eta,
                                            std::uint64_t seed = 0, const AldlInitial& init = {},
                                            double runaway_bound = 1e6)
{
    const std::size_t n = k.grid.n;
    require(eta.size() == n && k.R.size() == n, Errc::GridMismatch, "noise and coefficient grids differ");
    struct Coef {
        Mat4 R, S, dR;
        double m, dm;
        Vec4 eta;
    };
    auto at = [&](std::size_t i) {
        return Coef{k.R[i], k.S[i], k.dR[i], k.m[i], k.dm[i], metric() * to_eigen(eta[i])};
    };
    auto mid = [](const Coef& a, const Coef& b) {
        return Coef{(a.R + b.R) / 2, (a.S + b.S) / 2, (a.dR + b.dR) / 2, (a.m + b.m) / 2, (a.dm + b.dm) / 2,
                    (a.eta + b.eta) / 2};
    };
    const double c = k.c;
    const Mat4& H = k.H;
    auto Qof = [&](const Coef& q) -> Mat4 { return c * q.R / (q.m * q.m); };
    // returns (z', p') for state (z, p)
    auto rhs = [&](const Coef& q, const Vec4& z, const Vec4& p, Vec4& zd, Vec4& pd) {
        const Mat4 Q = Qof(q);
        const Mat4 dQ = c * (q.dR / (q.m * q.m) - 2 * q.dm * q.R / (q.m * q.m * q.m));
        zd = p + Q * q.eta;
        const Vec4 lower = q.eta - H * z;
        pd = (lower + c * q.S * zd - (c / q.m) * q.R * (H * zd) - (c * q.dm / (q.m * q.m)) * q.R * lower) / q.m
             - dQ * q.eta;
    };

    FluctuationTrajectory out;
    out.grid = k.grid;
    out.seed = seed;
    out.z.resize(n);
    out.zdot.resize(n);
    out.zddot.resize(n);
    Coef c0 = at(0);
    Vec4 z = to_eigen(init.z);
    Vec4 p = to_eigen(init.zdot) - Qof(c0) * c0.eta;
    const double h = k.grid.dt;
    for (std::size_t i = 0;; ++i) {
        Vec4 zd, pd;
        rhs(c0, z, p, zd, pd);
        out.z[i] = from_eigen(z);
        out.zdot[i] = from_eigen(zd);
        if (!std::isfinite(z.norm()) || z.cwiseAbs().maxCoeff() > runaway_bound) out.runaway = true;
        // z'' = p' + Q' eta + Q eta', with eta' from grid differences
        {
            const Mat4 dQ = c * (c0.dR / (c0.m * c0.m) - 2 * c0.dm * c0.R / (c0.m * c0.m * c0.m));
            const std::size_t lo = i == 0 ? 0 : i - 1, hi = i + 1 < n ? i + 1 : n - 1;
            const Vec4 deta = metric() * (to_eigen(eta[hi]) - to_eigen(eta[lo])) / (h * double(hi - lo));
            out.zddot[i] = from_eigen(pd + dQ * c0.eta + Qof(c0) * deta);
        }
        if (i + 1 == n) break;
        const Coef c1 = at(i + 1), cm = mid(c0, c1);
        Vec4 k2z, k2p, k3z, k3p, k4z, k4p;
        rhs(cm, z + h / 2 * zd, p + h / 2 * pd, k2z, k2p);
        rhs(cm, z + h / 2 * k2z, p + h / 2 * k2p, k3z, k3p);
        rhs(c1, z + h * k3z, p + h * k3p, k4z, k4p);
        z += h / 6 * (zd + 2 * k2z + 2 * k3z + k4z);
        p += h / 6 * (pd + 2 * k2p + 2 * k3p + k4p);
        c0 = c1;
    }
    return out;
}

//---------------------------------------------------------------------------//
// Ensembles
//---------------------------------------------------------------------------//
struct EnsembleSetup {
    NoiseCovariance cov;
    std::vector<WorldlineState> mean;
    LangevinCoefficients coeffs;
    double e = 0;
    double weight = 0.5;
};

inline EnsembleSetup make_ensemble_setup(const NoisePath& path, const NoiseGrid& grid,
                                         const CorrelatorKernel& kernel, const ParticleParams& params,
                                         const SwitchProfile& sw, const ExternalPotential& potential = {},
                                         const CovarianceOptions& copt = {}, const LangevinOptions& lopt = {},
                                         double weight = 0.5)
{
    EnsembleSetup s;
    s.cov = build_covariance(grid, kernel, path, copt);
    s.mean = states_on_grid(path, grid);
    s.coeffs = build_coefficients(s.mean, grid, params, sw, potential, lopt);
    s.e = params.e;
    s.weight = weight;
    return s;
}

struct EnsembleOptions {
    double window_lo = 0; // statistics window for the time-averaged variance
    double window_hi = std::numeric_limits<double>::infinity();
    int component = 2;      // index of z used for window statistics and spectra
    std::size_t segment = 0; // Welch segment for the velocity spectrum; 0 disables
};

struct EnsembleStats {
    std::size_t members = 0;
    NoiseGrid grid;
    std::vector<FourVector> mean;
    std::vector<Mat4> cov; // <z^mu z^nu> - <z^mu><z^nu>
    double window_mean_sq = 0; // ensemble mean of the window average of z_c^2
    double window_sem = 0;
    std::optional<Spectrum> velocity_spectrum;
    std::optional<double> t_eff;
    bool runaway = false;
};

/// Member seeds are base_seed xor i; output does not depend on the thread count.
inline EnsembleStats run_ensemble(const EnsembleSetup& setup, std::size_t n, std::uint64_t base_seed,
                                  const EnsembleOptions& opt = {})
{
    require(n >= 2, Errc::TooFewMembers, "an ensemble needs at least two members");
    const auto& grid = setup.coeffs.grid;
    std::vector<FluctuationTrajectory> runs(n);
    parallel_for(n, [&](std::size_t i) {
        const std::uint64_t seed = base_seed ^ std::uint64_t(i);
        const auto r = sample_noise(setup.cov, seed);
        const auto eta = assemble_eta(setup.mean, r, setup.e, setup.weight);
        runs[i] = integrate_aldl(setup.coeffs, eta, seed);
    });

    EnsembleStats st;
    st.members = n;
    st.grid = grid;
    st.mean.assign(grid.n, FourVector{});
    st.cov.assign(grid.n, Mat4::Zero());
    for (const auto& r : runs) {
        st.runaway = st.runaway || r.runaway;
        for (std::size_t t = 0; t < grid.n; ++t) {
            const Vec4 z = to_eigen(r.z[t]);
            st.mean[t] = st.mean[t] + r.z[t];
            st.cov[t] += z * z.transpose();
        }
    }
    const double dn = double(n);
    for (std::size_t t = 0; t < grid.n; ++t) {
        st.mean[t] = st.mean[t] * (1 / dn);
        const Vec4 m = to_eigen(st.mean[t]);
        st.cov[t] = (st.cov[t] - dn * m * m.transpose()) / (dn - 1);
    }

    const auto c = std::size_t(opt.component);
    std::vector<std::size_t> win;
    for (std::size_t t = 0; t < grid.n; ++t)
        if (grid.tau(t) >= opt.window_lo && grid.tau(t) <= opt.window_hi) win.push_back(t);
    if (!win.empty()) {
        double s = 0, s2 = 0;
        for (const auto& r : runs) {
            double w = 0;
            for (auto t : win) w += r.z[t][c] * r.z[t][c];
            w /= double(win.size());
            s += w;
            s2 += w * w;
        }
        st.window_mean_sq = s / dn;
        st.window_sem = std::sqrt(std::max(0.0, (s2 / dn - st.window_mean_sq * st.window_mean_sq) / (dn - 1)));
    }
    if (opt.segment > 0 && win.size() >= opt.segment && n >= WelchOptions{}.min_members) {
        std::vector<std::vector<double>> v(n);
        for (std::size_t i = 0; i < n; ++i)
            for (auto t : win) v[i].push_back(runs[i].zdot[t][c]);
        WelchOptions w;
        w.segment = opt.segment;
        st.velocity_spectrum = noise_psd(v, grid.dt, w);
    }
    return st;
}

/// T from a thermal-to-vacuum variance ratio of an oscillator: ratio = coth(omega0 / 2T).
inline double fit_temperature_from_variance(double ratio, double omega0)
{
    require(ratio > 1 && omega0 > 0, Errc::InvalidArgument, "variance ratio must exceed 1");
    return omega0 / (2 * std::atanh(1 / ratio));
}

inline constexpr const char* kStatsCsvHeader =
    "tau,mean_z0,mean_z1,mean_z2,mean_z3,"
    "cov_00,cov_01,cov_02,cov_03,cov_11,cov_12,cov_13,cov_22,cov_23,cov_33";

inline void write_stats_csv(std::ostream& os, const EnsembleStats& st)
{
    os << kStatsCsvHeader << '\n';
    for (std::size_t t = 0; t < st.grid.n; ++t) {
        os << format_double(st.grid.tau(t));
        for (std::size_t m = 0; m < 4; ++m) os << ',' << format_double(st.mean[t][m]);
        for (int a = 0; a < 4; ++a)
            for (int b = a; b < 4; ++b) os << ',' << format_double(st.cov[t](a, b));
        os << '\n';
    }
}

inline void write_fluctuation_csv(std::ostream& os, const FluctuationTrajectory& f)
{
    os << "tau,z0,z1,z2,z3,zdot0,zdot1,zdot2,zdot3\n";
    for (std::size_t t = 0; t < f.grid.n; ++t) {
        os << format_double(f.grid.tau(t));
        for (std::size_t m = 0; m < 4; ++m) os << ',' << format_double(f.z[t][m]);
        for (std::size_t m = 0; m < 4; ++m) os << ',' << format_double(f.zdot[t][m]);
        os << '\n';
    }
}

//---------------------------------------------------------------------------//
// Fluctuation-dissipation
//---------------------------------------------------------------------------//
struct FdrReport {
    std::vector<double> omega, noise, dissipation, ratio;
    double t_eff = 0;
    double max_rel_dev = 0; // max |ratio / coth(omega/2T_eff) - 1|
};

/*!
 * Noise spectrum N(w) = W~(w) + W~(-w) and dissipation g(w) = W~(-w) - W~(w)
 * from the windowed Wightman transform on a stationary trajectory, their
 * ratio against coth(w / 2T), and a least-squares T_eff.
 */
inline FdrReport fdr_check(const AnalyticTrajectory& traj, const CorrelatorKernel& kernel,
                           std::span<const double> omegas, double t_obs)
{
    require(!omegas.empty(), Errc::InvalidArgument, "fdr_check needs frequencies");
    const auto k = kernel.with_kind(KernelKind::wightman);
    FdrReport r;
    for (double w : omegas) {
        require(w > 0, Errc::InvalidArgument, "fdr_check frequencies must be > 0");
        const double up = windowed_wightman_transform(k, traj, w, t_obs).value;
        const double down = windowed_wightman_transform(k, traj, -w, t_obs).value;
        r.omega.push_back(w);
        r.noise.push_back(up + down);
        r.dissipation.push_back(down - up);
        r.ratio.push_back((up + down) / (down - up));
    }
    auto coth = [](double x) { return 1 / std::tanh(x); };
    auto cost = [&](double logT) {
        const double T = std::exp(logT);
        double s = 0;
        for (std::size_t i = 0; i < r.omega.size(); ++i) {
            const double d = r.ratio[i] / coth(r.omega[i] / (2 * T)) - 1;
            s += d * d;
        }
        return s;
    };
    const auto [wlo, whi] = std::minmax_element(omegas.begin(), omegas.end());
    const auto best = boost::math::tools::brent_find_minima(cost, std::log(*wlo / 200), std::log(*whi * 100), 50);
    r.t_eff = std::exp(best.first);
    for (std::size_t i = 0; i < r.omega.size(); ++i)
        r.max_rel_dev = std::max(r.max_rel_dev, std::abs(r.ratio[i] / coth(r.omega[i] / (2 * r.t_eff)) - 1));
    return r;
}

} // namespace qfb
