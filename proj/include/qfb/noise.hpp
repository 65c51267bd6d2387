#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <unsupported/Eigen/FFT>

#include "qfb/errors.hpp"
#include "qfb/geometry.hpp"
#include "qfb/greens.hpp"
#include "qfb/hyperdual.hpp"
#include "qfb/parallel.hpp"

namespace qfb {

//---------------------------------------------------------------------------//
// Grid and channels
//---------------------------------------------------------------------------//
struct NoiseGrid {
    double tau0 = 0;
    double dt = 0.1;
    std::size_t n = 2;

    static NoiseGrid make(double tau0, double dt, std::size_t n)
    {
        require(n >= 2, Errc::ValidationError, "noise grid needs n >= 2");
        require(dt > 0, Errc::ValidationError, "noise grid needs dt > 0");
        return {tau0, dt, n};
    }
    double tau(std::size_t i) const { return tau0 + dt * double(i); }
    std::vector<double> taus() const
    {
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = tau(i);
        return t;
    }
};

/// Channel 0 is chi, channels 1..4 are d_0 chi .. d_3 chi (lower index).
using ChannelMask = std::array<bool, 5>;
inline constexpr ChannelMask kAllChannels{true, true, true, true, true};

/// Trajectory the noise is sampled on.
using NoisePath = std::variant<AnalyticTrajectory, Worldline>;

//---------------------------------------------------------------------------//
// Derivative jets of the Wightman function
//---------------------------------------------------------------------------//
namespace detail {

/// f, d_a f and d_a d_b f of G+ at displacement d, for a, b in `dirs`.
struct KernelJet {
    cdouble f{};
    std::array<cdouble, 4> g{};
    std::array<std::array<cdouble, 4>, 4> h{};
};

inline constexpr std::array<double, 4> kMetric{1, -1, -1, -1};

/// Closed form for the 3+1 vacuum through F(sigma) = -1/(4 pi^2 sigma).
inline KernelJet vacuum_jet(const ComplexFourVector& d, cdouble sigma)
{
    KernelJet j;
    const double k = 1 / (4 * pi * pi);
    const cdouble F = -k / sigma, F1 = k / (sigma * sigma), F2 = -2 * k / (sigma * sigma * sigma);
    j.f = F;
    std::array<cdouble, 4> dl;
    for (std::size_t a = 0; a < 4; ++a) dl[a] = kMetric[a] * d[a];
    for (std::size_t a = 0; a < 4; ++a) {
        j.g[a] = 2.0 * F1 * dl[a];
        for (std::size_t b = 0; b < 4; ++b)
            j.h[a][b] = 4.0 * F2 * dl[a] * dl[b] + (a == b ? 2.0 * F1 * kMetric[a] : 0.0);
    }
    return j;
}

/// Forward-mode derivatives for any field state.
inline KernelJet hyperdual_jet(const FieldState& st, const ComplexFourVector& d,
                               const std::vector<int>& dirs)
{
    using HD = HyperDual<cdouble>;
    KernelJet j;
    j.f = wightman_displacement(st, d);
    for (std::size_t p = 0; p < dirs.size(); ++p) {
        for (std::size_t q = p; q < dirs.size(); ++q) {
            const int a = dirs[p], b = dirs[q];
            BasicFourVector<HD> x;
            for (int k = 0; k < 4; ++k)
                x[std::size_t(k)] = HD(d[std::size_t(k)], k == a ? 1.0 : 0.0, k == b ? 1.0 : 0.0, 0.0);
            const HD r = wightman_displacement(st, x);
            j.g[std::size_t(a)] = r.e1;
            j.g[std::size_t(b)] = r.e2;
            j.h[std::size_t(a)][std::size_t(b)] = r.e12;
            j.h[std::size_t(b)][std::size_t(a)] = r.e12;
        }
    }
    return j;
}

/// Boost along x^1 by rapidity eta.
inline ComplexFourVector boost_x(const ComplexFourVector& v, cdouble eta)
{
    const cdouble ch = std::cosh(eta), sh = std::sinh(eta);
    ComplexFourVector r = v;
    r[0] = ch * v[0] + sh * v[1];
    r[1] = sh * v[0] + ch * v[1];
    return r;
}

} // namespace detail

//---------------------------------------------------------------------------//
// Covariance
//---------------------------------------------------------------------------//
struct NoiseCovariance {
    NoiseGrid grid;
    ChannelMask mask = kAllChannels;
    std::vector<int> channels; // active channel ids, block order
    Eigen::MatrixXd C;         // (channels * n)^2, block-major
    Eigen::MatrixXd L;         // lower Cholesky factor of C + jitter
    double jitter = 0;

    std::size_t dim() const { return channels.size() * grid.n; }
    /// Flattened index of channel block b (position in `channels`) at grid point i.
    std::size_t index(std::size_t b, std::size_t i) const { return b * grid.n + i; }
    /// Block position of a channel id, or -1 if inactive.
    int block_of(int channel) const
    {
        for (std::size_t b = 0; b < channels.size(); ++b)
            if (channels[b] == channel) return int(b);
        return -1;
    }
};

struct CovarianceOptions {
    ChannelMask mask = kAllChannels;
    double hbar = 1;
};

namespace detail {

/// Jet of G+(x(tau_i), x(tau_j)) with the regulator of the path type.
inline KernelJet pair_jet(const CorrelatorKernel& k, const NoisePath& p, double ti, double tj,
                          const std::vector<int>& dirs)
{
    const FieldState& st = k.state();
    const double eps = k.eps();
    const bool vac3 = st.spatial_dim == 3 && !st.is_thermal();
    if (const auto* a = std::get_if<AnalyticTrajectory>(&p)) {
        const cdouble half(0, eps / 2);
        const cdouble s = cdouble(ti - tj) - 2.0 * half;
        if (a->kind == TrajectoryKind::uniform_acceleration && vac3) {
            // x(tj + s) - x(tj) seen from the split point tj + i eps/2, so the
            // boost carries the imaginary part of the rapidity too
            const ComplexFourVector d =
                boost_x(a->comoving_displacement(s), a->accel * (cdouble(tj) + half));
            const auto [m, sc] = scaled_sinh(cdouble(a->accel / 2) * s);
            const cdouble sigma = 4.0 * m * m * std::exp(2 * sc) / (a->accel * a->accel);
            return vacuum_jet(d, sigma);
        }
        const ComplexFourVector d = a->position(cdouble(ti) - half) - a->position(cdouble(tj) + half);
        if (vac3) return vacuum_jet(d, minkowski_dot(d, d));
        return hyperdual_jet(st, d, dirs);
    }
    const auto& w = std::get<Worldline>(p);
    ComplexFourVector d = complexify(w.interpolate(ti).x - w.interpolate(tj).x);
    d[0] -= cdouble(0, eps);
    if (vac3) return vacuum_jet(d, minkowski_dot(d, d));
    return hyperdual_jet(st, d, dirs);
}

/// Covariance of channel A at y and channel B at y' from the jet at y - y'.
inline double channel_entry(const KernelJet& j, int A, int B)
{
    if (A == 0 && B == 0) return 2 * j.f.real();
    if (B == 0) return 2 * j.g[std::size_t(A - 1)].real();
    if (A == 0) return -2 * j.g[std::size_t(B - 1)].real();
    return -2 * j.h[std::size_t(A - 1)][std::size_t(B - 1)].real();
}

} // namespace detail

/*!
 * Joint covariance of chi and its gradient along the path,
 * C = hbar d d' G_H(x(tau_i), x(tau_j)), with G_H = 2 Re G+.
 *
 * Closed-form trajectories use a proper-time split of the regulator;
 * sampled worldlines a lab-time split.
 */
inline NoiseCovariance build_covariance(const NoiseGrid& grid, const CorrelatorKernel& kernel,
                                        const NoisePath& path, const CovarianceOptions& opt = {})
{
    require(kernel.kind() == KernelKind::hadamard, Errc::WrongVariant,
            "noise covariance needs a hadamard kernel");
    require(!kernel.mirror(), Errc::WrongVariant, "noise covariance supports free kernels only");
    if (const auto* w = std::get_if<Worldline>(&path))
        require(!w->empty() && w->tau_min() <= grid.tau(0) + 1e-12
                    && w->tau_max() >= grid.tau(grid.n - 1) - 1e-12,
                Errc::GridMismatch, "worldline does not cover the noise grid");
    NoiseCovariance cov;
    cov.grid = grid;
    cov.mask = opt.mask;
    std::vector<int> dirs;
    for (int c = 0; c < 5; ++c)
        if (opt.mask[std::size_t(c)]) {
            cov.channels.push_back(c);
            if (c > 0) dirs.push_back(c - 1);
        }
    require(!cov.channels.empty(), Errc::ValidationError, "noise channel mask is empty");
    const std::size_t n = grid.n, nb = cov.channels.size(), N = nb * n;
    cov.C.resize(Eigen::Index(N), Eigen::Index(N));

    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i; j < n; ++j) {
            const auto jet = detail::pair_jet(kernel, path, grid.tau(i), grid.tau(j), dirs);
            for (std::size_t a = 0; a < nb; ++a)
                for (std::size_t b = 0; b < nb; ++b) {
                    const std::size_t p = cov.index(a, i), q = cov.index(b, j);
                    if (i == j && q < p) continue;
                    const double v = opt.hbar * detail::channel_entry(jet, cov.channels[a], cov.channels[b]);
                    cov.C(Eigen::Index(p), Eigen::Index(q)) = v;
                    cov.C(Eigen::Index(q), Eigen::Index(p)) = v;
                }
        }
    });

    const double maxdiag = cov.C.diagonal().cwiseAbs().maxCoeff();
    for (double rel = 1e-10; rel <= 1e-6 * (1 + 1e-12); rel *= 10) {
        Eigen::MatrixXd M = cov.C;
        M.diagonal().array() += rel * maxdiag;
        Eigen::LLT<Eigen::MatrixXd> llt(M);
        if (llt.info() == Eigen::Success) {
            cov.L = llt.matrixL();
            cov.jitter = rel * maxdiag;
            return cov;
        }
    }
    raise(Errc::NotPSD, "noise covariance is not positive semidefinite after jitter 1e-6 max diag");
}

//---------------------------------------------------------------------------//
// Sampling
//---------------------------------------------------------------------------//
struct NoiseRealization {
    NoiseGrid grid;
    std::uint64_t seed = 0;
    std::vector<double> chi;                // zero when the channel is masked
    std::array<std::vector<double>, 4> dchi; // d_mu chi, lower index
};

/// Deterministic standard-normal stream: Mersenne Twister 64 + Boost ziggurat normal.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : gen_(seed) {}
    double operator()() { return dist_(gen_); }

private:
    boost::random::mt19937_64 gen_;
    boost::random::normal_distribution<double> dist_;
};

inline NoiseRealization sample_noise(const NoiseCovariance& cov, std::uint64_t seed)
{
    const auto N = Eigen::Index(cov.dim());
    Eigen::VectorXd z(N);
    NormalStream rng(seed);
    for (Eigen::Index k = 0; k < N; ++k) z[k] = rng();
    const Eigen::VectorXd x = cov.L.triangularView<Eigen::Lower>() * z;
    NoiseRealization r;
    r.grid = cov.grid;
    r.seed = seed;
    const std::size_t n = cov.grid.n;
    r.chi.assign(n, 0.0);
    for (auto& d : r.dchi) d.assign(n, 0.0);
    for (std::size_t b = 0; b < cov.channels.size(); ++b) {
        const int c = cov.channels[b];
        auto& dst = c == 0 ? r.chi : r.dchi[std::size_t(c - 1)];
        for (std::size_t i = 0; i < n; ++i) dst[i] = x[Eigen::Index(cov.index(b, i))];
    }
    return r;
}

/// Proper-time states of the path on the grid.
inline std::vector<WorldlineState> states_on_grid(const NoisePath& path, const NoiseGrid& grid)
{
    std::vector<WorldlineState> s(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        if (const auto* a = std::get_if<AnalyticTrajectory>(&path))
            s[i] = a->state(grid.tau(i));
        else
            s[i] = std::get<Worldline>(path).interpolate(grid.tau(i));
    }
    return s;
}

/*!
 * eta_mu = e [a_mu chi + w (d_mu chi - u_mu (u.d chi))], lower index.
 * The bracket weight w is 1/2 for the standard antisymmetrization.
 */
inline std::vector<FourVector> assemble_eta(std::span<const WorldlineState> states,
                                            const NoiseRealization& r, double e, double weight = 0.5)
{
    require(states.size() == r.grid.n && r.chi.size() == r.grid.n, Errc::GridMismatch,
            "realization grid does not match the worldline grid");
    std::vector<FourVector> eta(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& s = states[i];
        require(std::abs(s.tau - r.grid.tau(i)) <= 1e-9 * std::max(1.0, std::abs(s.tau)),
                Errc::GridMismatch, "worldline tau differs from the noise grid");
        const FourVector ul = lower(s.u), al = lower(s.acc);
        double udchi = 0;
        for (std::size_t m = 0; m < 4; ++m) udchi += s.u[m] * r.dchi[m][i];
        for (std::size_t m = 0; m < 4; ++m)
            eta[i][m] = e * (al[m] * r.chi[i] + weight * (r.dchi[m][i] - ul[m] * udchi));
    }
    return eta;
}

/// Central-difference d chi / d tau from sampled chi; the cross-check for the
/// jointly sampled u.d chi.
inline std::vector<double> fd_proper_time_derivative(const NoiseRealization& r)
{
    const std::size_t n = r.grid.n;
    std::vector<double> d(n);
    const double h = r.grid.dt;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) d[i] = (r.chi[1] - r.chi[0]) / h;
        else if (i + 1 == n) d[i] = (r.chi[n - 1] - r.chi[n - 2]) / h;
        else d[i] = (r.chi[i + 1] - r.chi[i - 1]) / (2 * h);
    }
    return d;
}

//---------------------------------------------------------------------------//
// Spectra
//---------------------------------------------------------------------------//
struct Spectrum {
    std::vector<double> omega;
    std::vector<double> value;
};

struct WelchOptions {
    std::size_t segment = 256;
    std::size_t min_members = 100;
};

/*!
 * Welch estimate of the power spectral density of real series sampled at
 * spacing dt: Hann-windowed segments with 50% overlap, averaged over segments
 * and members. Returned on omega_k = 2 pi k / (segment dt), k = 0..segment/2.
 */
inline Spectrum noise_psd(const std::vector<std::vector<double>>& members, double dt,
                          const WelchOptions& opt = {})
{
    require(members.size() >= opt.min_members, Errc::TooFewMembers,
            "PSD needs at least " + std::to_string(opt.min_members) + " members");
    const std::size_t L = opt.segment, hop = L / 2;
    require(L >= 4 && !members.empty() && members.front().size() >= L, Errc::InvalidArgument,
            "series shorter than one Welch segment");
    std::vector<double> win(L);
    double wsum = 0;
    for (std::size_t k = 0; k < L; ++k) {
        win[k] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * double(k) / double(L));
        wsum += win[k] * win[k];
    }
    Spectrum out;
    const std::size_t nf = L / 2 + 1;
    out.omega.resize(nf);
    out.value.assign(nf, 0.0);
    for (std::size_t k = 0; k < nf; ++k) out.omega[k] = 2 * std::numbers::pi * double(k) / (double(L) * dt);
    Eigen::FFT<double> fft;
    std::vector<double> buf(L);
    std::vector<std::complex<double>> spec;
    double count = 0;
    for (const auto& x : members) {
        require(x.size() == members.front().size(), Errc::GridMismatch, "members differ in length");
        for (std::size_t start = 0; start + L <= x.size(); start += hop) {
            for (std::size_t k = 0; k < L; ++k) buf[k] = win[k] * x[start + k];
            fft.fwd(spec, buf);
            for (std::size_t k = 0; k < nf; ++k) out.value[k] += std::norm(spec[k]);
            count += 1;
        }
    }
    for (auto& v : out.value) v *= dt / (wsum * count);
    return out;
}

/// Channel series of a realization: 0 = chi, 1..4 = d_mu chi.
inline const std::vector<double>& channel_series(const NoiseRealization& r, int channel)
{
    return channel == 0 ? r.chi : r.dchi[std::size_t(channel - 1)];
}

inline constexpr const char* kRealizationCsvHeader = "tau,chi,dchi0,dchi1,dchi2,dchi3,eta0,eta1,eta2,eta3";

inline void write_realization_csv(std::ostream& os, const NoiseRealization& r,
                                  const std::vector<FourVector>& eta)
{
    require(eta.size() == r.grid.n, Errc::GridMismatch, "eta length differs from the grid");
    os << kRealizationCsvHeader << '\n';
    for (std::size_t i = 0; i < r.grid.n; ++i) {
        os << format_double(r.grid.tau(i)) << ',' << format_double(r.chi[i]);
        for (const auto& d : r.dchi) os << ',' << format_double(d[i]);
        for (std::size_t m = 0; m < 4; ++m) os << ',' << format_double(eta[i][m]);
        os << '\n';
    }
}

inline void write_spectrum_csv(std::ostream& os, const Spectrum& s)
{
    os << "omega,value\n";
    for (std::size_t k = 0; k < s.omega.size(); ++k)
        os << format_double(s.omega[k]) << ',' << format_double(s.value[k]) << '\n';
}

} // namespace qfb
