#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <variant>
#include <vector>

#include "qfb/errors.hpp"
#include "qfb/geometry.hpp"
#include "qfb/hyperdual.hpp"
#include "qfb/mirror.hpp"

namespace qfb {

using cdouble = std::complex<double>;

//---------------------------------------------------------------------------//
// Field state of the massless scalar
//---------------------------------------------------------------------------//
struct FieldState {
    int spatial_dim = 3;     // 1 or 3
    double temperature = 0;  // 0 is the vacuum
    double ir_scale = 1;     // 1+1 only; cancels from constrained combinations

    static FieldState vacuum(int d = 3) { return validated({d, 0.0, 1.0}); }
    static FieldState thermal(double T, int d = 3)
    {
        require(T > 0, Errc::InvalidArgument, "thermal state needs T > 0");
        return validated({d, T, 1.0});
    }
    bool is_thermal() const { return temperature > 0; }
    double beta() const { return 1.0 / temperature; }

    static FieldState validated(FieldState s)
    {
        require(s.spatial_dim == 1 || s.spatial_dim == 3, Errc::InvalidArgument,
                "spatial dimension must be 1 or 3");
        require(s.temperature >= 0, Errc::InvalidArgument, "temperature must be >= 0");
        require(s.ir_scale > 0, Errc::InvalidArgument, "IR scale must be > 0");
        return s;
    }
};

namespace detail {

inline constexpr double pi = std::numbers::pi;

/// sinh(z) = m e^s with s = |Re z| held constant, so m stays O(1).
template <class T>
std::pair<T, double> scaled_sinh(const T& z)
{
    using std::exp;
    const double s = std::abs(real_value(z));
    return {(exp(z - T(s)) - exp(-z - T(s))) * T(0.5), s};
}

/// sinh^2(c sqrt(w)) and sinh(2c sqrt(w)) / (2c sqrt(w)) as power series in w.
template <class T>
std::pair<T, T> thermal_radial_series(const T& w, double c)
{
    const T y = T(4 * c * c) * w;
    T e1 = T(0), e2 = T(1), term = T(1);
    double fact_even = 1, fact_odd = 1; // (2k)!, (2k+1)!
    for (int k = 1; k <= 18; ++k) {
        term = term * y;
        fact_even *= (2.0 * k - 1) * (2.0 * k);
        fact_odd *= (2.0 * k) * (2.0 * k + 1);
        e1 = e1 + term * T(0.5 / fact_even);
        e2 = e2 + term * T(1.0 / fact_odd);
    }
    return {e1, e2};
}

/*!
 * Thermal 3+1 Wightman function in closed form (the image sum over
 * imaginary time shifts n beta summed exactly):
 *   -(T^2/4) sinhc(2 c r) / (sinh^2(c t) - sinh^2(c r)),  c = pi T.
 * Small r uses power series (smooth at r = 0, so derivatives stay finite);
 * large arguments use exponent-scaled sinh to avoid overflow.
 */
template <class T>
T thermal_wightman_3p1(double temperature, const BasicFourVector<T>& d)
{
    const double c = pi * temperature;
    const T pref = T(-temperature * temperature / 4);
    const T w = d[1] * d[1] + d[2] * d[2] + d[3] * d[3];
    const T A = T(c) * d[0];
    if (4 * c * c * scalar_abs(w) < 1.0) {
        const auto [e1, e2] = thermal_radial_series(w, c);
        const auto [m, s] = scaled_sinh(A);
        if (s < 300) {
            const T sh = m * T(std::exp(s));
            return pref * e2 / (sh * sh - e1);
        }
        return pref * e2 / (m * m) * T(std::exp(-2 * s));
    }
    using std::sqrt;
    const T cq = T(c) * sqrt(w);
    const auto [m1, s1] = scaled_sinh(T(2) * cq);
    const auto [m2, s2] = scaled_sinh(A - cq);
    const auto [m3, s3] = scaled_sinh(A + cq);
    return pref / (T(2) * cq) * m1 / (m2 * m3) * T(std::exp(s1 - s2 - s3));
}

} // namespace detail

/*!
 * Positive-frequency Wightman function G+(y, y') as a function of the
 * displacement y - y'. The time component is expected to carry the
 * regulator already (t - t' - i eps for a time split).
 *
 * 3+1 vacuum:  -1 / (4 pi^2 dy.dy)
 * 3+1 thermal: image sum over imaginary time shifts, summed in closed form
 * 1+1 vacuum:  -(1/4 pi) ln(du dv / l^2)
 * 1+1 thermal: -(1/4 pi) ln[(beta/pi l)^2 sinh(pi du/beta) sinh(pi dv/beta)]
 */
template <class T>
T wightman_displacement(const FieldState& state, const BasicFourVector<T>& d)
{
    using detail::pi;
    using std::log;
    using std::sinh;
    if (state.spatial_dim == 3) {
        if (!state.is_thermal()) {
            const T sigma = minkowski_dot(d, d);
            return T(-1.0 / (4 * pi * pi)) / sigma;
        }
        return detail::thermal_wightman_3p1(state.temperature, d);
    }
    const T du = d[0] - d[1];
    const T dv = d[0] + d[1];
    const double l = state.ir_scale;
    if (!state.is_thermal()) return T(-1 / (4 * pi)) * (log(du / T(l)) + log(dv / T(l)));
    const double c = pi * state.temperature;
    const double pref = 1.0 / (c * l);
    return T(-1 / (4 * pi)) * (log(T(pref) * sinh(T(c) * du)) + log(T(pref) * sinh(T(c) * dv)));
}

/// Hadamard function G_H = <{phi(y), phi(y')}> = 2 Re G+, time-split by eps.
inline cdouble wightman_free(const FieldState& state, const FourVector& y, const FourVector& yp,
                             double eps)
{
    require(eps > 0, Errc::BadRegulator, "regulator eps must be > 0");
    ComplexFourVector d = complexify(y - yp);
    d[0] -= cdouble(0, eps);
    return wightman_displacement(state, d);
}

inline double hadamard_free(const FieldState& state, const FourVector& y, const FourVector& yp,
                            double eps)
{
    return 2 * wightman_free(state, y, yp, eps).real();
}

//---------------------------------------------------------------------------//
// Kernels
//---------------------------------------------------------------------------//
enum class KernelKind { hadamard, wightman, retarded };

/*!
 * Evaluable two-point function, optionally constrained by a Dirichlet mirror.
 *
 * Static mirrors use the image method; points on opposite sides of a perfect
 * mirror are uncorrelated. The moving 1+1 mirror uses the ray map p(u) and
 * supports the vacuum only.
 */
class CorrelatorKernel {
public:
    CorrelatorKernel(KernelKind kind, FieldState state, double eps,
                     std::optional<MirrorConfig> mirror = std::nullopt)
        : kind_(kind), state_(FieldState::validated(state)), eps_(eps), mirror_(std::move(mirror))
    {
        require(eps > 0, Errc::BadRegulator, "regulator eps must be > 0");
        if (mirror_) {
            require(mirror_->spatial_dim() == state_.spatial_dim, Errc::WrongVariant,
                    "mirror variant does not match the field dimension");
            if (!mirror_->is_static()) {
                require(!state_.is_thermal(), Errc::WrongVariant,
                        "moving-mirror kernels are vacuum only");
                require(mirror_->ray_map != nullptr, Errc::InvalidArgument,
                        "moving mirror without a ray map");
            }
        }
    }

    KernelKind kind() const noexcept { return kind_; }
    const FieldState& state() const noexcept { return state_; }
    double eps() const noexcept { return eps_; }
    const std::optional<MirrorConfig>& mirror() const noexcept { return mirror_; }
    CorrelatorKernel with_kind(KernelKind k) const { return {k, state_, eps_, mirror_}; }
    CorrelatorKernel with_eps(double e) const { return {kind_, state_, e, mirror_}; }

    /// Free-field kernel is Lorentz invariant (vacuum, no mirror).
    bool lorentz_invariant() const { return !mirror_ && !state_.is_thermal(); }

    /// G+ at complex points whose imaginary parts already carry the regulator.
    cdouble wightman_points(const ComplexFourVector& y, const ComplexFourVector& yp) const
    {
        require(!mirror_ || mirror_->is_static(), Errc::WrongVariant,
                "complexified points need a static or absent mirror");
        const cdouble free = wightman_displacement(state_, y - yp);
        if (!mirror_) return free;
        const double sy = mirror_->signed_distance(y).real();
        const double syp = mirror_->signed_distance(yp).real();
        if (sy * syp < 0) return 0.0;
        return free - wightman_displacement(state_, y - image_point(*mirror_, yp));
    }

    /// G+(y, y') at real points with an i eps time split.
    cdouble wightman(const FourVector& y, const FourVector& yp) const
    {
        if (mirror_ && !mirror_->is_static()) return moving_wightman(y, yp);
        ComplexFourVector a = complexify(y), b = complexify(yp);
        a[0] -= cdouble(0, eps_ / 2);
        b[0] += cdouble(0, eps_ / 2);
        return wightman_points(a, b);
    }

    double hadamard(const FourVector& y, const FourVector& yp) const
    {
        return 2 * wightman(y, yp).real();
    }

    /// Odd part G+(y,y') - G+(y',y) = 2 i Im G+; returned as Im.
    double commutator_imag(const FourVector& y, const FourVector& yp) const
    {
        return 2 * wightman(y, yp).imag();
    }

    /// Real-valued evaluation by kind; the Wightman kind returns Re G+.
    double evaluate(const FourVector& y, const FourVector& yp) const
    {
        switch (kind_) {
        case KernelKind::hadamard: return hadamard(y, yp);
        case KernelKind::wightman: return wightman(y, yp).real();
        case KernelKind::retarded: return commutator_imag(y, yp);
        }
        return 0;
    }

private:
    cdouble moving_wightman(const FourVector& y, const FourVector& yp) const
    {
        const double u = y[0] - y[1], v = y[0] + y[1];
        const double up = yp[0] - yp[1], vp = yp[0] + yp[1];
        return hadamard_moving_terms(*mirror_->ray_map, u, v, up, vp, eps_);
    }

public:
    /// G+ of the 1+1 field reflected by a moving mirror, in null coordinates.
    static cdouble hadamard_moving_terms(const RayMap& map, double u, double v, double up,
                                         double vp, double eps)
    {
        using detail::pi;
        const double pu = map(u), pup = map(up);
        const double tol = 1e-12 * std::max({1.0, std::abs(v), std::abs(pu)});
        require(v >= pu - tol && vp >= pup - tol, Errc::PointBehindMirror,
                "field point lies behind the mirror (v < p(u))");
        const cdouble ie(0, eps);
        return -1 / (4 * pi)
               * (std::log(cdouble(v - vp) - ie) + std::log(cdouble(pu - pup) - ie)
                  - std::log(cdouble(v - pup) - ie) - std::log(cdouble(pu - vp) - ie));
    }

private:
    KernelKind kind_;
    FieldState state_;
    double eps_;
    std::optional<MirrorConfig> mirror_;
};

/// Dirichlet image-method Hadamard function for a static mirror.
inline double hadamard_constrained_static(const MirrorConfig& mirror, const FieldState& state,
                                          const FourVector& y, const FourVector& yp, double eps)
{
    require(mirror.is_static(), Errc::WrongVariant, "image method needs a static mirror");
    return CorrelatorKernel(KernelKind::hadamard, state, eps, mirror).hadamard(y, yp);
}

/// Hadamard function of the moving-mirror field at null coordinates (u,v), (u',v').
inline double hadamard_constrained_moving_1p1(const RayMap& map, double u, double v, double up,
                                              double vp, double eps)
{
    require(eps > 0, Errc::BadRegulator, "regulator eps must be > 0");
    return 2 * CorrelatorKernel::hadamard_moving_terms(map, u, v, up, vp, eps).real();
}

//---------------------------------------------------------------------------//
// Pullbacks along trajectories
//---------------------------------------------------------------------------//

/// Non-owning handle to either trajectory representation.
using PathRef = std::variant<const AnalyticTrajectory*, const Worldline*>;

inline PathRef path(const AnalyticTrajectory& a) { return &a; }
inline PathRef path(const Worldline& w) { return &w; }

inline FourVector position_on(const PathRef& p, double tau)
{
    if (auto a = std::get_if<const AnalyticTrajectory*>(&p)) return (*a)->position(tau);
    return std::get<const Worldline*>(p)->interpolate(tau).x;
}

namespace detail {

/// Vacuum G+ between two points of one hyperbola separated by complex proper time s.
inline cdouble hyperbola_vacuum_wightman(const FieldState& st, const AnalyticTrajectory& traj, cdouble s)
{
    if (st.spatial_dim == 1) return wightman_displacement(st, traj.comoving_displacement(s));
    const double a = traj.accel;
    const auto [m, sc] = scaled_sinh(cdouble(a / 2) * s);
    return -a * a / (16 * pi * pi) / (m * m) * std::exp(-2 * sc);
}

inline bool same_hyperbola(const AnalyticTrajectory& a, const AnalyticTrajectory& b)
{
    return a.kind == TrajectoryKind::uniform_acceleration && b.kind == a.kind && a.accel == b.accel
           && a.origin == b.origin;
}

} // namespace detail

/*!
 * Wightman pullback G+(x1(tau), x2(tau')).
 *
 * Closed-form trajectories are regulated by splitting proper time,
 * x1(tau - i eps/2) and x2(tau' + i eps/2), which keeps the sinh^-2 forms
 * exact. Sampled worldlines, and moving mirrors, fall back to a lab-time split.
 */
inline cdouble wightman_pullback(const CorrelatorKernel& k, const PathRef& p1, const PathRef& p2,
                                 double tau, double taup)
{
    const auto* a1 = std::get_if<const AnalyticTrajectory*>(&p1);
    const auto* a2 = std::get_if<const AnalyticTrajectory*>(&p2);
    const bool moving = k.mirror() && !k.mirror()->is_static();
    if (a1 && a2 && !moving) {
        const cdouble half(0, k.eps() / 2);
        if (k.lorentz_invariant() && detail::same_hyperbola(**a1, **a2)) {
            // Interval depends on tau - tau' only.
            return detail::hyperbola_vacuum_wightman(k.state(), **a1, cdouble(tau - taup) - 2.0 * half);
        }
        return k.wightman_points((*a1)->position(cdouble(tau) - half),
                                 (*a2)->position(cdouble(taup) + half));
    }
    return k.wightman(position_on(p1, tau), position_on(p2, taup));
}

inline double hadamard_pullback(const CorrelatorKernel& k, const PathRef& p1, const PathRef& p2,
                                double tau, double taup)
{
    return 2 * wightman_pullback(k, p1, p2, tau, taup).real();
}

/*!
 * Stationary pullback W(s) = G+(x(tau0 + s), x(tau0)) at complex lag s,
 * with no extra regulator: the caller chooses a contour below the real axis.
 */
inline cdouble stationary_wightman(const CorrelatorKernel& k, const AnalyticTrajectory& traj,
                                   cdouble s)
{
    require(!k.mirror() || k.mirror()->is_static(), Errc::NonStationary,
            "moving mirrors break stationarity");
    if (traj.kind == TrajectoryKind::uniform_acceleration) {
        require(k.lorentz_invariant(), Errc::NonStationary,
                "accelerated trajectory is stationary only in the free vacuum");
        return detail::hyperbola_vacuum_wightman(k.state(), traj, s);
    }
    if (k.mirror() && traj.kind == TrajectoryKind::uniform_velocity) {
        const auto& n = k.mirror()->normal;
        const double vn = k.mirror()->variant == MirrorVariant::static_point_1p1
                              ? traj.velocity[1]
                              : traj.velocity[1] * n[0] + traj.velocity[2] * n[1] + traj.velocity[3] * n[2];
        require(std::abs(vn) < 1e-14, Errc::NonStationary,
                "motion towards the mirror is not stationary");
    }
    return k.wightman_points(traj.position(s), traj.position(cdouble(0)));
}

/// Max over the lag grid of |vacuum pullback on the hyperbola - thermal(a/2pi) static pullback|.
inline double thermal_equivalence_check(double a, std::span<const double> lags, double eps)
{
    require(a > 0, Errc::InvalidArgument, "thermal_equivalence_check needs a > 0");
    const auto hyper = AnalyticTrajectory::hyperbolic(a);
    const auto rest = AnalyticTrajectory::at_position(0, 0, 0);
    const CorrelatorKernel vac(KernelKind::hadamard, FieldState::vacuum(3), eps);
    const CorrelatorKernel hot(KernelKind::hadamard, FieldState::thermal(a / (2 * detail::pi), 3), eps);
    double worst = 0;
    for (double s : lags) {
        const double tau0 = 1.0; // arbitrary base point on the worldline
        const double lhs = hadamard_pullback(vac, path(hyper), path(hyper), tau0 + s, tau0);
        const double rhs = hadamard_pullback(hot, path(rest), path(rest), tau0 + s, tau0);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

/// CSV matrix: first row and column hold the tau grid, body K(tau_i, tau_j).
inline void write_kernel_matrix_csv(std::ostream& os, std::span<const double> grid,
                                    const std::vector<std::vector<double>>& body)
{
    os << "tau";
    for (double t : grid) os << ',' << format_double(t);
    os << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
        os << format_double(grid[i]);
        for (double v : body[i]) os << ',' << format_double(v);
        os << '\n';
    }
}

/// Tabulate a real pullback on a tau grid.
inline std::vector<std::vector<double>> pullback_matrix(const CorrelatorKernel& k, const PathRef& p1,
                                                        const PathRef& p2, std::span<const double> grid)
{
    std::vector<std::vector<double>> m(grid.size(), std::vector<double>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const cdouble w = wightman_pullback(k, p1, p2, grid[i], grid[j]);
            m[i][j] = k.kind() == KernelKind::hadamard  ? 2 * w.real()
                      : k.kind() == KernelKind::wightman ? w.real()
                                                         : 2 * w.imag();
        }
    return m;
}

} // namespace qfb
