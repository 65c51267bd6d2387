#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/tools/roots.hpp>

#include "qfb/errors.hpp"
#include "qfb/geometry.hpp"

namespace qfb {

//---------------------------------------------------------------------------//
// Moving point mirror in 1+1 dimensions, z = z(t).
//---------------------------------------------------------------------------//
struct MirrorMotion {
    /// z(t) and optional closed-form derivatives. Missing derivatives fall back
    /// to finite differences of the solved ray map.
    std::function<double(double)> z;
    std::function<double(double)> dz;
    std::function<double(double)> ddz;
    std::function<double(double)> dddz;
    /// Time interval over which z is defined (table-backed motions are finite).
    double t_min = -std::numeric_limits<double>::infinity();
    double t_max = std::numeric_limits<double>::infinity();

    static MirrorMotion at_rest(double z0)
    {
        return {[z0](double) { return z0; }, [](double) { return 0.0; },
                [](double) { return 0.0; }, [](double) { return 0.0; }};
    }
    static MirrorMotion uniform(double beta, double z0 = 0)
    {
        require(std::abs(beta) < 1, Errc::SuperluminalMirror, "uniform mirror needs |beta| < 1");
        return {[=](double t) { return z0 + beta * t; }, [=](double) { return beta; },
                [](double) { return 0.0; }, [](double) { return 0.0; }};
    }
    /// z(t) = A - sqrt(A^2 + t^2): at rest at t = 0, receding towards -x with
    /// proper acceleration 1/A.
    static MirrorMotion hyperbolic(double A)
    {
        require(A > 0, Errc::InvalidArgument, "hyperbolic mirror needs A > 0");
        return {[=](double t) { return A - std::sqrt(A * A + t * t); },
                [=](double t) { return -t / std::sqrt(A * A + t * t); },
                [=](double t) { return -A * A / std::pow(A * A + t * t, 1.5); },
                [=](double t) { return 3 * A * A * t / std::pow(A * A + t * t, 2.5); }};
    }
    /// Uniformly spaced sample table, interpolated with a cubic B-spline.
    static MirrorMotion from_table(std::vector<double> z_samples, double t0, double dt)
    {
        require(z_samples.size() >= 4 && dt > 0, Errc::InvalidArgument,
                "mirror table needs >= 4 samples and dt > 0");
        for (std::size_t i = 1; i < z_samples.size(); ++i)
            require(std::abs(z_samples[i] - z_samples[i - 1]) < dt, Errc::SuperluminalMirror,
                    "mirror table is superluminal between samples");
        const double t_end = t0 + dt * double(z_samples.size() - 1);
        auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
            z_samples.begin(), z_samples.end(), t0, dt);
        MirrorMotion m;
        m.z = [spline](double t) { return (*spline)(t); };
        m.dz = [spline](double t) { return spline->prime(t); };
        m.ddz = [spline](double t) { return spline->double_prime(t); };
        m.t_min = t0;
        m.t_max = t_end;
        return m;
    }
};

/// Derivative jet of the ray map at one u: p, p', p'', p'''.
using RayJet = std::array<double, 4>;

/*!
 * Null-ray map p(u) of a moving mirror: the advanced time v = p(u) of the
 * incoming ray that reflects into the outgoing ray u. Field points live to
 * the right of the mirror (v > p(u)).
 */
class RayMap {
public:
    using JetFn = std::function<RayJet(double)>;

    explicit RayMap(JetFn jet) : jet_(std::move(jet)) {}

    RayJet jet(double u) const { return jet_(u); }
    double operator()(double u) const { return jet_(u)[0]; }

    /// Explicit analytic map; useful for canonical profiles.
    static RayMap analytic(JetFn jet) { return RayMap(std::move(jet)); }

private:
    JetFn jet_;
};

namespace detail {

/// Solve t - z(t) = u for the mirror time t_m with bracketing root search.
inline double solve_reflection_time(const MirrorMotion& m, double u)
{
    auto h = [&](double t) { return t - m.z(t) - u; };
    const bool bounded = std::isfinite(m.t_min) || std::isfinite(m.t_max);
    double lo = u, hi = u;
    if (bounded) {
        lo = m.t_min;
        hi = m.t_max;
        require(h(lo) <= 0 && h(hi) >= 0, Errc::RootBracketFailure,
                "mirror table does not cover u = " + std::to_string(u));
    } else {
        double step = 1.0;
        int it = 0;
        while (!(h(lo) <= 0 && h(hi) >= 0)) {
            require(++it < 200, Errc::RootBracketFailure,
                    "no reflection time brackets u = " + std::to_string(u));
            lo = u - step;
            hi = u + step;
            step *= 2;
        }
    }
    double flo = h(lo), fhi = h(hi);
    require(std::isfinite(flo) && std::isfinite(fhi), Errc::RootBracketFailure,
            "mirror trajectory not finite on bracket for u = " + std::to_string(u));
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    boost::uintmax_t max_iter = 200;
    auto tol = [](double a, double b) {
        return std::abs(b - a) <= std::max(1e-12, 4 * std::numeric_limits<double>::epsilon()
                                                      * std::max(std::abs(a), std::abs(b)));
    };
    auto r = boost::math::tools::toms748_solve(h, lo, hi, flo, fhi, tol, max_iter);
    return 0.5 * (r.first + r.second);
}

} // namespace detail

/*!
 * Ray map of a subluminal moving mirror.
 *
 * Derivatives are analytic (implicit differentiation of t - z(t) = u) when
 * the motion carries dz, ddz and dddz; otherwise p'' and p''' come from
 * five-point differences of the solved map.
 */
inline RayMap build_ray_map(const MirrorMotion& m)
{
    require(static_cast<bool>(m.z), Errc::InvalidArgument, "mirror motion has no z(t)");
    const bool analytic = m.dz && m.ddz && m.dddz;
    auto base = [m](double u) {
        const double t = detail::solve_reflection_time(m, u);
        return std::pair{t, t + m.z(t)};
    };
    auto velocity_at = [m](double t) {
        if (m.dz) return m.dz(t);
        const double h = 1e-6;
        return (m.z(t + h) - m.z(t - h)) / (2 * h);
    };

    if (analytic) {
        return RayMap([m, base](double u) {
            const auto [t, p] = base(u);
            const double v = m.dz(t), acc = m.ddz(t), jerk = m.dddz(t);
            require(std::abs(v) < 1, Errc::SuperluminalMirror,
                    "mirror speed " + std::to_string(v) + " at t = " + std::to_string(t));
            const double k = 1 - v;
            return RayJet{p, (1 + v) / k, 2 * acc / (k * k * k),
                          2 * jerk / std::pow(k, 4) + 6 * acc * acc / std::pow(k, 5)};
        });
    }
    return RayMap([m, base, velocity_at](double u) {
        const auto [t, p] = base(u);
        const double v = velocity_at(t);
        require(std::abs(v) < 1, Errc::SuperluminalMirror,
                "mirror speed " + std::to_string(v) + " at t = " + std::to_string(t));
        const double h = 1e-3 * std::max(1.0, std::abs(u));
        auto P = [&](double du) { return base(u + du).second; };
        const double pm2 = P(-2 * h), pm1 = P(-h), pp1 = P(h), pp2 = P(2 * h);
        const double d1 = (1 + v) / (1 - v);
        const double d2 = (-pp2 + 16 * pp1 - 30 * p + 16 * pm1 - pm2) / (12 * h * h);
        const double d3 = (pp2 - 2 * pp1 + 2 * pm1 - pm2) / (2 * h * h * h);
        return RayJet{p, d1, d2, d3};
    });
}

/// Schwarzian flux <T_uu> = -(1/24 pi) [p'''/p' - (3/2)(p''/p')^2].
inline double mirror_energy_flux(const RayMap& map, double u)
{
    const RayJet j = map.jet(u);
    require(j[1] > 0, Errc::DegenerateMap, "p'(u) <= 0 at u = " + std::to_string(u));
    const double r = j[2] / j[1];
    return -(j[3] / j[1] - 1.5 * r * r) / (24 * std::numbers::pi);
}

//---------------------------------------------------------------------------//
// Mirror configurations
//---------------------------------------------------------------------------//
enum class MirrorVariant { static_plane_3p1, static_point_1p1, moving_point_1p1 };

struct MirrorConfig {
    MirrorVariant variant = MirrorVariant::static_plane_3p1;
    double offset = 0;                 // plane: n.x = offset; point: x = offset
    std::array<double, 3> normal{0, 0, 1};
    std::shared_ptr<const RayMap> ray_map; // moving variant only

    static MirrorConfig plane(double offset, std::array<double, 3> n = {0, 0, 1})
    {
        const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
        require(len > 0, Errc::InvalidArgument, "mirror normal must be non-zero");
        for (auto& c : n) c /= len;
        return {MirrorVariant::static_plane_3p1, offset, n, nullptr};
    }
    static MirrorConfig point(double z0) { return {MirrorVariant::static_point_1p1, z0, {1, 0, 0}, nullptr}; }
    static MirrorConfig moving(RayMap map)
    {
        return {MirrorVariant::moving_point_1p1, 0, {1, 0, 0},
                std::make_shared<const RayMap>(std::move(map))};
    }

    bool is_static() const { return variant != MirrorVariant::moving_point_1p1; }
    int spatial_dim() const { return variant == MirrorVariant::static_plane_3p1 ? 3 : 1; }

    /// Signed distance of the spatial part of y from the mirror (static variants).
    template <class T>
    T signed_distance(const BasicFourVector<T>& y) const
    {
        if (variant == MirrorVariant::static_point_1p1) return y[1] - T(offset);
        return y[1] * T(normal[0]) + y[2] * T(normal[1]) + y[3] * T(normal[2]) - T(offset);
    }
};

/// Reflect the spatial part of y through a static mirror; time is unchanged.
template <class T>
BasicFourVector<T> image_point(const MirrorConfig& mirror, BasicFourVector<T> y)
{
    require(mirror.is_static(), Errc::WrongVariant, "image_point needs a static mirror");
    const T d = mirror.signed_distance(y);
    if (mirror.variant == MirrorVariant::static_point_1p1) {
        y[1] -= T(2) * d;
    } else {
        for (std::size_t i = 0; i < 3; ++i) y[i + 1] -= T(2) * d * T(mirror.normal[i]);
    }
    return y;
}

} // namespace qfb
