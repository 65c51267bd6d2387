#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qfb/greens.hpp"
#include "qfb/parallel.hpp"

namespace qfb {

struct WindowedTransform {
    double value = 0;
    double error = 0;
};

/// Distance the lag contour is pushed into the lower half plane.
inline double contour_shift(const CorrelatorKernel& k, const AnalyticTrajectory& traj, double omega)
{
    double d = std::numeric_limits<double>::infinity();
    if (k.state().is_thermal()) d = std::min(d, k.state().beta());
    if (traj.kind == TrajectoryKind::uniform_acceleration) d = std::min(d, 2 * std::numbers::pi / traj.accel);
    if (omega != 0) d = std::min(d, 2 / std::abs(omega));
    if (!std::isfinite(d)) d = 2;
    return 0.5 * d;
}

/*!
 * W~(omega) = int ds e^{-i omega s} e^{-s^2/(4 sigma^2)} W(s),  sigma = t_obs / sqrt(pi).
 *
 * Equals (1/t_obs) times the double time integral of the Wightman pullback
 * under a Gaussian switching whose square integrates to t_obs. The lag
 * contour runs at Im s = -delta, clear of every singularity of a stationary
 * pullback, so no regulator is needed. W(-conj z) = conj W(z) folds the
 * integral onto s > 0.
 */
inline WindowedTransform windowed_wightman_transform(const CorrelatorKernel& k, const AnalyticTrajectory& traj,
                                                     double omega, double t_obs, double cut = 13)
{
    require(t_obs > 0, Errc::InvalidArgument, "observation window must be > 0");
    using cd = std::complex<double>;
    const double sigma = t_obs / std::sqrt(std::numbers::pi);
    const double delta = contour_shift(k, traj, omega);
    const double L = cut * sigma;
    double width = delta;
    if (omega != 0) width = std::min(width, 2 * std::numbers::pi / std::abs(omega));
    const auto panels = static_cast<std::size_t>(std::ceil(L / width));
    const double h = L / double(panels);

    // stationarity is checked once, outside the workers
    (void)stationary_wightman(k, traj, cd(1, -delta));

    auto f = [&](double s) {
        const cd z(s, -delta);
        return (std::exp(cd(0, -omega) * z - z * z / (4 * sigma * sigma)) * stationary_wightman(k, traj, z)).real();
    };
    std::vector<double> val(panels), err(panels), l1(panels);
    parallel_for(panels, [&](std::size_t p) {
        using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
        val[p] = GK::integrate(f, h * double(p), h * double(p + 1), 0, 0, &err[p], &l1[p]);
    });
    WindowedTransform out;
    double norm = 0;
    for (std::size_t p = 0; p < panels; ++p) {
        out.value += val[p];
        out.error += err[p];
        norm += l1[p];
    }
    out.value *= 2;
    out.error *= 2;
    require(std::isfinite(out.value) && out.error <= 1e-7 * 2 * norm + 1e-300, Errc::QuadratureNotConverged,
            "windowed transform did not converge (error " + std::to_string(out.error) + ")");
    return out;
}

} // namespace qfb
