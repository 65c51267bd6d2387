#pragma once

#include <cmath>
#include <ostream>
#include <span>
#include <vector>

#include "qfb/greens.hpp"
#include "qfb/spectral.hpp"

namespace qfb {

enum class Coupling { monopole, minimal };

struct DetectorConfig {
    double omega = 1; // internal gap
    Coupling coupling = Coupling::monopole;
    double e = 1;
    AnalyticTrajectory trajectory = AnalyticTrajectory::at_position(0, 0, 0);
    CorrelatorKernel kernel{KernelKind::wightman, FieldState::vacuum(), 1e-3};
    double t_obs = 200;
    bool deexcitation = false; // evaluate at -omega

    void validate() const
    {
        require(omega > 0, Errc::ValidationError, "detector.omega must be > 0");
        require(t_obs > 2 * std::numbers::pi / omega, Errc::ValidationError,
                "detector.t_obs must exceed 2 pi / omega");
    }
};

struct ResponseResult {
    double F = 0;    // accumulated response over the window
    double rate = 0; // F / t_obs
    double error = 0;
};

/*!
 * Transition rate of a stationary detector under Gaussian switching of
 * effective duration t_obs. Minimal coupling to dQ/dtau weights the
 * monopole rate by omega^2.
 */
inline ResponseResult response_rate(const DetectorConfig& cfg)
{
    cfg.validate();
    const double w = cfg.deexcitation ? -cfg.omega : cfg.omega;
    const auto tr = windowed_wightman_transform(cfg.kernel.with_kind(KernelKind::wightman), cfg.trajectory, w,
                                                cfg.t_obs);
    double weight = cfg.e * cfg.e;
    if (cfg.coupling == Coupling::minimal) weight *= w * w;
    ResponseResult r;
    r.rate = weight * tr.value;
    r.error = weight * tr.error;
    r.F = r.rate * cfg.t_obs;
    return r;
}

struct DistanceRow {
    double omega = 0, z = 0;
    double rate = 0, error = 0;
    double free_rate = 0;
    double modification = 0; // rate / free_rate
};

/// Static detector at distance z along the normal of a static plane mirror.
inline std::vector<DistanceRow> response_vs_distance(const DetectorConfig& cfg, std::span<const double> zs)
{
    const auto& m = cfg.kernel.mirror();
    require(m && m->variant == MirrorVariant::static_plane_3p1, Errc::WrongVariant,
            "response_vs_distance needs a static plane mirror");
    DetectorConfig free = cfg;
    free.kernel = CorrelatorKernel(cfg.kernel.kind(), cfg.kernel.state(), cfg.kernel.eps());
    free.trajectory = AnalyticTrajectory::at_position(0, 0, 0);
    const double free_rate = response_rate(free).rate;
    std::vector<DistanceRow> out;
    for (double z : zs) {
        require(z > 0, Errc::ValidationError, "detector distance must be > 0");
        DetectorConfig c = cfg;
        const double d = m->offset + z;
        c.trajectory = AnalyticTrajectory::at_position(d * m->normal[0], d * m->normal[1], d * m->normal[2]);
        const auto r = response_rate(c);
        out.push_back({cfg.omega, z, r.rate, r.error, free_rate, r.rate / free_rate});
    }
    return out;
}

inline constexpr const char* kResponseCsvHeader = "omega,z,rate,error_estimate";

inline void write_response_csv(std::ostream& os, std::span<const DistanceRow> rows)
{
    os << kResponseCsvHeader << '\n';
    for (const auto& r : rows)
        os << format_double(r.omega) << ',' << format_double(r.z) << ',' << format_double(r.rate) << ','
           << format_double(r.error) << '\n';
}

} // namespace qfb
