#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "qfb/detector.hpp"

using namespace qfb;
using std::numbers::pi;

namespace {

double planck_rate(double omega, double T) { return omega / (2 * pi) / std::expm1(omega / T); }

DetectorConfig accelerated(double a, double omega)
{
    DetectorConfig c;
    c.omega = omega;
    c.trajectory = AnalyticTrajectory::hyperbolic(a);
    c.t_obs = 200 / omega;
    return c;
}

DetectorConfig near_mirror(double T, double omega)
{
    DetectorConfig c;
    c.omega = omega;
    c.kernel = CorrelatorKernel(KernelKind::wightman, FieldState::thermal(T), 1e-3, MirrorConfig::plane(0));
    c.t_obs = 2000 / omega;
    return c;
}

} // namespace

TEST(Response, AcceleratedIsPlanckian)
{
    for (auto [a, w] : {std::pair{2 * pi, 1.0}, std::pair{1.0, 0.5}}) {
        const auto r = response_rate(accelerated(a, w));
        EXPECT_NEAR(r.rate, planck_rate(w, a / (2 * pi)), 0.03 * planck_rate(w, a / (2 * pi)));
        EXPECT_DOUBLE_EQ(r.F, r.rate * 200 / w);
    }
    EXPECT_NEAR(response_rate(accelerated(2 * pi, 1)).rate, 1 / (2 * pi * (std::numbers::e - 1)), 1e-3);
}

TEST(Response, InertialVacuumIsDark)
{
    DetectorConfig c;
    c.trajectory = AnalyticTrajectory::inertial(four_velocity_from_spatial(0.6, 0, 0));
    EXPECT_LT(std::abs(response_rate(c).rate), 1e-12);
    c.trajectory = AnalyticTrajectory::at_position(0, 0, 0);
    EXPECT_LT(std::abs(response_rate(c).rate), 1e-12);
}

TEST(Response, StaticThermalIsPlanckian)
{
    DetectorConfig c;
    c.kernel = CorrelatorKernel(KernelKind::wightman, FieldState::thermal(0.3), 1e-3);
    c.omega = 0.7;
    c.t_obs = 500;
    EXPECT_NEAR(response_rate(c).rate, planck_rate(0.7, 0.3), 1e-3 * planck_rate(0.7, 0.3));
}

TEST(Response, DetailedBalance)
{
    const double a = 1.5, w = 0.8;
    auto up = accelerated(a, w);
    auto down = up;
    down.deexcitation = true;
    const double ratio = response_rate(up).rate / response_rate(down).rate;
    const double ref = std::exp(-2 * pi * w / a);
    EXPECT_NEAR(ratio, ref, 0.03 * ref);
}

TEST(Response, MinimalCouplingWeight)
{
    auto c = accelerated(1, 0.5);
    const double mono = response_rate(c).rate;
    c.coupling = Coupling::minimal;
    c.e = 2;
    EXPECT_NEAR(response_rate(c).rate, 4 * 0.25 * mono, 1e-15);
}

TEST(Response, WindowConvergence)
{
    auto c = accelerated(1, 0.5);
    c.t_obs = 100;
    const double r1 = response_rate(c).rate;
    c.t_obs = 200;
    const double r2 = response_rate(c).rate;
    EXPECT_LT(std::abs(r2 / r1 - 1), 1.0 / 100);
}

TEST(Response, Errors)
{
    DetectorConfig c;
    c.omega = 0;
    EXPECT_THROW(response_rate(c), Error);
    c.omega = 1;
    c.t_obs = 5;
    EXPECT_THROW(response_rate(c), Error);
    c = accelerated(1, 1);
    c.kernel = CorrelatorKernel(KernelKind::wightman, FieldState::thermal(0.2), 1e-3);
    try {
        response_rate(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NonStationary);
    }
    const std::vector<double> z{1.0};
    EXPECT_THROW(response_vs_distance(accelerated(1, 1), z), Error);
}

TEST(Mirror, ModificationMatchesBracket)
{
    const double T = 0.5, w = 1;
    std::vector<double> zs;
    for (int i = 1; i <= 20; ++i) zs.push_back(0.25 * i / w);
    const auto rows = response_vs_distance(near_mirror(T, w), zs);
    ASSERT_EQ(rows.size(), zs.size());
    EXPECT_NEAR(rows[0].free_rate, planck_rate(w, T), 1e-6 * planck_rate(w, T));
    for (const auto& r : rows) {
        const double x = 2 * w * r.z;
        EXPECT_NEAR(r.modification, 1 - std::sin(x) / x, 1e-4) << "z = " << r.z;
        EXPECT_GE(r.modification, 0);
        EXPECT_LE(r.modification, 1.22);
    }
}

TEST(Mirror, LimitsAndZeroCrossing)
{
    const double T = 0.5, w = 1;
    const std::vector<double> zs{1e-3, pi / (2 * w), 300};
    const auto rows = response_vs_distance(near_mirror(T, w), zs);
    EXPECT_LT(rows[0].modification, 1e-5);
    EXPECT_NEAR(rows[1].modification, 1, 1e-4);
    EXPECT_NEAR(rows[2].rate / rows[2].free_rate, 1, 1e-3);
}

TEST(Mirror, Csv)
{
    const std::vector<double> zs{0.5, 1.0};
    const auto rows = response_vs_distance(near_mirror(0.5, 1), zs);
    std::ostringstream os;
    write_response_csv(os, rows);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, kResponseCsvHeader);
    int n = 0;
    while (std::getline(is, line)) ++n;
    EXPECT_EQ(n, 2);
}
