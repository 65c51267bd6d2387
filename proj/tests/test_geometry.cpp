#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "qfb/geometry.hpp"

using namespace qfb;

TEST(FourVector, MinkowskiDot)
{
    EXPECT_EQ(minkowski_dot(FourVector{{1, 0, 0, 0}}, FourVector{{1, 0, 0, 0}}), 1);
    EXPECT_EQ(minkowski_dot(FourVector{{1, 1, 0, 0}}, FourVector{{1, 1, 0, 0}}), 0);
    EXPECT_EQ(minkowski_dot(FourVector{{0, 3, 4, 0}}, FourVector{{0, 3, 4, 0}}), -25);
}

TEST(FourVector, DotIsBilinearAndSymmetric)
{
    const FourVector a{{1.5, -0.2, 3, 0.7}}, b{{-2, 1, 0.5, 4}}, c{{0.3, 0.3, -1, 2}};
    EXPECT_DOUBLE_EQ(minkowski_dot(a, b), minkowski_dot(b, a));
    EXPECT_NEAR(minkowski_dot(a * 2.0 + c, b), 2 * minkowski_dot(a, b) + minkowski_dot(c, b), 1e-12);
}

TEST(FourVector, RenormalizeVelocity)
{
    EXPECT_EQ(renormalize_velocity(FourVector{{2, 0, 0, 0}}), (FourVector{{1, 0, 0, 0}}));
    EXPECT_EQ(renormalize_velocity(at_rest()), at_rest());
    const double s = 1.0001;
    const FourVector u = renormalize_velocity(FourVector{{std::cosh(1.0) * s, std::sinh(1.0) * s, 0, 0}});
    EXPECT_NEAR(u[0], std::cosh(1.0), 1e-14);
    EXPECT_NEAR(u[1], std::sinh(1.0), 1e-14);
    EXPECT_NEAR(minkowski_dot(u, u), 1, 1e-15);
}

TEST(FourVector, RenormalizeRejectsSpacelike)
{
    try {
        renormalize_velocity(FourVector{{1, 1, 0, 0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NonTimelike);
    }
    EXPECT_THROW(renormalize_velocity(FourVector{{0, 2, 0, 0}}), Error);
}

TEST(AnalyticTrajectory, HyperbolaAtOrigin)
{
    const auto s = eval_analytic(AnalyticTrajectory::hyperbolic(1), 0);
    EXPECT_EQ(s.x, FourVector{});
    EXPECT_EQ(s.u, at_rest());
}

TEST(AnalyticTrajectory, HyperbolaInvariants)
{
    for (double a : {0.5, 1.0, 5.0}) {
        const auto traj = AnalyticTrajectory::hyperbolic(a);
        for (double tau = 0; tau <= 6; tau += 0.25) {
            const auto s = eval_analytic(traj, tau);
            const double scale = std::cosh(a * tau);
            EXPECT_NEAR(minkowski_dot(s.acc, s.acc), -a * a, 1e-12 * a * a * scale * scale);
            EXPECT_LT(s.shell_residual(), 1e-9 * scale * scale);
            EXPECT_LT(s.orthogonality_residual(), 1e-7 * scale * scale);
            ASSERT_TRUE(s.acc_sq.has_value());
            EXPECT_DOUBLE_EQ(*s.acc_sq, -a * a);
            const FourVector id = s.u * *s.acc_sq + *s.jerk;
            EXPECT_LT(max_abs(id), 1e-12);
        }
    }
}

TEST(AnalyticTrajectory, StaticAndInertial)
{
    const auto s = eval_analytic(AnalyticTrajectory::at_position(0, 0, 0), 5);
    EXPECT_EQ(s.x, (FourVector{{5, 0, 0, 0}}));
    EXPECT_EQ(s.u, at_rest());
    const auto v = AnalyticTrajectory::inertial(four_velocity_from_spatial(0.3, 0, 0));
    const auto sv = v.state(2);
    EXPECT_NEAR(sv.x[1], 0.6, 1e-15);
    EXPECT_THROW(eval_analytic(v, -1), Error);
}

TEST(AnalyticTrajectory, ComplexPositionMatchesReal)
{
    const auto traj = AnalyticTrajectory::hyperbolic(2);
    const auto xc = traj.position(std::complex<double>(0.7, 0));
    const auto xr = traj.position(0.7);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(xc[i].real(), xr[i]);
}

TEST(Worldline, InterpolateAtSampleIsExact)
{
    const auto traj = AnalyticTrajectory::hyperbolic(1);
    const Worldline w = sample_trajectory(traj, 0, 0.1, 21);
    const auto s = w.interpolate(w[7].tau);
    EXPECT_EQ(s.x, w[7].x);
    EXPECT_EQ(s.u, w[7].u);
}

TEST(Worldline, CubicMatchesClosedForm)
{
    const auto traj = AnalyticTrajectory::hyperbolic(1);
    const Worldline w = sample_trajectory(traj, 0, 1e-3, 2001);
    for (double tau : {0.0005, 0.1234, 0.77777, 1.5003, 1.9995}) {
        const auto s = w.interpolate(tau);
        const auto ref = traj.state(tau);
        EXPECT_LT(max_abs(s.x - ref.x), 1e-8);
        EXPECT_LT(max_abs(s.u - ref.u), 1e-8);
        EXPECT_LT(max_abs(s.acc - ref.acc), 1e-8);
        EXPECT_LT(s.shell_residual(), 1e-12);
    }
}

TEST(Worldline, LinearMidpointIsMean)
{
    std::vector<WorldlineState> s(2);
    s[0].tau = 0;
    s[0].x = {{0, 0, 0, 0}};
    s[1].tau = 1;
    s[1].x = {{1, 0.5, 0, 0}};
    const Worldline w(s, InterpOrder::linear);
    const auto m = w.interpolate(0.5);
    EXPECT_DOUBLE_EQ(m.x[0], 0.5);
    EXPECT_DOUBLE_EQ(m.x[1], 0.25);
}

TEST(Worldline, Errors)
{
    const Worldline w = sample_trajectory(AnalyticTrajectory::at_position(0, 0, 0), 0, 1, 3);
    try {
        w.interpolate(3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::OutOfRange);
    }
    std::vector<WorldlineState> bad(2);
    bad[0].tau = 1;
    bad[1].tau = 1;
    EXPECT_THROW(Worldline{bad}, Error);
}

TEST(Worldline, CsvRoundTrip)
{
    const Worldline w = sample_trajectory(AnalyticTrajectory::hyperbolic(0.7), 0, 0.3, 9);
    std::stringstream ss;
    write_worldline_csv(ss, w);
    std::string header;
    std::getline(std::stringstream(ss.str()), header);
    EXPECT_EQ(header, kWorldlineCsvHeader);
    const Worldline r = read_worldline_csv(ss);
    ASSERT_EQ(r.size(), w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        EXPECT_EQ(r[i].tau, w[i].tau);
        EXPECT_EQ(r[i].x, w[i].x);
        EXPECT_EQ(r[i].u, w[i].u);
        EXPECT_EQ(r[i].acc, w[i].acc);
    }
}
