#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qfb/ald.hpp"

using namespace qfb;
using std::numbers::pi;

TEST(Params, RunawayFreeBound)
{
    const double e = 1, cutoff = 10;
    const double shift = e * e * cutoff / (8 * pi);
    EXPECT_NO_THROW(ParticleParams::make(shift * 1.01, e, cutoff));
    try {
        ParticleParams::make(shift * 0.99, e, cutoff);
        FAIL();
    } catch (const Error& err) {
        EXPECT_TRUE(err.is_validation());
    }
    const auto p = ParticleParams::make(2, 0.5, 3, 0.5);
    EXPECT_DOUBLE_EQ(p.r0, 0.25 / (8 * pi));
    EXPECT_DOUBLE_EQ(p.m_inf(), 2 - 0.5 * 0.25 * 3 / (8 * pi));
}

TEST(Dressing, Endpoints)
{
    const auto p = ParticleParams::make(1, 0.8, 2, 1.5);
    for (auto shape : {SwitchShape::exponential, SwitchShape::smoothstep}) {
        const auto sw = SwitchProfile::make(shape, 0.7);
        EXPECT_EQ(switch_g(0, sw), 0.0);
        EXPECT_EQ(mass_m(0, p, sw), p.m0);
        EXPECT_EQ(mass_m(1e4, p, sw) - (p.m0 - p.kappa * p.e2() * p.cutoff / (8 * pi)), 0.0);
        double prev = 0;
        for (double t = 0.01; t < 10; t += 0.01) {
            const double g = switch_g(t, sw);
            EXPECT_GE(g, prev);
            prev = g;
            // dg against a central difference
            EXPECT_NEAR(switch_dg(t, sw), (switch_g(t + 1e-6, sw) - switch_g(t - 1e-6, sw)) / 2e-6, 1e-6);
        }
        EXPECT_LE(1 - switch_g(21, sw), std::exp(-21 / 0.7) + 1e-16);
    }
    EXPECT_NEAR(switch_g(0.7, SwitchProfile::make(SwitchShape::exponential, 0.7)), 1 - 1 / std::numbers::e, 1e-15);
    const auto bare = ParticleParams::make(1, 0.8, 2, 0);
    EXPECT_EQ(mass_m(3, bare, SwitchProfile::make(SwitchShape::exponential, 1)), 1.0);
}

TEST(RadiationReaction, VanishesOnHyperbola)
{
    for (double a : {0.5, 1.0, 5.0}) {
        const auto traj = AnalyticTrajectory::hyperbolic(a);
        for (double tau = 0; tau <= 20; tau += 0.5) EXPECT_LT(max_abs(rr_force(traj.state(tau), 1, 1.3)), 1e-12);
    }
}

TEST(RadiationReaction, SwitchAndStaticJerk)
{
    auto s = AnalyticTrajectory::hyperbolic(1).state(0.4);
    s.jerk = FourVector{{0.1, 2, 0, 0}};
    EXPECT_EQ(max_abs(rr_force(s, 0, 2)), 0.0);
    auto r = AnalyticTrajectory::at_position(0, 0, 0).state(1);
    const FourVector j{{0, 0.3, -0.2, 0.5}};
    r.jerk = j;
    const FourVector f = rr_force(r, 0.6, 1.5);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(f[i], 2.25 * 0.6 * j[i]);
    r.jerk.reset();
    EXPECT_THROW(rr_force(r, 1, 1), Error);
}

TEST(Potential, GradientMatchesFiniteDifferences)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-2, 2);
    const auto pot = ExternalPotential::combined({0.3, -1.1, 0.7}, 2.5, {0.1, 0.2, -0.3}, {true, false, true});
    for (int n = 0; n < 50; ++n) {
        const FourVector x{{U(rng), U(rng), U(rng), U(rng)}};
        const FourVector g = pot.gradient(x);
        for (std::size_t i = 1; i < 4; ++i) {
            const double h = 1e-5;
            FourVector xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const double fd = (pot.V(xp) - pot.V(xm)) / (2 * h);
            EXPECT_NEAR(g[i], fd, 1e-8 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(Potential, ForceIsOrthogonalToVelocity)
{
    const auto pot = ExternalPotential::combined({0.3, -1.1, 0.7}, 2.5);
    const FourVector x{{0, 0.4, -0.2, 1}}, u = four_velocity_from_spatial(0.3, 0.5, -0.1);
    EXPECT_NEAR(minkowski_dot(pot.force_at(x, u), u), 0, 1e-14);
}

namespace {

ALDConfig base(double e2, double cutoff = 1, double kappa = 1)
{
    ALDConfig c;
    c.params = ParticleParams::make(1, std::sqrt(e2), cutoff, kappa);
    c.sw = SwitchProfile::for_particle(c.params);
    return c;
}

} // namespace

TEST(Integrate, ForceFreeRest)
{
    auto c = base(0.5);
    c.tau_max = 5;
    c.dt = 0.01;
    const auto res = integrate_ald(c);
    for (const auto& s : res.worldline.samples()) {
        EXPECT_EQ(s.u, at_rest());
        EXPECT_NEAR(s.x[0], s.tau, 1e-12);
        EXPECT_EQ(s.x[1], 0.0);
    }
}

TEST(Integrate, LateTimeHyperbola)
{
    auto c = base(0.5, 2, 1);
    const double F = 0.4;
    c.potential = ExternalPotential::linear({F, 0, 0});
    c.dt = 1e-3;
    c.tau_max = 5;
    const double td = c.sw.tau_d;
    ASSERT_LT(30 * td, 2.0);
    const auto res = integrate_ald(c);
    const double a = F / c.params.m_inf();
    // propagate the state at tau1 along the hyperbola of acceleration a
    const auto& w = res.worldline;
    const std::size_t i1 = std::size_t(std::llround(2.0 / c.dt));
    const double eta1 = std::atanh(w[i1].u[1] / w[i1].u[0]);
    for (std::size_t i = i1; i < w.size(); i += 100) {
        const double eta = eta1 + a * (w[i].tau - w[i1].tau);
        EXPECT_NEAR(w[i].u[0], std::cosh(eta), 1e-6 * std::cosh(eta));
        EXPECT_NEAR(w[i].u[1], std::sinh(eta), 1e-6 * std::cosh(eta));
        EXPECT_LT(max_abs(res.rr[i]), 1e-9);
    }
}

TEST(Integrate, RunawayRate)
{
    auto c = base(0.1, 1, 0);
    c.mode = IntegratorMode::naive;
    c.a0 = FourVector{{0, 1e-8, 0, 0}};
    c.dt = 1e-4;
    c.tau_max = 1.1;
    const double rate = fit_growth_rate(integrate_ald(c).worldline);
    EXPECT_NEAR(rate, 10, 0.2);
}

TEST(Integrate, NaiveRejectsSwitch)
{
    auto c = base(0.1, 1, 0);
    c.mode = IntegratorMode::naive;
    c.naive_use_switch = true;
    try {
        integrate_ald(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::GSingular);
    }
}

TEST(Causality, DressedEquationDoesNotPreaccelerate)
{
    auto c = base(0.5);
    c.potential = ExternalPotential::linear({0.3, 0, 0});
    c.force_onset = 10 * c.sw.tau_d;
    c.dt = 1e-3;
    c.tau_max = c.force_onset + 1;
    EXPECT_LT(preacceleration_probe(c), 1e-10);
    c.force_onset = 0;
    EXPECT_EQ(preacceleration_probe(c), 0.0);
}

TEST(Causality, NaiveTunedDataPreaccelerates)
{
    // the non-runaway solution of m a = e^2 a' + F theta(tau - tf) in the
    // nonrelativistic limit has a(0) = (F/m) e^{-tf m / e^2}
    auto c = base(0.1, 1, 0);
    c.mode = IntegratorMode::naive;
    const double F = 0.01, tf = 0.3;
    c.potential = ExternalPotential::linear({F, 0, 0});
    c.force_onset = tf;
    c.a0 = FourVector{{0, F * std::exp(-tf * 10), 0, 0}};
    c.dt = 1e-4;
    c.tau_max = tf + 0.05;
    EXPECT_GT(preacceleration_probe(c), 1e-6);
}

TEST(Integrate, TurnOnTime)
{
    // near-circular orbit in a harmonic well; |f_RR| follows g(tau)
    auto c = base(1e-4, 1, 0);
    c.sw = SwitchProfile::make(SwitchShape::exponential, 1.0);
    const double k = 1, v = 0.3, gamma = 1 / std::sqrt(1 - v * v);
    const double omega = std::sqrt(k / gamma), R = v / omega;
    c.potential = ExternalPotential::harmonic(k, {0, 0, 0}, {true, true, false});
    c.x0 = FourVector{{0, R, 0, 0}};
    c.u0 = four_velocity_from_spatial(0, gamma * v, 0);
    c.dt = 1e-3;
    c.tau_max = 12;
    const auto res = integrate_ald(c);
    auto mag = [&](std::size_t i) { return std::sqrt(std::abs(minkowski_dot(res.rr[i], res.rr[i]))); };
    const double late = mag(res.rr.size() - 1);
    const double target = (1 - 1 / std::numbers::e) * late;
    double crossing = -1;
    for (std::size_t i = 1; i < res.rr.size(); ++i)
        if (mag(i - 1) < target && mag(i) >= target) {
            const double s = (target - mag(i - 1)) / (mag(i) - mag(i - 1));
            crossing = res.worldline[i - 1].tau + s * c.dt;
            break;
        }
    EXPECT_NEAR(crossing, c.sw.tau_d, 0.05 * c.sw.tau_d);
}

TEST(Integrate, ShellPreservedOverManySteps)
{
    auto c = base(0.3);
    c.potential = ExternalPotential::combined({0.2, 0, 0}, 0.5, {0, 0, 0}, {false, true, true});
    c.u0 = four_velocity_from_spatial(0, 0.4, 0.1);
    c.dt = 1e-5;
    c.tau_max = 10;
    const auto res = integrate_ald(c);
    ASSERT_EQ(res.worldline.size(), 1000001u);
    double worst = 0;
    for (const auto& s : res.worldline.samples()) worst = std::max(worst, s.shell_residual());
    EXPECT_LT(worst, 1e-9);
}

TEST(Integrate, DtHalvingConverges)
{
    auto c = base(0.3);
    c.potential = ExternalPotential::combined({0.2, 0, 0}, 0.5, {0, 0, 0}, {false, true, false});
    c.u0 = four_velocity_from_spatial(0, 0.4, 0);
    c.tau_max = 4;
    auto end = [&](double dt) {
        c.dt = dt;
        return integrate_ald(c).worldline.back().u;
    };
    const FourVector u1 = end(0.02), u2 = end(0.01), u3 = end(0.005);
    const double e12 = max_abs(u1 - u2), e23 = max_abs(u2 - u3);
    EXPECT_GT(e12 / e23, 4.0);
}

TEST(Integrate, EnergyBookkeeping)
{
    // m(tau) du/dtau = f_ext + f_RR along the solution
    auto c = base(0.5, 2, 1);
    c.potential = ExternalPotential::linear({0.4, 0, 0});
    c.dt = 1e-3;
    c.tau_max = 3;
    const auto res = integrate_ald(c);
    const auto& w = res.worldline;
    for (std::size_t i = 1000; i + 1 < w.size(); i += 250) {
        const double du0 = (w[i + 1].u[0] - w[i - 1].u[0]) / (2 * c.dt);
        const double m = mass_m(w[i].tau, c.params, c.sw);
        const double f0 = c.potential.force_at(w[i].x, w[i].u)[0];
        EXPECT_NEAR(m * du0 - f0, res.rr[i][0], 1e-6);
    }
}
