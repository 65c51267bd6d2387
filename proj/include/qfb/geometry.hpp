#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qfb/errors.hpp"

namespace qfb {

//---------------------------------------------------------------------------//
// Four-vectors. Natural units, signature (+,-,-,-).
//---------------------------------------------------------------------------//
template <class T>
struct BasicFourVector {
    std::array<T, 4> c{};

    constexpr T& operator[](std::size_t i) { return c[i]; }
    constexpr const T& operator[](std::size_t i) const { return c[i]; }

    BasicFourVector& operator+=(const BasicFourVector& o)
    {
        for (std::size_t i = 0; i < 4; ++i) c[i] += o.c[i];
        return *this;
    }
    BasicFourVector& operator-=(const BasicFourVector& o)
    {
        for (std::size_t i = 0; i < 4; ++i) c[i] -= o.c[i];
        return *this;
    }
    template <class S>
    BasicFourVector& operator*=(S s)
    {
        for (auto& v : c) v *= s;
        return *this;
    }

    friend bool operator==(const BasicFourVector&, const BasicFourVector&) = default;
};

using FourVector = BasicFourVector<double>;
using ComplexFourVector = BasicFourVector<std::complex<double>>;

template <class T>
BasicFourVector<T> operator+(BasicFourVector<T> a, const BasicFourVector<T>& b)
{
    return a += b;
}
template <class T>
BasicFourVector<T> operator-(BasicFourVector<T> a, const BasicFourVector<T>& b)
{
    return a -= b;
}
template <class T>
BasicFourVector<T> operator-(BasicFourVector<T> a)
{
    for (auto& v : a.c) v = -v;
    return a;
}
template <class T, class S>
    requires std::convertible_to<S, T>
BasicFourVector<T> operator*(S s, BasicFourVector<T> a)
{
    return a *= T(s);
}
template <class T, class S>
    requires std::convertible_to<S, T>
BasicFourVector<T> operator*(BasicFourVector<T> a, S s)
{
    return a *= T(s);
}

/// Minkowski product a0 b0 - a.b
template <class T>
T minkowski_dot(const BasicFourVector<T>& a, const BasicFourVector<T>& b)
{
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

/// Index lowering with diag(1,-1,-1,-1).
template <class T>
BasicFourVector<T> lower(BasicFourVector<T> a)
{
    a[1] = -a[1];
    a[2] = -a[2];
    a[3] = -a[3];
    return a;
}

inline ComplexFourVector complexify(const FourVector& v)
{
    return {{v[0], v[1], v[2], v[3]}};
}

inline double max_abs(const FourVector& v)
{
    double m = 0;
    for (double x : v.c) m = std::max(m, std::abs(x));
    return m;
}

inline FourVector at_rest() { return {{1, 0, 0, 0}}; }

/// Four-velocity from a spatial velocity component triple u^i.
inline FourVector four_velocity_from_spatial(double ux, double uy, double uz)
{
    return {{std::sqrt(1 + ux * ux + uy * uy + uz * uz), ux, uy, uz}};
}

/// Rescale a timelike vector onto the unit mass shell.
inline FourVector renormalize_velocity(const FourVector& u)
{
    const double n2 = minkowski_dot(u, u);
    require(n2 > 0, Errc::NonTimelike, "renormalize_velocity: u.u = " + std::to_string(n2));
    return u * (1.0 / std::sqrt(n2));
}

/// Remove the component of v along the unit timelike u.
inline FourVector project_orthogonal(const FourVector& v, const FourVector& u)
{
    return v - u * minkowski_dot(u, v);
}

//---------------------------------------------------------------------------//
// Worldline states
//---------------------------------------------------------------------------//
struct WorldlineState {
    double tau = 0;
    FourVector x{};
    FourVector u = at_rest();
    FourVector acc{};
    std::optional<FourVector> jerk;
    std::optional<double> acc_sq; // closed-form a.a, when the source knows it

    /// |u.u - 1| and |u.a| residuals
    double shell_residual() const { return std::abs(minkowski_dot(u, u) - 1); }
    double orthogonality_residual() const { return std::abs(minkowski_dot(u, acc)); }
};

enum class InterpOrder { linear, cubic };

/*!
 * Proper-time sampled trajectory.
 *
 * Positions interpolate as cubic Hermite with u as derivative data, u with the
 * acceleration, and the acceleration with the jerk when every sample carries
 * one (linear otherwise). The interpolated u is always put back on shell.
 */
class Worldline {
public:
    Worldline() = default;
    explicit Worldline(std::vector<WorldlineState> samples, InterpOrder order = InterpOrder::cubic)
        : samples_(std::move(samples)), order_(order)
    {
        for (std::size_t i = 1; i < samples_.size(); ++i)
            require(samples_[i].tau > samples_[i - 1].tau, Errc::InvalidArgument,
                    "Worldline: tau must be strictly increasing");
        has_jerk_ = !samples_.empty()
                    && std::all_of(samples_.begin(), samples_.end(),
                                   [](const WorldlineState& s) { return s.jerk.has_value(); });
    }

    const std::vector<WorldlineState>& samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    const WorldlineState& operator[](std::size_t i) const { return samples_[i]; }
    const WorldlineState& front() const { return samples_.front(); }
    const WorldlineState& back() const { return samples_.back(); }
    InterpOrder order() const noexcept { return order_; }
    bool has_jerk() const noexcept { return has_jerk_; }
    double tau_min() const { return samples_.front().tau; }
    double tau_max() const { return samples_.back().tau; }

    WorldlineState interpolate(double tau) const
    {
        require(!samples_.empty() && tau >= tau_min() && tau <= tau_max(), Errc::OutOfRange,
                "Worldline::interpolate: tau outside sampled range");
        auto it = std::upper_bound(samples_.begin(), samples_.end(), tau,
                                   [](double t, const WorldlineState& s) { return t < s.tau; });
        std::size_t hi = static_cast<std::size_t>(std::distance(samples_.begin(), it));
        if (hi == 0) hi = 1;
        if (hi >= samples_.size()) hi = samples_.size() - 1;
        const std::size_t lo = hi - 1;
        const auto& a = samples_[lo];
        const auto& b = samples_[hi];
        if (tau == a.tau) return a;
        if (tau == b.tau) return b;

        const double h = b.tau - a.tau;
        const double s = (tau - a.tau) / h;
        WorldlineState out;
        out.tau = tau;
        if (order_ == InterpOrder::linear) {
            out.x = a.x * (1 - s) + b.x * s;
            out.u = a.u * (1 - s) + b.u * s;
            out.acc = a.acc * (1 - s) + b.acc * s;
        } else {
            out.x = hermite(a.x, a.u, b.x, b.u, h, s);
            out.u = hermite(a.u, a.acc, b.u, b.acc, h, s);
            out.acc = has_jerk_ ? hermite(a.acc, *a.jerk, b.acc, *b.jerk, h, s)
                                : a.acc * (1 - s) + b.acc * s;
        }
        if (has_jerk_) out.jerk = *a.jerk * (1 - s) + *b.jerk * s;
        out.u = renormalize_velocity(out.u);
        out.acc = project_orthogonal(out.acc, out.u);
        return out;
    }

private:
    static FourVector hermite(const FourVector& p0, const FourVector& m0, const FourVector& p1,
                              const FourVector& m1, double h, double s)
    {
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1;
        const double h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2;
        const double h11 = s3 - s2;
        return p0 * h00 + m0 * (h10 * h) + p1 * h01 + m1 * (h11 * h);
    }

    std::vector<WorldlineState> samples_;
    InterpOrder order_ = InterpOrder::cubic;
    bool has_jerk_ = false;
};

//---------------------------------------------------------------------------//
// Closed-form reference trajectories
//---------------------------------------------------------------------------//
enum class TrajectoryKind { static_point, uniform_velocity, uniform_acceleration };

/*!
 * Static, inertial, or hyperbolic worldline with closed-form derivatives.
 *
 * The hyperbolic case accelerates along x^1 with proper acceleration a and
 * starts at rest at the origin (shifted by `origin`). All three kinds accept a
 * complex proper time so that kernels can be regulated by an imaginary
 * proper-time split.
 */
struct AnalyticTrajectory {
    TrajectoryKind kind = TrajectoryKind::static_point;
    FourVector origin{};        // position at tau = 0
    FourVector velocity = at_rest(); // uniform-velocity only
    double accel = 0;           // uniform-acceleration only

    static AnalyticTrajectory at_position(double x, double y, double z)
    {
        AnalyticTrajectory t;
        t.origin = {{0, x, y, z}};
        return t;
    }
    static AnalyticTrajectory inertial(const FourVector& u, const FourVector& origin = {})
    {
        AnalyticTrajectory t;
        t.kind = TrajectoryKind::uniform_velocity;
        t.velocity = renormalize_velocity(u);
        t.origin = origin;
        return t;
    }
    static AnalyticTrajectory hyperbolic(double a, const FourVector& origin = {})
    {
        require(a > 0, Errc::InvalidArgument, "uniform acceleration needs a > 0");
        AnalyticTrajectory t;
        t.kind = TrajectoryKind::uniform_acceleration;
        t.accel = a;
        t.origin = origin;
        return t;
    }

    bool is_stationary_inertial() const { return kind != TrajectoryKind::uniform_acceleration; }

    template <class T>
    BasicFourVector<T> position(T tau) const
    {
        BasicFourVector<T> x{{T(origin[0]), T(origin[1]), T(origin[2]), T(origin[3])}};
        switch (kind) {
        case TrajectoryKind::static_point: x[0] += tau; break;
        case TrajectoryKind::uniform_velocity:
            for (std::size_t i = 0; i < 4; ++i) x[i] += T(velocity[i]) * tau;
            break;
        case TrajectoryKind::uniform_acceleration: {
            using std::cosh;
            using std::sinh;
            const T at = T(accel) * tau;
            x[0] += sinh(at) / T(accel);
            x[1] += (cosh(at) - T(1)) / T(accel);
        } break;
        }
        return x;
    }

    /*!
     * x(tau0 + s) - x(tau0) expressed in the comoving frame at tau0.
     *
     * For inertial kinds this equals the lab displacement. For the hyperbola
     * it is the displacement boosted back by the rapidity a*tau0, which keeps
     * invariant intervals accurate at large tau.
     */
    template <class T>
    BasicFourVector<T> comoving_displacement(T s) const
    {
        BasicFourVector<T> d{};
        if (kind == TrajectoryKind::uniform_acceleration) {
            using std::cosh;
            using std::sinh;
            d[0] = sinh(T(accel) * s) / T(accel);
            d[1] = (cosh(T(accel) * s) - T(1)) / T(accel);
        } else {
            const FourVector u = kind == TrajectoryKind::static_point ? at_rest() : velocity;
            for (std::size_t i = 0; i < 4; ++i) d[i] = T(u[i]) * s;
        }
        return d;
    }

    /// Rapidity of the comoving boost at tau (zero for inertial kinds).
    double rapidity(double tau) const
    {
        return kind == TrajectoryKind::uniform_acceleration ? accel * tau : 0.0;
    }

    WorldlineState state(double tau) const
    {
        WorldlineState s;
        s.tau = tau;
        s.x = position(tau);
        switch (kind) {
        case TrajectoryKind::static_point:
            s.u = at_rest();
            s.acc = {};
            s.jerk = FourVector{};
            s.acc_sq = 0.0;
            break;
        case TrajectoryKind::uniform_velocity:
            s.u = velocity;
            s.acc = {};
            s.jerk = FourVector{};
            s.acc_sq = 0.0;
            break;
        case TrajectoryKind::uniform_acceleration: {
            const double ch = std::cosh(accel * tau), sh = std::sinh(accel * tau);
            s.u = {{ch, sh, 0, 0}};
            s.acc = {{accel * sh, accel * ch, 0, 0}};
            s.jerk = s.u * (accel * accel);
            s.acc_sq = -(accel * accel);
        } break;
        }
        return s;
    }
};

/// Closed-form state; tau must be non-negative.
inline WorldlineState eval_analytic(const AnalyticTrajectory& traj, double tau)
{
    require(tau >= 0, Errc::OutOfRange, "eval_analytic: tau < 0");
    return traj.state(tau);
}

/// Uniform proper-time sampling of a closed-form trajectory.
inline Worldline sample_trajectory(const AnalyticTrajectory& traj, double tau0, double dt,
                                   std::size_t n, InterpOrder order = InterpOrder::cubic)
{
    std::vector<WorldlineState> s;
    s.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s.push_back(traj.state(tau0 + dt * double(i)));
    return Worldline(std::move(s), order);
}

//---------------------------------------------------------------------------//
// CSV: tau,x0,x1,x2,x3,u0,u1,u2,u3,a0,a1,a2,a3
//---------------------------------------------------------------------------//
inline constexpr const char* kWorldlineCsvHeader = "tau,x0,x1,x2,x3,u0,u1,u2,u3,a0,a1,a2,a3";

/// Shortest round-trip text for a double.
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_worldline_csv(std::ostream& os, const Worldline& w)
{
    os << kWorldlineCsvHeader << '\n';
    for (const auto& s : w.samples()) {
        os << format_double(s.tau);
        for (const auto* v : {&s.x, &s.u, &s.acc})
            for (double c : v->c) os << ',' << format_double(c);
        os << '\n';
    }
}

inline Worldline read_worldline_csv(std::istream& is)
{
    std::string line;
    require(static_cast<bool>(std::getline(is, line)) && line == kWorldlineCsvHeader,
            Errc::ParseError, "worldline CSV: bad header");
    std::vector<WorldlineState> samples;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::array<double, 13> v{};
        std::string cell;
        std::size_t k = 0;
        while (std::getline(ss, cell, ',')) {
            require(k < v.size(), Errc::ParseError, "worldline CSV line " + std::to_string(lineno));
            v[k++] = std::stod(cell);
        }
        require(k == v.size(), Errc::ParseError, "worldline CSV line " + std::to_string(lineno));
        WorldlineState s;
        s.tau = v[0];
        for (std::size_t i = 0; i < 4; ++i) {
            s.x[i] = v[1 + i];
            s.u[i] = v[5 + i];
            s.acc[i] = v[9 + i];
        }
        samples.push_back(s);
    }
    return Worldline(std::move(samples));
}

} // namespace qfb
