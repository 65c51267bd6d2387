#pragma once

#include <cmath>
#include <complex>

namespace qfb {

/*!
 * Second-order forward-mode number: f + e1 d1 + e2 d2 + e12 d1 d2 with
 * e1^2 = e2^2 = 0. Seeding two input directions yields a value, both first
 * partials and the mixed second partial in one evaluation.
 */
template <class T>
struct HyperDual {
    T f{}, e1{}, e2{}, e12{};

    HyperDual() = default;
    HyperDual(T v) : f(v) {} // NOLINT: implicit promotion from scalars is intended
    HyperDual(T v, T a, T b, T ab) : f(v), e1(a), e2(b), e12(ab) {}

    HyperDual& operator+=(const HyperDual& o)
    {
        f += o.f; e1 += o.e1; e2 += o.e2; e12 += o.e12;
        return *this;
    }
    HyperDual& operator-=(const HyperDual& o)
    {
        f -= o.f; e1 -= o.e1; e2 -= o.e2; e12 -= o.e12;
        return *this;
    }
    HyperDual& operator*=(const HyperDual& o)
    {
        *this = HyperDual(f * o.f, f * o.e1 + e1 * o.f, f * o.e2 + e2 * o.f,
                          f * o.e12 + e1 * o.e2 + e2 * o.e1 + e12 * o.f);
        return *this;
    }
    HyperDual& operator/=(const HyperDual& o) { return *this *= inverse(o); }

    friend HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
    friend HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }
    friend HyperDual operator*(HyperDual a, const HyperDual& b) { return a *= b; }
    friend HyperDual operator/(HyperDual a, const HyperDual& b) { return a /= b; }
    friend HyperDual operator-(const HyperDual& a) { return HyperDual(-a.f, -a.e1, -a.e2, -a.e12); }

    /// Apply a scalar function given its value and first two derivatives at f.
    HyperDual chain(T g, T dg, T d2g) const
    {
        return HyperDual(g, dg * e1, dg * e2, dg * e12 + d2g * e1 * e2);
    }

    friend HyperDual inverse(const HyperDual& a)
    {
        const T r = T(1) / a.f;
        return a.chain(r, -r * r, T(2) * r * r * r);
    }
};

template <class T>
HyperDual<T> sqrt(const HyperDual<T>& a)
{
    using std::sqrt;
    const T s = sqrt(a.f);
    return a.chain(s, T(0.5) / s, T(-0.25) / (s * a.f));
}
template <class T>
HyperDual<T> sinh(const HyperDual<T>& a)
{
    using std::cosh;
    using std::sinh;
    const T sh = sinh(a.f);
    return a.chain(sh, cosh(a.f), sh);
}
template <class T>
HyperDual<T> cosh(const HyperDual<T>& a)
{
    using std::cosh;
    using std::sinh;
    const T ch = cosh(a.f);
    return a.chain(ch, sinh(a.f), ch);
}
template <class T>
HyperDual<T> exp(const HyperDual<T>& a)
{
    using std::exp;
    const T e = exp(a.f);
    return a.chain(e, e, e);
}
template <class T>
HyperDual<T> log(const HyperDual<T>& a)
{
    using std::log;
    const T r = T(1) / a.f;
    return a.chain(log(a.f), r, -r * r);
}

/// Real part of the value, used for overflow scaling.
inline double real_value(double a) { return a; }
inline double real_value(const std::complex<double>& a) { return a.real(); }
template <class T>
double real_value(const HyperDual<T>& a)
{
    return real_value(a.f);
}

/// Magnitude of the value part, used for branch decisions.
template <class T>
double scalar_abs(const HyperDual<T>& a)
{
    using std::abs;
    return abs(a.f);
}
template <class T>
double scalar_abs(const T& a)
{
    using std::abs;
    return abs(a);
}

} // namespace qfb
