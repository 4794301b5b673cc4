#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace bosecount::dynamics {

using Complex = std::complex<double>;

class TargetUnreachable : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NoCoupling : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Single-particle Hamiltonian H = epsilon*sz + xi*sx + eta*sy (hbar = 1).
/// The tunnelling element is xi + i*eta.
struct TwoLevelParams {
    double epsilon = 0.0;
    double xi = 0.0;
    double eta = 0.0;

    double coupling_squared() const noexcept { return xi * xi + eta * eta; }

    bool valid() const noexcept
    {
        return std::isfinite(epsilon) && std::isfinite(xi) && std::isfinite(eta);
    }
};

/// 2x2 evolution matrix. State 1 is the marked mode; u_ji is the amplitude
/// for a particle in state i to end in state j.
struct SingleParticleUnitary {
    Complex u11{1.0, 0.0};
    Complex u12{0.0, 0.0};
    Complex u21{0.0, 0.0};
    Complex u22{1.0, 0.0};
    double p = 0.0;     ///< |u12|^2
    double alpha = 0.0; ///< arg u11
    double beta = 0.0;  ///< arg u12, 0 when u12 vanishes

    static SingleParticleUnitary from_elements(Complex u11, Complex u12, Complex u21,
                                               Complex u22) noexcept
    {
        SingleParticleUnitary u;
        u.u11 = u11;
        u.u12 = u12;
        u.u21 = u21;
        u.u22 = u22;
        u.p = std::norm(u12);
        u.alpha = std::arg(u11);
        u.beta = std::arg(u12);
        return u;
    }

    /// Largest violation of the unitarity conditions.
    double unitarity_defect() const noexcept
    {
        const double c1 = std::abs(std::norm(u11) + std::norm(u21) - 1.0);
        const double c2 = std::abs(std::norm(u12) + std::norm(u22) - 1.0);
        const double c3 = std::abs(u11 * std::conj(u12) + u21 * std::conj(u22));
        return std::max({c1, c2, c3});
    }
};

/// Matrix product a*b.
inline SingleParticleUnitary compose(const SingleParticleUnitary& a,
                                     const SingleParticleUnitary& b) noexcept
{
    return SingleParticleUnitary::from_elements(a.u11 * b.u11 + a.u12 * b.u21,
                                                a.u11 * b.u12 + a.u12 * b.u22,
                                                a.u21 * b.u11 + a.u22 * b.u21,
                                                a.u21 * b.u12 + a.u22 * b.u22);
}

inline double rabi_frequency(const TwoLevelParams& params) noexcept
{
    return std::hypot(params.epsilon, params.xi, params.eta);
}

/// exp(-i H t) = cos(wt) I - i sin(wt)/w (eps sz + xi sx + eta sy).
/// sin(wt)/w is replaced by its limit t when w = 0.
inline SingleParticleUnitary evolve(const TwoLevelParams& params, double t) noexcept
{
    const double omega = rabi_frequency(params);
    const double c = std::cos(omega * t);
    const double s = omega > 0.0 ? std::sin(omega * t) / omega : t;
    const Complex u11{c, -params.epsilon * s};
    const Complex u22{c, params.epsilon * s};
    // -i s (xi -/+ i eta)
    const Complex u12{-params.eta * s, -params.xi * s};
    const Complex u21{params.eta * s, -params.xi * s};
    auto u = SingleParticleUnitary::from_elements(u11, u12, u21, u22);
    u.p = std::min(1.0, params.coupling_squared() * s * s);
    return u;
}

/// Largest transition probability reachable at any time.
inline double max_transition_probability(const TwoLevelParams& params) noexcept
{
    const double omega = rabi_frequency(params);
    if (omega == 0.0)
        return 0.0;
    return params.coupling_squared() / (omega * omega);
}

/// Smallest tau >= 0 with p(tau) = target_p.
///
/// p(t) = p_max sin^2(w t) is inverted in closed form on its first
/// rising quarter period.
inline double solve_pulse_duration(const TwoLevelParams& params, double target_p)
{
    if (!(target_p >= 0.0 && target_p <= 1.0))
        throw std::invalid_argument("target probability must lie in [0, 1]");
    if (target_p == 0.0)
        return 0.0;
    if (params.coupling_squared() == 0.0)
        throw NoCoupling("no tunnelling coupling: xi = eta = 0");
    const double p_max = max_transition_probability(params);
    // a few ulps of slack so p_max itself, recomputed by the caller, is reachable
    if (target_p > p_max * (1.0 + 8 * std::numeric_limits<double>::epsilon()))
        throw TargetUnreachable("target p = " + std::to_string(target_p) +
                                " exceeds p_max = " + std::to_string(p_max));
    const double omega = rabi_frequency(params);
    const double ratio = std::min(1.0, std::sqrt(target_p / p_max));
    return std::asin(ratio) / omega;
}

} // namespace bosecount::dynamics
