#pragma once

#include <bosecount/dynamics.hpp>
#include <bosecount/numerics.hpp>

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bosecount::distributions {

using numerics::SignedLog;

// Convention: m counts particles in the sparsely occupied (marked) mode,
// N - m occupy the other mode, p is the single-particle switch
// probability, distributions run over the final marked count m', and
// q = m' - m.

enum class Model { ClassicalExact, ClassicalLimit, BoseExact, BoseLimit, Oracle, Empirical };

inline std::string_view to_string(Model model) noexcept
{
    switch (model) {
    case Model::ClassicalExact: return "classical-exact";
    case Model::ClassicalLimit: return "classical-limit";
    case Model::BoseExact: return "bose-exact";
    case Model::BoseLimit: return "bose-limit";
    case Model::Oracle: return "oracle";
    case Model::Empirical: return "empirical";
    }
    return "unknown";
}

struct TransferSpec {
    long N = 1;
    long m = 0;
    double p = 0.0;

    void validate() const
    {
        if (N < 1)
            throw std::invalid_argument("N must be positive");
        if (m < 0 || m > N)
            throw std::invalid_argument("m must lie in [0, N]");
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("p must lie in [0, 1]");
    }
};

/// N -> infinity with p = w / N.
struct RareEventSpec {
    double w = 0.0;
    long m = 0;

    void validate() const
    {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("w must be finite and nonnegative");
        if (m < 0)
            throw std::invalid_argument("m must be nonnegative");
    }
};

struct DistributionMeta {
    std::optional<long> N;
    long m = 0;
    std::optional<double> p;
    std::optional<double> w;
    /// Upper bound (or estimate, for the bosonic limit) of mass outside the support.
    double tail_bound = 0.0;
    std::string note;
};

/// Probabilities over the contiguous range first..first+probs.size()-1 of m'.
struct OccupancyDistribution {
    Model model = Model::Oracle;
    long first = 0;
    std::vector<double> probs;
    DistributionMeta meta;

    long last() const noexcept { return first + static_cast<long>(probs.size()) - 1; }

    double at(long m_prime) const noexcept
    {
        if (m_prime < first || m_prime > last())
            return 0.0;
        return probs[static_cast<std::size_t>(m_prime - first)];
    }

    double total() const noexcept
    {
        numerics::CompensatedSum<double> acc;
        for (double x : probs)
            acc += x;
        return acc.value();
    }
};

namespace detail {

inline double clamp_probability(double x) noexcept { return std::clamp(x, 0.0, 1.0); }

inline double exp_probability(double log_value) noexcept
{
    return clamp_probability(std::exp(log_value));
}

/// ln C(n, k) for k = 0..n; bit-identical to numerics::log_binomial(n, k)
/// but shares the running product across k.
inline std::vector<double> log_binomial_row(long n)
{
    std::vector<double> row(static_cast<std::size_t>(n) + 1);
    numerics::CompensatedSum<double> acc;
    for (long k = 0; k <= n; ++k) {
        if (k > n - k) {
            row[static_cast<std::size_t>(k)] = row[static_cast<std::size_t>(n - k)];
        } else if (k <= 64) {
            row[static_cast<std::size_t>(k)] = acc.value();
            acc += std::log(static_cast<double>(n - k) / static_cast<double>(k + 1));
        } else {
            row[static_cast<std::size_t>(k)] = numerics::log_binomial(n, k).log_magnitude;
        }
    }
    return row;
}

/// ln(a!(N-a)! / (b!(N-b)!)) = ln C(N, b) - ln C(N, a); the binomials keep
/// full accuracy when a and b are small, where factorial logs of N would not.
inline double log_factorial_ratio(long N, long a, long b) noexcept
{
    return numerics::log_binomial(N, b).log_magnitude - numerics::log_binomial(N, a).log_magnitude;
}

/// Point mass for p in {0, 1}.
inline std::optional<long> deterministic_target(const TransferSpec& spec) noexcept
{
    if (spec.p == 0.0)
        return spec.m;
    if (spec.p == 1.0)
        return spec.N - spec.m;
    return std::nullopt;
}

/// First and last mu of the pathway region for a given q.
struct PathwayRange {
    long lo;
    long hi;
};

inline PathwayRange pathway_range(long N, long m, long q) noexcept
{
    return {std::max(0L, -q), std::min(m, N - m - q)};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Distinguishable particles

/// Single entry p^N_{m'<-m}.
inline double classical_exact_entry(const TransferSpec& spec, long m_prime)
{
    spec.validate();
    if (m_prime < 0 || m_prime > spec.N)
        return 0.0;
    if (auto target = detail::deterministic_target(spec))
        return m_prime == *target ? 1.0 : 0.0;
    const long N = spec.N;
    const long m = spec.m;
    const long q = m_prime - m;
    const double lp = std::log(spec.p);
    const double lq = numerics::log_complement(spec.p);
    const auto [lo, hi] = detail::pathway_range(N, m, q);
    std::vector<SignedLog> terms;
    for (long mu = lo; mu <= hi; ++mu) {
        const long flips = q + 2 * mu;
        terms.push_back(numerics::log_binomial(m, mu) * numerics::log_binomial(N - m, q + mu) *
                        SignedLog::from_log(flips * lp + (N - flips) * lq));
    }
    const auto s = numerics::signed_log_sum(terms);
    return s.is_zero() ? 0.0 : detail::exp_probability(s.log_magnitude);
}

/// Full distribution over m' = 0..N for distinguishable particles: mu
/// particles leave the marked mode, nu = q + mu enter it.
inline OccupancyDistribution classical_exact(const TransferSpec& spec)
{
    spec.validate();
    OccupancyDistribution d;
    d.model = Model::ClassicalExact;
    d.meta.N = spec.N;
    d.meta.m = spec.m;
    d.meta.p = spec.p;
    d.probs.assign(static_cast<std::size_t>(spec.N) + 1, 0.0);
    if (auto target = detail::deterministic_target(spec)) {
        d.probs[static_cast<std::size_t>(*target)] = 1.0;
        return d;
    }
    const long N = spec.N;
    const long m = spec.m;
    const auto out_row = detail::log_binomial_row(m);
    const auto in_row = detail::log_binomial_row(N - m);
    const double lp = std::log(spec.p);
    const double lq = numerics::log_complement(spec.p);
    std::vector<SignedLog> terms;
    for (long mp = 0; mp <= N; ++mp) {
        const long q = mp - m;
        const auto [lo, hi] = detail::pathway_range(N, m, q);
        terms.clear();
        for (long mu = lo; mu <= hi; ++mu) {
            const long flips = q + 2 * mu;
            // same association as classical_exact_entry so both agree bit for bit
            terms.push_back(SignedLog::from_log(out_row[static_cast<std::size_t>(mu)]) *
                            SignedLog::from_log(in_row[static_cast<std::size_t>(q + mu)]) *
                            SignedLog::from_log(flips * lp + (N - flips) * lq));
        }
        const auto s = numerics::signed_log_sum(terms);
        d.probs[static_cast<std::size_t>(mp)] =
            s.is_zero() ? 0.0 : detail::exp_probability(s.log_magnitude);
    }
    return d;
}

/// Upper bound on P(X > k) for X ~ Poisson(w).
inline double poisson_tail_bound(double w, long k) noexcept
{
    if (w == 0.0)
        return 0.0;
    const double next = static_cast<double>(k + 2);
    if (next <= w)
        return 1.0;
    const double pmf_next = std::exp((k + 1) * std::log(w) - w - numerics::log_factorial(k + 1));
    return std::min(1.0, pmf_next * next / (next - w));
}

inline double poisson_pmf(double w, long q) noexcept
{
    if (q < 0)
        return 0.0;
    if (w == 0.0)
        return q == 0 ? 1.0 : 0.0;
    return detail::exp_probability(q * std::log(w) - w - numerics::log_factorial(q));
}

/// Poisson(w) in q = m' - m; zero for q < 0. Support is 0..m+q_max with
/// q_max the first cut whose tail bound is below 1e-14.
inline OccupancyDistribution classical_rare_limit(const RareEventSpec& spec)
{
    spec.validate();
    constexpr double kTail = 1e-14;
    long q_max = 0;
    while (poisson_tail_bound(spec.w, q_max) >= kTail)
        ++q_max;
    OccupancyDistribution d;
    d.model = Model::ClassicalLimit;
    d.meta.m = spec.m;
    d.meta.w = spec.w;
    d.meta.tail_bound = poisson_tail_bound(spec.w, q_max);
    d.probs.assign(static_cast<std::size_t>(spec.m + q_max) + 1, 0.0);
    for (long q = 0; q <= q_max; ++q)
        d.probs[static_cast<std::size_t>(spec.m + q)] = poisson_pmf(spec.w, q);
    return d;
}

// ---------------------------------------------------------------------------
// Identical bosons

/// P^N_{m'<-m} from the pathway amplitude sum with the unitary phases
/// removed: sum over mu of (-1)^mu C(m,mu) C(N-m,q+mu)
/// p^{(q+2mu)/2} (1-p)^{(N-q-2mu)/2}, squared, times
/// m'!(N-m')! / (m!(N-m)!).
///
/// Loses accuracy to cancellation for large N and m; bose_exact uses the
/// Jacobi form instead.
inline double bose_amplitude_probability(const TransferSpec& spec, long m_prime)
{
    spec.validate();
    if (m_prime < 0 || m_prime > spec.N)
        throw std::invalid_argument("m' must lie in [0, N]");
    if (auto target = detail::deterministic_target(spec))
        return m_prime == *target ? 1.0 : 0.0;
    const long N = spec.N;
    const long m = spec.m;
    const long q = m_prime - m;
    const double half_lp = 0.5 * std::log(spec.p);
    const double half_lq = 0.5 * numerics::log_complement(spec.p);
    const auto [lo, hi] = detail::pathway_range(N, m, q);
    std::vector<SignedLog> terms;
    for (long mu = lo; mu <= hi; ++mu) {
        const long flips = q + 2 * mu;
        auto term = numerics::log_binomial(m, mu) * numerics::log_binomial(N - m, q + mu) *
                    SignedLog::from_log(flips * half_lp + (N - flips) * half_lq);
        if (mu % 2 != 0)
            term = -term;
        terms.push_back(term);
    }
    const auto s = numerics::signed_log_sum(terms);
    if (s.is_zero())
        return 0.0;
    using numerics::log_factorial;
    const double log_prefactor = detail::log_factorial_ratio(N, m_prime, m);
    return detail::exp_probability(log_prefactor + 2.0 * s.log_magnitude);
}

/// P^N_{m'<-m} from the complex amplitudes of an explicit unitary, with no
/// assumption about its phases. Used to exhibit phase independence.
inline double bose_unitary_probability(long N, long m, long m_prime,
                                       const dynamics::SingleParticleUnitary& u)
{
    if (N < 1 || m < 0 || m > N || m_prime < 0 || m_prime > N)
        throw std::invalid_argument("require 0 <= m, m' <= N");
    const long q = m_prime - m;
    struct Factor {
        double log_abs;
        double phase;
        bool zero;
    };
    auto factor = [](std::complex<double> z) {
        return Factor{z == 0.0 ? 0.0 : std::log(std::abs(z)), std::arg(z), z == 0.0};
    };
    const Factor f11 = factor(u.u11), f12 = factor(u.u12), f21 = factor(u.u21),
                 f22 = factor(u.u22);

    struct Term {
        double log_abs;
        double phase;
    };
    std::vector<Term> terms;
    const auto [lo, hi] = detail::pathway_range(N, m, q);
    for (long mu = lo; mu <= hi; ++mu) {
        const long nu = q + mu;
        const long stay_marked = m - mu;
        const long stay_other = N - m - nu;
        if ((f12.zero && nu > 0) || (f21.zero && mu > 0) || (f11.zero && stay_marked > 0) ||
            (f22.zero && stay_other > 0))
            continue;
        double log_abs = numerics::log_binomial(m, mu).log_magnitude +
                         numerics::log_binomial(N - m, nu).log_magnitude;
        double phase = 0.0;
        auto accumulate = [&](const Factor& f, long power) {
            if (power == 0)
                return;
            log_abs += power * f.log_abs;
            phase += power * f.phase;
        };
        accumulate(f12, nu);
        accumulate(f21, mu);
        accumulate(f11, stay_marked);
        accumulate(f22, stay_other);
        terms.push_back({log_abs, phase});
    }
    if (terms.empty())
        return 0.0;
    double max_log = terms.front().log_abs;
    for (const auto& t : terms)
        max_log = std::max(max_log, t.log_abs);
    numerics::CompensatedSum<double> re;
    numerics::CompensatedSum<double> im;
    for (const auto& t : terms) {
        const double scale = std::exp(t.log_abs - max_log);
        re += scale * std::cos(t.phase);
        im += scale * std::sin(t.phase);
    }
    const double magnitude = std::hypot(re.value(), im.value());
    if (magnitude == 0.0)
        return 0.0;
    using numerics::log_factorial;
    const double log_prefactor = detail::log_factorial_ratio(N, m_prime, m);
    return detail::exp_probability(log_prefactor + 2.0 * (max_log + std::log(magnitude)));
}

// ---------------------------------------------------------------------------
// Jacobi closed form

namespace detail {

// The argument is carried as h = (1 + x)/2 and its complement g = (1 - x)/2,
// whichever is small being exact, so that near x = -1 or x = 1 the large
// integer parts of the coefficients cancel exactly rather than in rounding.
struct JacobiArgument {
    double h;
    double g;
    double x() const noexcept { return h - g; }
};

inline JacobiArgument from_x(double x) noexcept { return {0.5 * (1.0 + x), 0.5 * (1.0 - x)}; }
inline JacobiArgument from_p(double p) noexcept { return {p, 1.0 - p}; }

// Three-term degree recurrence, rescaled to stay inside double range.
// Requires integer-valued a, b >= 0 (small enough that a^2, s^2 are exact).
inline SignedLog jacobi_recurrence(long n, double a, double b, JacobiArgument arg) noexcept
{
    if (n == 0)
        return SignedLog::one();
    const bool low = arg.h <= arg.g;
    double prev = 1.0;
    double curr = low ? -(b + 1.0) + (a + b + 2.0) * arg.h : (a + 1.0) - (a + b + 2.0) * arg.g;
    double log_scale = 0.0;
    const double ab2 = a * a - b * b;
    for (long k = 2; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double s = 2.0 * kd + a + b;
        const double ss = s * (s - 2.0);
        // ss x + ab2 with x = 2h - 1 or 1 - 2g
        const double lin = low ? (ab2 - ss) + 2.0 * arg.h * ss : (ab2 + ss) - 2.0 * arg.g * ss;
        const double c_next = 2.0 * kd * (kd + a + b) * (s - 2.0);
        const double c_curr = (s - 1.0) * lin;
        const double c_prev = 2.0 * (kd + a - 1.0) * (kd + b - 1.0) * s;
        const double next = (c_curr * curr - c_prev * prev) / c_next;
        prev = curr;
        curr = next;
        const double mag = std::abs(curr);
        if (mag > 1e150 || (mag < 1e-150 && mag > 0.0)) {
            prev /= mag;
            curr /= mag;
            log_scale += std::log(mag);
        }
    }
    auto v = SignedLog::from_linear(curr);
    if (!v.is_zero())
        v.log_magnitude += log_scale;
    return v;
}

// Finite hypergeometric sum, valid for any integer parameters.
inline SignedLog jacobi_finite_sum(long n, long a, long b, JacobiArgument arg)
{
    const auto lower = SignedLog::from_linear(-arg.g);
    const auto upper = SignedLog::from_linear(arg.h);
    std::vector<SignedLog> terms;
    terms.reserve(static_cast<std::size_t>(n) + 1);
    for (long s = 0; s <= n; ++s)
        terms.push_back(numerics::log_binomial_general(n + a, n - s) *
                        numerics::log_binomial_general(n + b, s) * lower.pow(s) *
                        upper.pow(n - s));
    return numerics::signed_log_sum(terms);
}

inline SignedLog jacobi(long n, long a, long b, JacobiArgument arg)
{
    if (n < 0)
        throw std::invalid_argument("Jacobi degree must be nonnegative");
    if (a >= 0 && b >= 0)
        return jacobi_recurrence(n, static_cast<double>(a), static_cast<double>(b), arg);
    return jacobi_finite_sum(n, a, b, arg);
}

} // namespace detail

/// Jacobi polynomial P_n^{(a,b)}(x) for integer parameters.
///
/// Nonnegative parameters use the scaled three-term recurrence; negative
/// ones fall back to the finite sum, where the recurrence coefficients
/// can vanish.
inline SignedLog jacobi_polynomial(long n, long a, long b, double x)
{
    return detail::jacobi(n, a, b, detail::from_x(x));
}

/// Exponent of (1 - p) in the Jacobi closed form. Corrected is N - m' - m.
/// Printed (N - m' + m) breaks unitarity already at N = 1 and is kept only
/// so tests and `verify` can demonstrate that.
enum class ClosedFormExponent { Corrected, Printed };

/// m!(N-m)!/(m'!(N-m')!) p^{m'-m} (1-p)^e |P_m^{(N-m'-m, m'-m)}(2p-1)|^2,
/// evaluated literally at (m, m') without symmetry reduction.
inline double jacobi_closed_form_probability(
    const TransferSpec& spec, long m_prime,
    ClosedFormExponent exponent = ClosedFormExponent::Corrected)
{
    spec.validate();
    if (m_prime < 0 || m_prime > spec.N)
        throw std::invalid_argument("m' must lie in [0, N]");
    if (auto target = detail::deterministic_target(spec))
        return m_prime == *target ? 1.0 : 0.0;
    const long N = spec.N;
    const long m = spec.m;
    const long q = m_prime - m;
    const auto jac = detail::jacobi(m, N - m_prime - m, q, detail::from_p(spec.p));
    if (jac.is_zero())
        return 0.0;
    const long e = exponent == ClosedFormExponent::Corrected ? N - m_prime - m : N - m_prime + m;
    using numerics::log_factorial;
    const double log_value = detail::log_factorial_ratio(N, m, m_prime) + q * std::log(spec.p) +
                             e * numerics::log_complement(spec.p) + 2.0 * jac.log_magnitude;
    return detail::exp_probability(log_value);
}

/// (m, m') mapped by P_{m'<-m} = P_{m<-m'} and P_{m'<-m} = P_{N-m'<-N-m}
/// onto a pair with m <= m' and m + m' <= N, where both Jacobi parameters
/// are nonnegative and the degree is smallest.
struct CanonicalPair {
    long m;
    long m_prime;
};

inline CanonicalPair canonical_pair(long N, long m, long m_prime) noexcept
{
    if (m > m_prime)
        std::swap(m, m_prime);
    if (m + m_prime > N) {
        const long nm = N - m_prime;
        const long nmp = N - m;
        m = nm;
        m_prime = nmp;
    }
    return {m, m_prime};
}

/// Single entry P^N_{m'<-m} via the reduced Jacobi form.
inline double bose_exact_entry(const TransferSpec& spec, long m_prime)
{
    spec.validate();
    if (m_prime < 0 || m_prime > spec.N)
        return 0.0;
    if (auto target = detail::deterministic_target(spec))
        return m_prime == *target ? 1.0 : 0.0;
    const auto c = canonical_pair(spec.N, spec.m, m_prime);
    // a single pathway: identical to the distinguishable case
    if (c.m == 0)
        return classical_exact_entry({spec.N, 0, spec.p}, c.m_prime);
    return jacobi_closed_form_probability({spec.N, c.m, spec.p}, c.m_prime);
}

/// Full bosonic distribution over m' = 0..N.
inline OccupancyDistribution bose_exact(const TransferSpec& spec)
{
    spec.validate();
    OccupancyDistribution d;
    d.model = Model::BoseExact;
    d.meta.N = spec.N;
    d.meta.m = spec.m;
    d.meta.p = spec.p;
    d.probs.resize(static_cast<std::size_t>(spec.N) + 1);
    for (long mp = 0; mp <= spec.N; ++mp)
        d.probs[static_cast<std::size_t>(mp)] = bose_exact_entry(spec, mp);
    return d;
}

namespace detail {

// L_n^{(a)}(x) by the forward three-term recurrence, rescaled like
// jacobi_recurrence. Stable for a >= 0, x > 0.
inline SignedLog laguerre_recurrence(long n, double a, double x) noexcept
{
    if (n == 0)
        return SignedLog::one();
    double prev = 1.0;
    double curr = 1.0 + a - x;
    double log_scale = 0.0;
    for (long k = 1; k < n; ++k) {
        const double kd = static_cast<double>(k);
        const double next = ((2.0 * kd + 1.0 + a - x) * curr - (kd + a) * prev) / (kd + 1.0);
        prev = curr;
        curr = next;
        const double mag = std::abs(curr);
        if (mag > 1e150 || (mag < 1e-150 && mag > 0.0)) {
            prev /= mag;
            curr /= mag;
            log_scale += std::log(mag);
        }
    }
    auto v = SignedLog::from_linear(curr);
    if (!v.is_zero())
        v.log_magnitude += log_scale;
    return v;
}

} // namespace detail

/// Rare-event limit of P_{m'<-m}, symmetric in m and m':
/// w^q e^{-w} (m!/m'!) L_m^{(q)}(w)^2 with m <= m', q = m' - m.
inline double bose_rare_entry(const RareEventSpec& spec, long m_prime)
{
    spec.validate();
    if (m_prime < 0)
        return 0.0;
    if (spec.w == 0.0)
        return m_prime == spec.m ? 1.0 : 0.0;
    const long lo = std::min(spec.m, m_prime);
    const long hi = std::max(spec.m, m_prime);
    const long q = hi - lo;
    const auto L = detail::laguerre_recurrence(lo, static_cast<double>(q), spec.w);
    if (L.is_zero())
        return 0.0;
    using numerics::log_factorial;
    return detail::exp_probability(q * std::log(spec.w) - spec.w + log_factorial(lo) -
                                   log_factorial(hi) + 2.0 * L.log_magnitude);
}

/// Bosonic rare-event limit over m' = 0..m_prime_max. tail_bound records
/// the mass missing from the support (1 minus the computed total).
inline OccupancyDistribution bose_rare_limit(const RareEventSpec& spec, long m_prime_max)
{
    spec.validate();
    if (m_prime_max < 0)
        throw std::invalid_argument("m_prime_max must be nonnegative");
    OccupancyDistribution d;
    d.model = Model::BoseLimit;
    d.meta.m = spec.m;
    d.meta.w = spec.w;
    d.probs.resize(static_cast<std::size_t>(m_prime_max) + 1);
    for (long mp = 0; mp <= m_prime_max; ++mp)
        d.probs[static_cast<std::size_t>(mp)] = bose_rare_entry(spec, mp);
    d.meta.tail_bound = std::max(0.0, 1.0 - d.total());
    return d;
}

/// Bosonic rare-event limit with the support extended until three
/// consecutive entries beyond m fall below 1e-14 and the Poisson tail of
/// the w^q e^{-w} prefactor is below 1e-12.
inline OccupancyDistribution bose_rare_limit(const RareEventSpec& spec)
{
    spec.validate();
    constexpr double kSmall = 1e-14;
    constexpr double kPrefactorTail = 1e-12;
    long mp = 0;
    int small_run = 0;
    for (;; ++mp) {
        const double v = bose_rare_entry(spec, mp);
        if (mp > spec.m) {
            small_run = v < kSmall ? small_run + 1 : 0;
            if (small_run >= 3 && poisson_tail_bound(spec.w, mp - spec.m) < kPrefactorTail)
                break;
        }
    }
    return bose_rare_limit(spec, mp);
}

/// P_{0<-m} in the rare-event limit, w^m e^{-w} / m!. Shares the
/// evaluation path of bose_rare_entry so the two agree bit for bit.
inline double recapture_probability(const RareEventSpec& spec)
{
    return bose_rare_entry(spec, 0);
}

} // namespace bosecount::distributions
