#pragma once
#ifdef __FAST_MATH__
#error fast math enabled (-ffast-math), this would negate compensated summation.
#endif

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace bosecount::numerics {

/// Scalar stored as sign and natural log of the magnitude.
///
/// Lets products of factorials of 10^5 and powers of 10^-5 be formed
/// without overflow. sign == 0 is exact zero and log_magnitude is then
/// meaningless.
struct SignedLog {
    int sign = 0;
    double log_magnitude = 0.0;

    static constexpr SignedLog zero() noexcept { return {0, 0.0}; }
    static constexpr SignedLog one() noexcept { return {1, 0.0}; }

    /// Positive value exp(log_value).
    static constexpr SignedLog from_log(double log_value, int sign = 1) noexcept
    {
        return sign == 0 ? zero() : SignedLog{sign > 0 ? 1 : -1, log_value};
    }

    static SignedLog from_linear(double x) noexcept
    {
        if (x == 0.0)
            return zero();
        return {x > 0.0 ? 1 : -1, std::log(std::abs(x))};
    }

    double to_linear() const noexcept
    {
        return sign == 0 ? 0.0 : sign * std::exp(log_magnitude);
    }

    bool is_zero() const noexcept { return sign == 0; }

    SignedLog operator-() const noexcept { return {-sign, log_magnitude}; }

    friend SignedLog operator*(SignedLog a, SignedLog b) noexcept
    {
        if (a.sign == 0 || b.sign == 0)
            return zero();
        return {a.sign * b.sign, a.log_magnitude + b.log_magnitude};
    }

    /// Division by zero yields zero; callers never divide by zero elements.
    friend SignedLog operator/(SignedLog a, SignedLog b) noexcept
    {
        if (a.sign == 0 || b.sign == 0)
            return zero();
        return {a.sign * b.sign, a.log_magnitude - b.log_magnitude};
    }

    SignedLog& operator*=(SignedLog b) noexcept { return *this = *this * b; }

    /// Integer power; 0^0 is one.
    SignedLog pow(long exponent) const noexcept
    {
        if (exponent == 0)
            return one();
        if (sign == 0)
            return zero();
        const int s = (sign < 0 && (exponent % 2 != 0)) ? -1 : 1;
        return {s, log_magnitude * static_cast<double>(exponent)};
    }

    SignedLog squared() const noexcept
    {
        return sign == 0 ? zero() : SignedLog{1, 2.0 * log_magnitude};
    }
};

/// Neumaier's variant of Kahan summation.
template <typename T = double>
class CompensatedSum {
public:
    void add(T x) noexcept
    {
        const T t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(T x) noexcept
    {
        add(x);
        return *this;
    }

    T value() const noexcept { return sum_ + carry_; }

private:
    T sum_{};
    T carry_{};
};

namespace detail {

inline constexpr std::array<std::uint64_t, 21> kFactorials = [] {
    std::array<std::uint64_t, 21> f{};
    f[0] = 1;
    for (std::size_t i = 1; i < f.size(); ++i)
        f[i] = f[i - 1] * i;
    return f;
}();

// ln Gamma(x) for x >= 22 by the asymptotic series; truncation error of
// the dropped B_12 term is below 1e-17 absolute at x = 22.
inline double log_gamma_asymptotic(double x) noexcept
{
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double series =
        inv * (1.0 / 12.0 +
               inv2 * (-1.0 / 360.0 +
                       inv2 * (1.0 / 1260.0 + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0)))));
    constexpr double half_log_two_pi = 0.91893853320467274178032973640562;
    return (x - 0.5) * std::log(x) - x + half_log_two_pi + series;
}

// Terms smaller than exp(kNegligibleLog) times the largest term cannot
// move a sum by more than the exact-zero threshold.
inline constexpr double kNegligibleLog = -60.0;

} // namespace detail

/// Relative magnitude below which a signed sum is reported as exact zero.
inline constexpr double kCancellationThreshold = 1e-15;

/// ln(n!). Exact table through 20, asymptotic log-gamma above.
inline double log_factorial(long n) noexcept
{
    if (n <= 1)
        return 0.0;
    if (n < static_cast<long>(detail::kFactorials.size()))
        return std::log(static_cast<double>(detail::kFactorials[static_cast<std::size_t>(n)]));
    return detail::log_gamma_asymptotic(static_cast<double>(n) + 1.0);
}

/// ln C(n, k) as a SignedLog; zero element when k is outside [0, n].
inline SignedLog log_binomial(long n, long k) noexcept
{
    if (n < 0 || k < 0 || k > n)
        return SignedLog::zero();
    const long small = std::min(k, n - k);
    if (small <= 64) {
        // product of (n - j) / (j + 1) keeps full accuracy for huge n, small k
        CompensatedSum<double> acc;
        for (long j = 0; j < small; ++j)
            acc += std::log(static_cast<double>(n - j) / static_cast<double>(j + 1));
        return SignedLog::from_log(acc.value());
    }
    return SignedLog::from_log(log_factorial(n) - log_factorial(small) - log_factorial(n - small));
}

/// Generalised binomial C(r, k) for any integer r and k >= 0, where
/// C(r, k) = r (r-1) ... (r-k+1) / k!. For r < 0 this is
/// (-1)^k C(k - r - 1, k).
inline SignedLog log_binomial_general(long r, long k) noexcept
{
    if (k < 0)
        return SignedLog::zero();
    if (r >= 0)
        return log_binomial(r, k);
    SignedLog v = log_binomial(k - r - 1, k);
    if (k % 2 != 0)
        v.sign = -v.sign;
    return v;
}

/// Sum of signed-log terms.
///
/// The largest magnitude is factored out, positive and negative parts are
/// accumulated separately in ascending magnitude with compensated
/// summation, and the difference is formed last. If the result is below
/// kCancellationThreshold relative to the largest term it is exact zero.
inline SignedLog signed_log_sum(std::span<const SignedLog> terms)
{
    double max_log = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms)
        if (t.sign != 0)
            max_log = std::max(max_log, t.log_magnitude);
    if (max_log == -std::numeric_limits<double>::infinity())
        return SignedLog::zero();

    std::vector<double> pos;
    std::vector<double> neg;
    for (const auto& t : terms) {
        if (t.sign == 0)
            continue;
        const double rel = t.log_magnitude - max_log;
        if (rel < detail::kNegligibleLog)
            continue;
        (t.sign > 0 ? pos : neg).push_back(std::exp(rel));
    }
    auto ascending_sum = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        CompensatedSum<double> acc;
        for (double x : v)
            acc += x;
        return acc.value();
    };
    const double total = ascending_sum(pos) - ascending_sum(neg);
    if (std::abs(total) < kCancellationThreshold)
        return SignedLog::zero();
    return {total > 0.0 ? 1 : -1, max_log + std::log(std::abs(total))};
}

inline SignedLog signed_log_sum(std::initializer_list<SignedLog> terms)
{
    return signed_log_sum(std::span<const SignedLog>(terms.begin(), terms.size()));
}

/// ln(1 - p) accurate for tiny p.
inline double log_complement(double p) noexcept { return std::log1p(-p); }

} // namespace bosecount::numerics
