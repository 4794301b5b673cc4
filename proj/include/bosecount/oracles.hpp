#pragma once

// Independent ground-truth generators: first-quantized enumeration,
// second-quantized Fock evolution and seeded Monte Carlo.

#include <bosecount/distributions.hpp>
#include <bosecount/dynamics.hpp>

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bosecount::oracles {

using distributions::Model;
using distributions::OccupancyDistribution;
using distributions::TransferSpec;
using Complex = std::complex<double>;

class SizeLimit : public std::length_error {
public:
    using std::length_error::length_error;
};

class AccuracyFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two-mode Fock state; amplitudes[k] belongs to k particles in the marked mode.
struct FockStateVector {
    long N = 0;
    std::vector<Complex> amplitudes;

    double norm_squared() const noexcept
    {
        double s = 0.0;
        for (const auto& a : amplitudes)
            s += std::norm(a);
        return s;
    }
};

struct EmpiricalDistribution {
    std::vector<std::uint64_t> counts;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::string generator;
};

namespace detail {

inline OccupancyDistribution make_oracle(const TransferSpec& spec)
{
    OccupancyDistribution d;
    d.model = Model::Oracle;
    d.meta.N = spec.N;
    d.meta.m = spec.m;
    d.meta.p = spec.p;
    d.probs.assign(static_cast<std::size_t>(spec.N) + 1, 0.0);
    return d;
}

} // namespace detail

/// All 2^N flip/stay assignments of N coins; the first m start marked.
inline OccupancyDistribution enumerate_distinguishable(const TransferSpec& spec)
{
    spec.validate();
    if (spec.N > 20)
        throw SizeLimit("enumerate_distinguishable supports N <= 20");
    auto d = detail::make_oracle(spec);
    const auto N = static_cast<unsigned>(spec.N);
    const auto m = static_cast<unsigned>(spec.m);
    const std::uint32_t marked = (m == 32 ? ~0u : ((1u << m) - 1u));
    for (std::uint32_t flips = 0; flips < (1u << N); ++flips) {
        const int k = std::popcount(flips);
        const double prob = std::pow(spec.p, k) * std::pow(1.0 - spec.p, static_cast<int>(N) - k);
        const int final_marked = std::popcount(marked ^ flips);
        d.probs[static_cast<std::size_t>(final_marked)] += prob;
    }
    return d;
}

/// Builds the symmetrized |m, N> in the 2^N product space (bit set = particle
/// in the marked state), applies u to every particle and projects onto each
/// symmetrized |m', N>.
inline OccupancyDistribution
enumerate_bose_first_quantized(long N, long m, const dynamics::SingleParticleUnitary& u)
{
    if (N < 1 || m < 0 || m > N)
        throw std::invalid_argument("require 0 <= m <= N, N >= 1");
    if (N > 10)
        throw SizeLimit("enumerate_bose_first_quantized supports N <= 10");
    auto d = detail::make_oracle({N, m, std::clamp(u.p, 0.0, 1.0)});
    const std::size_t dim = std::size_t{1} << N;
    std::vector<Complex> psi(dim, 0.0);

    std::vector<double> binom(static_cast<std::size_t>(N) + 1);
    for (long k = 0; k <= N; ++k)
        binom[static_cast<std::size_t>(k)] =
            std::exp(numerics::log_binomial(N, k).log_magnitude);

    const double init_norm = 1.0 / std::sqrt(binom[static_cast<std::size_t>(m)]);
    for (std::size_t s = 0; s < dim; ++s)
        if (std::popcount(s) == m)
            psi[s] = init_norm;

    for (long j = 0; j < N; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        for (std::size_t s = 0; s < dim; ++s) {
            if (s & bit)
                continue;
            const Complex a_other = psi[s];      // particle j in the unmarked state
            const Complex a_marked = psi[s | bit];
            psi[s | bit] = u.u11 * a_marked + u.u12 * a_other;
            psi[s] = u.u21 * a_marked + u.u22 * a_other;
        }
    }

    std::vector<Complex> overlap(static_cast<std::size_t>(N) + 1, 0.0);
    for (std::size_t s = 0; s < dim; ++s)
        overlap[static_cast<std::size_t>(std::popcount(s))] += psi[s];
    for (long k = 0; k <= N; ++k)
        d.probs[static_cast<std::size_t>(k)] =
            std::norm(overlap[static_cast<std::size_t>(k)]) / binom[static_cast<std::size_t>(k)];
    return d;
}

/// Evolves the Fock state |m> under the second-quantized Hamiltonian:
/// diagonal eps (2k - N), <k+1|H|k> = (xi - i eta) sqrt((k+1)(N-k)).
inline FockStateVector fock_evolve_state(long N, const dynamics::TwoLevelParams& params, double t,
                                         long m)
{
    if (N < 1 || m < 0 || m > N)
        throw std::invalid_argument("require 0 <= m <= N, N >= 1");
    if (N > 500)
        throw SizeLimit("fock_evolve supports N <= 500");
    const Eigen::Index dim = N + 1;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    const Complex hop{params.xi, -params.eta};
    for (Eigen::Index k = 0; k <= N; ++k) {
        h(k, k) = params.epsilon * static_cast<double>(2 * k - N);
        if (k < N) {
            const double c = std::sqrt(static_cast<double>((k + 1) * (N - k)));
            h(k + 1, k) = hop * c;
            h(k, k + 1) = std::conj(hop) * c;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success)
        throw AccuracyFailure("Hermitian eigensolver did not converge");
    const auto& vecs = solver.eigenvectors();
    const auto& vals = solver.eigenvalues();
    Eigen::VectorXcd coeffs = vecs.row(m).adjoint();
    for (Eigen::Index j = 0; j < dim; ++j)
        coeffs(j) *= std::exp(Complex{0.0, -vals(j) * t});
    const Eigen::VectorXcd psi = vecs * coeffs;

    FockStateVector out;
    out.N = N;
    out.amplitudes.assign(psi.data(), psi.data() + dim);
    if (std::abs(out.norm_squared() - 1.0) > 1e-9)
        throw AccuracyFailure("evolved Fock vector lost normalization");
    return out;
}

inline OccupancyDistribution fock_evolve(long N, const dynamics::TwoLevelParams& params, double t,
                                         long m)
{
    const auto state = fock_evolve_state(N, params, t, m);
    auto d = detail::make_oracle({N, m, dynamics::evolve(params, t).p});
    for (long k = 0; k <= N; ++k)
        d.probs[static_cast<std::size_t>(k)] = std::norm(state.amplitudes[static_cast<std::size_t>(k)]);
    return d;
}

inline constexpr const char* kGeneratorName =
    "std::mt19937_64 (ISO C++ [rand.predef]); uniform = (x >> 11) * 2^-53";

/// Independent per-particle Bernoulli(p) flips, reproducible from the seed.
inline EmpiricalDistribution mc_sample_classical(const TransferSpec& spec, std::uint64_t trials,
                                                 std::uint64_t seed)
{
    spec.validate();
    if (trials < 1)
        throw std::invalid_argument("trials must be at least 1");
    EmpiricalDistribution e;
    e.counts.assign(static_cast<std::size_t>(spec.N) + 1, 0);
    e.trials = trials;
    e.seed = seed;
    e.generator = kGeneratorName;
    std::mt19937_64 gen(seed);
    constexpr double kScale = 0x1.0p-53;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        long marked = 0;
        for (long j = 0; j < spec.N; ++j) {
            const bool starts_marked = j < spec.m;
            const bool flips = static_cast<double>(gen() >> 11) * kScale < spec.p;
            marked += (starts_marked != flips) ? 1 : 0;
        }
        ++e.counts[static_cast<std::size_t>(marked)];
    }
    return e;
}

} // namespace bosecount::oracles
