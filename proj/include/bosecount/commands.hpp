#pragma once

// Backing implementation of the `bosecount` subcommands. Each command
// builds a Table (or report) that the executable serializes; keeping them
// here lets the tests drive the exact code the CLI runs.

#include <bosecount/distributions.hpp>
#include <bosecount/dynamics.hpp>
#include <bosecount/oracles.hpp>

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace bosecount::cli {

namespace dist = bosecount::distributions;
using nlohmann::json;

/// Shortest round-trip decimal in scientific form with a compact exponent
/// (2.2404180765538775e-1, 1e0). Exact zero prints as 0.
inline std::string format_probability(double v)
{
    if (v == 0.0)
        return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
    if (res.ec != std::errc{})
        throw std::runtime_error("number formatting failed");
    std::string s(buf, res.ptr);
    const auto e = s.find('e');
    std::string mantissa = s.substr(0, e);
    std::string exponent = s.substr(e + 1);
    bool negative = false;
    if (!exponent.empty() && (exponent[0] == '+' || exponent[0] == '-')) {
        negative = exponent[0] == '-';
        exponent.erase(0, 1);
    }
    const auto nz = exponent.find_first_not_of('0');
    exponent = nz == std::string::npos ? "0" : exponent.substr(nz);
    return mantissa + "e" + (negative ? "-" : "") + exponent;
}

struct Column {
    std::string name;
    bool integer = false;
};

/// Header row plus numeric rows; integer columns print without exponent.
struct Table {
    std::vector<Column> columns;
    std::vector<std::vector<double>> rows;
    json meta = json::object();
};

inline std::string to_csv(const Table& table)
{
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c)
            out += ',';
        out += table.columns[c].name;
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c)
                out += ',';
            if (table.columns[c].integer)
                out += std::to_string(static_cast<long long>(std::llround(row[c])));
            else
                out += format_probability(row[c]);
        }
        out += '\n';
    }
    return out;
}

inline json to_json(const Table& table)
{
    json rows = json::array();
    for (const auto& row : table.rows) {
        json r = json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (table.columns[c].integer)
                r[table.columns[c].name] = static_cast<long long>(std::llround(row[c]));
            else
                r[table.columns[c].name] = row[c];
        }
        rows.push_back(std::move(r));
    }
    return json{{"meta", table.meta}, {"rows", std::move(rows)}};
}

// ---------------------------------------------------------------------------
// dist

enum class DistModel { Classical, Bose };

struct DistRequest {
    DistModel model = DistModel::Bose;
    std::optional<long> N;
    long m = 0;
    std::optional<double> p;
    std::optional<double> w;
    bool limit = false;
    std::optional<long> m_prime_max;
};

inline json meta_json(const dist::OccupancyDistribution& d)
{
    json meta{{"model", std::string(dist::to_string(d.model))}, {"m", d.meta.m}};
    if (d.meta.N)
        meta["N"] = *d.meta.N;
    if (d.meta.p)
        meta["p"] = *d.meta.p;
    if (d.meta.w)
        meta["w"] = *d.meta.w;
    meta["tail_bound"] = d.meta.tail_bound;
    if (!d.meta.note.empty())
        meta["note"] = d.meta.note;
    return meta;
}

inline Table distribution_table(const dist::OccupancyDistribution& d)
{
    Table t;
    t.columns = {{"m_prime", true}, {"probability", false}};
    for (long mp = d.first; mp <= d.last(); ++mp)
        t.rows.push_back({static_cast<double>(mp), d.at(mp)});
    t.meta = meta_json(d);
    return t;
}

/// Throws std::invalid_argument on inconsistent flags.
inline dist::OccupancyDistribution compute_distribution(const DistRequest& req)
{
    if (req.p && req.w)
        throw std::invalid_argument("--p and --w are mutually exclusive");
    if (req.limit) {
        if (!req.w)
            throw std::invalid_argument("limit models take --w");
        const dist::RareEventSpec spec{*req.w, req.m};
        spec.validate();
        if (req.model == DistModel::Classical)
            return dist::classical_rare_limit(spec);
        return req.m_prime_max ? dist::bose_rare_limit(spec, *req.m_prime_max)
                               : dist::bose_rare_limit(spec);
    }
    if (!req.N)
        throw std::invalid_argument("exact models need --N");
    if (!req.p && !req.w)
        throw std::invalid_argument("exact models need --p or --w");
    const double p = req.p ? *req.p : *req.w / static_cast<double>(*req.N);
    const dist::TransferSpec spec{*req.N, req.m, p};
    spec.validate();
    auto d = req.model == DistModel::Classical ? dist::classical_exact(spec) : dist::bose_exact(spec);
    if (req.w)
        d.meta.w = *req.w;
    return d;
}

// ---------------------------------------------------------------------------
// figure

inline constexpr long kSurfaceMax = 12;
inline constexpr long kSectionMax = 15;
inline constexpr double kFigure5Rates[] = {1.0, 3.0, 5.0};

inline std::string rate_suffix(double w)
{
    std::ostringstream os;
    os << w;
    return os.str();
}

/// Figure tables at N particles and p = w / N.
///   3: m, m_prime, probability    (distinguishable, m, m' <= 12)
///   4: m, m_prime, probability    (bosons, m, m' <= 12)
///   5: m, P0m_exact_w*, P0m_poisson_w*   for w in {1, 3, 5}, m <= 15
///   6: m, P_1_from_m, P_m_from_m  (bosons, m <= 15)
inline Table figure_table(int id, long N, double w)
{
    if (N < 1)
        throw std::invalid_argument("N must be positive");
    if (!(w >= 0.0) || w > static_cast<double>(N))
        throw std::invalid_argument("w must lie in [0, N]");
    Table t;
    t.meta = json{{"figure", id}, {"N", N}, {"w", w}};
    const double p = w / static_cast<double>(N);
    switch (id) {
    case 3:
    case 4: {
        t.columns = {{"m", true}, {"m_prime", true}, {"probability", false}};
        t.meta["model"] = id == 3 ? "classical-exact" : "bose-exact";
        const long top = std::min(kSurfaceMax, N);
        for (long m = 0; m <= top; ++m)
            for (long mp = 0; mp <= top; ++mp) {
                const dist::TransferSpec spec{N, m, p};
                const double v = id == 3 ? dist::classical_exact_entry(spec, mp)
                                         : dist::bose_exact_entry(spec, mp);
                t.rows.push_back({static_cast<double>(m), static_cast<double>(mp), v});
            }
        break;
    }
    case 5: {
        t.columns = {{"m", true}};
        json rates = json::array();
        for (double rate : kFigure5Rates) {
            t.columns.push_back({"P0m_exact_w" + rate_suffix(rate), false});
            t.columns.push_back({"P0m_poisson_w" + rate_suffix(rate), false});
            rates.push_back(rate);
        }
        t.meta["model"] = "bose-exact";
        t.meta["rates"] = rates;
        t.meta["note"] = "rates {1,3,5} are a presentation choice; the --w value is not used";
        const long top = std::min(kSectionMax, N);
        for (long m = 0; m <= top; ++m) {
            std::vector<double> row{static_cast<double>(m)};
            for (double rate : kFigure5Rates) {
                const double pr = std::min(1.0, rate / static_cast<double>(N));
                row.push_back(dist::bose_exact_entry({N, m, pr}, 0));
                row.push_back(dist::recapture_probability({rate, m}));
            }
            t.rows.push_back(std::move(row));
        }
        break;
    }
    case 6: {
        t.columns = {{"m", true}, {"P_1_from_m", false}, {"P_m_from_m", false}};
        t.meta["model"] = "bose-exact";
        const long top = std::min(kSectionMax, N);
        for (long m = 0; m <= top; ++m) {
            const dist::TransferSpec spec{N, m, p};
            t.rows.push_back({static_cast<double>(m), dist::bose_exact_entry(spec, 1),
                              dist::bose_exact_entry(spec, m)});
        }
        break;
    }
    default:
        throw std::invalid_argument("unknown figure id " + std::to_string(id) +
                                    " (expected 3, 4, 5 or 6)");
    }
    return t;
}

// ---------------------------------------------------------------------------
// plan

struct PlanReport {
    double tau = 0.0;
    double achieved_p = 0.0;
    double w = 0.0;
    long N = 0;
    long m = 0;
    /// (m', probability) for m' = 0.. until the remaining mass is below 1e-12.
    std::vector<std::pair<long, double>> predicted;
    double headline = 0.0;
};

/// Pulse that makes p(tau) = w / N, and the bosonic outcome distribution
/// it produces. Propagates dynamics::TargetUnreachable / NoCoupling.
inline PlanReport plan_experiment(const dynamics::TwoLevelParams& params, long N, long m, double w)
{
    if (N < 1 || m < 0 || m > N)
        throw std::invalid_argument("require N >= 1 and 0 <= m <= N");
    if (!(w >= 0.0) || w > static_cast<double>(N))
        throw std::invalid_argument("w must lie in [0, N]");
    PlanReport r;
    r.N = N;
    r.m = m;
    r.tau = dynamics::solve_pulse_duration(params, w / static_cast<double>(N));
    r.achieved_p = dynamics::evolve(params, r.tau).p;
    r.w = r.achieved_p * static_cast<double>(N);
    const auto d = dist::bose_exact({N, m, r.achieved_p});
    r.headline = d.at(0);

    std::vector<double> suffix(d.probs.size() + 1, 0.0);
    for (std::size_t i = d.probs.size(); i-- > 0;)
        suffix[i] = suffix[i + 1] + d.probs[i];
    std::size_t cut = static_cast<std::size_t>(m);
    while (cut + 1 < d.probs.size() && suffix[cut + 1] >= 1e-12)
        ++cut;
    for (std::size_t k = 0; k <= cut; ++k)
        r.predicted.emplace_back(static_cast<long>(k), d.probs[k]);
    return r;
}

inline json to_json(const PlanReport& r)
{
    json predicted = json::array();
    for (const auto& [mp, prob] : r.predicted)
        predicted.push_back({{"m_prime", mp}, {"probability", prob}});
    return json{{"meta", {{"N", r.N}, {"m", r.m}, {"model", "bose-exact"}}},
                {"tau", r.tau},
                {"achieved_p", r.achieved_p},
                {"w", r.w},
                {"headline", r.headline},
                {"rows", predicted}};
}

inline std::string to_text(const PlanReport& r)
{
    std::ostringstream os;
    os << "tau," << format_probability(r.tau) << '\n'
       << "achieved_p," << format_probability(r.achieved_p) << '\n'
       << "w," << format_probability(r.w) << '\n'
       << "headline," << format_probability(r.headline) << '\n'
       << "m_prime,probability\n";
    for (const auto& [mp, prob] : r.predicted)
        os << mp << ',' << format_probability(prob) << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOptions {
    long max_N = 8;
    dist::ClosedFormExponent exponent = dist::ClosedFormExponent::Corrected;
    std::size_t max_failures_listed = 20;
};

struct CheckResult {
    std::string name;
    double tolerance = 0.0;
    std::size_t count = 0;
    double max_deviation = 0.0;
    std::vector<std::string> failures;
    std::size_t failure_count = 0;

    bool passed() const noexcept { return failure_count == 0; }
};

struct VerifyReport {
    std::vector<CheckResult> checks;

    std::size_t total_checks() const noexcept
    {
        std::size_t n = 0;
        for (const auto& c : checks)
            n += c.count;
        return n;
    }

    bool passed() const noexcept
    {
        for (const auto& c : checks)
            if (!c.passed())
                return false;
        return true;
    }
};

namespace detail {

struct Checker {
    CheckResult& result;
    std::size_t max_listed;

    // Relative tolerance with an absolute floor of 1e-14 near zeros when
    // relative is set; plain absolute otherwise.
    void compare(double a, double b, const std::string& where, bool relative = false)
    {
        const double dev = std::abs(a - b);
        ++result.count;
        result.max_deviation = std::max(result.max_deviation, dev);
        const bool ok = relative ? (dev <= result.tolerance * std::max(std::abs(a), std::abs(b)) ||
                                    dev <= 1e-14)
                                 : dev <= result.tolerance;
        if (ok)
            return;
        ++result.failure_count;
        if (result.failures.size() < max_listed) {
            std::ostringstream os;
            os << where << " got " << format_probability(a) << " expected "
               << format_probability(b);
            result.failures.push_back(os.str());
        }
    }
};

inline std::string tuple(long N, long m, long mp, double p)
{
    std::ostringstream os;
    os << "N=" << N << " m=" << m << " m'=" << mp << " p=" << p;
    return os.str();
}

} // namespace detail

inline constexpr double kVerifyGrid[] = {0.1, 0.3, 0.5, 0.7, 0.9};

/// Oracle-equivalence and invariant checks for all N <= max_N, all m, m'
/// and p on kVerifyGrid.
inline VerifyReport run_verify(const VerifyOptions& opts)
{
    VerifyReport report;
    auto add = [&](std::string name, double tol) -> CheckResult& {
        CheckResult c;
        c.name = std::move(name);
        c.tolerance = tol;
        report.checks.push_back(std::move(c));
        return report.checks.back();
    };
    report.checks.reserve(10);
    auto& jac = add("jacobi_form_vs_amplitude_sum", 1e-10);
    auto& reduced = add("bose_exact_vs_amplitude_sum", 1e-10);
    auto& first_q = add("first_quantized_vs_bose_exact", 1e-10);
    auto& fock = add("fock_vs_bose_exact", 1e-10);
    auto& classical = add("enumeration_vs_classical_exact", 1e-12);
    auto& norm = add("normalization", 1e-10);
    auto& swap = add("bose_swap_symmetry", 1e-12);
    auto& relabel = add("mode_relabel_symmetry", 1e-12);
    auto& balance = add("classical_detailed_balance", 1e-12);
    const std::size_t L = opts.max_failures_listed;

    for (long N = 1; N <= opts.max_N; ++N) {
        for (double p : kVerifyGrid) {
            const double tau = std::asin(std::sqrt(p));
            const dynamics::TwoLevelParams resonant{0.0, 1.0, 0.0};
            const auto u = dynamics::evolve(resonant, tau);
            for (long m = 0; m <= N; ++m) {
                const dist::TransferSpec spec{N, m, p};
                const auto bose = dist::bose_exact(spec);
                const auto cls = dist::classical_exact(spec);
                std::optional<dist::OccupancyDistribution> fq;
                if (N <= 10)
                    fq = oracles::enumerate_bose_first_quantized(N, m, u);
                const auto fk = oracles::fock_evolve(N, resonant, tau, m);
                std::optional<dist::OccupancyDistribution> en;
                if (N <= 20)
                    en = oracles::enumerate_distinguishable(spec);

                detail::Checker{norm, L}.compare(bose.total(), 1.0,
                                                 detail::tuple(N, m, -1, p) + " bose");
                detail::Checker{norm, L}.compare(cls.total(), 1.0,
                                                 detail::tuple(N, m, -1, p) + " classical");
                for (long mp = 0; mp <= N; ++mp) {
                    const auto where = detail::tuple(N, m, mp, p);
                    const double direct = dist::bose_amplitude_probability(spec, mp);
                    detail::Checker{jac, L}.compare(
                        dist::jacobi_closed_form_probability(spec, mp, opts.exponent), direct,
                        where, true);
                    detail::Checker{reduced, L}.compare(bose.at(mp), direct, where, true);
                    if (fq)
                        detail::Checker{first_q, L}.compare(fq->at(mp), bose.at(mp), where);
                    detail::Checker{fock, L}.compare(fk.at(mp), bose.at(mp), where);
                    if (en)
                        detail::Checker{classical, L}.compare(en->at(mp), cls.at(mp), where);
                    detail::Checker{swap, L}.compare(
                        direct, dist::bose_amplitude_probability({N, mp, p}, m), where);
                    detail::Checker{relabel, L}.compare(
                        direct, dist::bose_amplitude_probability({N, N - m, p}, N - mp),
                        where + " bose");
                    detail::Checker{relabel, L}.compare(
                        cls.at(mp), dist::classical_exact_entry({N, N - m, p}, N - mp),
                        where + " classical");
                    const double lhs = std::exp(numerics::log_binomial(N, m).log_magnitude) *
                                       cls.at(mp);
                    const double rhs = std::exp(numerics::log_binomial(N, mp).log_magnitude) *
                                       dist::classical_exact_entry({N, mp, p}, m);
                    detail::Checker{balance, L}.compare(lhs, rhs, where, true);
                }
            }
        }
    }
    return report;
}

inline std::string to_text(const VerifyReport& report)
{
    std::ostringstream os;
    if (report.total_checks() == 0) {
        os << "0 checks: nothing to verify\n";
        return os.str();
    }
    for (const auto& c : report.checks) {
        os << (c.passed() ? "PASS " : "FAIL ") << c.name << " checks=" << c.count
           << " max_deviation=" << format_probability(c.max_deviation)
           << " tolerance=" << format_probability(c.tolerance) << '\n';
        for (const auto& f : c.failures)
            os << "  failed at " << f << '\n';
        if (c.failure_count > c.failures.size())
            os << "  ... " << (c.failure_count - c.failures.size()) << " more\n";
    }
    os << report.total_checks() << " checks, " << (report.passed() ? "all passed" : "FAILURES")
       << '\n';
    return os.str();
}

} // namespace bosecount::cli
