// bosecount: transfer statistics of N two-level particles from the command line.
//
//   bosecount dist --model bose --N 100000 --m 3 --w 3
//   bosecount dist --model bose --limit --m 3 --w 3 --format json
//   bosecount figure --id 4 --out fig4.csv
//   bosecount plan --xi 1 --N 100000 --m 3 --w 3
//   bosecount verify --max-N 8
//
// Exit codes: 0 success, 1 verification failure, 2 usage error.

#include <bosecount/commands.hpp>

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

namespace cli = bosecount::cli;

constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

int emit(const std::string& text, const std::string& out_path)
{
    if (out_path.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream os(out_path, std::ios::binary);
    if (!os) {
        std::cerr << "error: cannot open " << out_path << " for writing\n";
        return kExitUsage;
    }
    os << text;
    return 0;
}

std::string render(const cli::Table& table, const std::string& format)
{
    if (format == "json")
        return cli::to_json(table).dump(2) + "\n";
    return cli::to_csv(table);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Occupation-transfer statistics for distinguishable particles and bosons"};
    app.require_subcommand(1);
    std::string out_path;
    std::string format = "csv";

    auto* dist_cmd = app.add_subcommand("dist", "distribution over the final marked-mode count");
    std::string model = "bose";
    std::optional<long> n_opt;
    long m = 0;
    std::optional<double> p_opt;
    std::optional<double> w_opt;
    bool limit = false;
    std::optional<long> m_prime_max;
    dist_cmd->add_option("--model", model, "classical or bose")
        ->check(CLI::IsMember({"classical", "bose"}));
    dist_cmd->add_option("--N", n_opt, "total particle number");
    dist_cmd->add_option("--m", m, "initial marked-mode count");
    auto* p_flag = dist_cmd->add_option("--p", p_opt, "single-particle transition probability");
    auto* w_flag = dist_cmd->add_option("--w", w_opt, "mean event number, p = w / N");
    p_flag->excludes(w_flag);
    dist_cmd->add_flag("--limit", limit, "rare-event limit N -> infinity");
    dist_cmd->add_option("--m-prime-max", m_prime_max, "support cut for the bosonic limit");
    dist_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
    dist_cmd->add_option("--out", out_path, "output file (default stdout)");

    auto* fig_cmd = app.add_subcommand("figure", "figure reproduction tables");
    int fig_id = 0;
    long fig_n = 100000;
    double fig_w = 3.0;
    fig_cmd->add_option("--id", fig_id, "3, 4, 5 or 6")->required();
    fig_cmd->add_option("--N", fig_n, "total particle number");
    fig_cmd->add_option("--w", fig_w, "mean event number");
    fig_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
    fig_cmd->add_option("--out", out_path, "output file (default stdout)");

    auto* plan_cmd = app.add_subcommand("plan", "pulse duration and outcome prediction");
    bosecount::dynamics::TwoLevelParams params;
    long plan_n = 100000;
    long plan_m = 3;
    double plan_w = 3.0;
    std::string plan_format = "text";
    plan_cmd->add_option("--epsilon", params.epsilon, "energy half-splitting");
    plan_cmd->add_option("--xi", params.xi, "real part of the tunnelling element");
    plan_cmd->add_option("--eta", params.eta, "imaginary part of the tunnelling element");
    plan_cmd->add_option("--N", plan_n, "total particle number");
    plan_cmd->add_option("--m", plan_m, "initial marked-mode count");
    plan_cmd->add_option("--w", plan_w, "target mean event number");
    plan_cmd->add_option("--format", plan_format)->check(CLI::IsMember({"text", "json"}));
    plan_cmd->add_option("--out", out_path, "output file (default stdout)");

    auto* verify_cmd = app.add_subcommand("verify", "oracle-equivalence and invariant checks");
    long max_n = 8;
    std::string exponent = "corrected";
    verify_cmd->add_option("--max-N", max_n, "largest N checked")->check(CLI::NonNegativeNumber);
    verify_cmd
        ->add_option("--closed-form-exponent", exponent,
                     "(1-p) exponent of the Jacobi form; 'printed' reproduces the known defect")
        ->check(CLI::IsMember({"corrected", "printed"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (dist_cmd->parsed()) {
            cli::DistRequest req;
            req.model = model == "classical" ? cli::DistModel::Classical : cli::DistModel::Bose;
            req.N = n_opt;
            req.m = m;
            req.p = p_opt;
            req.w = w_opt;
            req.limit = limit;
            req.m_prime_max = m_prime_max;
            const auto table = cli::distribution_table(cli::compute_distribution(req));
            return emit(render(table, format), out_path);
        }
        if (fig_cmd->parsed())
            return emit(render(cli::figure_table(fig_id, fig_n, fig_w), format), out_path);
        if (plan_cmd->parsed()) {
            const auto report = cli::plan_experiment(params, plan_n, plan_m, plan_w);
            return emit(plan_format == "json" ? cli::to_json(report).dump(2) + "\n"
                                              : cli::to_text(report),
                        out_path);
        }
        if (verify_cmd->parsed()) {
            cli::VerifyOptions opts;
            opts.max_N = max_n;
            opts.exponent = exponent == "printed"
                                ? bosecount::distributions::ClosedFormExponent::Printed
                                : bosecount::distributions::ClosedFormExponent::Corrected;
            const auto report = cli::run_verify(opts);
            std::cout << cli::to_text(report);
            return report.passed() ? 0 : kExitVerifyFailed;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
