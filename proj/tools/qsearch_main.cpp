#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qsearch/dynamics.hpp"
#include "qsearch/graph.hpp"
#include "qsearch/partition.hpp"
#include "qsearch/radau.hpp"
#include "qsearch/scenario.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    long seed = -1;
    long budget = -1;
    double tol = 0.0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool out_required) {
    cmd->add_option("--config", opts.config_path, "scenario config file")
        ->required();
    auto* out = cmd->add_option("--out", opts.out_path, "output file");
    if (out_required) out->required();
    cmd->add_option("--seed", opts.seed, "override config seed");
    cmd->add_option("--budget", opts.budget, "override config budget");
    cmd->add_option("--tol", opts.tol,
                    "override integrator tolerance (rel_tol; abs_tol = tol/100)");
}

qsearch::ScenarioConfig load_config(const CommonOpts& opts) {
    auto cfg = qsearch::ScenarioConfig::from_file(opts.config_path);
    if (opts.seed >= 0) cfg.set("seed", std::to_string(opts.seed));
    if (opts.budget >= 0) cfg.set("budget", std::to_string(opts.budget));
    if (opts.tol > 0.0) {
        cfg.set("rel_tol", qsearch::format_value(opts.tol));
        cfg.set("abs_tol", qsearch::format_value(opts.tol / 100.0));
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "qsearch: controlled quantum search on graphs "
        "(nonlinear Schrodinger dynamics, analytic protocols, control "
        "optimization)"};
    app.require_subcommand(1);

    CommonOpts analytic_opts, simulate_opts, scan_opts, optimize_opts,
        reduce_opts;
    auto* analytic = app.add_subcommand(
        "analytic", "closed-form complete-graph protocol curve");
    add_common(analytic, analytic_opts, true);
    auto* simulate =
        app.add_subcommand("simulate", "integrate the reduced dynamics");
    add_common(simulate, simulate_opts, true);
    auto* scan = app.add_subcommand(
        "error-scan", "terminal error under perturbed controls vs n");
    add_common(scan, scan_opts, true);
    auto* optimize = app.add_subcommand(
        "optimize", "direct control search on a shell-regular graph");
    add_common(optimize, optimize_opts, true);
    auto* reduce = app.add_subcommand(
        "reduce", "print equivalence classes and shell descriptor");
    add_common(reduce, reduce_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (analytic->parsed())
            return qsearch::cmd_analytic(load_config(analytic_opts),
                                         analytic_opts.out_path, std::cout);
        if (simulate->parsed())
            return qsearch::cmd_simulate(load_config(simulate_opts),
                                         simulate_opts.out_path, std::cout);
        if (scan->parsed())
            return qsearch::cmd_error_scan(load_config(scan_opts),
                                           scan_opts.out_path, std::cout);
        if (optimize->parsed())
            return qsearch::cmd_optimize(load_config(optimize_opts),
                                         optimize_opts.out_path, std::cout);
        if (reduce->parsed())
            return qsearch::cmd_reduce(load_config(reduce_opts),
                                       reduce_opts.out_path, std::cout);
    } catch (const qsearch::IntegrationError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const qsearch::PolarSingularity& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const qsearch::ShellError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
