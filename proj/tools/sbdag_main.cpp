#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include <sbdag/ci.hpp>
#include <sbdag/dag_search.hpp>
#include <sbdag/diagnostics.hpp>
#include <sbdag/equivalence.hpp>
#include <sbdag/io.hpp>
#include <sbdag/parallel.hpp>
#include <sbdag/sim.hpp>

using namespace sbdag;

namespace {

struct CommonArgs {
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& c) {
    cmd->add_option("--seed", c.seed, "random seed (all randomness flows through it)");
    cmd->add_option("--threads", c.threads, "worker thread cap");
    cmd->add_option("--out", c.out, "output path (stdout when omitted)");
}

void emit(const CommonArgs& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(c.out);
        if (!f) throw InvalidArgument("cannot write output file: " + c.out);
        f << text;
    }
}

struct PenaltyArgs {
    std::string family = "mcp";
    double lambda = -1.0;
    double gamma = 3.0;
};

void add_penalty(CLI::App* cmd, PenaltyArgs& p, bool required = true) {
    cmd->add_option("--penalty", p.family, "penalty family: mcp|scad|l1|l0|cappedl1");
    auto* lam = cmd->add_option("--lambda", p.lambda, "regularization strength");
    if (required) lam->required();
    cmd->add_option("--gamma", p.gamma, "concavity parameter (mcp/scad/cappedl1)");
}

PenaltySpec make_penalty(const PenaltyArgs& p) {
    return PenaltySpec(family_from_name(p.family), p.lambda, p.gamma);
}

std::vector<int> parse_order(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidArgument("cannot open file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run(int argc, char** argv) {
    CLI::App app{"score-based learning of gaussian dags via penalized least squares"};
    app.require_subcommand(1);

    // fit
    auto* fit = app.add_subcommand("fit", "fit a dag to data");
    CommonArgs fit_common;
    PenaltyArgs fit_pen;
    std::string fit_data, fit_mode = "dp", fit_solver = "exact", fit_perm;
    fit->add_option("--data", fit_data, "data csv, rows are observations")->required();
    add_penalty(fit, fit_pen);
    fit->add_option("--mode", fit_mode, "dp|exhaustive|restricted");
    fit->add_option("--solver", fit_solver, "exact|cd (column solver)");
    fit->add_option("--perm", fit_perm, "ordering for restricted mode, e.g. 3,2,0,1");
    add_common(fit, fit_common);

    // enumerate-class
    auto* enumc = app.add_subcommand("enumerate-class", "enumerate the equivalence class of sigma");
    CommonArgs enum_common;
    std::string enum_sigma;
    int enum_sample = 0;
    enumc->add_option("--sigma", enum_sigma, "covariance csv")->required();
    enumc->add_option("--sample", enum_sample, "sampled permutations when p is above the cap");
    add_common(enumc, enum_common);

    // mintrace
    auto* mint = app.add_subcommand("mintrace", "minimum-trace ordering and dag");
    CommonArgs mint_common;
    std::string mint_sigma;
    int mint_sample = 0;
    mint->add_option("--sigma", mint_sigma, "covariance csv")->required();
    mint->add_option("--sample", mint_sample, "sampled permutations when p is above the cap");
    add_common(mint, mint_common);

    // ci-scan
    auto* ci = app.add_subcommand("ci-scan", "conditional independence relations as json lines");
    CommonArgs ci_common;
    PenaltyArgs ci_pen;
    std::string ci_sigma, ci_data, ci_perms;
    bool ci_union = false;
    ci->add_option("--sigma", ci_sigma, "covariance csv (population mode)");
    ci->add_option("--data", ci_data, "data csv (sample mode, needs penalty flags)");
    ci->add_flag("--union", ci_union, "union of graph relations over orderings");
    ci->add_option("--perms", ci_perms, "orderings like 2,3,1,0;3,1,2,0 (default: all)");
    add_penalty(ci, ci_pen, /*required=*/false);
    add_common(ci, ci_common);

    // simulate
    auto* sim = app.add_subcommand("simulate", "monte carlo experiment from a config file");
    CommonArgs sim_common;
    std::string sim_config, sim_csv;
    sim->add_option("--config", sim_config, "config file, one 'key = value' per line")->required();
    sim->add_option("--csv", sim_csv, "also write per-replicate rows to this csv");
    add_common(sim, sim_common);

    // diagnose
    auto* diag = app.add_subcommand("diagnose", "condition report for a covariance");
    CommonArgs diag_common;
    PenaltyArgs diag_pen;
    std::string diag_sigma;
    int diag_n = 1000;
    diag->add_option("--sigma", diag_sigma, "covariance csv")->required();
    add_penalty(diag, diag_pen);
    diag->add_option("--n", diag_n, "sample size the ratios refer to");
    add_common(diag, diag_common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints a message naming the offending flag
        return 2;
    }

    if (fit->parsed()) {
        set_global_threads(fit_common.threads);
        const DataMatrix x(read_matrix_csv(fit_data));
        const PenaltySpec pen = make_penalty(fit_pen);
        SearchOptions opts;
        opts.threads = fit_common.threads;
        opts.pls.seed = fit_common.seed;
        if (fit_solver == "cd") {
            opts.pls.mode = SolverMode::CoordinateDescent;
        } else if (fit_solver != "exact") {
            throw InvalidArgument("--solver must be exact or cd");
        }
        FitResult res = [&] {
            if (fit_mode == "dp") return global_minimizer_dp(x, pen, opts);
            if (fit_mode == "exhaustive") return exhaustive_global(x, pen, opts);
            if (fit_mode == "restricted") {
                if (fit_perm.empty())
                    throw InvalidArgument("--perm is required with --mode restricted");
                return restricted_minimizer(x, Permutation(parse_order(fit_perm)), pen, opts);
            }
            throw InvalidArgument("--mode must be dp, exhaustive or restricted");
        }();
        emit(fit_common, dump_json(fit_result_to_json(res)));
    } else if (enumc->parsed()) {
        set_global_threads(enum_common.threads);
        const CovarianceMatrix sigma(read_matrix_csv(enum_sigma));
        ClassOptions opts;
        opts.sample_size = enum_sample;
        opts.seed = enum_common.seed;
        emit(enum_common, dump_json(class_summary_to_json(class_summary(sigma, opts))));
    } else if (mint->parsed()) {
        set_global_threads(mint_common.threads);
        const CovarianceMatrix sigma(read_matrix_csv(mint_sigma));
        ClassOptions opts;
        opts.sample_size = mint_sample;
        opts.seed = mint_common.seed;
        emit(mint_common, dump_json(min_trace_to_json(min_trace_permutation(sigma, opts))));
    } else if (ci->parsed()) {
        set_global_threads(ci_common.threads);
        CiSet rel;
        auto perms_for = [&](int p) {
            std::vector<Permutation> out;
            if (ci_perms.empty()) return all_permutations(p);
            std::stringstream ss(ci_perms);
            std::string tok;
            while (std::getline(ss, tok, ';')) out.emplace_back(parse_order(tok));
            return out;
        };
        if (!ci_data.empty()) {
            if (ci_pen.lambda < 0)
                throw InvalidArgument("--lambda is required for sample-mode ci-scan");
            const DataMatrix x(read_matrix_csv(ci_data));
            SearchOptions opts;
            opts.pls.seed = ci_common.seed;
            rel = union_ci_sample(x, perms_for(x.dim()), make_penalty(ci_pen), opts);
        } else if (!ci_sigma.empty()) {
            const CovarianceMatrix sigma(read_matrix_csv(ci_sigma));
            rel = ci_union ? union_ci_population(sigma, perms_for(sigma.dim()))
                           : true_ci_set(sigma);
        } else {
            throw InvalidArgument("ci-scan needs --sigma or --data");
        }
        emit(ci_common, ci_set_to_jsonl(rel));
    } else if (sim->parsed()) {
        set_global_threads(sim_common.threads);
        SimConfig cfg = parse_sim_config(read_file(sim_config));
        if (sim->count("--seed") > 0) cfg.seed = sim_common.seed;
        SearchOptions opts;
        opts.threads = sim_common.threads;
        const ExperimentReport report = run_experiment(cfg, opts);
        emit(sim_common, dump_json(experiment_report_to_json(report)));
        if (!sim_csv.empty()) {
            std::ofstream f(sim_csv);
            if (!f) throw InvalidArgument("cannot write csv file: " + sim_csv);
            f << experiment_report_to_csv(report);
        }
    } else if (diag->parsed()) {
        set_global_threads(diag_common.threads);
        const CovarianceMatrix sigma(read_matrix_csv(diag_sigma));
        const ConditionReport rep =
            condition_report(sigma, make_penalty(diag_pen), diag_n, diag_common.seed);
        emit(diag_common, dump_json(condition_report_to_json(rep)));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const InvalidArgument& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}
