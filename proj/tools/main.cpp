// blocksolve command line: instance generation, solving with the
// randomized primal-dual block update engines and the deterministic
// reference methods, parameter validation, and benchmark orchestration.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "blocksolve/blocksolve.hpp"

namespace {

using namespace blocksolve;

int resolve_workers(int flag_value) {
    // BLOCKSOLVE_WORKERS overrides --workers, which overrides the core count.
    if (const char* env = std::getenv("BLOCKSOLVE_WORKERS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 1) return v;
        } catch (...) {
        }
        std::cerr << "warning: ignoring malformed BLOCKSOLVE_WORKERS='" << env << "'\n";
    }
    if (flag_value >= 1) return flag_value;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

struct SolveArgs {
    std::string problem_path;
    std::string algo = "rpdbu";
    std::string regime; // empty: infer from problem shape
    int n_sample = 1;
    int m_sample = 0; // 0: regime default
    double rho_x = 1.0;
    double alpha0 = 1.0;
    std::string schedule = "sqrtk";
    double sigma = 0.0;
    double gamma = 1.0;
    long iters = 1000;
    std::uint64_t seed = 0;
    std::string trace_path;
    long cadence = 0;
    int workers = 0; // 0: auto
};

Regime pick_regime(const ConstrainedProblem& p, const std::string& flag) {
    if (!flag.empty()) return regime_from_string(flag);
    if (!p.has_y()) return Regime::NoY;
    return p.num_y_blocks() == 1 ? Regime::SingleY : Regime::MultiXY;
}

int default_m_sample(const ConstrainedProblem& p, Regime regime, int n) {
    if (regime == Regime::SingleY) return p.num_y_blocks();
    if (regime == Regime::MultiXY) {
        const long num = static_cast<long>(n) * p.num_y_blocks();
        if (num % p.num_x_blocks() != 0)
            throw ParameterError(
                "cannot infer --m-sample: n/N = " + std::to_string(n) + "/" +
                std::to_string(p.num_x_blocks()) +
                " has no integral counterpart m = n M / N; pass --m-sample explicitly");
        return static_cast<int>(num / p.num_x_blocks());
    }
    return 0;
}

int cmd_solve(const SolveArgs& args) {
    const ConstrainedProblem p = load_problem(args.problem_path);
    const int workers = resolve_workers(args.workers);
    if (args.trace_path.empty()) throw ParameterError("solve requires --trace FILE");

    RunOptions opts;
    opts.cadence = args.cadence;
    opts.workers = workers;

    RunResult result;
    const auto t0 = std::chrono::steady_clock::now();
    if (args.algo == "rpdbu") {
        const Regime regime = pick_regime(p, args.regime);
        const int m = args.m_sample > 0 ? args.m_sample : default_m_sample(p, regime, args.n_sample);
        SolverConfig cfg = derive_params(p, regime, args.n_sample, m, args.rho_x);
        cfg.max_iters = args.iters;
        cfg.seed = args.seed;
        const ValidationReport rep = validate_config(p, cfg);
        for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
        if (!rep.ok) throw ParameterError("derived configuration failed validation:\n" + rep.to_text());
        result = run_rpdbu(p, cfg, opts);
    } else if (args.algo == "rpdbus") {
        SolverConfig cfg = derive_params(p, Regime::Stochastic, args.n_sample, 0, args.rho_x);
        cfg.max_iters = args.iters;
        cfg.seed = args.seed;
        const StepSchedule schedule = args.schedule == "fixed"
                                          ? StepSchedule::fixed_horizon(args.alpha0, args.iters)
                                          : StepSchedule::sqrt_k(args.alpha0);
        const StochasticOracle oracle = StochasticOracle::gaussian(p.f, args.sigma);
        result = run_rpdbus(p, cfg, schedule, oracle, opts);
    } else {
        BaselineKind kind;
        if (args.algo == "lalm") kind = BaselineKind::LinearizedALM;
        else if (args.algo == "ladmm") kind = BaselineKind::CyclicLinearizedADMM;
        else if (args.algo == "pjadmm") kind = BaselineKind::ProxJADMM;
        else throw ParameterError("unknown --algo '" + args.algo + "'");
        BaselineParams bp = derive_baseline_params(p, args.rho_x, args.gamma);
        result = run_baseline(p, kind, bp, args.iters, opts);
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (result.failed) {
        write_trace_csv(result.trace, args.trace_path, /*zero_wall=*/true);
        throw SolverError("solve failed at k = " + std::to_string(result.state.k) + ": " +
                          result.error + " (partial trace written)");
    }
    // wall_s is zeroed in solve traces so identical argv+seed gives
    // bitwise identical files; elapsed time goes to stderr instead.
    write_trace_csv(result.trace, args.trace_path, /*zero_wall=*/true);
    if (!result.trace.rows.empty()) {
        const TraceRow& last = result.trace.rows.back();
        std::cerr << "solved: k = " << last.k << ", obj_last = " << last.obj_last
                  << ", feas_last = " << last.feas_last << ", wall = " << elapsed << " s, trace -> "
                  << args.trace_path << "\n";
    }
    return 0;
}

int cmd_validate(const std::string& problem_path, const std::string& config_path, bool as_json) {
    const ConstrainedProblem p = load_problem(problem_path);
    const SolverConfig cfg = load_config(config_path);
    const ValidationReport rep = validate_config(p, cfg);
    if (as_json)
        std::cout << rep.to_json().dump(2) << "\n";
    else
        std::cout << rep.to_text();
    return rep.ok ? 0 : 1;
}

int cmd_derive(const std::string& problem_path, const std::string& regime_flag, int n_sample,
               int m_sample, double rho_x, const std::string& out_path) {
    const ConstrainedProblem p = load_problem(problem_path);
    const Regime regime = pick_regime(p, regime_flag);
    const int m = m_sample > 0 ? m_sample : default_m_sample(p, regime, n_sample);
    const SolverConfig cfg = derive_params(p, regime, n_sample, m, rho_x);
    if (out_path.empty())
        std::cout << config_to_json(cfg);
    else
        save_config(cfg, out_path);
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir, bool as_json) {
    const ExperimentSummary summary = run_experiment(config_path, out_dir);
    if (as_json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& c : summary.cells)
            j.push_back({{"problem", c.problem_label},
                         {"algo", c.algo},
                         {"seed", c.seed},
                         {"ok", c.ok},
                         {"error", c.error},
                         {"iters", c.iters},
                         {"finalObjLast", c.final_obj},
                         {"finalFeasLast", c.final_feas},
                         {"fStar", c.f_star},
                         {"wallS", c.wall_s},
                         {"trace", c.csv_path}});
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << summary.to_text();
    }
    for (const auto& c : summary.cells)
        if (!c.ok) return 2;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"blocksolve: randomized primal-dual proximal block coordinate update solvers"};
    app.name("blocksolve");
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "emit machine-readable JSON output/errors on stdout");

    // generate
    auto* gen = app.add_subcommand("generate", "generate a problem instance file");
    gen->require_subcommand(1);
    int g_m = 20, g_n = 100, g_blocks = 20, g_rank_deficit = 0;
    std::uint64_t g_seed = 0;
    std::string g_out;
    auto* gen_ncqp_cmd = gen->add_subcommand("ncqp", "nonnegativity constrained QP instance");
    gen_ncqp_cmd->add_option("--m", g_m, "number of equality constraints")->capture_default_str();
    gen_ncqp_cmd->add_option("--n", g_n, "number of variables")->capture_default_str();
    gen_ncqp_cmd->add_option("--blocks", g_blocks, "number of x blocks (must divide n)")
        ->capture_default_str();
    gen_ncqp_cmd->add_option("--rank-deficit", g_rank_deficit, "rank deficit of Q = H H^T")
        ->capture_default_str();
    gen_ncqp_cmd->add_option("--seed", g_seed, "generator seed")->capture_default_str();
    gen_ncqp_cmd->add_option("--out", g_out, "output problem file")->required();

    int c_m = 50, c_p = 40, c_nc = 10, c_blocks = 4;
    double c_tau = 1.0;
    std::uint64_t c_seed = 0;
    std::string c_out;
    auto* gen_classo_cmd =
        gen->add_subcommand("classo", "constrained lasso instance (slack reformulation)");
    gen_classo_cmd->add_option("--m", c_m, "rows of the data matrix A")->capture_default_str();
    gen_classo_cmd->add_option("--p", c_p, "number of regression coefficients")
        ->capture_default_str();
    gen_classo_cmd->add_option("--nc", c_nc, "rows of the constraint matrix C")
        ->capture_default_str();
    gen_classo_cmd->add_option("--tau", c_tau, "l1 weight")->capture_default_str();
    gen_classo_cmd->add_option("--blocks", c_blocks, "number of x blocks")->capture_default_str();
    gen_classo_cmd->add_option("--seed", c_seed, "generator seed")->capture_default_str();
    gen_classo_cmd->add_option("--out", c_out, "output problem file")->required();

    // solve
    SolveArgs s;
    auto* solve = app.add_subcommand("solve", "run a solver on a problem file");
    solve->add_option("--problem", s.problem_path, "problem file")->required();
    solve->add_option("--algo", s.algo, "rpdbu | rpdbus | lalm | ladmm | pjadmm")
        ->capture_default_str();
    solve->add_option("--regime", s.regime,
                      "no-y | single-y | multi-xy (default: inferred from the problem shape)");
    solve->add_option("--n-sample", s.n_sample, "x blocks updated per iteration")
        ->capture_default_str();
    solve->add_option("--m-sample", s.m_sample,
                      "y blocks updated per iteration (default: regime rule)");
    solve->add_option("--rho-x", s.rho_x, "penalty rho_x (other penalties follow the regime rule)")
        ->capture_default_str();
    solve->add_option("--alpha0", s.alpha0, "stochastic schedule scale alpha0")
        ->capture_default_str();
    solve->add_option("--schedule", s.schedule, "sqrtk | fixed (rpdbus)")->capture_default_str();
    solve->add_option("--sigma", s.sigma, "gaussian gradient-noise bound (rpdbus)")
        ->capture_default_str();
    solve->add_option("--gamma", s.gamma, "multiplier damping (pjadmm)")->capture_default_str();
    solve->add_option("--iters", s.iters, "iterations to run")->capture_default_str();
    solve->add_option("--seed", s.seed, "seed for all randomness (sampling/noise substreams)")
        ->capture_default_str();
    solve->add_option("--trace", s.trace_path, "output trace CSV")->required();
    solve->add_option("--cadence", s.cadence, "metric cadence in iterations (default: one epoch)");
    solve->add_option("--workers", s.workers,
                      "intra-iteration block-update threads (default: available cores; "
                      "BLOCKSOLVE_WORKERS overrides)");

    // validate
    std::string v_problem, v_config, v_regime, v_out;
    int v_n = 1, v_m = 0;
    double v_rho_x = 1.0;
    bool v_derive = false;
    auto* validate = app.add_subcommand("validate", "validate or derive a solver configuration");
    validate->add_option("--problem", v_problem, "problem file")->required();
    validate->add_option("--config", v_config, "configuration file to validate");
    validate->add_flag("--derive", v_derive, "derive a configuration instead of validating one");
    validate->add_option("--regime", v_regime, "regime for --derive (default: inferred)");
    validate->add_option("--n-sample", v_n, "x sample size for --derive")->capture_default_str();
    validate->add_option("--m-sample", v_m, "y sample size for --derive (default: regime rule)");
    validate->add_option("--rho-x", v_rho_x, "penalty rho_x for --derive")->capture_default_str();
    validate->add_option("--out", v_out, "write the derived configuration to this file");

    // bench
    std::string b_config, b_out;
    auto* bench = app.add_subcommand("bench", "run an experiment config and write trace CSVs");
    bench->add_option("--config", b_config, "experiment config JSON")->required();
    bench->add_option("--out", b_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the message
        return 1;
    }

    try {
        if (gen_ncqp_cmd->parsed()) {
            save_problem(gen_ncqp(g_m, g_n, g_blocks, g_rank_deficit, g_seed), g_out);
            std::cerr << "wrote " << g_out << "\n";
            return 0;
        }
        if (gen_classo_cmd->parsed()) {
            save_problem(gen_classo_random(c_m, c_p, c_nc, c_tau, c_blocks, c_seed), c_out);
            std::cerr << "wrote " << c_out << "\n";
            return 0;
        }
        if (solve->parsed()) return cmd_solve(s);
        if (validate->parsed()) {
            if (v_derive) return cmd_derive(v_problem, v_regime, v_n, v_m, v_rho_x, v_out);
            if (v_config.empty())
                throw ParameterError("validate needs --config FILE (or --derive)");
            return cmd_validate(v_problem, v_config, as_json);
        }
        if (bench->parsed()) return cmd_bench(b_config, b_out, as_json);
        return 1;
    } catch (const std::exception& e) {
        const bool is_validation =
            dynamic_cast<const ParameterError*>(&e) || dynamic_cast<const DimensionError*>(&e);
        std::cerr << "error: " << e.what() << "\n";
        if (as_json) {
            nlohmann::json j;
            j["error"] = {{"kind", is_validation ? "validation" : "runtime"},
                          {"message", e.what()}};
            std::cout << j.dump(2) << "\n";
        }
        return is_validation ? 1 : 2;
    }
}
