#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "blocksolve/generators.hpp"
#include "blocksolve/problem_io.hpp"
#include "blocksolve/runner.hpp"

namespace blocksolve {

/// High-accuracy solution used as the optimum reference in rate plots.
struct ReferenceSolution {
    BlockVector x_star;
    BlockVector y_star;
    double f_star = 0.0;
    std::string method;
    double kkt_residual = 0.0;
    bool converged = false;
};

/// Combined optimality measure: max of the feasibility norm and the
/// unit-step prox-gradient fixed-point residuals of both sides.
inline double kkt_residual(const ConstrainedProblem& p, const BlockVector& x, const BlockVector& y,
                           const VectorXd& lambda) {
    const double feas = feas_violation(p, x, y);
    double stat_sq = 0.0;
    for (int i = 0; i < p.num_x_blocks(); ++i) {
        VectorXd d = p.f.grad_block(x, i);
        d.noalias() -= p.x_map.block(i).transpose() * lambda;
        const VectorXd moved = p.x_prox[static_cast<std::size_t>(i)].prox(x.block(i) - d, 1.0);
        stat_sq += (x.block(i) - moved).squaredNorm();
    }
    double stat_y_sq = 0.0;
    for (int j = 0; j < p.num_y_blocks(); ++j) {
        VectorXd e = p.g.grad_block(y, j);
        e.noalias() -= p.y_map.block(j).transpose() * lambda;
        const VectorXd moved = p.y_prox[static_cast<std::size_t>(j)].prox(y.block(j) - e, 1.0);
        stat_y_sq += (y.block(j) - moved).squaredNorm();
    }
    return std::max(feas, std::max(std::sqrt(stat_sq), std::sqrt(stat_y_sq)));
}

namespace detail {

inline MatrixXd assemble_dense(const BlockLinearMap& map) {
    MatrixXd a(map.rows(), map.partition().total_dim());
    for (int i = 0; i < map.blocks(); ++i)
        a.middleCols(map.partition().offset(i), map.partition().dim(i)) = map.block(i);
    return a;
}

/// Primal-dual active-set refinement for no-y instances with a quadratic
/// (or zero) smooth term and zero/nonneg block constraints: fixes the
/// active coordinates at zero, solves the equality KKT system on the
/// free ones, and moves coordinates between the sets until the signs of
/// primal values and reduced gradients are consistent.
inline std::optional<std::pair<VectorXd, VectorXd>> kkt_polish(const ConstrainedProblem& p,
                                                               const VectorXd& x_init) {
    if (p.has_y()) return std::nullopt;
    if (p.f.kind() == SmoothKind::Custom) return std::nullopt;
    for (const auto& prox : p.x_prox)
        if (prox.kind() != ProxKind::Zero && prox.kind() != ProxKind::Nonneg) return std::nullopt;

    const int n = p.x_map.partition().total_dim();
    const int rows = p.rows();
    const MatrixXd a = assemble_dense(p.x_map);
    MatrixXd q = MatrixXd::Zero(n, n);
    VectorXd c = VectorXd::Zero(n);
    if (p.f.kind() == SmoothKind::Quadratic) {
        q = p.f.q();
        c = p.f.c();
    }

    std::vector<bool> sign_constrained(static_cast<std::size_t>(n), false);
    for (int i = 0; i < p.num_x_blocks(); ++i)
        if (p.x_prox[static_cast<std::size_t>(i)].kind() == ProxKind::Nonneg)
            for (int d = 0; d < p.x_map.partition().dim(i); ++d)
                sign_constrained[static_cast<std::size_t>(p.x_map.partition().offset(i) + d)] =
                    true;

    const double scale = 1.0 + x_init.cwiseAbs().maxCoeff();
    std::vector<bool> active(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i)
        active[static_cast<std::size_t>(i)] =
            sign_constrained[static_cast<std::size_t>(i)] && x_init(i) < 1e-7 * scale;

    constexpr int kMaxRounds = 60;
    for (int round = 0; round < kMaxRounds; ++round) {
        std::vector<int> free_idx;
        for (int i = 0; i < n; ++i)
            if (!active[static_cast<std::size_t>(i)]) free_idx.push_back(i);
        const int nf = static_cast<int>(free_idx.size());

        MatrixXd kkt = MatrixXd::Zero(nf + rows, nf + rows);
        VectorXd rhs(nf + rows);
        for (int r = 0; r < nf; ++r) {
            for (int cidx = 0; cidx < nf; ++cidx)
                kkt(r, cidx) = q(free_idx[static_cast<std::size_t>(r)],
                                 free_idx[static_cast<std::size_t>(cidx)]);
            rhs(r) = -c(free_idx[static_cast<std::size_t>(r)]);
        }
        for (int r = 0; r < rows; ++r)
            for (int cidx = 0; cidx < nf; ++cidx) {
                kkt(nf + r, cidx) = a(r, free_idx[static_cast<std::size_t>(cidx)]);
                kkt(cidx, nf + r) = -a(r, free_idx[static_cast<std::size_t>(cidx)]);
            }
        rhs.tail(rows) = p.b;

        Eigen::FullPivLU<MatrixXd> lu(kkt);
        if (!lu.isInvertible()) return std::nullopt;
        const VectorXd sol = lu.solve(rhs);
        if ((kkt * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) return std::nullopt;

        VectorXd x = VectorXd::Zero(n);
        for (int r = 0; r < nf; ++r) x(free_idx[static_cast<std::size_t>(r)]) = sol(r);
        const VectorXd lambda = sol.tail(rows);
        const VectorXd reduced = q * x + c - a.transpose() * lambda;

        bool changed = false;
        for (int i = 0; i < n; ++i) {
            const std::size_t ui = static_cast<std::size_t>(i);
            if (!sign_constrained[ui]) continue;
            if (!active[ui] && x(i) < -1e-10) {
                active[ui] = true;
                changed = true;
            } else if (active[ui] && reduced(i) < -1e-10) {
                active[ui] = false;
                changed = true;
            }
        }
        if (!changed) return std::make_pair(x, lambda);
    }
    return std::nullopt;
}

} // namespace detail

struct ReferenceOptions {
    double rho = 1.0;
    double kkt_tol = 1e-10;
    long check_every = 100;
};

/// Reference optimum from the deterministic full-update engine
/// (linearized ALM with the conservative full-sweep weights), run until
/// the KKT residual reaches kkt_tol or the budget is exhausted. For
/// quadratic nonneg instances an active-set KKT refinement is attempted
/// along the way, which reaches machine-precision residuals directly;
/// plain sweeps alone cannot hit tight tolerances within a desk-scale
/// budget on ill-conditioned instances. Returns the best point found,
/// flagged nonconverged when the target is unmet.
inline ReferenceSolution reference_solve(const ConstrainedProblem& p, long budget,
                                         const ReferenceOptions& opts = {}) {
    p.validate();
    const BaselineParams bp = derive_baseline_params(p, opts.rho);
    IterateState s = init_state(p);

    ReferenceSolution best;
    best.x_star = s.x;
    best.y_star = s.y;
    best.method = "linearized-alm";
    best.kkt_residual = kkt_residual(p, s.x, s.y, s.lambda);
    best.f_star = objective(p, s.x, s.y);

    auto consider = [&](const BlockVector& x, const BlockVector& y, const VectorXd& lambda,
                        const std::string& method) {
        const double res = kkt_residual(p, x, y, lambda);
        if (res < best.kkt_residual) {
            best.x_star = x;
            best.y_star = y;
            best.f_star = objective(p, x, y);
            best.kkt_residual = res;
            best.method = method;
        }
        return res;
    };

    long polish_at = 0;
    for (long k = 0; k <= budget; ++k) {
        if (k % opts.check_every == 0 || k == budget) {
            const double res = consider(s.x, s.y, s.lambda, "linearized-alm");
            if (res <= opts.kkt_tol) break;
            if (k >= polish_at) {
                polish_at = k + 500;
                if (auto polished = detail::kkt_polish(p, s.x.data())) {
                    const BlockVector px(p.x_map.partition(), polished->first);
                    const BlockVector py(p.y_map.partition());
                    const double pres = consider(px, py, polished->second,
                                                 "linearized-alm+active-set");
                    if (pres <= opts.kkt_tol) break;
                }
            }
        }
        if (k == budget) break;
        linearized_alm_step(s, p, bp);
    }
    best.converged = best.kkt_residual <= opts.kkt_tol;
    return best;
}

/// Least-squares slope of log(value) against log(k) over a window of a
/// positive series; the window must hold at least 10 samples.
inline double slope_fit(const std::vector<double>& ks, const std::vector<double>& values) {
    if (ks.size() != values.size()) throw ParameterError("slope_fit: length mismatch");
    if (ks.size() < 10)
        throw ParameterError("slope_fit: window holds " + std::to_string(ks.size()) +
                             " samples, need at least 10");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (!(ks[i] > 0.0))
            throw ParameterError("slope_fit: nonpositive abscissa in window");
        if (!(values[i] > 0.0))
            throw ParameterError("slope_fit: nonpositive value in window (the gap may already "
                                 "sit below the reference noise floor)");
        const double lx = std::log(ks[i]);
        const double ly = std::log(values[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw ParameterError("slope_fit: degenerate abscissa window");
    return (n * sxy - sx * sy) / denom;
}

enum class TraceColumn { ObjLast, ObjErg, FeasLast, FeasErg };

inline double trace_value(const TraceRow& r, TraceColumn col) {
    switch (col) {
        case TraceColumn::ObjLast: return r.obj_last;
        case TraceColumn::ObjErg: return r.obj_erg;
        case TraceColumn::FeasLast: return r.feas_last;
        case TraceColumn::FeasErg: return r.feas_erg;
    }
    return 0.0;
}

/// Slope of a trace column over rows with k_min <= k <= k_max.
inline double slope_fit(const Trace& trace, TraceColumn col, double k_min, double k_max) {
    std::vector<double> ks, vals;
    for (const auto& r : trace.rows) {
        if (r.k < k_min || r.k > k_max) continue;
        ks.push_back(static_cast<double>(r.k));
        vals.push_back(trace_value(r, col));
    }
    return slope_fit(ks, vals);
}

// ---------------------------------------------------------------------------
// Experiment orchestration
// ---------------------------------------------------------------------------

struct ExperimentCell {
    std::string problem_label;
    std::string algo;
    std::uint64_t seed = 0;
    std::string csv_path;
    bool ok = false;
    std::string error;
    long iters = 0;
    double final_obj = 0.0;
    double final_feas = 0.0;
    double f_star = std::numeric_limits<double>::quiet_NaN();
    double wall_s = 0.0;
};

struct ExperimentSummary {
    std::vector<ExperimentCell> cells;

    std::string to_text() const {
        std::ostringstream out;
        out << "problem,algo,seed,status,iters,final_obj_last,final_feas_last,fstar,wall_s,trace\n";
        for (const auto& c : cells) {
            out << c.problem_label << ',' << c.algo << ',' << c.seed << ','
                << (c.ok ? "ok" : "error: " + c.error) << ',' << c.iters << ','
                << detail::csv_real(c.final_obj) << ',' << detail::csv_real(c.final_feas) << ','
                << detail::csv_real(c.f_star) << ',' << detail::csv_real(c.wall_s) << ','
                << c.csv_path << '\n';
        }
        return out.str();
    }
};

namespace detail {

struct AlgoSpec {
    std::string name;
    std::string regime; // empty: infer from shape
    int n_sample = 1;
    int m_sample = 0; // 0: regime default
    double rho_x = 1.0;
    double alpha0 = 1.0;
    std::string schedule = "sqrtk";
    double sigma = 0.0;
    double gamma = 1.0;
};

inline Regime infer_regime(const ConstrainedProblem& p) {
    if (!p.has_y()) return Regime::NoY;
    return p.num_y_blocks() == 1 ? Regime::SingleY : Regime::MultiXY;
}

inline RunResult run_algo_cell(const ConstrainedProblem& p, const AlgoSpec& algo, long iters,
                               long cadence, std::uint64_t seed, int workers) {
    RunOptions opts;
    opts.cadence = cadence;
    opts.workers = workers;
    if (algo.name == "rpdbu") {
        const Regime regime =
            algo.regime.empty() ? infer_regime(p) : regime_from_string(algo.regime);
        int m = algo.m_sample;
        if (regime == Regime::SingleY || m == 0) m = p.num_y_blocks();
        SolverConfig cfg = derive_params(p, regime, algo.n_sample, m, algo.rho_x);
        cfg.max_iters = iters;
        cfg.seed = seed;
        return run_rpdbu(p, cfg, opts);
    }
    if (algo.name == "rpdbus") {
        SolverConfig cfg = derive_params(p, Regime::Stochastic, algo.n_sample, 0, algo.rho_x);
        cfg.max_iters = iters;
        cfg.seed = seed;
        const StepSchedule schedule = algo.schedule == "fixed"
                                          ? StepSchedule::fixed_horizon(algo.alpha0, iters)
                                          : StepSchedule::sqrt_k(algo.alpha0);
        const StochasticOracle oracle = StochasticOracle::gaussian(p.f, algo.sigma);
        return run_rpdbus(p, cfg, schedule, oracle, opts);
    }
    BaselineKind kind;
    if (algo.name == "lalm") kind = BaselineKind::LinearizedALM;
    else if (algo.name == "ladmm") kind = BaselineKind::CyclicLinearizedADMM;
    else if (algo.name == "pjadmm") kind = BaselineKind::ProxJADMM;
    else throw ParameterError("unknown algorithm '" + algo.name + "'");
    BaselineParams bp = derive_baseline_params(p, algo.rho_x, algo.gamma);
    return run_baseline(p, kind, bp, iters, opts);
}

} // namespace detail

/// Runs every (problem, algo, seed) cell of a JSON experiment config,
/// writing one trace CSV per cell plus summary.csv under out_dir. Cells
/// run in parallel and failures stay isolated to their cell.
inline ExperimentSummary run_experiment(const std::string& config_path,
                                        const std::string& out_dir) {
    std::ifstream f(config_path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + config_path + "' for reading");
    std::ostringstream ss;
    ss << f.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("experiment config parse error: ") + e.what());
    }

    std::filesystem::create_directories(out_dir);

    struct ProblemEntry {
        std::string label;
        ConstrainedProblem problem;
        double f_star = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<ProblemEntry> problems;
    long reference_budget = 0;
    double reference_rho = 1.0;
    if (j.contains("reference")) {
        reference_budget = j["reference"].value("budget", 100000L);
        reference_rho = j["reference"].value("rhoX", 1.0);
    }

    try {
        for (const auto& pj : j.at("problems")) {
            ProblemEntry e;
            if (pj.contains("gen")) {
                const std::string gen = pj.at("gen").get<std::string>();
                if (gen == "ncqp") {
                    e.problem = gen_ncqp(pj.at("m").get<int>(), pj.at("n").get<int>(),
                                         pj.at("blocks").get<int>(),
                                         pj.value("rankDeficit", 0),
                                         pj.value("seed", std::uint64_t{0}));
                    e.label = "ncqp-m" + std::to_string(pj.at("m").get<int>()) + "-n" +
                              std::to_string(pj.at("n").get<int>());
                } else if (gen == "classo") {
                    e.problem = gen_classo_random(pj.at("m").get<int>(), pj.at("p").get<int>(),
                                                  pj.at("nc").get<int>(),
                                                  pj.value("tau", 1.0), pj.at("blocks").get<int>(),
                                                  pj.value("seed", std::uint64_t{0}));
                    e.label = "classo-p" + std::to_string(pj.at("p").get<int>());
                } else {
                    throw ParameterError("unknown generator '" + gen + "'");
                }
            } else if (pj.contains("file")) {
                e.problem = load_problem(pj.at("file").get<std::string>());
                e.label = std::filesystem::path(pj.at("file").get<std::string>()).stem().string();
            } else {
                throw ParameterError("experiment problem entries need 'gen' or 'file'");
            }
            if (reference_budget > 0) {
                ReferenceOptions ropts;
                ropts.rho = reference_rho;
                e.f_star = reference_solve(e.problem, reference_budget, ropts).f_star;
            }
            problems.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("experiment config: missing or malformed field: ") + e.what());
    }

    std::vector<detail::AlgoSpec> algos;
    for (const auto& aj : j.at("algos")) {
        detail::AlgoSpec a;
        a.name = aj.at("name").get<std::string>();
        a.regime = aj.value("regime", std::string());
        a.n_sample = aj.value("nSample", 1);
        a.m_sample = aj.value("mSample", 0);
        a.rho_x = aj.value("rhoX", 1.0);
        a.alpha0 = aj.value("alpha0", 1.0);
        a.schedule = aj.value("schedule", std::string("sqrtk"));
        a.sigma = aj.value("sigma", 0.0);
        a.gamma = aj.value("gamma", 1.0);
        algos.push_back(std::move(a));
    }
    std::vector<std::uint64_t> seeds = j.value("seeds", std::vector<std::uint64_t>{0});
    const long iters = j.at("iters").get<long>();
    const long cadence = j.value("cadence", 0L);

    ExperimentSummary summary;
    std::vector<std::future<ExperimentCell>> futures;
    for (std::size_t pi = 0; pi < problems.size(); ++pi)
        for (const auto& algo : algos)
            for (const auto seed : seeds) {
                const ProblemEntry* entry = &problems[pi];
                const std::string csv =
                    (std::filesystem::path(out_dir) /
                     ("p" + std::to_string(pi) + "_" + algo.name + "_s" + std::to_string(seed) +
                      ".csv"))
                        .string();
                futures.push_back(std::async(std::launch::async, [entry, algo, seed, iters,
                                                                  cadence, csv]() {
                    ExperimentCell cell;
                    cell.problem_label = entry->label;
                    cell.algo = algo.name;
                    cell.seed = seed;
                    cell.csv_path = csv;
                    cell.f_star = entry->f_star;
                    try {
                        const RunResult res =
                            detail::run_algo_cell(entry->problem, algo, iters, cadence, seed, 1);
                        if (res.failed) throw SolverError(res.error);
                        write_trace_csv(res.trace, csv);
                        cell.ok = true;
                        cell.iters = res.state.k;
                        if (!res.trace.rows.empty()) {
                            cell.final_obj = res.trace.rows.back().obj_last;
                            cell.final_feas = res.trace.rows.back().feas_last;
                            cell.wall_s = res.trace.rows.back().wall_s;
                        }
                    } catch (const std::exception& e) {
                        cell.ok = false;
                        cell.error = e.what();
                    }
                    return cell;
                }));
            }
    for (auto& fut : futures) summary.cells.push_back(fut.get());

    std::ofstream out((std::filesystem::path(out_dir) / "summary.csv").string(),
                      std::ios::binary);
    if (!out) throw IoError("cannot write experiment summary");
    out << summary.to_text();
    return summary;
}

} // namespace blocksolve
