#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "blocksolve/rpdbu.hpp"

namespace blocksolve {

enum class ScheduleKind { SqrtK, FixedHorizon };

/// Diminishing proximal-weight schedule for the stochastic engine:
///   sqrt_k:        alpha_k = alpha0 / sqrt(k) for k >= 1, alpha_0 = alpha0
///   fixed_horizon: alpha_k = alpha0 / sqrt(t) for all k, t fixed a priori
struct StepSchedule {
    ScheduleKind kind = ScheduleKind::SqrtK;
    double alpha0 = 1.0;
    long horizon = 1;

    static StepSchedule sqrt_k(double alpha0) {
        if (!(alpha0 > 0.0)) throw ParameterError("alpha0 must be positive");
        StepSchedule s;
        s.kind = ScheduleKind::SqrtK;
        s.alpha0 = alpha0;
        return s;
    }

    static StepSchedule fixed_horizon(double alpha0, long t) {
        if (!(alpha0 > 0.0)) throw ParameterError("alpha0 must be positive");
        if (t < 1) throw ParameterError("fixed-horizon schedule requires t >= 1");
        StepSchedule s;
        s.kind = ScheduleKind::FixedHorizon;
        s.alpha0 = alpha0;
        s.horizon = t;
        return s;
    }
};

inline double alpha_at(const StepSchedule& s, long k) {
    if (s.kind == ScheduleKind::SqrtK)
        return k <= 0 ? s.alpha0 : s.alpha0 / std::sqrt(static_cast<double>(k));
    return s.alpha0 / std::sqrt(static_cast<double>(s.horizon));
}

/// Damping of the multiplier step: 1 - (N-n) alpha_{k+1} / (N alpha_k).
inline double multiplier_factor(const StepSchedule& s, long k, int total_blocks, int n) {
    const double ratio = alpha_at(s, k + 1) / alpha_at(s, k);
    return 1.0 - static_cast<double>(total_blocks - n) * ratio / static_cast<double>(total_blocks);
}

/// Stochastic first-order oracle G with E[G|x] = grad f(x) and
/// E||G - grad f(x)||^2 <= sigma^2. The gaussian kind spreads the bound
/// across coordinates (per-coordinate sd = sigma/sqrt(dim)) so the
/// variance bound holds with equality. The noise stream is owned by the
/// caller and kept separate from the sampling stream.
class StochasticOracle {
public:
    enum class NoiseKind { Gaussian, Custom };
    using NoiseFn = std::function<VectorXd(const VectorXd&, Rng&)>;

    static StochasticOracle gaussian(SmoothOracle base, double sigma) {
        if (!(sigma >= 0.0)) throw ParameterError("noise bound sigma must be nonnegative");
        StochasticOracle o;
        o.base_ = std::move(base);
        o.noise_ = NoiseKind::Gaussian;
        o.sigma_ = sigma;
        return o;
    }

    static StochasticOracle custom(SmoothOracle base, NoiseFn noise_fn) {
        StochasticOracle o;
        o.base_ = std::move(base);
        o.noise_ = NoiseKind::Custom;
        o.noise_fn_ = std::move(noise_fn);
        return o;
    }

    const SmoothOracle& base() const { return base_; }
    double sigma() const { return sigma_; }
    NoiseKind noise_kind() const { return noise_; }

    /// One gradient estimate G at x, consuming the given noise stream.
    VectorXd sample_grad(const VectorXd& x, Rng& noise_rng) const {
        VectorXd g = base_.grad(x);
        if (noise_ == NoiseKind::Gaussian) {
            if (sigma_ > 0.0) {
                const double sd = sigma_ / std::sqrt(static_cast<double>(x.size()));
                for (long i = 0; i < g.size(); ++i) g(i) += sd * noise_rng.normal();
            }
        } else {
            g += noise_fn_(x, noise_rng);
        }
        return g;
    }

private:
    SmoothOracle base_;
    NoiseKind noise_ = NoiseKind::Gaussian;
    double sigma_ = 0.0;
    NoiseFn noise_fn_;
};

/// The stochastic engine handles problems without a y side only; configs
/// carrying y content belong to the deterministic engine.
inline void check_stochastic_problem(const ConstrainedProblem& p) {
    if (p.has_y())
        throw ParameterError(
            "the stochastic engine requires g = v = 0 (no y blocks); use the rpdbu engine for "
            "problems with a y side");
}

/// Initial state for the stochastic engine; requires A x^0 = b
/// (within 1e-9) and starts with lambda^0 = 0.
inline IterateState init_stochastic_state(const ConstrainedProblem& p, const BlockVector& x0) {
    check_stochastic_problem(p);
    IterateState s = init_state(p, x0);
    const double infeas = s.r.norm();
    if (infeas > 1e-9)
        throw ParameterError("stochastic engine requires a feasible start A x0 = b; got ||A x0 - "
                             "b|| = " + std::to_string(infeas));
    return s;
}

/// One iteration of the stochastic variant: the gradient is replaced by
/// the oracle estimate restricted to the sampled blocks, the proximal
/// scalar becomes eta_i + 1/alpha_k, and the multiplier update is damped
/// by multiplier_factor. Requires rho_x = rho (validated configs).
inline void stochastic_step(IterateState& s, const ConstrainedProblem& p, const SolverConfig& cfg,
                            const StepSchedule& schedule, const StochasticOracle& oracle,
                            Rng& sampling_rng, Rng& noise_rng, int workers = 1) {
    check_stochastic_problem(p);
    if (static_cast<int>(cfg.eta_x.size()) != p.num_x_blocks())
        throw ParameterError("config eta_x has " + std::to_string(cfg.eta_x.size()) +
                             " entries for " + std::to_string(p.num_x_blocks()) + " x blocks");

    const double alpha_k = alpha_at(schedule, s.k);
    const double factor = multiplier_factor(schedule, s.k, p.num_x_blocks(), cfg.n);

    begin_iteration(s);
    if (s.k >= 1) {
        // alpha-weighted sums for the weighted ergodic average
        s.werg_x.noalias() += alpha_k * s.x.data();
        const double y = alpha_k - s.walpha_comp;
        const double t = s.walpha_sum + y;
        s.walpha_comp = (t - s.walpha_sum) - y;
        s.walpha_sum = t;
    }

    const SubsetSample sel = sample_subset(sampling_rng, p.num_x_blocks(), cfg.n);
    const VectorXd g = oracle.sample_grad(s.x.data(), noise_rng);

    const int nx = sel.n();
    std::vector<VectorXd> new_x(static_cast<std::size_t>(nx));
    parallel_for(nx, workers, [&](int pos) {
        const int i = sel.indices[static_cast<std::size_t>(pos)];
        const auto& part = s.x.partition();
        const double weight = cfg.eta_x[static_cast<std::size_t>(i)] + 1.0 / alpha_k;
        VectorXd d = g.segment(part.offset(i), part.dim(i));
        d.noalias() += p.x_map.block(i).transpose() * (cfg.rho * s.r - s.lambda);
        new_x[static_cast<std::size_t>(pos)] = p.x_prox[static_cast<std::size_t>(i)].prox(
            s.x.block(i) - d / weight, weight);
    });
    for (int pos = 0; pos < nx; ++pos) {
        const int i = sel.indices[static_cast<std::size_t>(pos)];
        const VectorXd& xi = new_x[static_cast<std::size_t>(pos)];
        s.r.noalias() += p.x_map.block(i) * (xi - s.x.block(i));
        s.x.block(i) = xi;
    }

    s.lambda.noalias() -= factor * cfg.rho * s.r;
    ++s.k;
    if (s.k % kResidualCheckEvery == 0) check_and_refresh_residual(s, p);
}

/// Weighted ergodic average
///   x_hat^t = (alpha_{t+1} x^{t+1} + theta sum_{k=1..t} alpha_k x^k)
///             / (alpha_{t+1} + theta sum_{k=1..t} alpha_k)
/// at t = state.k - 1.
inline ErgodicPoint weighted_ergodic(const IterateState& s, const StepSchedule& schedule,
                                     const SolverConfig& cfg) {
    if (s.k < 1) throw SolverError("weighted_ergodic: called before the first step");
    const long t = s.k - 1;
    const double theta = cfg.theta_x(s.x.blocks());
    const double a_top = alpha_at(schedule, t + 1);
    const double denom = a_top + theta * s.walpha_sum;
    ErgodicPoint e;
    e.t = t;
    e.x_hat = BlockVector(s.x.partition(), (a_top * s.x.data() + theta * s.werg_x) / denom);
    e.y_hat = s.y;
    return e;
}

struct ScheduleViolation {
    std::string condition; // "weight-telescoping" | "terminal-window"
    long k = 0;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct ScheduleReport {
    bool ok = true;
    long t_max = 0;
    double theta = 0.0;
    double rho = 0.0;
    std::vector<ScheduleViolation> violations;

    std::string to_text() const {
        std::string out = "schedule check (t_max = " + std::to_string(t_max) + ", theta = " +
                          std::to_string(theta) + ", rho = " + std::to_string(rho) + "): ";
        if (ok) return out + "ok\n";
        out += std::to_string(violations.size()) + " violation(s)\n";
        for (const auto& v : violations)
            out += "  " + v.condition + " at k = " + std::to_string(v.k) + ": lhs = " +
                   std::to_string(v.lhs) + ", rhs = " + std::to_string(v.rhs) + "\n";
        return out;
    }
};

namespace detail {

/// Analysis ratio alpha_{k-1}/alpha_k extended by the schedule's closed
/// form: for sqrt_k the k = 1 term follows the sqrt formula's limit
/// (+inf), matching the telescoped bound the check encodes; the
/// algorithm's own alpha_0 stays alpha0.
inline double schedule_ratio(const StepSchedule& s, long k) {
    if (s.kind == ScheduleKind::FixedHorizon) return 1.0;
    if (k <= 1) return std::numeric_limits<double>::infinity();
    return std::sqrt(static_cast<double>(k)) / std::sqrt(static_cast<double>(k - 1));
}

inline double schedule_beta(const StepSchedule& s, long k, double theta, double rho) {
    const double ratio = schedule_ratio(s, k);
    return alpha_at(s, k) / ((1.0 - (1.0 - theta) / ratio) * rho);
}

} // namespace detail

/// Numerically verifies the two weighted-averaging conditions behind the
/// diminishing-weight analysis: the per-k telescoping inequality for
/// k = 1..t_max and the terminal-window inequality at t = t_max. Reports
/// every violation with both sides evaluated.
inline ScheduleReport schedule_check(const StepSchedule& schedule, long t_max, double theta,
                                     double rho) {
    if (t_max < 1) throw ParameterError("schedule_check requires t_max >= 1");
    if (!(theta > 0.0 && theta <= 1.0)) throw ParameterError("schedule_check requires theta in (0,1]");
    if (!(rho > 0.0)) throw ParameterError("schedule_check requires rho > 0");

    ScheduleReport rep;
    rep.t_max = t_max;
    rep.theta = theta;
    rep.rho = rho;

    for (long k = 1; k <= t_max; ++k) {
        const double beta_k = detail::schedule_beta(schedule, k, theta, rho);
        const double beta_k1 = detail::schedule_beta(schedule, k + 1, theta, rho);
        const double r_k = detail::schedule_ratio(schedule, k);
        const double r_k1 = detail::schedule_ratio(schedule, k + 1);
        const double lhs = 0.5 * r_k * beta_k + 0.5 * (1.0 - theta) * beta_k1 -
                           0.5 * r_k1 * beta_k1 - 0.5 * (1.0 - theta) * beta_k;
        const double tol = 1e-12 * std::max(1.0, std::abs(beta_k) + std::abs(beta_k1));
        if (!(lhs >= -tol)) {
            rep.ok = false;
            rep.violations.push_back({"weight-telescoping", k, lhs, 0.0});
        }
    }

    const double beta_t = detail::schedule_beta(schedule, t_max, theta, rho);
    const double alpha_t = alpha_at(schedule, t_max);
    const double lhs = 0.5 * alpha_t / rho;
    const double rhs = std::abs(detail::schedule_ratio(schedule, t_max) * beta_t -
                                (1.0 - theta) * beta_t - alpha_t / rho);
    const double tol = 1e-12 * std::max(1.0, std::abs(beta_t));
    if (!(lhs >= rhs - tol)) {
        rep.ok = false;
        rep.violations.push_back({"terminal-window", t_max, lhs, rhs});
    }
    return rep;
}

} // namespace blocksolve
