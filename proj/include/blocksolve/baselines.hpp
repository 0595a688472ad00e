#pragma once

#include <string>
#include <vector>

#include "blocksolve/rpdbu.hpp"
#include "blocksolve/validator.hpp"

namespace blocksolve {

enum class BaselineKind { LinearizedALM, CyclicLinearizedADMM, ProxJADMM, TwoBlockADMM };

inline const char* to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::LinearizedALM: return "lalm";
        case BaselineKind::CyclicLinearizedADMM: return "ladmm";
        case BaselineKind::ProxJADMM: return "pjadmm";
        case BaselineKind::TwoBlockADMM: return "admm2";
    }
    return "?";
}

/// Parameters shared by the deterministic reference methods. A single
/// penalty rho plays the role of rho_x = rho_y = rho (full sweeps have
/// theta = 1); gamma is the Prox-JADMM multiplier damping.
struct BaselineParams {
    double rho = 1.0;
    std::vector<double> eta_x;
    std::vector<double> eta_y;
    double gamma = 1.0;
};

/// Conservative full-sweep weights eta_i = L_f + N rho ||A_i||^2 (and the
/// y analogue). All baseline comparisons run with these validator-style
/// bounds so no method gets hand-tuned steps.
inline BaselineParams derive_baseline_params(const ConstrainedProblem& p, double rho,
                                             double gamma = 1.0) {
    if (!(rho >= 0.0)) throw ParameterError("baseline rho must be nonnegative");
    BaselineParams bp;
    bp.rho = rho;
    bp.gamma = gamma;
    const double lf = p.f.lipschitz();
    const double lg = p.g.lipschitz();
    for (int i = 0; i < p.num_x_blocks(); ++i)
        bp.eta_x.push_back(lf + p.num_x_blocks() * rho * kSpectralSafety *
                                    spectral_norm_sq(p.x_map, i));
    for (int j = 0; j < p.num_y_blocks(); ++j)
        bp.eta_y.push_back(lg + p.num_y_blocks() * rho * kSpectralSafety *
                                    spectral_norm_sq(p.y_map, j));
    return bp;
}

namespace detail {

inline SolverConfig baseline_as_config(const ConstrainedProblem& p, const BaselineParams& bp) {
    SolverConfig cfg;
    cfg.regime = p.has_y() ? Regime::MultiXY : Regime::NoY;
    cfg.n = p.num_x_blocks();
    cfg.m = p.num_y_blocks();
    cfg.rho_x = bp.rho;
    cfg.rho_y = bp.rho;
    cfg.rho = bp.rho;
    cfg.eta_x = bp.eta_x;
    cfg.eta_y = bp.eta_y;
    return cfg;
}

inline std::vector<int> all_indices(int count) {
    std::vector<int> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

} // namespace detail

/// Linearized ALM: simultaneous prox-linear update of every block from
/// the frozen iterate, then lambda -= rho r. This is exactly the
/// randomized engine's step with full sampling (theta = 1), and shares
/// its code path.
inline void linearized_alm_step(IterateState& s, const ConstrainedProblem& p,
                                const BaselineParams& bp, int workers = 1) {
    const SolverConfig cfg = detail::baseline_as_config(p, bp);
    step_with_subsets(s, p, cfg, detail::all_indices(p.num_x_blocks()),
                      detail::all_indices(p.num_y_blocks()), workers);
}

/// Cyclic linearized ADMM: Gauss-Seidel sweep in ascending block order,
/// refreshing the residual after each block, then the multiplier step.
inline void cyclic_linearized_admm_step(IterateState& s, const ConstrainedProblem& p,
                                        const BaselineParams& bp) {
    if (static_cast<int>(bp.eta_x.size()) != p.num_x_blocks() ||
        static_cast<int>(bp.eta_y.size()) != p.num_y_blocks())
        throw ParameterError("baseline weights do not match the problem's block counts");
    begin_iteration(s);
    for (int i = 0; i < p.num_x_blocks(); ++i) {
        const double eta = bp.eta_x[static_cast<std::size_t>(i)];
        VectorXd d = p.f.grad_block(s.x, i);
        d.noalias() += p.x_map.block(i).transpose() * (bp.rho * s.r - s.lambda);
        const VectorXd xi =
            p.x_prox[static_cast<std::size_t>(i)].prox(s.x.block(i) - d / eta, eta);
        s.r.noalias() += p.x_map.block(i) * (xi - s.x.block(i));
        s.x.block(i) = xi;
    }
    for (int j = 0; j < p.num_y_blocks(); ++j) {
        const double eta = bp.eta_y[static_cast<std::size_t>(j)];
        VectorXd e = p.g.grad_block(s.y, j);
        e.noalias() += p.y_map.block(j).transpose() * (bp.rho * s.r - s.lambda);
        const VectorXd yj =
            p.y_prox[static_cast<std::size_t>(j)].prox(s.y.block(j) - e / eta, eta);
        s.r.noalias() += p.y_map.block(j) * (yj - s.y.block(j));
        s.y.block(j) = yj;
    }
    s.lambda.noalias() -= bp.rho * s.r;
    ++s.k;
    if (s.k % kResidualCheckEvery == 0) check_and_refresh_residual(s, p);
}

/// Proximal Jacobian ADMM: all blocks updated in parallel from the
/// frozen iterate with weights P_i = eta_i I - rho A_i^T A_i, then the
/// damped multiplier step lambda -= gamma rho r. A coupled smooth term,
/// when present, is linearized at the frozen iterate like in the full
/// sweeps; with gamma = 1 the step coincides with linearized_alm_step.
inline void prox_jadmm_step(IterateState& s, const ConstrainedProblem& p,
                            const BaselineParams& bp, double gamma, int workers = 1) {
    if (!(gamma >= 0.0)) throw ParameterError("prox_jadmm_step: gamma must be nonnegative");
    const SolverConfig cfg = detail::baseline_as_config(p, bp);
    detail::check_engine_config(s, p, cfg);
    begin_iteration(s);

    const int nx = p.num_x_blocks();
    std::vector<VectorXd> new_x(static_cast<std::size_t>(nx));
    parallel_for(nx, workers, [&](int i) { new_x[static_cast<std::size_t>(i)] =
                                               x_block_update(s, p, cfg, i); });
    for (int i = 0; i < nx; ++i) {
        const VectorXd& xi = new_x[static_cast<std::size_t>(i)];
        s.r.noalias() += p.x_map.block(i) * (xi - s.x.block(i));
        s.x.block(i) = xi;
    }
    const int ny = p.num_y_blocks();
    std::vector<VectorXd> new_y(static_cast<std::size_t>(ny));
    parallel_for(ny, workers, [&](int j) { new_y[static_cast<std::size_t>(j)] =
                                               y_block_update(s, p, cfg, j); });
    for (int j = 0; j < ny; ++j) {
        const VectorXd& yj = new_y[static_cast<std::size_t>(j)];
        s.r.noalias() += p.y_map.block(j) * (yj - s.y.block(j));
        s.y.block(j) = yj;
    }

    s.lambda.noalias() -= gamma * bp.rho * s.r;
    ++s.k;
    if (s.k % kResidualCheckEvery == 0) check_and_refresh_residual(s, p);
}

/// Classic 2-block ADMM with exact alternating minimization. Valid on
/// instances whose maps have orthonormal columns (A^T A = I, B^T B = I),
/// where the exact block minimizers reduce to proximal steps; the
/// equivalence tests build such instances.
inline void two_block_admm_step(IterateState& s, const ConstrainedProblem& p, double rho) {
    if (p.num_x_blocks() != 1 || p.num_y_blocks() != 1)
        throw ParameterError("two_block_admm_step requires N = M = 1");
    if (!(rho > 0.0)) throw ParameterError("two_block_admm_step requires rho > 0");
    if (p.f.kind() != SmoothKind::Zero || p.g.kind() != SmoothKind::Zero)
        throw ParameterError("two_block_admm_step handles separable objectives only");
    begin_iteration(s);

    const MatrixXd& a = p.x_map.block(0);
    const MatrixXd& bmat = p.y_map.block(0);
    const VectorXd x_arg = a.transpose() * (p.b - bmat * s.y.block(0) + s.lambda / rho);
    const VectorXd x_new = p.x_prox[0].prox(x_arg, rho);
    s.r.noalias() += a * (x_new - s.x.block(0));
    s.x.block(0) = x_new;

    const VectorXd y_arg = bmat.transpose() * (p.b - a * s.x.block(0) + s.lambda / rho);
    const VectorXd y_new = p.y_prox[0].prox(y_arg, rho);
    s.r.noalias() += bmat * (y_new - s.y.block(0));
    s.y.block(0) = y_new;

    s.lambda.noalias() -= rho * s.r;
    ++s.k;
    if (s.k % kResidualCheckEvery == 0) check_and_refresh_residual(s, p);
}

/// Configuration realizing the randomized bilinear saddle-point scheme
/// (single y block, B = I, b = 0) inside the block update engine: a
/// single x block per iteration, rho_x = q/eta, rho_y = rho = 1/eta,
/// eta_i = tau and eta' = 1/eta so the y-side proximal weight vanishes.
inline SolverConfig pds_config(const ConstrainedProblem& p, double q, double eta, double tau) {
    if (p.num_y_blocks() != 1)
        throw ParameterError("pds_config requires a single y block");
    if (p.b.size() > 0 && p.b.cwiseAbs().maxCoeff() > 1e-12)
        throw ParameterError("pds_config requires b = 0");
    const MatrixXd& bmat = p.y_map.block(0);
    if (bmat.rows() != bmat.cols() ||
        (bmat - MatrixXd::Identity(bmat.rows(), bmat.cols())).cwiseAbs().maxCoeff() > 1e-12)
        throw ParameterError("pds_config requires B = I");
    if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("pds_config requires q in [0, 1]");
    if (!(eta > 0.0 && tau > 0.0)) throw ParameterError("pds_config requires eta, tau > 0");

    SolverConfig cfg;
    cfg.regime = Regime::SingleY;
    cfg.n = 1;
    cfg.m = 1;
    cfg.rho_x = q / eta;
    cfg.rho_y = 1.0 / eta;
    cfg.rho = 1.0 / eta;
    cfg.eta_x.assign(static_cast<std::size_t>(p.num_x_blocks()), tau);
    cfg.eta_y.assign(1, 1.0 / eta);
    return cfg;
}

} // namespace blocksolve
