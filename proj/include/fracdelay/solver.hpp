#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracdelay/delayed_ml.hpp"
#include "fracdelay/kernel.hpp"
#include "fracdelay/matrix.hpp"
#include "fracdelay/parallel.hpp"
#include "fracdelay/problem.hpp"
#include "fracdelay/quadrature.hpp"

namespace fracdelay {

namespace detail {

inline int solver_table_depth(const ProblemSpec& p, const SeriesParams& sp) {
    const double rho = norm_ind1(p.a) + norm_ind1(p.omega);
    int depth = 0;
    for (double g : {p.gamma1(), p.gamma2(), p.mu})
        depth = std::max(depth, required_table_depth(rho, p.mu, g, p.T, sp));
    return std::min(depth + 2, sp.k_hard_max);
}

} // namespace detail

/// Evaluates the closed-form solution
///   z(t) = Y_{mu,g1}(t) c1 + Y_{mu,g2}(t) c2
///          - integral_{-h}^{0} Y_{mu,mu}(t-s-h) Omega phi(s) ds
///          + integral_{0}^{t} Y_{mu,mu}(t-s) f(s) ds,
/// g1 = (mu-2)(1-nu)+1, g2 = g1+1, with one shared kernel table. The
/// convolution integrals run over piecewise-analytic integrands, so the
/// quadrature panels are split wherever the Y argument crosses a multiple
/// of h.
class HilferSolver {
public:
    HilferSolver(ProblemSpec prob, SeriesParams sp = {}, QuadratureParams qp = {})
        : prob_(std::move(prob)), sp_(sp), qp_(qp) {
        validate(prob_);
        validate(sp_);
        validate(qp_);
        table_ = std::make_shared<KernelTable>(prob_.a, prob_.omega,
                                               detail::solver_table_depth(prob_, sp_));
        y_g1_ = std::make_unique<YEvaluator>(*table_, prob_.mu, prob_.gamma1(), prob_.h, sp_);
        y_g2_ = std::make_unique<YEvaluator>(*table_, prob_.mu, prob_.gamma2(), prob_.h, sp_);
        y_mu_ = std::make_unique<YEvaluator>(*table_, prob_.mu, prob_.mu, prob_.h, sp_);
    }

    const ProblemSpec& problem() const { return prob_; }
    const KernelTable& table() const { return *table_; }
    const YEvaluator& kernel_evaluator() const { return *y_mu_; }
    const YEvaluator& homogeneous_evaluator_1() const { return *y_g1_; }
    const YEvaluator& homogeneous_evaluator_2() const { return *y_g2_; }

    Vec value_at(double t) const {
        if (!(t > 0.0) || t > prob_.T + 1e-12 * prob_.T)
            throw std::invalid_argument("HilferSolver: t must lie in (0, T]");
        Vec z = mat_vec(y_g1_->eval(t), prob_.c1);
        z = vec_axpy(1.0, mat_vec(y_g2_->eval(t), prob_.c2), z);
        if (!prob_.phi.is_zero() && norm_ind1(prob_.omega) > 0.0)
            z = vec_axpy(-1.0, history_integral(t), z);
        if (!prob_.f.is_zero())
            z = vec_axpy(1.0, forcing_integral(t), z);
        return z;
    }

    Trajectory solve(const std::vector<double>& grid) const {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!(grid[i] > 0.0) || grid[i] > prob_.T + 1e-12 * prob_.T)
                throw std::invalid_argument("HilferSolver: grid must lie in (0, T]");
            if (i > 0 && !(grid[i] > grid[i - 1]))
                throw std::invalid_argument("HilferSolver: grid must be strictly increasing");
        }
        Trajectory traj;
        traj.grid = grid;
        traj.breakpoints = delay_breakpoints(prob_.h, prob_.T);
        traj.values.assign(grid.size(), Vec());
        parallel_for(grid.size(), [&](std::size_t i) { traj.values[i] = value_at(grid[i]); });
        return traj;
    }

    /// integral_{-h}^{0} Y_{mu,mu}(t-s-h) Omega phi(s) ds
    Vec history_integral(double t) const {
        const std::size_t d = prob_.dim();
        AdaptiveQuadrature quad(d, qp_);
        Vec phi_val;
        auto integrand = [&](double s, Vec& out) {
            const double arg = t - s - prob_.h;
            if (arg <= 0.0) {
                std::fill(out.begin(), out.end(), 0.0);
                return;
            }
            out = mat_vec(y_mu_->eval(arg), mat_vec(prob_.omega, prob_.phi.eval(s)));
        };
        // Y argument crosses m h at s = t - (m+1) h
        std::vector<double> cuts;
        for (int m = 0; ; ++m) {
            const double s = t - (m + 1) * prob_.h;
            if (s <= -prob_.h) break;
            if (s < 0.0) cuts.push_back(s);
        }
        return quad.integrate(integrand, -prob_.h, 0.0, cuts);
    }

    /// integral_{0}^{t} Y_{mu,mu}(t-s) f(s) ds
    Vec forcing_integral(double t) const {
        const std::size_t d = prob_.dim();
        AdaptiveQuadrature quad(d, qp_);
        auto integrand = [&](double s, Vec& out) {
            const double arg = t - s;
            if (arg <= 0.0) {
                std::fill(out.begin(), out.end(), 0.0);
                return;
            }
            out = mat_vec(y_mu_->eval(arg), prob_.f.eval(s));
        };
        std::vector<double> cuts;
        for (int m = 1; m * prob_.h < t; ++m) cuts.push_back(t - m * prob_.h);
        return quad.integrate(integrand, 0.0, t, cuts);
    }

private:
    ProblemSpec prob_;
    SeriesParams sp_;
    QuadratureParams qp_;
    std::shared_ptr<KernelTable> table_;
    std::unique_ptr<YEvaluator> y_g1_, y_g2_, y_mu_;
};

inline Trajectory solve(const ProblemSpec& prob, const std::vector<double>& grid,
                        const SeriesParams& sp = {}, const QuadratureParams& qp = {}) {
    return HilferSolver(prob, sp, qp).solve(grid);
}

/// The history integral alone; exposed for testing.
inline Vec history_term(const ProblemSpec& prob, double t, const SeriesParams& sp = {},
                        const QuadratureParams& qp = {}) {
    if (!(t > 0.0)) throw std::invalid_argument("history_term: t must be positive");
    return HilferSolver(prob, sp, qp).history_integral(t);
}

/// The forcing integral alone; exposed for testing.
inline Vec forcing_term(const ProblemSpec& prob, double t, const SeriesParams& sp = {},
                        const QuadratureParams& qp = {}) {
    if (!(t > 0.0)) throw std::invalid_argument("forcing_term: t must be positive");
    return HilferSolver(prob, sp, qp).forcing_integral(t);
}

/// Ulam-Hyers constant C = integral_0^T |Y_{mu,mu}(s)| ds in the induced
/// 1-norm. Relative tolerance taken from qp.qtol.
inline double uh_constant(const ProblemSpec& prob, const SeriesParams& sp = {},
                          const QuadratureParams& qp = {}) {
    validate(prob);
    validate(sp);
    validate(qp);
    KernelTable table(prob.a, prob.omega, detail::solver_table_depth(prob, sp));
    const YEvaluator y_mu(table, prob.mu, prob.mu, prob.h, sp);
    const std::vector<double> cuts = delay_breakpoints(prob.h, prob.T);
    auto f = [&](double s) { return norm_ind1(y_mu.eval(s)); };

    // rough pass to set the absolute budget for the relative tolerance
    QuadratureParams rough = qp;
    rough.qtol = 1e-4;
    const double estimate = integrate_adaptive(f, 0.0, prob.T, rough, cuts);
    QuadratureParams fine = qp;
    fine.qtol = qp.qtol * std::max(std::fabs(estimate), 1e-30);
    return integrate_adaptive(f, 0.0, prob.T, fine, cuts);
}

struct PerturbationReport {
    double eps = 0.0;
    double uh_c = 0.0;           // the constant C
    double bound = 0.0;          // C * eps
    double max_difference = 0.0; // max_t |z*(t) - z(t)| over the grid
    double tolerance_used = 0.0;
    bool passed = false;
};

/// Solves the problem with forcing f and with f + X, X a constant vector of
/// 1-norm eps, and checks max_t |z* - z| <= C eps (1 + rel_slack).
inline PerturbationReport perturbation_bound_check(const ProblemSpec& prob, double eps,
                                                   const std::vector<double>& grid,
                                                   const SeriesParams& sp = {},
                                                   const QuadratureParams& qp = {},
                                                   double rel_slack = 1e-8) {
    if (eps < 0.0) throw std::invalid_argument("perturbation_bound_check: eps must be >= 0");
    validate(prob);

    ProblemSpec perturbed = prob;
    if (eps > 0.0) {
        FunctionTerm bump;
        bump.kind = TermKind::monomial;
        bump.exponent_or_frequency = 0.0;
        bump.coeff.assign(prob.dim(), 0.0);
        bump.coeff[0] = eps;  // |X|_1 = eps
        perturbed.f.terms.push_back(bump);
    }

    const Trajectory base = solve(prob, grid, sp, qp);
    const Trajectory shifted = solve(perturbed, grid, sp, qp);
    PerturbationReport rep;
    rep.eps = eps;
    rep.uh_c = uh_constant(prob, sp, qp);
    rep.bound = rep.uh_c * eps;
    for (std::size_t i = 0; i < grid.size(); ++i)
        rep.max_difference =
            std::max(rep.max_difference, norm1(vec_sub(shifted.values[i], base.values[i])));
    rep.tolerance_used = rel_slack;
    rep.passed = rep.max_difference <= rep.bound * (1.0 + rel_slack) + 1e-300;
    return rep;
}

} // namespace fracdelay
