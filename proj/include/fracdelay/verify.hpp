#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fracdelay/delayed_ml.hpp"
#include "fracdelay/fractional_ops.hpp"
#include "fracdelay/matrix.hpp"
#include "fracdelay/problem.hpp"
#include "fracdelay/quadrature.hpp"
#include "fracdelay/solver.hpp"

namespace fracdelay {

struct VerifyReport {
    std::string check_name;
    std::vector<std::pair<double, double>> points;  // (parameter, residual)
    double max_residual = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

namespace detail {

/// Composite Simpson over uniformly sampled vector values; falls back to a
/// trapezoid on the last panel when the panel count is odd.
inline Vec simpson_uniform(const std::vector<Vec>& values, double dt, std::size_t dim) {
    const std::size_t n = values.size();
    if (n < 2) return Vec(dim, 0.0);
    Vec acc(dim, 0.0);
    std::size_t last = n - 1;
    const bool odd_panels = ((n - 1) % 2) != 0;
    if (odd_panels) last = n - 2;
    if (last >= 2) {
        for (std::size_t j = 0; j <= last; ++j) {
            double w = (j == 0 || j == last) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
            for (std::size_t c = 0; c < dim; ++c) acc[c] += w * values[j][c] * dt / 3.0;
        }
    }
    if (odd_panels)
        for (std::size_t c = 0; c < dim; ++c)
            acc[c] += 0.5 * dt * (values[n - 2][c] + values[n - 1][c]);
    return acc;
}

inline double uniform_step(const std::vector<double>& grid, const char* who) {
    if (grid.size() < 2) throw std::invalid_argument(std::string(who) + ": grid too short");
    const double dt = grid[1] - grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::fabs(grid[i] - grid[i - 1] - dt) > 1e-9 * std::max(1.0, dt))
            throw std::invalid_argument(std::string(who) + ": grid must be uniform");
    return dt;
}

} // namespace detail

/// Admissibility margin for Laplace-domain checks: s must exceed
/// 2 (|A| + |Omega|)^(1/mu) so the resolvent is safely invertible and the
/// dropped tail beyond T is negligible at the tested horizons.
inline double laplace_margin(const ProblemSpec& prob) {
    return 2.0 * std::pow(norm_ind1(prob.a) + norm_ind1(prob.omega), 1.0 / prob.mu);
}

/// Compares the transform of a computed trajectory against the closed form
///   Z(s) = (s^mu I + A + Omega e^{-hs})^{-1}
///          [ s^{p} c1 + s^{p-1} c2 - Omega Psi(s) + F(s) ],  p = 2(1-nu)+mu nu-1,
/// with Psi(s) = integral_0^h e^{-st} phi(t-h) dt and F the forcing transform.
/// The trajectory side integrates e^{-st} z(t) dt over [0, T]: the two
/// homogeneous kernels are transformed termwise (they carry the t->0 power
/// behaviour), the remainder is Simpson on the trajectory grid, so the
/// residual is dominated by the grid resolution and shrinks under refinement.
inline VerifyReport laplace_check(const ProblemSpec& prob, const Trajectory& traj,
                                  const std::vector<double>& s_values,
                                  const SeriesParams& sp = {}, const QuadratureParams& qp = {},
                                  double threshold = 1e-4) {
    validate(prob);
    if (traj.grid.size() < 400)
        throw std::invalid_argument("laplace_check: trajectory must have at least 400 points");
    const double margin = laplace_margin(prob);
    for (double s : s_values)
        if (!(s > margin))
            throw std::invalid_argument("laplace_check: s=" + std::to_string(s) +
                                        " below admissibility margin " + std::to_string(margin));
    const double dt = detail::uniform_step(traj.grid, "laplace_check");
    if (std::fabs(traj.grid.front() - dt) > 1e-9 * dt)
        throw std::invalid_argument("laplace_check: grid must start at its own spacing");

    const std::size_t d = prob.dim();
    const double t_end = traj.grid.back();
    KernelTable table(prob.a, prob.omega, detail::solver_table_depth(prob, sp));
    const YEvaluator y_g1(table, prob.mu, prob.gamma1(), prob.h, sp);
    const YEvaluator y_g2(table, prob.mu, prob.gamma2(), prob.h, sp);

    // trajectory minus homogeneous part; vanishes at t=0
    std::vector<Vec> regular(traj.grid.size() + 1, Vec(d, 0.0));
    for (std::size_t i = 0; i < traj.grid.size(); ++i) {
        Vec hom = mat_vec(y_g1.eval(traj.grid[i]), prob.c1);
        hom = vec_axpy(1.0, mat_vec(y_g2.eval(traj.grid[i]), prob.c2), hom);
        regular[i + 1] = vec_sub(traj.values[i], hom);
    }

    VerifyReport rep;
    rep.check_name = "laplace";
    rep.threshold = threshold;
    for (double s : s_values) {
        // transform of the trajectory
        std::vector<Vec> damped(regular.size(), Vec(d));
        for (std::size_t i = 0; i < regular.size(); ++i) {
            const double t = static_cast<double>(i) * dt;
            const double e = std::exp(-s * t);
            for (std::size_t c = 0; c < d; ++c) damped[i][c] = e * regular[i][c];
        }
        Vec numeric = detail::simpson_uniform(damped, dt, d);
        numeric = vec_axpy(
            1.0, mat_vec(y_laplace_transform(table, prob.mu, prob.gamma1(), prob.h, s, t_end, sp),
                         prob.c1),
            numeric);
        numeric = vec_axpy(
            1.0, mat_vec(y_laplace_transform(table, prob.mu, prob.gamma2(), prob.h, s, t_end, sp),
                         prob.c2),
            numeric);

        // closed form
        const double p1 = 2.0 * (1.0 - prob.nu) + prob.mu * prob.nu - 1.0;
        Matrix resolvent(d, d);
        {
            Matrix m = mat_scale(std::exp(-s * prob.h), prob.omega);
            m = mat_axpy(1.0, prob.a, m);
            m = mat_axpy(std::pow(s, prob.mu), Matrix::identity(d), m);
            resolvent = mat_inverse(m);
        }
        Vec rhs = mat_vec(mat_scale(std::pow(s, p1), Matrix::identity(d)), prob.c1);
        rhs = vec_axpy(std::pow(s, p1 - 1.0), prob.c2, rhs);
        if (!prob.phi.is_zero()) {
            AdaptiveQuadrature quad(d, qp);
            Vec psi = quad.integrate(
                [&](double t, Vec& out) {
                    out = prob.phi.eval(t - prob.h);
                    const double e = std::exp(-s * t);
                    for (double& v : out) v *= e;
                },
                0.0, prob.h);
            rhs = vec_axpy(-1.0, mat_vec(prob.omega, psi), rhs);
        }
        if (!prob.f.is_zero()) {
            AdaptiveQuadrature quad(d, qp);
            Vec fs = quad.integrate(
                [&](double t, Vec& out) {
                    out = prob.f.eval(t);
                    const double e = std::exp(-s * t);
                    for (double& v : out) v *= e;
                },
                0.0, t_end);
            rhs = vec_axpy(1.0, fs, rhs);
        }
        const Vec closed = mat_vec(resolvent, rhs);
        const double scale = std::max(norm1(closed), 1e-300);
        const double residual = norm1(vec_sub(numeric, closed)) / scale;
        rep.points.emplace_back(s, residual);
        rep.max_residual = std::max(rep.max_residual, residual);
    }
    rep.passed = rep.max_residual <= rep.threshold;
    return rep;
}

/// Classical reference at mu = 2: integrates z'' = -A z - Omega z(t-h) + f
/// segment by segment with fourth-order Runge-Kutta, using the cubic Hermite
/// dense output of earlier segments as the delayed history. c1 = z(0),
/// c2 = z'(0).
inline Trajectory method_of_steps_oracle(const ProblemSpec& prob,
                                         const std::vector<double>& grid,
                                         int steps_per_delay = 2000) {
    validate(prob);
    if (prob.mu != 2.0)
        throw std::invalid_argument("method_of_steps_oracle: requires mu = 2 exactly");
    if (steps_per_delay < 2)
        throw std::invalid_argument("method_of_steps_oracle: steps_per_delay too small");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || grid[i] > prob.T + 1e-12 * prob.T)
            throw std::invalid_argument("method_of_steps_oracle: grid must lie in (0, T]");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("method_of_steps_oracle: grid must be increasing");
    }
    const std::size_t d = prob.dim();
    const double delta = prob.h / steps_per_delay;
    const std::size_t n_steps = static_cast<std::size_t>(std::ceil(prob.T / delta - 1e-12));

    std::vector<Vec> zs, vs;  // positions and velocities at nodes i*delta
    zs.reserve(n_steps + 1);
    vs.reserve(n_steps + 1);
    zs.push_back(prob.c1);
    vs.push_back(prob.c2);

    auto history = [&](double tau) -> Vec {
        if (tau <= 0.0) return prob.phi.eval(std::max(tau, -prob.h));
        std::size_t j = static_cast<std::size_t>(tau / delta);
        if (j >= zs.size() - 1) j = zs.size() - 2;
        const double theta = (tau - j * delta) / delta;
        const double th2 = theta * theta, th3 = th2 * theta;
        const double h00 = 2 * th3 - 3 * th2 + 1, h10 = th3 - 2 * th2 + theta;
        const double h01 = -2 * th3 + 3 * th2, h11 = th3 - th2;
        Vec out(d);
        for (std::size_t c = 0; c < d; ++c)
            out[c] = h00 * zs[j][c] + h10 * delta * vs[j][c] + h01 * zs[j + 1][c] +
                     h11 * delta * vs[j + 1][c];
        return out;
    };
    auto accel = [&](double t, const Vec& z) -> Vec {
        Vec a = prob.f.is_zero() ? Vec(d, 0.0) : prob.f.eval(t);
        const Vec az = mat_vec(prob.a, z);
        const Vec oz = mat_vec(prob.omega, history(t - prob.h));
        for (std::size_t c = 0; c < d; ++c) a[c] -= az[c] + oz[c];
        return a;
    };

    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t = i * delta;
        const Vec &z0 = zs.back(), &v0 = vs.back();
        const Vec a1 = accel(t, z0);
        Vec z1(d), v1(d);
        for (std::size_t c = 0; c < d; ++c) {
            z1[c] = z0[c] + 0.5 * delta * v0[c];
            v1[c] = v0[c] + 0.5 * delta * a1[c];
        }
        const Vec a2 = accel(t + 0.5 * delta, z1);
        Vec z2(d), v2(d);
        for (std::size_t c = 0; c < d; ++c) {
            z2[c] = z0[c] + 0.5 * delta * v1[c];
            v2[c] = v0[c] + 0.5 * delta * a2[c];
        }
        const Vec a3 = accel(t + 0.5 * delta, z2);
        Vec z3(d), v3(d);
        for (std::size_t c = 0; c < d; ++c) {
            z3[c] = z0[c] + delta * v2[c];
            v3[c] = v0[c] + delta * a3[c];
        }
        const Vec a4 = accel(t + delta, z3);
        Vec zn(d), vn(d);
        for (std::size_t c = 0; c < d; ++c) {
            zn[c] = z0[c] + delta / 6.0 * (v0[c] + 2.0 * v1[c] + 2.0 * v2[c] + v3[c]);
            vn[c] = v0[c] + delta / 6.0 * (a1[c] + 2.0 * a2[c] + 2.0 * a3[c] + a4[c]);
        }
        zs.push_back(std::move(zn));
        vs.push_back(std::move(vn));
    }

    Trajectory traj;
    traj.grid = grid;
    traj.breakpoints = delay_breakpoints(prob.h, prob.T);
    traj.values.reserve(grid.size());
    for (double t : grid) traj.values.push_back(history(t));
    return traj;
}

/// Residual of the Caputo-case equation on a uniform trajectory:
///   r(t) = GL[z](t) + A z(t) + Omega z(t-h) - f(t),
/// measured in the 1-norm over [0.2 T, T] at the trajectory step and at half
/// that step (re-solving internally). The report encodes the convergence
/// ratio r(dt/2)/r(dt) as max_residual with threshold 1/required_factor, so
/// passed keeps the "residual <= threshold" reading.
inline VerifyReport residual_check_caputo(const ProblemSpec& prob, const Trajectory& traj,
                                          const SeriesParams& sp = {},
                                          const QuadratureParams& qp = {},
                                          double required_factor = 1.5) {
    validate(prob);
    if (prob.nu != 1.0)
        throw std::invalid_argument("residual_check_caputo: requires nu = 1");
    if (!(prob.mu < 2.0))
        throw std::invalid_argument("residual_check_caputo: requires mu < 2");
    const double dt = detail::uniform_step(traj.grid, "residual_check_caputo");
    if (std::fabs(traj.grid.front() - dt) > 1e-9 * dt)
        throw std::invalid_argument("residual_check_caputo: grid must start at its spacing");
    if (std::fabs(traj.grid.back() - prob.T) > 1e-9 * std::max(1.0, prob.T))
        throw std::invalid_argument("residual_check_caputo: grid must cover (0, T]");
    const double ratio_h = prob.h / dt;
    if (std::fabs(ratio_h - std::round(ratio_h)) > 1e-9)
        throw std::invalid_argument("residual_check_caputo: step must divide the delay h");

    auto max_window_residual = [&](const std::vector<Vec>& z_on_grid, double step) {
        const std::size_t n = z_on_grid.size();  // values at step, 2*step, ..., T
        GridFunction g;
        g.grid.resize(n + 1);
        g.values.resize(n + 1);
        g.grid[0] = 0.0;
        g.values[0] = prob.c1;  // nu = 1: z(0+) = c1
        for (std::size_t i = 0; i < n; ++i) {
            g.grid[i + 1] = (i + 1) * step;
            g.values[i + 1] = z_on_grid[i];
        }
        const GridFunction deriv = gl_caputo_deriv(g, prob.mu, prob.c1, prob.c2);
        const long lag = std::lround(prob.h / step);
        double worst = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            const double t = g.grid[i];
            if (t < 0.2 * prob.T) continue;
            Vec delayed;
            const long di = static_cast<long>(i) - lag;
            if (di <= 0)
                delayed = prob.phi.eval(t - prob.h);
            else
                delayed = g.values[static_cast<std::size_t>(di)];
            Vec r = deriv.values[i];
            r = vec_axpy(1.0, mat_vec(prob.a, g.values[i]), r);
            r = vec_axpy(1.0, mat_vec(prob.omega, delayed), r);
            if (!prob.f.is_zero()) r = vec_axpy(-1.0, prob.f.eval(t), r);
            worst = std::max(worst, norm1(r));
        }
        return worst;
    };

    const double r_coarse = max_window_residual(traj.values, dt);
    const std::size_t n_fine = 2 * traj.grid.size();
    const Trajectory fine =
        solve(prob, linspace_grid(0.5 * dt, prob.T, n_fine), sp, qp);
    const double r_fine = max_window_residual(fine.values, 0.5 * dt);

    VerifyReport rep;
    rep.check_name = "residual-caputo";
    rep.points.emplace_back(dt, r_coarse);
    rep.points.emplace_back(0.5 * dt, r_fine);
    rep.max_residual = r_coarse > 0.0 ? r_fine / r_coarse : 0.0;
    rep.threshold = 1.0 / required_factor;
    rep.passed = rep.max_residual <= rep.threshold;
    return rep;
}

} // namespace fracdelay
