#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/kernel.hpp"
#include "fracdelay/matrix.hpp"
#include "fracdelay/parallel.hpp"
#include "fracdelay/special.hpp"

namespace fracdelay {

/// Truncation control for the double series defining Y.
struct SeriesParams {
    double tol = 1e-12;   // absolute tolerance on the term-norm bound
    int k_extra = 3;      // consecutive sub-tolerance terms required to stop
    int k_hard_max = 400; // absolute cap on the power index k
};

inline void validate(const SeriesParams& p) {
    if (!(p.tol > 0.0)) throw std::invalid_argument("SeriesParams: tol must be > 0");
    if (p.k_extra < 1) throw std::invalid_argument("SeriesParams: k_extra must be >= 1");
    if (p.k_hard_max < p.k_extra)
        throw std::invalid_argument("SeriesParams: k_hard_max must be >= k_extra");
}

/// One evaluation point of Y_{mu,gamma}(A, Omega; t) with delay h.
struct YQuery {
    double mu;
    double gamma;
    double h;
    double t;
};

inline void validate_y_params(double mu, double gamma, double h) {
    if (!(mu > 1.0 && mu <= 2.0))
        throw std::invalid_argument("Y evaluation: mu must lie in (1, 2]");
    if (!(gamma > 0.0))
        throw std::invalid_argument("Y evaluation: gamma must be positive");
    if (!(h > 0.0))
        throw std::invalid_argument("Y evaluation: delay h must be positive");
}

/// Evaluator for the delayed Mittag-Leffler type matrix function
///
///   Y(t) = sum_{m=0..floor(t/h)} sum_{k=m..} (-1)^k Q(k,m)
///          (t - m h)^(k mu + gamma - 1) / Gamma(k mu + gamma),
///
/// over a prebuilt kernel table. Terms with k < m vanish (Q is triangular)
/// and are skipped. Gamma factors for the fixed (mu, gamma) are cached at
/// construction so eval() is const and safe to call concurrently.
///
/// The inner sum stops once the bound |Q(k,m)| * scalar factor has passed
/// its peak and stayed below tol for k_extra consecutive terms; the terms
/// grow before factorial decay of Gamma(k mu + gamma) takes over.
class YEvaluator {
public:
    YEvaluator(const KernelTable& table, double mu, double gamma, double h,
               SeriesParams sp = {})
        : table_(&table), mu_(mu), gamma_(gamma), h_(h), sp_(sp) {
        validate_y_params(mu, gamma, h);
        validate(sp_);
        // one slot past the table depth so the ratio update stays in bounds
        // on the iteration that detects a too-shallow table
        const int depth = table.k_max() + 1;
        lg_.reserve(depth + 1);
        for (int k = 0; k <= depth; ++k) lg_.push_back(log_gamma(k * mu_ + gamma_));
        gamma_ratio_.reserve(depth);
        for (int k = 0; k < depth; ++k) gamma_ratio_.push_back(std::exp(lg_[k] - lg_[k + 1]));
    }

    double mu() const { return mu_; }
    double gamma() const { return gamma_; }
    double h() const { return h_; }
    const KernelTable& table() const { return *table_; }

    Matrix eval(double t) const {
        const std::size_t d = table_->dim();
        if (t < 0.0) return Matrix(d, d);
        if (t == 0.0) {
            if (gamma_ > 1.0) return Matrix(d, d);
            if (gamma_ == 1.0) return Matrix::identity(d);
            throw std::domain_error("Y evaluation: power singularity at t=0 for gamma<1");
        }
        Matrix sum(d, d), comp(d, d);
        for (int m = 0;; ++m) {
            const double tau = t - m * h_;
            // tau == 0 can only happen for m >= 1 here (t > 0), where every
            // exponent k mu + gamma - 1 >= mu + gamma - 1 > 0: nothing to add.
            if (tau <= 0.0) break;
            accumulate_block(m, tau, sum, comp);
        }
        if (!sum.all_finite())
            throw ConvergenceError("Y evaluation: value exceeded double range at t=" +
                                       std::to_string(t),
                                   0.0, 0.0, 0);
        return sum;
    }

private:
    void accumulate_block(int m, double tau, Matrix& sum, Matrix& comp) const {
        if (m > table_->k_max())
            throw std::out_of_range(
                "Y evaluation: kernel table too shallow for delay block m=" +
                std::to_string(m) + " (k_max=" + std::to_string(table_->k_max()) +
                "); rebuild deeper");
        const double log_tau = std::log(tau);
        const double tau_mu = std::exp(mu_ * log_tau);
        // r_k = tau^(k mu + gamma - 1) / Gamma(k mu + gamma), started at k = m
        double r = std::exp((m * mu_ + gamma_ - 1.0) * log_tau - lg_[m]);
        int below = 0;
        double prev_bound = std::numeric_limits<double>::infinity();
        for (int k = m;; ++k) {
            if (k > table_->k_max())
                throw std::out_of_range(
                    "Y evaluation: kernel table too shallow (k_max=" +
                    std::to_string(table_->k_max()) + "); rebuild deeper");
            if (k > sp_.k_hard_max)
                throw ConvergenceError(
                    "Y evaluation: series not converged by k_hard_max at t=" +
                        std::to_string(tau + m * h_) + ", m=" + std::to_string(m),
                    norm_ind1(sum), prev_bound, sp_.k_hard_max);
            const double bound = table_->entry_norm(k, m) * r;
            if (bound != 0.0) {
                const double coef = (k % 2 == 0) ? r : -r;
                const Matrix& q = table_->entry(k, m);
                for (std::size_t i = 0; i < sum.data().size(); ++i) {
                    const double y = coef * q.data()[i] - comp.data()[i];
                    const double s = sum.data()[i] + y;
                    comp.data()[i] = (s - sum.data()[i]) - y;
                    sum.data()[i] = s;
                }
            }
            if (bound < sp_.tol && bound <= prev_bound) {
                if (++below >= sp_.k_extra) return;
            } else {
                below = 0;
            }
            prev_bound = bound;
            r *= tau_mu * gamma_ratio_[k];
        }
    }

    const KernelTable* table_;
    double mu_, gamma_, h_;
    SeriesParams sp_;
    std::vector<double> lg_;
    std::vector<double> gamma_ratio_;
};

inline Matrix y_eval(const KernelTable& table, const YQuery& q, const SeriesParams& p = {}) {
    return YEvaluator(table, q.mu, q.gamma, q.h, p).eval(q.t);
}

inline std::vector<Matrix> y_eval_grid(const KernelTable& table, double mu, double gamma,
                                       double h, const std::vector<double>& grid,
                                       const SeriesParams& p = {}) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("y_eval_grid: grid must be strictly increasing");
    const YEvaluator ev(table, mu, gamma, h, p);
    std::vector<Matrix> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        try {
            out[i] = ev.eval(grid[i]);
        } catch (const std::exception& e) {
            throw std::runtime_error("y_eval_grid: failure at grid point t=" +
                                     std::to_string(grid[i]) + ": " + e.what());
        }
    });
    return out;
}

/// A priori series depth for arguments up to t_max: the k at which the bound
/// rho^k t^(k mu + gamma - 1) / Gamma(k mu + gamma), rho = |A| + |Omega|,
/// has decayed below tol with the stopping margin. Every |Q(k,m)| is bounded
/// by rho^k, so this depth is sufficient for all m at once.
inline int required_table_depth(double rho, double mu, double gamma, double t_max,
                                const SeriesParams& p = {}) {
    validate(p);
    if (!(t_max > 0.0)) return 0;
    const double log_rho = rho > 0.0 ? std::log(rho) : -std::numeric_limits<double>::infinity();
    const double log_t = std::log(t_max);
    int below = 0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= p.k_hard_max; ++k) {
        const double log_bound =
            k * log_rho + (k * mu + gamma - 1.0) * log_t - log_gamma(k * mu + gamma);
        const double bound = std::exp(log_bound);
        if (bound < p.tol * 1e-2 && bound <= prev) {
            if (++below >= p.k_extra) return k;
        } else {
            below = 0;
        }
        prev = bound;
    }
    return p.k_hard_max;
}

namespace detail {

inline int piece_index(double t, double h) {
    // pieces: [-inf,-h) -> -1; [(k-1)h, kh) -> k with k >= 0
    if (t < -h) return -1;
    return static_cast<int>(std::floor(t / h)) + 1;
}

} // namespace detail

/// Fractional delayed matrix cosine: piecewise polynomial of degree 2 k alpha,
///   Theta for t < -h, I on [-h, 0), and on [(k-1)h, kh)
///   sum_{j=0}^{k} (-1)^j Omega^(2j) (t-(j-1)h)^(2 j alpha) / Gamma(2 j alpha + 1).
inline Matrix delayed_cos_frac(const Matrix& omega, double h, double alpha, double t) {
    if (!omega.square())
        throw std::invalid_argument("delayed_cos_frac: omega must be square");
    if (!(h > 0.0)) throw std::invalid_argument("delayed_cos_frac: h must be positive");
    if (!(alpha > 0.5 && alpha <= 1.0))
        throw std::invalid_argument("delayed_cos_frac: alpha must lie in (1/2, 1]");
    const std::size_t d = omega.rows();
    const int piece = detail::piece_index(t, h);
    if (piece < 0) return Matrix(d, d);
    const Matrix omega2 = mat_mul(omega, omega);
    Matrix sum(d, d);
    Matrix pw = Matrix::identity(d);  // Omega^(2j)
    for (int j = 0; j <= piece; ++j) {
        if (j > 0) pw = mat_mul(pw, omega2);
        const double base = t - (j - 1) * h;  // >= 0 on this piece
        const double p = 2.0 * j * alpha;
        double c;
        if (p == 0.0)
            c = 1.0;  // leading piece is exactly I
        else
            c = (base == 0.0) ? 0.0 : std::pow(base, p) / gamma_fn(p + 1.0);
        sum = mat_axpy((j % 2 == 0) ? c : -c, pw, sum);
    }
    return sum;
}

/// Fractional delayed matrix sine: degree (2k+1) alpha pieces with leading
/// term Omega (t+h)^alpha / Gamma(alpha+1); Theta for t < -h.
inline Matrix delayed_sin_frac(const Matrix& omega, double h, double alpha, double t) {
    if (!omega.square())
        throw std::invalid_argument("delayed_sin_frac: omega must be square");
    if (!(h > 0.0)) throw std::invalid_argument("delayed_sin_frac: h must be positive");
    if (!(alpha > 0.5 && alpha <= 1.0))
        throw std::invalid_argument("delayed_sin_frac: alpha must lie in (1/2, 1]");
    const std::size_t d = omega.rows();
    const int piece = detail::piece_index(t, h);
    if (piece < 0) return Matrix(d, d);
    const Matrix omega2 = mat_mul(omega, omega);
    Matrix sum(d, d);
    Matrix pw = omega;  // Omega^(2j+1)
    for (int j = 0; j <= piece; ++j) {
        if (j > 0) pw = mat_mul(pw, omega2);
        const double base = t - (j - 1) * h;
        const double p = (2.0 * j + 1.0) * alpha;
        const double c = (base == 0.0) ? 0.0 : std::pow(base, p) / gamma_fn(p + 1.0);
        sum = mat_axpy((j % 2 == 0) ? c : -c, pw, sum);
    }
    return sum;
}

/// Finite-horizon Laplace transform of Y: integral_0^T e^(-s t) Y(t) dt,
/// summed termwise through regularized lower incomplete gammas,
///   sum_{m,k} (-1)^k Q(k,m) e^(-s m h) s^-(k mu + gamma) P(k mu + gamma, s (T - m h)).
/// Converges for s^mu > |A| + |Omega|; used by the Laplace-domain checks.
inline Matrix y_laplace_transform(const KernelTable& table, double mu, double gamma,
                                  double h, double s, double t_end,
                                  const SeriesParams& p = {}) {
    validate_y_params(mu, gamma, h);
    validate(p);
    if (!(s > 0.0) || !(t_end > 0.0))
        throw std::invalid_argument("y_laplace_transform: s and T must be positive");
    const std::size_t d = table.dim();
    const double log_s = std::log(s);
    Matrix sum(d, d);
    for (int m = 0;; ++m) {
        const double tau = t_end - m * h;
        if (tau <= 0.0) break;
        int below = 0;
        double prev = std::numeric_limits<double>::infinity();
        for (int k = m;; ++k) {
            if (k > table.k_max())
                throw std::out_of_range("y_laplace_transform: kernel table too shallow");
            if (k > p.k_hard_max)
                throw ConvergenceError("y_laplace_transform: series not converged", 0.0, prev,
                                       p.k_hard_max);
            const double a = k * mu + gamma;
            const double factor =
                std::exp(-s * m * h - a * log_s) * lower_gamma_regularized(a, s * tau);
            const double bound = table.entry_norm(k, m) * factor;
            if (bound != 0.0)
                sum = mat_axpy((k % 2 == 0) ? factor : -factor, table.entry(k, m), sum);
            if (bound < p.tol && bound <= prev) {
                if (++below >= p.k_extra) break;
            } else {
                below = 0;
            }
            prev = bound;
        }
    }
    return sum;
}

} // namespace fracdelay
