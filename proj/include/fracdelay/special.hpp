#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include "fracdelay/errors.hpp"
#include "fracdelay/matrix.hpp"

namespace fracdelay {

/// Compensated (Kahan) accumulator. All series in this header and in the
/// delayed Mittag-Leffler evaluator accumulate through one of these: the
/// sums alternate with large intermediate terms.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

/// log Gamma(x), x > 0. Lanczos approximation, g = 7, 9 terms.
inline double log_gamma(double x) {
    if (!(x > 0.0))
        throw std::domain_error("log_gamma: argument must be positive");
    static const double c[9] = {
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    };
    // shift into x >= 1 where the fit is direct
    double shift = 0.0;
    while (x < 1.0) {
        shift -= std::log(x);
        x += 1.0;
    }
    const double z = x - 1.0;
    double acc = c[0];
    for (int i = 1; i < 9; ++i) acc += c[i] / (z + i);
    const double t = z + 7.5;
    static const double half_log_two_pi = 0.91893853320467274178;
    return shift + half_log_two_pi + (z + 0.5) * std::log(t) - t + std::log(acc);
}

/// Gamma(x), x > 0, to at least 12 significant digits.
inline double gamma_fn(double x) {
    if (!(x > 0.0))
        throw std::domain_error("gamma_fn: argument must be positive");
    if (x > 140.0)
        return std::exp(log_gamma(x));  // avoid premature overflow of t^(x+1/2)
    static const double c[9] = {
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    };
    double prefactor = 1.0;
    while (x < 1.0) {
        prefactor /= x;
        x += 1.0;
    }
    const double z = x - 1.0;
    double acc = c[0];
    for (int i = 1; i < 9; ++i) acc += c[i] / (z + i);
    const double t = z + 7.5;
    static const double sqrt_two_pi = 2.5066282746310005024;
    return prefactor * sqrt_two_pi * std::pow(t, z + 0.5) * std::exp(-t) * acc;
}

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a),
/// a > 0, x >= 0. Series for x < a+1, continued fraction otherwise.
inline double lower_gamma_regularized(double a, double x) {
    if (!(a > 0.0))
        throw std::domain_error("lower_gamma_regularized: a must be positive");
    if (x < 0.0)
        throw std::domain_error("lower_gamma_regularized: x must be nonnegative");
    if (x == 0.0) return 0.0;
    const double log_scale = a * std::log(x) - x - log_gamma(a);
    if (x < a + 1.0) {
        // series: P = x^a e^-x / Gamma(a) * sum x^n / (a (a+1) ... (a+n))
        double term = 1.0 / a;
        KahanSum sum;
        sum.add(term);
        for (int n = 1; n < 10000; ++n) {
            term *= x / (a + n);
            sum.add(term);
            if (std::fabs(term) < std::fabs(sum.value()) * 1e-16)
                return sum.value() * std::exp(log_scale);
        }
        throw ConvergenceError("lower_gamma_regularized: series stalled", sum.value(), term,
                               10000);
    }
    // Lentz continued fraction for Q(a, x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double frac = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        frac *= delta;
        if (std::fabs(delta - 1.0) < 1e-16)
            return 1.0 - std::exp(log_scale) * frac;
    }
    throw ConvergenceError("lower_gamma_regularized: continued fraction stalled", frac, 0.0, 10000);
}

/// Parameters of the two-parameter Mittag-Leffler series
/// E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta).
/// Valid at double precision for |z| up to roughly 50; the callers keep
/// arguments well inside that budget.
struct MLParams {
    double alpha;
    double beta;
    int max_terms = 400;
    double tol = 1e-14;  // absolute truncation tolerance on term magnitude
};

inline void validate(const MLParams& p) {
    if (!(p.alpha > 0.0)) throw std::invalid_argument("MLParams: alpha must be > 0");
    if (!(p.beta > 0.0)) throw std::invalid_argument("MLParams: beta must be > 0");
    if (!(p.tol > 0.0)) throw std::invalid_argument("MLParams: tol must be > 0");
    if (p.max_terms < 1) throw std::invalid_argument("MLParams: max_terms must be >= 1");
}

/// Scalar two-parameter Mittag-Leffler function.
/// Stops once the term magnitude has passed its peak and stayed below tol.
inline double ml2(const MLParams& p, double z) {
    validate(p);
    KahanSum acc;
    double term = 1.0 / gamma_fn(p.beta);
    acc.add(term);
    double prev_mag = std::fabs(term);
    int below = 0;
    double lg_prev = log_gamma(p.beta);
    for (int k = 1; k <= p.max_terms; ++k) {
        const double lg_next = log_gamma(p.alpha * k + p.beta);
        term *= z * std::exp(lg_prev - lg_next);
        lg_prev = lg_next;
        acc.add(term);
        const double mag = std::fabs(term);
        if (mag < p.tol && mag <= prev_mag) {
            if (++below >= 2) return acc.value();
        } else {
            below = 0;
        }
        prev_mag = mag;
    }
    throw ConvergenceError("ml2: series did not converge within max_terms",
                           acc.value(), prev_mag, p.max_terms);
}

/// Matrix Mittag-Leffler: sum_k m^k t_pow^k / Gamma(alpha k + beta).
/// Same truncation rule as ml2, on the induced 1-norm of the term.
inline Matrix ml2_matrix(const MLParams& p, const Matrix& m, double t_pow) {
    validate(p);
    if (!m.square())
        throw std::invalid_argument("ml2_matrix: matrix must be square");
    const std::size_t d = m.rows();
    Matrix sum(d, d), comp(d, d);
    auto accumulate = [&](const Matrix& term) {
        for (std::size_t i = 0; i < d * d; ++i) {
            const double y = term.data()[i] - comp.data()[i];
            const double t = sum.data()[i] + y;
            comp.data()[i] = (t - sum.data()[i]) - y;
            sum.data()[i] = t;
        }
    };
    Matrix term = mat_scale(1.0 / gamma_fn(p.beta), Matrix::identity(d));
    accumulate(term);
    double prev_mag = norm_ind1(term);
    double lg_prev = log_gamma(p.beta);
    int below = 0;
    for (int k = 1; k <= p.max_terms; ++k) {
        const double lg_next = log_gamma(p.alpha * k + p.beta);
        term = mat_scale(t_pow * std::exp(lg_prev - lg_next), mat_mul(term, m));
        lg_prev = lg_next;
        if (!term.all_finite())
            throw ConvergenceError("ml2_matrix: term exceeded double range",
                                   norm_ind1(sum), prev_mag, k);
        accumulate(term);
        const double mag = norm_ind1(term);
        if (mag < p.tol && mag <= prev_mag) {
            if (++below >= 2) return sum;
        } else {
            below = 0;
        }
        prev_mag = mag;
    }
    throw ConvergenceError("ml2_matrix: series did not converge within max_terms",
                           norm_ind1(sum), prev_mag, p.max_terms);
}

} // namespace fracdelay
