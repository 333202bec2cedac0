#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/matrix.hpp"

namespace fracdelay {

struct QuadratureParams {
    double qtol = 1e-10;  // absolute tolerance on the whole integral
    int max_depth = 60;   // bisection depth per panel
};

inline void validate(const QuadratureParams& p) {
    if (!(p.qtol > 0.0)) throw std::invalid_argument("QuadratureParams: qtol must be > 0");
    if (p.max_depth < 1) throw std::invalid_argument("QuadratureParams: max_depth must be >= 1");
}

namespace detail {

// 16-point Gauss-Legendre on [-1, 1], symmetric halves.
inline constexpr double kGL16Nodes[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499,
};
inline constexpr double kGL16Weights[8] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541,
};

} // namespace detail

/// Adaptive composite 16-point Gauss-Legendre for vector-valued integrands.
/// Panels are seeded at the supplied breakpoints, then bisected until the
/// local two-half refinement difference fits a budget proportional to
/// sqrt(panel length / total length); integrable endpoint behaviour then
/// resolves in depth proportional to log of the tolerance.
class AdaptiveQuadrature {
public:
    using Integrand = std::function<void(double, Vec&)>;

    AdaptiveQuadrature(std::size_t dim, QuadratureParams params)
        : dim_(dim), params_(params) {
        validate(params_);
        if (dim == 0) throw std::invalid_argument("AdaptiveQuadrature: dim must be positive");
    }

    /// Integrates over [a, b]; interior breakpoints split the initial panels.
    /// Returns the value; achieved_error() reports the accumulated estimate.
    Vec integrate(const Integrand& f, double a, double b,
                  const std::vector<double>& breakpoints = {}) {
        achieved_error_ = 0.0;
        Vec total(dim_, 0.0);
        if (a == b) return total;
        if (a > b) throw std::invalid_argument("AdaptiveQuadrature: reversed interval");
        std::vector<double> cuts{a, b};
        for (double c : breakpoints)
            if (c > a && c < b) cuts.push_back(c);
        std::sort(cuts.begin(), cuts.end());
        total_length_ = b - a;
        Vec scratch(dim_, 0.0);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i + 1] - cuts[i] <= 0.0) continue;
            Vec coarse = gauss16(f, cuts[i], cuts[i + 1], scratch);
            refine(f, cuts[i], cuts[i + 1], coarse, 0, total, scratch);
        }
        return total;
    }

    double achieved_error() const { return achieved_error_; }

private:
    Vec gauss16(const Integrand& f, double a, double b, Vec& fx) const {
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        Vec acc(dim_, 0.0);
        for (int i = 0; i < 8; ++i) {
            const double off = half * detail::kGL16Nodes[i];
            f(mid + off, fx);
            for (std::size_t j = 0; j < dim_; ++j)
                acc[j] += detail::kGL16Weights[i] * fx[j];
            f(mid - off, fx);
            for (std::size_t j = 0; j < dim_; ++j)
                acc[j] += detail::kGL16Weights[i] * fx[j];
        }
        for (std::size_t j = 0; j < dim_; ++j) acc[j] *= half;
        return acc;
    }

    void refine(const Integrand& f, double a, double b, const Vec& coarse, int depth,
                Vec& total, Vec& scratch) {
        const double mid = 0.5 * (a + b);
        Vec left = gauss16(f, a, mid, scratch);
        Vec right = gauss16(f, mid, b, scratch);
        double diff = 0.0;
        for (std::size_t j = 0; j < dim_; ++j)
            diff = std::max(diff, std::fabs(left[j] + right[j] - coarse[j]));
        const double budget =
            0.25 * params_.qtol * std::sqrt((b - a) / total_length_);
        if (diff <= budget || mid <= a || mid >= b) {
            for (std::size_t j = 0; j < dim_; ++j) total[j] += left[j] + right[j];
            achieved_error_ += diff;
            return;
        }
        if (depth >= params_.max_depth)
            throw ConvergenceError(
                "AdaptiveQuadrature: refinement stalled; achieved difference " +
                    std::to_string(diff) + " over panel of length " + std::to_string(b - a),
                diff, diff, depth);
        refine(f, a, mid, left, depth + 1, total, scratch);
        refine(f, mid, b, right, depth + 1, total, scratch);
    }

    std::size_t dim_;
    QuadratureParams params_;
    double total_length_ = 1.0;
    double achieved_error_ = 0.0;
};

/// Scalar convenience wrapper.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 const QuadratureParams& params,
                                 const std::vector<double>& breakpoints = {},
                                 double* achieved = nullptr) {
    AdaptiveQuadrature q(1, params);
    Vec fx(1);
    const Vec v = q.integrate(
        [&](double t, Vec& out) { out[0] = f(t); }, a, b, breakpoints);
    if (achieved != nullptr) *achieved = q.achieved_error();
    return v[0];
}

} // namespace fracdelay
