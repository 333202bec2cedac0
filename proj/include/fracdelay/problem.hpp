#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracdelay/function_spec.hpp"
#include "fracdelay/matrix.hpp"

namespace fracdelay {

/// Full initial value problem data for
///   D^{mu,nu} z(t) + A z(t) + Omega z(t-h) = f(t),   t in (0, T],
///   z(t) = phi(t) on [-h, 0],
/// with the two initial vectors c1, c2 multiplying the homogeneous solution
/// kernels Y_{mu,(mu-2)(1-nu)+1} and Y_{mu,(mu-2)(1-nu)+2}. Formally these
/// coefficients are fractional-integral limits of z at 0; with lower limit 0
/// such limits vanish for every continuous function, so they enter the
/// solution formula as free initial data and are supplied directly.
struct ProblemSpec {
    double mu = 1.5;
    double nu = 1.0;
    double h = 1.0;
    double T = 1.0;
    Matrix a;
    Matrix omega;
    Vec c1, c2;
    FunctionSpec phi;  // on [-h, 0]
    FunctionSpec f;    // on [0, T]

    std::size_t dim() const { return a.rows(); }
    double gamma1() const { return (mu - 2.0) * (1.0 - nu) + 1.0; }
    double gamma2() const { return gamma1() + 1.0; }
};

inline void validate(const ProblemSpec& p) {
    if (!(p.mu > 1.0 && p.mu <= 2.0))
        throw std::invalid_argument("ProblemSpec: mu must lie in (1, 2]");
    if (!(p.nu >= 0.0 && p.nu <= 1.0))
        throw std::invalid_argument("ProblemSpec: nu must lie in [0, 1]");
    if (!(p.h > 0.0)) throw std::invalid_argument("ProblemSpec: h must be positive");
    if (!(p.T > 0.0)) throw std::invalid_argument("ProblemSpec: T must be positive");
    if (!p.a.square() || !p.omega.square() || p.a.rows() != p.omega.rows())
        throw std::invalid_argument("ProblemSpec: A and Omega must be square of equal dimension");
    const std::size_t d = p.a.rows();
    if (p.c1.size() != d || p.c2.size() != d)
        throw std::invalid_argument("ProblemSpec: c1 and c2 must have length d");
    for (double v : p.c1)
        if (!std::isfinite(v)) throw std::invalid_argument("ProblemSpec: c1 must be finite");
    for (double v : p.c2)
        if (!std::isfinite(v)) throw std::invalid_argument("ProblemSpec: c2 must be finite");
    if (p.phi.dim != d) throw std::invalid_argument("ProblemSpec: phi dimension mismatch");
    if (p.f.dim != d) throw std::invalid_argument("ProblemSpec: f dimension mismatch");
    validate(p.phi, "phi");
    validate(p.f, "f");
}

/// Solution samples plus the delay breakpoints inside (0, T], kept for
/// quadrature splitting and plotting.
struct Trajectory {
    std::vector<double> grid;
    std::vector<Vec> values;
    std::vector<double> breakpoints;
};

/// Multiples of h in (0, t_end].
inline std::vector<double> delay_breakpoints(double h, double t_end) {
    std::vector<double> out;
    for (int m = 1; m * h <= t_end; ++m) out.push_back(m * h);
    return out;
}

/// n equally spaced points from t_min to t_end inclusive.
inline std::vector<double> linspace_grid(double t_min, double t_end, std::size_t n) {
    if (n == 0) throw std::invalid_argument("linspace_grid: n must be positive");
    std::vector<double> g(n);
    if (n == 1) {
        g[0] = t_end;
        return g;
    }
    const double step = (t_end - t_min) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = t_min + step * static_cast<double>(i);
    g.back() = t_end;
    return g;
}

} // namespace fracdelay
