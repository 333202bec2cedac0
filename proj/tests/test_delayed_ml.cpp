#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "fracdelay/delayed_ml.hpp"
#include "fracdelay/quadrature.hpp"
#include "fracdelay/special.hpp"
#include "test_util.hpp"

using fracdelay::delayed_cos_frac;
using fracdelay::delayed_sin_frac;
using fracdelay::kernel_build;
using fracdelay::KernelTable;
using fracdelay::Matrix;
using fracdelay::ml2_matrix;
using fracdelay::MLParams;
using fracdelay::required_table_depth;
using fracdelay::SeriesParams;
using fracdelay::y_eval;
using fracdelay::y_eval_grid;
using fracdelay::YEvaluator;
using fracdelay::YQuery;

namespace {

KernelTable make_table(const Matrix& a, const Matrix& omega, double mu, double gamma,
                       double t_max, const SeriesParams& sp = {}) {
    const double rho = norm_ind1(a) + norm_ind1(omega);
    return kernel_build(a, omega, required_table_depth(rho, mu, gamma, t_max, sp));
}

// direct evaluation of the pure-delay series sum_m (-1)^m W^m (t-mh)_+^(m mu + g - 1) / Gamma(m mu + g)
// with stdlib gamma, independent of the Y series path
Matrix pure_delay_reference(const Matrix& w, double mu, double gamma, double h, double t) {
    const std::size_t d = w.rows();
    Matrix sum(d, d);
    Matrix wpow = Matrix::identity(d);
    for (int m = 0;; ++m) {
        const double tau = t - m * h;
        if (tau < 0.0) break;
        const double p = m * mu + gamma - 1.0;
        double factor;
        if (tau == 0.0)
            factor = (p == 0.0) ? 1.0 / std::tgamma(gamma) : 0.0;
        else
            factor = std::pow(tau, p) / std::tgamma(m * mu + gamma);
        sum = mat_axpy((m % 2 == 0) ? factor : -factor, wpow, sum);
        wpow = mat_mul(w, wpow);
    }
    return sum;
}

const Matrix kA2{{0.9, 0.3}, {-0.2, 0.6}};
const Matrix kOmega2{{0.3, 0.1}, {0.0, 0.2}};

} // namespace

TEST(YEval, ScalarTwoTermExample) {
    // d=1, A=0, Omega=1, mu=1.5, gamma=1, h=1, t=1.5:
    // 1 - 0.5^1.5 / Gamma(2.5)
    const KernelTable table = kernel_build(Matrix(1, 1), Matrix{{1.0}}, 10);
    const Matrix y = y_eval(table, YQuery{1.5, 1.0, 1.0, 1.5});
    EXPECT_NEAR(y(0, 0), 0.73403847973237821, 1e-12);
}

TEST(YEval, SupportAndOrigin) {
    const KernelTable table = make_table(kA2, kOmega2, 1.5, 1.0, 2.0);
    EXPECT_EQ(norm_ind1(y_eval(table, YQuery{1.5, 1.0, 1.0, -0.5})), 0.0);
    EXPECT_EQ(norm_ind1(y_eval(table, YQuery{1.5, 2.5, 1.0, -1e-12})), 0.0);
    // gamma = 1 at t = 0: only the k=0, m=0 term with exponent 0 survives
    EXPECT_EQ(testutil::max_abs_diff(y_eval(table, YQuery{1.5, 1.0, 1.0, 0.0}),
                                     Matrix::identity(2)),
              0.0);
    EXPECT_EQ(norm_ind1(y_eval(table, YQuery{1.5, 1.7, 1.0, 0.0})), 0.0);
    EXPECT_THROW(y_eval(table, YQuery{1.5, 0.7, 1.0, 0.0}), std::domain_error);
}

TEST(YEval, ParameterValidation) {
    const KernelTable table = kernel_build(Matrix(1, 1), Matrix(1, 1), 2);
    EXPECT_THROW(y_eval(table, YQuery{1.0, 1.0, 1.0, 0.5}), std::invalid_argument);
    EXPECT_THROW(y_eval(table, YQuery{2.1, 1.0, 1.0, 0.5}), std::invalid_argument);
    EXPECT_THROW(y_eval(table, YQuery{1.5, 0.0, 1.0, 0.5}), std::invalid_argument);
    EXPECT_THROW(y_eval(table, YQuery{1.5, 1.0, 0.0, 0.5}), std::invalid_argument);
}

TEST(YEval, NoDelayReducesToMittagLeffler) {
    // Omega = 0: Y(t) = t^(gamma-1) E_{mu,gamma}(-A t^mu), for t in (0, h) and beyond
    for (double mu : {1.25, 1.6, 2.0}) {
        for (double gamma : {0.8, 1.0, mu}) {
            const KernelTable table = make_table(kA2, Matrix(2, 2), mu, gamma, 3.0);
            for (double t : {0.4, 1.0, 2.7}) {
                const Matrix y = y_eval(table, YQuery{mu, gamma, 1.0, t});
                const Matrix ref = fracdelay::mat_scale(
                    std::pow(t, gamma - 1.0),
                    ml2_matrix(MLParams{mu, gamma, 400, 1e-15},
                               fracdelay::mat_scale(-1.0, kA2), std::pow(t, mu)));
                EXPECT_LT(testutil::rel_diff(y, ref), 1e-11)
                    << "mu=" << mu << " gamma=" << gamma << " t=" << t;
            }
        }
    }
}

TEST(YEval, ClassicalCosineAtMuTwo) {
    // mu=2, gamma=1, A -> A^2, Omega=0: Y = cos(A t)
    const Matrix a{{1.0, 0.0}, {0.0, 2.0}};
    const Matrix a2 = mat_mul(a, a);
    const KernelTable table = make_table(a2, Matrix(2, 2), 2.0, 1.0, 1.5);
    const Matrix y = y_eval(table, YQuery{2.0, 1.0, 1.0, 1.0});
    EXPECT_NEAR(y(0, 0), std::cos(1.0), 1e-12);
    EXPECT_NEAR(y(1, 1), std::cos(2.0), 1e-12);
    EXPECT_NEAR(y(0, 1), 0.0, 1e-14);
}

TEST(YEval, PureDelayIdentity) {
    // A = 0: Y(0, W; t) collapses to the single-sum delayed series
    const Matrix w = mat_mul(kOmega2, kOmega2);
    const double h = 0.7;
    for (double mu : {1.3, 1.7}) {
        const KernelTable table = make_table(Matrix(2, 2), w, mu, 1.0, 3.0);
        for (double t = 0.05; t < 2.9; t += 0.13) {
            const Matrix y = y_eval(table, YQuery{mu, 1.0, h, t});
            const Matrix ref = pure_delay_reference(w, mu, 1.0, h, t);
            EXPECT_LT(testutil::max_abs_diff(y, ref), 1e-10) << "t=" << t;
        }
    }
}

TEST(DelayedCosFrac, PiecewiseBaseCases) {
    const double h = 0.8;
    EXPECT_EQ(norm_ind1(delayed_cos_frac(kOmega2, h, 0.7, -h - 0.01)), 0.0);
    for (double t : {-h, -0.5, -1e-9})
        EXPECT_EQ(testutil::max_abs_diff(delayed_cos_frac(kOmega2, h, 0.7, t),
                                         Matrix::identity(2)),
                  0.0)
            << "t=" << t;
}

TEST(DelayedCosFrac, ClassicalLimitFirstPiece) {
    // alpha = 1, scalar omega, t in [0, h): 1 - w^2 t^2 / 2
    const Matrix w{{0.9}};
    const double h = 1.0;
    for (double t : {0.0, 0.3, 0.99}) {
        const Matrix c = delayed_cos_frac(w, h, 1.0, t);
        EXPECT_NEAR(c(0, 0), 1.0 - 0.81 * t * t / 2.0, 1e-14) << "t=" << t;
    }
}

TEST(DelayedSinFrac, LeadingPieceAndClassicalLimit) {
    const double h = 0.6;
    const double alpha = 0.8;
    for (double t : {-h, -0.3, -1e-6}) {
        const Matrix s = delayed_sin_frac(kOmega2, h, alpha, t);
        const Matrix expected = fracdelay::mat_scale(
            std::pow(t + h, alpha) / std::tgamma(alpha + 1.0), kOmega2);
        EXPECT_LT(testutil::max_abs_diff(s, expected), 1e-14) << "t=" << t;
    }
    EXPECT_EQ(norm_ind1(delayed_sin_frac(kOmega2, h, alpha, -h - 1e-9)), 0.0);
    // alpha = 1, t in [0, h): Omega (t+h) - Omega^3 t^3/6
    const Matrix w{{0.9}};
    for (double t : {0.0, 0.2, 0.55}) {
        const Matrix s = delayed_sin_frac(w, 0.6, 1.0, t);
        EXPECT_NEAR(s(0, 0), 0.9 * (t + 0.6) - std::pow(0.9, 3) * t * t * t / 6.0, 1e-14);
    }
}

TEST(DelayedCosSin, AlphaDomain) {
    EXPECT_THROW(delayed_cos_frac(kOmega2, 1.0, 0.5, 0.3), std::invalid_argument);
    EXPECT_THROW(delayed_cos_frac(kOmega2, 1.0, 1.01, 0.3), std::invalid_argument);
    EXPECT_THROW(delayed_sin_frac(kOmega2, 0.0, 0.8, 0.3), std::invalid_argument);
}

TEST(DelayedCosFrac, ShiftRelationToY) {
    // cos piece structure equals Y(0, Omega^2; t+h) with mu = 2 alpha, gamma = 1
    const double h = 0.9;
    const Matrix w2 = mat_mul(kOmega2, kOmega2);
    for (double alpha : {0.6, 0.8, 1.0}) {
        const double mu = 2.0 * alpha;
        const KernelTable table = make_table(Matrix(2, 2), w2, mu, 1.0, 4.0 * h + 0.1);
        for (int i = 0; i < 50; ++i) {
            const double t = -h + 4.0 * h * i / 49.0;
            const Matrix lhs = delayed_cos_frac(kOmega2, h, alpha, t);
            const Matrix rhs = y_eval(table, YQuery{mu, 1.0, h, t + h});
            EXPECT_LT(testutil::max_abs_diff(lhs, rhs), 1e-10)
                << "alpha=" << alpha << " t=" << t;
        }
    }
}

TEST(DelayedSinFrac, ShiftRelationToY) {
    // Omega * Y(0, Omega^2; t+h) with gamma = alpha+1 reproduces the sine pieces
    const double h = 0.9;
    const Matrix w2 = mat_mul(kOmega2, kOmega2);
    for (double alpha : {0.6, 1.0}) {
        const double mu = 2.0 * alpha;
        const KernelTable table = make_table(Matrix(2, 2), w2, mu, alpha + 1.0, 4.0 * h + 0.1);
        for (int i = 0; i < 25; ++i) {
            const double t = -h + 4.0 * h * i / 24.0;
            const Matrix lhs = delayed_sin_frac(kOmega2, h, alpha, t);
            const Matrix rhs =
                mat_mul(kOmega2, y_eval(table, YQuery{mu, alpha + 1.0, h, t + h}));
            EXPECT_LT(testutil::max_abs_diff(lhs, rhs), 1e-10)
                << "alpha=" << alpha << " t=" << t;
        }
    }
}

TEST(YEval, DerivativeLadder) {
    // d/dt Y_{mu,gamma+1} = Y_{mu,gamma} away from breakpoints
    const double mu = 1.6, h = 1.0;
    SeriesParams sp;
    sp.tol = 1e-13;
    const KernelTable table = make_table(kA2, kOmega2, mu, 1.0, 3.0, sp);
    const YEvaluator y_lo(table, mu, 1.0, h, sp);
    const YEvaluator y_hi(table, mu, 2.0, h, sp);
    const double step = 1e-5;
    for (double t = 0.11; t < 2.9; t += 0.145) {
        if (std::fabs(t - std::round(t / h) * h) < 1e-2) continue;
        const Matrix diff = fracdelay::mat_scale(
            1.0 / (2.0 * step),
            mat_axpy(-1.0, y_hi.eval(t - step), y_hi.eval(t + step)));
        EXPECT_LT(testutil::max_abs_diff(diff, y_lo.eval(t)), 1e-6) << "t=" << t;
    }
}

TEST(YEvalGrid, SupportAndConsistency) {
    const KernelTable table = make_table(kA2, kOmega2, 1.5, 1.0, 3.0);
    const std::vector<double> below{-2.0, -1.0, -0.1};
    for (const Matrix& m : y_eval_grid(table, 1.5, 1.0, 1.0, below))
        EXPECT_EQ(norm_ind1(m), 0.0);
    const std::vector<double> single{1.3};
    const auto out = y_eval_grid(table, 1.5, 1.0, 1.0, single);
    EXPECT_EQ(testutil::max_abs_diff(out[0], y_eval(table, YQuery{1.5, 1.0, 1.0, 1.3})), 0.0);
    EXPECT_THROW(y_eval_grid(table, 1.5, 1.0, 1.0, std::vector<double>{1.0, 1.0}),
                 std::invalid_argument);
}

TEST(YEvalGrid, ContinuityAcrossBreakpoint) {
    const KernelTable table = make_table(kA2, kOmega2, 1.5, 1.0, 1.5);
    const double h = 1.0;
    const std::vector<double> pair{h - 1e-8, h + 1e-8};
    const auto out = y_eval_grid(table, 1.5, 1.0, h, pair);
    EXPECT_LT(testutil::max_abs_diff(out[0], out[1]), 1e-6);
}

TEST(YEvalGrid, ErrorNamesOffendingPoint) {
    const KernelTable table = make_table(kA2, kOmega2, 1.5, 0.5, 3.0);
    try {
        y_eval_grid(table, 1.5, 0.5, 1.0, std::vector<double>{0.0, 1.0});
        FAIL() << "expected failure at the singular point";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("0.0"), std::string::npos);
    }
}

TEST(YEval, TruncationSoundness) {
    SeriesParams coarse;
    coarse.tol = 1e-10;
    SeriesParams fine;
    fine.tol = 5e-11;
    fine.k_hard_max = 800;
    const double rho = norm_ind1(kA2) + norm_ind1(kOmega2);
    const KernelTable table =
        kernel_build(kA2, kOmega2, required_table_depth(rho, 1.4, 1.0, 3.0, fine));
    for (double t : {0.5, 1.5, 2.9}) {
        const Matrix a = y_eval(table, YQuery{1.4, 1.0, 1.0, t}, coarse);
        const Matrix b = y_eval(table, YQuery{1.4, 1.0, 1.0, t}, fine);
        EXPECT_LT(testutil::max_abs_diff(a, b), 10.0 * coarse.tol) << "t=" << t;
    }
}

TEST(YEval, HardCapRaisesConvergenceError) {
    SeriesParams sp;
    sp.k_hard_max = 4;
    sp.k_extra = 1;
    sp.tol = 1e-30;
    const KernelTable table = kernel_build(kA2, kOmega2, 40);
    EXPECT_THROW(y_eval(table, YQuery{1.5, 1.0, 1.0, 2.5}, sp), fracdelay::ConvergenceError);
}

TEST(YEval, ShallowTableRaises) {
    const KernelTable table = kernel_build(kA2, kOmega2, 2);
    EXPECT_THROW(y_eval(table, YQuery{1.5, 1.0, 1.0, 2.5}), std::out_of_range);
}

TEST(YLaplace, PairAgainstResolvent) {
    // quadrature of e^{-st} Y(t) against s^{mu-gamma} (s^mu I + A + Omega e^{-hs})^{-1}
    const double mu = 1.5, h = 1.0;
    const double rho = norm_ind1(kA2) + norm_ind1(kOmega2);
    const double margin = 2.0 * std::pow(rho, 1.0 / mu);
    const double t_end = 4.0;
    SeriesParams sp;
    const KernelTable table =
        kernel_build(kA2, kOmega2, required_table_depth(rho, mu, 1.0, t_end, sp));
    for (double gamma : {1.0, mu}) {
        const YEvaluator ev(table, mu, gamma, h, sp);
        for (int j = 0; j < 5; ++j) {
            const double s = std::max(margin + 1.0, 8.0) + 2.0 * j;
            // tail bound e^{-s T} * growth(T) stays below 1e-8 of the value here
            fracdelay::AdaptiveQuadrature quad(4, fracdelay::QuadratureParams{1e-11, 60});
            fracdelay::Vec flat = quad.integrate(
                [&](double t, fracdelay::Vec& out) {
                    const Matrix y = ev.eval(t);
                    const double e = std::exp(-s * t);
                    for (std::size_t i = 0; i < 4; ++i) out[i] = e * y.data()[i];
                },
                0.0, t_end, {h, 2.0 * h, 3.0 * h});
            Matrix numeric(2, 2, std::vector<double>(flat.begin(), flat.end()));
            Matrix m = fracdelay::mat_scale(std::exp(-s * h), kOmega2);
            m = mat_axpy(1.0, kA2, m);
            m = mat_axpy(std::pow(s, mu), Matrix::identity(2), m);
            const Matrix closed =
                fracdelay::mat_scale(std::pow(s, mu - gamma), fracdelay::mat_inverse(m));
            EXPECT_LT(testutil::rel_diff(numeric, closed), 1e-4)
                << "gamma=" << gamma << " s=" << s;
        }
    }
}

TEST(YLaplace, TermwiseTransformMatchesQuadrature) {
    const double mu = 1.4, h = 0.8, gamma = mu, t_end = 3.0;
    const double rho = norm_ind1(kA2) + norm_ind1(kOmega2);
    SeriesParams sp;
    sp.tol = 1e-14;
    const KernelTable table =
        kernel_build(kA2, kOmega2, required_table_depth(rho, mu, gamma, t_end, sp));
    const YEvaluator ev(table, mu, gamma, h, sp);
    for (double s : {4.0, 7.0}) {
        fracdelay::AdaptiveQuadrature quad(4, fracdelay::QuadratureParams{1e-12, 60});
        fracdelay::Vec flat = quad.integrate(
            [&](double t, fracdelay::Vec& out) {
                const Matrix y = ev.eval(t);
                const double e = std::exp(-s * t);
                for (std::size_t i = 0; i < 4; ++i) out[i] = e * y.data()[i];
            },
            0.0, t_end, {h, 2.0 * h});
        const Matrix by_quadrature(2, 2, std::vector<double>(flat.begin(), flat.end()));
        const Matrix termwise =
            fracdelay::y_laplace_transform(table, mu, gamma, h, s, t_end, sp);
        EXPECT_LT(testutil::max_abs_diff(by_quadrature, termwise), 1e-8) << "s=" << s;
    }
}

TEST(YEval, PropertyRandomPairsSupportAndLadder) {
    // randomized sweep: causal support, identity at the origin, and the
    // derivative ladder d/dt Y_(g+1) = Y_g for arbitrary kernel pairs
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> mu_dist(1.1, 2.0);
    std::uniform_real_distribution<double> h_dist(0.5, 1.4);
    std::uniform_real_distribution<double> t_dist(0.05, 2.6);
    SeriesParams sp;
    sp.tol = 1e-13;
    for (int trial = 0; trial < 6; ++trial) {
        const Matrix a = testutil::random_matrix(rng, 2, -0.8, 0.8);
        const Matrix omega = testutil::random_matrix(rng, 2, -0.5, 0.5);
        const double mu = mu_dist(rng);
        const double h = h_dist(rng);
        const double rho = norm_ind1(a) + norm_ind1(omega);
        const KernelTable table =
            kernel_build(a, omega, required_table_depth(rho, mu, 1.0, 3.0, sp));
        const YEvaluator y_lo(table, mu, 1.0, h, sp);
        const YEvaluator y_hi(table, mu, 2.0, h, sp);
        EXPECT_EQ(norm_ind1(y_lo.eval(-t_dist(rng))), 0.0);
        EXPECT_EQ(testutil::max_abs_diff(y_lo.eval(0.0), Matrix::identity(2)), 0.0);
        const double step = 1e-5;
        for (int pt = 0; pt < 3; ++pt) {
            double t = t_dist(rng);
            if (std::fabs(t - std::round(t / h) * h) < 5e-2) t += 0.07;
            const Matrix diff = fracdelay::mat_scale(
                1.0 / (2.0 * step),
                mat_axpy(-1.0, y_hi.eval(t - step), y_hi.eval(t + step)));
            EXPECT_LT(testutil::max_abs_diff(diff, y_lo.eval(t)), 1e-6)
                << "trial=" << trial << " t=" << t;
        }
    }
}

TEST(YEval, PropertyTruncationSoundnessAcrossTypes) {
    // the kernels the solver uses: gamma in {g1, g1+1, mu} for random types
    std::mt19937 rng(11011);
    std::uniform_real_distribution<double> nu_dist(0.0, 1.0);
    for (double mu : {1.3, 1.75}) {
        const double nu = nu_dist(rng);
        const double g1 = (mu - 2.0) * (1.0 - nu) + 1.0;
        SeriesParams coarse;
        coarse.tol = 1e-10;
        SeriesParams fine;
        fine.tol = 5e-11;
        fine.k_hard_max = 800;
        const double rho = norm_ind1(kA2) + norm_ind1(kOmega2);
        for (double gamma : {g1, g1 + 1.0, mu}) {
            const KernelTable table =
                kernel_build(kA2, kOmega2, required_table_depth(rho, mu, gamma, 3.0, fine));
            for (double t = 0.25; t <= 3.0; t += 0.25) {
                const Matrix lo = y_eval(table, YQuery{mu, gamma, 1.0, t}, coarse);
                const Matrix hi = y_eval(table, YQuery{mu, gamma, 1.0, t}, fine);
                EXPECT_LT(testutil::max_abs_diff(lo, hi), 10.0 * coarse.tol)
                    << "mu=" << mu << " gamma=" << gamma << " t=" << t;
            }
        }
    }
}

TEST(RequiredTableDepth, CoversStoppingRule) {
    SeriesParams sp;
    const double rho = norm_ind1(kA2) + norm_ind1(kOmega2);
    const int depth = required_table_depth(rho, 1.5, 1.0, 3.0, sp);
    EXPECT_GT(depth, 5);
    EXPECT_LE(depth, sp.k_hard_max);
    // the returned depth must be enough for evaluation everywhere up to t_max
    const KernelTable table = kernel_build(kA2, kOmega2, depth);
    for (double t = 0.1; t <= 3.0; t += 0.1)
        EXPECT_NO_THROW(y_eval(table, YQuery{1.5, 1.0, 1.0, t}, sp));
}
