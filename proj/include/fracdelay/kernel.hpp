#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/matrix.hpp"

namespace fracdelay {

/// Triangular table of the kernel matrices Q(k, m) for a fixed pair (A, Omega):
///
///   Q(0,0) = I,  Q(k,0) = A^k,  Q(k,m) = 0 for m > k or m < 0,
///   Q(k+1,m) = A Q(k,m) + Omega Q(k,m-1).
///
/// Built once, immutable afterwards; safe to share across threads for reads.
/// Induced 1-norms of all entries are cached for series truncation bounds.
class KernelTable {
public:
    KernelTable(Matrix a, Matrix omega, int k_max)
        : a_(std::move(a)), omega_(std::move(omega)), k_max_(k_max) {
        if (!a_.square() || !omega_.square() || a_.rows() != omega_.rows())
            throw std::invalid_argument("KernelTable: A and Omega must be square of equal dimension");
        if (k_max < 0)
            throw std::invalid_argument("KernelTable: k_max must be >= 0");
        const std::size_t d = a_.rows();
        zero_ = Matrix(d, d);
        entries_.reserve(index(k_max_, k_max_) + 1);
        entries_.push_back(Matrix::identity(d));
        for (int k = 1; k <= k_max_; ++k)
            for (int m = 0; m <= k; ++m) {
                Matrix q = mat_mul(a_, entry_unchecked(k - 1, m));
                if (m >= 1)
                    q = mat_axpy(1.0, mat_mul(omega_, entry_unchecked(k - 1, m - 1)), q);
                if (!q.all_finite())
                    throw ConvergenceError(
                        "KernelTable: entries exceeded double range at k=" + std::to_string(k),
                        0.0, 0.0, k);
                entries_.push_back(std::move(q));
            }
        norms_.reserve(entries_.size());
        for (const Matrix& q : entries_) norms_.push_back(norm_ind1(q));
    }

    const Matrix& a() const { return a_; }
    const Matrix& omega() const { return omega_; }
    int k_max() const { return k_max_; }
    std::size_t dim() const { return a_.rows(); }

    /// Q(k, m); the zero matrix for m > k or m < 0. Throws past the built depth.
    const Matrix& entry(int k, int m) const {
        if (k < 0 || k > k_max_)
            throw std::out_of_range("KernelTable: k=" + std::to_string(k) +
                                    " outside built depth k_max=" + std::to_string(k_max_) +
                                    "; rebuild the table deeper");
        if (m < 0 || m > k) return zero_;
        return entries_[index(k, m)];
    }

    /// Cached induced 1-norm of Q(k, m).
    double entry_norm(int k, int m) const {
        if (k < 0 || k > k_max_)
            throw std::out_of_range("KernelTable: norm query past built depth");
        if (m < 0 || m > k) return 0.0;
        return norms_[index(k, m)];
    }

private:
    static std::size_t index(int k, int m) {
        return static_cast<std::size_t>(k) * (k + 1) / 2 + m;
    }
    const Matrix& entry_unchecked(int k, int m) const {
        if (m < 0 || m > k) return zero_;
        return entries_[index(k, m)];
    }

    Matrix a_, omega_, zero_;
    int k_max_;
    std::vector<Matrix> entries_;
    std::vector<double> norms_;
};

inline KernelTable kernel_build(const Matrix& a, const Matrix& omega, int k_max) {
    return KernelTable(a, omega, k_max);
}

inline const Matrix& kernel_entry(const KernelTable& table, int k, int m) {
    return table.entry(k, m);
}

struct KernelCheckReport {
    double max_abs_deviation = 0.0;
    double max_rel_deviation = 0.0;  // deviation scaled by max(1, |entry|) per (k, m)
    int worst_k = 0;
    int worst_m = 0;
};

/// Recomputes every entry with m >= 1 through the summation form
///   Q(k,m) = sum_{j=m}^{k} A^{k-j} Omega Q(j-1, m-1)
/// and reports the largest entrywise deviation from the recursion-built table.
/// The summation table is built independently, bottom-up in m.
inline KernelCheckReport kernel_check_sum_form(const KernelTable& table) {
    const int kmax = table.k_max();
    const std::size_t d = table.dim();
    std::vector<Matrix> apow;
    apow.push_back(Matrix::identity(d));
    for (int i = 1; i <= kmax; ++i) apow.push_back(mat_mul(table.a(), apow.back()));

    // rebuilt[m][k] for m <= k <= kmax
    std::vector<std::vector<Matrix>> rebuilt(kmax + 1);
    for (int k = 0; k <= kmax; ++k) rebuilt[0].push_back(apow[k]);
    for (int m = 1; m <= kmax; ++m) {
        rebuilt[m].assign(kmax + 1, Matrix(d, d));
        for (int k = m; k <= kmax; ++k) {
            Matrix acc(d, d);
            for (int j = m; j <= k; ++j) {
                const Matrix& prev = rebuilt[m - 1][j - 1];
                acc = mat_axpy(1.0, mat_mul(apow[k - j], mat_mul(table.omega(), prev)), acc);
            }
            rebuilt[m][k] = std::move(acc);
        }
    }

    KernelCheckReport rep;
    for (int k = 0; k <= kmax; ++k)
        for (int m = 0; m <= k; ++m) {
            const Matrix& qr = table.entry(k, m);
            const Matrix& qs = (m == 0) ? apow[k] : rebuilt[m][k];
            double dev = 0.0, scale = 1.0;
            for (std::size_t i = 0; i < d * d; ++i) {
                dev = std::max(dev, std::fabs(qr.data()[i] - qs.data()[i]));
                scale = std::max(scale, std::fabs(qr.data()[i]));
            }
            if (dev > rep.max_abs_deviation) {
                rep.max_abs_deviation = dev;
                rep.worst_k = k;
                rep.worst_m = m;
            }
            rep.max_rel_deviation = std::max(rep.max_rel_deviation, dev / scale);
        }
    return rep;
}

} // namespace fracdelay
