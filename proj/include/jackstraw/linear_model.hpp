#ifndef JACKSTRAW_LINEAR_MODEL_HPP
#define JACKSTRAW_LINEAR_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "matrix.hpp"

/**
 * @file linear_model.hpp
 * @brief Per-variable regressions of a row on a basis of PCs and the F-test
 * of a linear hypothesis on the coefficients.
 *
 * A variable y (length n) is modelled as y = gamma * W + e, where W is the
 * r x n basis (optionally rotated by R) and gamma a row r-vector. Rows are
 * centered beforehand, so no intercept enters either model.
 */

namespace jackstraw {

/// All r coefficients are zero.
struct FullNull {};

/// Coefficients at the 1-based `tested` positions are zero; the others act
/// as adjustment variables present in both models.
struct SubsetNull {
    std::vector<int> tested;
};

/// gamma * c_matrix == a_vector, with c_matrix r x q of full column rank.
struct LinearConstraint {
    Matrix c_matrix;
    Vector a_vector;
};

using Constraint = std::variant<FullNull, SubsetNull, LinearConstraint>;

struct HypothesisSpec {
    Eigen::Index r = 1;
    std::optional<Matrix> rotation;
    Constraint constraint = FullNull{};
};

inline constexpr double kRotationTolerance = 1e-8;

/// Throws InvalidRotation unless R is r x r, orthonormal and has determinant 1.
inline void validate_rotation(const Matrix& rotation, Eigen::Index r) {
    if (rotation.rows() != r || rotation.cols() != r) {
        fail(ErrorKind::InvalidRotation, "rotation must be " + std::to_string(r) + "x" + std::to_string(r) +
                                             ", got " + std::to_string(rotation.rows()) + "x" +
                                             std::to_string(rotation.cols()));
    }
    if (!rotation.allFinite()) {
        fail(ErrorKind::InvalidRotation, "rotation has non-finite entries");
    }
    const double ortho = (rotation.transpose() * rotation - Matrix::Identity(r, r)).cwiseAbs().maxCoeff();
    if (ortho > kRotationTolerance) {
        fail(ErrorKind::InvalidRotation, "rotation is not orthonormal (max |R'R - I| = " + std::to_string(ortho) + ")");
    }
    const double det = rotation.determinant();
    if (std::abs(det - 1.0) > kRotationTolerance) {
        fail(ErrorKind::InvalidRotation, "rotation determinant is " + std::to_string(det) + ", expected 1");
    }
}

inline void validate(const HypothesisSpec& spec) {
    if (spec.r < 1) {
        fail(ErrorKind::InvalidRank, "hypothesis needs r >= 1");
    }
    if (spec.rotation) {
        validate_rotation(*spec.rotation, spec.r);
    }
    if (const auto* subset = std::get_if<SubsetNull>(&spec.constraint)) {
        if (subset->tested.empty()) {
            fail(ErrorKind::InvalidConfig, "subset hypothesis needs at least one tested PC");
        }
        std::vector<int> sorted = subset->tested;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            fail(ErrorKind::InvalidConfig, "tested PC indices must be distinct");
        }
        if (sorted.front() < 1 || sorted.back() > spec.r) {
            fail(ErrorKind::InvalidConfig, "tested PC indices must lie in 1.." + std::to_string(spec.r));
        }
    } else if (const auto* lin = std::get_if<LinearConstraint>(&spec.constraint)) {
        const auto q = lin->c_matrix.cols();
        if (lin->c_matrix.rows() != spec.r || q < 1 || q > spec.r) {
            fail(ErrorKind::InvalidConfig, "constraint matrix must be r x q with 1 <= q <= r");
        }
        if (lin->a_vector.size() != q) {
            fail(ErrorKind::InvalidConfig, "constraint vector must have q entries");
        }
        Eigen::ColPivHouseholderQR<Matrix> qr(lin->c_matrix);
        if (qr.rank() != q) {
            fail(ErrorKind::InvalidConfig, "constraint matrix must have full column rank");
        }
    }
}

/// Numerator degrees of freedom implied by the constraint.
inline Eigen::Index constraint_dof(const HypothesisSpec& spec) {
    return std::visit(
        [&](const auto& c) -> Eigen::Index {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, FullNull>) {
                return spec.r;
            } else if constexpr (std::is_same_v<T, SubsetNull>) {
                return static_cast<Eigen::Index>(c.tested.size());
            } else {
                return c.c_matrix.cols();
            }
        },
        spec.constraint);
}

inline bool has_adjustment(const HypothesisSpec& spec) {
    return constraint_dof(spec) < spec.r;
}

struct FStatResult {
    double f_value = 0.0;
    Eigen::Index df_num = 0;
    Eigen::Index df_den = 0;
    double rss_constrained = 0.0;
    double rss_unconstrained = 0.0;

    /// A zero unconstrained residual: f_value is +infinity, which orders
    /// above every finite statistic and compares equal to itself.
    bool perfect_fit() const noexcept { return std::isinf(f_value); }
};

/// R * basis. Throws InvalidRotation.
inline Matrix apply_rotation(const Matrix& basis, const Matrix& rotation) {
    validate_rotation(rotation, basis.rows());
    return rotation * basis;
}

/// Least-squares gamma minimising ||y - gamma * basis||, via column-pivoted QR.
inline Vector fit_coefficients(const Vector& y, const Matrix& basis) {
    if (y.size() != basis.cols()) {
        fail(ErrorKind::InvalidData, "response length does not match basis columns");
    }
    if (basis.cols() <= basis.rows()) {
        fail(ErrorKind::InvalidRank, "need more observations than basis rows");
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(basis.transpose());
    if (qr.rank() < basis.rows()) {
        fail(ErrorKind::SingularBasis, "basis rows are linearly dependent");
    }
    return qr.solve(y);
}

/**
 * Precomputed F-test for one basis and hypothesis. Both models are reduced
 * to orthonormal column bases once, so each variable costs two projections.
 *
 * `absorbed_dof` is subtracted from the residual degrees of freedom; pass 1
 * when rows were centered before fitting (the mean is an implicit parameter).
 */
class FTest {
public:
    FTest(const Matrix& basis, const HypothesisSpec& spec, Eigen::Index absorbed_dof = 0) {
        if (basis.rows() != spec.r) {
            fail(ErrorKind::InvalidConfig, "basis has " + std::to_string(basis.rows()) + " rows, hypothesis expects r = " +
                                               std::to_string(spec.r));
        }
        n_ = basis.cols();
        df_num_ = constraint_dof(spec);
        df_den_ = n_ - spec.r - absorbed_dof;
        if (df_den_ < 1) {
            fail(ErrorKind::InvalidRank, "no residual degrees of freedom (n = " + std::to_string(n_) +
                                             ", r = " + std::to_string(spec.r) + ")");
        }
        const Matrix w = spec.rotation ? apply_rotation(basis, *spec.rotation) : basis;
        full_ = orthonormal_columns(w.transpose());

        offset_ = Vector::Zero(n_);
        std::visit(
            [&](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, FullNull>) {
                    reduced_ = Matrix(n_, 0);
                } else if constexpr (std::is_same_v<T, SubsetNull>) {
                    std::vector<bool> tested(static_cast<std::size_t>(spec.r), false);
                    for (int k : c.tested) tested[static_cast<std::size_t>(k - 1)] = true;
                    Matrix kept(n_, spec.r - static_cast<Eigen::Index>(c.tested.size()));
                    Eigen::Index col = 0;
                    for (Eigen::Index k = 0; k < spec.r; ++k) {
                        if (!tested[static_cast<std::size_t>(k)]) kept.col(col++) = w.row(k).transpose();
                    }
                    reduced_ = kept.cols() ? orthonormal_columns(kept) : Matrix(n_, 0);
                } else {
                    // gamma = gamma_p + delta * N^T with gamma_p * C = a and C^T N = 0.
                    const Matrix& cm = c.c_matrix;
                    const Eigen::Index q = cm.cols();
                    if (!c.a_vector.isZero(0.0)) {
                        const Vector gamma_p = cm * (cm.transpose() * cm).ldlt().solve(c.a_vector);
                        offset_ = w.transpose() * gamma_p;
                    }
                    if (q < spec.r) {
                        Eigen::HouseholderQR<Matrix> qr(cm);
                        const Matrix q_full = qr.householderQ();
                        const Matrix null_space = q_full.rightCols(spec.r - q);
                        reduced_ = orthonormal_columns(w.transpose() * null_space);
                    } else {
                        reduced_ = Matrix(n_, 0);
                    }
                }
            },
            spec.constraint);
    }

    Eigen::Index df_num() const noexcept { return df_num_; }
    Eigen::Index df_den() const noexcept { return df_den_; }
    Eigen::Index n() const noexcept { return n_; }

    FStatResult operator()(const Eigen::Ref<const Vector>& yv) const {
        FStatResult out;
        out.df_num = df_num_;
        out.df_den = df_den_;
        if (yv.size() != n_) {
            fail(ErrorKind::InvalidData, "response length does not match basis columns");
        }
        out.rss_unconstrained = residual_ss(yv, full_);
        const Vector shifted = yv - offset_;
        out.rss_constrained = std::max(residual_ss(shifted, reduced_), out.rss_unconstrained);

        const double scale = std::max(yv.squaredNorm(), shifted.squaredNorm());
        const double numerator = (out.rss_constrained - out.rss_unconstrained) / static_cast<double>(df_num_);
        if (out.rss_unconstrained <= kPerfectFitRelTol * scale) {
            out.rss_unconstrained = 0.0;
            out.f_value = numerator > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
            return out;
        }
        out.f_value = numerator / (out.rss_unconstrained / static_cast<double>(df_den_));
        return out;
    }

    double statistic(const Eigen::Ref<const Vector>& y) const {
        return (*this)(y).f_value;
    }

private:
    static constexpr double kPerfectFitRelTol = 1e-24;

    static Matrix orthonormal_columns(const Matrix& design) {
        Eigen::ColPivHouseholderQR<Matrix> qr(design);
        if (qr.rank() < design.cols()) {
            fail(ErrorKind::SingularBasis, "basis rows are linearly dependent");
        }
        return qr.householderQ() * Matrix::Identity(design.rows(), design.cols());
    }

    static double residual_ss(const Eigen::Ref<const Vector>& y, const Matrix& q) {
        if (q.cols() == 0) {
            return y.squaredNorm();
        }
        return (y - q * (q.transpose() * y)).squaredNorm();
    }

    Eigen::Index n_ = 0;
    Eigen::Index df_num_ = 0;
    Eigen::Index df_den_ = 0;
    Matrix full_;
    Matrix reduced_;
    Vector offset_;
};

/// One-off F-test of y against `basis` under `spec`. A perfect unconstrained
/// fit is reported as f_value = +infinity rather than thrown.
inline FStatResult f_statistic(const Eigen::Ref<const Vector>& y, const Matrix& basis, const HypothesisSpec& spec,
                        Eigen::Index absorbed_dof = 0) {
    validate(spec);
    return FTest(basis, spec, absorbed_dof)(y);
}

/**
 * Rows spanning the constrained model: the basis directions a variable keeps
 * under the null. Empty (0 x n) for FullNull. Used by the residual null modes.
 */
inline Matrix adjustment_basis(const Matrix& basis, const HypothesisSpec& spec) {
    const Matrix w = spec.rotation ? apply_rotation(basis, *spec.rotation) : basis;
    return std::visit(
        [&](const auto& c) -> Matrix {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, FullNull>) {
                return Matrix(0, w.cols());
            } else if constexpr (std::is_same_v<T, SubsetNull>) {
                std::vector<bool> tested(static_cast<std::size_t>(spec.r), false);
                for (int k : c.tested) tested[static_cast<std::size_t>(k - 1)] = true;
                Matrix kept(spec.r - static_cast<Eigen::Index>(c.tested.size()), w.cols());
                Eigen::Index row = 0;
                for (Eigen::Index k = 0; k < spec.r; ++k) {
                    if (!tested[static_cast<std::size_t>(k)]) kept.row(row++) = w.row(k);
                }
                return kept;
            } else {
                const Eigen::Index q = c.c_matrix.cols();
                if (q == spec.r) {
                    return Matrix(0, w.cols());
                }
                Eigen::HouseholderQR<Matrix> qr(c.c_matrix);
                const Matrix q_full = qr.householderQ();
                return q_full.rightCols(spec.r - q).transpose() * w;
            }
        },
        spec.constraint);
}

} // namespace jackstraw

#endif
