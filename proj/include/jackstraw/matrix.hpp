#ifndef JACKSTRAW_MATRIX_HPP
#define JACKSTRAW_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

/**
 * @file matrix.hpp
 * @brief Data matrix container, row centering and the thin-SVD based PCA.
 */

namespace jackstraw {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/**
 * Observed m x n matrix: rows are variables, columns are observations.
 * Row and column identifiers travel with the values so that outputs can be
 * labelled without the caller keeping a parallel structure.
 */
struct DataMatrix {
    Matrix values;
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;

    Eigen::Index rows() const noexcept { return values.rows(); }
    Eigen::Index cols() const noexcept { return values.cols(); }

    /// Builds a matrix with generated ids ("row1", ..., "col1", ...).
    static DataMatrix from_values(Matrix values) {
        DataMatrix out;
        out.row_ids.reserve(static_cast<std::size_t>(values.rows()));
        out.col_ids.reserve(static_cast<std::size_t>(values.cols()));
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            out.row_ids.push_back("row" + std::to_string(i + 1));
        }
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            out.col_ids.push_back("col" + std::to_string(j + 1));
        }
        out.values = std::move(values);
        return out;
    }
};

namespace detail {

inline void check_ids(const std::vector<std::string>& ids, Eigen::Index expected, const char* what) {
    if (static_cast<Eigen::Index>(ids.size()) != expected) {
        fail(ErrorKind::InvalidData, std::string(what) + " count " + std::to_string(ids.size()) +
                                         " does not match matrix dimension " + std::to_string(expected));
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            fail(ErrorKind::InvalidData, std::string("duplicate ") + what + " '" + id + "'");
        }
    }
}

} // namespace detail

/// Shape, finiteness and id checks. Throws InvalidData.
inline void validate(const DataMatrix& mat) {
    if (mat.rows() < 2 || mat.cols() < 3) {
        fail(ErrorKind::InvalidData, "matrix must have at least 2 rows and 3 columns, got " +
                                         std::to_string(mat.rows()) + "x" + std::to_string(mat.cols()));
    }
    if (!mat.values.allFinite()) {
        for (Eigen::Index i = 0; i < mat.rows(); ++i) {
            for (Eigen::Index j = 0; j < mat.cols(); ++j) {
                if (!std::isfinite(mat.values(i, j))) {
                    fail(ErrorKind::InvalidData, "non-finite entry at row " + std::to_string(i + 1) +
                                                     ", column " + std::to_string(j + 1));
                }
            }
        }
    }
    detail::check_ids(mat.row_ids, mat.rows(), "row id");
    detail::check_ids(mat.col_ids, mat.cols(), "column id");
}

/// Indices of rows whose entries are all identical.
inline std::vector<Eigen::Index> constant_rows(const Matrix& values) {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        const double first = values(i, 0);
        if ((values.row(i).array() == first).all()) {
            out.push_back(i);
        }
    }
    return out;
}

/// Throws InvalidData naming every zero-variance row.
inline void reject_constant_rows(const DataMatrix& mat) {
    const auto bad = constant_rows(mat.values);
    if (bad.empty()) {
        return;
    }
    std::string names;
    for (std::size_t k = 0; k < bad.size(); ++k) {
        if (k == 8) {
            names += ", ... (" + std::to_string(bad.size()) + " total)";
            break;
        }
        names += (k ? ", " : "") + mat.row_ids[static_cast<std::size_t>(bad[k])];
    }
    fail(ErrorKind::InvalidData, "zero-variance rows: " + names);
}

inline Matrix row_center(const Matrix& values) {
    Matrix out = values;
    out.colwise() -= values.rowwise().mean();
    return out;
}

/// Subtracts each row's mean. Only row-wise centering is supported.
inline DataMatrix row_center(const DataMatrix& mat) {
    if (!mat.values.allFinite()) {
        validate(mat);
    }
    DataMatrix out{row_center(mat.values), mat.row_ids, mat.col_ids};
    return out;
}

inline bool is_row_centered(const Matrix& values, double tol = 1e-12) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        const double scale = std::max(1.0, values.row(i).cwiseAbs().maxCoeff());
        if (std::abs(values.row(i).mean()) > tol * scale) {
            return false;
        }
    }
    return true;
}

/**
 * Thin SVD result of a row-centered matrix, Y = u * diag(d) * vt.
 *
 * With k = min(m, n): u is m x k, d has k entries and vt is k x n. For the
 * usual m >= n case this is the m x n / n / n x n layout.
 */
struct PcaDecomposition {
    Matrix u;
    Vector d;
    Matrix vt;
    Eigen::Index r = 0;
    Vector pct_variance;
    bool centered_internally = false;
};

namespace detail {

/// Flip each right singular vector so its largest-magnitude entry is positive
/// (lowest index wins ties); the paired left vector flips with it.
inline void apply_sign_convention(Matrix* u, Matrix& vt) {
    for (Eigen::Index k = 0; k < vt.rows(); ++k) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index j = 0; j < vt.cols(); ++j) {
            const double a = std::abs(vt(k, j));
            if (a > best) {
                best = a;
                arg = j;
            }
        }
        if (vt(k, arg) < 0.0) {
            vt.row(k) *= -1.0;
            if (u != nullptr) {
                u->col(k) *= -1.0;
            }
        }
    }
}

struct ThinSvd {
    Matrix u;
    Vector d;
    Matrix vt;
};

/**
 * Thin SVD through a Householder QR followed by a Jacobi SVD of the small
 * triangular factor. Only the k x k problem is iterated on, and the m x m
 * left factor is never formed.
 */
inline ThinSvd thin_svd(const Matrix& y, bool want_u) {
    const Eigen::Index m = y.rows();
    const Eigen::Index n = y.cols();
    ThinSvd out;
    if (m >= n) {
        Eigen::HouseholderQR<Matrix> qr(y);
        const Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        const unsigned opts = want_u ? (Eigen::ComputeFullU | Eigen::ComputeFullV) : Eigen::ComputeFullV;
        Eigen::JacobiSVD<Matrix> svd(r, opts);
        out.d = svd.singularValues();
        out.vt = svd.matrixV().transpose();
        if (want_u) {
            Matrix padded = Matrix::Zero(m, n);
            padded.topRows(n) = svd.matrixU();
            out.u = qr.householderQ() * padded;
        }
    } else {
        // Wide input: factor the transpose and swap roles.
        Eigen::HouseholderQR<Matrix> qr(y.transpose());
        const Matrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
        Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
        out.d = svd.singularValues();
        Matrix padded = Matrix::Zero(n, m);
        padded.topRows(m) = svd.matrixU();
        out.vt = (qr.householderQ() * padded).transpose();
        if (want_u) {
            out.u = svd.matrixV();
        }
    }
    if (!out.d.allFinite() || !out.vt.allFinite() || (want_u && !out.u.allFinite())) {
        fail(ErrorKind::DecompositionFailure, "SVD produced non-finite values");
    }
    apply_sign_convention(want_u ? &out.u : nullptr, out.vt);
    return out;
}

inline void check_rank(Eigen::Index r, Eigen::Index m, Eigen::Index n) {
    const Eigen::Index max_r = std::min(m, n - 1);
    if (r < 1 || r > max_r) {
        fail(ErrorKind::InvalidRank, "r = " + std::to_string(r) + " outside [1, " + std::to_string(max_r) + "]");
    }
}

} // namespace detail

/**
 * Top r right singular vectors (r x n) of an already row-centered matrix,
 * with the sign convention applied. This is the hot path of the resampling
 * loop and skips validation.
 */
inline Matrix right_singular_vectors(const Matrix& centered, Eigen::Index r) {
    auto svd = detail::thin_svd(centered, false);
    return svd.vt.topRows(r);
}

/**
 * PCA of `mat`. Rows are centered first unless they already are (recorded
 * in `centered_internally`). Throws InvalidRank, InvalidData (bad input or
 * zero total variance) and DecompositionFailure.
 */
inline PcaDecomposition compute_pca(const DataMatrix& mat, Eigen::Index r) {
    validate(mat);
    detail::check_rank(r, mat.rows(), mat.cols());
    reject_constant_rows(mat);

    PcaDecomposition out;
    Matrix centered;
    if (is_row_centered(mat.values)) {
        centered = mat.values;
    } else {
        centered = row_center(mat.values);
        out.centered_internally = true;
    }

    auto svd = detail::thin_svd(centered, true);
    const double total = svd.d.squaredNorm();
    if (!(total > 0.0)) {
        fail(ErrorKind::InvalidData, "matrix has zero variance after centering");
    }
    out.u = std::move(svd.u);
    out.d = std::move(svd.d);
    out.vt = std::move(svd.vt);
    out.r = r;
    out.pct_variance = out.d.array().square() / total;
    return out;
}

/// First r rows of vt.
inline Matrix top_pcs(const PcaDecomposition& dec) {
    return dec.vt.topRows(dec.r);
}

struct ScreePoint {
    int pc_index;
    double pct_variance;
};

inline std::vector<ScreePoint> scree_data(const PcaDecomposition& dec) {
    std::vector<ScreePoint> out;
    out.reserve(static_cast<std::size_t>(dec.pct_variance.size()));
    for (Eigen::Index k = 0; k < dec.pct_variance.size(); ++k) {
        out.push_back({static_cast<int>(k + 1), dec.pct_variance[k]});
    }
    return out;
}

} // namespace jackstraw

#endif
