#ifndef JACKSTRAW_ENGINE_HPP
#define JACKSTRAW_ENGINE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "checkpoint.hpp"
#include "digest.hpp"
#include "distributions.hpp"
#include "error.hpp"
#include "linear_model.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "random.hpp"

/**
 * @file engine.hpp
 * @brief Significance of associations between variables and their own PCs.
 *
 * The permute-s jackstraw replaces s randomly chosen rows with independently
 * permuted copies, recomputes the top r PCs, and records the F-statistics of
 * just those s synthetic null rows. Repeating this B times gives s * B null
 * statistics that already contain the over-fitting of PCA; each observed
 * statistic is compared against that pool.
 */

namespace jackstraw {

/// How a synthetic null row is built from an observed one.
enum class NullMode {
    /// Independent permutation of the whole row.
    FullPermute,
    /// Keep the fit on the adjustment PCs and permute only the residual.
    ResidualPermute,
    /// Keep the fit on the adjustment PCs and resample residuals with replacement.
    ResidualBootstrap,
};

inline constexpr std::string_view to_string(NullMode mode) noexcept {
    switch (mode) {
    case NullMode::FullPermute: return "full-permute";
    case NullMode::ResidualPermute: return "residual-permute";
    case NullMode::ResidualBootstrap: return "residual-bootstrap";
    }
    return "unknown";
}

inline NullMode parse_null_mode(std::string_view text) {
    if (text == "full-permute") return NullMode::FullPermute;
    if (text == "residual-permute") return NullMode::ResidualPermute;
    if (text == "residual-bootstrap") return NullMode::ResidualBootstrap;
    fail(ErrorKind::InvalidConfig, "unknown null mode '" + std::string(text) + "'");
}

/// Row centering uses one degree of freedom per variable.
inline constexpr Eigen::Index kCenteringDof = 1;

struct JackstrawConfig {
    Eigen::Index s = 1;
    Eigen::Index b = 100;
    std::uint64_t seed = 1;
    NullMode null_mode = NullMode::FullPermute;
    HypothesisSpec spec;
    /// (count + 1) / (s * B + 1) instead of count / (s * B).
    bool pseudocount = false;
    /// 0 = JACKSTRAW_THREADS or hardware concurrency. Never affects results.
    unsigned threads = 0;
    /// Snapshot the null pool every this many iterations (0 = never).
    Eigen::Index checkpoint_every = 0;
    std::filesystem::path checkpoint_path;
};

/// s = ceil(0.1 m) and the smallest B with s * B >= max(10 m, 10^4).
inline JackstrawConfig default_config(Eigen::Index m, HypothesisSpec spec = {}, std::uint64_t seed = 1) {
    JackstrawConfig cfg;
    cfg.s = std::max<Eigen::Index>(1, (m + 9) / 10);
    const Eigen::Index target = std::max<Eigen::Index>(10 * m, 10000);
    cfg.b = (target + cfg.s - 1) / cfg.s;
    cfg.seed = seed;
    cfg.spec = std::move(spec);
    return cfg;
}

/// Throws InvalidConfig on hard violations; returns advisory warnings.
inline std::vector<std::string> validate(const JackstrawConfig& cfg, Eigen::Index m) {
    std::vector<std::string> warnings;
    if (cfg.s < 1 || cfg.s > m / 2) {
        fail(ErrorKind::InvalidConfig, "s = " + std::to_string(cfg.s) + " must lie in [1, m/2 = " +
                                           std::to_string(m / 2) + "]");
    }
    if (cfg.b < 1) {
        fail(ErrorKind::InvalidConfig, "B must be at least 1");
    }
    if (cfg.s * cfg.b < 100) {
        fail(ErrorKind::InvalidConfig, "s * B = " + std::to_string(cfg.s * cfg.b) + " is below the minimum of 100");
    }
    if (cfg.s * cfg.b < 10 * m) {
        warnings.push_back("s * B = " + std::to_string(cfg.s * cfg.b) + " is below 10 * m = " +
                           std::to_string(10 * m) + "; p-value resolution is coarse");
    }
    if (cfg.null_mode != NullMode::FullPermute && !has_adjustment(cfg.spec)) {
        fail(ErrorKind::InvalidMode, std::string(to_string(cfg.null_mode)) +
                                         " needs adjustment PCs; the hypothesis tests every PC");
    }
    validate(cfg.spec);
    return warnings;
}

/// Digest of everything that determines the null pool (not threads or output options).
inline std::string config_digest(const JackstrawConfig& cfg) {
    Fnv1a h;
    h.update("jackstraw-config/1");
    h.update_value(static_cast<std::int64_t>(cfg.s));
    h.update_value(static_cast<std::int64_t>(cfg.b));
    h.update_value(cfg.seed);
    h.update_value(static_cast<int>(cfg.null_mode));
    h.update_value(static_cast<std::int64_t>(cfg.spec.r));
    if (cfg.spec.rotation) {
        h.update("rotation");
        for (Eigen::Index i = 0; i < cfg.spec.rotation->size(); ++i) h.update_value(cfg.spec.rotation->data()[i]);
    }
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, FullNull>) {
                h.update("full");
            } else if constexpr (std::is_same_v<T, SubsetNull>) {
                h.update("subset");
                for (int k : c.tested) h.update_value(k);
            } else {
                h.update("linear");
                for (Eigen::Index i = 0; i < c.c_matrix.size(); ++i) h.update_value(c.c_matrix.data()[i]);
                for (Eigen::Index i = 0; i < c.a_vector.size(); ++i) h.update_value(c.a_vector[i]);
            }
        },
        cfg.spec.constraint);
    return h.hex();
}

struct NullPoolSummary {
    std::size_t count = 0;
    double min = 0.0;
    double max = 0.0;
    /// (level, value) pairs, type-7 interpolation.
    std::vector<std::pair<double, double>> quantiles;
};

inline NullPoolSummary summarize_pool(std::span<const double> sorted_pool) {
    NullPoolSummary out;
    out.count = sorted_pool.size();
    if (sorted_pool.empty()) return out;
    out.min = sorted_pool.front();
    out.max = sorted_pool.back();
    for (double level : {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99}) {
        const double h = level * static_cast<double>(sorted_pool.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, sorted_pool.size() - 1);
        const double a = sorted_pool[lo];
        const double b = sorted_pool[hi];
        const double frac = h - static_cast<double>(lo);
        double v = a;
        if (frac > 0.0 && b != a) v = std::isinf(b) ? b : a + frac * (b - a);
        out.quantiles.emplace_back(level, v);
    }
    return out;
}

struct JackstrawProvenance {
    JackstrawConfig config;
    std::string input_digest;
    std::string config_digest;
    Eigen::Index resumed_from = 0;
};

struct JackstrawResult {
    /// +infinity marks a perfect fit.
    std::vector<double> observed_f;
    std::vector<double> p_values;
    /// Raw null statistics in iteration order, s per iteration. Empty for delete-s.
    std::vector<double> null_statistics;
    NullPoolSummary null_pool_summary;
    Eigen::Index df_num = 0;
    Eigen::Index df_den = 0;
    JackstrawProvenance provenance;
    bool negative_control = false;
    std::vector<std::string> warnings;
};

/**
 * Empirical p-values: p_i = #{null >= F_i} / N, or (# + 1) / (N + 1) with
 * `pseudocount`. `null_pool` is sorted in place.
 */
inline std::vector<double> empirical_p_values(std::span<const double> observed, std::vector<double>& null_pool,
                                              bool pseudocount = false) {
    std::sort(null_pool.begin(), null_pool.end());
    const double total = static_cast<double>(null_pool.size());
    std::vector<double> out;
    out.reserve(observed.size());
    for (double f : observed) {
        const auto it = std::lower_bound(null_pool.begin(), null_pool.end(), f);
        const auto count = static_cast<double>(null_pool.end() - it);
        out.push_back(pseudocount ? (count + 1.0) / (total + 1.0) : count / total);
    }
    return out;
}

namespace detail {

inline Matrix orthonormal_rows_basis(const Matrix& rows) {
    if (rows.rows() == 0) return Matrix(rows.cols(), 0);
    Eigen::HouseholderQR<Matrix> qr(rows.transpose());
    return qr.householderQ() * Matrix::Identity(rows.cols(), rows.rows());
}

/// In-place synthetic null rows. `adjustment_q` holds orthonormal columns
/// spanning the adjustment directions (n x k); unused for FullPermute.
inline void synthesize_in_place(Matrix& y, std::span<const std::int64_t> rows, NullMode mode,
                                const Matrix& adjustment_q, Rng& rng) {
    const Eigen::Index n = y.cols();
    Vector row(n);
    for (auto idx : rows) {
        const auto i = static_cast<Eigen::Index>(idx);
        row = y.row(i).transpose();
        if (mode == NullMode::FullPermute) {
            std::shuffle(row.data(), row.data() + n, rng);
            y.row(i) = row.transpose();
            continue;
        }
        const Vector fit = adjustment_q * (adjustment_q.transpose() * row);
        Vector resid = row - fit;
        if (mode == NullMode::ResidualPermute) {
            std::shuffle(resid.data(), resid.data() + n, rng);
        } else {
            std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
            Vector draw(n);
            for (Eigen::Index j = 0; j < n; ++j) draw[j] = resid[pick(rng)];
            // Resampled residuals need not sum to zero; keep the row centered.
            draw.array() -= draw.mean();
            resid = std::move(draw);
        }
        // A reshuffled residual is no longer orthogonal to the adjustment
        // directions; drop that component so the kept fit is exact.
        resid -= adjustment_q * (adjustment_q.transpose() * resid);
        y.row(i) = (fit + resid).transpose();
    }
}

inline void check_indices(std::span<const std::int64_t> rows, Eigen::Index m) {
    std::vector<std::int64_t> sorted(rows.begin(), rows.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        if (sorted[k] < 0 || sorted[k] >= m) {
            fail(ErrorKind::InvalidIndex, "row index " + std::to_string(sorted[k]) + " outside [0, " +
                                              std::to_string(m) + ")");
        }
        if (k > 0 && sorted[k] == sorted[k - 1]) {
            fail(ErrorKind::InvalidIndex, "row index " + std::to_string(sorted[k]) + " selected twice");
        }
    }
}

struct Prepared {
    Matrix centered;
    std::string input_digest;
};

inline Prepared prepare(const DataMatrix& mat, Eigen::Index r) {
    validate(mat);
    reject_constant_rows(mat);
    detail::check_rank(r, mat.rows(), mat.cols());
    if (mat.cols() - r - kCenteringDof < 1) {
        fail(ErrorKind::InvalidRank, "r = " + std::to_string(r) + " leaves no residual degrees of freedom for n = " +
                                         std::to_string(mat.cols()) + " centered observations");
    }
    return {row_center(mat.values), digest(mat)};
}

} // namespace detail

/**
 * Replaces the rows at (0-based) `row_indices` of `mat` with synthetic null
 * versions; all other rows are returned untouched. For the residual modes,
 * `adjustment` holds the rows (k x n) whose fit is preserved.
 */
inline DataMatrix synthesize_null_rows(const DataMatrix& mat, std::span<const std::int64_t> row_indices, NullMode mode,
                                       const Matrix& adjustment, Rng& rng) {
    detail::check_indices(row_indices, mat.rows());
    if (mode != NullMode::FullPermute && adjustment.rows() == 0) {
        fail(ErrorKind::InvalidMode, std::string(to_string(mode)) + " needs a nonempty adjustment basis");
    }
    if (mode != NullMode::FullPermute && adjustment.cols() != mat.cols()) {
        fail(ErrorKind::InvalidMode, "adjustment basis has the wrong number of columns");
    }
    DataMatrix out = mat;
    const Matrix q = mode == NullMode::FullPermute ? Matrix(mat.cols(), 0) : detail::orthonormal_rows_basis(adjustment);
    detail::synthesize_in_place(out.values, row_indices, mode, q, rng);
    return out;
}

/// Baseline: parametric F p-values against the PCs of the same data. Ignores
/// that the PCs were fitted to these rows, so its null p-values skew low.
inline JackstrawResult run_conventional_f(const DataMatrix& mat, const HypothesisSpec& spec) {
    validate(spec);
    auto prepared = detail::prepare(mat, spec.r);
    const Matrix vr = right_singular_vectors(prepared.centered, spec.r);
    const FTest test(vr, spec, kCenteringDof);

    JackstrawResult out;
    out.df_num = test.df_num();
    out.df_den = test.df_den();
    out.provenance.input_digest = prepared.input_digest;
    out.provenance.config.spec = spec;
    for (Eigen::Index i = 0; i < prepared.centered.rows(); ++i) {
        const double f = test.statistic(prepared.centered.row(i).transpose());
        out.observed_f.push_back(f);
        out.p_values.push_back(f_upper_tail(f, static_cast<double>(out.df_num), static_cast<double>(out.df_den)));
    }
    return out;
}

/**
 * Permute-s jackstraw. Iteration b draws its rows and permutations from its
 * own stream (seed, b), so the result is identical for any worker count and
 * across checkpoint/resume. Throws InvalidConfig, InvalidMode, InvalidRank,
 * InvalidData, RefuseResume and, after one retry, DecompositionFailure.
 */
inline JackstrawResult run_jackstraw(const DataMatrix& mat, const JackstrawConfig& config) {
    JackstrawResult out;
    out.warnings = validate(config, mat.rows());
    auto prepared = detail::prepare(mat, config.spec.r);
    const Matrix& y = prepared.centered;
    const Eigen::Index m = y.rows();
    const Eigen::Index s = config.s;
    const Eigen::Index b_total = config.b;

    const Matrix vr = right_singular_vectors(y, config.spec.r);
    const FTest observed_test(vr, config.spec, kCenteringDof);
    out.df_num = observed_test.df_num();
    out.df_den = observed_test.df_den();
    out.observed_f.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        out.observed_f[static_cast<std::size_t>(i)] = observed_test.statistic(y.row(i).transpose());
    }

    Matrix adjustment_q(y.cols(), 0);
    if (config.null_mode != NullMode::FullPermute) {
        adjustment_q = detail::orthonormal_rows_basis(adjustment_basis(vr, config.spec));
    }

    out.provenance.config = config;
    out.provenance.input_digest = prepared.input_digest;
    out.provenance.config_digest = config_digest(config);

    std::vector<double> pool(static_cast<std::size_t>(s * b_total));
    Eigen::Index start = 0;
    const bool checkpointing = config.checkpoint_every > 0 && !config.checkpoint_path.empty();
    if (checkpointing) {
        if (auto cp = read_checkpoint(config.checkpoint_path)) {
            if (cp->input_digest != out.provenance.input_digest || cp->config_digest != out.provenance.config_digest) {
                fail(ErrorKind::RefuseResume, "checkpoint " + config.checkpoint_path.string() +
                                                  " belongs to a different input or configuration");
            }
            start = std::min<Eigen::Index>(cp->completed, b_total);
            std::copy_n(cp->null_pool.begin(), static_cast<std::size_t>(start * s), pool.begin());
            out.provenance.resumed_from = start;
        }
    }

    auto run_iteration = [&](Eigen::Index b) {
        std::string last_error;
        for (std::uint64_t attempt = 0; attempt < 2; ++attempt) {
            Rng rng = make_stream(config.seed, {tag(StreamTag::JackstrawIteration), static_cast<std::uint64_t>(b), attempt});
            const auto rows = sample_without_replacement(m, s, rng);
            Matrix synthetic = y;
            detail::synthesize_in_place(synthetic, rows, config.null_mode, adjustment_q, rng);
            try {
                const Matrix v_star = right_singular_vectors(synthetic, config.spec.r);
                const FTest null_test(v_star, config.spec, kCenteringDof);
                for (Eigen::Index j = 0; j < s; ++j) {
                    const auto i = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(j)]);
                    pool[static_cast<std::size_t>(b * s + j)] = null_test.statistic(synthetic.row(i).transpose());
                }
                return;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::DecompositionFailure && e.kind() != ErrorKind::SingularBasis) throw;
                last_error = e.what();
            }
        }
        fail(ErrorKind::DecompositionFailure, "iteration " + std::to_string(b + 1) + " failed twice: " + last_error);
    };

    const Eigen::Index chunk = checkpointing ? config.checkpoint_every : std::max<Eigen::Index>(1, b_total - start);
    for (Eigen::Index begin = start; begin < b_total; begin += chunk) {
        const Eigen::Index end = std::min(b_total, begin + chunk);
        parallel_for(static_cast<std::size_t>(end - begin), config.threads,
                     [&](std::size_t k) { run_iteration(begin + static_cast<Eigen::Index>(k)); });
        if (checkpointing) {
            Checkpoint cp;
            cp.input_digest = out.provenance.input_digest;
            cp.config_digest = out.provenance.config_digest;
            cp.s = s;
            cp.b = b_total;
            cp.completed = end;
            cp.null_pool.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(end * s));
            write_checkpoint(config.checkpoint_path, cp);
        }
    }

    out.null_statistics = pool;
    out.p_values = empirical_p_values(out.observed_f, pool, config.pseudocount);
    out.null_pool_summary = summarize_pool(pool);
    return out;
}

/// Random partition of rows 0..m-1 into consecutive blocks of s (the last may be smaller).
inline std::vector<std::vector<std::int64_t>> delete_s_blocks(Eigen::Index m, Eigen::Index s, std::uint64_t seed) {
    if (s < 1 || s >= m) {
        fail(ErrorKind::InvalidConfig, "delete-s needs 1 <= s < m");
    }
    Rng rng = make_stream(seed, {tag(StreamTag::DeleteSPartition)});
    const auto order = sample_without_replacement(m, m, rng);
    std::vector<std::vector<std::int64_t>> blocks;
    for (Eigen::Index begin = 0; begin < m; begin += s) {
        const Eigen::Index end = std::min(m, begin + s);
        blocks.emplace_back(order.begin() + begin, order.begin() + end);
    }
    return blocks;
}

/**
 * Delete-s variant, kept as a negative control: rows are split into disjoint
 * random blocks of s; each block is tested against the PCs of the remaining
 * rows, with parametric F p-values. Its null p-values are not jointly valid.
 */
inline JackstrawResult run_delete_s(const DataMatrix& mat, const JackstrawConfig& config) {
    validate(config.spec);
    auto prepared = detail::prepare(mat, config.spec.r);
    const Matrix& y = prepared.centered;
    const Eigen::Index m = y.rows();
    const Eigen::Index s = config.s;
    const auto blocks = delete_s_blocks(m, s, config.seed);
    detail::check_rank(config.spec.r, m - s, y.cols());

    JackstrawResult out;
    out.negative_control = true;
    out.observed_f.assign(static_cast<std::size_t>(m), 0.0);
    out.p_values.assign(static_cast<std::size_t>(m), 1.0);
    out.provenance.config = config;
    out.provenance.input_digest = prepared.input_digest;
    out.provenance.config_digest = config_digest(config);
    {
        const FTest probe(Matrix::Identity(config.spec.r, y.cols()), config.spec, kCenteringDof);
        out.df_num = probe.df_num();
        out.df_den = probe.df_den();
    }

    parallel_for(blocks.size(), config.threads, [&](std::size_t blk) {
        const auto& block = blocks[blk];
        std::vector<bool> held(static_cast<std::size_t>(m), false);
        for (auto i : block) held[static_cast<std::size_t>(i)] = true;

        Matrix rest(m - static_cast<Eigen::Index>(block.size()), y.cols());
        Eigen::Index row = 0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (!held[static_cast<std::size_t>(i)]) rest.row(row++) = y.row(i);
        }
        const Matrix v = right_singular_vectors(rest, config.spec.r);
        const FTest test(v, config.spec, kCenteringDof);
        for (auto idx : block) {
            const auto i = static_cast<std::size_t>(idx);
            const double f = test.statistic(y.row(static_cast<Eigen::Index>(idx)).transpose());
            out.observed_f[i] = f;
            out.p_values[i] = f_upper_tail(f, static_cast<double>(test.df_num()), static_cast<double>(test.df_den()));
        }
    });
    return out;
}

} // namespace jackstraw

#endif
