#ifndef JACKSTRAW_SIGNIFICANCE_HPP
#define JACKSTRAW_SIGNIFICANCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"
#include "random.hpp"

/**
 * @file significance.hpp
 * @brief Goodness-of-fit against Uniform(0,1), the double KS test used to
 * score simulation studies, FDR machinery, and a permutation rank-sum test.
 */

namespace jackstraw {

enum class KsSide {
    TwoSided,
    /// D+ = sup(F_n(x) - x): large when the sample piles up near zero.
    OneSidedAntiConservative,
};

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    KsSide side = KsSide::TwoSided;
    std::size_t sample_size = 0;
};

namespace detail {

inline void check_unit_interval(std::span<const double> sample, const char* what) {
    if (sample.empty()) {
        fail(ErrorKind::InvalidSample, std::string(what) + ": empty sample");
    }
    for (double x : sample) {
        if (!(x >= 0.0 && x <= 1.0)) {
            fail(ErrorKind::InvalidSample, std::string(what) + ": value outside [0, 1]");
        }
    }
}

/// Asymptotic Kolmogorov survival function Q(lambda) = P(sqrt(n) D > lambda).
inline double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // Theta-function form converges fast for small lambda.
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double sum = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double odd = 2.0 * k - 1.0;
            sum += std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Exact P(D+_n >= d) for a Uniform(0,1) sample of size n (Birnbaum-Tingey).
inline double one_sided_exact(double d, std::size_t n) {
    if (d <= 0.0) return 1.0;
    if (d >= 1.0) return 0.0;
    const double nn = static_cast<double>(n);
    const auto jmax = static_cast<std::size_t>(std::floor(nn * (1.0 - d)));
    double sum = 0.0;
    for (std::size_t j = 0; j <= jmax; ++j) {
        const double jj = static_cast<double>(j);
        const double log_binom = std::lgamma(nn + 1.0) - std::lgamma(jj + 1.0) - std::lgamma(nn - jj + 1.0);
        const double a = 1.0 - d - jj / nn;
        if (a <= 0.0) continue;
        sum += std::exp(log_binom + (nn - jj) * std::log(a) + (jj - 1.0) * std::log(d + jj / nn));
    }
    return std::clamp(d * sum, 0.0, 1.0);
}

} // namespace detail

/// Small samples (n <= this) get the exact one-sided null distribution.
inline constexpr std::size_t kExactOneSidedMaxN = 20;

/**
 * Kolmogorov-Smirnov test of `sample` against Uniform(0,1).
 *
 * Two-sided: D = sup|F_n(x) - x| with the asymptotic Kolmogorov p-value at
 * sqrt(n) * D. One-sided: D+ with p = exp(-2 n D+^2), or the exact finite-n
 * tail when n <= 20.
 */
inline KsResult ks_uniform(std::span<const double> sample, KsSide side) {
    detail::check_unit_interval(sample, "ks_uniform");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    const double nn = static_cast<double>(n);

    double d_plus = 0.0;
    double d_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double above = static_cast<double>(i + 1) / nn - sorted[i];
        const double below = sorted[i] - static_cast<double>(i) / nn;
        d_plus = std::max(d_plus, above);
        d_minus = std::max(d_minus, below);
    }

    KsResult out;
    out.side = side;
    out.sample_size = n;
    if (side == KsSide::TwoSided) {
        out.statistic = std::max(d_plus, d_minus);
        out.p_value = detail::kolmogorov_survival(std::sqrt(nn) * out.statistic);
    } else {
        out.statistic = d_plus;
        out.p_value = n <= kExactOneSidedMaxN ? detail::one_sided_exact(d_plus, n)
                                              : std::clamp(std::exp(-2.0 * nn * d_plus * d_plus), 0.0, 1.0);
    }
    return out;
}

/// One-sided KS over a collection of per-study KS p-values: a small result
/// means the studies' p-values lean towards zero as a group.
inline KsResult double_ks(std::span<const double> ks_pvalues) {
    return ks_uniform(ks_pvalues, KsSide::OneSidedAntiConservative);
}

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
inline std::vector<double> bh_fdr(std::span<const double> p_values) {
    detail::check_unit_interval(p_values, "bh_fdr");
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p_values[a] < p_values[b]; });

    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t k = m; k-- > 0;) {
        const std::size_t idx = order[k];
        const double candidate = static_cast<double>(m) * p_values[idx] / static_cast<double>(k + 1);
        running = std::min(running, candidate);
        adjusted[idx] = std::min(running, 1.0);
    }
    return adjusted;
}

inline std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int k = 1; k <= 19; ++k) grid.push_back(0.05 * k);
    return grid;
}

/**
 * Storey's proportion of true nulls, pi0(lambda) = #{p > lambda} / (m (1 - lambda)),
 * averaged over the grid and clipped to [1/m, 1].
 */
inline double estimate_pi0(std::span<const double> p_values, std::span<const double> lambda_grid) {
    if (p_values.empty()) {
        fail(ErrorKind::InvalidSample, "estimate_pi0: empty sample");
    }
    detail::check_unit_interval(p_values, "estimate_pi0");
    if (lambda_grid.empty()) {
        fail(ErrorKind::InvalidConfig, "estimate_pi0: empty lambda grid");
    }
    const double m = static_cast<double>(p_values.size());
    double total = 0.0;
    for (double lambda : lambda_grid) {
        if (!(lambda > 0.0 && lambda < 1.0)) {
            fail(ErrorKind::InvalidConfig, "estimate_pi0: lambda must lie in (0, 1)");
        }
        const auto above = std::count_if(p_values.begin(), p_values.end(), [&](double p) { return p > lambda; });
        total += static_cast<double>(above) / (m * (1.0 - lambda));
    }
    const double mean = total / static_cast<double>(lambda_grid.size());
    return std::clamp(mean, 1.0 / m, 1.0);
}

inline double estimate_pi0(std::span<const double> p_values) {
    const auto grid = default_lambda_grid();
    return estimate_pi0(p_values, grid);
}

/// q = pi0 * BH-adjusted p (the BH values are already cumulative minima).
inline std::vector<double> q_values(std::span<const double> p_values, double pi0_hat) {
    if (!(pi0_hat > 0.0 && pi0_hat <= 1.0)) {
        fail(ErrorKind::InvalidConfig, "q_values: pi0 must lie in (0, 1]");
    }
    auto q = bh_fdr(p_values);
    for (auto& v : q) v = std::min(1.0, pi0_hat * v);
    return q;
}

struct FdrResult {
    std::vector<double> q_values;
    double pi0_hat = 1.0;
    std::vector<double> lambda_grid;
};

inline FdrResult fdr(std::span<const double> p_values) {
    FdrResult out;
    out.lambda_grid = default_lambda_grid();
    out.pi0_hat = estimate_pi0(p_values, out.lambda_grid);
    out.q_values = q_values(p_values, out.pi0_hat);
    return out;
}

/// Midranks (1-based) of `values`; tied values share the mean of their ranks.
inline std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

/**
 * One-sided Wilcoxon rank-sum test that members score higher than
 * non-members, with significance from random relabellings:
 * p = (#{permuted rank sum >= observed} + 1) / (permutations + 1).
 *
 * Permutations are drawn in fixed-size chunks, each from its own stream, so
 * the result does not depend on `threads`.
 */
inline double rank_sum_enrichment(std::span<const double> member_stats, std::span<const double> nonmember_stats,
                                  std::size_t permutations, std::uint64_t seed, unsigned threads = 1) {
    if (member_stats.empty() || nonmember_stats.empty()) {
        fail(ErrorKind::InvalidSample, "rank_sum_enrichment: both groups must be nonempty");
    }
    if (permutations < 100) {
        fail(ErrorKind::InvalidConfig, "rank_sum_enrichment: need at least 100 permutations");
    }
    std::vector<double> pooled(member_stats.begin(), member_stats.end());
    pooled.insert(pooled.end(), nonmember_stats.begin(), nonmember_stats.end());
    for (double v : pooled) {
        if (std::isnan(v)) fail(ErrorKind::InvalidSample, "rank_sum_enrichment: NaN score");
    }
    if (std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled.front(); })) {
        return 1.0;
    }
    const auto ranks = midranks(pooled);
    const std::size_t k = member_stats.size();
    const auto total = static_cast<std::int64_t>(pooled.size());
    const double observed = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(k), 0.0);

    constexpr std::size_t chunk = 256;
    const std::size_t chunks = (permutations + chunk - 1) / chunk;
    std::vector<std::size_t> hits(chunks, 0);
    parallel_for(chunks, threads, [&](std::size_t c) {
        Rng rng = make_stream(seed, {tag(StreamTag::Enrichment), c});
        const std::size_t begin = c * chunk;
        const std::size_t end = std::min(permutations, begin + chunk);
        std::size_t local = 0;
        for (std::size_t p = begin; p < end; ++p) {
            const auto pick = sample_without_replacement(total, static_cast<std::int64_t>(k), rng);
            double sum = 0.0;
            for (auto idx : pick) sum += ranks[static_cast<std::size_t>(idx)];
            if (sum >= observed) ++local;
        }
        hits[c] = local;
    });
    const auto exceed = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
    return static_cast<double>(exceed + 1) / static_cast<double>(permutations + 1);
}

} // namespace jackstraw

#endif
