#ifndef JACKSTRAW_SIMULATION_HPP
#define JACKSTRAW_SIMULATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "engine.hpp"
#include "error.hpp"
#include "linear_model.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "significance.hpp"

/**
 * @file simulation.hpp
 * @brief Studies drawn from Y = B L + E and their scoring by the joint null
 * criterion: within a study the null p-values should look like an i.i.d.
 * Uniform(0,1) sample, and across studies the resulting KS p-values should
 * not lean towards zero (checked with a second, one-sided KS test).
 */

namespace jackstraw::sim {

enum class LShape { Dichotomous, Sinusoidal, TwoFactor };
enum class BDist { Bernoulli, Uniform01 };

inline constexpr std::string_view to_string(LShape s) noexcept {
    switch (s) {
    case LShape::Dichotomous: return "dichotomous";
    case LShape::Sinusoidal: return "sinusoidal";
    case LShape::TwoFactor: return "two-factor";
    }
    return "unknown";
}

inline constexpr std::string_view to_string(BDist d) noexcept {
    return d == BDist::Bernoulli ? "bernoulli" : "uniform";
}

struct ScenarioConfig {
    std::string id = "custom";
    LShape l_shape = LShape::Dichotomous;
    BDist b_dist = BDist::Uniform01;
    Eigen::Index m = 1000;
    Eigen::Index n = 20;
    /// For TwoFactor: share of rows not associated with the first factor.
    double pi0 = 0.95;
    double noise_sd = 1.0;
    std::size_t studies = 100;
    std::uint64_t seed = 1;
};

inline void validate(const ScenarioConfig& cfg) {
    if (!(cfg.pi0 > 0.0 && cfg.pi0 < 1.0)) {
        fail(ErrorKind::InvalidConfig, "pi0 must lie in (0, 1)");
    }
    if (cfg.m - static_cast<Eigen::Index>(std::llround(cfg.pi0 * static_cast<double>(cfg.m))) < 1) {
        fail(ErrorKind::InvalidConfig, "scenario has no non-null rows (m * (1 - pi0) < 1)");
    }
    if (cfg.n < 4) {
        fail(ErrorKind::InvalidConfig, "scenario needs n >= 4");
    }
    if (!(cfg.noise_sd >= 0.0) || !std::isfinite(cfg.noise_sd)) {
        fail(ErrorKind::InvalidConfig, "noise_sd must be finite and nonnegative");
    }
    if (cfg.studies < 1) {
        fail(ErrorKind::InvalidConfig, "need at least one study");
    }
}

/**
 * The sixteen-scenario grid: L shape x effect distribution x m x pi0, in
 * that nesting order, numbered "1".."16". Scenario 1 is dichotomous L,
 * Uniform(0,1) effects, m = 1000, pi0 = 0.95.
 */
inline std::vector<ScenarioConfig> scenario_grid(std::size_t studies = 100, std::uint64_t seed = 1) {
    std::vector<ScenarioConfig> out;
    int id = 1;
    for (auto shape : {LShape::Dichotomous, LShape::Sinusoidal}) {
        for (auto dist : {BDist::Uniform01, BDist::Bernoulli}) {
            for (Eigen::Index m : {1000, 5000}) {
                for (double pi0 : {0.95, 0.75}) {
                    ScenarioConfig cfg;
                    cfg.id = std::to_string(id++);
                    cfg.l_shape = shape;
                    cfg.b_dist = dist;
                    cfg.m = m;
                    cfg.pi0 = pi0;
                    cfg.studies = studies;
                    cfg.seed = seed;
                    out.push_back(cfg);
                }
            }
        }
    }
    return out;
}

/// The two-factor subset scenario: m = 1000, 100 rows on L1, 60 on L2, 40 on both.
inline ScenarioConfig two_pc_scenario(std::size_t studies = 100, std::uint64_t seed = 1) {
    ScenarioConfig cfg;
    cfg.id = "2pc";
    cfg.l_shape = LShape::TwoFactor;
    cfg.b_dist = BDist::Uniform01;
    cfg.m = 1000;
    cfg.pi0 = 0.9;
    cfg.studies = studies;
    cfg.seed = seed;
    return cfg;
}

/// "1".."16" or "2pc".
inline ScenarioConfig scenario_by_id(const std::string& id, std::size_t studies = 100, std::uint64_t seed = 1) {
    if (id == "2pc") return two_pc_scenario(studies, seed);
    for (auto& cfg : scenario_grid(studies, seed)) {
        if (cfg.id == id) return cfg;
    }
    fail(ErrorKind::InvalidConfig, "unknown scenario id '" + id + "'");
}

/**
 * Unit-norm latent rows (r x n). Dichotomous: +1 on the first half, -1 on
 * the rest, scaled by 1/sqrt(n). Sinusoidal: one period of sin(2 pi j / n).
 * TwoFactor: the dichotomous row plus a row alternating sign every quarter.
 */
inline Matrix make_latent_basis(LShape shape, Eigen::Index n) {
    if (n < 2) {
        fail(ErrorKind::InvalidConfig, "latent basis needs n >= 2");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const Eigen::Index half = (n + 1) / 2;
    auto dichotomous = [&] {
        RowVector l(n);
        for (Eigen::Index j = 0; j < n; ++j) l[j] = j < half ? scale : -scale;
        return l;
    };
    switch (shape) {
    case LShape::Dichotomous: return dichotomous();
    case LShape::Sinusoidal: {
        RowVector l(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            l[j] = std::sin(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
        }
        return l / l.norm();
    }
    case LShape::TwoFactor: {
        Matrix l(2, n);
        l.row(0) = dichotomous();
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index quarter = (4 * j) / n;
            l(1, j) = quarter % 2 == 0 ? scale : -scale;
        }
        return l;
    }
    }
    return {};
}

struct StudyData {
    DataMatrix y;
    /// True where the row carries no effect on the tested factor.
    std::vector<bool> true_null_mask;
    Matrix l_true;
    Matrix b_true;
};

namespace detail {

inline double draw_effect(BDist dist, Rng& rng) {
    if (dist == BDist::Bernoulli) {
        return 1.0;
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double v = 0.0;
    while (v == 0.0) v = unif(rng);
    return v;
}

} // namespace detail

/// Row counts of the two-factor layout: (on both, first only, second only).
struct TwoFactorCounts {
    Eigen::Index both = 0;
    Eigen::Index first_only = 0;
    Eigen::Index second_only = 0;
};

inline TwoFactorCounts two_factor_counts(const ScenarioConfig& cfg) {
    const Eigen::Index first = cfg.m - static_cast<Eigen::Index>(std::llround(cfg.pi0 * static_cast<double>(cfg.m)));
    TwoFactorCounts c;
    c.both = static_cast<Eigen::Index>(std::llround(0.4 * static_cast<double>(first)));
    c.first_only = first - c.both;
    c.second_only = static_cast<Eigen::Index>(std::llround(0.2 * static_cast<double>(first)));
    return c;
}

/**
 * One study, deterministic in (cfg.seed, study_index). Exactly
 * round(pi0 * m) rows have zero effect on the tested factor; which rows is
 * drawn at random.
 */
inline StudyData generate_study(const ScenarioConfig& cfg, std::size_t study_index) {
    validate(cfg);
    Rng rng = make_stream(cfg.seed, {tag(StreamTag::Study), study_index});
    const Eigen::Index m = cfg.m;
    const Eigen::Index n = cfg.n;

    StudyData out;
    out.l_true = make_latent_basis(cfg.l_shape, n);
    const Eigen::Index r = out.l_true.rows();
    out.b_true = Matrix::Zero(m, r);
    out.true_null_mask.assign(static_cast<std::size_t>(m), true);

    const auto order = sample_without_replacement(m, m, rng);
    auto row_at = [&](Eigen::Index k) { return static_cast<Eigen::Index>(order[static_cast<std::size_t>(k)]); };
    if (cfg.l_shape == LShape::TwoFactor) {
        const auto c = two_factor_counts(cfg);
        Eigen::Index k = 0;
        for (Eigen::Index t = 0; t < c.both; ++t, ++k) {
            out.b_true(row_at(k), 0) = detail::draw_effect(cfg.b_dist, rng);
            out.b_true(row_at(k), 1) = detail::draw_effect(cfg.b_dist, rng);
        }
        for (Eigen::Index t = 0; t < c.first_only; ++t, ++k) {
            out.b_true(row_at(k), 0) = detail::draw_effect(cfg.b_dist, rng);
        }
        for (Eigen::Index t = 0; t < c.second_only; ++t, ++k) {
            out.b_true(row_at(k), 1) = detail::draw_effect(cfg.b_dist, rng);
        }
    } else {
        const Eigen::Index non_null = m - static_cast<Eigen::Index>(std::llround(cfg.pi0 * static_cast<double>(m)));
        for (Eigen::Index k = 0; k < non_null; ++k) {
            out.b_true(row_at(k), 0) = detail::draw_effect(cfg.b_dist, rng);
        }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        out.true_null_mask[static_cast<std::size_t>(i)] = out.b_true(i, 0) == 0.0;
    }

    Matrix values = out.b_true * out.l_true;
    if (cfg.noise_sd > 0.0) {
        std::normal_distribution<double> noise(0.0, cfg.noise_sd);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) values(i, j) += noise(rng);
        }
    }
    out.y = DataMatrix::from_values(std::move(values));
    return out;
}

/// The hypothesis the scenario is scored on: every PC for the one-factor
/// shapes, PC1 adjusting for PC2 for TwoFactor.
inline HypothesisSpec scenario_hypothesis(const ScenarioConfig& cfg) {
    HypothesisSpec spec;
    if (cfg.l_shape == LShape::TwoFactor) {
        spec.r = 2;
        spec.constraint = SubsetNull{{1}};
    } else {
        spec.r = 1;
    }
    return spec;
}

/// A method maps a study (and a seed reserved for it) to m p-values.
struct Method {
    std::string label;
    std::function<std::vector<double>(const StudyData&, std::uint64_t)> run;
};

inline Method conventional_f_method(HypothesisSpec spec) {
    return {"ConventionalF", [spec](const StudyData& study, std::uint64_t) {
                return run_conventional_f(study.y, spec).p_values;
            }};
}

inline Method jackstraw_method(Eigen::Index s, Eigen::Index b, HypothesisSpec spec,
                               NullMode mode = NullMode::FullPermute) {
    return {"Jackstraw(s=" + std::to_string(s) + ")", [=](const StudyData& study, std::uint64_t seed) {
                JackstrawConfig cfg;
                cfg.s = s;
                cfg.b = b;
                cfg.seed = seed;
                cfg.spec = spec;
                cfg.null_mode = mode;
                cfg.threads = 1;
                return run_jackstraw(study.y, cfg).p_values;
            }};
}

inline Method delete_s_method(Eigen::Index s, HypothesisSpec spec) {
    return {"DeleteS(s=" + std::to_string(s) + ")", [=](const StudyData& study, std::uint64_t seed) {
                JackstrawConfig cfg;
                cfg.s = s;
                cfg.seed = seed;
                cfg.spec = spec;
                cfg.threads = 1;
                return run_delete_s(study.y, cfg).p_values;
            }};
}

struct MethodEvaluation {
    std::string label;
    /// Per study, in study order; failed studies are absent.
    std::vector<std::size_t> study_index;
    std::vector<double> ks_one_sided_p;
    std::vector<double> ks_one_sided_stat;
    std::vector<double> ks_two_sided_p;
    std::vector<double> ks_two_sided_stat;
    /// Share of the study's null p-values at or below 0.05.
    std::vector<double> null_ecdf_at_005;
    std::vector<std::size_t> failed_studies;
    std::vector<std::string> failure_messages;
    KsResult double_ks_one_sided;
    KsResult double_ks_two_sided;

    double mean_d_plus() const {
        if (ks_one_sided_stat.empty()) return 0.0;
        return std::accumulate(ks_one_sided_stat.begin(), ks_one_sided_stat.end(), 0.0) /
               static_cast<double>(ks_one_sided_stat.size());
    }
    double mean_ecdf_at_005() const {
        if (null_ecdf_at_005.empty()) return 0.0;
        return std::accumulate(null_ecdf_at_005.begin(), null_ecdf_at_005.end(), 0.0) /
               static_cast<double>(null_ecdf_at_005.size());
    }
};

struct EvaluationReport {
    std::string scenario_id;
    ScenarioConfig config;
    std::vector<MethodEvaluation> methods;
};

/// Null p-values of one study: the entries where the generating effect was zero.
inline std::vector<double> null_p_values(std::span<const double> p_values, const std::vector<bool>& mask) {
    std::vector<double> out;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) out.push_back(p_values[i]);
    }
    return out;
}

/**
 * Runs every method on cfg.studies studies and scores them. Studies run in
 * parallel; method m on study k gets a seed derived from (cfg.seed, k, m),
 * so the report does not depend on `threads`. A method that throws on a
 * study has that study recorded in `failed_studies` with its message.
 */
inline EvaluationReport run_joint_null_evaluation(const ScenarioConfig& cfg, const std::vector<Method>& methods,
                                                  unsigned threads = 0) {
    validate(cfg);
    if (methods.empty()) {
        fail(ErrorKind::InvalidConfig, "evaluation needs at least one method");
    }
    struct Cell {
        bool ok = false;
        std::string error;
        KsResult one_sided;
        KsResult two_sided;
        double ecdf_005 = 0.0;
    };
    const std::size_t k_methods = methods.size();
    std::vector<Cell> cells(cfg.studies * k_methods);

    parallel_for(cfg.studies, threads, [&](std::size_t study) {
        const StudyData data = generate_study(cfg, study);
        for (std::size_t mi = 0; mi < k_methods; ++mi) {
            Cell& cell = cells[study * k_methods + mi];
            try {
                Rng seeder = make_stream(cfg.seed, {tag(StreamTag::Method), study, mi});
                const auto p = methods[mi].run(data, seeder());
                if (p.size() != data.true_null_mask.size()) {
                    fail(ErrorKind::InvalidData, "method returned " + std::to_string(p.size()) + " p-values for " +
                                                     std::to_string(data.true_null_mask.size()) + " rows");
                }
                const auto nulls = null_p_values(p, data.true_null_mask);
                cell.one_sided = ks_uniform(nulls, KsSide::OneSidedAntiConservative);
                cell.two_sided = ks_uniform(nulls, KsSide::TwoSided);
                cell.ecdf_005 = static_cast<double>(std::count_if(nulls.begin(), nulls.end(),
                                                                  [](double v) { return v <= 0.05; })) /
                                static_cast<double>(nulls.size());
                cell.ok = true;
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
        }
    });

    EvaluationReport report;
    report.scenario_id = cfg.id;
    report.config = cfg;
    for (std::size_t mi = 0; mi < k_methods; ++mi) {
        MethodEvaluation ev;
        ev.label = methods[mi].label;
        for (std::size_t study = 0; study < cfg.studies; ++study) {
            const Cell& cell = cells[study * k_methods + mi];
            if (!cell.ok) {
                ev.failed_studies.push_back(study);
                ev.failure_messages.push_back(cell.error);
                continue;
            }
            ev.study_index.push_back(study);
            ev.ks_one_sided_p.push_back(cell.one_sided.p_value);
            ev.ks_one_sided_stat.push_back(cell.one_sided.statistic);
            ev.ks_two_sided_p.push_back(cell.two_sided.p_value);
            ev.ks_two_sided_stat.push_back(cell.two_sided.statistic);
            ev.null_ecdf_at_005.push_back(cell.ecdf_005);
        }
        if (!ev.ks_one_sided_p.empty()) {
            ev.double_ks_one_sided = double_ks(ev.ks_one_sided_p);
            ev.double_ks_two_sided = double_ks(ev.ks_two_sided_p);
        } else {
            ev.double_ks_one_sided.p_value = std::numeric_limits<double>::quiet_NaN();
            ev.double_ks_two_sided.p_value = std::numeric_limits<double>::quiet_NaN();
        }
        report.methods.push_back(std::move(ev));
    }
    return report;
}

/// Smallest B with s * B >= 10^4.
inline Eigen::Index default_iterations(Eigen::Index s) {
    return (10000 + s - 1) / s;
}

/// PC1-adjusting-for-PC2 evaluation of the conventional F-test and the jackstraw.
inline EvaluationReport run_two_pc_evaluation(const ScenarioConfig& cfg, Eigen::Index s, Eigen::Index b = 0,
                                              unsigned threads = 0) {
    if (cfg.l_shape != LShape::TwoFactor) {
        fail(ErrorKind::InvalidConfig, "two-PC evaluation needs the two-factor scenario");
    }
    const auto spec = scenario_hypothesis(cfg);
    return run_joint_null_evaluation(
        cfg, {conventional_f_method(spec), jackstraw_method(s, b > 0 ? b : default_iterations(s), spec)}, threads);
}

/// QQ coordinates: (expected uniform quantile (i - 0.5)/n, sorted observed value).
inline std::vector<std::pair<double, double>> qq_points(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> out;
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        out.emplace_back((static_cast<double>(i) + 0.5) / n, sorted[i]);
    }
    return out;
}

} // namespace jackstraw::sim

#endif
