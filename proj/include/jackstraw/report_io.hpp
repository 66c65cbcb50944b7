#ifndef JACKSTRAW_REPORT_IO_HPP
#define JACKSTRAW_REPORT_IO_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "engine.hpp"
#include "error.hpp"
#include "matrix_io.hpp"
#include "simulation.hpp"

namespace jackstraw::io {

using nlohmann::json;

/// Non-finite doubles become strings ("inf", "nan"); JSON has no literal for them.
inline json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

inline json to_json(const HypothesisSpec& spec) {
    json j;
    j["r"] = spec.r;
    if (spec.rotation) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < spec.rotation->rows(); ++i) {
            json row = json::array();
            for (Eigen::Index k = 0; k < spec.rotation->cols(); ++k) row.push_back((*spec.rotation)(i, k));
            rows.push_back(row);
        }
        j["rotation"] = rows;
    }
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, FullNull>) {
                j["constraint"] = "full";
            } else if constexpr (std::is_same_v<T, SubsetNull>) {
                j["constraint"] = "subset";
                j["tested_pcs"] = c.tested;
            } else {
                j["constraint"] = "linear";
                j["q"] = c.c_matrix.cols();
            }
        },
        spec.constraint);
    return j;
}

inline json to_json(const JackstrawConfig& cfg) {
    return {{"s", cfg.s},
            {"b", cfg.b},
            {"seed", cfg.seed},
            {"null_mode", std::string(to_string(cfg.null_mode))},
            {"pseudocount", cfg.pseudocount},
            {"hypothesis", to_json(cfg.spec)}};
}

inline json to_json(const NullPoolSummary& s) {
    json q = json::object();
    for (const auto& [level, value] : s.quantiles) q[format_double(level)] = number(value);
    return {{"count", s.count}, {"min", number(s.min)}, {"max", number(s.max)}, {"quantiles", q}};
}

inline json to_json(const KsResult& k) {
    return {{"statistic", number(k.statistic)},
            {"p_value", number(k.p_value)},
            {"side", k.side == KsSide::TwoSided ? "two-sided" : "one-sided"},
            {"sample_size", k.sample_size}};
}

inline json to_json(const sim::ScenarioConfig& c) {
    return {{"id", c.id},
            {"l_shape", std::string(sim::to_string(c.l_shape))},
            {"b_dist", std::string(sim::to_string(c.b_dist))},
            {"m", c.m},
            {"n", c.n},
            {"pi0", c.pi0},
            {"noise_sd", c.noise_sd},
            {"studies", c.studies},
            {"seed", c.seed}};
}

inline json to_json(const sim::EvaluationReport& report) {
    json methods = json::array();
    for (const auto& m : report.methods) {
        json per_one = json::array();
        json per_two = json::array();
        for (double v : m.ks_one_sided_p) per_one.push_back(number(v));
        for (double v : m.ks_two_sided_p) per_two.push_back(number(v));
        methods.push_back({{"label", m.label},
                           {"studies_scored", m.study_index.size()},
                           {"failed_studies", m.failed_studies},
                           {"failure_messages", m.failure_messages},
                           {"ks_one_sided_p", per_one},
                           {"ks_two_sided_p", per_two},
                           {"mean_d_plus", number(m.mean_d_plus())},
                           {"mean_null_ecdf_at_0.05", number(m.mean_ecdf_at_005())},
                           {"double_ks_one_sided", to_json(m.double_ks_one_sided)},
                           {"double_ks_two_sided", to_json(m.double_ks_two_sided)}});
    }
    return {{"scenario_id", report.scenario_id}, {"config", to_json(report.config)}, {"methods", methods}};
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::InvalidConfig, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

/// One row per scored study: study, method, D+, one-sided p, D, two-sided p.
inline void write_ks_table(std::ostream& out, const sim::EvaluationReport& report) {
    out << "study\tmethod\td_plus\tks_one_sided_p\td\tks_two_sided_p\n";
    for (const auto& m : report.methods) {
        for (std::size_t k = 0; k < m.study_index.size(); ++k) {
            out << m.study_index[k] + 1 << '\t' << m.label << '\t' << format_double(m.ks_one_sided_stat[k]) << '\t'
                << format_double(m.ks_one_sided_p[k]) << '\t' << format_double(m.ks_two_sided_stat[k]) << '\t'
                << format_double(m.ks_two_sided_p[k]) << '\n';
        }
    }
}

/// QQ coordinates of the per-study KS p-values against Uniform(0,1).
inline void write_qq_table(std::ostream& out, const sim::EvaluationReport& report) {
    out << "method\tside\tuniform_quantile\tobserved\n";
    for (const auto& m : report.methods) {
        for (const auto& [side, values] : {std::pair{"one-sided", &m.ks_one_sided_p}, std::pair{"two-sided", &m.ks_two_sided_p}}) {
            for (const auto& [expected, observed] : sim::qq_points(*values)) {
                out << m.label << '\t' << side << '\t' << format_double(expected) << '\t' << format_double(observed)
                    << '\n';
            }
        }
    }
}

} // namespace jackstraw::io

#endif
