#ifndef JACKSTRAW_TOOLS_CLI_HPP
#define JACKSTRAW_TOOLS_CLI_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <jackstraw/digest.hpp>
#include <jackstraw/engine.hpp>
#include <jackstraw/error.hpp>
#include <jackstraw/matrix.hpp>
#include <jackstraw/matrix_io.hpp>
#include <jackstraw/report_io.hpp>
#include <jackstraw/significance.hpp>
#include <jackstraw/simulation.hpp>

namespace jackstraw::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kParseError = 2,
    kNumericError = 3,
    kConfigError = 4,
};

inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Parse: return kParseError;
    case ErrorKind::InvalidData:
    case ErrorKind::DecompositionFailure:
    case ErrorKind::SingularBasis:
    case ErrorKind::PerfectFit:
    case ErrorKind::InvalidSample: return kNumericError;
    case ErrorKind::InvalidRank:
    case ErrorKind::InvalidRotation:
    case ErrorKind::InvalidIndex:
    case ErrorKind::InvalidMode:
    case ErrorKind::InvalidConfig:
    case ErrorKind::RefuseResume: return kConfigError;
    }
    return kConfigError;
}

/// Everything a run can be configured with. A JSON config file uses the same
/// keys as the long flag names with dashes replaced by underscores.
struct RunConfig {
    std::string command;
    std::string input_path;
    std::string output_dir = ".";
    Eigen::Index r = 1;
    Eigen::Index s = 0;
    Eigen::Index b = 0;
    std::uint64_t seed = 1;
    std::string null_mode = "full-permute";
    std::vector<int> tested_pcs;
    std::string rotation_path;
    std::string constraint_path;
    std::vector<double> constraint_values;
    double fdr_threshold = 0.01;
    bool pseudocount = false;
    unsigned threads = 0;
    Eigen::Index checkpoint_every = 0;
    // simulate / evaluate
    std::string scenario = "1";
    bool all_16 = false;
    std::size_t studies = 100;
    std::vector<std::string> methods{"conventional", "jackstraw"};
    std::vector<Eigen::Index> s_values;
    // enrich
    std::string sets_path;
    std::size_t permutations = 1000;
};

inline nlohmann::json to_json(const RunConfig& c) {
    return {{"command", c.command},
            {"input", c.input_path},
            {"r", c.r},
            {"s", c.s},
            {"b", c.b},
            {"seed", c.seed},
            {"null_mode", c.null_mode},
            {"tested_pcs", c.tested_pcs},
            {"rotation", c.rotation_path},
            {"constraint", c.constraint_path},
            {"constraint_values", c.constraint_values},
            {"fdr_threshold", c.fdr_threshold},
            {"pseudocount", c.pseudocount},
            {"checkpoint_every", c.checkpoint_every},
            {"scenario", c.scenario},
            {"all_16", c.all_16},
            {"studies", c.studies},
            {"methods", c.methods},
            {"s_values", c.s_values},
            {"sets", c.sets_path},
            {"permutations", c.permutations}};
}

inline void apply_config_file(const std::filesystem::path& path, RunConfig& c) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidConfig, "cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, "config file " + path.string() + ": " + e.what());
    }
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("input", c.input_path);
        get("output_dir", c.output_dir);
        get("r", c.r);
        get("s", c.s);
        get("b", c.b);
        get("seed", c.seed);
        get("null_mode", c.null_mode);
        get("tested_pcs", c.tested_pcs);
        get("rotation", c.rotation_path);
        get("constraint", c.constraint_path);
        get("constraint_values", c.constraint_values);
        get("fdr_threshold", c.fdr_threshold);
        get("pseudocount", c.pseudocount);
        get("threads", c.threads);
        get("checkpoint_every", c.checkpoint_every);
        get("scenario", c.scenario);
        get("all_16", c.all_16);
        get("studies", c.studies);
        get("methods", c.methods);
        get("s_values", c.s_values);
        get("sets", c.sets_path);
        get("permutations", c.permutations);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidConfig, "config file " + path.string() + ": " + e.what());
    }
}

namespace detail {

inline std::filesystem::path prepare_output_dir(const RunConfig& c) {
    std::filesystem::path dir(c.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::InvalidConfig, "cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

inline void write_provenance(const std::filesystem::path& dir, const RunConfig& c, const std::string& input_digest,
                             const std::vector<std::string>& outputs) {
    const auto cfg = to_json(c);
    nlohmann::json j;
    j["library_version"] = kVersion;
    j["command"] = c.command;
    j["config"] = cfg;
    j["config_digest"] = digest(cfg.dump());
    j["input_digest"] = input_digest;
    j["seed"] = c.seed;
    j["outputs"] = outputs;
    io::write_json(dir / "provenance.json", j);
}

inline HypothesisSpec build_spec(const RunConfig& c) {
    HypothesisSpec spec;
    spec.r = c.r;
    if (!c.rotation_path.empty()) {
        spec.rotation = io::read_matrix(c.rotation_path).values;
    }
    if (!c.constraint_path.empty()) {
        if (!c.tested_pcs.empty()) {
            fail(ErrorKind::InvalidConfig, "--tested-pcs and --constraint are mutually exclusive");
        }
        LinearConstraint lin;
        lin.c_matrix = io::read_matrix(c.constraint_path).values;
        lin.a_vector = Vector::Zero(lin.c_matrix.cols());
        if (!c.constraint_values.empty()) {
            if (static_cast<Eigen::Index>(c.constraint_values.size()) != lin.c_matrix.cols()) {
                fail(ErrorKind::InvalidConfig, "--constraint-values needs one value per constraint column");
            }
            for (std::size_t k = 0; k < c.constraint_values.size(); ++k) {
                lin.a_vector[static_cast<Eigen::Index>(k)] = c.constraint_values[k];
            }
        }
        spec.constraint = std::move(lin);
    } else if (!c.tested_pcs.empty()) {
        spec.constraint = SubsetNull{c.tested_pcs};
    }
    validate(spec);
    return spec;
}

inline void check_fdr(const RunConfig& c) {
    if (!(c.fdr_threshold > 0.0 && c.fdr_threshold < 1.0)) {
        fail(ErrorKind::InvalidConfig, "--fdr must lie in (0, 1)");
    }
}

inline void require_input(const RunConfig& c) {
    if (c.input_path.empty()) fail(ErrorKind::InvalidConfig, c.command + " needs --input");
}

/// Writes pvalues.tsv and summary.json for a per-variable result.
inline void write_association_outputs(const std::filesystem::path& dir, const RunConfig& c, const DataMatrix& mat,
                                      const JackstrawResult& result) {
    const auto fdr_result = fdr(result.p_values);
    {
        std::ofstream out(dir / "pvalues.tsv");
        out << "row_id\tF\tp\tq\n";
        for (std::size_t i = 0; i < result.p_values.size(); ++i) {
            out << mat.row_ids[i] << '\t' << io::format_double(result.observed_f[i]) << '\t'
                << io::format_double(result.p_values[i]) << '\t' << io::format_double(fdr_result.q_values[i]) << '\n';
        }
    }
    const auto significant = std::count_if(fdr_result.q_values.begin(), fdr_result.q_values.end(),
                                           [&](double q) { return q <= c.fdr_threshold; });
    nlohmann::json summary;
    summary["variables"] = result.p_values.size();
    summary["pi0_hat"] = fdr_result.pi0_hat;
    summary["fdr_threshold"] = c.fdr_threshold;
    summary["significant_at_threshold"] = significant;
    summary["df_num"] = result.df_num;
    summary["df_den"] = result.df_den;
    summary["negative_control"] = result.negative_control;
    summary["config"] = io::to_json(result.provenance.config);
    summary["config_digest"] = result.provenance.config_digest;
    summary["input_digest"] = result.provenance.input_digest;
    summary["null_pool"] = io::to_json(result.null_pool_summary);
    summary["resumed_from_iteration"] = result.provenance.resumed_from;
    summary["warnings"] = result.warnings;
    io::write_json(dir / "summary.json", summary);
}

} // namespace detail

inline int cmd_pca(const RunConfig& c) {
    detail::require_input(c);
    const auto mat = io::read_matrix(c.input_path);
    const auto dec = compute_pca(mat, c.r);
    const auto dir = detail::prepare_output_dir(c);

    std::vector<std::string> pc_ids;
    for (Eigen::Index k = 0; k < c.r; ++k) pc_ids.push_back("PC" + std::to_string(k + 1));
    io::write_matrix(dir / "vt_r.tsv", DataMatrix{top_pcs(dec), pc_ids, mat.col_ids});
    io::write_matrix(dir / "u_r.tsv", DataMatrix{dec.u.leftCols(c.r), mat.row_ids, pc_ids});
    {
        std::ofstream out(dir / "scree.tsv");
        out << "pc\tpct_variance\n";
        for (const auto& p : scree_data(dec)) out << p.pc_index << '\t' << io::format_double(p.pct_variance) << '\n';
    }
    detail::write_provenance(dir, c, digest(mat), {"vt_r.tsv", "u_r.tsv", "scree.tsv"});
    return kOk;
}

inline int cmd_jackstraw(const RunConfig& c, bool delete_s) {
    detail::require_input(c);
    detail::check_fdr(c);
    const auto mat = io::read_matrix(c.input_path);
    const auto spec = detail::build_spec(c);
    const auto dir = detail::prepare_output_dir(c);

    JackstrawConfig cfg = default_config(mat.rows(), spec, c.seed);
    if (c.s > 0) cfg.s = c.s;
    if (c.b > 0) {
        cfg.b = c.b;
    } else if (c.s > 0) {
        cfg.b = (std::max<Eigen::Index>(10 * mat.rows(), 10000) + cfg.s - 1) / cfg.s;
    }
    cfg.null_mode = parse_null_mode(c.null_mode);
    cfg.pseudocount = c.pseudocount;
    cfg.threads = c.threads;
    if (c.checkpoint_every > 0) {
        cfg.checkpoint_every = c.checkpoint_every;
        cfg.checkpoint_path = dir / "checkpoint.json";
    }

    const auto result = delete_s ? run_delete_s(mat, cfg) : run_jackstraw(mat, cfg);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    detail::write_association_outputs(dir, c, mat, result);
    detail::write_provenance(dir, c, result.provenance.input_digest, {"pvalues.tsv", "summary.json"});
    return kOk;
}

inline std::vector<sim::Method> build_methods(const RunConfig& c, const sim::ScenarioConfig& scenario) {
    const auto spec = sim::scenario_hypothesis(scenario);
    std::vector<Eigen::Index> s_values = c.s_values;
    if (s_values.empty()) s_values.push_back(c.s > 0 ? c.s : std::max<Eigen::Index>(1, scenario.m / 20));
    std::vector<sim::Method> out;
    for (const auto& name : c.methods) {
        if (name == "conventional") {
            out.push_back(sim::conventional_f_method(spec));
        } else if (name == "jackstraw") {
            for (auto s : s_values) {
                out.push_back(sim::jackstraw_method(s, c.b > 0 ? c.b : sim::default_iterations(s), spec,
                                                    parse_null_mode(c.null_mode)));
            }
        } else if (name == "delete-s") {
            for (auto s : s_values) out.push_back(sim::delete_s_method(s, spec));
        } else {
            fail(ErrorKind::InvalidConfig, "unknown method '" + name + "'");
        }
    }
    if (out.empty()) fail(ErrorKind::InvalidConfig, "no methods selected");
    return out;
}

inline int cmd_evaluate(const RunConfig& c) {
    std::vector<sim::ScenarioConfig> scenarios;
    if (c.all_16) {
        scenarios = sim::scenario_grid(c.studies, c.seed);
    } else {
        scenarios.push_back(sim::scenario_by_id(c.scenario, c.studies, c.seed));
    }
    const auto dir = detail::prepare_output_dir(c);
    std::vector<std::string> outputs;
    nlohmann::json index = nlohmann::json::array();
    for (const auto& scenario : scenarios) {
        const auto report = sim::run_joint_null_evaluation(scenario, build_methods(c, scenario), c.threads);
        const std::string stem = "scenario_" + scenario.id;
        io::write_json(dir / (stem + "_report.json"), io::to_json(report));
        {
            std::ofstream out(dir / (stem + "_ks.tsv"));
            io::write_ks_table(out, report);
        }
        {
            std::ofstream out(dir / (stem + "_qq.tsv"));
            io::write_qq_table(out, report);
        }
        outputs.insert(outputs.end(), {stem + "_report.json", stem + "_ks.tsv", stem + "_qq.tsv"});
        for (const auto& m : report.methods) {
            std::cout << "scenario " << scenario.id << '\t' << m.label << "\tdouble-KS one-sided p = "
                      << io::format_double(m.double_ks_one_sided.p_value) << '\n';
        }
    }
    detail::write_provenance(dir, c, "", outputs);
    return kOk;
}

/// Writes the generated studies of one scenario (matrix plus truth table per study).
inline int cmd_simulate(const RunConfig& c) {
    const auto scenario = sim::scenario_by_id(c.scenario, c.studies, c.seed);
    const auto dir = detail::prepare_output_dir(c);
    std::vector<std::string> outputs;
    for (std::size_t k = 0; k < scenario.studies; ++k) {
        const auto study = sim::generate_study(scenario, k);
        char stem[32];
        std::snprintf(stem, sizeof stem, "study_%03zu", k + 1);
        io::write_matrix(dir / (std::string(stem) + ".tsv"), study.y);
        std::ofstream truth(dir / (std::string(stem) + "_truth.tsv"));
        truth << "row_id\tnull";
        for (Eigen::Index f = 0; f < study.b_true.cols(); ++f) truth << "\tb" << f + 1;
        truth << '\n';
        for (Eigen::Index i = 0; i < study.b_true.rows(); ++i) {
            truth << study.y.row_ids[static_cast<std::size_t>(i)] << '\t'
                  << (study.true_null_mask[static_cast<std::size_t>(i)] ? 1 : 0);
            for (Eigen::Index f = 0; f < study.b_true.cols(); ++f) truth << '\t' << io::format_double(study.b_true(i, f));
            truth << '\n';
        }
        outputs.push_back(std::string(stem) + ".tsv");
        outputs.push_back(std::string(stem) + "_truth.tsv");
    }
    nlohmann::json meta = io::to_json(scenario);
    io::write_json(dir / "scenario.json", meta);
    outputs.push_back("scenario.json");
    detail::write_provenance(dir, c, "", outputs);
    return kOk;
}

namespace detail {

struct ScoreTable {
    std::vector<std::string> ids;
    std::vector<double> scores;
};

/// Reads the row_id and F columns of a pvalues.tsv.
inline ScoreTable read_scores(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Parse, "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::ptrdiff_t id_col = -1;
    std::ptrdiff_t score_col = -1;
    ScoreTable out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = io::split(line, '\t');
        if (id_col < 0) {
            for (std::size_t k = 0; k < fields.size(); ++k) {
                if (fields[k] == "row_id") id_col = static_cast<std::ptrdiff_t>(k);
                if (fields[k] == "F") score_col = static_cast<std::ptrdiff_t>(k);
            }
            if (id_col < 0 || score_col < 0) fail(ErrorKind::Parse, path.string() + ": header needs row_id and F columns");
            continue;
        }
        if (static_cast<std::ptrdiff_t>(fields.size()) <= std::max(id_col, score_col)) {
            fail(ErrorKind::Parse, path.string() + ": line " + std::to_string(line_no) + " is too short");
        }
        out.ids.emplace_back(fields[static_cast<std::size_t>(id_col)]);
        out.scores.push_back(io::parse_double(fields[static_cast<std::size_t>(score_col)], line_no,
                                              static_cast<std::size_t>(score_col) + 1));
    }
    return out;
}

/// set -> member row ids, from a two-column "set<TAB>row_id" file with header.
inline std::map<std::string, std::vector<std::string>> read_sets(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Parse, "cannot open " + path.string());
    std::map<std::string, std::vector<std::string>> out;
    std::string line;
    std::size_t line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto fields = io::split(line, '\t');
        if (fields.size() != 2) fail(ErrorKind::Parse, path.string() + ": line " + std::to_string(line_no) + " needs 2 fields");
        out[std::string(fields[0])].emplace_back(fields[1]);
    }
    return out;
}

} // namespace detail

/// One-sided rank-sum enrichment of gene sets by the observed association statistic.
inline int cmd_enrich(const RunConfig& c) {
    detail::require_input(c);
    if (c.sets_path.empty()) fail(ErrorKind::InvalidConfig, "enrich needs --sets");
    const auto table = detail::read_scores(c.input_path);
    const auto sets = detail::read_sets(c.sets_path);
    const auto dir = detail::prepare_output_dir(c);

    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < table.ids.size(); ++i) position[table.ids[i]] = i;

    std::vector<std::string> names;
    std::vector<std::size_t> sizes;
    std::vector<double> p;
    std::size_t set_index = 0;
    for (const auto& [name, members] : sets) {
        std::vector<bool> is_member(table.ids.size(), false);
        for (const auto& id : members) {
            if (auto it = position.find(id); it != position.end()) is_member[it->second] = true;
        }
        std::vector<double> in_set;
        std::vector<double> out_set;
        for (std::size_t i = 0; i < table.ids.size(); ++i) (is_member[i] ? in_set : out_set).push_back(table.scores[i]);
        if (in_set.empty() || out_set.empty()) {
            std::cerr << "warning: set '" << name << "' skipped (no overlap or covers everything)\n";
            ++set_index;
            continue;
        }
        names.push_back(name);
        sizes.push_back(in_set.size());
        p.push_back(rank_sum_enrichment(in_set, out_set, c.permutations, c.seed + set_index, c.threads));
        ++set_index;
    }
    std::vector<double> q = p.empty() ? std::vector<double>{} : bh_fdr(p);
    std::ofstream out(dir / "enrichment.tsv");
    out << "set\tsize\tp\tq\n";
    for (std::size_t k = 0; k < names.size(); ++k) {
        out << names[k] << '\t' << sizes[k] << '\t' << io::format_double(p[k]) << '\t' << io::format_double(q[k]) << '\n';
    }
    out.close();
    detail::write_provenance(dir, c, "", {"enrichment.tsv"});
    return kOk;
}

/**
 * Entry point shared by the executable and the tests. Returns the process
 * exit code: 0 success, 2 input parse error, 3 numeric error, 4 configuration error.
 */
inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
    RunConfig c;
    // A --config file supplies defaults; flags given on the command line win.
    for (int k = 1; k + 1 < argc; ++k) {
        if (std::string(argv[k]) == "--config") {
            try {
                apply_config_file(argv[k + 1], c);
            } catch (const Error& e) {
                err << "error: " << e.what() << '\n';
                return exit_code_for(e.kind());
            }
        }
    }

    CLI::App app{"Significance of associations between variables and their principal components"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with default option values");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON file with default option values");
        sub->add_option("-o,--output-dir", c.output_dir, "Directory for outputs")->capture_default_str();
        sub->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
        sub->add_option("--threads", c.threads, "Worker cap (0 = JACKSTRAW_THREADS or all cores)");
    };
    auto add_model = [&](CLI::App* sub) {
        sub->add_option("-i,--input", c.input_path, "Input matrix (TSV, or CSV by extension)");
        sub->add_option("-r", c.r, "Number of PCs in the model")->capture_default_str();
        sub->add_option("--tested-pcs", c.tested_pcs, "1-based PCs under test; others are adjusted for")->delimiter(',');
        sub->add_option("--rotation", c.rotation_path, "r x r rotation matrix file");
        sub->add_option("--constraint", c.constraint_path, "r x q constraint matrix file");
        sub->add_option("--constraint-values", c.constraint_values, "q right-hand-side values")->delimiter(',');
        sub->add_option("--fdr", c.fdr_threshold, "FDR threshold for the summary count")->capture_default_str();
    };

    auto* pca = app.add_subcommand("pca", "PCA of a row-centered matrix");
    pca->add_option("-i,--input", c.input_path, "Input matrix");
    pca->add_option("-r", c.r, "Number of PCs to emit")->capture_default_str();
    add_common(pca);

    auto* js = app.add_subcommand("jackstraw", "Permute-s jackstraw p-values");
    add_model(js);
    add_common(js);
    js->add_option("-s", c.s, "Synthetic null rows per iteration (default ceil(0.1 m))");
    js->add_option("-B,--iterations", c.b, "Iterations (default: s * B >= max(10 m, 10^4))");
    js->add_option("--null-mode", c.null_mode, "full-permute | residual-permute | residual-bootstrap")
        ->capture_default_str();
    js->add_flag("--pseudocount", c.pseudocount, "Use (count + 1) / (s B + 1)");
    js->add_option("--checkpoint-every", c.checkpoint_every, "Snapshot the null pool every K iterations");

    auto* ds = app.add_subcommand("delete-s", "Delete-s variant (negative control)");
    add_model(ds);
    add_common(ds);
    ds->add_option("-s", c.s, "Block size (default ceil(0.1 m))");

    auto add_scenario = [&](CLI::App* sub) {
        sub->add_option("--scenario", c.scenario, "Scenario id: 1..16 or 2pc")->capture_default_str();
        sub->add_option("--studies", c.studies, "Simulated studies")->capture_default_str();
    };
    auto* simulate = app.add_subcommand("simulate", "Write simulated studies to disk");
    add_scenario(simulate);
    add_common(simulate);

    auto* evaluate = app.add_subcommand("evaluate", "Joint null criterion evaluation");
    add_scenario(evaluate);
    add_common(evaluate);
    evaluate->add_flag("--all-16", c.all_16, "Run the full sixteen-scenario grid");
    evaluate->add_option("--methods", c.methods, "conventional, jackstraw, delete-s")->delimiter(',');
    evaluate->add_option("-s", c.s_values, "Values of s (comma separated; default 0.05 m)")->delimiter(',');
    evaluate->add_option("-B,--iterations", c.b, "Jackstraw iterations (default ceil(10^4 / s))");
    evaluate->add_option("--null-mode", c.null_mode, "Jackstraw null mode")->capture_default_str();

    auto* enrich = app.add_subcommand("enrich", "Rank-sum enrichment of variable sets");
    enrich->add_option("-i,--input", c.input_path, "pvalues.tsv from jackstraw");
    enrich->add_option("--sets", c.sets_path, "TSV of set<TAB>row_id with a header line");
    enrich->add_option("--permutations", c.permutations, "Permutations per set")->capture_default_str();
    add_common(enrich);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, std::cout, err);
            return kOk;
        }
        app.exit(e, std::cout, err);
        return kConfigError;
    }

    try {
        if (pca->parsed()) {
            c.command = "pca";
            return cmd_pca(c);
        }
        if (js->parsed()) {
            c.command = "jackstraw";
            return cmd_jackstraw(c, false);
        }
        if (ds->parsed()) {
            c.command = "delete-s";
            return cmd_jackstraw(c, true);
        }
        if (simulate->parsed()) {
            c.command = "simulate";
            return cmd_simulate(c);
        }
        if (evaluate->parsed()) {
            c.command = "evaluate";
            return cmd_evaluate(c);
        }
        if (enrich->parsed()) {
            c.command = "enrich";
            return cmd_enrich(c);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumericError;
    }
    return kUsage;
}

} // namespace jackstraw::cli

#endif
