#include <algorithm>
#include <filesystem>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include <jackstraw/engine.hpp>
#include <jackstraw/significance.hpp>
#include <jackstraw/simulation.hpp>

#include "oracles.hpp"

using namespace jackstraw;

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = dist(rng);
    }
    return out;
}

/// Noise plus `signal_rows` rows carrying a strong dichotomous pattern.
DataMatrix planted(Eigen::Index m, Eigen::Index n, Eigen::Index signal_rows, double effect, std::uint64_t seed) {
    Matrix y = gaussian(m, n, seed);
    const Matrix l = sim::make_latent_basis(sim::LShape::Dichotomous, n);
    for (Eigen::Index i = 0; i < signal_rows; ++i) y.row(i) += effect * l.row(0);
    return DataMatrix::from_values(y);
}

JackstrawConfig small_config(Eigen::Index s, Eigen::Index b, std::uint64_t seed = 1) {
    JackstrawConfig cfg;
    cfg.s = s;
    cfg.b = b;
    cfg.seed = seed;
    cfg.threads = 1;
    return cfg;
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("jackstraw_engine_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no jackstraw::Error thrown";
    return ErrorKind::Parse;
}

} // namespace

TEST(SynthesizeNullRows, PermutationKeepsEachRowMultiset) {
    Matrix y = gaussian(10, 8, 1);
    y.row(3).setConstant(4.0);
    const auto mat = DataMatrix::from_values(y);
    const std::vector<std::int64_t> rows{0, 3, 7};
    Rng rng = make_stream(5, {1});
    const auto out = synthesize_null_rows(mat, rows, NullMode::FullPermute, Matrix(0, 8), rng);
    for (Eigen::Index i = 0; i < 10; ++i) {
        std::vector<double> a(y.row(i).begin(), y.row(i).end());
        std::vector<double> b(out.values.row(i).begin(), out.values.row(i).end());
        if (std::find(rows.begin(), rows.end(), i) == rows.end()) {
            EXPECT_EQ(a, b) << "untouched row " << i;
        } else {
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            EXPECT_EQ(a, b) << "permuted row " << i;
        }
    }
    EXPECT_EQ(out.values.row(3), y.row(3));
}

TEST(SynthesizeNullRows, IndexErrors) {
    const auto mat = DataMatrix::from_values(gaussian(6, 5, 2));
    Rng rng = make_stream(1, {1});
    EXPECT_EQ(kind_of([&] { synthesize_null_rows(mat, std::vector<std::int64_t>{6}, NullMode::FullPermute, {}, rng); }),
              ErrorKind::InvalidIndex);
    EXPECT_EQ(kind_of([&] { synthesize_null_rows(mat, std::vector<std::int64_t>{-1}, NullMode::FullPermute, {}, rng); }),
              ErrorKind::InvalidIndex);
    EXPECT_EQ(kind_of([&] { synthesize_null_rows(mat, std::vector<std::int64_t>{1, 1}, NullMode::FullPermute, {}, rng); }),
              ErrorKind::InvalidIndex);
    EXPECT_EQ(kind_of([&] {
                  synthesize_null_rows(mat, std::vector<std::int64_t>{1}, NullMode::ResidualPermute, Matrix(0, 5), rng);
              }),
              ErrorKind::InvalidMode);
}

TEST(SynthesizeNullRows, ResidualModesKeepAdjustmentFit) {
    const Eigen::Index n = 12;
    const Matrix basis = sim::make_latent_basis(sim::LShape::TwoFactor, n);
    Matrix y = gaussian(5, n, 3);
    y = row_center(y);
    for (Eigen::Index i = 0; i < 5; ++i) y.row(i) += 5.0 * basis.row(1);
    const auto mat = DataMatrix::from_values(y);
    const Matrix adjustment = basis.row(1);
    const std::vector<std::int64_t> rows{0, 2, 4};
    for (auto mode : {NullMode::ResidualPermute, NullMode::ResidualBootstrap}) {
        Rng rng = make_stream(9, {2});
        const auto out = synthesize_null_rows(mat, rows, mode, adjustment, rng);
        for (auto i : rows) {
            const double before = y.row(i).dot(basis.row(1));
            const double after = out.values.row(i).dot(basis.row(1));
            EXPECT_NEAR(after, before, 1e-10) << to_string(mode);
            EXPECT_NEAR(out.values.row(i).sum(), 0.0, 1e-10);
        }
    }
}

TEST(EmpiricalPValues, MatchNaiveScan) {
    std::mt19937_64 rng(4);
    std::exponential_distribution<double> dist(1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> pool(200 + trial);
        for (auto& v : pool) v = std::round(dist(rng) * 20.0) / 20.0; // coarse grid forces ties
        std::vector<double> observed(50);
        for (auto& v : observed) v = std::round(dist(rng) * 20.0) / 20.0;
        observed[0] = pool[0];
        const std::vector<double> original = pool;
        for (bool pc : {false, true}) {
            auto work = original;
            const auto p = empirical_p_values(observed, work, pc);
            for (std::size_t i = 0; i < observed.size(); ++i) {
                EXPECT_DOUBLE_EQ(p[i], oracle::empirical_p(observed[i], original, pc));
            }
        }
    }
}

TEST(EmpiricalPValues, ExtremesAndInfinity) {
    std::vector<double> pool{1.0, 2.0, std::numeric_limits<double>::infinity()};
    const std::vector<double> observed{100.0, 0.5, std::numeric_limits<double>::infinity()};
    const auto p = empirical_p_values(observed, pool);
    EXPECT_DOUBLE_EQ(p[0], 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(p[1], 1.0);
    EXPECT_DOUBLE_EQ(p[2], 1.0 / 3.0);
}

TEST(Jackstraw, BasicPropertiesOnPlantedSignal) {
    const auto mat = planted(200, 12, 10, 12.0, 5);
    const auto cfg = small_config(20, 30);
    const auto res = run_jackstraw(mat, cfg);
    ASSERT_EQ(res.p_values.size(), 200u);
    EXPECT_EQ(res.null_statistics.size(), 600u);
    EXPECT_EQ(res.null_pool_summary.count, 600u);
    EXPECT_EQ(res.df_num, 1);
    EXPECT_EQ(res.df_den, 10);
    EXPECT_FALSE(res.negative_control);
    for (double p : res.p_values) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
    // p is a non-increasing function of F.
    for (std::size_t i = 0; i < 200; ++i) {
        for (std::size_t j = 0; j < 200; ++j) {
            if (res.observed_f[i] > res.observed_f[j]) EXPECT_LE(res.p_values[i], res.p_values[j]);
        }
    }
    // Planted rows beat every synthetic null statistic.
    const double pool_max = *std::max_element(res.null_statistics.begin(), res.null_statistics.end());
    for (std::size_t i = 0; i < 10; ++i) {
        if (res.observed_f[i] > pool_max) EXPECT_EQ(res.p_values[i], 0.0);
    }
    EXPECT_EQ(res.p_values[0], 0.0);
}

TEST(Jackstraw, PValuesEqualNaiveScanOfNullPool) {
    const auto mat = planted(150, 10, 8, 6.0, 6);
    const auto res = run_jackstraw(mat, small_config(15, 20));
    for (std::size_t i = 0; i < res.p_values.size(); ++i) {
        EXPECT_DOUBLE_EQ(res.p_values[i], oracle::empirical_p(res.observed_f[i], res.null_statistics));
    }
    auto pc_cfg = small_config(15, 20);
    pc_cfg.pseudocount = true;
    const auto pc = run_jackstraw(mat, pc_cfg);
    EXPECT_EQ(pc.null_statistics, res.null_statistics);
    for (std::size_t i = 0; i < pc.p_values.size(); ++i) {
        EXPECT_DOUBLE_EQ(pc.p_values[i], oracle::empirical_p(pc.observed_f[i], pc.null_statistics, true));
        EXPECT_GT(pc.p_values[i], 0.0);
    }
}

TEST(Jackstraw, ObservedStatisticsMatchOracle) {
    const auto mat = planted(60, 9, 5, 4.0, 7);
    const auto res = run_jackstraw(mat, small_config(6, 20));
    const Matrix c = row_center(mat.values);
    const Matrix v = right_singular_vectors(c, 1);
    for (Eigen::Index i = 0; i < 60; ++i) {
        const double want = oracle::f_statistic(c.row(i).transpose(), v, HypothesisSpec{}, 1);
        EXPECT_NEAR(res.observed_f[static_cast<std::size_t>(i)], want, 1e-9 * std::max(1.0, want));
    }
}

TEST(Jackstraw, IdenticalAcrossThreadCounts) {
    const auto mat = planted(120, 10, 6, 5.0, 8);
    auto cfg = small_config(12, 25, 99);
    const auto one = run_jackstraw(mat, cfg);
    for (unsigned t : {2u, 8u}) {
        cfg.threads = t;
        const auto other = run_jackstraw(mat, cfg);
        EXPECT_EQ(other.null_statistics, one.null_statistics);
        EXPECT_EQ(other.p_values, one.p_values);
    }
}

TEST(Jackstraw, SeedChangesPool) {
    const auto mat = planted(80, 8, 4, 5.0, 9);
    const auto a = run_jackstraw(mat, small_config(8, 15, 1));
    const auto b = run_jackstraw(mat, small_config(8, 15, 2));
    EXPECT_NE(a.null_statistics, b.null_statistics);
    EXPECT_EQ(a.observed_f, b.observed_f);
}

TEST(Jackstraw, IdentityRotationChangesNothing) {
    const auto mat = planted(90, 10, 5, 5.0, 10);
    auto cfg = small_config(9, 15);
    cfg.spec.r = 2;
    const auto plain = run_jackstraw(mat, cfg);
    cfg.spec.rotation = Matrix::Identity(2, 2);
    const auto rotated = run_jackstraw(mat, cfg);
    EXPECT_EQ(plain.p_values, rotated.p_values);
    EXPECT_NE(plain.provenance.config_digest, rotated.provenance.config_digest);
}

TEST(Jackstraw, ResumeFromCheckpointReproducesUninterruptedRun) {
    const auto dir = scratch("resume");
    const auto mat = planted(100, 10, 5, 5.0, 11);
    auto cfg = small_config(10, 20, 3);
    const auto reference = run_jackstraw(mat, cfg);

    cfg.checkpoint_every = 5;
    cfg.checkpoint_path = dir / "cp.json";
    const auto full = run_jackstraw(mat, cfg);
    EXPECT_EQ(full.null_statistics, reference.null_statistics);
    EXPECT_EQ(full.provenance.resumed_from, 0);

    // Simulate an interruption after 7 iterations by rewriting the snapshot.
    auto cp = read_checkpoint(cfg.checkpoint_path);
    ASSERT_TRUE(cp.has_value());
    EXPECT_EQ(cp->completed, 20);
    cp->completed = 7;
    cp->null_pool.resize(70);
    write_checkpoint(cfg.checkpoint_path, *cp);

    const auto resumed = run_jackstraw(mat, cfg);
    EXPECT_EQ(resumed.provenance.resumed_from, 7);
    EXPECT_EQ(resumed.null_statistics, reference.null_statistics);
    EXPECT_EQ(resumed.p_values, reference.p_values);
}

TEST(Jackstraw, RefusesForeignCheckpoint) {
    const auto dir = scratch("refuse");
    const auto mat = planted(100, 10, 5, 5.0, 12);
    auto cfg = small_config(10, 12, 3);
    cfg.checkpoint_every = 4;
    cfg.checkpoint_path = dir / "cp.json";
    run_jackstraw(mat, cfg);
    cfg.seed = 4;
    EXPECT_EQ(kind_of([&] { run_jackstraw(mat, cfg); }), ErrorKind::RefuseResume);
    auto other = mat;
    other.values(0, 0) += 1.0;
    cfg.seed = 3;
    EXPECT_EQ(kind_of([&] { run_jackstraw(other, cfg); }), ErrorKind::RefuseResume);
}

TEST(JackstrawConfig, ValidationRules) {
    EXPECT_EQ(kind_of([] { validate(small_config(51, 10), 100); }), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of([] { validate(small_config(0, 200), 100); }), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of([] { validate(small_config(10, 9), 100); }), ErrorKind::InvalidConfig);
    EXPECT_TRUE(validate(small_config(10, 100), 100).empty());
    EXPECT_EQ(validate(small_config(10, 10), 100).size(), 1u);
    auto cfg = small_config(10, 100);
    cfg.null_mode = NullMode::ResidualPermute;
    EXPECT_EQ(kind_of([&] { validate(cfg, 100); }), ErrorKind::InvalidMode);
    cfg.spec = HypothesisSpec{2, {}, SubsetNull{{1}}};
    EXPECT_NO_THROW(validate(cfg, 100));
    EXPECT_EQ(parse_null_mode("residual-bootstrap"), NullMode::ResidualBootstrap);
    EXPECT_EQ(kind_of([] { parse_null_mode("shuffle"); }), ErrorKind::InvalidConfig);
}

TEST(JackstrawConfig, Defaults) {
    for (Eigen::Index m : {10, 95, 1000, 5000, 20000}) {
        const auto cfg = default_config(m);
        EXPECT_EQ(cfg.s, (m + 9) / 10);
        EXPECT_GE(cfg.s * cfg.b, std::max<Eigen::Index>(10 * m, 10000));
        EXPECT_LT(cfg.s * (cfg.b - 1), std::max<Eigen::Index>(10 * m, 10000));
    }
}

TEST(Jackstraw, RankAndDataErrors) {
    const auto mat = planted(40, 6, 3, 5.0, 13);
    auto cfg = small_config(4, 30);
    cfg.spec.r = 5;
    EXPECT_EQ(kind_of([&] { run_jackstraw(mat, cfg); }), ErrorKind::InvalidRank);
    auto bad = mat;
    bad.values.row(5).setConstant(1.0);
    EXPECT_EQ(kind_of([&] { run_jackstraw(bad, small_config(4, 30)); }), ErrorKind::InvalidData);
}

TEST(Jackstraw, SubsetHypothesisWithResidualModes) {
    sim::ScenarioConfig scenario = sim::two_pc_scenario(1, 4);
    scenario.m = 300;
    const auto study = sim::generate_study(scenario, 0);
    for (auto mode : {NullMode::FullPermute, NullMode::ResidualPermute, NullMode::ResidualBootstrap}) {
        auto cfg = small_config(30, 20, 5);
        cfg.spec = sim::scenario_hypothesis(scenario);
        cfg.null_mode = mode;
        const auto a = run_jackstraw(study.y, cfg);
        cfg.threads = 3;
        const auto b = run_jackstraw(study.y, cfg);
        EXPECT_EQ(a.p_values, b.p_values) << to_string(mode);
        EXPECT_EQ(a.df_num, 1);
        EXPECT_EQ(a.df_den, 17);
    }
}

TEST(Jackstraw, SubsetHypothesisRanksTrueFirstFactorRowsHigh) {
    // Unit effects with noise sd 0.3 put both factors well above the noise
    // spectrum, so PC1 tracks L1.
    auto scenario = sim::two_pc_scenario(1, 6);
    scenario.b_dist = sim::BDist::Bernoulli;
    scenario.noise_sd = 0.3;
    const auto study = sim::generate_study(scenario, 0);
    auto cfg = small_config(100, 20, 6);
    cfg.spec = sim::scenario_hypothesis(scenario);
    const auto res = run_jackstraw(study.y, cfg);

    // AUC of -p for separating rows with a first-factor effect from the rest.
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < res.p_values.size(); ++i) {
        if (study.true_null_mask[i]) continue;
        for (std::size_t j = 0; j < res.p_values.size(); ++j) {
            if (!study.true_null_mask[j]) continue;
            wins += res.p_values[i] < res.p_values[j] ? 1.0 : (res.p_values[i] == res.p_values[j] ? 0.5 : 0.0);
            pairs += 1.0;
        }
    }
    EXPECT_GT(wins / pairs, 0.9);
}

TEST(Jackstraw, PureNoisePValuesLookUniform) {
    const auto mat = DataMatrix::from_values(gaussian(300, 15, 14));
    const auto res = run_jackstraw(mat, small_config(30, 100, 14));
    EXPECT_GT(ks_uniform(res.p_values, KsSide::TwoSided).p_value, 1e-3);
    EXPECT_GE(estimate_pi0(res.p_values), 0.85);
}

TEST(DeleteS, PartitionCoversEachRowOnce) {
    const auto blocks = delete_s_blocks(1000, 100, 7);
    ASSERT_EQ(blocks.size(), 10u);
    std::vector<int> seen(1000, 0);
    for (const auto& b : blocks) {
        EXPECT_EQ(b.size(), 100u);
        for (auto i : b) ++seen[static_cast<std::size_t>(i)];
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    const auto uneven = delete_s_blocks(105, 25, 7);
    ASSERT_EQ(uneven.size(), 5u);
    EXPECT_EQ(uneven.back().size(), 5u);
    EXPECT_EQ(kind_of([] { delete_s_blocks(10, 10, 1); }), ErrorKind::InvalidConfig);
}

TEST(DeleteS, StatisticsUsePcsOfRemainingRows) {
    const auto mat = planted(60, 10, 4, 4.0, 15);
    auto cfg = small_config(15, 1, 21);
    const auto res = run_delete_s(mat, cfg);
    EXPECT_TRUE(res.negative_control);
    EXPECT_TRUE(res.null_statistics.empty());
    const Matrix c = row_center(mat.values);
    for (const auto& block : delete_s_blocks(60, 15, 21)) {
        std::set<std::int64_t> held(block.begin(), block.end());
        Matrix rest(45, 10);
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < 60; ++i) {
            if (!held.count(i)) rest.row(k++) = c.row(i);
        }
        const Matrix v = right_singular_vectors(rest, 1);
        for (auto i : block) {
            const double want = oracle::f_statistic(c.row(i).transpose(), v, HypothesisSpec{}, 1);
            EXPECT_NEAR(res.observed_f[static_cast<std::size_t>(i)], want, 1e-9 * std::max(1.0, want));
            EXPECT_NEAR(res.p_values[static_cast<std::size_t>(i)], f_upper_tail(want, 1, 8), 1e-9);
        }
    }
}

TEST(ConventionalF, PValuesInRange) {
    const auto mat = planted(50, 8, 5, 4.0, 16);
    const auto res = run_conventional_f(mat, HypothesisSpec{});
    ASSERT_EQ(res.p_values.size(), 50u);
    for (double p : res.p_values) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
}
