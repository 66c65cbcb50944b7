#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include <jackstraw/matrix.hpp>
#include <jackstraw/significance.hpp>
#include <jackstraw/simulation.hpp>

using namespace jackstraw;
using namespace jackstraw::sim;

namespace {

ScenarioConfig small_scenario(std::size_t studies = 4) {
    ScenarioConfig cfg = scenario_by_id("1", studies, 3);
    cfg.m = 200;
    return cfg;
}

/// Ignores the data and returns i.i.d. Uniform(0,1) p-values.
Method uniform_oracle() {
    return {"Oracle", [](const StudyData& study, std::uint64_t seed) {
                std::mt19937_64 rng(seed);
                std::uniform_real_distribution<double> unif(0.0, 1.0);
                std::vector<double> p(static_cast<std::size_t>(study.y.rows()));
                for (auto& v : p) v = unif(rng);
                return p;
            }};
}

} // namespace

TEST(LatentBasis, DichotomousIsThePrintedVector) {
    const Matrix l = make_latent_basis(LShape::Dichotomous, 20);
    ASSERT_EQ(l.rows(), 1);
    const double h = 1.0 / std::sqrt(20.0);
    for (Eigen::Index j = 0; j < 20; ++j) EXPECT_EQ(l(0, j), j < 10 ? h : -h);
}

TEST(LatentBasis, TwoFactorRowsArePrintedAndOrthogonal) {
    const Matrix l = make_latent_basis(LShape::TwoFactor, 20);
    ASSERT_EQ(l.rows(), 2);
    const double h = 1.0 / std::sqrt(20.0);
    const int pattern[20] = {1, 1, 1, 1, 1, -1, -1, -1, -1, -1, 1, 1, 1, 1, 1, -1, -1, -1, -1, -1};
    int sign_dot = 0;
    for (Eigen::Index j = 0; j < 20; ++j) {
        EXPECT_EQ(l(1, j), pattern[j] * h);
        sign_dot += (l(0, j) > 0 ? 1 : -1) * pattern[j];
    }
    EXPECT_EQ(sign_dot, 0);
    EXPECT_NEAR(l.row(0).dot(l.row(1)), 0.0, 1e-16);
    EXPECT_NEAR(l.row(1).norm(), 1.0, 1e-15);
}

TEST(LatentBasis, SinusoidalHasUnitNorm) {
    for (Eigen::Index n : {8, 20, 33}) {
        const Matrix l = make_latent_basis(LShape::Sinusoidal, n);
        EXPECT_NEAR(l.norm(), 1.0, 1e-12);
        EXPECT_NEAR(l.sum(), 0.0, 1e-12);
    }
}

TEST(ScenarioGrid, SixteenDistinctConfigs) {
    const auto grid = scenario_grid();
    ASSERT_EQ(grid.size(), 16u);
    std::set<std::tuple<int, int, Eigen::Index, double>> distinct;
    for (const auto& c : grid) distinct.emplace(static_cast<int>(c.l_shape), static_cast<int>(c.b_dist), c.m, c.pi0);
    EXPECT_EQ(distinct.size(), 16u);
    const auto& first = grid.front();
    EXPECT_EQ(first.id, "1");
    EXPECT_EQ(first.l_shape, LShape::Dichotomous);
    EXPECT_EQ(first.b_dist, BDist::Uniform01);
    EXPECT_EQ(first.m, 1000);
    EXPECT_EQ(first.pi0, 0.95);
    EXPECT_THROW(scenario_by_id("17"), Error);
}

TEST(ScenarioConfig, ValidationRejectsDegenerateSettings) {
    ScenarioConfig cfg;
    cfg.pi0 = 1.0;
    EXPECT_THROW(validate(cfg), Error);
    cfg.pi0 = 0.9999;
    EXPECT_THROW(validate(cfg), Error);
    cfg.pi0 = 0.9;
    cfg.n = 3;
    EXPECT_THROW(validate(cfg), Error);
}

TEST(GenerateStudy, NullCountsAndMask) {
    const auto cfg = scenario_by_id("1", 1, 5);
    const auto study = generate_study(cfg, 0);
    EXPECT_EQ(study.y.rows(), 1000);
    EXPECT_EQ(study.y.cols(), 20);
    const auto nulls = std::count(study.true_null_mask.begin(), study.true_null_mask.end(), true);
    EXPECT_EQ(nulls, 950);
    for (Eigen::Index i = 0; i < 1000; ++i) {
        const bool is_null = study.true_null_mask[static_cast<std::size_t>(i)];
        EXPECT_EQ(is_null, study.b_true(i, 0) == 0.0);
        if (!is_null) {
            EXPECT_GT(study.b_true(i, 0), 0.0);
            EXPECT_LT(study.b_true(i, 0), 1.0);
        }
    }
}

TEST(GenerateStudy, BernoulliEffectsAreOne) {
    const auto cfg = scenario_by_id("3", 1, 5);
    ASSERT_EQ(cfg.b_dist, BDist::Uniform01);
    const auto bern = scenario_by_id("5", 1, 5);
    ASSERT_EQ(bern.b_dist, BDist::Bernoulli);
    const auto study = generate_study(bern, 0);
    for (Eigen::Index i = 0; i < study.b_true.rows(); ++i) {
        const double b = study.b_true(i, 0);
        EXPECT_TRUE(b == 0.0 || b == 1.0);
    }
}

TEST(GenerateStudy, NoiselessRowsAreExactSignal) {
    ScenarioConfig cfg;
    cfg.m = 20;
    cfg.pi0 = 0.5;
    cfg.noise_sd = 0.0;
    const auto study = generate_study(cfg, 0);
    Matrix signal(10, 20);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < 20; ++i) {
        const RowVector expected = study.b_true(i, 0) * study.l_true.row(0);
        EXPECT_EQ(study.y.values.row(i), expected);
        if (!study.true_null_mask[static_cast<std::size_t>(i)]) signal.row(k++) = expected;
    }
    ASSERT_EQ(k, 10);
    // Null rows are all zero (and so rejected as constant); PCA of the signal rows recovers L.
    const auto dec = compute_pca(DataMatrix::from_values(signal), 1);
    EXPECT_NEAR(std::abs(top_pcs(dec).row(0).dot(study.l_true.row(0))), 1.0, 1e-12);
}

TEST(GenerateStudy, NullRowVarianceConcentrates) {
    const auto cfg = scenario_by_id("1", 1, 8);
    const auto study = generate_study(cfg, 0);
    const double band = 3.0 * std::sqrt(2.0 / 20.0);
    std::size_t inside = 0;
    std::size_t total = 0;
    double mean_var = 0.0;
    for (Eigen::Index i = 0; i < study.y.rows(); ++i) {
        if (!study.true_null_mask[static_cast<std::size_t>(i)]) continue;
        const auto row = study.y.values.row(i);
        const double var = (row.array() - row.mean()).square().sum() / 19.0;
        inside += std::abs(var - 1.0) <= band ? 1 : 0;
        mean_var += var;
        ++total;
    }
    mean_var /= static_cast<double>(total);
    // Three standard errors of the mean sample variance, and the per-row band
    // holds for all but the chi-square tail (about 0.8% of rows).
    EXPECT_NEAR(mean_var, 1.0, band / std::sqrt(static_cast<double>(total)));
    EXPECT_GE(static_cast<double>(inside) / static_cast<double>(total), 0.98);
}

TEST(GenerateStudy, DeterministicPerSeedAndIndex) {
    const auto cfg = small_scenario();
    const auto a = generate_study(cfg, 2);
    const auto b = generate_study(cfg, 2);
    EXPECT_EQ(a.y.values, b.y.values);
    EXPECT_EQ(a.true_null_mask, b.true_null_mask);
    EXPECT_NE(generate_study(cfg, 3).y.values, a.y.values);
}

TEST(TwoPcScenario, Counts) {
    const auto cfg = two_pc_scenario(1, 9);
    const auto c = two_factor_counts(cfg);
    EXPECT_EQ(c.both + c.first_only, 100);
    EXPECT_EQ(c.both + c.second_only, 60);
    EXPECT_EQ(c.both, 40);
    EXPECT_EQ(c.both + c.first_only + c.second_only, 120);
    const auto study = generate_study(cfg, 0);
    EXPECT_EQ(std::count(study.true_null_mask.begin(), study.true_null_mask.end(), true), 900);
    Eigen::Index second = 0;
    for (Eigen::Index i = 0; i < study.b_true.rows(); ++i) second += study.b_true(i, 1) != 0.0 ? 1 : 0;
    EXPECT_EQ(second, 60);
    const auto spec = scenario_hypothesis(cfg);
    EXPECT_EQ(spec.r, 2);
    EXPECT_TRUE(std::holds_alternative<SubsetNull>(spec.constraint));
}

TEST(Evaluation, ReportShapeAndOracleMethod) {
    auto cfg = small_scenario(30);
    const auto report = run_joint_null_evaluation(cfg, {uniform_oracle(), conventional_f_method(HypothesisSpec{})}, 1);
    ASSERT_EQ(report.methods.size(), 2u);
    EXPECT_EQ(report.scenario_id, "1");
    for (const auto& m : report.methods) {
        EXPECT_EQ(m.ks_one_sided_p.size(), 30u);
        EXPECT_EQ(m.ks_two_sided_p.size(), 30u);
        EXPECT_TRUE(m.failed_studies.empty());
    }
    EXPECT_EQ(report.methods[0].label, "Oracle");
    EXPECT_GT(report.methods[0].double_ks_one_sided.p_value, 0.001);
}

TEST(Evaluation, IndependentOfThreadCount) {
    const auto cfg = small_scenario(6);
    const std::vector<Method> methods{conventional_f_method(HypothesisSpec{}), jackstraw_method(10, 15, HypothesisSpec{})};
    const auto a = run_joint_null_evaluation(cfg, methods, 1);
    const auto b = run_joint_null_evaluation(cfg, methods, 4);
    for (std::size_t k = 0; k < methods.size(); ++k) {
        EXPECT_EQ(a.methods[k].ks_one_sided_p, b.methods[k].ks_one_sided_p);
        EXPECT_EQ(a.methods[k].ks_two_sided_stat, b.methods[k].ks_two_sided_stat);
    }
    EXPECT_EQ(a.methods[1].label, "Jackstraw(s=10)");
}

TEST(Evaluation, FailingStudiesAreCountedNotDropped) {
    const auto cfg = small_scenario(5);
    Method flaky{"Flaky", [](const StudyData& study, std::uint64_t seed) {
                     if (seed % 2 == 0) fail(ErrorKind::DecompositionFailure, "synthetic failure");
                     return std::vector<double>(static_cast<std::size_t>(study.y.rows()), 0.5);
                 }};
    const auto report = run_joint_null_evaluation(cfg, {flaky}, 1);
    const auto& m = report.methods[0];
    EXPECT_EQ(m.failed_studies.size() + m.study_index.size(), 5u);
    EXPECT_EQ(m.failure_messages.size(), m.failed_studies.size());

    Method wrong_size{"Short", [](const StudyData&, std::uint64_t) { return std::vector<double>(3, 0.5); }};
    EXPECT_EQ(run_joint_null_evaluation(cfg, {wrong_size}, 1).methods[0].failed_studies.size(), 5u);
}

TEST(Evaluation, NullPValuesFollowMask) {
    const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
    const std::vector<bool> mask{true, false, false, true};
    EXPECT_EQ(null_p_values(p, mask), (std::vector<double>{0.1, 0.4}));
}

TEST(Evaluation, QqPoints) {
    const auto qq = qq_points(std::vector<double>{0.9, 0.1, 0.5, 0.3});
    ASSERT_EQ(qq.size(), 4u);
    EXPECT_DOUBLE_EQ(qq[0].first, 0.125);
    EXPECT_DOUBLE_EQ(qq[0].second, 0.1);
    EXPECT_DOUBLE_EQ(qq[3].first, 0.875);
    EXPECT_DOUBLE_EQ(qq[3].second, 0.9);
}

TEST(Evaluation, TwoPcRequiresTwoFactorShape) {
    EXPECT_THROW(run_two_pc_evaluation(small_scenario(), 10), Error);
}
