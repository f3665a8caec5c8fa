#include <doctest.h>

#include <cmath>
#include <vector>

#include "kdelab/clt_lab.hpp"
#include "kdelab/numerics.hpp"

using namespace kdelab;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.model = CoefficientModel::geometric(1, 0.5);
    c.bandwidth = BandwidthSchedule(1.0, 0.3);
    c.n_grid = {64};
    c.m_fixed = 3;
    c.replicates = 40;
    c.master_seed = 11;
    return c;
}

}  // namespace

TEST_CASE("single coefficient with m = 1 has zero remainder") {
    auto c = small_config();
    c.model = CoefficientModel::identity(1);
    c.m_fixed = 1;
    c.replicates = 20;
    const auto rep = run_clt_experiment(c);
    REQUIRE(rep.points.size() == 1);
    for (double t : rep.points[0].t_remainder) CHECK(t == 0.0);
    CHECK(rep.points[0].remainder_variance == 0.0);
    CHECK(rep.points[0].t_n == rep.points[0].t_zeta);
}

TEST_CASE("decomposition identity holds per replicate") {
    auto c = small_config();
    c.x_points = {0.0, 0.7};
    const auto rep = run_clt_experiment(c);
    for (const auto& p : rep.points) {
        CHECK(p.max_identity_error < 1e-9);
        for (std::size_t r = 0; r < p.t_n.size(); ++r) {
            CHECK(p.t_n[r] == doctest::Approx(p.t_zeta[r] + p.t_remainder[r]).epsilon(1e-9));
        }
    }
}

TEST_CASE("a single replicate is inconclusive") {
    auto c = small_config();
    c.replicates = 1;
    const auto rep = run_clt_experiment(c);
    CHECK(rep.points[0].verdict == Verdict::Inconclusive);
    CHECK(rep.verdict == Verdict::Inconclusive);
}

TEST_CASE("oracle centering matches closed-form normal expectation") {
    // Gaussian kernel against a normal density: E K((x-X)/b) = b * phi(x; v + b^2)
    const auto k = KernelModel::gaussian();
    const double b = 0.3, x = 0.4, v = 1.7;
    const auto c = oracle_centering(InnovationModel::gaussian(), k, b, x, v, 1.0);
    CHECK(c.ez == doctest::Approx(std::sqrt(b) * normal_pdf(x, v + b * b)).epsilon(1e-8));
    CHECK(c.ezeta == doctest::Approx(std::sqrt(b) * normal_pdf(x, 1.0 + b * b)).epsilon(1e-8));
    CHECK_THROWS_AS((void)oracle_centering(InnovationModel::uniform(), k, b, x, v, 1.0), std::logic_error);
}

TEST_CASE("oracle centering with non-gaussian innovations is rejected") {
    auto c = small_config();
    c.innovations = InnovationModel::uniform();
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.centering = Centering::Pooled;
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("ks: constant sample is far from normal") {
    const std::vector<double> s(50, 0.0);
    const auto r = ks_normality_test(s, 1.0);
    CHECK(r.distance >= 0.5);
    CHECK_FALSE(r.enough_samples);
    CHECK_THROWS_AS((void)ks_normality_test(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST_CASE("ks: variance four times too large is rejected") {
    CounterRng rng({3, 0, 0});
    std::vector<double> s(1000);
    for (auto& v : s) v = 2.0 * rng.normal();
    const auto r = ks_normality_test(s, 1.0);
    CHECK(r.distance > r.critical_01);
    CHECK(r.p_value < 0.01);
}

TEST_CASE("ks: level under the null is close to nominal") {
    int rejections = 0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
        CounterRng rng({5, 1, static_cast<std::uint64_t>(t)});
        std::vector<double> s(200);
        for (auto& v : s) v = rng.normal();
        if (ks_normality_test(s, 1.0).distance > 1.358 / std::sqrt(200.0)) ++rejections;
    }
    // 5% level, binomial sd about 1.1%
    CHECK(rejections >= 6);
    CHECK(rejections <= 36);
}

TEST_CASE("config json round trip") {
    auto c = small_config();
    c.delta = 0.25;
    c.x_points = {-0.5, 0.5};
    c.x_in_sd_units = true;
    c.centering = Centering::Pooled;
    const auto j = c.to_json();
    const auto back = ExperimentConfig::from_json(j);
    CHECK(back.to_json() == j);
    CHECK_FALSE(j.contains("threads"));
    CHECK_THROWS_AS((void)ExperimentConfig::from_json({{"bogus", 1}}), std::invalid_argument);
    try {
        ExperimentConfig::from_json({{"bandwidth", {{"c2", 1.0}, {"gamma", 2.0}}}}).validate();
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("bandwidth") != std::string::npos);
    }
}

TEST_CASE("m resolution order") {
    ExperimentConfig c;
    c.model = CoefficientModel::power_decay(1, 6.0);
    c.bandwidth = BandwidthSchedule(1.0, 0.2);
    c.m_fixed = 5;
    CHECK(c.m_at(1000) == 5);
    c.m_fixed.reset();
    c.delta = 0.5;
    CHECK(c.m_at(100) == 10);
    c.delta.reset();
    CHECK(c.m_at(4096) >= 1);  // from the declared decay
    c.model = CoefficientModel::finite_support(1, 3, {1.0, 0.5, 0.25});
    CHECK(c.m_at(4096) == 3);
}

TEST_CASE("report is identical across thread counts") {
    auto c = small_config();
    c.replicates = 30;
    c.threads = 1;
    const auto a = run_clt_experiment(c).to_json().dump();
    c.threads = 4;
    const auto b = run_clt_experiment(c).to_json().dump();
    CHECK(a == b);
}

TEST_CASE("block plan rules") {
    CHECK_THROWS_AS((void)BlockPlan::make(64, 4, 4), std::invalid_argument);
    CHECK_THROWS_AS((void)BlockPlan::make(64, 4, 8, 2), std::invalid_argument);
    const auto p = BlockPlan::make(256, 4);
    CHECK(p.block_side == 4 * 6);
    CHECK(p.gap == 4);
    CHECK(p.blocks_per_axis == 256 / 28);
}

TEST_CASE("one block covering the lattice leaves no gap") {
    auto c = small_config();
    c.model = CoefficientModel::identity(1);
    c.m_fixed = 1;
    c.n_grid = {32, 64};
    c.replicates = 10;
    BlockPlanSpec spec;
    spec.gap = 0;
    for (const auto n : c.n_grid) {
        auto cn = c;
        cn.n_grid = {n};
        spec.block_side = n;
        const auto rep = block_decomposition_check(cn, spec);
        REQUIRE(rep.points.size() == 1);
        CHECK(rep.points[0].gap_variance == 0.0);
        CHECK(rep.points[0].gap_mean == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(rep.points[0].covered_fraction == 1.0);
    }
}

TEST_CASE("blocks of an m-dependent field look independent") {
    auto c = small_config();
    c.n_grid = {512};
    c.m_fixed = 3;
    c.replicates = 20;
    const std::vector<double> eps{0.01, 0.1};
    const auto rep = lindeberg_estimate(c, {}, eps);
    const auto& p = rep.points[0];
    CHECK(std::fabs(p.adjacent_correlation) <= p.correlation_threshold);
    CHECK(p.lf2.size() == 2);
    CHECK(p.lf2[1] <= p.lf2[0]);
    CHECK(p.lf1 > 0.0);
}

TEST_CASE("rectangle check on an iid field") {
    auto c = small_config();
    c.model = CoefficientModel::identity(1);
    c.m_fixed = 1;
    c.n_grid = {256};
    c.replicates = 200;
    const std::vector<MultiIndex> rects{{4}, {16}, {64}, {256}};
    const auto rep = rectangle_moment_check(c, rects);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.zeta_ratio < 1.5);
    for (const auto& r : rep.rows) CHECK(r.remainder_norm == 0.0);
}

TEST_CASE("rectangle verdict is scale free in the coefficients") {
    auto c = small_config();
    c.n_grid = {128};
    c.replicates = 60;
    c.truncation.policy = TruncationPolicy::Fixed;
    c.truncation.radius = 16;
    const std::vector<MultiIndex> rects{{2}, {8}, {32}, {128}};
    const auto a = rectangle_moment_check(c, rects);
    const auto dense = CoefficientModel::geometric(1, 0.5).dense(40);
    std::vector<double> twice(dense);
    for (auto& v : twice) v *= 2.0;
    c.model = CoefficientModel::tabulated(1, 40, twice);
    const auto b = rectangle_moment_check(c, rects);
    CHECK(a.verdict == b.verdict);
}

TEST_CASE("wu inequality constants") {
    const auto geo = CoefficientModel::geometric(1, 0.5);
    const auto p1 = wu_inequality_check(geo, InnovationModel::gaussian(), 1, 40000, {1, 0, 0});
    CHECK(p1.expected_constant == 1.0);
    CHECK(std::fabs(p1.z) < 4.0);
    const auto p2 = wu_inequality_check(geo, InnovationModel::gaussian(), 2, 40000, {2, 0, 0});
    CHECK(p2.expected_constant == doctest::Approx(3.0));
    CHECK(std::fabs(p2.constant - 3.0) < 0.2);
    const auto u = wu_inequality_check(CoefficientModel::identity(1), InnovationModel::uniform(), 2, 40000, {3, 0, 0});
    CHECK(u.expected_constant == doctest::Approx(9.0 / 5.0));
    CHECK(std::fabs(u.constant - 1.8) < 0.05);
    CHECK_THROWS_AS((void)wu_inequality_check(geo, InnovationModel::student_t(3.0), 2, 100), std::invalid_argument);
    CHECK_THROWS_AS((void)wu_inequality_check(geo, InnovationModel::gaussian(), 3, 100), std::invalid_argument);
}

TEST_CASE("fixed-m gap vanishes for a single coefficient") {
    auto c = small_config();
    c.model = CoefficientModel::identity(1);
    c.replicates = 4;
    const std::vector<std::int64_t> grid{32, 64};
    const auto rep = fixed_m_gap(c, 2, grid);
    for (const auto& g : rep.fixed) CHECK(g.gap == 0.0);
    CHECK(rep.limit_oracle == 0.0);
    CHECK(rep.verdict == Verdict::Pass);
}

TEST_CASE("fixed-m gap tracks its finite-bandwidth oracle") {
    auto c = small_config();
    c.bandwidth = BandwidthSchedule(1.0, 0.5);
    c.replicates = 8;
    const std::vector<std::int64_t> grid{1024, 4096};
    const auto rep = fixed_m_gap(c, 2, grid);
    for (const auto& g : rep.fixed) {
        CHECK(std::fabs(g.gap - g.exact_gap) < 4.0 * g.gap_standard_error + 0.02 * g.exact_gap);
    }
    CHECK(rep.limit_oracle > 0.0);
}
