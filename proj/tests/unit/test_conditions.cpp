#include <doctest.h>

#include <cmath>

#include "kdelab/bandwidth.hpp"
#include "kdelab/coefficients.hpp"
#include "kdelab/rational.hpp"

using namespace kdelab;

TEST_CASE("corollary 1 table") {
    const auto pass = check_corollary1(2, Rational(3), Rational(1));
    CHECK(pass.verdict == Verdict::Pass);
    REQUIRE(pass.delta_interval.has_value());
    CHECK(pass.delta_interval->lo_exact == "1/3");
    CHECK(pass.delta_interval->hi_exact == "1/2");
    REQUIRE(pass.delta_star.has_value());
    CHECK(*pass.delta_star == doctest::Approx(5.0 / 12.0));

    CHECK(check_corollary1(1, parse_rational("0.8"), parse_rational("0.3")).verdict == Verdict::Fail);
    const auto fail = check_corollary1(2, Rational(3), parse_rational("1.3"));
    CHECK(fail.verdict == Verdict::Fail);
    CHECK_FALSE(fail.delta_star.has_value());
}

TEST_CASE("corollary 1 boundaries fail") {
    // gamma exactly d beta / (d + beta)
    CHECK(check_corollary1(2, Rational(3), Rational(6, 5)).verdict == Verdict::Fail);
    // beta exactly d
    CHECK(check_corollary1(2, Rational(2), Rational(1, 10)).verdict == Verdict::Fail);
}

TEST_CASE("corollary 1 verdict iff nonempty window") {
    for (int d = 1; d <= 3; ++d) {
        for (int b = 1; b <= 24; ++b) {
            for (int g = 1; g <= 30; ++g) {
                const Rational beta(b, 4);
                const Rational gamma(g, 10);
                const auto r = check_corollary1(d, beta, gamma);
                REQUIRE(r.delta_interval.has_value());
                CHECK((r.verdict == Verdict::Pass) == !r.delta_interval->empty());
            }
        }
    }
}

TEST_CASE("hallin examples") {
    const auto a = check_hallin(1, Rational(5), parse_rational("0.3"));
    CHECK(a.verdict == Verdict::Pass);
    const auto b = check_hallin(1, Rational(5), parse_rational("0.4"));
    CHECK(b.verdict == Verdict::Fail);
    CHECK(b.diagnostics.at("linear_field_pass") == 1.0);
    CHECK(b.thresholds.at("linear_field_gamma_threshold") == doctest::Approx(4.5 / 5.5));
    const auto c = check_hallin(1, Rational(3), parse_rational("0.1"));
    CHECK(c.verdict == Verdict::Fail);
    CHECK(c.diagnostics.at("linear_field_pass") == 1.0);
    // 2q - 1 - 4d <= 0
    const auto d = check_hallin(2, Rational(4), parse_rational("0.1"));
    CHECK(d.verdict == Verdict::Fail);
    CHECK_FALSE(d.notes.empty());
    // double overload agrees
    CHECK(check_hallin(1, 5.0, 0.3).verdict == Verdict::Pass);
}

TEST_CASE("machkouri q-sum") {
    const auto geo = check_machkouri_qsum(CoefficientModel::geometric(1, 0.5), 2.5, 128);
    CHECK(geo.verdict == Verdict::Pass);
    double oracle = 0.0;
    for (int k = 1; k <= 200; ++k) oracle += std::pow(k, 2.5) * std::pow(0.5, k);
    CHECK(geo.diagnostics.at("partial_sum") == doctest::Approx(oracle).epsilon(1e-12));

    const auto pd = check_machkouri_qsum(CoefficientModel::power_decay(1, 1.2), 2.5, 128);
    CHECK(pd.verdict != Verdict::Pass);

    const auto fin = check_machkouri_qsum(CoefficientModel::finite_support(1, 3, {1.0, -2.0, 0.5}), 7.0, 8);
    CHECK(fin.verdict == Verdict::Pass);
    CHECK(fin.diagnostics.at("partial_sum") == doctest::Approx(2.0 + 0.5 * std::pow(2.0, 7.0)));
}

TEST_CASE("rate conditions inside the admissible delta window") {
    const std::vector<std::int64_t> grid{16, 32, 64, 128};
    const auto r = check_condition_c(CoefficientModel::power_decay(2, 4.0), BandwidthSchedule(1.0, 1.0),
                                     5.0 / 12.0, grid);
    CHECK(r.verdict == Verdict::Pass);
    CHECK(r.label == "pass (trend)");
    CHECK(r.sequences.at("C1").size() == 4);
}

TEST_CASE("rate conditions with vanishing residual") {
    const std::vector<std::int64_t> grid{16, 32, 64, 128};
    const auto r = check_condition_c(CoefficientModel::identity(1), BandwidthSchedule(1.0, 0.4), 0.2, grid);
    CHECK(r.verdict == Verdict::Pass);
    for (double v : r.sequences.at("C2")) CHECK(v == 0.0);
}

TEST_CASE("rate conditions outside the window fail for every delta") {
    const std::vector<std::int64_t> grid{16, 32, 64, 128, 256};
    for (double delta : {0.1, 0.2, 0.3, 0.35, 0.4, 0.45, 0.5, 0.6, 0.8}) {
        const auto r = check_condition_c(CoefficientModel::power_decay(2, 4.0), BandwidthSchedule(1.0, 1.3),
                                         delta, grid);
        CHECK_MESSAGE(r.verdict == Verdict::Fail, "delta=" << delta);
    }
}

TEST_CASE("rate condition argument checks") {
    const std::vector<std::int64_t> grid{16, 32, 64};
    const auto model = CoefficientModel::identity(1);
    CHECK_THROWS(check_condition_c(model, BandwidthSchedule(1.0, 0.4), 1.0, grid));
    const std::vector<std::int64_t> short_grid{16, 32};
    CHECK_THROWS(check_condition_c(model, BandwidthSchedule(1.0, 0.4), 0.5, short_grid));
    const std::vector<std::int64_t> bad_grid{16, 16, 32};
    CHECK_THROWS(check_condition_c(model, BandwidthSchedule(1.0, 0.4), 0.5, bad_grid));
}

TEST_CASE("m schedule") {
    CHECK(m_schedule(64, 0.5) == 8);
    CHECK(m_schedule(32, 5.0 / 12.0) == 4);
    CHECK(m_schedule(64, 5.0 / 12.0) == 5);
    CHECK(m_schedule(1, 0.5) == 1);
}
