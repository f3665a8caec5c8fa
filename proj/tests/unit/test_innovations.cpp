#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "kdelab/innovations.hpp"
#include "kdelab/numerics.hpp"

using namespace kdelab;

TEST_CASE("densities at the origin") {
    CHECK(InnovationModel::gaussian().density(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
    CHECK(InnovationModel::uniform().density(0.0) == doctest::Approx(1.0 / (2.0 * std::sqrt(3.0))));
    CHECK(InnovationModel::uniform().density(2.0) == 0.0);
}

TEST_CASE("densities integrate to one and are nonnegative") {
    const auto g = InnovationModel::gaussian();
    CHECK(std::fabs(adaptive_simpson([&](double x) { return g.density(x); }, -10, 10, 1e-13).value - 1.0) < 1e-10);
    const auto u = InnovationModel::uniform();
    const double s3 = std::sqrt(3.0);
    CHECK(std::fabs(adaptive_simpson([&](double x) { return u.density(x); }, -s3, s3, 1e-12).value - 1.0) < 1e-8);
    const auto t = InnovationModel::student_t(5.0);
    // tails of t_5 decay like |x|^-6; mass beyond 2000 is ~1e-16
    const double mass = adaptive_simpson([&](double x) { return t.density(x); }, -2000, 2000, 1e-12).value;
    CHECK(std::fabs(mass - 1.0) < 1e-8);
    for (double x = -8; x <= 8; x += 0.25) {
        CHECK(g.density(x) >= 0.0);
        CHECK(t.density(x) >= 0.0);
    }
    // unit variance
    const double var = adaptive_simpson([&](double x) { return x * x * t.density(x); }, -5000, 5000, 1e-10).value;
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("streams are deterministic") {
    const auto g = InnovationModel::gaussian();
    CHECK(innovation_stream(g, {9, 2, 3}, 1000) == innovation_stream(g, {9, 2, 3}, 1000));
    std::vector<double> filled(1000);
    fill_innovations(g, {9, 2, 3}, filled);
    CHECK(filled == innovation_stream(g, {9, 2, 3}, 1000));
    CHECK_THROWS(innovation_stream(g, {9, 2, 3}, 0));
}

TEST_CASE("gaussian sample variance") {
    const auto x = innovation_stream(InnovationModel::gaussian(), {11, 0, 0}, 1000000);
    CHECK(std::fabs(sample_moments(x).variance - 1.0) < 0.01);
}

TEST_CASE("student-t kurtosis and moment order") {
    const auto t = InnovationModel::student_t(5.0);
    // The eighth moment is infinite, so a single sample kurtosis is heavy
    // tailed; take the median of five independent 10^6-draw estimates.
    std::vector<double> kurt;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto x = innovation_stream(t, {12, s, 0}, 1000000);
        const auto m = sample_moments(x);
        CHECK(std::fabs(m.variance - 1.0) < 0.03);
        kurt.push_back(m.excess_kurtosis + 3.0);
    }
    std::nth_element(kurt.begin(), kurt.begin() + 2, kurt.end());
    CHECK(std::fabs(kurt[2] - 9.0) < 1.5);
    CHECK(t.fourth_moment() == doctest::Approx(9.0));
    CHECK(t.has_finite_moment(4.5));
    CHECK_FALSE(t.has_finite_moment(5.0));
    CHECK_THROWS(InnovationModel::student_t(2.0));
}

TEST_CASE("uniform moments and lipschitz flag") {
    const auto u = InnovationModel::uniform();
    const auto x = innovation_stream(u, {13, 0, 0}, 200000);
    const auto m = sample_moments(x);
    CHECK(std::fabs(m.variance - 1.0) < 0.01);
    CHECK(m.excess_kurtosis + 3.0 == doctest::Approx(9.0 / 5.0).epsilon(0.02));
    CHECK_FALSE(u.lipschitz_density());
    CHECK(InnovationModel::gaussian().lipschitz_density());
}

TEST_CASE("distinct streams are uncorrelated") {
    const auto g = InnovationModel::gaussian();
    const auto a = innovation_stream(g, {5, 0, 0}, 100000);
    const auto b = innovation_stream(g, {5, 1, 0}, 100000);
    const auto c = innovation_stream(g, {5, 0, 1}, 100000);
    CHECK(std::fabs(sample_correlation(a, b)) < 0.02);
    CHECK(std::fabs(sample_correlation(a, c)) < 0.02);
}

TEST_CASE("json round trip") {
    for (const auto& m : {InnovationModel::gaussian(), InnovationModel::uniform(), InnovationModel::student_t(7.5)}) {
        CHECK(InnovationModel::from_json(m.to_json()) == m);
    }
    CHECK(InnovationModel::from_json(nlohmann::json("gaussian")) == InnovationModel::gaussian());
}
