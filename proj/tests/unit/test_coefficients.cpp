#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kdelab/coefficients.hpp"
#include "kdelab/lattice.hpp"
#include "kdelab/numerics.hpp"

using namespace kdelab;

namespace {

// sum of a_i^2 over i >= k inside the box [0, side)^d
double brute_tail_sq(const CoefficientModel& model, const MultiIndex& k, std::int64_t side) {
    const Box box(model.dim(), side);
    CompensatedSum s;
    for (std::size_t off = 0; off < box.size(); ++off) {
        const auto i = box.index(off);
        bool ge = true;
        for (std::size_t t = 0; t < i.size(); ++t) ge = ge && i[t] >= k[t];
        if (!ge) continue;
        const double a = model(i);
        s += a * a;
    }
    return s.value();
}

}  // namespace

TEST_CASE("single nonzero coefficient") {
    const auto model = CoefficientModel::finite_support(1, 1, {1.0});
    const auto f = coefficient_functionals(model, 10, 1);
    CHECK(f.tail_norms[0] == 1.0);
    for (std::size_t k = 1; k < f.tail_norms.size(); ++k) CHECK(f.tail_norms[k] == 0.0);
    CHECK(f.residual_norm == 0.0);
    CHECK(f.delta == 1.0);
    CHECK(f.tail_error_bound == 0.0);
}

TEST_CASE("geometric closed forms match direct summation") {
    const auto model = CoefficientModel::geometric(1, 0.5);
    const auto f = coefficient_functionals(model, 8, 1);
    CHECK(f.tail_norms[0] == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(f.residual_norm == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(f.tail_norms[1] == doctest::Approx(f.residual_norm).epsilon(1e-14));
    TailCalculator calc(model);
    CHECK(calc.total_sq() == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    for (std::int64_t k = 0; k < 8; ++k) {
        CHECK(calc.tail_sq(MultiIndex{k}).value == doctest::Approx(brute_tail_sq(model, {k}, 80)).epsilon(1e-13));
    }
}

TEST_CASE("power-decay tails against brute force in d=2") {
    const auto model = CoefficientModel::power_decay(2, 4.0);
    TailCalculator calc(model);
    for (MultiIndex k : {MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{3, 5}, MultiIndex{10, 2}}) {
        const double brute = brute_tail_sq(model, k, 512);
        // box truncation misses at most B_512^2 < 512^-6 * const
        CHECK(calc.tail_sq(k).value == doctest::Approx(brute).epsilon(1e-9));
    }
    CHECK(calc.max_tail_error() <= 1e-10);
}

TEST_CASE("power-decay axis tail decays like n^-(q-d/2)") {
    const auto model = CoefficientModel::power_decay(2, 4.0);
    TailCalculator calc(model);
    std::vector<double> ns, vals;
    for (std::int64_t n = 16; n <= 512; n *= 2) {
        ns.push_back(static_cast<double>(n));
        vals.push_back(calc.axis_tail_max(n));
    }
    const double slope = loglog_slope(ns, vals);
    CHECK(std::fabs(slope + 3.0) < 0.1);
}

TEST_CASE("rejects non-square-summable and bad arguments") {
    CHECK_THROWS(CoefficientModel::power_decay(2, 1.0));
    CHECK_THROWS(CoefficientModel::geometric(1, 1.0));
    const auto model = CoefficientModel::geometric(1, 0.5);
    CHECK_THROWS(coefficient_functionals(model, 0, 1));
    CHECK_THROWS(coefficient_functionals(model, 1, 0));
}

TEST_CASE("tail monotonicity on random index pairs") {
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<int> coord(0, 12);
    for (const auto& model : {CoefficientModel::power_decay(2, 3.0), CoefficientModel::geometric(2, 0.7),
                              CoefficientModel::power_decay(3, 2.5)}) {
        TailCalculator calc(model);
        for (int trial = 0; trial < 40; ++trial) {
            MultiIndex k(static_cast<std::size_t>(model.dim())), j;
            for (auto& v : k) v = coord(gen);
            j = k;
            for (auto& v : j) v += coord(gen) / 3;
            CHECK(calc.tail(k) >= calc.tail(j) - 1e-12);
        }
    }
}

TEST_CASE("residual plus truncated mass equals total mass") {
    for (const auto& model : {CoefficientModel::power_decay(2, 4.0), CoefficientModel::geometric(2, 0.6),
                              CoefficientModel::power_decay(1, 1.2)}) {
        TailCalculator calc(model);
        for (std::int64_t m : {1, 2, 5, 17, 40}) {
            const double lhs = calc.residual_sq(m).value + calc.truncated_sq(m);
            CHECK(lhs == doctest::Approx(calc.total_sq()).epsilon(1e-10));
            CHECK(calc.residual(m) <= calc.tail(MultiIndex(static_cast<std::size_t>(model.dim()), 0)));
        }
    }
}

TEST_CASE("finite support values are exact and radius independent") {
    std::vector<double> table{1.0, 0.5, -0.25, 0.0, 0.3, 0.1, 0.2, -0.1, 0.05};
    const auto model = CoefficientModel::finite_support(2, 3, table);
    const auto f4 = coefficient_functionals(model, 4, 2);
    const auto f6 = coefficient_functionals(model, 6, 2);
    CHECK(f4.residual_norm == f6.residual_norm);
    CHECK(f4.tail_error_bound == 0.0);
    for (std::int64_t a = 0; a < 4; ++a) {
        for (std::int64_t b = 0; b < 4; ++b) {
            const MultiIndex k{a, b};
            CHECK(f4.tail_at(k) == f6.tail_at(k));
            CHECK(f4.tail_at(k) == doctest::Approx(std::sqrt(brute_tail_sq(model, k, 3))).epsilon(1e-15));
        }
    }
}

TEST_CASE("delta is nondecreasing in n") {
    const auto model = CoefficientModel::power_decay(2, 4.0);
    double prev = 0.0;
    for (std::int64_t n : {1, 2, 4, 8, 16}) {
        const double d = coefficient_functionals(model, n, 1).delta;
        CHECK(d >= prev);
        prev = d;
    }
}

TEST_CASE("scaling multiplies every functional") {
    const auto model = CoefficientModel::power_decay(2, 4.0);
    const double c = 2.5;
    const auto f = coefficient_functionals(model, 6, 3);
    const auto g = coefficient_functionals(model.scaled(c), 6, 3);
    CHECK(g.axis_tail_max == doctest::Approx(c * f.axis_tail_max).epsilon(1e-13));
    CHECK(g.residual_norm == doctest::Approx(c * f.residual_norm).epsilon(1e-13));
    CHECK(g.delta == doctest::Approx(c * f.delta).epsilon(1e-13));
    for (std::size_t i = 0; i < f.tail_norms.size(); ++i) {
        CHECK(g.tail_norms[i] == doctest::Approx(c * f.tail_norms[i]).epsilon(1e-13));
    }
}

TEST_CASE("autocovariances") {
    const auto geo = CoefficientModel::geometric(1, 0.5);
    CHECK(autocovariance(geo, MultiIndex{0}).value == doctest::Approx(4.0 / 3.0));
    CHECK(autocovariance(geo, MultiIndex{1}).value == doctest::Approx(2.0 / 3.0));
    CHECK(autocovariance(geo, MultiIndex{2}).value == doctest::Approx(1.0 / 3.0));
    CHECK(autocovariance(geo, MultiIndex{-2}).value == doctest::Approx(1.0 / 3.0));
    CHECK(truncated_autocovariance(geo, MultiIndex{0}, 2) == doctest::Approx(1.25));
    CHECK(truncated_autocovariance(geo, MultiIndex{1}, 2) == doctest::Approx(0.5));
    CHECK(truncated_autocovariance(geo, MultiIndex{2}, 2) == 0.0);

    const auto pd = CoefficientModel::power_decay(2, 4.0);
    const auto r = autocovariance(pd, MultiIndex{1, 0});
    double brute = 0.0;
    const Box box(2, 400);
    for (std::size_t off = 0; off < box.size(); ++off) {
        auto k = box.index(off);
        const double a = pd(k);
        k[0] += 1;
        brute += a * pd(k);
    }
    CHECK(r.value == doctest::Approx(brute).epsilon(1e-8));
    CHECK(autocovariance(pd, MultiIndex{0, 0}).value == doctest::Approx(TailCalculator(pd).total_sq()).epsilon(1e-9));
}

TEST_CASE("minimal truncation radius") {
    const auto pd = CoefficientModel::power_decay(2, 4.0);
    TailCalculator calc(pd);
    const std::int64_t m = minimal_truncation_radius(pd, 1e-3, 1);
    CHECK(calc.residual(m) <= 1e-3);
    CHECK(calc.residual(m - 1) > 1e-3);
    CHECK(minimal_truncation_radius(pd, 1e-3, m + 5) == m + 5);
    CHECK(minimal_truncation_radius(CoefficientModel::identity(2), 0.0, 1) == 1);
}

TEST_CASE("json round trip") {
    auto model = CoefficientModel::power_decay(2, 4.0, 1.5);
    model.declare_decay(3.0, 2.0);
    CHECK(CoefficientModel::from_json(model.to_json()) == model);
    const auto tab = CoefficientModel::tabulated(1, 3, {1.0, 0.5, 0.25});
    CHECK(CoefficientModel::from_json(tab.to_json()) == tab);
    CHECK(to_string(CoefficientFamily::Geometric) == "geometric");
}
