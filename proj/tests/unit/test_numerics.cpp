#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kdelab/numerics.hpp"
#include "kdelab/rational.hpp"

using namespace kdelab;

TEST_CASE("compensated sum recovers cancelled terms") {
    const std::vector<double> v{1e16, 1.0, -1e16, 1.0};
    CHECK(compensated_sum(v) == 2.0);
}

TEST_CASE("adaptive simpson against gauss-kronrod") {
    auto f = [](double x) { return std::exp(-x * x) * std::cos(3 * x); };
    const double ours = adaptive_simpson(f, -6.0, 6.0, 1e-12).value;
    const double gk = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -6.0, 6.0, 15, 1e-14);
    CHECK(std::fabs(ours - gk) < 1e-11);
    const double exact = std::sqrt(std::numbers::pi) * std::exp(-9.0 / 4.0);
    CHECK(std::fabs(ours - exact) < 1e-11);
}

TEST_CASE("normal pdf integrates to one and cdf is consistent") {
    const double total = adaptive_simpson([](double x) { return normal_pdf(x, 2.0); }, -20, 20, 1e-12).value;
    CHECK(std::fabs(total - 1.0) < 1e-11);
    CHECK(normal_cdf(0.0, 3.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.0, 1.0) == doctest::Approx(0.8413447460685429));
}

TEST_CASE("sample moments of a known sample") {
    const std::vector<double> v{1, 2, 3, 4, 10};
    const auto m = sample_moments(v);
    CHECK(m.count == 5);
    CHECK(m.mean == doctest::Approx(4.0));
    CHECK(m.variance == doctest::Approx(12.5));
    // biased central moments: m2 = 10, m3 = 36/... computed by hand
    const double m2 = 10.0, m3 = (-27 - 8 - 1 + 0 + 216) / 5.0, m4 = (81 + 16 + 1 + 0 + 1296) / 5.0;
    CHECK(m.skewness == doctest::Approx(m3 / std::pow(m2, 1.5)));
    CHECK(m.excess_kurtosis == doctest::Approx(m4 / (m2 * m2) - 3.0));
}

TEST_CASE("loglog slope and correlation") {
    const std::vector<double> x{1, 2, 4, 8};
    const std::vector<double> y{1, 0.125, 1.0 / 64, 1.0 / 512};
    CHECK(loglog_slope(x, y) == doctest::Approx(-3.0));
    const std::vector<double> one{1};
    CHECK(std::isnan(loglog_slope(one, one)));
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{2, 4, 6, 8};
    CHECK(sample_correlation(a, b) == doctest::Approx(1.0));
}

TEST_CASE("rationals parse decimals exactly") {
    CHECK(parse_rational("0.3") == Rational(3, 10));
    CHECK(parse_rational("5/12") == Rational(5, 12));
    CHECK(parse_rational("-2") == Rational(-2));
    CHECK(parse_rational("1.5e-2") == Rational(3, 200));
    CHECK(to_string(Rational(6, 5)) == "6/5");
    CHECK_THROWS(parse_rational("abc"));
    CHECK_THROWS(parse_rational("1/0"));
}
