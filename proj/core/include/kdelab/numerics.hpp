#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>

namespace kdelab {

/// Neumaier-compensated accumulator. Summation order still matters for the
/// last bit, so callers that need reproducibility must feed values in a
/// fixed order.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(double v) noexcept {
        add(v);
        return *this;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

[[nodiscard]] double compensated_sum(std::span<const double> values) noexcept;

inline double normal_pdf(double x, double variance) noexcept {
    return std::exp(-0.5 * x * x / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

inline double normal_cdf(double x, double variance) noexcept {
    return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance));
}

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
};

/// Adaptive Simpson on [a, b] with absolute tolerance `tol`. Recursion is
/// capped at `max_depth`; the returned error estimate is the accumulated
/// Richardson correction magnitude.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double tol, int max_depth = 50);

/// Summary moments of a sample. Variance is the unbiased (R-1) estimator;
/// skewness and excess kurtosis use the biased central moments.
struct SampleMoments {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

[[nodiscard]] SampleMoments sample_moments(std::span<const double> values);

/// Least-squares slope of log(y) against log(x). Nonpositive entries are
/// skipped; returns NaN with fewer than two usable points.
[[nodiscard]] double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of two equal-length samples.
[[nodiscard]] double sample_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace kdelab
