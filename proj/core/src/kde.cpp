#include "kdelab/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kdelab/numerics.hpp"

namespace kdelab {

KernelModel KernelModel::epanechnikov() { return KernelModel(KernelKind::Epanechnikov); }
KernelModel KernelModel::gaussian() { return KernelModel(KernelKind::Gaussian); }
KernelModel KernelModel::triangular() { return KernelModel(KernelKind::Triangular); }

KernelModel KernelModel::from_name(const std::string& name) {
    if (name == "epanechnikov") return epanechnikov();
    if (name == "gaussian") return gaussian();
    if (name == "triangular") return triangular();
    throw std::invalid_argument("unknown kernel '" + name + "' (expected epanechnikov, gaussian or triangular)");
}

std::string KernelModel::name() const {
    switch (kind_) {
        case KernelKind::Epanechnikov: return "epanechnikov";
        case KernelKind::Gaussian: return "gaussian";
        case KernelKind::Triangular: return "triangular";
    }
    return "unknown";
}

double KernelModel::operator()(double u) const noexcept {
    switch (kind_) {
        case KernelKind::Epanechnikov: return std::fabs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
        case KernelKind::Gaussian: return std::exp(-0.5 * u * u) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
        case KernelKind::Triangular: return std::fabs(u) <= 1.0 ? 1.0 - std::fabs(u) : 0.0;
    }
    return 0.0;
}

double KernelModel::lipschitz() const noexcept {
    switch (kind_) {
        case KernelKind::Epanechnikov: return 1.5;
        case KernelKind::Gaussian: return std::exp(-0.5) * 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
        case KernelKind::Triangular: return 1.0;
    }
    return 0.0;
}

double KernelModel::sup() const noexcept {
    switch (kind_) {
        case KernelKind::Epanechnikov: return 0.75;
        case KernelKind::Gaussian: return 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
        case KernelKind::Triangular: return 1.0;
    }
    return 0.0;
}

double KernelModel::roughness() const noexcept {
    switch (kind_) {
        case KernelKind::Epanechnikov: return 0.6;
        case KernelKind::Gaussian: return 0.5 * std::numbers::inv_sqrtpi;
        case KernelKind::Triangular: return 2.0 / 3.0;
    }
    return 0.0;
}

double KernelModel::abs_first_moment() const noexcept {
    switch (kind_) {
        case KernelKind::Epanechnikov: return 0.375;
        case KernelKind::Gaussian: return std::sqrt(2.0 / std::numbers::pi);
        case KernelKind::Triangular: return 1.0 / 3.0;
    }
    return 0.0;
}

double KernelModel::derivative_roughness() const noexcept {
    switch (kind_) {
        case KernelKind::Epanechnikov: return 1.5;
        case KernelKind::Gaussian: return 0.25 * std::numbers::inv_sqrtpi;
        case KernelKind::Triangular: return 2.0;
    }
    return 0.0;
}

double KernelModel::support_radius() const noexcept {
    return kind_ == KernelKind::Gaussian ? std::numeric_limits<double>::infinity() : 1.0;
}

double KernelModel::integration_radius() const noexcept {
    return kind_ == KernelKind::Gaussian ? 10.0 : 1.0;
}

double kde_estimate(std::span<const double> values, double x, double b, const KernelModel& kernel) {
    if (!(b > 0.0)) throw std::invalid_argument("kde_estimate: bandwidth must be positive");
    if (values.empty()) throw std::invalid_argument("kde_estimate: empty sample");
    CompensatedSum s;
    for (double v : values) s += kernel((x - v) / b);
    return s.value() / (static_cast<double>(values.size()) * b);
}

double kde_estimate(const LatticeField& field, double x, double b, const KernelModel& kernel) {
    return kde_estimate(field.values, x, b, kernel);
}

double asymptotic_variance(double px, const KernelModel& kernel) {
    if (!(px >= 0.0)) throw std::invalid_argument("asymptotic_variance: density value must be >= 0");
    return px * kernel.roughness();
}

double smoothed_normal_moment(const KernelModel& kernel, double b, double x, double variance, int power,
                              double tol) {
    if (!(b > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    if (!(variance > 0.0)) throw std::invalid_argument("variance must be positive");
    const double r = kernel.integration_radius();
    auto f = [&](double u) { return std::pow(kernel(u), power) * normal_pdf(x - b * u, variance); };
    return adaptive_simpson(f, -r, r, tol).value;
}

double smoothed_bivariate_normal(const KernelModel& kernel, double b, double x, double v1, double v2, double c,
                                 double tol) {
    if (!(b > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    const double det = v1 * v2 - c * c;
    const double r = kernel.integration_radius();
    if (det <= 1e-14 * v1 * v2) {
        // perfectly correlated: u = w almost surely
        return smoothed_normal_moment(kernel, b, x, v1, 2, tol) / b;
    }
    const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
    auto inner = [&](double u) {
        const double y1 = x - b * u;
        const double ku = kernel(u);
        if (ku == 0.0) return 0.0;
        auto g = [&](double w) {
            const double y2 = x - b * w;
            const double qf = (v2 * y1 * y1 - 2.0 * c * y1 * y2 + v1 * y2 * y2) / det;
            return kernel(w) * std::exp(-0.5 * qf);
        };
        return ku * norm * adaptive_simpson(g, -r, r, tol).value;
    };
    return adaptive_simpson(inner, -r, r, tol).value;
}

// ---------------------------------------------------------------------------

double DensityOracle::p(double x) const {
    if (!exact) throw std::logic_error("density oracle is diagnostic-only (non-Gaussian innovations)");
    return normal_pdf(x, v);
}

double DensityOracle::p_m(double x) const {
    if (!exact) throw std::logic_error("density oracle is diagnostic-only (non-Gaussian innovations)");
    return normal_pdf(x, v_m);
}

nlohmann::json DensityOracle::to_json() const {
    nlohmann::json j{{"exact", exact},
                     {"innovation", innovation},
                     {"condition1_status", condition1_status},
                     {"m", m},
                     {"lag", lag},
                     {"v", v},
                     {"v_m", v_m},
                     {"cov_lag", cov_lag},
                     {"cov_lag_m", cov_lag_m},
                     {"det_lag", det_lag},
                     {"det_lag_m", det_lag_m},
                     {"p_bar", p_bar},
                     {"p_bar_m", p_bar_m},
                     {"p_bar_lag", p_bar_lag},
                     {"p_bar_lag_m", p_bar_lag_m},
                     {"sup_difference", sup_difference},
                     {"sup_difference_at", sup_difference_at},
                     {"lipschitz", lipschitz},
                     {"tail_error", tail_error}};
    if (!grid.empty()) {
        auto rows = nlohmann::json::array();
        for (const auto& g : grid) {
            rows.push_back({{"x", g.x}, {"p", g.p}, {"p_error", g.p_error}, {"p_m", g.p_m}, {"p_m_error", g.p_m_error}});
        }
        j["monte_carlo_grid"] = rows;
    }
    return j;
}

namespace {

double bivariate_sup(double v, double c) {
    const double det = v * v - c * c;
    return det > 0.0 ? 1.0 / (2.0 * std::numbers::pi * std::sqrt(det)) : std::numeric_limits<double>::infinity();
}

// max over x >= 0 of |phi_a(x) - phi_b(x)|: grid then golden section.
std::pair<double, double> sup_normal_difference(double a, double b) {
    if (a == b) return {0.0, 0.0};
    auto f = [&](double x) { return std::fabs(normal_pdf(x, a) - normal_pdf(x, b)); };
    const double hi = 10.0 * std::sqrt(std::max(a, b));
    constexpr int points = 4000;
    double best_x = 0.0, best = f(0.0);
    for (int i = 1; i <= points; ++i) {
        const double x = hi * i / points;
        if (const double v = f(x); v > best) {
            best = v;
            best_x = x;
        }
    }
    double lo = std::max(0.0, best_x - hi / points), up = best_x + hi / points;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200 && up - lo > 1e-14; ++it) {
        const double x1 = up - phi * (up - lo), x2 = lo + phi * (up - lo);
        if (f(x1) < f(x2)) {
            lo = x1;
        } else {
            up = x2;
        }
    }
    const double xr = 0.5 * (lo + up);
    if (f(xr) > best) return {f(xr), xr};
    return {best, best_x};
}

}  // namespace

DensityOracle density_oracle(const CoefficientModel& model, const InnovationModel& innovations, std::int64_t m,
                             std::span<const std::int64_t> lag, const DensityOracleOptions& options) {
    if (m < 1) throw std::invalid_argument("density_oracle: m must be >= 1");
    if (static_cast<int>(lag.size()) != model.dim()) throw std::invalid_argument("density_oracle: lag dimension mismatch");
    DensityOracle o;
    o.exact = innovations.kind() == InnovationKind::Gaussian;
    o.innovation = innovations.name();
    o.condition1_status = o.exact ? "exact (gaussian)"
                                  : (innovations.lipschitz_density() ? "certified (lipschitz innovation density)"
                                                                     : "not certified");
    o.m = m;
    o.lag.assign(lag.begin(), lag.end());
    TailCalculator calc(model, options.tol);
    o.v = calc.total_sq();
    o.v_m = calc.truncated_sq(m);
    const auto cov = autocovariance(model, lag, options.tol);
    o.cov_lag = cov.value;
    o.cov_lag_m = truncated_autocovariance(model, lag, m);
    o.tail_error = std::max(calc.max_tail_error(), cov.error);
    o.det_lag = o.v * o.v - o.cov_lag * o.cov_lag;
    o.det_lag_m = o.v_m * o.v_m - o.cov_lag_m * o.cov_lag_m;
    o.p_bar_lag = bivariate_sup(o.v, o.cov_lag);
    o.p_bar_lag_m = bivariate_sup(o.v_m, o.cov_lag_m);

    if (o.exact) {
        o.p_bar = normal_pdf(0.0, o.v);
        o.p_bar_m = normal_pdf(0.0, o.v_m);
        std::tie(o.sup_difference, o.sup_difference_at) = sup_normal_difference(o.v_m, o.v);
        o.lipschitz = 1.0 / (std::min(o.v, o.v_m) * std::sqrt(2.0 * std::numbers::pi * std::numbers::e));
        return o;
    }

    // Diagnostic mode: histogram of X_0 and X_{0,m} from coefficients on
    // [0, M)^d with B_M <= 1e-3 sqrt(v), capped at 4096 coefficients.
    const int d = model.dim();
    std::int64_t M = minimal_truncation_radius(model, 1e-3 * std::sqrt(o.v), m);
    while (M > m && checked_power(M, d) > 4096) --M;
    o.tail_error = std::max(o.tail_error, calc.residual(M));
    const auto a = model.dense(M);
    const Box box(d, M);
    std::vector<bool> in_m(a.size());
    for (std::size_t off = 0; off < a.size(); ++off) in_m[off] = sup_norm(box.index(off)) < m;
    const double sd = std::sqrt(o.v);
    const double h = 0.1 * sd;
    constexpr int half_bins = 40;
    std::vector<double> hist(2 * half_bins, 0.0), hist_m(2 * half_bins, 0.0);
    CounterRng rng(options.seed);
    std::vector<double> eps(a.size());
    for (std::size_t s = 0; s < options.monte_carlo_samples; ++s) {
        for (auto& e : eps) e = innovations.sample(rng);
        double x = 0.0, xm = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            x += a[k] * eps[k];
            if (in_m[k]) xm += a[k] * eps[k];
        }
        const auto bin = [&](double y) { return static_cast<long>(std::floor(y / h)) + half_bins; };
        if (auto i = bin(x); i >= 0 && i < 2 * half_bins) hist[static_cast<std::size_t>(i)] += 1.0;
        if (auto i = bin(xm); i >= 0 && i < 2 * half_bins) hist_m[static_cast<std::size_t>(i)] += 1.0;
    }
    const double N = static_cast<double>(options.monte_carlo_samples);
    for (int i = 0; i < 2 * half_bins; ++i) {
        DensityGridPoint g;
        g.x = (i - half_bins + 0.5) * h;
        g.p = hist[static_cast<std::size_t>(i)] / (N * h);
        g.p_m = hist_m[static_cast<std::size_t>(i)] / (N * h);
        g.p_error = 3.0 * std::sqrt(std::max(g.p, 1.0 / (N * h)) / (N * h));
        g.p_m_error = 3.0 * std::sqrt(std::max(g.p_m, 1.0 / (N * h)) / (N * h));
        o.grid.push_back(g);
        o.p_bar = std::max(o.p_bar, g.p);
        o.p_bar_m = std::max(o.p_bar_m, g.p_m);
        if (const double diff = std::fabs(g.p - g.p_m); diff > o.sup_difference) {
            o.sup_difference = diff;
            o.sup_difference_at = g.x;
        }
    }
    o.lipschitz = std::numeric_limits<double>::quiet_NaN();
    return o;
}

double expected_fn(const DensityOracle& oracle, const KernelModel& kernel, double b, double x) {
    if (!oracle.exact) {
        throw std::logic_error("expected_fn needs an exact oracle; use pooled-mean centering for " + oracle.innovation +
                               " innovations");
    }
    return smoothed_normal_moment(kernel, b, x, oracle.v, 1, 1e-10);
}

}  // namespace kdelab
