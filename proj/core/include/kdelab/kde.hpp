#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kdelab/coefficients.hpp"
#include "kdelab/field.hpp"
#include "kdelab/innovations.hpp"
#include "kdelab/rng.hpp"

namespace kdelab {

enum class KernelKind { Epanechnikov, Gaussian, Triangular };

/// Symmetric probability kernel with its constants.
class KernelModel {
public:
    static KernelModel epanechnikov();
    static KernelModel gaussian();
    static KernelModel triangular();
    static KernelModel from_name(const std::string& name);

    [[nodiscard]] KernelKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::string name() const;
    [[nodiscard]] double operator()(double u) const noexcept;

    [[nodiscard]] double lipschitz() const noexcept;
    [[nodiscard]] double sup() const noexcept;
    /// int K^2
    [[nodiscard]] double roughness() const noexcept;
    /// int |u| K(u) du
    [[nodiscard]] double abs_first_moment() const noexcept;
    /// int K'(u)^2 du
    [[nodiscard]] double derivative_roughness() const noexcept;
    /// Infinity for the Gaussian kernel.
    [[nodiscard]] double support_radius() const noexcept;
    /// Interval used for numerical integration: the support, or +-10 for
    /// the Gaussian kernel.
    [[nodiscard]] double integration_radius() const noexcept;

    bool operator==(const KernelModel&) const = default;

private:
    explicit KernelModel(KernelKind k) : kind_(k) {}
    KernelKind kind_;
};

/// (1/(N b)) sum_i K((x - X_i)/b).
[[nodiscard]] double kde_estimate(std::span<const double> values, double x, double b, const KernelModel& kernel);
[[nodiscard]] double kde_estimate(const LatticeField& field, double x, double b, const KernelModel& kernel);

/// sigma_x^2 = p(x) int K^2.
[[nodiscard]] double asymptotic_variance(double px, const KernelModel& kernel);

/// int K(u)^power phi_v(x - b u) du for a centered normal density with
/// variance v; absolute tolerance tol.
[[nodiscard]] double smoothed_normal_moment(const KernelModel& kernel, double b, double x, double variance,
                                            int power = 1, double tol = 1e-10);

/// int int K(u) K(w) q(x - b u, x - b w) du dw for the centered bivariate
/// normal density q with covariance [[v1, c], [c, v2]].
[[nodiscard]] double smoothed_bivariate_normal(const KernelModel& kernel, double b, double x, double v1,
                                               double v2, double c, double tol = 1e-9);

struct DensityOracleOptions {
    double tol = 1e-10;
    /// Diagnostic mode only.
    std::size_t monte_carlo_samples = 200000;
    SeedSpec seed{0x5eed, 0, 0};
};

struct DensityGridPoint {
    double x = 0.0;
    double p = 0.0;
    double p_error = 0.0;
    double p_m = 0.0;
    double p_m_error = 0.0;
};

/// Marginal and bivariate densities of X and X_m. Exact for Gaussian
/// innovations, where every density is normal; otherwise only the variances
/// are exact and densities are Monte Carlo histogram estimates.
struct DensityOracle {
    bool exact = false;
    std::string innovation;
    std::string condition1_status;
    std::int64_t m = 1;
    MultiIndex lag;
    double v = 0.0;    ///< sum a_k^2
    double v_m = 0.0;  ///< sum over [0,m)^d
    double cov_lag = 0.0;
    double cov_lag_m = 0.0;
    double det_lag = 0.0;
    double det_lag_m = 0.0;
    double p_bar = 0.0;
    double p_bar_m = 0.0;
    double p_bar_lag = 0.0;
    double p_bar_lag_m = 0.0;
    /// sup_x |p_m(x) - p(x)| and its maximizer (x >= 0).
    double sup_difference = 0.0;
    double sup_difference_at = 0.0;
    /// Lipschitz constant of p and p_m, max |p'|.
    double lipschitz = 0.0;
    double tail_error = 0.0;
    std::vector<DensityGridPoint> grid;  ///< diagnostic mode

    [[nodiscard]] double p(double x) const;
    [[nodiscard]] double p_m(double x) const;
    [[nodiscard]] nlohmann::json to_json() const;
};

DensityOracle density_oracle(const CoefficientModel& model, const InnovationModel& innovations, std::int64_t m,
                             std::span<const std::int64_t> lag, const DensityOracleOptions& options = {});

/// E f_n(x) = int K(u) p(x - b u) du. Throws std::logic_error for a
/// non-exact oracle.
[[nodiscard]] double expected_fn(const DensityOracle& oracle, const KernelModel& kernel, double b, double x);

}  // namespace kdelab
