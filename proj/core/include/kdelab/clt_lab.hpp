#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kdelab/bandwidth.hpp"
#include "kdelab/coefficients.hpp"
#include "kdelab/convolve.hpp"
#include "kdelab/field.hpp"
#include "kdelab/innovations.hpp"
#include "kdelab/kde.hpp"
#include "kdelab/numerics.hpp"

namespace kdelab {

enum class Centering { Oracle, Pooled };

[[nodiscard]] std::string to_string(Centering c);
[[nodiscard]] Centering centering_from_string(const std::string& s);

struct TruncationSpec {
    TruncationPolicy policy = TruncationPolicy::BandwidthRelative;
    std::int64_t radius = 0;  ///< fixed policy; raised to m when smaller
    double eta = 0.01;
};

/// Everything needed to reproduce an experiment. `threads` only affects
/// wall time and is not part of the serialized config.
struct ExperimentConfig {
    CoefficientModel model = CoefficientModel::identity(1);
    InnovationModel innovations = InnovationModel::gaussian();
    KernelModel kernel = KernelModel::epanechnikov();
    BandwidthSchedule bandwidth{1.0, 0.2};
    std::vector<std::int64_t> n_grid{4096};
    std::vector<double> x_points{0.0};
    /// x_points are multiples of sqrt(v) when true.
    bool x_in_sd_units = false;
    std::optional<std::int64_t> m_fixed;
    std::optional<double> delta;
    TruncationSpec truncation;
    std::int64_t replicates = 1000;
    std::uint64_t master_seed = 0;
    int threads = 1;
    Centering centering = Centering::Oracle;
    double variance_band = 0.10;
    ConvolutionMethod method = ConvolutionMethod::Auto;
    std::size_t memory_cap_bytes = std::size_t{2} << 30;

    [[nodiscard]] int dim() const noexcept { return model.dim(); }
    /// m_fixed, else floor(n^delta), else the support side of a
    /// finite-support model, else floor(n^delta*) from check_corollary1 when the
    /// model declares beta.
    [[nodiscard]] std::int64_t m_at(std::int64_t n) const;
    [[nodiscard]] double bandwidth_at(std::int64_t n) const { return bandwidth.at(n); }
    [[nodiscard]] TruncationPlan plan_at(std::int64_t n) const;
    /// Evaluation points in absolute units.
    [[nodiscard]] std::vector<double> resolved_x() const;
    [[nodiscard]] GenerationOptions generation_options() const;

    void validate() const;
    [[nodiscard]] nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

// ---------------------------------------------------------------------------
// Normalized statistic

/// E Z_{n,i} and E zeta_{n,i}.
struct CenteringTerms {
    double ez = 0.0;
    double ezeta = 0.0;
};

/// Exact expectations for Gaussian innovations, where X and X_m are normal
/// with the given variances. Throws std::logic_error otherwise.
CenteringTerms oracle_centering(const InnovationModel& innovations, const KernelModel& kernel, double b, double x,
                                double full_variance, double truncated_variance);

/// Uncentered site sums of one replicate.
struct SiteSums {
    double z = 0.0;     ///< sum Z_i
    double zeta = 0.0;  ///< sum zeta_i
    double diff = 0.0;  ///< sum (Z_i - zeta_i)
    std::size_t sites = 0;
};

SiteSums site_sums(std::span<const double> full, std::span<const double> truncated, double x, double b,
                   const KernelModel& kernel);

struct StatisticTriple {
    double t_n = 0.0;
    double t_zeta = 0.0;
    double t_remainder = 0.0;
    /// |t_n - t_zeta - t_remainder|; t_remainder is summed independently.
    double identity_error = 0.0;
};

StatisticTriple normalized_statistic(const SiteSums& sums, const CenteringTerms& centering);
StatisticTriple normalized_statistic(const CoupledFields& fields, double x, const KernelModel& kernel, double b,
                                     const CenteringTerms& centering);

// ---------------------------------------------------------------------------
// Goodness of fit

struct KsResult {
    double distance = 0.0;
    double critical_05 = 0.0;
    double critical_01 = 0.0;
    /// Asymptotic Kolmogorov p-value.
    double p_value = 1.0;
    std::size_t samples = 0;
    bool enough_samples = false;  ///< at least 100
};

/// One-sample Kolmogorov-Smirnov distance to normal(0, sigma2).
KsResult ks_normality_test(std::span<const double> samples, double sigma2);

// ---------------------------------------------------------------------------
// CLT experiment

struct CltPoint {
    std::int64_t n = 0;
    std::int64_t m = 0;
    std::int64_t radius = 0;
    double tail_bound = 0.0;
    double b = 0.0;
    double x = 0.0;
    double px = 0.0;
    double sigma2 = 0.0;
    /// Var Z_0 at this bandwidth: the exact Var T_n when the field is i.i.d.
    double site_variance = 0.0;
    CenteringTerms centering;
    std::vector<double> t_n;
    std::vector<double> t_zeta;
    std::vector<double> t_remainder;
    SampleMoments moments;
    SampleMoments zeta_moments;
    double remainder_second_moment = 0.0;
    double remainder_variance = 0.0;
    double max_identity_error = 0.0;
    std::size_t nonfinite = 0;
    KsResult ks;
    double mean_threshold = 0.0;
    bool mean_ok = false;
    bool variance_ok = false;
    bool ks_ok = false;
    Verdict verdict = Verdict::Inconclusive;
    std::string label;
};

struct CltReport {
    nlohmann::json config;
    std::optional<ConditionReport> corollary1;
    std::string condition1_status;
    std::vector<CltPoint> points;
    /// x -> Var(T_remainder) along the n-grid.
    std::map<double, std::vector<double>> remainder_trend;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<std::string> notes;

    [[nodiscard]] nlohmann::json to_json(bool include_replicates = true) const;
};

CltReport run_clt_experiment(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Big blocks

/// Blocks of side l start at multiples of l + gap along every axis.
/// Sites at sup-distance >= m are independent in an m-dependent field, so
/// gap >= m - 1 makes block sums independent.
struct BlockPlan {
    std::int64_t block_side = 1;
    std::int64_t gap = 0;
    std::int64_t blocks_per_axis = 0;
    std::int64_t m = 1;

    /// Defaults: block side m * ceil(log n), gap m.
    static BlockPlan make(std::int64_t n, std::int64_t m, std::optional<std::int64_t> block_side = std::nullopt,
                          std::optional<std::int64_t> gap = std::nullopt);
    [[nodiscard]] nlohmann::json to_json() const;
};

struct BlockPlanSpec {
    std::optional<std::int64_t> block_side;
    std::optional<std::int64_t> gap;
    [[nodiscard]] BlockPlan resolve(std::int64_t n, std::int64_t m) const {
        return BlockPlan::make(n, m, block_side, gap);
    }
};

struct BlockPoint {
    std::int64_t n = 0;
    BlockPlan plan;
    double b = 0.0;
    std::size_t blocks = 0;
    double covered_fraction = 0.0;
    double rate_proxy = 0.0;  ///< m / (l + m)
    double gap_mean = 0.0;
    double gap_variance = 0.0;  ///< Var((S_n(Y) - S_n(eta)) / n^(d/2))
    double adjacent_correlation = 0.0;
    double correlation_threshold = 0.0;
    std::size_t adjacent_pairs = 0;
    double lag1_correlation = 0.0;  ///< Y_i vs Y_{i+e_1}
    double lagm_correlation = 0.0;  ///< Y_i vs Y_{i+m e_1}
    double lf1 = 0.0;               ///< (1/l^d) E xi^2
    double lf1_target = 0.0;        ///< p_m(x) int K^2
    std::vector<double> lf2;        ///< per epsilon
    std::vector<bool> lf2_trivially_zero;
    double sigma2 = 0.0;            ///< p(x) int K^2
};

struct BlockReport {
    nlohmann::json config;
    double x = 0.0;
    std::vector<double> epsilons;
    std::vector<BlockPoint> points;
    bool gap_variance_decreasing = false;
    bool correlations_ok = false;
    Verdict verdict = Verdict::Inconclusive;
    /// Lindeberg part.
    std::vector<bool> lf2_decreasing;
    Verdict lindeberg_verdict = Verdict::Inconclusive;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Simulates the m-truncated field only (radius m), so Y = zeta-bar is
/// exactly m-dependent. Produces block-gap variances, the independence
/// audit and the Lindeberg estimates in one pass. x is config.resolved_x()[0].
BlockReport block_decomposition_check(const ExperimentConfig& config, const BlockPlanSpec& plan,
                                      std::span<const double> epsilons = {});
/// Same simulation, reported for the Lindeberg conditions.
BlockReport lindeberg_estimate(const ExperimentConfig& config, const BlockPlanSpec& plan,
                               std::span<const double> epsilons);

// ---------------------------------------------------------------------------
// Moment bounds

struct RectangleRow {
    std::int64_t n = 0;
    MultiIndex sides;
    double zeta_norm = 0.0;        ///< ||sum zeta-bar||_2 / sqrt(|j|)
    double remainder_norm = 0.0;   ///< ||sum (Z-bar - zeta-bar)||_2 / sqrt(|j|)
    double remainder_constant = 0.0;  ///< remainder_norm / (||Z-bar_0 - zeta-bar_0||_2 + b^(1/2) Delta_n)
};

struct RectangleReport {
    nlohmann::json config;
    double x = 0.0;
    std::vector<RectangleRow> rows;
    std::map<std::int64_t, double> site_remainder_norm;  ///< n -> ||Z-bar_0 - zeta-bar_0||_2
    std::map<std::int64_t, double> delta_n;
    double zeta_ratio = 0.0;       ///< max/min of zeta_norm
    double zeta_constant = 0.0;    ///< max zeta_norm
    double remainder_ratio = 0.0;
    double remainder_constant = 0.0;
    double ratio_cap = 3.0;
    Verdict verdict = Verdict::Inconclusive;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Rectangles are anchored at the origin: sites 1 <= i <= j.
RectangleReport rectangle_moment_check(const ExperimentConfig& config, std::span<const MultiIndex> rectangles,
                                       double ratio_cap = 3.0);

struct WuReport {
    int p = 1;
    std::size_t samples = 0;
    std::int64_t radius = 0;
    double tail_bound = 0.0;
    double sum_a2 = 0.0;        ///< over the simulated support
    double sum_a4 = 0.0;
    double moment = 0.0;        ///< sample E|X|^(2p)
    double constant = 0.0;      ///< moment / (sum a^2)^p
    double standard_error = 0.0;
    double expected_constant = 0.0;
    double z = 0.0;
    Verdict verdict = Verdict::Inconclusive;
    std::string model;
    std::string innovation;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Monte Carlo E|sum a_i eps_i|^(2p) against (sum a_i^2)^p for p in {1, 2}.
/// Pass when the estimate is within 3 standard errors of the exact
/// constant 1 (p=1) or 3 + (E eps^4 - 3) sum a^4 / (sum a^2)^2 (p=2).
WuReport wu_inequality_check(const CoefficientModel& model, const InnovationModel& innovations, int p,
                             std::size_t samples, const SeedSpec& seed = {}, int threads = 1);

// ---------------------------------------------------------------------------
// Fixed-m gap

struct GapPoint {
    std::int64_t n = 0;
    std::int64_t m = 0;
    double b = 0.0;
    double gap = 0.0;                ///< E (zeta - Z)^2
    double gap_standard_error = 0.0;
    double centered_gap = 0.0;       ///< E (zeta-bar - Z-bar)^2
    double exact_gap = 0.0;          ///< finite-b Gaussian oracle
    double bound_proxy = 0.0;        ///< B_m / b + b
};

struct GapReport {
    nlohmann::json config;
    double x = 0.0;
    double limit_oracle = 0.0;  ///< (p_m(x) + p(x)) int K^2
    std::vector<GapPoint> fixed;
    std::vector<GapPoint> growing;
    std::optional<double> growing_delta;
    double tolerance = 0.15;
    bool fixed_within_tolerance = false;
    bool fixed_not_vanishing = false;
    double growing_constant = 0.0;  ///< max gap / bound_proxy
    bool growing_halved = false;
    Verdict verdict = Verdict::Inconclusive;
    std::string label;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Needs Gaussian innovations. The growing mode runs when growing_delta is
/// set, with m_n = floor(n^delta).
GapReport fixed_m_gap(const ExperimentConfig& config, std::int64_t m, std::span<const std::int64_t> n_grid,
                      std::optional<double> growing_delta = std::nullopt, double tolerance = 0.15);

}  // namespace kdelab
