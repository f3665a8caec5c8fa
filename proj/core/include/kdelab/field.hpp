#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kdelab/coefficients.hpp"
#include "kdelab/convolve.hpp"
#include "kdelab/innovations.hpp"
#include "kdelab/lattice.hpp"
#include "kdelab/rng.hpp"

namespace kdelab {

struct FieldProvenance {
    std::string coefficient_model;
    std::int64_t truncation_radius = 1;
    std::int64_t coefficient_support = 1;  ///< m for X_m, M for X
    std::string component;                 ///< "full", "truncated" or "residual"
    std::string innovation_model;
    SeedSpec seed;

    [[nodiscard]] nlohmann::json to_json() const;
    static FieldProvenance from_json(const nlohmann::json& j);
};

/// Realized values on [1, n]^d, stored row-major over [0, n)^d.
struct LatticeField {
    int dim = 1;
    std::int64_t side = 0;
    std::vector<double> values;
    FieldProvenance provenance;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] double at(std::span<const std::int64_t> idx) const;
};

enum class TruncationPolicy { Fixed, BandwidthRelative };

[[nodiscard]] std::string to_string(TruncationPolicy p);
[[nodiscard]] TruncationPolicy truncation_policy_from_string(const std::string& s);

/// Global radius M used to approximate the infinite moving average.
struct TruncationPlan {
    std::int64_t radius = 1;
    double tail_bound = 0.0;  ///< B_M
    TruncationPolicy policy = TruncationPolicy::Fixed;
    double eta = 0.0;         ///< bandwidth-relative only
    double bandwidth = 0.0;   ///< bandwidth-relative only

    static TruncationPlan fixed(const CoefficientModel& model, std::int64_t radius);
    /// Minimal M >= min_radius with B_M <= eta * bandwidth.
    static TruncationPlan bandwidth_relative(const CoefficientModel& model, double bandwidth,
                                             std::int64_t min_radius, double eta = 0.01);

    [[nodiscard]] nlohmann::json to_json() const;
};

struct CoupledFields {
    LatticeField full;       ///< X, coefficients on [0, M)^d
    LatticeField truncated;  ///< X_m, coefficients on [0, m)^d
    LatticeField residual;   ///< X - X_m
    std::int64_t m = 1;
};

struct GenerationOptions {
    ConvolutionMethod method = ConvolutionMethod::Auto;
    std::size_t memory_cap_bytes = std::size_t{2} << 30;
};

/// Peak bytes needed to generate one coupled triple.
[[nodiscard]] std::size_t estimated_generation_bytes(int dim, std::int64_t n, std::int64_t radius,
                                                     ConvolutionMethod method);

/// Reusable generator for many replicates of the same shape. Construction
/// validates the shapes and the memory cap and precomputes the kernels;
/// generate() is const and may be called concurrently.
class FieldGenerator {
public:
    FieldGenerator(const CoefficientModel& model, const InnovationModel& innovations, std::int64_t n,
                   std::int64_t m, const TruncationPlan& plan, const GenerationOptions& options = {});

    [[nodiscard]] CoupledFields generate(const SeedSpec& seed) const;

    /// X and X_m only, written into caller buffers of n^d entries.
    void generate_into(const SeedSpec& seed, std::span<double> full, std::span<double> truncated) const;

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] std::int64_t side() const noexcept { return n_; }
    [[nodiscard]] std::int64_t m() const noexcept { return m_; }
    [[nodiscard]] const TruncationPlan& plan() const noexcept { return plan_; }
    [[nodiscard]] ConvolutionMethod method() const noexcept { return convolver_->method(); }
    /// Exact variance of the generated X and X_m.
    [[nodiscard]] double full_variance() const noexcept { return full_variance_; }
    [[nodiscard]] double truncated_variance() const noexcept { return truncated_variance_; }

private:
    int dim_;
    std::int64_t n_;
    std::int64_t m_;
    TruncationPlan plan_;
    InnovationModel innovations_;
    std::string model_id_;
    double full_variance_ = 0.0;
    double truncated_variance_ = 0.0;
    std::unique_ptr<LatticeConvolver> convolver_;
};

CoupledFields generate_coupled_fields(const CoefficientModel& model, const InnovationModel& innovations,
                                      std::int64_t n, std::int64_t m, const TruncationPlan& plan,
                                      const SeedSpec& seed, const GenerationOptions& options = {});

struct LagMoment {
    MultiIndex lag;
    double sample = 0.0;
    double oracle = 0.0;            ///< sum over all k of a_k a_{k+lag}
    double oracle_truncated = 0.0;  ///< same sum over the generated support [0, M)^d
    double standard_error = 0.0;
    double z = 0.0;                 ///< (sample - oracle_truncated) / standard_error
};

struct FieldMomentReport {
    std::size_t sites = 0;
    double mean = 0.0;
    double mean_standard_error = 0.0;
    double variance = 0.0;
    std::vector<LagMoment> lags;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Sample mean, variance and autocovariances against the coefficient oracle.
/// Standard errors use Bartlett's formula with the covariances of the
/// generated (radius-M) field. Lags must lie in [0, n/4]^d.
FieldMomentReport field_moment_diagnostics(const LatticeField& field, const CoefficientModel& model,
                                           std::span<const MultiIndex> lags);

/// Binary layout (little endian): "KDLF", u32 version, u32 d, u64 n,
/// u64 provenance length, provenance JSON bytes, n^d float64 values.
void write_field_binary(const LatticeField& field, std::ostream& out);
LatticeField read_field_binary(std::istream& in);
/// Header i_1,...,i_d,value with 1-based indices; side must be <= 64.
void write_field_csv(const LatticeField& field, std::ostream& out);

}  // namespace kdelab
