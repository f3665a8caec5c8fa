#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kdelab/rng.hpp"

namespace kdelab {

enum class InnovationKind { Gaussian, Uniform, StudentT };

/// Zero-mean, unit-variance i.i.d. innovation law.
///
/// Uniform is centered on [-sqrt(3), sqrt(3)]. Student-t with nu > 2 degrees
/// of freedom is rescaled by sqrt((nu-2)/nu); its absolute moments are finite
/// for orders strictly below nu.
class InnovationModel {
public:
    static InnovationModel gaussian();
    static InnovationModel uniform();
    static InnovationModel student_t(double nu);

    [[nodiscard]] InnovationKind kind() const noexcept { return kind_; }
    [[nodiscard]] double nu() const noexcept { return nu_; }
    [[nodiscard]] std::string name() const;

    [[nodiscard]] double density(double x) const;
    [[nodiscard]] double variance() const noexcept { return 1.0; }
    /// Supremum of finite absolute-moment orders (exclusive for Student-t).
    [[nodiscard]] double max_moment_order() const noexcept;
    [[nodiscard]] bool has_finite_moment(double order) const noexcept;
    /// E eps^4 (infinite for Student-t with nu <= 4).
    [[nodiscard]] double fourth_moment() const noexcept;
    /// Bounded Lipschitz density, which certifies the density regularity
    /// conditions of the CLT. False for the uniform law.
    [[nodiscard]] bool lipschitz_density() const noexcept { return kind_ != InnovationKind::Uniform; }

    double sample(CounterRng& rng) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static InnovationModel from_json(const nlohmann::json& j);

    bool operator==(const InnovationModel&) const = default;

private:
    InnovationModel(InnovationKind kind, double nu) : kind_(kind), nu_(nu) {}

    InnovationKind kind_;
    double nu_;
};

/// `count` i.i.d. draws, a pure function of (model, seed, count).
std::vector<double> innovation_stream(const InnovationModel& model, const SeedSpec& seed,
                                      std::size_t count);

/// Fills `out` with draws; same sequence as innovation_stream.
void fill_innovations(const InnovationModel& model, const SeedSpec& seed, std::span<double> out);

}  // namespace kdelab
