#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

namespace kdelab {

/// b_n = c2 * n^(-gamma). Valid for 0 < gamma < d, where d is the lattice
/// dimension; n^d * b_n then diverges.
class BandwidthSchedule {
public:
    BandwidthSchedule(double c2, double gamma);

    [[nodiscard]] double c2() const noexcept { return c2_; }
    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] double at(std::int64_t n) const;

    /// Throws unless 0 < gamma < dim.
    void validate_for_dimension(int dim) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static BandwidthSchedule from_json(const nlohmann::json& j);

private:
    double c2_;
    double gamma_;
};

}  // namespace kdelab
