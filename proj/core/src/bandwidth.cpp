#include "kdelab/bandwidth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kdelab {

BandwidthSchedule::BandwidthSchedule(double c2, double gamma) : c2_(c2), gamma_(gamma) {
    if (!(c2 > 0.0) || !std::isfinite(c2)) throw std::invalid_argument("bandwidth: c2 must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("bandwidth: gamma must be positive");
    }
}

double BandwidthSchedule::at(std::int64_t n) const {
    if (n < 1) throw std::invalid_argument("bandwidth: n must be >= 1");
    return c2_ * std::pow(static_cast<double>(n), -gamma_);
}

void BandwidthSchedule::validate_for_dimension(int dim) const {
    if (!(gamma_ < dim)) {
        throw std::invalid_argument("bandwidth: gamma must be < d = " + std::to_string(dim) +
                                    " so that n^d b_n diverges");
    }
}

nlohmann::json BandwidthSchedule::to_json() const {
    return {{"c2", c2_}, {"gamma", gamma_}};
}

BandwidthSchedule BandwidthSchedule::from_json(const nlohmann::json& j) {
    if (!j.contains("gamma")) throw std::invalid_argument("bandwidth.gamma: missing");
    return {j.value("c2", 1.0), j.at("gamma").get<double>()};
}

}  // namespace kdelab
