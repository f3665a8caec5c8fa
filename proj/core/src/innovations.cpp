#include "kdelab/innovations.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kdelab {

InnovationModel InnovationModel::gaussian() { return {InnovationKind::Gaussian, 0.0}; }

InnovationModel InnovationModel::uniform() { return {InnovationKind::Uniform, 0.0}; }

InnovationModel InnovationModel::student_t(double nu) {
    if (!(nu > 2.0) || !std::isfinite(nu)) {
        throw std::invalid_argument("student-t innovations need nu > 2 for finite variance");
    }
    return {InnovationKind::StudentT, nu};
}

std::string InnovationModel::name() const {
    switch (kind_) {
        case InnovationKind::Gaussian: return "gaussian";
        case InnovationKind::Uniform: return "uniform";
        case InnovationKind::StudentT: return "student-t";
    }
    return "unknown";
}

double InnovationModel::density(double x) const {
    switch (kind_) {
        case InnovationKind::Gaussian:
            return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        case InnovationKind::Uniform: {
            const double half_width = std::sqrt(3.0);
            return std::fabs(x) <= half_width ? 0.5 / half_width : 0.0;
        }
        case InnovationKind::StudentT: {
            const double s = std::sqrt((nu_ - 2.0) / nu_);
            const double t = x / s;
            const double log_norm = std::lgamma(0.5 * (nu_ + 1.0)) - std::lgamma(0.5 * nu_) -
                                    0.5 * std::log(nu_ * std::numbers::pi);
            return std::exp(log_norm - 0.5 * (nu_ + 1.0) * std::log1p(t * t / nu_)) / s;
        }
    }
    return 0.0;
}

double InnovationModel::max_moment_order() const noexcept {
    return kind_ == InnovationKind::StudentT ? nu_ : std::numeric_limits<double>::infinity();
}

bool InnovationModel::has_finite_moment(double order) const noexcept {
    return kind_ != InnovationKind::StudentT || order < nu_;
}

double InnovationModel::fourth_moment() const noexcept {
    switch (kind_) {
        case InnovationKind::Gaussian: return 3.0;
        case InnovationKind::Uniform: return 9.0 / 5.0;
        case InnovationKind::StudentT:
            return nu_ > 4.0 ? 3.0 + 6.0 / (nu_ - 4.0) : std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

namespace {

// Marsaglia-Tsang for shape >= 1, unit scale.
double gamma_draw(CounterRng& rng, double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

}  // namespace

double InnovationModel::sample(CounterRng& rng) const {
    switch (kind_) {
        case InnovationKind::Gaussian: return rng.normal();
        case InnovationKind::Uniform: return std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
        case InnovationKind::StudentT: {
            const double z = rng.normal();
            const double chi2 = 2.0 * gamma_draw(rng, 0.5 * nu_);
            return z / std::sqrt(chi2 / nu_) * std::sqrt((nu_ - 2.0) / nu_);
        }
    }
    return 0.0;
}

nlohmann::json InnovationModel::to_json() const {
    nlohmann::json j{{"distribution", name()}};
    if (kind_ == InnovationKind::StudentT) j["nu"] = nu_;
    return j;
}

InnovationModel InnovationModel::from_json(const nlohmann::json& j) {
    const std::string name = j.is_string() ? j.get<std::string>() : j.value("distribution", "gaussian");
    if (name == "gaussian") return gaussian();
    if (name == "uniform") return uniform();
    if (name == "student-t") {
        if (!j.is_object() || !j.contains("nu")) throw std::invalid_argument("innovations.nu: missing");
        return student_t(j.at("nu").get<double>());
    }
    throw std::invalid_argument("innovations.distribution: unknown '" + name + "'");
}

void fill_innovations(const InnovationModel& model, const SeedSpec& seed, std::span<double> out) {
    CounterRng rng(seed);
    for (auto& v : out) v = model.sample(rng);
}

std::vector<double> innovation_stream(const InnovationModel& model, const SeedSpec& seed,
                                      std::size_t count) {
    if (count < 1) throw std::invalid_argument("innovation_stream: count must be >= 1");
    std::vector<double> out(count);
    fill_innovations(model, seed, out);
    return out;
}

}  // namespace kdelab
