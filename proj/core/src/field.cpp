#include "kdelab/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "kdelab/numerics.hpp"

namespace kdelab {

nlohmann::json FieldProvenance::to_json() const {
    return {{"coefficient_model", coefficient_model},
            {"truncation_radius", truncation_radius},
            {"coefficient_support", coefficient_support},
            {"component", component},
            {"innovation_model", innovation_model},
            {"seed", seed.to_json()}};
}

FieldProvenance FieldProvenance::from_json(const nlohmann::json& j) {
    FieldProvenance p;
    p.coefficient_model = j.at("coefficient_model").get<std::string>();
    p.truncation_radius = j.at("truncation_radius").get<std::int64_t>();
    p.coefficient_support = j.at("coefficient_support").get<std::int64_t>();
    p.component = j.at("component").get<std::string>();
    p.innovation_model = j.at("innovation_model").get<std::string>();
    const auto& s = j.at("seed");
    p.seed = {s.at("master").get<std::uint64_t>(), s.at("stream").get<std::uint64_t>(),
              s.at("replicate").get<std::uint64_t>()};
    return p;
}

double LatticeField::at(std::span<const std::int64_t> idx) const {
    return values[Box(dim, side).offset(idx)];
}

std::string to_string(TruncationPolicy p) {
    return p == TruncationPolicy::Fixed ? "fixed" : "bandwidth-relative";
}

TruncationPolicy truncation_policy_from_string(const std::string& s) {
    if (s == "fixed") return TruncationPolicy::Fixed;
    if (s == "bandwidth-relative") return TruncationPolicy::BandwidthRelative;
    throw std::invalid_argument("unknown truncation policy '" + s + "'");
}

TruncationPlan TruncationPlan::fixed(const CoefficientModel& model, std::int64_t radius) {
    if (radius < 1) throw std::invalid_argument("truncation radius must be >= 1");
    TruncationPlan plan;
    plan.radius = radius;
    plan.tail_bound = TailCalculator(model).residual(radius);
    plan.policy = TruncationPolicy::Fixed;
    return plan;
}

TruncationPlan TruncationPlan::bandwidth_relative(const CoefficientModel& model, double bandwidth,
                                                  std::int64_t min_radius, double eta) {
    if (!(bandwidth > 0.0) || !(eta > 0.0)) {
        throw std::invalid_argument("bandwidth-relative truncation needs bandwidth > 0 and eta > 0");
    }
    TruncationPlan plan;
    plan.radius = minimal_truncation_radius(model, eta * bandwidth, std::max<std::int64_t>(min_radius, 1));
    plan.tail_bound = TailCalculator(model).residual(plan.radius);
    plan.policy = TruncationPolicy::BandwidthRelative;
    plan.eta = eta;
    plan.bandwidth = bandwidth;
    return plan;
}

nlohmann::json TruncationPlan::to_json() const {
    nlohmann::json j{{"radius", radius}, {"tail_bound", tail_bound}, {"policy", to_string(policy)}};
    if (policy == TruncationPolicy::BandwidthRelative) {
        j["eta"] = eta;
        j["bandwidth"] = bandwidth;
    }
    return j;
}

std::size_t estimated_generation_bytes(int dim, std::int64_t n, std::int64_t radius,
                                       ConvolutionMethod method) {
    const double L = static_cast<double>(n + radius - 1);
    double words = std::pow(L, dim) + 3.0 * std::pow(static_cast<double>(n), dim) +
                   2.0 * std::pow(static_cast<double>(radius), dim);
    if (method != ConvolutionMethod::Direct) {
        const double P = static_cast<double>(fft_friendly_size(n + radius - 1));
        const double spec = std::pow(P, dim - 1) * (std::floor(P / 2) + 1);
        // padded real buffer, input spectrum, product and two kernel spectra
        words += std::pow(P, dim) + 2.0 * 4.0 * spec;
    }
    const double bytes = 8.0 * words;
    if (bytes >= static_cast<double>(std::numeric_limits<std::size_t>::max())) {
        return std::numeric_limits<std::size_t>::max();
    }
    return static_cast<std::size_t>(bytes);
}

FieldGenerator::FieldGenerator(const CoefficientModel& model, const InnovationModel& innovations,
                               std::int64_t n, std::int64_t m, const TruncationPlan& plan,
                               const GenerationOptions& options)
    : dim_(model.dim()), n_(n), m_(m), plan_(plan), innovations_(innovations), model_id_(model.id()) {
    if (n < 1) throw std::invalid_argument("field side n must be >= 1");
    if (m < 1) throw std::invalid_argument("truncation m must be >= 1");
    if (m > plan.radius) {
        throw std::invalid_argument("truncation m=" + std::to_string(m) + " exceeds radius M=" +
                                    std::to_string(plan.radius));
    }
    const std::size_t bytes = estimated_generation_bytes(dim_, n, plan.radius, options.method);
    if (bytes > options.memory_cap_bytes) {
        std::ostringstream msg;
        msg << "field generation for d=" << dim_ << ", n=" << n << ", M=" << plan.radius << " needs about "
            << static_cast<double>(bytes) / (1 << 20) << " MiB, above the cap of "
            << static_cast<double>(options.memory_cap_bytes) / (1 << 20) << " MiB";
        throw std::length_error(msg.str());
    }
    auto full = model.dense(plan.radius);
    auto truncated = full;
    const Box kbox(dim_, plan.radius);
    CompensatedSum vf, vt;
    for (std::size_t off = 0; off < full.size(); ++off) {
        vf += full[off] * full[off];
        if (sup_norm(kbox.index(off)) >= m) {
            truncated[off] = 0.0;
        } else {
            vt += full[off] * full[off];
        }
    }
    full_variance_ = vf.value() * innovations.variance();
    truncated_variance_ = vt.value() * innovations.variance();
    convolver_ = std::make_unique<LatticeConvolver>(
        dim_, n, plan.radius, std::vector<std::vector<double>>{std::move(full), std::move(truncated)},
        options.method);
}

void FieldGenerator::generate_into(const SeedSpec& seed, std::span<double> full,
                                   std::span<double> truncated) const {
    std::vector<double> eps(checked_power(convolver_->input_side(), dim_));
    fill_innovations(innovations_, seed, eps);
    const std::span<double> outputs[] = {full, truncated};
    convolver_->apply(eps, outputs);
}

CoupledFields FieldGenerator::generate(const SeedSpec& seed) const {
    CoupledFields out;
    out.m = m_;
    const std::size_t size = checked_power(n_, dim_);
    auto init = [&](LatticeField& f, std::int64_t support, const char* component) {
        f.dim = dim_;
        f.side = n_;
        f.values.assign(size, 0.0);
        f.provenance = {model_id_, plan_.radius, support, component, innovations_.name(), seed};
    };
    init(out.full, plan_.radius, "full");
    init(out.truncated, m_, "truncated");
    init(out.residual, plan_.radius, "residual");
    generate_into(seed, out.full.values, out.truncated.values);
    for (std::size_t i = 0; i < size; ++i) {
        out.residual.values[i] = out.full.values[i] - out.truncated.values[i];
    }
    return out;
}

CoupledFields generate_coupled_fields(const CoefficientModel& model, const InnovationModel& innovations,
                                      std::int64_t n, std::int64_t m, const TruncationPlan& plan,
                                      const SeedSpec& seed, const GenerationOptions& options) {
    return FieldGenerator(model, innovations, n, m, plan, options).generate(seed);
}

// ---------------------------------------------------------------------------

nlohmann::json FieldMomentReport::to_json() const {
    nlohmann::json lag_rows = nlohmann::json::array();
    for (const auto& l : lags) {
        lag_rows.push_back({{"lag", l.lag},
                            {"sample", l.sample},
                            {"oracle", l.oracle},
                            {"oracle_truncated", l.oracle_truncated},
                            {"standard_error", l.standard_error},
                            {"z", l.z}});
    }
    return {{"sites", sites},
            {"mean", mean},
            {"mean_standard_error", mean_standard_error},
            {"variance", variance},
            {"lags", lag_rows}};
}

namespace {

// gamma(j) = sum_k a_k a_{k+j} over the dense [0,M)^d array, tabulated on
// [-(M-1), M-1]^d.
class CovarianceTable {
public:
    CovarianceTable(const std::vector<double>& a, int dim, std::int64_t M)
        : dim_(dim), M_(M), box_(dim, 2 * M - 1), values_(box_.size(), 0.0) {
        const Box kbox(dim, M);
        for (std::size_t off = 0; off < box_.size(); ++off) {
            MultiIndex j = box_.index(off);
            for (auto& v : j) v -= M - 1;
            CompensatedSum s;
            MultiIndex k(static_cast<std::size_t>(dim)), kj(static_cast<std::size_t>(dim));
            for (std::size_t ko = 0; ko < kbox.size(); ++ko) {
                k = kbox.index(ko);
                bool inside = true;
                for (std::size_t t = 0; t < k.size(); ++t) {
                    kj[t] = k[t] + j[t];
                    inside = inside && kj[t] >= 0 && kj[t] < M;
                }
                if (inside) s += a[ko] * a[kbox.offset(kj)];
            }
            values_[off] = s.value();
        }
    }

    [[nodiscard]] double operator()(const MultiIndex& j) const {
        MultiIndex shifted(j.size());
        for (std::size_t t = 0; t < j.size(); ++t) {
            if (j[t] <= -M_ || j[t] >= M_) return 0.0;
            shifted[t] = j[t] + M_ - 1;
        }
        return values_[box_.offset(shifted)];
    }

    [[nodiscard]] const Box& box() const noexcept { return box_; }
    [[nodiscard]] std::int64_t radius() const noexcept { return M_; }
    [[nodiscard]] int dim() const noexcept { return dim_; }

private:
    int dim_;
    std::int64_t M_;
    Box box_;
    std::vector<double> values_;
};

}  // namespace

FieldMomentReport field_moment_diagnostics(const LatticeField& field, const CoefficientModel& model,
                                           std::span<const MultiIndex> lags) {
    const int d = field.dim;
    const std::int64_t n = field.side;
    const Box box(d, n);
    if (field.values.size() != box.size()) throw std::invalid_argument("field size does not match its side");
    if (model.dim() != d) throw std::invalid_argument("model and field dimensions differ");
    for (const auto& h : lags) {
        if (static_cast<int>(h.size()) != d) throw std::invalid_argument("lag dimension mismatch");
        for (auto v : h) {
            if (v < 0 || 4 * v > n) throw std::invalid_argument("lag " + to_string(h) + " outside [0, n/4]^d");
        }
    }

    FieldMomentReport r;
    r.sites = box.size();
    const double N = static_cast<double>(r.sites);
    r.mean = compensated_sum(field.values) / N;
    CompensatedSum ss;
    for (double v : field.values) ss += (v - r.mean) * (v - r.mean);
    r.variance = ss.value() / N;

    const std::int64_t M = std::max<std::int64_t>(field.provenance.truncation_radius, 1);
    const double table_cost = std::pow(2.0 * static_cast<double>(M) - 1.0, d) * std::pow(static_cast<double>(M), d);
    std::unique_ptr<CovarianceTable> cov;
    if (table_cost <= 2e8) cov = std::make_unique<CovarianceTable>(model.dense(M), d, M);

    if (cov) {
        CompensatedSum s;
        for (std::size_t off = 0; off < cov->box().size(); ++off) {
            MultiIndex j = cov->box().index(off);
            for (auto& v : j) v -= M - 1;
            s += (*cov)(j);
        }
        r.mean_standard_error = std::sqrt(std::max(s.value(), 0.0) / N);
    } else {
        r.mean_standard_error = std::numeric_limits<double>::quiet_NaN();
    }

    for (const auto& h : lags) {
        LagMoment lm;
        lm.lag = h;
        CompensatedSum acc;
        std::size_t pairs = 0;
        MultiIndex j(static_cast<std::size_t>(d));
        for (std::size_t off = 0; off < box.size(); ++off) {
            const auto i = box.index(off);
            bool inside = true;
            for (std::size_t t = 0; t < i.size(); ++t) {
                j[t] = i[t] + h[t];
                inside = inside && j[t] < n;
            }
            if (!inside) continue;
            acc += (field.values[off] - r.mean) * (field.values[box.offset(j)] - r.mean);
            ++pairs;
        }
        lm.sample = pairs > 0 ? acc.value() / static_cast<double>(pairs) : 0.0;
        lm.oracle = autocovariance(model, h).value;
        lm.oracle_truncated = truncated_autocovariance(model, h, M);
        if (cov && pairs > 0) {
            // Bartlett: Var ~ (1/N_h) sum_j [g(j)^2 + g(j+h) g(j-h)]
            CompensatedSum b;
            const std::int64_t R = M - 1;
            const Box jbox(d, 2 * R + 1);
            MultiIndex jp(static_cast<std::size_t>(d)), jm(static_cast<std::size_t>(d));
            for (std::size_t off = 0; off < jbox.size(); ++off) {
                MultiIndex jj = jbox.index(off);
                for (std::size_t t = 0; t < jj.size(); ++t) {
                    jj[t] -= R;
                    jp[t] = jj[t] + h[t];
                    jm[t] = jj[t] - h[t];
                }
                const double g = (*cov)(jj);
                b += g * g + (*cov)(jp) * (*cov)(jm);
            }
            // the g(j+h) g(j-h) products with j outside the table vanish
            lm.standard_error = std::sqrt(std::max(b.value(), 0.0) / static_cast<double>(pairs));
            lm.z = lm.standard_error > 0 ? (lm.sample - lm.oracle_truncated) / lm.standard_error : 0.0;
        } else {
            lm.standard_error = std::numeric_limits<double>::quiet_NaN();
            lm.z = std::numeric_limits<double>::quiet_NaN();
        }
        r.lags.push_back(std::move(lm));
    }
    return r;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'K', 'D', 'L', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        out.write(bytes.data(), sizeof(T));
    } else {
        out.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
}

template <typename T>
T get(std::istream& in) {
    std::array<char, sizeof(T)> bytes{};
    if (!in.read(bytes.data(), sizeof(T))) throw std::runtime_error("truncated field file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
}

}  // namespace

void write_field_binary(const LatticeField& field, std::ostream& out) {
    const std::string prov = field.provenance.to_json().dump();
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(field.dim));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(field.side));
    put<std::uint64_t>(out, prov.size());
    out.write(prov.data(), static_cast<std::streamsize>(prov.size()));
    for (double v : field.values) put<double>(out, v);
    if (!out) throw std::runtime_error("failed to write field");
}

LatticeField read_field_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("not a field file");
    const auto version = get<std::uint32_t>(in);
    if (version != kVersion) throw std::runtime_error("unsupported field file version " + std::to_string(version));
    LatticeField f;
    f.dim = static_cast<int>(get<std::uint32_t>(in));
    f.side = static_cast<std::int64_t>(get<std::uint64_t>(in));
    const auto len = get<std::uint64_t>(in);
    std::string prov(len, '\0');
    if (!in.read(prov.data(), static_cast<std::streamsize>(len))) throw std::runtime_error("truncated field file");
    f.provenance = FieldProvenance::from_json(nlohmann::json::parse(prov));
    f.values.resize(checked_power(f.side, f.dim));
    for (auto& v : f.values) v = get<double>(in);
    return f;
}

void write_field_csv(const LatticeField& field, std::ostream& out) {
    if (field.side > 64) throw std::invalid_argument("CSV export is limited to side <= 64");
    for (int t = 0; t < field.dim; ++t) out << "i_" << (t + 1) << ',';
    out << "value\n";
    const Box box(field.dim, field.side);
    char buf[32];
    for (std::size_t off = 0; off < box.size(); ++off) {
        for (auto v : box.index(off)) out << (v + 1) << ',';
        std::snprintf(buf, sizeof buf, "%.17g", field.values[off]);
        out << buf << '\n';
    }
}

}  // namespace kdelab
