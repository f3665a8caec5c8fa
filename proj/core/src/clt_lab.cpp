#include "kdelab/clt_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kdelab/parallel.hpp"

namespace kdelab {

std::string to_string(Centering c) {
    return c == Centering::Oracle ? "oracle" : "pooled";
}

Centering centering_from_string(const std::string& s) {
    if (s == "oracle") return Centering::Oracle;
    if (s == "pooled") return Centering::Pooled;
    throw std::invalid_argument("unknown centering '" + s + "' (expected oracle or pooled)");
}

// ---------------------------------------------------------------------------
// Config

std::int64_t ExperimentConfig::m_at(std::int64_t n) const {
    if (m_fixed) return *m_fixed;
    if (delta) return m_schedule(n, *delta);
    if (model.has_finite_support()) return std::max<std::int64_t>(model.support_side(), 1);
    if (model.beta()) {
        const auto cor = check_corollary1(dim(), *model.beta(), bandwidth.gamma());
        if (cor.delta_star) return m_schedule(n, *cor.delta_star);
        throw std::invalid_argument("no m schedule: the declared beta admits no delta window for this bandwidth; set m or delta");
    }
    throw std::invalid_argument("no m schedule: set m or delta");
}

TruncationPlan ExperimentConfig::plan_at(std::int64_t n) const {
    const std::int64_t m = m_at(n);
    if (truncation.policy == TruncationPolicy::Fixed) {
        return TruncationPlan::fixed(model, std::max(truncation.radius, m));
    }
    return TruncationPlan::bandwidth_relative(model, bandwidth_at(n), m, truncation.eta);
}

std::vector<double> ExperimentConfig::resolved_x() const {
    if (!x_in_sd_units) return x_points;
    const double sd = std::sqrt(TailCalculator(model).total_sq() * innovations.variance());
    std::vector<double> out;
    for (double x : x_points) out.push_back(x * sd);
    return out;
}

GenerationOptions ExperimentConfig::generation_options() const {
    GenerationOptions o;
    o.method = method;
    o.memory_cap_bytes = memory_cap_bytes;
    return o;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& msg) {
        throw std::invalid_argument(field + ": " + msg);
    };
    if (n_grid.empty()) fail("n_grid", "must not be empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 1) fail("n_grid", "entries must be >= 1");
        if (i > 0 && n_grid[i] <= n_grid[i - 1]) fail("n_grid", "must be strictly increasing");
    }
    if (x_points.empty()) fail("x", "must not be empty");
    try {
        bandwidth.validate_for_dimension(dim());
    } catch (const std::exception& e) {
        fail("bandwidth", e.what());
    }
    if (replicates < 1) fail("replicates", "must be >= 1");
    if (m_fixed && *m_fixed < 1) fail("m", "must be >= 1");
    if (delta && !(*delta > 0.0 && *delta < 1.0)) fail("delta", "must lie in (0, 1)");
    if (!(variance_band > 0.0)) fail("variance_band", "must be positive");
    if (truncation.policy == TruncationPolicy::BandwidthRelative && !(truncation.eta > 0.0)) {
        fail("truncation.eta", "must be positive");
    }
    if (truncation.radius < 0) fail("truncation.radius", "must be >= 0");
    if (centering == Centering::Oracle && innovations.kind() != InnovationKind::Gaussian) {
        fail("centering", "oracle centering needs gaussian innovations; use \"pooled\"");
    }
    try {
        (void)m_at(n_grid.front());
    } catch (const std::exception& e) {
        fail("m", e.what());
    }
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j{{"model", model.to_json()},
                     {"innovations", innovations.to_json()},
                     {"kernel", kernel.name()},
                     {"bandwidth", bandwidth.to_json()},
                     {"n_grid", n_grid},
                     {"x", x_points},
                     {"x_units", x_in_sd_units ? "sd" : "absolute"},
                     {"truncation",
                      {{"policy", to_string(truncation.policy)}, {"radius", truncation.radius}, {"eta", truncation.eta}}},
                     {"replicates", replicates},
                     {"seed", master_seed},
                     {"centering", to_string(centering)},
                     {"variance_band", variance_band},
                     {"convolution", to_string(method)},
                     {"memory_cap_mb", static_cast<double>(memory_cap_bytes) / (1 << 20)}};
    j["m"] = m_fixed ? nlohmann::json(*m_fixed) : nlohmann::json(nullptr);
    j["delta"] = delta ? nlohmann::json(*delta) : nlohmann::json(nullptr);
    return j;
}

namespace {

template <typename F>
auto field_guard(const std::string& field, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw std::invalid_argument(field + ": " + e.what());
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
    static const std::vector<std::string> known{"model", "innovations", "kernel", "bandwidth", "n_grid",
                                                "x", "x_units", "m", "delta", "truncation", "replicates",
                                                "seed", "threads", "centering", "variance_band",
                                                "convolution", "memory_cap_mb"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw std::invalid_argument(key + ": unknown experiment setting");
        }
    }
    ExperimentConfig c;
    if (j.contains("model")) c.model = field_guard("model", [&] { return CoefficientModel::from_json(j.at("model")); });
    if (j.contains("innovations")) {
        c.innovations = field_guard("innovations", [&] { return InnovationModel::from_json(j.at("innovations")); });
    }
    if (j.contains("kernel")) {
        c.kernel = field_guard("kernel", [&] { return KernelModel::from_name(j.at("kernel").get<std::string>()); });
    }
    if (j.contains("bandwidth")) {
        c.bandwidth = field_guard("bandwidth", [&] { return BandwidthSchedule::from_json(j.at("bandwidth")); });
    }
    if (j.contains("n_grid")) {
        c.n_grid = field_guard("n_grid", [&] {
            const auto& g = j.at("n_grid");
            return g.is_array() ? g.get<std::vector<std::int64_t>>() : std::vector<std::int64_t>{g.get<std::int64_t>()};
        });
    }
    if (j.contains("x")) {
        c.x_points = field_guard("x", [&] {
            const auto& g = j.at("x");
            return g.is_array() ? g.get<std::vector<double>>() : std::vector<double>{g.get<double>()};
        });
    }
    if (j.contains("x_units")) {
        const auto units = field_guard("x_units", [&] { return j.at("x_units").get<std::string>(); });
        if (units != "sd" && units != "absolute") throw std::invalid_argument("x_units: expected \"sd\" or \"absolute\"");
        c.x_in_sd_units = units == "sd";
    }
    if (j.contains("m") && !j.at("m").is_null()) c.m_fixed = field_guard("m", [&] { return j.at("m").get<std::int64_t>(); });
    if (j.contains("delta") && !j.at("delta").is_null()) {
        c.delta = field_guard("delta", [&] { return j.at("delta").get<double>(); });
    }
    if (j.contains("truncation")) {
        const auto& t = j.at("truncation");
        field_guard("truncation", [&] {
            if (t.contains("policy")) c.truncation.policy = truncation_policy_from_string(t.at("policy").get<std::string>());
            if (t.contains("radius")) c.truncation.radius = t.at("radius").get<std::int64_t>();
            if (t.contains("eta")) c.truncation.eta = t.at("eta").get<double>();
            return 0;
        });
    }
    if (j.contains("replicates")) c.replicates = field_guard("replicates", [&] { return j.at("replicates").get<std::int64_t>(); });
    if (j.contains("seed")) c.master_seed = field_guard("seed", [&] { return j.at("seed").get<std::uint64_t>(); });
    if (j.contains("threads")) c.threads = field_guard("threads", [&] { return j.at("threads").get<int>(); });
    if (j.contains("centering")) {
        c.centering = field_guard("centering", [&] { return centering_from_string(j.at("centering").get<std::string>()); });
    }
    if (j.contains("variance_band")) {
        c.variance_band = field_guard("variance_band", [&] { return j.at("variance_band").get<double>(); });
    }
    if (j.contains("convolution")) {
        c.method = field_guard("convolution",
                               [&] { return convolution_method_from_string(j.at("convolution").get<std::string>()); });
    }
    if (j.contains("memory_cap_mb")) {
        const double mb = field_guard("memory_cap_mb", [&] { return j.at("memory_cap_mb").get<double>(); });
        if (!(mb > 0.0)) throw std::invalid_argument("memory_cap_mb: must be positive");
        c.memory_cap_bytes = static_cast<std::size_t>(mb * (1 << 20));
    }
    return c;
}

// ---------------------------------------------------------------------------
// Statistic

CenteringTerms oracle_centering(const InnovationModel& innovations, const KernelModel& kernel, double b, double x,
                                double full_variance, double truncated_variance) {
    if (innovations.kind() != InnovationKind::Gaussian) {
        throw std::logic_error("oracle centering needs gaussian innovations; use pooled centering");
    }
    const double sb = std::sqrt(b);
    return {sb * smoothed_normal_moment(kernel, b, x, full_variance),
            sb * smoothed_normal_moment(kernel, b, x, truncated_variance)};
}

SiteSums site_sums(std::span<const double> full, std::span<const double> truncated, double x, double b,
                   const KernelModel& kernel) {
    if (full.size() != truncated.size()) throw std::invalid_argument("site_sums: field sizes differ");
    const double inv_b = 1.0 / b;
    const double scale = 1.0 / std::sqrt(b);
    CompensatedSum z, zeta, diff;
    for (std::size_t i = 0; i < full.size(); ++i) {
        const double zi = kernel((x - full[i]) * inv_b) * scale;
        const double ki = kernel((x - truncated[i]) * inv_b) * scale;
        z += zi;
        zeta += ki;
        diff += zi - ki;
    }
    return {z.value(), zeta.value(), diff.value(), full.size()};
}

StatisticTriple normalized_statistic(const SiteSums& s, const CenteringTerms& c) {
    const double N = static_cast<double>(s.sites);
    const double root = std::sqrt(N);
    StatisticTriple t;
    t.t_n = (s.z - N * c.ez) / root;
    t.t_zeta = (s.zeta - N * c.ezeta) / root;
    t.t_remainder = (s.diff - N * (c.ez - c.ezeta)) / root;
    t.identity_error = std::fabs(t.t_n - t.t_zeta - t.t_remainder);
    return t;
}

StatisticTriple normalized_statistic(const CoupledFields& fields, double x, const KernelModel& kernel, double b,
                                     const CenteringTerms& centering) {
    if (!(b > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    return normalized_statistic(site_sums(fields.full.values, fields.truncated.values, x, b, kernel), centering);
}

// ---------------------------------------------------------------------------
// KS

KsResult ks_normality_test(std::span<const double> samples, double sigma2) {
    if (samples.empty()) throw std::invalid_argument("ks_normality_test: empty sample");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("ks_normality_test: sigma2 must be positive");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double R = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double F = normal_cdf(s[i], sigma2);
        d = std::max({d, static_cast<double>(i + 1) / R - F, F - static_cast<double>(i) / R});
    }
    KsResult r;
    r.distance = d;
    r.samples = s.size();
    r.enough_samples = s.size() >= 100;
    r.critical_05 = 1.358 / std::sqrt(R);
    r.critical_01 = 1.628 / std::sqrt(R);
    const double lambda = (std::sqrt(R) + 0.12 + 0.11 / std::sqrt(R)) * d;
    if (lambda < 0.2) {
        r.p_value = 1.0;
    } else {
        double q = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double term = std::exp(-2.0 * k * k * lambda * lambda);
            q += (k % 2 == 1 ? 2.0 : -2.0) * term;
            if (term < 1e-16) break;
        }
        r.p_value = std::clamp(q, 0.0, 1.0);
    }
    return r;
}

// ---------------------------------------------------------------------------
// CLT experiment

namespace {

std::string condition1_status(const InnovationModel& innovations) {
    if (innovations.kind() == InnovationKind::Gaussian) return "exact (gaussian)";
    return innovations.lipschitz_density() ? "certified (lipschitz innovation density)" : "not certified";
}

Verdict combine(const std::vector<Verdict>& vs) {
    if (vs.empty()) return Verdict::Inconclusive;
    if (std::any_of(vs.begin(), vs.end(), [](Verdict v) { return v == Verdict::Fail; })) return Verdict::Fail;
    if (std::any_of(vs.begin(), vs.end(), [](Verdict v) { return v == Verdict::Inconclusive; })) {
        return Verdict::Inconclusive;
    }
    return Verdict::Pass;
}

double mean_in_order(const std::vector<double>& v) {
    return v.empty() ? 0.0 : compensated_sum(v) / static_cast<double>(v.size());
}

nlohmann::json moments_json(const SampleMoments& m) {
    return {{"count", m.count},
            {"mean", m.mean},
            {"variance", m.variance},
            {"skewness", m.skewness},
            {"excess_kurtosis", m.excess_kurtosis}};
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) return false;
    }
    return v.size() >= 2;
}

}  // namespace

nlohmann::json CltReport::to_json(bool include_replicates) const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) {
        nlohmann::json j{{"n", p.n},
                         {"m", p.m},
                         {"truncation_radius", p.radius},
                         {"tail_bound", p.tail_bound},
                         {"b", p.b},
                         {"x", p.x},
                         {"px", p.px},
                         {"sigma2", p.sigma2},
                         {"site_variance", p.site_variance},
                         {"centering", {{"ez", p.centering.ez}, {"ezeta", p.centering.ezeta}}},
                         {"moments", moments_json(p.moments)},
                         {"zeta_moments", moments_json(p.zeta_moments)},
                         {"variance_ratio", p.sigma2 > 0 ? p.moments.variance / p.sigma2 : 0.0},
                         {"remainder_second_moment", p.remainder_second_moment},
                         {"remainder_variance", p.remainder_variance},
                         {"max_identity_error", p.max_identity_error},
                         {"nonfinite", p.nonfinite},
                         {"ks",
                          {{"distance", p.ks.distance},
                           {"critical_05", p.ks.critical_05},
                           {"critical_01", p.ks.critical_01},
                           {"p_value", p.ks.p_value}}},
                         {"mean_threshold", p.mean_threshold},
                         {"mean_ok", p.mean_ok},
                         {"variance_ok", p.variance_ok},
                         {"ks_ok", p.ks_ok},
                         {"verdict", to_string(p.verdict)},
                         {"label", p.label}};
        if (include_replicates) {
            j["t_n"] = p.t_n;
            j["t_zeta"] = p.t_zeta;
            j["t_remainder"] = p.t_remainder;
        }
        pts.push_back(std::move(j));
    }
    nlohmann::json trend = nlohmann::json::array();
    for (const auto& [x, v] : remainder_trend) {
        trend.push_back({{"x", x}, {"remainder_variance", v}, {"strictly_decreasing", strictly_decreasing(v)}});
    }
    nlohmann::json j{{"config", config},
                     {"condition1_status", condition1_status},
                     {"points", pts},
                     {"remainder_trend", trend},
                     {"verdict", to_string(verdict)},
                     {"notes", notes}};
    j["corollary1"] = corollary1 ? corollary1->to_json() : nlohmann::json(nullptr);
    return j;
}

CltReport run_clt_experiment(const ExperimentConfig& config) {
    config.validate();
    CltReport report;
    report.config = config.to_json();
    report.condition1_status = condition1_status(config.innovations);
    if (config.model.beta()) report.corollary1 = check_corollary1(config.dim(), *config.model.beta(), config.bandwidth.gamma());
    if (report.corollary1 && report.corollary1->verdict != Verdict::Pass) {
        report.notes.push_back("coefficient/bandwidth regime outside the admissible window (check_corollary1 fails); results are labeled, not extrapolated");
    }
    if (config.centering == Centering::Pooled) {
        report.notes.push_back("pooled centering: E f_n(x) estimated by the mean over replicates, which induces O(1/sqrt(R)) correlation between replicates; p(x) is estimated the same way");
    }
    const auto xs = config.resolved_x();
    const double v_true = TailCalculator(config.model).total_sq() * config.innovations.variance();
    const auto R = static_cast<std::size_t>(config.replicates);
    const int d = config.dim();
    std::vector<Verdict> verdicts;

    for (const std::int64_t n : config.n_grid) {
        const std::int64_t m = config.m_at(n);
        const auto plan = config.plan_at(n);
        const double b = config.bandwidth_at(n);
        const FieldGenerator gen(config.model, config.innovations, n, m, plan, config.generation_options());
        const std::size_t N = checked_power(n, d);

        std::vector<std::vector<SiteSums>> sums(xs.size(), std::vector<SiteSums>(R));
        parallel_for(R, config.threads, [&](std::size_t r) {
            std::vector<double> full(N), trunc(N);
            gen.generate_into({config.master_seed, static_cast<std::uint64_t>(n), r}, full, trunc);
            for (std::size_t xi = 0; xi < xs.size(); ++xi) sums[xi][r] = site_sums(full, trunc, xs[xi], b, config.kernel);
        });

        for (std::size_t xi = 0; xi < xs.size(); ++xi) {
            CltPoint p;
            p.n = n;
            p.m = m;
            p.radius = plan.radius;
            p.tail_bound = plan.tail_bound;
            p.b = b;
            p.x = xs[xi];
            if (config.centering == Centering::Oracle) {
                p.centering = oracle_centering(config.innovations, config.kernel, b, p.x, gen.full_variance(),
                                               gen.truncated_variance());
                p.px = normal_pdf(p.x, v_true);
                const double ef = smoothed_normal_moment(config.kernel, b, p.x, gen.full_variance());
                p.site_variance = smoothed_normal_moment(config.kernel, b, p.x, gen.full_variance(), 2) - b * ef * ef;
            } else {
                std::vector<double> zm(R), km(R);
                for (std::size_t r = 0; r < R; ++r) {
                    zm[r] = sums[xi][r].z / static_cast<double>(N);
                    km[r] = sums[xi][r].zeta / static_cast<double>(N);
                }
                p.centering = {mean_in_order(zm), mean_in_order(km)};
                p.px = p.centering.ez / std::sqrt(b);
                p.site_variance = std::numeric_limits<double>::quiet_NaN();
            }
            p.sigma2 = asymptotic_variance(p.px, config.kernel);
            p.t_n.resize(R);
            p.t_zeta.resize(R);
            p.t_remainder.resize(R);
            for (std::size_t r = 0; r < R; ++r) {
                const auto t = normalized_statistic(sums[xi][r], p.centering);
                p.t_n[r] = t.t_n;
                p.t_zeta[r] = t.t_zeta;
                p.t_remainder[r] = t.t_remainder;
                p.max_identity_error = std::max(p.max_identity_error, t.identity_error);
                if (!std::isfinite(t.t_n) || !std::isfinite(t.t_zeta) || !std::isfinite(t.t_remainder)) ++p.nonfinite;
            }
            p.moments = sample_moments(p.t_n);
            p.zeta_moments = sample_moments(p.t_zeta);
            std::vector<double> sq(R);
            for (std::size_t r = 0; r < R; ++r) sq[r] = p.t_remainder[r] * p.t_remainder[r];
            p.remainder_second_moment = mean_in_order(sq);
            p.remainder_variance = sample_moments(p.t_remainder).variance;
            p.ks = ks_normality_test(p.t_n, p.sigma2 > 0 ? p.sigma2 : 1e-300);

            p.mean_threshold = 3.0 * std::sqrt(p.sigma2 / static_cast<double>(R));
            p.mean_ok = std::fabs(p.moments.mean) <= p.mean_threshold;
            p.variance_ok = std::fabs(p.moments.variance / p.sigma2 - 1.0) <= config.variance_band;
            p.ks_ok = p.ks.distance < p.ks.critical_01;
            if (p.nonfinite > 0) {
                p.verdict = Verdict::Fail;
                p.label = "non-finite replicates";
            } else if (R < 100) {
                p.verdict = Verdict::Inconclusive;
                p.label = "inconclusive (fewer than 100 replicates)";
            } else if (p.mean_ok && p.variance_ok && p.ks_ok) {
                p.verdict = Verdict::Pass;
                p.label = "consistent with asymptotic normality";
            } else {
                p.verdict = Verdict::Fail;
                std::string why;
                if (!p.mean_ok) why += " mean";
                if (!p.variance_ok) why += " variance";
                if (!p.ks_ok) why += " ks";
                p.label = "inconsistent:" + why;
            }
            verdicts.push_back(p.verdict);
            report.remainder_trend[p.x].push_back(p.remainder_variance);
            report.points.push_back(std::move(p));
        }
    }
    report.verdict = combine(verdicts);
    return report;
}

// ---------------------------------------------------------------------------
// Blocks

BlockPlan BlockPlan::make(std::int64_t n, std::int64_t m, std::optional<std::int64_t> block_side,
                          std::optional<std::int64_t> gap) {
    if (n < 1 || m < 1) throw std::invalid_argument("block plan: n and m must be >= 1");
    BlockPlan p;
    p.m = m;
    p.block_side = block_side ? *block_side
                              : m * static_cast<std::int64_t>(std::ceil(std::log(static_cast<double>(n))));
    p.gap = gap ? *gap : m;
    if (p.block_side <= m) {
        throw std::invalid_argument("block plan: block side " + std::to_string(p.block_side) + " must exceed m=" +
                                    std::to_string(m));
    }
    if (p.gap < m - 1) {
        throw std::invalid_argument("block plan: gap " + std::to_string(p.gap) + " < m-1 breaks block independence");
    }
    if (p.block_side > n) throw std::invalid_argument("block plan: block side exceeds n");
    p.blocks_per_axis = n / (p.block_side + p.gap);
    if (p.blocks_per_axis < 1) {
        // a single block with its trailing gap cut off still fits
        p.blocks_per_axis = 1;
    }
    return p;
}

nlohmann::json BlockPlan::to_json() const {
    return {{"block_side", block_side}, {"gap", gap}, {"blocks_per_axis", blocks_per_axis}, {"m", m}};
}

nlohmann::json BlockReport::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) {
        std::vector<int> trivial(p.lf2_trivially_zero.begin(), p.lf2_trivially_zero.end());
        pts.push_back({{"n", p.n},
                       {"plan", p.plan.to_json()},
                       {"b", p.b},
                       {"blocks", p.blocks},
                       {"covered_fraction", p.covered_fraction},
                       {"rate_proxy", p.rate_proxy},
                       {"gap_mean", p.gap_mean},
                       {"gap_variance", p.gap_variance},
                       {"adjacent_correlation", p.adjacent_correlation},
                       {"correlation_threshold", p.correlation_threshold},
                       {"adjacent_pairs", p.adjacent_pairs},
                       {"lag1_correlation", p.lag1_correlation},
                       {"lagm_correlation", p.lagm_correlation},
                       {"lf1", p.lf1},
                       {"lf1_target", p.lf1_target},
                       {"sigma2", p.sigma2},
                       {"lf2", p.lf2},
                       {"lf2_trivially_zero", trivial}});
    }
    std::vector<int> dec(lf2_decreasing.begin(), lf2_decreasing.end());
    return {{"config", config},
            {"x", x},
            {"epsilons", epsilons},
            {"points", pts},
            {"gap_variance_decreasing", gap_variance_decreasing},
            {"correlations_ok", correlations_ok},
            {"verdict", to_string(verdict)},
            {"lf2_decreasing", dec},
            {"lindeberg_verdict", to_string(lindeberg_verdict)}};
}

namespace {

// E zeta for the m-truncated field: exact when gaussian, else the pooled
// mean of a first pass over the same replicates.
double truncated_centering(const ExperimentConfig& config, const FieldGenerator& gen, double b, double x) {
    if (config.innovations.kind() == InnovationKind::Gaussian) {
        return std::sqrt(b) * smoothed_normal_moment(config.kernel, b, x, gen.truncated_variance());
    }
    const auto R = static_cast<std::size_t>(config.replicates);
    const std::size_t N = checked_power(gen.side(), gen.dim());
    std::vector<double> means(R);
    parallel_for(R, config.threads, [&](std::size_t r) {
        std::vector<double> full(N), trunc(N);
        gen.generate_into({config.master_seed, static_cast<std::uint64_t>(gen.side()), r}, full, trunc);
        means[r] = site_sums(trunc, trunc, x, b, config.kernel).zeta / static_cast<double>(N);
    });
    return mean_in_order(means);
}

struct BlockReplicate {
    double delta = 0.0;
    std::vector<double> eta;
    double lag1_xy = 0.0, lag1_xx = 0.0, lag1_yy = 0.0;
    double lagm_xy = 0.0, lagm_xx = 0.0, lagm_yy = 0.0;
};

}  // namespace

BlockReport block_decomposition_check(const ExperimentConfig& config, const BlockPlanSpec& spec,
                                      std::span<const double> epsilons) {
    config.validate();
    BlockReport rep;
    rep.config = config.to_json();
    rep.epsilons.assign(epsilons.begin(), epsilons.end());
    rep.x = config.resolved_x().front();
    const int d = config.dim();
    const auto R = static_cast<std::size_t>(config.replicates);
    const double v_true = TailCalculator(config.model).total_sq() * config.innovations.variance();

    for (const std::int64_t n : config.n_grid) {
        BlockPoint pt;
        pt.n = n;
        const std::int64_t m = config.m_at(n);
        pt.plan = spec.resolve(n, m);
        pt.b = config.bandwidth_at(n);
        // radius m: X = X_m exactly
        const FieldGenerator gen(config.model, config.innovations, n, m, TruncationPlan::fixed(config.model, m),
                                 config.generation_options());
        const double ezeta = truncated_centering(config, gen, pt.b, rep.x);
        const std::size_t N = checked_power(n, d);
        const Box box(d, n);
        const auto& plan = pt.plan;
        const Box blocks_box(d, plan.blocks_per_axis);
        pt.blocks = blocks_box.size();
        const double scale = 1.0 / std::sqrt(pt.b);
        const double root_n = std::sqrt(static_cast<double>(N));
        const auto mstep = static_cast<std::size_t>(m);
        const auto stride0 = static_cast<std::size_t>(N / static_cast<std::size_t>(n));  // first-axis stride

        std::vector<BlockReplicate> reps(R);
        parallel_for(R, config.threads, [&](std::size_t r) {
            std::vector<double> full(N), y(N);
            gen.generate_into({config.master_seed, static_cast<std::uint64_t>(n), r}, full, y);
            for (auto& v : y) v = config.kernel((rep.x - v) / pt.b) * scale - ezeta;
            auto& out = reps[r];
            CompensatedSum total;
            for (double v : y) total += v;
            out.eta.assign(blocks_box.size(), 0.0);
            CompensatedSum eta_total;
            MultiIndex site(static_cast<std::size_t>(d));
            for (std::size_t bo = 0; bo < blocks_box.size(); ++bo) {
                const auto bk = blocks_box.index(bo);
                MultiIndex lo(static_cast<std::size_t>(d));
                for (std::size_t t = 0; t < lo.size(); ++t) lo[t] = bk[t] * (plan.block_side + plan.gap);
                const Box inner(d, plan.block_side);
                CompensatedSum s;
                for (std::size_t io = 0; io < inner.size(); ++io) {
                    const auto off = inner.index(io);
                    for (std::size_t t = 0; t < site.size(); ++t) site[t] = lo[t] + off[t];
                    s += y[box.offset(site)];
                }
                out.eta[bo] = s.value();
                eta_total += s.value();
            }
            out.delta = (total.value() - eta_total.value()) / root_n;
            // lagged products along the first axis
            CompensatedSum a1, b1, c1, am, bm, cm;
            for (std::size_t i = 0; i + stride0 < N; ++i) {
                a1 += y[i] * y[i + stride0];
                b1 += y[i] * y[i];
                c1 += y[i + stride0] * y[i + stride0];
            }
            if (mstep < static_cast<std::size_t>(n)) {
                const std::size_t shift = mstep * stride0;
                for (std::size_t i = 0; i + shift < N; ++i) {
                    am += y[i] * y[i + shift];
                    bm += y[i] * y[i];
                    cm += y[i + shift] * y[i + shift];
                }
            }
            out.lag1_xy = a1.value();
            out.lag1_xx = b1.value();
            out.lag1_yy = c1.value();
            out.lagm_xy = am.value();
            out.lagm_xx = bm.value();
            out.lagm_yy = cm.value();
        });

        std::vector<double> deltas(R);
        std::vector<double> left, right, xi2;
        CompensatedSum l1xy, l1xx, l1yy, lmxy, lmxx, lmyy;
        const double ld = std::pow(static_cast<double>(plan.block_side), d);
        std::vector<CompensatedSum> lf2(epsilons.size());
        CompensatedSum lf1;
        for (std::size_t r = 0; r < R; ++r) {
            const auto& br = reps[r];
            deltas[r] = br.delta;
            l1xy += br.lag1_xy;
            l1xx += br.lag1_xx;
            l1yy += br.lag1_yy;
            lmxy += br.lagm_xy;
            lmxx += br.lagm_xx;
            lmyy += br.lagm_yy;
            for (std::size_t bo = 0; bo < br.eta.size(); ++bo) {
                const double e = br.eta[bo];
                lf1 += e * e;
                for (std::size_t k = 0; k < epsilons.size(); ++k) {
                    if (std::fabs(e) > root_n * epsilons[k]) lf2[k] += e * e;
                }
                const auto bk = blocks_box.index(bo);
                if (bk[0] + 1 < plan.blocks_per_axis) {
                    auto nb = bk;
                    nb[0] += 1;
                    left.push_back(e);
                    right.push_back(br.eta[blocks_box.offset(nb)]);
                }
            }
        }
        const double count = static_cast<double>(R * blocks_box.size());
        const auto dm = sample_moments(deltas);
        pt.gap_mean = dm.mean;
        pt.gap_variance = dm.variance;
        pt.covered_fraction = std::pow(static_cast<double>(plan.blocks_per_axis * plan.block_side) / static_cast<double>(n), d);
        pt.rate_proxy = static_cast<double>(m) / static_cast<double>(plan.block_side + m);
        pt.adjacent_pairs = left.size();
        pt.adjacent_correlation = left.size() >= 2 ? sample_correlation(left, right) : 0.0;
        pt.correlation_threshold = 4.0 / std::sqrt(count);
        pt.lag1_correlation = l1xy.value() / std::sqrt(l1xx.value() * l1yy.value());
        pt.lagm_correlation = lmxx.value() > 0 ? lmxy.value() / std::sqrt(lmxx.value() * lmyy.value()) : 0.0;
        pt.lf1 = lf1.value() / count / ld;
        pt.sigma2 = asymptotic_variance(normal_pdf(rep.x, v_true), config.kernel);
        pt.lf1_target = asymptotic_variance(normal_pdf(rep.x, gen.truncated_variance()), config.kernel);
        const double as_bound = config.kernel.sup() * ld / std::sqrt(pt.b);
        for (std::size_t k = 0; k < epsilons.size(); ++k) {
            pt.lf2.push_back(lf2[k].value() / count / ld);
            pt.lf2_trivially_zero.push_back(root_n * epsilons[k] >= as_bound);
        }
        rep.points.push_back(std::move(pt));
    }

    std::vector<double> gv;
    for (const auto& p : rep.points) gv.push_back(p.gap_variance);
    rep.gap_variance_decreasing = strictly_decreasing(gv);
    rep.correlations_ok = std::all_of(rep.points.begin(), rep.points.end(), [](const BlockPoint& p) {
        return p.adjacent_pairs < 2 || std::fabs(p.adjacent_correlation) <= p.correlation_threshold;
    });
    const bool single_n = rep.points.size() < 2;
    if (single_n) {
        rep.verdict = Verdict::Inconclusive;
    } else {
        rep.verdict = rep.gap_variance_decreasing && rep.correlations_ok ? Verdict::Pass : Verdict::Fail;
    }
    // Lindeberg trend: nonincreasing, and the last value either exactly zero
    // or below the first.
    for (std::size_t k = 0; k < rep.epsilons.size(); ++k) {
        bool ok = !single_n;
        for (std::size_t i = 1; i < rep.points.size(); ++i) ok = ok && rep.points[i].lf2[k] <= rep.points[i - 1].lf2[k];
        if (ok) {
            const double first = rep.points.front().lf2[k], last = rep.points.back().lf2[k];
            ok = last == 0.0 || last < first;
        }
        rep.lf2_decreasing.push_back(ok);
    }
    if (single_n || rep.epsilons.empty()) {
        rep.lindeberg_verdict = Verdict::Inconclusive;
    } else {
        rep.lindeberg_verdict = std::all_of(rep.lf2_decreasing.begin(), rep.lf2_decreasing.end(), [](bool b) { return b; })
                                    ? Verdict::Pass
                                    : Verdict::Fail;
    }
    return rep;
}

BlockReport lindeberg_estimate(const ExperimentConfig& config, const BlockPlanSpec& plan,
                               std::span<const double> epsilons) {
    if (epsilons.empty()) throw std::invalid_argument("lindeberg_estimate: no epsilon values");
    for (double e : epsilons) {
        if (!(e > 0.0)) throw std::invalid_argument("lindeberg_estimate: epsilon must be positive");
    }
    return block_decomposition_check(config, plan, epsilons);
}

// ---------------------------------------------------------------------------
// Rectangles

nlohmann::json RectangleReport::to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows) {
        rs.push_back({{"n", r.n},
                      {"sides", r.sides},
                      {"zeta_norm", r.zeta_norm},
                      {"remainder_norm", r.remainder_norm},
                      {"remainder_constant", r.remainder_constant}});
    }
    nlohmann::json site = nlohmann::json::object(), dn = nlohmann::json::object();
    for (const auto& [n, v] : site_remainder_norm) site[std::to_string(n)] = v;
    for (const auto& [n, v] : delta_n) dn[std::to_string(n)] = v;
    return {{"config", config},
            {"x", x},
            {"rows", rs},
            {"site_remainder_norm", site},
            {"delta_n", dn},
            {"zeta_ratio", zeta_ratio},
            {"zeta_constant", zeta_constant},
            {"remainder_ratio", remainder_ratio},
            {"remainder_constant", remainder_constant},
            {"ratio_cap", ratio_cap},
            {"verdict", to_string(verdict)}};
}

namespace {

// Inclusive prefix sums along every axis, in place.
void prefix_sums(std::vector<double>& a, int dim, std::int64_t n) {
    std::size_t stride = 1;
    const auto side = static_cast<std::size_t>(n);
    for (int axis = dim - 1; axis >= 0; --axis) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if ((i / stride) % side != 0) a[i] += a[i - stride];
        }
        stride *= side;
    }
}

}  // namespace

RectangleReport rectangle_moment_check(const ExperimentConfig& config, std::span<const MultiIndex> rectangles,
                                       double ratio_cap) {
    config.validate();
    if (rectangles.empty()) throw std::invalid_argument("rectangle_moment_check: no rectangles");
    const int d = config.dim();
    for (const auto& j : rectangles) {
        if (static_cast<int>(j.size()) != d) throw std::invalid_argument("rectangle dimension mismatch");
        for (auto v : j) {
            if (v < 1) throw std::invalid_argument("rectangle sides must be >= 1");
        }
    }
    RectangleReport rep;
    rep.config = config.to_json();
    rep.ratio_cap = ratio_cap;
    rep.x = config.resolved_x().front();
    const auto R = static_cast<std::size_t>(config.replicates);

    for (const std::int64_t n : config.n_grid) {
        std::vector<MultiIndex> rects;
        for (const auto& j : rectangles) {
            if (sup_norm(j) <= n) rects.push_back(j);
        }
        if (rects.empty()) continue;
        const std::int64_t m = config.m_at(n);
        const auto plan = config.plan_at(n);
        const double b = config.bandwidth_at(n);
        const FieldGenerator gen(config.model, config.innovations, n, m, plan, config.generation_options());
        CenteringTerms c;
        if (config.centering == Centering::Oracle) {
            c = oracle_centering(config.innovations, config.kernel, b, rep.x, gen.full_variance(), gen.truncated_variance());
        } else {
            const std::size_t N = checked_power(n, d);
            std::vector<double> zm(R), km(R);
            parallel_for(R, config.threads, [&](std::size_t r) {
                std::vector<double> full(N), trunc(N);
                gen.generate_into({config.master_seed, static_cast<std::uint64_t>(n), r}, full, trunc);
                const auto s = site_sums(full, trunc, rep.x, b, config.kernel);
                zm[r] = s.z / static_cast<double>(N);
                km[r] = s.zeta / static_cast<double>(N);
            });
            c = {mean_in_order(zm), mean_in_order(km)};
        }
        const std::size_t N = checked_power(n, d);
        const Box box(d, n);
        const double scale = 1.0 / std::sqrt(b);
        std::vector<std::vector<double>> zeta_sq(R, std::vector<double>(rects.size()));
        std::vector<std::vector<double>> rem_sq(R, std::vector<double>(rects.size()));
        std::vector<double> site_rem(R);
        parallel_for(R, config.threads, [&](std::size_t r) {
            std::vector<double> full(N), trunc(N);
            gen.generate_into({config.master_seed, static_cast<std::uint64_t>(n), r}, full, trunc);
            CompensatedSum sr;
            for (std::size_t i = 0; i < N; ++i) {
                const double z = config.kernel((rep.x - full[i]) / b) * scale - c.ez;
                const double k = config.kernel((rep.x - trunc[i]) / b) * scale - c.ezeta;
                trunc[i] = k;
                full[i] = z - k;
                sr += (z - k) * (z - k);
            }
            site_rem[r] = sr.value() / static_cast<double>(N);
            prefix_sums(trunc, d, n);
            prefix_sums(full, d, n);
            for (std::size_t q = 0; q < rects.size(); ++q) {
                MultiIndex corner = rects[q];
                for (auto& v : corner) v -= 1;
                const auto off = box.offset(corner);
                zeta_sq[r][q] = trunc[off] * trunc[off];
                rem_sq[r][q] = full[off] * full[off];
            }
        });
        const double site_norm = std::sqrt(mean_in_order(site_rem));
        const double delta_n = coefficient_functionals(config.model, n, m).delta;
        rep.site_remainder_norm[n] = site_norm;
        rep.delta_n[n] = delta_n;
        const double denom_base = site_norm + std::sqrt(b) * delta_n;
        for (std::size_t q = 0; q < rects.size(); ++q) {
            std::vector<double> zs(R), rs(R);
            for (std::size_t r = 0; r < R; ++r) {
                zs[r] = zeta_sq[r][q];
                rs[r] = rem_sq[r][q];
            }
            double vol = 1.0;
            for (auto v : rects[q]) vol *= static_cast<double>(v);
            RectangleRow row;
            row.n = n;
            row.sides = rects[q];
            row.zeta_norm = std::sqrt(mean_in_order(zs) / vol);
            row.remainder_norm = std::sqrt(mean_in_order(rs) / vol);
            row.remainder_constant = denom_base > 0 ? row.remainder_norm / denom_base : 0.0;
            rep.rows.push_back(std::move(row));
        }
    }
    if (rep.rows.empty()) throw std::invalid_argument("rectangle_moment_check: every rectangle exceeds the largest n");
    double zmin = std::numeric_limits<double>::infinity(), zmax = 0.0;
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const auto& r : rep.rows) {
        zmin = std::min(zmin, r.zeta_norm);
        zmax = std::max(zmax, r.zeta_norm);
        rmin = std::min(rmin, r.remainder_constant);
        rmax = std::max(rmax, r.remainder_constant);
    }
    rep.zeta_ratio = zmin > 0 ? zmax / zmin : std::numeric_limits<double>::infinity();
    rep.zeta_constant = zmax;
    rep.remainder_ratio = rmin > 0 ? rmax / rmin : (rmax == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    rep.remainder_constant = rmax;
    rep.verdict = rep.zeta_ratio < ratio_cap ? Verdict::Pass : Verdict::Fail;
    return rep;
}

// ---------------------------------------------------------------------------
// Wu

nlohmann::json WuReport::to_json() const {
    return {{"p", p},
            {"samples", samples},
            {"truncation_radius", radius},
            {"tail_bound", tail_bound},
            {"sum_a2", sum_a2},
            {"sum_a4", sum_a4},
            {"moment", moment},
            {"constant", constant},
            {"standard_error", standard_error},
            {"expected_constant", expected_constant},
            {"z", z},
            {"verdict", to_string(verdict)},
            {"model", model},
            {"innovation", innovation}};
}

WuReport wu_inequality_check(const CoefficientModel& model, const InnovationModel& innovations, int p,
                             std::size_t samples, const SeedSpec& seed, int threads) {
    if (p != 1 && p != 2) throw std::invalid_argument("wu_inequality_check: p must be 1 or 2");
    if (samples < 2) throw std::invalid_argument("wu_inequality_check: need at least 2 samples");
    if (p == 2 && !innovations.has_finite_moment(4.0)) {
        throw std::invalid_argument("wu_inequality_check: p=2 needs a finite fourth moment; " + innovations.name() +
                                    " has none");
    }
    WuReport w;
    w.p = p;
    w.samples = samples;
    w.model = model.id();
    w.innovation = innovations.name();
    TailCalculator calc(model);
    const int d = model.dim();
    std::int64_t M = minimal_truncation_radius(model, 1e-4 * std::sqrt(calc.total_sq()), 1);
    while (M > 1 && checked_power(M, d) > (std::size_t{1} << 14)) --M;
    w.radius = M;
    w.tail_bound = calc.residual(M);
    const auto a = model.dense(M);
    std::vector<double> nz;
    for (double v : a) {
        if (v != 0.0) nz.push_back(v);
    }
    CompensatedSum s2, s4;
    for (double v : nz) {
        s2 += v * v;
        s4 += v * v * v * v;
    }
    w.sum_a2 = s2.value();
    w.sum_a4 = s4.value();

    constexpr std::size_t chunk = 4096;
    const std::size_t chunks = (samples + chunk - 1) / chunk;
    std::vector<double> m1(chunks), m2(chunks);
    parallel_for(chunks, threads, [&](std::size_t c) {
        CounterRng rng({seed.master, seed.stream, (seed.replicate << 32) + c});
        const std::size_t lo = c * chunk, hi = std::min(samples, lo + chunk);
        CompensatedSum a1, a2;
        for (std::size_t s = lo; s < hi; ++s) {
            double x = 0.0;
            for (double v : nz) x += v * innovations.sample(rng);
            const double x2 = x * x;
            const double xp = p == 1 ? x2 : x2 * x2;
            a1 += xp;
            a2 += xp * xp;
        }
        m1[c] = a1.value();
        m2[c] = a2.value();
    });
    const double N = static_cast<double>(samples);
    w.moment = compensated_sum(m1) / N;
    const double second = compensated_sum(m2) / N;
    const double norm = std::pow(w.sum_a2, p);
    w.constant = w.moment / norm;
    w.standard_error = std::sqrt(std::max(second - w.moment * w.moment, 0.0) / (N - 1.0)) / norm;
    w.expected_constant = p == 1 ? innovations.variance()
                                 : 3.0 + (innovations.fourth_moment() - 3.0) * w.sum_a4 / (w.sum_a2 * w.sum_a2);
    w.z = w.standard_error > 0 ? (w.constant - w.expected_constant) / w.standard_error : 0.0;
    w.verdict = std::fabs(w.z) <= 3.0 ? Verdict::Pass : Verdict::Fail;
    return w;
}

// ---------------------------------------------------------------------------
// Fixed-m gap

nlohmann::json GapReport::to_json() const {
    auto rows = [](const std::vector<GapPoint>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& g : v) {
            a.push_back({{"n", g.n},
                         {"m", g.m},
                         {"b", g.b},
                         {"gap", g.gap},
                         {"gap_standard_error", g.gap_standard_error},
                         {"centered_gap", g.centered_gap},
                         {"exact_gap", g.exact_gap},
                         {"bound_proxy", g.bound_proxy}});
        }
        return a;
    };
    nlohmann::json j{{"config", config},
                     {"x", x},
                     {"limit_oracle", limit_oracle},
                     {"fixed", rows(fixed)},
                     {"growing", rows(growing)},
                     {"tolerance", tolerance},
                     {"fixed_within_tolerance", fixed_within_tolerance},
                     {"fixed_not_vanishing", fixed_not_vanishing},
                     {"growing_constant", growing_constant},
                     {"growing_halved", growing_halved},
                     {"verdict", to_string(verdict)},
                     {"label", label}};
    j["growing_delta"] = growing_delta ? nlohmann::json(*growing_delta) : nlohmann::json(nullptr);
    return j;
}

namespace {

GapPoint gap_point(const ExperimentConfig& config, std::int64_t n, std::int64_t m, double x) {
    GapPoint g;
    g.n = n;
    g.m = m;
    g.b = config.bandwidth_at(n);
    const auto plan = config.truncation.policy == TruncationPolicy::Fixed
                          ? TruncationPlan::fixed(config.model, std::max(config.truncation.radius, m))
                          : TruncationPlan::bandwidth_relative(config.model, g.b, m, config.truncation.eta);
    const FieldGenerator gen(config.model, config.innovations, n, m, plan, config.generation_options());
    const auto c = oracle_centering(config.innovations, config.kernel, g.b, x, gen.full_variance(),
                                    gen.truncated_variance());
    const auto R = static_cast<std::size_t>(config.replicates);
    const std::size_t N = checked_power(n, config.dim());
    const double scale = 1.0 / std::sqrt(g.b);
    std::vector<double> s1(R), s2(R), sc(R);
    parallel_for(R, config.threads, [&](std::size_t r) {
        std::vector<double> full(N), trunc(N);
        gen.generate_into({config.master_seed, static_cast<std::uint64_t>(n), r}, full, trunc);
        CompensatedSum a, a2, ac;
        for (std::size_t i = 0; i < N; ++i) {
            const double z = config.kernel((x - full[i]) / g.b) * scale;
            const double k = config.kernel((x - trunc[i]) / g.b) * scale;
            const double dlt = k - z;
            a += dlt * dlt;
            a2 += dlt * dlt * dlt * dlt;
            const double cd = (k - c.ezeta) - (z - c.ez);
            ac += cd * cd;
        }
        s1[r] = a.value();
        s2[r] = a2.value();
        sc[r] = ac.value();
    });
    const double total = static_cast<double>(N * R);
    g.gap = compensated_sum(s1) / total;
    g.centered_gap = compensated_sum(sc) / total;
    const double second = compensated_sum(s2) / total;
    // sites are treated as independent; an optimistic error bar
    g.gap_standard_error = std::sqrt(std::max(second - g.gap * g.gap, 0.0) / total);
    const double vM = gen.full_variance(), vm = gen.truncated_variance();
    g.exact_gap = smoothed_normal_moment(config.kernel, g.b, x, vm, 2) + smoothed_normal_moment(config.kernel, g.b, x, vM, 2) -
                  2.0 * g.b * smoothed_bivariate_normal(config.kernel, g.b, x, vm, vM, vm);
    g.bound_proxy = TailCalculator(config.model).residual(m) / g.b + g.b;
    return g;
}

}  // namespace

GapReport fixed_m_gap(const ExperimentConfig& config, std::int64_t m, std::span<const std::int64_t> n_grid,
                      std::optional<double> growing_delta, double tolerance) {
    if (config.innovations.kind() != InnovationKind::Gaussian) {
        throw std::invalid_argument("fixed_m_gap needs gaussian innovations for its density oracles");
    }
    if (m < 1) throw std::invalid_argument("fixed_m_gap: m must be >= 1");
    if (n_grid.size() < 2) throw std::invalid_argument("fixed_m_gap: need at least two grid points");
    for (std::size_t i = 1; i < n_grid.size(); ++i) {
        if (n_grid[i] <= n_grid[i - 1]) throw std::invalid_argument("fixed_m_gap: n_grid must be strictly increasing");
    }
    if (growing_delta && !(*growing_delta > 0.0 && *growing_delta < 1.0)) {
        throw std::invalid_argument("fixed_m_gap: growing delta must lie in (0, 1)");
    }
    ExperimentConfig cfg = config;
    cfg.n_grid.assign(n_grid.begin(), n_grid.end());
    cfg.m_fixed = m;
    cfg.validate();

    GapReport rep;
    rep.config = cfg.to_json();
    rep.config["growing_delta"] = growing_delta ? nlohmann::json(*growing_delta) : nlohmann::json(nullptr);
    rep.tolerance = tolerance;
    rep.growing_delta = growing_delta;
    rep.x = cfg.resolved_x().front();
    TailCalculator calc(cfg.model);
    const double v = calc.total_sq(), vm = calc.truncated_sq(m);
    const bool degenerate = calc.residual(m) == 0.0;
    rep.limit_oracle = degenerate ? 0.0 : (normal_pdf(rep.x, vm) + normal_pdf(rep.x, v)) * cfg.kernel.roughness();

    for (const auto n : n_grid) rep.fixed.push_back(gap_point(cfg, n, m, rep.x));
    const double first = rep.fixed.front().gap, last = rep.fixed.back().gap;
    if (degenerate) {
        rep.fixed_within_tolerance = last == 0.0;
        rep.fixed_not_vanishing = false;
    } else {
        rep.fixed_within_tolerance = std::fabs(last / rep.limit_oracle - 1.0) <= tolerance;
        rep.fixed_not_vanishing = last >= 0.5 * first;
    }
    if (growing_delta) {
        for (const auto n : n_grid) {
            rep.growing.push_back(gap_point(cfg, n, m_schedule(n, *growing_delta), rep.x));
            const auto& g = rep.growing.back();
            rep.growing_constant = std::max(rep.growing_constant, g.bound_proxy > 0 ? g.gap / g.bound_proxy : 0.0);
        }
        rep.growing_halved = rep.growing.back().gap < 0.5 * rep.growing.front().gap;
    }
    if (degenerate) {
        const bool zero = std::all_of(rep.fixed.begin(), rep.fixed.end(), [](const GapPoint& g) { return g.gap == 0.0; });
        rep.verdict = zero ? Verdict::Pass : Verdict::Fail;
        rep.label = zero ? "zero gap (residual vanishes)" : "nonzero gap with vanishing residual";
        return rep;
    }
    const bool positive = rep.fixed_within_tolerance && rep.fixed_not_vanishing;
    rep.label = positive ? "positive limit" : "no positive limit detected";
    rep.verdict = positive && (!growing_delta || rep.growing_halved) ? Verdict::Pass : Verdict::Fail;
    return rep;
}

}  // namespace kdelab
