#include "kdelab/coefficients.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "kdelab/numerics.hpp"

namespace kdelab {

std::string to_string(CoefficientFamily f) {
    switch (f) {
        case CoefficientFamily::PowerDecay: return "power-decay";
        case CoefficientFamily::Geometric: return "geometric";
        case CoefficientFamily::FiniteSupport: return "finite-support";
        case CoefficientFamily::Tabulated: return "tabulated";
    }
    return "unknown";
}

CoefficientFamily coefficient_family_from_string(const std::string& s) {
    if (s == "power-decay") return CoefficientFamily::PowerDecay;
    if (s == "geometric") return CoefficientFamily::Geometric;
    if (s == "finite-support") return CoefficientFamily::FiniteSupport;
    if (s == "tabulated") return CoefficientFamily::Tabulated;
    throw std::invalid_argument("unknown coefficient family '" + s + "'");
}

// ---------------------------------------------------------------------------
// CoefficientModel

namespace {

void require_dim(int dim) {
    if (dim < 1) throw std::invalid_argument("coefficient model: dimension must be >= 1");
}

}  // namespace

CoefficientModel CoefficientModel::power_decay(int dim, double q, double scale) {
    require_dim(dim);
    if (!(q > 0.5 * dim)) {
        throw std::invalid_argument("power-decay model needs q > d/2 for square summability (q=" +
                                    std::to_string(q) + ", d=" + std::to_string(dim) + ")");
    }
    if (!std::isfinite(scale)) throw std::invalid_argument("power-decay model: scale not finite");
    CoefficientModel m;
    m.dim_ = dim;
    m.family_ = CoefficientFamily::PowerDecay;
    m.q_ = q;
    m.scale_ = scale;
    m.beta_ = q - 0.5 * dim;
    return m;
}

CoefficientModel CoefficientModel::geometric(int dim, double ratio, double scale) {
    require_dim(dim);
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw std::invalid_argument("geometric model needs ratio in (0,1)");
    }
    if (!std::isfinite(scale)) throw std::invalid_argument("geometric model: scale not finite");
    CoefficientModel m;
    m.dim_ = dim;
    m.family_ = CoefficientFamily::Geometric;
    m.ratio_ = ratio;
    m.scale_ = scale;
    return m;
}

CoefficientModel CoefficientModel::finite_support(int dim, std::int64_t side,
                                                  std::vector<double> values) {
    require_dim(dim);
    if (side < 1) throw std::invalid_argument("finite-support model: side must be >= 1");
    if (values.size() != checked_power(side, dim)) {
        throw std::invalid_argument("finite-support model: expected side^d = " +
                                    std::to_string(checked_power(side, dim)) + " values, got " +
                                    std::to_string(values.size()));
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("finite-support model: value not finite");
    }
    CoefficientModel m;
    m.dim_ = dim;
    m.family_ = CoefficientFamily::FiniteSupport;
    m.side_ = side;
    m.table_ = std::move(values);
    return m;
}

CoefficientModel CoefficientModel::tabulated(int dim, std::int64_t side,
                                             std::vector<double> values) {
    auto m = finite_support(dim, side, std::move(values));
    m.family_ = CoefficientFamily::Tabulated;
    return m;
}

CoefficientModel CoefficientModel::identity(int dim) {
    return finite_support(dim, 1, {1.0});
}

CoefficientModel& CoefficientModel::declare_decay(std::optional<double> beta,
                                                  std::optional<double> c1) {
    if (beta && !(*beta > 0.0)) throw std::invalid_argument("declared beta must be positive");
    if (c1 && !(*c1 > 0.0)) throw std::invalid_argument("declared c1 must be positive");
    beta_ = beta;
    c1_ = c1;
    return *this;
}

double CoefficientModel::operator()(std::span<const std::int64_t> k) const {
    if (static_cast<int>(k.size()) != dim_) {
        throw std::invalid_argument("coefficient index has wrong dimension");
    }
    for (auto v : k) {
        if (v < 0) return 0.0;
    }
    switch (family_) {
        case CoefficientFamily::PowerDecay:
            return scale_ * std::pow(1.0 + static_cast<double>(sup_norm(k)), -q_);
        case CoefficientFamily::Geometric: {
            std::int64_t total = 0;
            for (auto v : k) total += v;
            return scale_ * std::pow(ratio_, static_cast<double>(total));
        }
        case CoefficientFamily::FiniteSupport:
        case CoefficientFamily::Tabulated: {
            const Box box(dim_, side_);
            if (!box.contains(k)) return 0.0;
            return table_[box.offset(k)];
        }
    }
    return 0.0;
}

CoefficientModel CoefficientModel::scaled(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
    CoefficientModel m = *this;
    if (has_finite_support()) {
        for (auto& v : m.table_) v *= factor;
    } else {
        m.scale_ *= factor;
    }
    if (m.c1_) *m.c1_ *= factor;
    return m;
}

std::vector<double> CoefficientModel::dense(std::int64_t side) const {
    const Box box(dim_, side);
    std::vector<double> out(box.size());
    MultiIndex k(static_cast<std::size_t>(dim_), 0);
    std::size_t off = 0;
    do {
        out[off++] = (*this)(k);
    } while (next_in_range(k, 0, side - 1));
    return out;
}

std::string CoefficientModel::id() const {
    std::ostringstream os;
    os << to_string(family_) << "(d=" << dim_;
    switch (family_) {
        case CoefficientFamily::PowerDecay: os << ",q=" << q_ << ",c=" << scale_; break;
        case CoefficientFamily::Geometric: os << ",r=" << ratio_ << ",c=" << scale_; break;
        default: os << ",side=" << side_; break;
    }
    os << ")";
    return os.str();
}

nlohmann::json CoefficientModel::to_json() const {
    nlohmann::json j;
    j["family"] = to_string(family_);
    j["d"] = dim_;
    switch (family_) {
        case CoefficientFamily::PowerDecay:
            j["q"] = q_;
            j["c"] = scale_;
            break;
        case CoefficientFamily::Geometric:
            j["r"] = ratio_;
            j["c"] = scale_;
            break;
        case CoefficientFamily::FiniteSupport:
        case CoefficientFamily::Tabulated:
            j["side"] = side_;
            j["values"] = table_;
            break;
    }
    if (beta_) j["beta"] = *beta_;
    if (c1_) j["c1"] = *c1_;
    return j;
}

CoefficientModel CoefficientModel::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("model: expected an object");
    if (!j.contains("family")) throw std::invalid_argument("model.family: missing");
    if (!j.contains("d")) throw std::invalid_argument("model.d: missing");
    const auto family = coefficient_family_from_string(j.at("family").get<std::string>());
    const int dim = j.at("d").get<int>();
    CoefficientModel m = [&] {
        switch (family) {
            case CoefficientFamily::PowerDecay:
                if (!j.contains("q")) throw std::invalid_argument("model.q: missing");
                return power_decay(dim, j.at("q").get<double>(), j.value("c", 1.0));
            case CoefficientFamily::Geometric:
                if (!j.contains("r")) throw std::invalid_argument("model.r: missing");
                return geometric(dim, j.at("r").get<double>(), j.value("c", 1.0));
            case CoefficientFamily::FiniteSupport:
            case CoefficientFamily::Tabulated: {
                if (!j.contains("values")) throw std::invalid_argument("model.values: missing");
                auto values = j.at("values").get<std::vector<double>>();
                const std::int64_t side = j.value("side", std::int64_t{1});
                return family == CoefficientFamily::Tabulated
                           ? tabulated(dim, side, std::move(values))
                           : finite_support(dim, side, std::move(values));
            }
        }
        throw std::invalid_argument("model: unhandled family");
    }();
    std::optional<double> beta = m.beta_;
    std::optional<double> c1;
    if (j.contains("beta")) beta = j.at("beta").get<double>();
    if (j.contains("c1")) c1 = j.at("c1").get<double>();
    m.declare_decay(beta, c1);
    return m;
}

// ---------------------------------------------------------------------------
// Euler-Maclaurin tail of the Hurwitz sum  sum_{t >= T} t^(-sigma), sigma > 1.

namespace {

// B_2, B_4, B_6, B_8, B_10 divided by (2j)!.
constexpr std::array<double, 5> kBernoulliOverFactorial = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
};

BoundedValue hurwitz_tail(double sigma, double start) {
    double value = std::pow(start, 1.0 - sigma) / (sigma - 1.0) + 0.5 * std::pow(start, -sigma);
    // rising factorial (sigma)_{2j-1}, updated two factors at a time
    double rising = sigma;
    double power = std::pow(start, -sigma - 1.0);
    const double inv_sq = 1.0 / (start * start);
    for (std::size_t j = 0; j < 4; ++j) {
        value += kBernoulliOverFactorial[j] * rising * power;
        rising *= (sigma + 2.0 * j + 1.0) * (sigma + 2.0 * j + 2.0);
        power *= inv_sq;
    }
    // Completely monotone summand: the remainder is bounded by the first
    // omitted term.
    const double remainder = std::fabs(kBernoulliOverFactorial[4] * rising * power);
    return {value, 2.0 * remainder};
}

// Coefficients (ascending powers of t) of prod_tau (t - k_tau) - prod_tau (t - k_tau - 1).
std::vector<double> shell_count_polynomial(const MultiIndex& k) {
    std::vector<double> a{1.0};
    std::vector<double> b{1.0};
    auto multiply = [](std::vector<double>& p, double root) {
        std::vector<double> out(p.size() + 1, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            out[i + 1] += p[i];
            out[i] -= root * p[i];
        }
        p = std::move(out);
    };
    for (auto v : k) {
        multiply(a, static_cast<double>(v));
        multiply(b, static_cast<double>(v) + 1.0);
    }
    std::vector<double> diff(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    diff.pop_back();  // leading terms cancel
    return diff;
}

MultiIndex clamp_nonnegative(std::span<const std::int64_t> k) {
    MultiIndex out(k.begin(), k.end());
    for (auto& v : out) v = std::max<std::int64_t>(v, 0);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// TailCalculator

TailCalculator::TailCalculator(CoefficientModel model, double tol)
    : model_(std::move(model)), tol_(tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tail calculator: tol must be positive");
    if (model_.has_finite_support()) {
        const Box box(model_.dim(), model_.support_side());
        suffix_.resize(box.size());
        for (std::size_t i = 0; i < box.size(); ++i) suffix_[i] = model_.table()[i] * model_.table()[i];
        // reverse cumulative sums along each axis in turn
        std::size_t stride = 1;
        const auto side = static_cast<std::size_t>(box.side());
        for (int axis = box.dim() - 1; axis >= 0; --axis) {
            for (std::size_t off = 0; off < box.size(); ++off) {
                const std::size_t coord = (off / stride) % side;
                if (coord != 0) continue;
                for (std::size_t c = side - 1; c-- > 0;) {
                    suffix_[off + c * stride] += suffix_[off + (c + 1) * stride];
                }
            }
            stride *= side;
        }
    }
}

void TailCalculator::note_error(double value_sq, double err_sq) const {
    if (err_sq <= 0.0) return;
    double err = std::sqrt(err_sq);
    if (value_sq > 0.0) err = std::min(err, err_sq / std::sqrt(value_sq));
    max_tail_error_ = std::max(max_tail_error_, err);
}

BoundedValue TailCalculator::shell_tail_sq(const MultiIndex& k, std::int64_t start_shell) const {
    const double q2 = 2.0 * model_.q();
    const double c2 = model_.scale() * model_.scale();
    std::int64_t s0 = start_shell;
    for (auto v : k) s0 = std::max(s0, v);

    auto shell_count = [&](std::int64_t s) {
        double inner = 1.0;
        double outer = 1.0;
        for (auto v : k) {
            outer *= static_cast<double>(s - v + 1);
            inner *= static_cast<double>(s - v);
        }
        return outer - inner;
    };

    const auto poly = shell_count_polynomial(k);
    std::int64_t radius = 64;
    for (;;) {
        CompensatedSum sum;
        for (std::int64_t s = s0; s < s0 + radius; ++s) {
            sum.add(shell_count(s) * std::pow(1.0 + static_cast<double>(s), -q2));
        }
        const double start = static_cast<double>(s0 + radius + 1);
        double remainder = 0.0;
        for (std::size_t j = 0; j < poly.size(); ++j) {
            if (poly[j] == 0.0) continue;
            const auto h = hurwitz_tail(q2 - static_cast<double>(j), start);
            sum.add(poly[j] * h.value);
            remainder += std::fabs(poly[j]) * h.error;
        }
        const double value = c2 * sum.value();
        const double err = c2 * remainder;
        if (err <= tol_ * tol_ || radius >= (std::int64_t{1} << 20)) {
            direct_radius_ = std::max(direct_radius_, s0 + radius - 1);
            note_error(value, err);
            return {std::max(value, 0.0), err};
        }
        radius *= 2;
    }
}

BoundedValue TailCalculator::tail_sq(std::span<const std::int64_t> k_raw) const {
    if (static_cast<int>(k_raw.size()) != model_.dim()) {
        throw std::invalid_argument("tail index has wrong dimension");
    }
    MultiIndex k = clamp_nonnegative(k_raw);
    switch (model_.family()) {
        case CoefficientFamily::PowerDecay: {
            // symmetric in the coordinates of k
            std::sort(k.begin(), k.end());
            if (auto it = tail_cache_.find(k); it != tail_cache_.end()) return {it->second, 0.0};
            const auto v = shell_tail_sq(k, 0);
            tail_cache_.emplace(k, v.value);
            return v;
        }
        case CoefficientFamily::Geometric: {
            const double r2 = model_.ratio() * model_.ratio();
            double v = model_.scale() * model_.scale();
            for (auto kt : k) v *= std::pow(r2, static_cast<double>(kt)) / (1.0 - r2);
            return {v, 0.0};
        }
        case CoefficientFamily::FiniteSupport:
        case CoefficientFamily::Tabulated: {
            const Box box(model_.dim(), model_.support_side());
            if (!box.contains(k)) return {0.0, 0.0};
            return {suffix_[box.offset(k)], 0.0};
        }
    }
    return {};
}

double TailCalculator::tail(std::span<const std::int64_t> k) const {
    return std::sqrt(tail_sq(k).value);
}

BoundedValue TailCalculator::residual_sq(std::int64_t m) const {
    if (m < 0) throw std::invalid_argument("residual: m must be >= 0");
    const int d = model_.dim();
    switch (model_.family()) {
        case CoefficientFamily::PowerDecay:
            return shell_tail_sq(MultiIndex(static_cast<std::size_t>(d), 0), m);
        case CoefficientFamily::Geometric: {
            const double r2 = model_.ratio() * model_.ratio();
            const double per_axis = 1.0 / (1.0 - r2);
            const double x = std::pow(r2, static_cast<double>(m));
            // S^d (1 - (1 - r^{2m})^d), without cancellation for small r^{2m}
            const double frac = -std::expm1(static_cast<double>(d) * std::log1p(-x));
            return {model_.scale() * model_.scale() * std::pow(per_axis, d) * frac, 0.0};
        }
        case CoefficientFamily::FiniteSupport:
        case CoefficientFamily::Tabulated: {
            const Box box(d, model_.support_side());
            CompensatedSum sum;
            for (std::size_t off = 0; off < box.size(); ++off) {
                if (sup_norm(box.index(off)) >= m) sum.add(model_.table()[off] * model_.table()[off]);
            }
            return {sum.value(), 0.0};
        }
    }
    return {};
}

double TailCalculator::residual(std::int64_t m) const {
    return std::sqrt(residual_sq(m).value);
}

double TailCalculator::total_sq() const {
    return tail_sq(MultiIndex(static_cast<std::size_t>(model_.dim()), 0)).value;
}

double TailCalculator::truncated_sq(std::int64_t m) const {
    if (m <= 0) return 0.0;
    const int d = model_.dim();
    switch (model_.family()) {
        case CoefficientFamily::PowerDecay: {
            CompensatedSum sum;
            const double c2 = model_.scale() * model_.scale();
            for (std::int64_t s = 0; s < m; ++s) {
                const double count = std::pow(static_cast<double>(s + 1), d) -
                                     std::pow(static_cast<double>(s), d);
                sum.add(c2 * count * std::pow(1.0 + static_cast<double>(s), -2.0 * model_.q()));
            }
            return sum.value();
        }
        case CoefficientFamily::Geometric: {
            const double r2 = model_.ratio() * model_.ratio();
            const double per_axis = -std::expm1(static_cast<double>(m) * std::log(r2)) / (1.0 - r2);
            return model_.scale() * model_.scale() * std::pow(per_axis, d);
        }
        case CoefficientFamily::FiniteSupport:
        case CoefficientFamily::Tabulated: {
            const Box box(d, model_.support_side());
            CompensatedSum sum;
            for (std::size_t off = 0; off < box.size(); ++off) {
                if (sup_norm(box.index(off)) < m) sum.add(model_.table()[off] * model_.table()[off]);
            }
            return sum.value();
        }
    }
    return 0.0;
}

double TailCalculator::axis_tail_max(std::int64_t n) const {
    double best = 0.0;
    for (int axis = 0; axis < model_.dim(); ++axis) {
        MultiIndex k(static_cast<std::size_t>(model_.dim()), 1);
        k[static_cast<std::size_t>(axis)] = n;
        best = std::max(best, tail(k));
    }
    return best;
}

double TailCalculator::delta(std::int64_t n) const {
    if (n < 1) throw std::invalid_argument("delta: n must be >= 1");
    const int d = model_.dim();
    MultiIndex k(static_cast<std::size_t>(d), 1);
    MultiIndex shifted(static_cast<std::size_t>(d));
    CompensatedSum sum;
    do {
        double weight = 1.0;
        for (std::size_t t = 0; t < k.size(); ++t) {
            shifted[t] = k[t] - 1;
            weight *= std::sqrt(static_cast<double>(k[t]));
        }
        const double a = tail(shifted);
        if (a != 0.0) sum.add(a / weight);
    } while (next_in_range(k, 1, n));
    return sum.value();
}

// ---------------------------------------------------------------------------

double CoefficientFunctionals::tail_at(std::span<const std::int64_t> k) const {
    return tail_norms.at(Box(dim, n).offset(k));
}

nlohmann::json CoefficientFunctionals::to_json() const {
    nlohmann::json j;
    j["d"] = dim;
    j["n"] = n;
    j["m"] = m;
    j["A_bracket_n"] = axis_tail_max;
    j["B_m"] = residual_norm;
    j["Delta_n"] = delta;
    j["A_0"] = tail_norms.empty() ? 0.0 : tail_norms.front();
    j["truncation_radius"] = truncation_radius;
    j["tail_error_bound"] = tail_error_bound;
    return j;
}

CoefficientFunctionals coefficient_functionals(const CoefficientModel& model, std::int64_t n,
                                               std::int64_t m, double tol) {
    if (n < 1) throw std::invalid_argument("coefficient_functionals: n must be >= 1");
    if (m < 1) throw std::invalid_argument("coefficient_functionals: m must be >= 1");
    if (model.family() == CoefficientFamily::PowerDecay && !(model.q() > 0.5 * model.dim())) {
        throw std::invalid_argument("coefficient_functionals: power-decay needs q > d/2");
    }
    TailCalculator calc(model, tol);
    CoefficientFunctionals out;
    out.dim = model.dim();
    out.n = n;
    out.m = m;
    const Box box(model.dim(), n);
    out.tail_norms.resize(box.size());
    for (std::size_t off = 0; off < box.size(); ++off) out.tail_norms[off] = calc.tail(box.index(off));
    out.axis_tail_max = calc.axis_tail_max(n);
    out.residual_norm = calc.residual(m);
    out.delta = calc.delta(n);
    out.truncation_radius = calc.direct_radius();
    out.tail_error_bound = calc.max_tail_error();
    return out;
}

// ---------------------------------------------------------------------------

BoundedValue autocovariance(const CoefficientModel& model, std::span<const std::int64_t> lag,
                            double tol) {
    const int d = model.dim();
    if (static_cast<int>(lag.size()) != d) throw std::invalid_argument("lag has wrong dimension");
    switch (model.family()) {
        case CoefficientFamily::Geometric: {
            const double r = model.ratio();
            double v = model.scale() * model.scale();
            for (auto j : lag) v *= std::pow(r, static_cast<double>(std::llabs(j))) / (1.0 - r * r);
            return {v, 0.0};
        }
        case CoefficientFamily::FiniteSupport:
        case CoefficientFamily::Tabulated:
            return {truncated_autocovariance(model, lag, model.support_side()), 0.0};
        case CoefficientFamily::PowerDecay: {
            // Terms with k or k+lag outside [0,R)^d contribute at most 2 A_0 B_R.
            TailCalculator calc(model);
            const double a0 = std::sqrt(calc.total_sq());
            const std::size_t cap = std::size_t{1} << 24;
            std::int64_t radius = std::max<std::int64_t>(sup_norm(lag) + 1, 8);
            while (2.0 * a0 * calc.residual(radius) > tol) {
                const auto next = radius * 2;
                if (checked_power(next, d) > cap) break;
                radius = next;
            }
            // bisect down to the smallest radius meeting tol
            std::int64_t lo = radius / 2;
            std::int64_t hi = radius;
            if (2.0 * a0 * calc.residual(hi) <= tol) {
                while (hi - lo > 1) {
                    const auto mid = lo + (hi - lo) / 2;
                    if (2.0 * a0 * calc.residual(mid) <= tol) hi = mid; else lo = mid;
                }
                radius = std::max(hi, sup_norm(lag) + 1);
            }
            return {truncated_autocovariance(model, lag, radius), 2.0 * a0 * calc.residual(radius)};
        }
    }
    return {};
}

double truncated_autocovariance(const CoefficientModel& model, std::span<const std::int64_t> lag,
                                std::int64_t m) {
    const int d = model.dim();
    if (static_cast<int>(lag.size()) != d) throw std::invalid_argument("lag has wrong dimension");
    if (m < 1) return 0.0;
    if (model.family() == CoefficientFamily::Geometric) {
        const double r = model.ratio();
        double v = model.scale() * model.scale();
        for (auto j : lag) {
            const auto aj = std::llabs(j);
            if (aj >= m) return 0.0;
            // sum_{k=0}^{m-aj-1} r^{2k+aj}
            v *= std::pow(r, static_cast<double>(aj)) *
                 (-std::expm1(static_cast<double>(m - aj) * std::log(r * r))) / (1.0 - r * r);
        }
        return v;
    }
    // k ranges over [lo_t, hi_t] so that both k and k+lag stay inside [0,m)
    MultiIndex lo(static_cast<std::size_t>(d));
    MultiIndex hi(static_cast<std::size_t>(d));
    for (std::size_t t = 0; t < lo.size(); ++t) {
        lo[t] = std::max<std::int64_t>(0, -lag[t]);
        hi[t] = std::min<std::int64_t>(m - 1, m - 1 - lag[t]);
        if (lo[t] > hi[t]) return 0.0;
    }
    const auto dense = model.dense(m);
    const Box box(d, m);
    MultiIndex k = lo;
    MultiIndex kl(static_cast<std::size_t>(d));
    CompensatedSum sum;
    for (;;) {
        for (std::size_t t = 0; t < k.size(); ++t) kl[t] = k[t] + lag[t];
        sum.add(dense[box.offset(k)] * dense[box.offset(kl)]);
        std::size_t t = k.size();
        while (t-- > 0) {
            if (k[t] < hi[t]) {
                ++k[t];
                break;
            }
            k[t] = lo[t];
        }
        if (t == static_cast<std::size_t>(-1)) break;
    }
    return sum.value();
}

std::int64_t minimal_truncation_radius(const CoefficientModel& model, double bound,
                                       std::int64_t min_radius) {
    if (!(bound >= 0.0)) throw std::invalid_argument("truncation bound must be nonnegative");
    TailCalculator calc(model);
    std::int64_t lo = std::max<std::int64_t>(min_radius, 1);
    if (calc.residual(lo) <= bound) return lo;
    std::int64_t hi = lo;
    while (calc.residual(hi) > bound) {
        if (hi > (std::int64_t{1} << 40)) {
            throw std::domain_error("no truncation radius reaches B_M <= " + std::to_string(bound));
        }
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        const auto mid = lo + (hi - lo) / 2;
        if (calc.residual(mid) <= bound) hi = mid; else lo = mid;
    }
    return hi;
}

std::int64_t m_schedule(std::int64_t n, double delta) {
    if (n < 1) throw std::invalid_argument("m_schedule: n must be >= 1");
    const double raw = std::pow(static_cast<double>(n), delta);
    auto m = static_cast<std::int64_t>(std::floor(raw));
    // guard exact powers that pow() lands just below
    if (std::pow(static_cast<double>(m + 1), 1.0 / delta) <= static_cast<double>(n) * (1.0 + 1e-14)) {
        ++m;
    }
    return std::max<std::int64_t>(m, 1);
}

}  // namespace kdelab
