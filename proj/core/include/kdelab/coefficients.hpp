#pragma once

// Coefficient families for causal linear fields X_i = sum_{k >= 0} a_k eps_{i-k},
// their tail L2 functionals, and the deterministic condition checkers built
// on them.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kdelab/bandwidth.hpp"
#include "kdelab/lattice.hpp"
#include "kdelab/rational.hpp"

namespace kdelab {

enum class CoefficientFamily { PowerDecay, Geometric, FiniteSupport, Tabulated };

[[nodiscard]] std::string to_string(CoefficientFamily f);
[[nodiscard]] CoefficientFamily coefficient_family_from_string(const std::string& s);

/// a_k on the positive orthant of Z^d.
///
///  - power-decay:    a_k = c (1 + |k|_inf)^(-q), square-summable iff q > d/2
///  - geometric:      a_k = c r^(k_1 + ... + k_d), 0 < r < 1
///  - finite-support: tabulated values on the box [0, side)^d, zero elsewhere
///  - tabulated:      same storage as finite-support, kept as a separate tag so
///                    configs round-trip unchanged
///
/// a_k is zero for any k outside the orthant (causality).
class CoefficientModel {
public:
    static CoefficientModel power_decay(int dim, double q, double scale = 1.0);
    static CoefficientModel geometric(int dim, double ratio, double scale = 1.0);
    static CoefficientModel finite_support(int dim, std::int64_t side, std::vector<double> values);
    static CoefficientModel tabulated(int dim, std::int64_t side, std::vector<double> values);
    /// Single nonzero coefficient a_0 = 1: the i.i.d. field.
    static CoefficientModel identity(int dim);

    [[nodiscard]] double operator()(std::span<const std::int64_t> k) const;

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] CoefficientFamily family() const noexcept { return family_; }
    [[nodiscard]] bool has_finite_support() const noexcept {
        return family_ == CoefficientFamily::FiniteSupport ||
               family_ == CoefficientFamily::Tabulated;
    }
    [[nodiscard]] double q() const noexcept { return q_; }
    [[nodiscard]] double ratio() const noexcept { return ratio_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] std::int64_t support_side() const noexcept { return side_; }
    [[nodiscard]] const std::vector<double>& table() const noexcept { return table_; }

    /// Declared decay A_[n] <= c1 n^(-beta). Power-decay models default to
    /// beta = q - d/2.
    [[nodiscard]] std::optional<double> beta() const noexcept { return beta_; }
    [[nodiscard]] std::optional<double> c1() const noexcept { return c1_; }
    CoefficientModel& declare_decay(std::optional<double> beta, std::optional<double> c1);

    /// Every coefficient multiplied by `factor` (> 0).
    [[nodiscard]] CoefficientModel scaled(double factor) const;

    /// Dense a_k over [0, side)^d, row-major.
    [[nodiscard]] std::vector<double> dense(std::int64_t side) const;

    /// Short human-readable identifier, e.g. "power-decay(d=2,q=4,c=1)".
    [[nodiscard]] std::string id() const;

    [[nodiscard]] nlohmann::json to_json() const;
    static CoefficientModel from_json(const nlohmann::json& j);

    bool operator==(const CoefficientModel&) const = default;

private:
    CoefficientModel() = default;

    int dim_ = 1;
    CoefficientFamily family_ = CoefficientFamily::FiniteSupport;
    double q_ = 0.0;
    double ratio_ = 0.0;
    double scale_ = 1.0;
    std::int64_t side_ = 0;
    std::vector<double> table_;
    std::optional<double> beta_;
    std::optional<double> c1_;
};

/// Value plus a bound on its approximation error (not counting IEEE rounding).
struct BoundedValue {
    double value = 0.0;
    double error = 0.0;
};

/// Tail L2 norms of the coefficient array.
///
///   A_k   = (sum_{i >= k} a_i^2)^(1/2)
///   B_m   = (sum_{|i|_inf >= m} a_i^2)^(1/2)
///   A_[n] = max over axes of A_(1,..,n,..,1)
///
/// Infinite tails of the power-decay family are summed shell by shell
/// (shell s = {i : |i|_inf = s}) up to a direct radius and closed with an
/// Euler-Maclaurin tail whose remainder bound is reported.
///
/// Not thread-safe: results are memoized internally.
class TailCalculator {
public:
    explicit TailCalculator(CoefficientModel model, double tol = 1e-10);

    [[nodiscard]] const CoefficientModel& model() const noexcept { return model_; }

    /// A_k^2 with error bound; negative coordinates are clamped to 0.
    [[nodiscard]] BoundedValue tail_sq(std::span<const std::int64_t> k) const;
    [[nodiscard]] double tail(std::span<const std::int64_t> k) const;
    [[nodiscard]] BoundedValue residual_sq(std::int64_t m) const;
    [[nodiscard]] double residual(std::int64_t m) const;
    /// sum_{k >= 0} a_k^2.
    [[nodiscard]] double total_sq() const;
    /// sum_{k in [0,m)^d} a_k^2, computed directly.
    [[nodiscard]] double truncated_sq(std::int64_t m) const;
    [[nodiscard]] double axis_tail_max(std::int64_t n) const;

    /// sum_{k in [1,n]^d} A_{k-1} / prod_t k_t^(1/2).
    [[nodiscard]] double delta(std::int64_t n) const;

    /// Largest direct-summation radius used so far.
    [[nodiscard]] std::int64_t direct_radius() const noexcept { return direct_radius_; }
    /// Largest tail error bound (on A-scale, not squared) produced so far.
    [[nodiscard]] double max_tail_error() const noexcept { return max_tail_error_; }

private:
    BoundedValue shell_tail_sq(const MultiIndex& k, std::int64_t start_shell) const;
    void note_error(double value_sq, double err_sq) const;

    CoefficientModel model_;
    double tol_;
    mutable std::int64_t direct_radius_ = 0;
    std::vector<double> suffix_;  // finite support: suffix sums of a^2
    mutable double max_tail_error_ = 0.0;
    mutable std::map<MultiIndex, double> tail_cache_;
};

struct CoefficientFunctionals {
    int dim = 1;
    std::int64_t n = 1;
    std::int64_t m = 1;
    std::vector<double> tail_norms;  ///< A_k for k in [0, n)^d, row-major
    double axis_tail_max = 0.0;      ///< A_[n]
    double residual_norm = 0.0;      ///< B_m
    double delta = 0.0;              ///< Delta_n
    std::int64_t truncation_radius = 0;
    double tail_error_bound = 0.0;

    [[nodiscard]] double tail_at(std::span<const std::int64_t> k) const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Throws std::invalid_argument for n, m < 1, tol <= 0, or non-square-summable
/// power-decay models (q <= d/2).
CoefficientFunctionals coefficient_functionals(const CoefficientModel& model, std::int64_t n,
                                               std::int64_t m, double tol = 1e-10);

/// sum_k a_k a_{k+lag} for any signed lag. For power-decay models the sum runs
/// over a box whose tail contribution is bounded by `error` (at most tol unless
/// the box would exceed 2^24 points).
BoundedValue autocovariance(const CoefficientModel& model, std::span<const std::int64_t> lag,
                           double tol = 1e-10);
/// Same sum restricted to k, k+lag in [0,m)^d (covariance of the m-truncated
/// field).
double truncated_autocovariance(const CoefficientModel& model,
                                std::span<const std::int64_t> lag, std::int64_t m);

/// Smallest M >= min_radius with B_M <= bound.
std::int64_t minimal_truncation_radius(const CoefficientModel& model, double bound,
                                       std::int64_t min_radius = 1);

// ---------------------------------------------------------------------------
// Condition checkers

enum class Verdict { Pass, Fail, Inconclusive };

[[nodiscard]] std::string to_string(Verdict v);

/// (lo, hi); emptiness is decided on the exact endpoints.
struct OpenInterval {
    double lo = 0.0;
    double hi = 0.0;
    std::string lo_exact;
    std::string hi_exact;
    bool is_empty = true;
    [[nodiscard]] bool empty() const noexcept { return is_empty; }
};

struct ConditionReport {
    std::string condition;
    Verdict verdict = Verdict::Inconclusive;
    std::string label;
    std::map<std::string, double> diagnostics;
    std::map<std::string, std::vector<double>> sequences;
    std::map<std::string, double> thresholds;
    std::optional<OpenInterval> delta_interval;
    std::optional<double> delta_star;
    std::vector<std::string> notes;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// gamma < d beta / (d + beta) and beta > d, decided exactly. On pass the
/// feasible window for m_n = floor(n^delta) is (gamma/beta, min(gamma/d, 1 - gamma/d)).
ConditionReport check_corollary1(int dim, const Rational& beta, const Rational& gamma);
ConditionReport check_corollary1(int dim, double beta, double gamma);

/// Compares the power-decay requirements of Hallin, Lu and Tran
/// (q > max(d+3, 2d+1/2), n^d b_n^((2q-1+6d)/(2q-1-4d)) -> infinity) against
/// q > 3d/2, gamma < d (q - d/2)/(q + d/2), for b_n = n^(-gamma).
ConditionReport check_hallin(int dim, const Rational& q, const Rational& gamma);
ConditionReport check_hallin(int dim, double q, double gamma);

struct QsumOptions {
    double increment_tol = 1e-12;
};

/// Partial sums of sum_i |i|_inf^q |a_i| over boxes [0,R]^d for dyadic R up to
/// `radius`; pass when the last dyadic increment is below tolerance.
ConditionReport check_machkouri_qsum(const CoefficientModel& model, double q,
                                     std::int64_t radius, const QsumOptions& opt = {});

struct ConditionCOptions {
    /// Final value must fall below ratio * initial value.
    double final_ratio = 1.0;
    double tol = 1e-10;
};

/// Evaluates, for m_n = floor(n^delta),
///   C1: b_n^(1/2) Delta_n      C2: B_{m_n} / b_n
///   C3: m_n^d b_n              C4: m_n^d log^d(n) / (n^d b_n)
/// on the grid. A limit is judged "pass (trend)" when the log-log slope over
/// the last half of the grid is negative and the final value is below
/// final_ratio times the initial one (or exactly zero). C4's trend is judged
/// on m_n^d / (n^d b_n); the log^d factor is reported but not trended.
ConditionReport check_condition_c(const CoefficientModel& model,
                                  const BandwidthSchedule& bandwidth, double delta,
                                  std::span<const std::int64_t> n_grid,
                                  const ConditionCOptions& opt = {});

/// floor(n^delta), at least 1.
std::int64_t m_schedule(std::int64_t n, double delta);

}  // namespace kdelab
