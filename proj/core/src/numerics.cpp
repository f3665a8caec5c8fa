#include "kdelab/numerics.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace kdelab {

double compensated_sum(std::span<const double> values) noexcept {
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

namespace {

struct SimpsonState {
    const std::function<double(double)>& f;
    int max_depth;
    int evaluations = 0;
    CompensatedSum error;
};

double simpson_step(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = st.f(lm);
    const double frm = st.f(rm);
    st.evaluations += 2;
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth >= st.max_depth || std::fabs(delta) <= 15.0 * tol) {
        st.error.add(std::fabs(delta) / 15.0);
        return left + right + delta / 15.0;
    }
    return simpson_step(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           simpson_step(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double tol, int max_depth) {
    if (!(tol > 0.0)) throw std::invalid_argument("adaptive_simpson: tol must be positive");
    if (a == b) return {};
    SimpsonState st{f, max_depth, 0, {}};
    // Pre-split into panels so narrow features are not missed by the first
    // five-point estimate.
    constexpr int panels = 16;
    const double h = (b - a) / panels;
    CompensatedSum total;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + h * p;
        const double hi = (p + 1 == panels) ? b : a + h * (p + 1);
        const double flo = f(lo);
        const double fhi = f(hi);
        const double fmid = f(0.5 * (lo + hi));
        st.evaluations += 3;
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total.add(simpson_step(st, lo, hi, flo, fmid, fhi, whole, tol / panels, 0));
    }
    return {total.value(), st.error.value(), st.evaluations};
}

SampleMoments sample_moments(std::span<const double> values) {
    SampleMoments out;
    out.count = values.size();
    if (values.empty()) return out;
    const double n = static_cast<double>(values.size());
    out.mean = compensated_sum(values) / n;
    CompensatedSum m2;
    CompensatedSum m3;
    CompensatedSum m4;
    for (double v : values) {
        const double c = v - out.mean;
        const double c2 = c * c;
        m2.add(c2);
        m3.add(c2 * c);
        m4.add(c2 * c2);
    }
    const double s2 = m2.value() / n;
    out.variance = values.size() > 1 ? m2.value() / (n - 1.0) : 0.0;
    if (s2 > 0.0) {
        out.skewness = (m3.value() / n) / std::pow(s2, 1.5);
        out.excess_kurtosis = (m4.value() / n) / (s2 * s2) - 3.0;
    }
    return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double mx = compensated_sum(lx) / static_cast<double>(lx.size());
    const double my = compensated_sum(ly) / static_cast<double>(ly.size());
    CompensatedSum sxy;
    CompensatedSum sxx;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy.add((lx[i] - mx) * (ly[i] - my));
        sxx.add((lx[i] - mx) * (lx[i] - mx));
    }
    return sxy.value() / sxx.value();
}

double sample_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("sample_correlation: need two equal samples of size >= 2");
    }
    const double n = static_cast<double>(a.size());
    const double ma = compensated_sum(a) / n;
    const double mb = compensated_sum(b) / n;
    CompensatedSum sab;
    CompensatedSum saa;
    CompensatedSum sbb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab.add(da * db);
        saa.add(da * da);
        sbb.add(db * db);
    }
    const double denom = std::sqrt(saa.value() * sbb.value());
    return denom > 0.0 ? sab.value() / denom : 0.0;
}

}  // namespace kdelab
