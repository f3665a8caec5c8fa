#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kdelab/convolve.hpp"
#include "kdelab/lattice.hpp"

using namespace kdelab;

namespace {

// textbook loop, independent of the sparse implementation
std::vector<double> naive(int dim, const std::vector<double>& in, std::int64_t in_side,
                          const std::vector<double>& ker, std::int64_t k_side) {
    const std::int64_t n = in_side - k_side + 1;
    const Box obox(dim, n), kbox(dim, k_side), ibox(dim, in_side);
    std::vector<double> out(obox.size(), 0.0);
    for (std::size_t o = 0; o < obox.size(); ++o) {
        const auto oi = obox.index(o);
        for (std::size_t k = 0; k < kbox.size(); ++k) {
            const auto ki = kbox.index(k);
            MultiIndex ii(oi.size());
            for (std::size_t t = 0; t < ii.size(); ++t) ii[t] = oi[t] + k_side - 1 - ki[t];
            out[o] += ker[k] * in[ibox.offset(ii)];
        }
    }
    return out;
}

double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    double scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        scale = std::max(scale, std::fabs(b[i]));
        err = std::max(err, std::fabs(a[i] - b[i]));
    }
    return scale > 0 ? err / scale : err;
}

}  // namespace

TEST_CASE("hand convolution") {
    const std::vector<double> in{1, 2, 3, 4};
    const std::vector<double> k{1, 1};
    for (auto method : {ConvolutionMethod::Direct, ConvolutionMethod::Fourier, ConvolutionMethod::Auto}) {
        const auto out = lattice_convolve(1, in, k, method);
        REQUIRE(out.size() == 3);
        CHECK(out[0] == doctest::Approx(3));
        CHECK(out[1] == doctest::Approx(5));
        CHECK(out[2] == doctest::Approx(7));
    }
}

TEST_CASE("delta kernel returns the sub-lattice") {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> nd;
    std::vector<double> in(12 * 12);
    for (auto& v : in) v = nd(gen);
    std::vector<double> k(4 * 4, 0.0);
    k[0] = 1.0;
    const auto out = lattice_convolve(2, in, k, ConvolutionMethod::Direct);
    const Box obox(2, 9), ibox(2, 12);
    for (std::size_t o = 0; o < obox.size(); ++o) {
        auto idx = obox.index(o);
        for (auto& v : idx) v += 3;
        CHECK(out[o] == in[ibox.offset(idx)]);
    }
}

TEST_CASE("fourier matches direct on 8x8 kernel over 32x32") {
    std::mt19937_64 gen(2);
    std::normal_distribution<double> nd;
    std::vector<double> in(32 * 32), k(8 * 8);
    for (auto& v : in) v = nd(gen);
    for (auto& v : k) v = nd(gen);
    const auto d = lattice_convolve(2, in, k, ConvolutionMethod::Direct);
    const auto f = lattice_convolve(2, in, k, ConvolutionMethod::Fourier);
    CHECK(max_rel_err(d, naive(2, in, 32, k, 8)) < 1e-14);
    CHECK(max_rel_err(f, d) < 1e-8);
}

TEST_CASE("randomized shapes agree across methods") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 30; ++trial) {
        const int dim = 1 + static_cast<int>(gen() % 3);
        const std::int64_t max_side = dim == 1 ? 200 : (dim == 2 ? 30 : 10);
        const std::int64_t n = 1 + static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(max_side));
        const std::int64_t m = 1 + static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(max_side / 2));
        std::vector<double> k(checked_power(m, dim));
        for (auto& v : k) v = nd(gen);
        std::vector<double> k2(k.size());
        for (auto& v : k2) v = nd(gen);
        LatticeConvolver direct(dim, n, m, {k, k2}, ConvolutionMethod::Direct);
        LatticeConvolver fourier(dim, n, m, {k, k2}, ConvolutionMethod::Fourier);
        std::vector<double> in(checked_power(n + m - 1, dim));
        for (auto& v : in) v = nd(gen);
        std::vector<double> d1(checked_power(n, dim)), d2(d1.size()), f1(d1.size()), f2(d1.size());
        const std::span<double> dv[] = {d1, d2};
        const std::span<double> fv[] = {f1, f2};
        direct.apply(in, dv);
        fourier.apply(in, fv);
        CHECK(max_rel_err(f1, d1) < 1e-8);
        CHECK(max_rel_err(f2, d2) < 1e-8);
        CHECK(max_rel_err(d1, naive(dim, in, n + m - 1, k, m)) < 1e-13);
    }
}

TEST_CASE("auto resolves to a concrete method and shapes are checked") {
    LatticeConvolver small(1, 10, 2, {{1.0, 1.0}}, ConvolutionMethod::Auto);
    CHECK(small.method() == ConvolutionMethod::Direct);
    LatticeConvolver big(2, 256, 64, {std::vector<double>(64 * 64, 1.0)}, ConvolutionMethod::Auto);
    CHECK(big.method() == ConvolutionMethod::Fourier);
    std::vector<double> wrong(5), out(10);
    const std::span<double> ov[] = {out};
    CHECK_THROWS(small.apply(wrong, ov));
    const std::vector<double> in(9), ker(4);
    CHECK_THROWS(lattice_convolve(1, in, std::vector<double>(20), ConvolutionMethod::Direct));
    CHECK_THROWS(lattice_convolve(2, std::vector<double>(10), ker, ConvolutionMethod::Direct));
}

TEST_CASE("fft friendly sizes") {
    CHECK(fft_friendly_size(11) == 12);
    CHECK(fft_friendly_size(97) == 98);
    CHECK(fft_friendly_size(64) == 64);
    CHECK(fft_friendly_size(1) == 1);
    CHECK(convolution_method_from_string("fourier") == ConvolutionMethod::Fourier);
    CHECK_THROWS((void)convolution_method_from_string("fast"));
}
