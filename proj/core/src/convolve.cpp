#include "kdelab/convolve.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include <fftw3.h>

#include "kdelab/lattice.hpp"

namespace kdelab {

std::string to_string(ConvolutionMethod m) {
    switch (m) {
        case ConvolutionMethod::Direct: return "direct";
        case ConvolutionMethod::Fourier: return "fourier";
        case ConvolutionMethod::Auto: return "auto";
    }
    return "unknown";
}

ConvolutionMethod convolution_method_from_string(const std::string& s) {
    if (s == "direct") return ConvolutionMethod::Direct;
    if (s == "fourier") return ConvolutionMethod::Fourier;
    if (s == "auto") return ConvolutionMethod::Auto;
    throw std::invalid_argument("unknown convolution method '" + s + "'");
}

std::int64_t fft_friendly_size(std::int64_t n) {
    if (n < 1) return 1;
    for (std::int64_t c = n;; ++c) {
        std::int64_t r = c;
        for (std::int64_t p : {2, 3, 5, 7}) {
            while (r % p == 0) r /= p;
        }
        if (r == 1) return c;
    }
}

namespace {

// FFTW's planner is not re-entrant; execution of an existing plan on new
// arrays is. Plans are created once per shape and kept for the process
// lifetime. FFTW_ESTIMATE keeps the chosen algorithm, and therefore every
// rounding step, independent of timing.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    std::pair<fftw_plan, fftw_plan> get(int dim, std::int64_t side) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(dim, side);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<int> dims(static_cast<std::size_t>(dim), static_cast<int>(side));
        const std::size_t real_size = checked_power(side, dim);
        const std::size_t complex_size = real_size / static_cast<std::size_t>(side) *
                                         static_cast<std::size_t>(side / 2 + 1);
        double* real = fftw_alloc_real(real_size);
        fftw_complex* spec = fftw_alloc_complex(complex_size);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan forward = fftw_plan_dft_r2c(dim, dims.data(), real, spec, flags);
        fftw_plan backward = fftw_plan_dft_c2r(dim, dims.data(), spec, real, flags);
        fftw_free(real);
        fftw_free(spec);
        if (!forward || !backward) throw std::runtime_error("FFTW plan creation failed");
        plans_.emplace(key, std::make_pair(forward, backward));
        return {forward, backward};
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, std::int64_t>, std::pair<fftw_plan, fftw_plan>> plans_;
};

std::int64_t integer_root(std::size_t size, int dim) {
    const auto guess = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(size), 1.0 / dim)));
    for (std::int64_t s = std::max<std::int64_t>(guess - 1, 1); s <= guess + 1; ++s) {
        if (checked_power(s, dim) == size) return s;
    }
    throw std::invalid_argument("array length " + std::to_string(size) + " is not a perfect " +
                                std::to_string(dim) + "-th power");
}

}  // namespace

double LatticeConvolver::direct_cost(int dim, std::int64_t output_side, std::size_t nonzeros) {
    return static_cast<double>(nonzeros) * std::pow(static_cast<double>(output_side), dim);
}

double LatticeConvolver::fourier_cost(int dim, std::int64_t padded_side, std::size_t kernels) {
    const double points = std::pow(static_cast<double>(padded_side), dim);
    // one forward plus one inverse transform per kernel; constant from bench_convolve
    constexpr double per_point_log = 1.2;
    return per_point_log * points * std::log2(std::max(points, 2.0)) *
           (1.0 + static_cast<double>(kernels));
}

LatticeConvolver::LatticeConvolver(int dim, std::int64_t output_side, std::int64_t kernel_side,
                                   std::vector<std::vector<double>> kernels,
                                   ConvolutionMethod method)
    : dim_(dim), output_side_(output_side), kernel_side_(kernel_side), method_(method),
      kernels_(std::move(kernels)) {
    if (dim < 1) throw std::invalid_argument("convolver: dimension must be >= 1");
    if (output_side < 1 || kernel_side < 1) throw std::invalid_argument("convolver: sides must be >= 1");
    if (kernels_.empty()) throw std::invalid_argument("convolver: no kernels");
    const std::size_t kernel_size = checked_power(kernel_side, dim);
    for (const auto& k : kernels_) {
        if (k.size() != kernel_size) throw std::invalid_argument("convolver: kernel shape mismatch");
    }
    padded_side_ = fft_friendly_size(input_side());

    const Box kbox(dim, kernel_side);
    const Box ibox(dim, input_side());
    std::size_t nonzeros = 0;
    for (const auto& k : kernels_) {
        Sparse sp;
        for (std::size_t off = 0; off < k.size(); ++off) {
            if (k[off] == 0.0) continue;
            auto idx = kbox.index(off);
            for (auto& v : idx) v = kernel_side - 1 - v;
            sp.offsets.push_back(ibox.offset(idx));
            sp.values.push_back(k[off]);
        }
        nonzeros += sp.values.size();
        sparse_.push_back(std::move(sp));
    }

    if (method_ == ConvolutionMethod::Auto) {
        method_ = direct_cost(dim, output_side, nonzeros) <= fourier_cost(dim, padded_side_, kernels_.size())
                      ? ConvolutionMethod::Direct
                      : ConvolutionMethod::Fourier;
    }
    if (method_ == ConvolutionMethod::Fourier) {
        const auto [forward, backward] = PlanCache::instance().get(dim, padded_side_);
        (void)backward;
        const Box pbox(dim, padded_side_);
        std::vector<double> real(pbox.size());
        const std::size_t spec_size = pbox.size() / static_cast<std::size_t>(padded_side_) *
                                      static_cast<std::size_t>(padded_side_ / 2 + 1);
        for (const auto& k : kernels_) {
            std::fill(real.begin(), real.end(), 0.0);
            for (std::size_t off = 0; off < k.size(); ++off) real[pbox.offset(kbox.index(off))] = k[off];
            std::vector<std::complex<double>> spec(spec_size);
            fftw_execute_dft_r2c(forward, real.data(), reinterpret_cast<fftw_complex*>(spec.data()));
            spectra_.push_back(std::move(spec));
        }
    }
}

LatticeConvolver::~LatticeConvolver() = default;
LatticeConvolver::LatticeConvolver(LatticeConvolver&&) noexcept = default;
LatticeConvolver& LatticeConvolver::operator=(LatticeConvolver&&) noexcept = default;

void LatticeConvolver::apply(std::span<const double> input,
                             std::span<const std::span<double>> outputs) const {
    const std::size_t in_size = checked_power(input_side(), dim_);
    const std::size_t out_size = checked_power(output_side_, dim_);
    if (input.size() != in_size) {
        throw std::invalid_argument("convolver: input has " + std::to_string(input.size()) +
                                    " entries, expected " + std::to_string(in_size));
    }
    if (outputs.size() != kernels_.size()) throw std::invalid_argument("convolver: output count mismatch");
    for (const auto& o : outputs) {
        if (o.size() != out_size) throw std::invalid_argument("convolver: output shape mismatch");
    }
    if (method_ == ConvolutionMethod::Direct) {
        apply_direct(input, outputs);
    } else {
        apply_fourier(input, outputs);
    }
}

void LatticeConvolver::apply_direct(std::span<const double> input,
                                    std::span<const std::span<double>> outputs) const {
    const auto n = static_cast<std::size_t>(output_side_);
    const auto in_side = static_cast<std::size_t>(input_side());
    const std::size_t rows = checked_power(output_side_, dim_ - 1);
    // input offset of each output row start
    std::vector<std::size_t> row_offsets(rows);
    {
        MultiIndex r(static_cast<std::size_t>(dim_ - 1), 0);
        for (std::size_t row = 0; row < rows; ++row) {
            std::size_t off = 0;
            for (auto v : r) off = off * in_side + static_cast<std::size_t>(v);
            row_offsets[row] = off * in_side;
            if (dim_ > 1) next_in_range(r, 0, output_side_ - 1);
        }
    }
    for (std::size_t k = 0; k < kernels_.size(); ++k) {
        auto out = outputs[k];
        std::fill(out.begin(), out.end(), 0.0);
        const auto& sp = sparse_[k];
        for (std::size_t row = 0; row < rows; ++row) {
            double* dst = out.data() + row * n;
            const double* src_row = input.data() + row_offsets[row];
            for (std::size_t c = 0; c < sp.values.size(); ++c) {
                const double v = sp.values[c];
                const double* src = src_row + sp.offsets[c];
                for (std::size_t j = 0; j < n; ++j) dst[j] += v * src[j];
            }
        }
    }
}

void LatticeConvolver::apply_fourier(std::span<const double> input,
                                     std::span<const std::span<double>> outputs) const {
    const auto [forward, backward] = PlanCache::instance().get(dim_, padded_side_);
    const Box pbox(dim_, padded_side_);
    const Box ibox(dim_, input_side());
    const Box obox(dim_, output_side_);
    std::vector<double> real(pbox.size(), 0.0);
    {
        // copy input rows into the padded lattice
        const auto in_side = static_cast<std::size_t>(input_side());
        const std::size_t rows = ibox.size() / in_side;
        for (std::size_t row = 0; row < rows; ++row) {
            auto idx = ibox.index(row * in_side);
            std::copy_n(input.data() + row * in_side, in_side, real.data() + pbox.offset(idx));
        }
    }
    const std::size_t spec_size = spectra_.front().size();
    std::vector<std::complex<double>> spec(spec_size);
    std::vector<std::complex<double>> product(spec_size);
    fftw_execute_dft_r2c(forward, real.data(), reinterpret_cast<fftw_complex*>(spec.data()));
    const double norm = 1.0 / static_cast<double>(pbox.size());
    const auto n = static_cast<std::size_t>(output_side_);
    const std::size_t rows = obox.size() / n;
    for (std::size_t k = 0; k < kernels_.size(); ++k) {
        for (std::size_t i = 0; i < spec_size; ++i) product[i] = spec[i] * spectra_[k][i];
        fftw_execute_dft_c2r(backward, reinterpret_cast<fftw_complex*>(product.data()), real.data());
        auto out = outputs[k];
        for (std::size_t row = 0; row < rows; ++row) {
            auto idx = obox.index(row * n);
            for (auto& v : idx) v += kernel_side_ - 1;
            const double* src = real.data() + pbox.offset(idx);
            double* dst = out.data() + row * n;
            for (std::size_t j = 0; j < n; ++j) dst[j] = src[j] * norm;
        }
    }
}

std::vector<double> lattice_convolve(int dim, std::span<const double> input,
                                     std::span<const double> kernel, ConvolutionMethod method) {
    const auto in_side = integer_root(input.size(), dim);
    const auto k_side = integer_root(kernel.size(), dim);
    if (k_side > in_side) throw std::invalid_argument("lattice_convolve: kernel larger than input");
    const auto out_side = in_side - k_side + 1;
    LatticeConvolver conv(dim, out_side, k_side, {std::vector<double>(kernel.begin(), kernel.end())},
                          method);
    std::vector<double> out(checked_power(out_side, dim));
    const std::span<double> views[] = {out};
    conv.apply(input, views);
    return out;
}

}  // namespace kdelab
