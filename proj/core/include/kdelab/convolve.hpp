#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace kdelab {

enum class ConvolutionMethod { Direct, Fourier, Auto };

[[nodiscard]] std::string to_string(ConvolutionMethod m);
[[nodiscard]] ConvolutionMethod convolution_method_from_string(const std::string& s);

/// Smallest integer >= n whose only prime factors are 2, 3, 5 and 7.
[[nodiscard]] std::int64_t fft_friendly_size(std::int64_t n);

/// Valid-region causal convolution on [0, n)^d:
///
///   out[o] = sum_{k in [0,M)^d} kernel[k] * input[o + (M-1) - k]
///
/// with an input lattice of side n + M - 1. Several kernels of the same side
/// share one forward transform of the input. apply() is const and allocates
/// its own scratch, so one convolver may be used from many threads.
class LatticeConvolver {
public:
    LatticeConvolver(int dim, std::int64_t output_side, std::int64_t kernel_side,
                     std::vector<std::vector<double>> kernels, ConvolutionMethod method);
    ~LatticeConvolver();
    LatticeConvolver(LatticeConvolver&&) noexcept;
    LatticeConvolver& operator=(LatticeConvolver&&) noexcept;

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] std::int64_t output_side() const noexcept { return output_side_; }
    [[nodiscard]] std::int64_t kernel_side() const noexcept { return kernel_side_; }
    [[nodiscard]] std::int64_t input_side() const noexcept { return output_side_ + kernel_side_ - 1; }
    /// Resolved method (never Auto).
    [[nodiscard]] ConvolutionMethod method() const noexcept { return method_; }
    [[nodiscard]] std::int64_t padded_side() const noexcept { return padded_side_; }
    [[nodiscard]] std::size_t kernel_count() const noexcept { return kernels_.size(); }

    /// outputs.size() must equal kernel_count(); each output has n^d entries.
    void apply(std::span<const double> input, std::span<const std::span<double>> outputs) const;

    /// Operation-count estimates used by Auto.
    static double direct_cost(int dim, std::int64_t output_side, std::size_t nonzeros);
    static double fourier_cost(int dim, std::int64_t padded_side, std::size_t kernels);

private:
    struct Sparse {
        std::vector<std::size_t> offsets;  // input offset of the first output
        std::vector<double> values;
    };

    void apply_direct(std::span<const double> input, std::span<const std::span<double>> outputs) const;
    void apply_fourier(std::span<const double> input,
                       std::span<const std::span<double>> outputs) const;

    int dim_;
    std::int64_t output_side_;
    std::int64_t kernel_side_;
    std::int64_t padded_side_ = 0;
    ConvolutionMethod method_;
    std::vector<std::vector<double>> kernels_;
    std::vector<Sparse> sparse_;
    std::vector<std::vector<std::complex<double>>> spectra_;
};

/// One-shot convenience wrapper; sides are inferred from the array lengths.
std::vector<double> lattice_convolve(int dim, std::span<const double> input,
                                     std::span<const double> kernel, ConvolutionMethod method);

}  // namespace kdelab
