#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <nlohmann/json.hpp>

namespace kdelab {

/// Identifies one reproducible random stream.
struct SeedSpec {
    std::uint64_t master = 0;
    std::uint64_t stream = 0;
    std::uint64_t replicate = 0;

    bool operator==(const SeedSpec&) const = default;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based generator. The key and the upper counter words are a hash of
/// the SeedSpec triple; the lower 64 counter bits enumerate blocks. Output is
/// a pure function of (seed, draw position), so streams can be created in any
/// order on any thread.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(const SeedSpec& seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return next_u64(); }
    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal() noexcept;

    [[nodiscard]] const SeedSpec& seed() const noexcept { return seed_; }

private:
    void refill() noexcept;

    SeedSpec seed_;
    std::array<std::uint32_t, 2> key_{};
    std::uint32_t stream_hi_ = 0;
    std::uint32_t stream_lo_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// splitmix64 finalizer.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace kdelab
