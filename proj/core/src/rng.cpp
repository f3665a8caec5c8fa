#include "kdelab/rng.hpp"

#include <cmath>
#include <numbers>

namespace kdelab {

nlohmann::json SeedSpec::to_json() const {
    return {{"master", master}, {"stream", stream}, {"replicate", replicate}};
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t m0 = 0xD2511F53U;
    constexpr std::uint32_t m1 = 0xCD9E8D57U;
    constexpr std::uint32_t w0 = 0x9E3779B9U;
    constexpr std::uint32_t w1 = 0xBB67AE85U;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

CounterRng::CounterRng(const SeedSpec& seed) noexcept : seed_(seed) {
    std::uint64_t h = mix64(seed.master);
    h = mix64(h ^ (seed.stream * 0xD6E8FEB86659FD93ULL));
    h = mix64(h ^ (seed.replicate * 0xA0761D6478BD642FULL));
    const std::uint64_t h2 = mix64(h ^ 0xE7037ED1A0B428DBULL);
    key_ = {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    stream_lo_ = static_cast<std::uint32_t>(h2);
    stream_hi_ = static_cast<std::uint32_t>(h2 >> 32);
}

void CounterRng::refill() noexcept {
    buffer_ = philox4x32_10({static_cast<std::uint32_t>(block_),
                             static_cast<std::uint32_t>(block_ >> 32), stream_lo_, stream_hi_},
                            key_);
    ++block_;
    pos_ = 0;
}

std::uint32_t CounterRng::next_u32() noexcept {
    if (pos_ >= 4) refill();
    return buffer_[static_cast<std::size_t>(pos_++)];
}

std::uint64_t CounterRng::next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
}

double CounterRng::uniform() noexcept {
    // (k + 1/2) / 2^53 for k in [0, 2^53): never 0 or 1
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace kdelab
