#include <doctest.h>

#include <cmath>
#include <vector>

#include "kdelab/numerics.hpp"
#include "kdelab/rng.hpp"

using namespace kdelab;

TEST_CASE("philox4x32-10 known answers") {
    // Random123 kat_vectors
    const auto zero = philox4x32_10({0, 0, 0, 0}, {0, 0});
    CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5U, 0xe169c58dU, 0xbc57ac4cU, 0x9b00dbd8U});
    const auto ones = philox4x32_10({0xffffffffU, 0xffffffffU, 0xffffffffU, 0xffffffffU},
                                    {0xffffffffU, 0xffffffffU});
    CHECK(ones == std::array<std::uint32_t, 4>{0x408f276dU, 0x41c83b0eU, 0xa20bc7c6U, 0x6d5451fdU});
    const auto pi = philox4x32_10({0x243f6a88U, 0x85a308d3U, 0x13198a2eU, 0x03707344U},
                                  {0xa4093822U, 0x299f31d0U});
    CHECK(pi == std::array<std::uint32_t, 4>{0xd16cfe09U, 0x94fdccebU, 0x5001e420U, 0x24126ea1U});
}

TEST_CASE("same seed gives same stream, different seeds differ") {
    CounterRng a({42, 1, 7});
    CounterRng b({42, 1, 7});
    CounterRng c({42, 1, 8});
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs = differs || x != c.next_u64();
    }
    CHECK(differs);
}

TEST_CASE("uniform stays in the open unit interval with the right moments") {
    CounterRng rng({1, 0, 0});
    std::vector<double> u(200000);
    for (auto& v : u) {
        v = rng.uniform();
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
    }
    const auto m = sample_moments(u);
    CHECK(std::fabs(m.mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / 200000.0));
    CHECK(std::fabs(m.variance - 1.0 / 12.0) < 0.002);
}

TEST_CASE("normal draws have unit variance") {
    CounterRng rng({3, 0, 0});
    std::vector<double> z(200000);
    for (auto& v : z) v = rng.normal();
    const auto m = sample_moments(z);
    CHECK(std::fabs(m.mean) < 4.0 / std::sqrt(200000.0));
    CHECK(std::fabs(m.variance - 1.0) < 0.015);
    CHECK(std::fabs(m.excess_kurtosis) < 0.05);
}
