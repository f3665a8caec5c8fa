#include <doctest.h>

#include <atomic>
#include <stdexcept>
#include <vector>

#include "kdelab/parallel.hpp"

using namespace kdelab;

TEST_CASE("every index runs exactly once") {
    for (int threads : {1, 3, 8}) {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
        for (auto& h : hits) CHECK(h.load() == 1);
    }
}

TEST_CASE("lowest failing index is rethrown") {
    auto body = [](std::size_t i) {
        if (i == 7) throw std::runtime_error("seven");
        if (i == 40) throw std::runtime_error("forty");
    };
    for (int threads : {1, 4}) {
        try {
            parallel_for(100, threads, body);
            FAIL("expected an exception");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "seven");
        }
    }
}

TEST_CASE("zero count and thread resolution") {
    parallel_for(0, 4, [](std::size_t) { FAIL("should not run"); });
    CHECK(resolve_threads(3) == 3);
    CHECK(resolve_threads(0) >= 1);
}
