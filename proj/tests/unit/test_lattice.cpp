#include <doctest.h>

#include "kdelab/lattice.hpp"

using namespace kdelab;

TEST_CASE("box offsets are row-major and invertible") {
    Box box(3, 4);
    CHECK(box.size() == 64);
    const MultiIndex idx{1, 2, 3};
    CHECK(box.offset(idx) == 1 * 16 + 2 * 4 + 3);
    for (std::size_t off = 0; off < box.size(); ++off) CHECK(box.offset(box.index(off)) == off);
    CHECK(box.contains(idx));
    CHECK_FALSE(box.contains(MultiIndex{4, 0, 0}));
    CHECK_FALSE(box.contains(MultiIndex{-1, 0, 0}));
}

TEST_CASE("next_in_range visits every point once") {
    MultiIndex idx{1, 1};
    int count = 1;
    while (next_in_range(idx, 1, 3)) ++count;
    CHECK(count == 9);
}

TEST_CASE("checked_power and sup_norm") {
    CHECK(checked_power(7, 3) == 343);
    CHECK(checked_power(5, 0) == 1);
    CHECK_THROWS(checked_power(1 << 20, 4));
    CHECK(sup_norm(MultiIndex{3, -7, 2}) == 7);
    CHECK(to_string(MultiIndex{1, 2}) == "(1,2)");
}
