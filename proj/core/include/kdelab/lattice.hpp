#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kdelab {

/// Integer point of Z^d. Length is the dimension.
using MultiIndex = std::vector<std::int64_t>;

/// Row-major box [0, side)^d.
class Box {
public:
    Box() = default;
    Box(int dim, std::int64_t side);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] std::int64_t side() const noexcept { return side_; }
    [[nodiscard]] std::size_t size() const noexcept { return size_; }

    /// Offset of a multi-index; the last coordinate varies fastest.
    [[nodiscard]] std::size_t offset(std::span<const std::int64_t> idx) const;
    [[nodiscard]] MultiIndex index(std::size_t offset) const;
    [[nodiscard]] bool contains(std::span<const std::int64_t> idx) const noexcept;

private:
    int dim_ = 0;
    std::int64_t side_ = 0;
    std::size_t size_ = 0;
};

/// Advances `idx` through [lo, hi]^d (inclusive) in row-major order.
/// Returns false once every point has been visited.
bool next_in_range(MultiIndex& idx, std::int64_t lo, std::int64_t hi);

/// Checked side^dim; throws std::overflow_error past 2^62.
std::size_t checked_power(std::int64_t side, int dim);

[[nodiscard]] std::int64_t sup_norm(std::span<const std::int64_t> idx) noexcept;
[[nodiscard]] std::string to_string(std::span<const std::int64_t> idx);

}  // namespace kdelab
