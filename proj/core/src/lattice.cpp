#include "kdelab/lattice.hpp"

#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace kdelab {

std::size_t checked_power(std::int64_t side, int dim) {
    if (side < 0 || dim < 0) {
        throw std::invalid_argument("checked_power: negative argument");
    }
    constexpr std::uint64_t limit = std::uint64_t{1} << 62;
    std::uint64_t acc = 1;
    for (int k = 0; k < dim; ++k) {
        if (side != 0 && acc > limit / static_cast<std::uint64_t>(side)) {
            throw std::overflow_error("lattice size overflows");
        }
        acc *= static_cast<std::uint64_t>(side);
    }
    return static_cast<std::size_t>(acc);
}

Box::Box(int dim, std::int64_t side) : dim_(dim), side_(side) {
    if (dim < 1) throw std::invalid_argument("Box: dimension must be >= 1");
    if (side < 1) throw std::invalid_argument("Box: side must be >= 1");
    size_ = checked_power(side, dim);
}

std::size_t Box::offset(std::span<const std::int64_t> idx) const {
    std::size_t off = 0;
    for (int t = 0; t < dim_; ++t) {
        off = off * static_cast<std::size_t>(side_) + static_cast<std::size_t>(idx[t]);
    }
    return off;
}

MultiIndex Box::index(std::size_t offset) const {
    MultiIndex idx(static_cast<std::size_t>(dim_));
    for (int t = dim_ - 1; t >= 0; --t) {
        idx[static_cast<std::size_t>(t)] =
            static_cast<std::int64_t>(offset % static_cast<std::size_t>(side_));
        offset /= static_cast<std::size_t>(side_);
    }
    return idx;
}

bool Box::contains(std::span<const std::int64_t> idx) const noexcept {
    if (static_cast<int>(idx.size()) != dim_) return false;
    for (auto v : idx) {
        if (v < 0 || v >= side_) return false;
    }
    return true;
}

bool next_in_range(MultiIndex& idx, std::int64_t lo, std::int64_t hi) {
    for (std::size_t t = idx.size(); t-- > 0;) {
        if (idx[t] < hi) {
            ++idx[t];
            return true;
        }
        idx[t] = lo;
    }
    return false;
}

std::int64_t sup_norm(std::span<const std::int64_t> idx) noexcept {
    std::int64_t m = 0;
    for (auto v : idx) m = std::max(m, v < 0 ? -v : v);
    return m;
}

std::string to_string(std::span<const std::int64_t> idx) {
    std::string s = "(";
    for (std::size_t t = 0; t < idx.size(); ++t) {
        if (t) s += ",";
        s += std::to_string(idx[t]);
    }
    return s + ")";
}

}  // namespace kdelab
