#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace cdsite {

/// Subset of the points of a FiniteSpace, one bit per point index.
using PointSet = std::uint64_t;

inline constexpr int kMaxPoints = 64;

constexpr PointSet bit(int i) { return PointSet{1} << i; }
constexpr bool contains(PointSet s, int i) { return (s >> i) & 1U; }
constexpr bool subset_of(PointSet a, PointSet b) { return (a & ~b) == 0; }
constexpr PointSet full_set(int n) { return n >= 64 ? ~PointSet{0} : bit(n) - 1; }
inline int cardinality(PointSet s) { return std::popcount(s); }

inline std::vector<int> members(PointSet s)
{
    std::vector<int> out;
    while (s != 0) {
        out.push_back(std::countr_zero(s));
        s &= s - 1;
    }
    return out;
}

}  // namespace cdsite
