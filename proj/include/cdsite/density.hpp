#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "cdsite/finite_space.hpp"

namespace cdsite {

// --- Topology of a finite space --------------------------------------------

/// Down-closure {x : x <= y for some y in s}. Throws UnknownPoint for bits outside the space.
PointSet closure(const FiniteSpace& space, PointSet s);
/// Up-closure, i.e. the smallest open set containing s.
PointSet generization(const FiniteSpace& space, PointSet s);

bool is_open(const FiniteSpace& space, PointSet s);
bool is_closed(const FiniteSpace& space, PointSet s);
/// Intersection of an open and a closed set; for posets, exactly the convex subsets.
bool is_locally_closed(const FiniteSpace& space, PointSet s);

/// All open subsets, in increasing numeric order of their bitmasks.
std::vector<PointSet> open_subsets(const FiniteSpace& space);
std::vector<PointSet> closed_subsets(const FiniteSpace& space);
std::vector<PointSet> locally_closed_subsets(const FiniteSpace& space);

PointSet maximal_points(const FiniteSpace& space, PointSet within);

/// True iff closure(U) is everything, i.e. U holds every maximal point. Throws NotOpen.
bool is_dense_open(const FiniteSpace& space, PointSet open);

// --- Increasing sequences and density -----------------------------------------

/// Length of the longest strict chain z = x0 < x1 < ... starting at z.
int chain_height(const FiniteSpace& space, int z);
bool has_increasing_sequence(const FiniteSpace& space, int z, int length);
/// The lexicographically smallest longest chain starting at z.
std::vector<int> longest_chain_from(const FiniteSpace& space, int z);
/// Length of the longest strict chain; -1 for the empty space.
int dimension(const FiniteSpace& space);
bool is_increasing_sequence(const FiniteSpace& space, const std::vector<int>& chain);

/// D_d(X): opens U such that every point outside U starts an increasing sequence of length d.
std::vector<PointSet> density_class(const FiniteSpace& space, int d);
bool in_density_class(const FiniteSpace& space, PointSet open, int d);
/// The smallest member of D_d(X). D_d(X) is closed under intersection, so this is well defined.
PointSet smallest_dense(const FiniteSpace& space, int d);

/**
 * Memoizes density classes per (space, d). Thread-safe; results are always
 * equal to a fresh `density_class` call.
 */
class DensityStructure {
public:
    const std::vector<PointSet>& classes(const FiniteSpace& space, int d);

private:
    std::mutex mutex_;
    std::map<std::vector<PointSet>, std::map<int, std::vector<PointSet>>> cache_;
};

// --- Chain repair ------------------------------------------------------------------

/**
 * Why a middle point could not be repaired: inside the interval [x0, x2]
 * every point except the top x2 lies in Z, so x2 is a locally closed point of
 * a local space of dimension >= 2. Scheme spaces never have such points.
 */
struct RepairFailure {
    int bottom = -1;
    int top = -1;
    PointSet closed = 0;    ///< Z
    PointSet interval = 0;  ///< {y : bottom <= y <= top}
};

/// Recomputes a RepairFailure from scratch and reports whether it is genuine.
bool verify_repair_failure(const FiniteSpace& space, const RepairFailure& failure);

struct Repair {
    std::optional<int> middle;
    std::optional<RepairFailure> failure;
};

/**
 * Given x0 < x1 < x2 and a closed Z with x2 outside Z, returns x1' outside Z
 * with x0 < x1' < x2. Keeps x1 when it already works, otherwise the smallest
 * identifier. Throws PreconditionViolated for malformed input.
 */
Repair repair_middle(const FiniteSpace& space, int x0, int x1, int x2, PointSet closed);

struct ChainRefinement {
    std::optional<std::vector<int>> chain;
    std::optional<RepairFailure> failure;
};

/**
 * Rebuilds an increasing sequence x0 < ... < xd so that every point after x0
 * lies in the dense open U: the top point is replaced first, then each
 * middle point is repaired against Z = X - U walking downwards.
 */
ChainRefinement refine_chain_through_dense(const FiniteSpace& space, PointSet dense_open,
                                           const std::vector<int>& chain);

/// Some y in Y with y' <= y; the smallest identifier wins. Requires y' in closure(Y).
int closure_witness(const FiniteSpace& space, PointSet subset, int point);

/// W = Y - closure(f(X - V)), without checking any hypothesis.
PointSet pushforward_complement(const SpaceMap& f, PointSet dense_source);

/**
 * Open W in D_d(Y) with f⁻¹(W) inside V. Requires f⁻¹(U) dense in X, the fibers
 * of f over U to be antichains, and V in D_d(X); throws PreconditionViolated.
 */
PointSet pushforward_density(const SpaceMap& f, PointSet open_target, PointSet dense_source, int d);

}  // namespace cdsite
