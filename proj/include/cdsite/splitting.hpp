#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "cdsite/finite_space.hpp"
#include "cdsite/squares.hpp"

namespace cdsite {

enum class Side { upper, lower };
std::string_view to_string(Side side);

/**
 * Closed subsets X = Z_0 ⊋ Z_1 ⊋ … ⊋ Z_n ⊋ ∅ with a section of f over each
 * stratum Z_i − Z_{i+1}. `sections[i][x]` is the lift of x for x in the
 * stratum and -1 elsewhere.
 */
struct SplittingSequence {
    std::vector<PointSet> closed;
    std::vector<std::vector<int>> sections;

    int length() const { return static_cast<int>(closed.size()) - 1; }
    PointSet stratum(int i) const;
};

/// Every point of the target has a preimage carrying the same residue symbol.
bool has_residue_iso_lifts(const SpaceMap& f);

/// A monotone label-preserving section of f over the subspace `over`, or nullopt.
std::optional<std::vector<int>> find_section(const SpaceMap& f, PointSet over);

bool is_splitting_sequence(const SpaceMap& f, const SplittingSequence& s);

/**
 * Greedy stratification: Z_{i+1} is Z_i minus its largest open admitting a
 * section (ties broken by the lexicographically smallest index list).
 * nullopt exactly when some point has no residue-preserving lift.
 */
std::optional<SplittingSequence> splitting_sequence(const SpaceMap& f);

/// Throws WrongMorphismClass unless f is étale-like (upper) or proper-like (lower).
bool is_cd_covering(const SpaceMap& f, Side side, const ResidueOrder& residues = ResidueOrder::trivial());

/**
 * Simple covering built from distinguished squares of concrete spaces. Each
 * node remembers how its object maps to the base of f; leaves carry a lift
 * through f (or are empty).
 */
struct CoveringTree {
    FiniteSpace object;
    std::vector<int> to_base;
    std::optional<ConcreteSquare> square;
    std::vector<int> lift;
    std::vector<CoveringTree> children;

    bool is_leaf() const { return !square.has_value(); }
    int depth() const;
};

/// Throws NotACovering when f has no splitting sequence, WrongMorphismClass as for is_cd_covering.
CoveringTree covering_decomposition(const SpaceMap& f, Side side,
                                    const ResidueOrder& residues = ResidueOrder::trivial());

/// Squares are upper (resp. lower) distinguished and chain correctly; every leaf factors through f.
bool is_valid_decomposition(const SpaceMap& f, Side side, const CoveringTree& tree,
                            const ResidueOrder& residues = ResidueOrder::trivial());

}  // namespace cdsite
