#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cdsite/finite_space.hpp"
#include "cdsite/residue.hpp"

namespace cdsite {

/**
 * A commuting square of finite spaces
 *
 *     B --p_b--> Y
 *     |          |
 *    e_b         p
 *     v          v
 *     A ---e---> X
 */
struct ConcreteSquare {
    FiniteSpace x, a, y, b;
    std::vector<int> e;    ///< A → X
    std::vector<int> p;    ///< Y → X
    std::vector<int> e_b;  ///< B → A
    std::vector<int> p_b;  ///< B → Y
};

bool commutes(const ConcreteSquare& q);

/// B maps bijectively and order-isomorphically onto A ×_X Y, with each label the join of its two images.
bool is_pullback_square(const ConcreteSquare& q, const ResidueOrder& residues = ResidueOrder::trivial());

/// Completes e and p to a square by the fiber product. Throws MissingPullback.
ConcreteSquare complete_square(const FiniteSpace& x, const FiniteSpace& a, std::vector<int> e,
                               const FiniteSpace& y, std::vector<int> p,
                               const ResidueOrder& residues = ResidueOrder::trivial());

/// The square obtained by restricting X to X', A to A' and Y to Y' (B' is their pullback inside B).
/// Requires e(A') and p(Y') inside X'.
ConcreteSquare restrict_square(const ConcreteSquare& q, PointSet x_part, PointSet a_part, PointSet y_part);

// --- The nine standard structures --------------------------------------------

enum class StructureName { add, p_up, up, p_low, p, p_low_up, low, low_p_up, cdh };

const std::array<StructureName, 9>& all_structures();
std::string_view to_string(StructureName name);
std::optional<StructureName> parse_structure(std::string_view text);

/// The twelve arrows of the 3×3 inclusion diagram.
std::vector<std::pair<StructureName, StructureName>> lattice_inclusions();
/// Reflexive-transitive closure of the diagram.
bool lattice_leq(StructureName smaller, StructureName larger);
/// The basic structures among add, p.up, up, p.low, low whose union is `name`.
std::vector<StructureName> generating_structures(StructureName name);

/// Shape test for one of the five basic structures or their unions. Includes the pullback check.
bool classify_square(const ConcreteSquare& q, StructureName name,
                     const ResidueOrder& residues = ResidueOrder::trivial());

/**
 * A cd-structure: a predicate on commuting squares. The leg filters are
 * necessary conditions on e and p alone, used to prune enumeration.
 * `jointly_surjective` promises that every distinguished square has
 * X = e(A) ∪ p(Y), which lets searches skip hopeless candidates.
 */
struct CdStructure {
    std::string name;
    std::function<bool(const ConcreteSquare&, const ResidueOrder&)> predicate;
    std::function<bool(const FiniteSpace&, const FiniteSpace&, Graph)> left_filter;
    std::function<bool(const FiniteSpace&, const FiniteSpace&, Graph)> right_filter;
    bool jointly_surjective = false;

    bool admits(const ConcreteSquare& q, const ResidueOrder& residues) const { return predicate(q, residues); }
};

CdStructure standard_structure(StructureName name);

// --- Derived square ----------------------------------------------------------------

/// The square B×_A B → Y×_X Y together with the diagonal Y → Y×_X Y.
struct DerivedSquare {
    FiberProduct yy;                ///< Y ×_X Y
    FiberProduct bb;                ///< B ×_A B
    std::vector<int> bb_to_yy;      ///< (b1, b2) ↦ (p_b b1, p_b b2)
    std::vector<int> diagonal;      ///< y ↦ (y, y)
};

/// Throws MissingPullback when either fiber product has no label join.
DerivedSquare derived_square(const ConcreteSquare& q, const ResidueOrder& residues = ResidueOrder::trivial());

/// Y×_X Y is the union of the image of B×_A B and the diagonal, as point sets.
bool derived_identity_holds(const DerivedSquare& d);

/// The sub-square with Y replaced by p⁻¹(X − e(A)) and B by its (empty when e(A) is open and closed) pullback.
ConcreteSquare additive_core(const ConcreteSquare& q);

}  // namespace cdsite
