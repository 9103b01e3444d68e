#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cdsite/covering.hpp"
#include "cdsite/sheaves.hpp"

namespace cdsite {

/// Verdict of an axiom check. On failure, `square` (and for completeness `morphism`) point at the culprit.
struct AxiomReport {
    std::string axiom;
    Verdict verdict = Verdict::inconclusive;
    int square = -1;
    int morphism = -1;
    int density_index = -1;
    std::string reason;
    std::size_t checked = 0;
};

/**
 * For every distinguished square over X and every f: X' → X, the pulled-back
 * sieve f*(e, p) contains a simple covering. `depth` defaults to
 * max(dim X, dim X') + 2 per check.
 */
AxiomReport is_complete(const CdSite& cd, const CoveringOracle& oracle, std::optional<int> depth = std::nullopt);

/// Presheaves and map ρ(Y) ⊔ ρ(B)×_ρ(A)ρ(B) → ρ(Y)×_ρ(X)ρ(Y) attached to a square.
struct RegularityMap {
    Presheaf source;
    Presheaf target;
    PresheafMap map;
};
RegularityMap regularity_map(const CdSite& cd, int square);

/**
 * Each square is a pullback, each e is a monomorphism, and the regularity map is
 * locally surjective. `depth` defaults to the largest object dimension + 2.
 */
AxiomReport is_regular(const CdSite& cd, const CoveringOracle& oracle, std::optional<int> depth = std::nullopt);

/// A sub-square Q' ⊆ Q given by the corners it keeps.
struct SubSquare {
    PointSet x = 0, a = 0, y = 0, b = 0;
};

struct ReducingResult {
    bool reducing = false;
    /// Smallest members of D_d(A), D_d(Y), D_{d-1}(B); every other triple contains them.
    PointSet a0 = 0, y0 = 0, b0 = 0;
    /// A distinguished sub-square with X' in D_d(X) fitting inside the smallest triple, hence inside every triple.
    std::optional<SubSquare> witness;
};

/**
 * Whether Q is reducing for the standard density structure at index d ≥ 1:
 * for all B0 ∈ D_{d-1}(B), A0 ∈ D_d(A), Y0 ∈ D_d(Y) some distinguished
 * sub-square Q' with X' ∈ D_d(X) has A' ⊆ A0, Y' ⊆ Y0, B' ⊆ B0.
 */
ReducingResult is_reducing(const ConcreteSquare& q, const CdStructure& structure, const ResidueOrder& residues,
                           int d);

/// Q with Y replaced by the closure of p⁻¹(X − e(A)).
ConcreteSquare closure_refinement(const ConcreteSquare& q);

/// Each square has a distinguished refinement (itself or its closure refinement) reducing for 1 ≤ d ≤ dim X + 1.
AxiomReport is_bounded(const CdSite& cd);

}  // namespace cdsite
