#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "cdsite/finite_space.hpp"
#include "cdsite/residue.hpp"
#include "cdsite/site.hpp"

namespace cdsite {

/// The residue order k ≤ K.
const ResidueOrder& two_symbol_order();

/// Posets on at most `max_points` points labeled from `labels`, one per isomorphism class.
std::vector<FiniteSpace> labeled_posets(int max_points, const std::vector<std::string>& labels);

/// Hand-picked spaces on five and six points.
std::vector<FiniteSpace> larger_fixtures();

struct FamilySiteOptions {
    /// Add U ⊔ V for each cover of the base by two overlapping proper opens (or closeds), restricted to
    /// every locally closed subset.
    bool double_covers = true;
    /// Use at most this many covers of the base, in enumeration order.
    std::size_t max_covers = 64;
    /// Add locally closed subsets with the symbols of a closed part raised to the top symbol.
    bool raised = true;
    std::size_t cap = 400;
};

/**
 * A site of spaces over `base`: its locally closed subsets, optionally double
 * covers and label-raised copies, deduplicated up to isomorphism over the base.
 * Every object type is stable under restriction to a locally closed subset.
 * Throws Error when more than `cap` objects arise.
 */
std::shared_ptr<const SiteCategory> family_site(const FiniteSpace& base, const ResidueOrder& residues,
                                                const FamilySiteOptions& options = {});

struct FamilyInstance {
    FiniteSpace base;
    FamilySiteOptions options;
};

/**
 * Bases for the axiom suite: every labeled poset on at most four points with
 * symbols k ≤ K, then the larger fixtures. Site richness tapers with size:
 * all covers up to three points, two covers on four, one on the fixtures.
 */
std::vector<FamilyInstance> axiom_family();

}  // namespace cdsite
