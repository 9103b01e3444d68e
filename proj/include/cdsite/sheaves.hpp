#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdsite/covering.hpp"
#include "cdsite/site.hpp"

namespace cdsite {

/**
 * A presheaf of finite sets on a site. Sections over object X are 0..size(X)-1;
 * `restrict(m, s)` is F(m)(s) for m: U → X and s in F(X).
 */
class Presheaf {
public:
    /// Throws ValidationError ("functoriality", "section-range") when the data is not a presheaf.
    Presheaf(std::shared_ptr<const SiteCategory> site, std::vector<int> sizes,
             std::vector<std::vector<int>> restrictions, std::vector<std::vector<std::string>> names = {});
    /// Checks only the section ranges; for data that is functorial by construction.
    static Presheaf from_functorial(std::shared_ptr<const SiteCategory> site, std::vector<int> sizes,
                                    std::vector<std::vector<int>> restrictions,
                                    std::vector<std::vector<std::string>> names = {});

    const SiteCategory& site() const { return *site_; }
    const std::shared_ptr<const SiteCategory>& site_ptr() const { return site_; }
    int size(int object) const { return sizes_[object]; }
    const std::vector<int>& sizes() const { return sizes_; }
    int restrict(int morphism, int section) const { return restrictions_[morphism][section]; }
    const std::vector<int>& restriction(int morphism) const { return restrictions_[morphism]; }
    /// Display name of a section; defaults to its index.
    std::string section_name(int object, int section) const;

private:
    Presheaf(std::shared_ptr<const SiteCategory> site, std::vector<int> sizes,
             std::vector<std::vector<int>> restrictions, std::vector<std::vector<std::string>> names,
             bool check_functoriality);

    std::shared_ptr<const SiteCategory> site_;
    std::vector<int> sizes_;
    std::vector<std::vector<int>> restrictions_;
    std::vector<std::vector<std::string>> names_;
};

/// ρ(Z): sections over U are the morphisms U → Z, restricted by precomposition.
Presheaf representable(const std::shared_ptr<const SiteCategory>& site, int z);
/// The same n-element set over every object, identity restrictions.
Presheaf constant_presheaf(const std::shared_ptr<const SiteCategory>& site, int n);

/// A natural transformation given componentwise: component[X][s] ∈ G(X) for s ∈ F(X).
struct PresheafMap {
    std::vector<std::vector<int>> component;
};
bool is_natural(const Presheaf& from, const Presheaf& to, const PresheafMap& phi);

/// Every presheaf with section sets of size at most `max_size`, in a fixed order.
void for_each_presheaf(const std::shared_ptr<const SiteCategory>& site, int max_size,
                       const std::function<void(const Presheaf&)>& visit);

struct DescentReport {
    SiteSquare square;
    /// For each s in F(X): (F(e)s, F(p)s).
    std::vector<std::pair<int, int>> comparison;
    /// Elements of F(A) ×_{F(B)} F(Y).
    std::vector<std::pair<int, int>> fiber_product;
    bool bijective = false;
    /// Two sections of F(X) with the same image.
    std::optional<std::pair<int, int>> collision;
    /// A compatible pair with no preimage.
    std::optional<std::pair<int, int>> missed;
};

DescentReport square_descent_check(const Presheaf& f, const SiteSquare& q);

struct SheafCheck {
    Verdict verdict = Verdict::inconclusive;
    int object = -1;              ///< where the condition fails
    std::optional<Sieve> sieve;   ///< the covering sieve it fails for
    bool uniqueness_failed = false;
    bool existence_failed = false;
};

/// Every sieve on `object` (closed under precomposition). Throws DepthExhausted past `cap` sieves.
std::vector<Sieve> all_sieves(const SiteCategory& site, int object, std::size_t cap = 1 << 16);

/**
 * Matching-family condition for every sieve on every object that contains a
 * simple covering of depth at most `depth`. Inconclusive when some sieve's
 * covering status could not be settled within the bound.
 */
SheafCheck is_sheaf(const Presheaf& f, const CoveringOracle& oracle, int depth);

/// F(∅) is a point for every empty object and every distinguished square passes descent.
bool satisfies_square_descent(const Presheaf& f, const CdSite& cd);

struct Sheafification {
    Presheaf sheaf;
    PresheafMap unit;  ///< F → aF
};

/// Plus construction applied twice. Throws DepthExhausted when the covering sieves are not settled within `depth`.
Sheafification sheafify(const Presheaf& f, const CoveringOracle& oracle, int depth);

/// Whether the two presheaves are isomorphic (searches componentwise bijections).
bool presheaves_isomorphic(const Presheaf& a, const Presheaf& b);

struct LocalSurjectivity {
    Verdict verdict = Verdict::inconclusive;
    int object = -1;   ///< a section of the target that does not lift locally
    int section = -1;
};

/// Every section of the target lifts after restriction to the members of some covering sieve.
LocalSurjectivity local_surjectivity(const Presheaf& from, const Presheaf& to, const PresheafMap& phi,
                                     const CoveringOracle& oracle, int depth);

}  // namespace cdsite
