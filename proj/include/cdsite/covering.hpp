#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cdsite/site.hpp"
#include "cdsite/squares.hpp"

namespace cdsite {

enum class Verdict { yes, no, inconclusive };
std::string_view to_string(Verdict v);

/// A commuting square whose corners and maps are objects and morphisms of a site.
struct SiteSquare {
    int x = -1, a = -1, y = -1, b = -1;
    int e = -1, p = -1, e_b = -1, p_b = -1;
};

ConcreteSquare concrete_square(const SiteCategory& site, const SiteSquare& q);

/**
 * A site together with the squares of a cd-structure. Either enumerated from
 * the structure's predicate (every pair e, p into a common object whose
 * pullback exists in the category) or supplied explicitly.
 */
class CdSite {
public:
    CdSite(std::shared_ptr<const SiteCategory> site, CdStructure structure);
    /// Explicit squares; throws ValidationError unless each one commutes.
    CdSite(std::shared_ptr<const SiteCategory> site, CdStructure structure, std::vector<SiteSquare> squares);

    const SiteCategory& site() const { return *site_; }
    const std::shared_ptr<const SiteCategory>& site_ptr() const { return site_; }
    const CdStructure& structure() const { return structure_; }
    const std::vector<SiteSquare>& squares() const { return squares_; }
    const std::vector<int>& squares_over(int object) const { return over_[object]; }
    ConcreteSquare concrete(int square) const { return concrete_square(*site_, squares_[square]); }
    /// Sieve on X generated by {e, p}.
    Sieve square_sieve(int square) const;

private:
    void index();

    std::shared_ptr<const SiteCategory> site_;
    CdStructure structure_;
    std::vector<SiteSquare> squares_;
    std::vector<std::vector<int>> over_;
};

/**
 * Tree of distinguished squares. A leaf stands for the identity of its object,
 * or for the empty family when the object is empty. An inner node carries a
 * square over its object and two children: over A, then over Y.
 */
struct SimpleCovering {
    int object = -1;
    int square = -1;
    bool empty_leaf = false;
    std::vector<SimpleCovering> children;

    bool is_leaf() const { return square < 0; }
    int depth() const;
};

/// The composites into the root reaching each identity leaf.
std::vector<int> leaf_morphisms(const CdSite& cd, const SimpleCovering& tree);
/// Squares are distinguished squares over the right objects and empty leaves sit on empty objects.
bool is_valid_simple_covering(const CdSite& cd, const SimpleCovering& tree);
Sieve covering_sieve(const CdSite& cd, const SimpleCovering& tree);

struct CoverSearchResult {
    Verdict verdict = Verdict::inconclusive;
    std::optional<SimpleCovering> tree;
    /// Smallest depth of a simple covering inside the sieve, when the search finished.
    std::optional<int> minimal_depth;
};

/**
 * Decides which sieves contain a simple covering. The reachable states
 * (object, sieve) form an AND-OR graph; their least depths are computed as a
 * fixpoint, so "no" means no simple covering exists at any depth. Results are
 * cached; the cache is internally synchronized.
 */
class CoveringOracle {
public:
    explicit CoveringOracle(const CdSite& cd, std::size_t state_cap = 200000);

    /// nullopt: exhausted without a covering. Throws DepthExhausted past the state cap.
    std::optional<int> minimal_depth(const Sieve& sieve) const;
    CoverSearchResult search(const Sieve& sieve, int depth) const;
    /// A tree of minimal depth. Requires minimal_depth(sieve) to be set.
    SimpleCovering tree(const Sieve& sieve) const;

    const CdSite& cd_site() const { return cd_; }

private:
    static constexpr int kNever = -1;

    const CdSite& cd_;
    std::size_t state_cap_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<Sieve, int, SieveHash> known_;
};

CoverSearchResult sieve_contains_simple_covering(const CdSite& cd, const Sieve& sieve, int depth);

/// Minimal sieves generated by simple coverings of depth at most `depth`; a sieve covers iff it contains one.
struct CoveringFamily {
    int target = -1;
    std::vector<Sieve> minimal;
    bool covers(const Sieve& s) const;
};

/// Throws DepthExhausted when more than `cap` distinct sieves arise.
CoveringFamily covering_sieves(const CdSite& cd, int object, int depth, std::size_t cap = 100000);

/// Base change of q along f: X' → X through pullbacks inside the category. Throws MissingPullback.
SiteSquare pullback_square(const SiteCategory& site, const SiteSquare& q, int f);

/// Maximum dimension over the objects, used for default search bounds.
int max_dimension(const SiteCategory& site);

}  // namespace cdsite
