#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cdsite/finite_space.hpp"
#include "cdsite/residue.hpp"

namespace cdsite {

struct Morphism {
    int source = -1;
    int target = -1;
    std::vector<int> graph;
};

/// Pullback of a cospan A → X ← Y inside a site: the object B with its two legs.
struct PullbackCone {
    int object = -1;
    int to_left = -1;   ///< B → A
    int to_right = -1;  ///< B → Y
};

/**
 * A finite concrete category of labeled finite spaces.
 *
 * Morphisms are stored once, with identities and all composites present.
 * `into(X)` lists the morphisms with target X; sieves on X are indexed by
 * position in that list. Instances are immutable after construction except for
 * the internal pullback cache, which is guarded by a mutex.
 */
class SiteCategory {
public:
    /// Every monotone label-compatible map between the listed objects.
    static SiteCategory full(std::vector<FiniteSpace> objects, std::vector<std::string> names,
                             ResidueOrder residues = {});

    /**
     * Category of spaces over a base: object i comes with a structure map
     * `structure[i]` into `base`, and the morphisms are the maps commuting with
     * the structure maps.
     */
    static SiteCategory over(const FiniteSpace& base, std::vector<FiniteSpace> objects,
                             std::vector<std::vector<int>> structure, std::vector<std::string> names,
                             ResidueOrder residues = {});

    /// Identities plus the listed generators, closed under composition. Throws Error past `cap` morphisms.
    static SiteCategory generated(std::vector<FiniteSpace> objects, std::vector<std::string> names,
                                  const std::vector<Morphism>& generators, ResidueOrder residues = {},
                                  std::size_t cap = 20000);

    SiteCategory(const SiteCategory& other);
    SiteCategory(SiteCategory&&) noexcept = default;
    SiteCategory& operator=(SiteCategory&&) noexcept = default;

    int object_count() const { return static_cast<int>(objects_.size()); }
    const FiniteSpace& object(int i) const { return objects_[i]; }
    const std::string& name(int i) const { return names_[i]; }
    std::optional<int> object_named(const std::string& name) const;

    int morphism_count() const { return static_cast<int>(morphisms_.size()); }
    const Morphism& morphism(int m) const { return morphisms_[m]; }
    int source(int m) const { return morphisms_[m].source; }
    int target(int m) const { return morphisms_[m].target; }
    int identity(int object) const { return identities_[object]; }
    bool is_identity(int m) const { return identities_[source(m)] == m; }

    const std::vector<int>& into(int object) const { return into_[object]; }
    /// Position of m inside into(target(m)).
    int position(int m) const { return position_[m]; }
    std::vector<int> hom(int source, int target) const;
    std::optional<int> find_morphism(int source, int target, const std::vector<int>& graph) const;

    /// f ∘ into(source(f))[k].
    int post_compose(int f, int k) const { return post_[f][k]; }
    /// f ∘ g; throws if not composable.
    int compose(int f, int g) const;

    bool is_empty_object(int object) const { return objects_[object].empty(); }
    bool is_monomorphism(int m) const;
    const ResidueOrder& residues() const { return residues_; }

    /**
     * Pullback inside the category: an object whose comparison map to the
     * fiber product of spaces is an isomorphism and whose induced maps from
     * every competing cone are morphisms of the category. nullopt if none.
     */
    std::optional<PullbackCone> pullback(int left, int right) const;

    /// Checks the universal property of a cone by enumerating every competing cone.
    bool verify_pullback(int left, int right, const PullbackCone& cone) const;

    SpaceMap as_space_map(int m) const;

private:
    SiteCategory() = default;
    void add_identities();
    int add_morphism(int source, int target, std::vector<int> graph);
    void finalize();
    std::optional<PullbackCone> compute_pullback(int left, int right) const;

    std::vector<FiniteSpace> objects_;
    std::vector<SpacePtr> shared_;
    std::vector<std::string> names_;
    ResidueOrder residues_;
    std::vector<Morphism> morphisms_;
    std::vector<int> identities_;
    std::vector<std::vector<int>> into_;
    std::vector<int> position_;
    std::vector<std::vector<int>> post_;
    std::map<std::tuple<int, int, std::vector<int>>, int> lookup_;
    // Every map between objects (over the base, if any) is a morphism.
    bool full_ = false;

    mutable std::unique_ptr<std::mutex> cache_mutex_ = std::make_unique<std::mutex>();
    mutable std::map<std::pair<int, int>, std::optional<PullbackCone>> pullbacks_;
};

/**
 * A sieve on `target`: a set of morphisms into it closed under precomposition.
 * Membership is stored by position in SiteCategory::into(target).
 */
struct Sieve {
    int target = -1;
    std::vector<bool> members;

    static Sieve maximal(const SiteCategory& site, int target);
    static Sieve empty(const SiteCategory& site, int target);
    static Sieve generated(const SiteCategory& site, int target, const std::vector<int>& family);

    bool contains(const SiteCategory& site, int m) const { return members[site.position(m)]; }
    bool contains_identity(const SiteCategory& site) const { return contains(site, site.identity(target)); }
    bool subset_of(const Sieve& other) const;
    std::vector<int> morphisms(const SiteCategory& site) const;
    /// True iff closed under precomposition.
    bool is_valid(const SiteCategory& site) const;

    /// f*S = {g : f ∘ g ∈ S} on the source of f.
    Sieve pullback(const SiteCategory& site, int f) const;
    /// {f ∘ g : g ∈ S} as a sieve on the target of f (S must live on the source of f).
    Sieve pushforward(const SiteCategory& site, int f) const;
    Sieve& unite(const Sieve& other);

    friend bool operator==(const Sieve&, const Sieve&) = default;
    friend bool operator<(const Sieve& a, const Sieve& b)
    {
        return std::tie(a.target, a.members) < std::tie(b.target, b.members);
    }
};

struct SieveHash {
    std::size_t operator()(const Sieve& s) const;
};

}  // namespace cdsite
