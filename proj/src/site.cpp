#include "cdsite/site.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>

#include "cdsite/errors.hpp"

namespace cdsite {

SiteCategory::SiteCategory(const SiteCategory& other)
    : objects_(other.objects_),
      shared_(other.shared_),
      names_(other.names_),
      residues_(other.residues_),
      morphisms_(other.morphisms_),
      identities_(other.identities_),
      into_(other.into_),
      position_(other.position_),
      post_(other.post_),
      lookup_(other.lookup_),
      full_(other.full_)
{
    std::lock_guard lock(*other.cache_mutex_);
    pullbacks_ = other.pullbacks_;
}

int SiteCategory::add_morphism(int source, int target, std::vector<int> graph)
{
    auto key = std::make_tuple(source, target, graph);
    auto it = lookup_.find(key);
    if (it != lookup_.end())
        return it->second;
    const int idx = static_cast<int>(morphisms_.size());
    morphisms_.push_back({source, target, std::move(graph)});
    lookup_.emplace(std::move(key), idx);
    return idx;
}

void SiteCategory::add_identities()
{
    identities_.resize(objects_.size());
    for (int o = 0; o < object_count(); ++o) {
        std::vector<int> g(objects_[o].size());
        std::iota(g.begin(), g.end(), 0);
        identities_[o] = add_morphism(o, o, std::move(g));
    }
}

void SiteCategory::finalize()
{
    shared_.clear();
    for (const auto& o : objects_)
        shared_.push_back(share(o));
    into_.assign(objects_.size(), {});
    position_.assign(morphisms_.size(), -1);
    for (int m = 0; m < morphism_count(); ++m) {
        position_[m] = static_cast<int>(into_[target(m)].size());
        into_[target(m)].push_back(m);
    }
    post_.assign(morphisms_.size(), {});
    for (int f = 0; f < morphism_count(); ++f) {
        const auto& inner = into_[source(f)];
        post_[f].resize(inner.size());
        for (std::size_t k = 0; k < inner.size(); ++k) {
            const auto& g = morphisms_[inner[k]];
            std::vector<int> comp(g.graph.size());
            for (std::size_t i = 0; i < comp.size(); ++i)
                comp[i] = morphisms_[f].graph[g.graph[i]];
            auto found = find_morphism(g.source, target(f), comp);
            if (!found)
                throw Error("site is not closed under composition");
            post_[f][k] = *found;
        }
    }
}

SiteCategory SiteCategory::full(std::vector<FiniteSpace> objects, std::vector<std::string> names,
                                ResidueOrder residues)
{
    SiteCategory site;
    site.objects_ = std::move(objects);
    site.names_ = std::move(names);
    site.residues_ = std::move(residues);
    site.full_ = true;
    site.add_identities();
    for (int s = 0; s < site.object_count(); ++s)
        for (int t = 0; t < site.object_count(); ++t)
            for (auto& g : enumerate_morphisms(site.objects_[s], site.objects_[t], site.residues_))
                site.add_morphism(s, t, std::move(g));
    site.finalize();
    return site;
}

SiteCategory SiteCategory::over(const FiniteSpace& base, std::vector<FiniteSpace> objects,
                                std::vector<std::vector<int>> structure, std::vector<std::string> names,
                                ResidueOrder residues)
{
    SiteCategory site;
    site.objects_ = std::move(objects);
    site.names_ = std::move(names);
    site.residues_ = std::move(residues);
    for (int s = 0; s < site.object_count(); ++s)
        if (!is_morphism(site.objects_[s], base, structure[s], site.residues_))
            throw ValidationError("structure-map", "object '" + site.names_[s] + "' has no valid map to the base");
    site.full_ = true;
    site.add_identities();
    for (int s = 0; s < site.object_count(); ++s)
        for (int t = 0; t < site.object_count(); ++t) {
            const auto& ps = structure[s];
            const auto& pt = structure[t];
            auto maps = enumerate_morphisms(site.objects_[s], site.objects_[t], site.residues_,
                                            [&](int x, int y) { return ps[x] == pt[y]; });
            for (auto& g : maps)
                site.add_morphism(s, t, std::move(g));
        }
    site.finalize();
    return site;
}

SiteCategory SiteCategory::generated(std::vector<FiniteSpace> objects, std::vector<std::string> names,
                                     const std::vector<Morphism>& generators, ResidueOrder residues,
                                     std::size_t cap)
{
    SiteCategory site;
    site.objects_ = std::move(objects);
    site.names_ = std::move(names);
    site.residues_ = std::move(residues);
    site.add_identities();
    for (const auto& g : generators) {
        if (g.source < 0 || g.target < 0 || g.source >= site.object_count() || g.target >= site.object_count() ||
            !is_morphism(site.objects_[g.source], site.objects_[g.target], g.graph, site.residues_))
            throw ValidationError("morphism", "generator is not a monotone label-compatible map");
        site.add_morphism(g.source, g.target, g.graph);
    }
    bool grew = true;
    while (grew) {
        grew = false;
        const int n = site.morphism_count();
        for (int f = 0; f < n; ++f)
            for (int g = 0; g < n; ++g) {
                if (site.morphisms_[g].target != site.morphisms_[f].source)
                    continue;
                std::vector<int> comp(site.morphisms_[g].graph.size());
                for (std::size_t i = 0; i < comp.size(); ++i)
                    comp[i] = site.morphisms_[f].graph[site.morphisms_[g].graph[i]];
                const int before = site.morphism_count();
                site.add_morphism(site.morphisms_[g].source, site.morphisms_[f].target, std::move(comp));
                if (site.morphism_count() != before) {
                    grew = true;
                    if (static_cast<std::size_t>(site.morphism_count()) > cap)
                        throw Error("composition closure exceeds the morphism cap");
                }
            }
    }
    site.finalize();
    return site;
}

std::optional<int> SiteCategory::object_named(const std::string& name) const
{
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
        return std::nullopt;
    return static_cast<int>(it - names_.begin());
}

std::vector<int> SiteCategory::hom(int src, int tgt) const
{
    std::vector<int> out;
    for (int m : into_[tgt])
        if (source(m) == src)
            out.push_back(m);
    return out;
}

std::optional<int> SiteCategory::find_morphism(int src, int tgt, const std::vector<int>& graph) const
{
    auto it = lookup_.find(std::make_tuple(src, tgt, graph));
    if (it == lookup_.end())
        return std::nullopt;
    return it->second;
}

int SiteCategory::compose(int f, int g) const
{
    if (target(g) != source(f))
        throw Error("morphisms are not composable");
    return post_[f][position_[g]];
}

bool SiteCategory::is_monomorphism(int m) const
{
    for (int t = 0; t < object_count(); ++t) {
        const auto maps = hom(t, source(m));
        for (std::size_t i = 0; i < maps.size(); ++i)
            for (std::size_t j = i + 1; j < maps.size(); ++j)
                if (compose(m, maps[i]) == compose(m, maps[j]))
                    return false;
    }
    return true;
}

SpaceMap SiteCategory::as_space_map(int m) const
{
    return SpaceMap{shared_[source(m)], shared_[target(m)], morphisms_[m].graph};
}

std::optional<PullbackCone> SiteCategory::pullback(int left, int right) const
{
    {
        std::lock_guard lock(*cache_mutex_);
        auto it = pullbacks_.find({left, right});
        if (it != pullbacks_.end())
            return it->second;
    }
    auto result = compute_pullback(left, right);
    std::lock_guard lock(*cache_mutex_);
    pullbacks_.emplace(std::make_pair(left, right), result);
    return result;
}

std::optional<PullbackCone> SiteCategory::compute_pullback(int left, int right) const
{
    if (target(left) != target(right))
        throw Error("pullback of maps with different targets");
    const int a_obj = source(left);
    const int y_obj = source(right);
    const auto& e = morphisms_[left].graph;
    const auto& p = morphisms_[right].graph;
    const FiniteSpace& a_space = objects_[a_obj];
    const FiniteSpace& y_space = objects_[y_obj];
    int pair_count = 0;
    for (int a = 0; a < a_space.size(); ++a)
        for (int y = 0; y < y_space.size(); ++y)
            if (e[a] == p[y])
                ++pair_count;

    for (int o = 0; o < object_count(); ++o) {
        const FiniteSpace& cand = objects_[o];
        if (cand.size() != pair_count)
            continue;
        const auto to_a = hom(o, a_obj);
        const auto to_y = hom(o, y_obj);
        for (int ma : to_a)
            for (int my : to_y) {
                const auto& ga = morphisms_[ma].graph;
                const auto& gy = morphisms_[my].graph;
                bool ok = true;
                std::vector<std::pair<int, int>> pairs(cand.size());
                for (int b = 0; b < cand.size() && ok; ++b) {
                    if (e[ga[b]] != p[gy[b]])
                        ok = false;
                    pairs[b] = {ga[b], gy[b]};
                }
                if (!ok)
                    continue;
                // Comparison map must be a label-exact order isomorphism onto the fiber product.
                for (int b = 0; b < cand.size() && ok; ++b) {
                    for (int c = b + 1; c < cand.size() && ok; ++c)
                        if (pairs[b] == pairs[c])
                            ok = false;
                    auto joined = residues_.join(a_space.label(pairs[b].first), y_space.label(pairs[b].second));
                    if (!joined || *joined != cand.label(b))
                        ok = false;
                    for (int c = 0; c < cand.size() && ok; ++c) {
                        const bool in_product = a_space.leq(pairs[b].first, pairs[c].first) &&
                                                y_space.leq(pairs[b].second, pairs[c].second);
                        if (in_product != cand.leq(b, c))
                            ok = false;
                    }
                }
                if (!ok)
                    continue;
                // In a full category the induced map into a copy of the fiber product always exists.
                PullbackCone cone{o, ma, my};
                if (full_ || verify_pullback(left, right, cone))
                    return cone;
            }
    }
    return std::nullopt;
}

bool SiteCategory::verify_pullback(int left, int right, const PullbackCone& cone) const
{
    const int a_obj = source(left);
    const int y_obj = source(right);
    const auto& ga = morphisms_[cone.to_left].graph;
    const auto& gy = morphisms_[cone.to_right].graph;
    if (compose(left, cone.to_left) != compose(right, cone.to_right))
        return false;
    const FiniteSpace& b_space = objects_[cone.object];
    const int y_size = objects_[y_obj].size();
    std::vector<int> where(objects_[a_obj].size() * y_size, -1);
    for (int b = 0; b < b_space.size(); ++b) {
        int& slot = where[ga[b] * y_size + gy[b]];
        if (slot >= 0)
            return false;
        slot = b;
    }
    for (int t = 0; t < object_count(); ++t) {
        const auto us = hom(t, a_obj);
        const auto vs = hom(t, y_obj);
        for (int u : us)
            for (int v : vs) {
                if (compose(left, u) != compose(right, v))
                    continue;
                std::vector<int> h(objects_[t].size());
                for (int x = 0; x < objects_[t].size(); ++x) {
                    h[x] = where[morphisms_[u].graph[x] * y_size + morphisms_[v].graph[x]];
                    if (h[x] < 0)
                        return false;
                }
                if (!find_morphism(t, cone.object, h))
                    return false;
            }
    }
    return true;
}

Sieve Sieve::maximal(const SiteCategory& site, int target)
{
    return Sieve{target, std::vector<bool>(site.into(target).size(), true)};
}

Sieve Sieve::empty(const SiteCategory& site, int target)
{
    return Sieve{target, std::vector<bool>(site.into(target).size(), false)};
}

Sieve Sieve::generated(const SiteCategory& site, int target, const std::vector<int>& family)
{
    Sieve s = empty(site, target);
    for (int f : family) {
        if (site.target(f) != target)
            throw Error("generator does not land in the sieve's target");
        const std::size_t n = site.into(site.source(f)).size();
        for (std::size_t k = 0; k < n; ++k)
            s.members[site.position(site.post_compose(f, static_cast<int>(k)))] = true;
    }
    return s;
}

bool Sieve::subset_of(const Sieve& other) const
{
    for (std::size_t i = 0; i < members.size(); ++i)
        if (members[i] && !other.members[i])
            return false;
    return true;
}

std::vector<int> Sieve::morphisms(const SiteCategory& site) const
{
    std::vector<int> out;
    const auto& all = site.into(target);
    for (std::size_t i = 0; i < all.size(); ++i)
        if (members[i])
            out.push_back(all[i]);
    return out;
}

bool Sieve::is_valid(const SiteCategory& site) const
{
    for (int g : morphisms(site))
        for (std::size_t k = 0; k < site.into(site.source(g)).size(); ++k)
            if (!contains(site, site.post_compose(g, static_cast<int>(k))))
                return false;
    return true;
}

Sieve Sieve::pullback(const SiteCategory& site, int f) const
{
    if (site.target(f) != target)
        throw Error("pullback along a map into a different object");
    const int src = site.source(f);
    Sieve out{src, std::vector<bool>(site.into(src).size(), false)};
    for (std::size_t k = 0; k < out.members.size(); ++k)
        out.members[k] = members[site.position(site.post_compose(f, static_cast<int>(k)))];
    return out;
}

Sieve Sieve::pushforward(const SiteCategory& site, int f) const
{
    if (site.source(f) != target)
        throw Error("pushforward along a map from a different object");
    Sieve out = empty(site, site.target(f));
    for (std::size_t k = 0; k < members.size(); ++k)
        if (members[k])
            out.members[site.position(site.post_compose(f, static_cast<int>(k)))] = true;
    return out;
}

Sieve& Sieve::unite(const Sieve& other)
{
    for (std::size_t i = 0; i < members.size(); ++i)
        if (other.members[i])
            members[i] = true;
    return *this;
}

std::size_t SieveHash::operator()(const Sieve& s) const
{
    return std::hash<std::vector<bool>>{}(s.members) * 31 + static_cast<std::size_t>(s.target);
}

}  // namespace cdsite
