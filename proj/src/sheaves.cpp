#include "cdsite/sheaves.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "cdsite/errors.hpp"

namespace cdsite {

Presheaf::Presheaf(std::shared_ptr<const SiteCategory> site, std::vector<int> sizes,
                   std::vector<std::vector<int>> restrictions, std::vector<std::vector<std::string>> names)
    : Presheaf(std::move(site), std::move(sizes), std::move(restrictions), std::move(names), true)
{
}

Presheaf Presheaf::from_functorial(std::shared_ptr<const SiteCategory> site, std::vector<int> sizes,
                                   std::vector<std::vector<int>> restrictions,
                                   std::vector<std::vector<std::string>> names)
{
    return Presheaf(std::move(site), std::move(sizes), std::move(restrictions), std::move(names), false);
}

Presheaf::Presheaf(std::shared_ptr<const SiteCategory> site, std::vector<int> sizes,
                   std::vector<std::vector<int>> restrictions, std::vector<std::vector<std::string>> names,
                   bool check_functoriality)
    : site_(std::move(site)), sizes_(std::move(sizes)), restrictions_(std::move(restrictions)), names_(std::move(names))
{
    const SiteCategory& c = *site_;
    if (static_cast<int>(sizes_.size()) != c.object_count() ||
        static_cast<int>(restrictions_.size()) != c.morphism_count())
        throw ValidationError("section-range", "presheaf data does not match the category");
    for (int m = 0; m < c.morphism_count(); ++m) {
        const auto& r = restrictions_[m];
        if (static_cast<int>(r.size()) != sizes_[c.target(m)])
            throw ValidationError("section-range", "restriction has the wrong domain size");
        for (int v : r)
            if (v < 0 || v >= sizes_[c.source(m)])
                throw ValidationError("section-range", "restriction lands outside the section set");
        if (c.is_identity(m))
            for (int s = 0; s < static_cast<int>(r.size()); ++s)
                if (r[s] != s)
                    throw ValidationError("functoriality", "identity does not restrict to the identity");
    }
    if (!check_functoriality)
        return;
    for (int f = 0; f < c.morphism_count(); ++f)
        for (int g : c.into(c.source(f))) {
            const int fg = c.compose(f, g);
            for (int s = 0; s < sizes_[c.target(f)]; ++s)
                if (restrictions_[fg][s] != restrictions_[g][restrictions_[f][s]])
                    throw ValidationError("functoriality", "restriction along a composite is not the composite");
        }
}

std::string Presheaf::section_name(int object, int section) const
{
    if (object < static_cast<int>(names_.size()) && section < static_cast<int>(names_[object].size()))
        return names_[object][section];
    return std::to_string(section);
}

Presheaf representable(const std::shared_ptr<const SiteCategory>& site, int z)
{
    const SiteCategory& c = *site;
    std::vector<std::vector<int>> homs(c.object_count());
    std::vector<int> where(c.morphism_count(), -1);
    std::vector<int> sizes;
    std::vector<std::vector<std::string>> names(c.object_count());
    for (int u = 0; u < c.object_count(); ++u) {
        homs[u] = c.hom(u, z);
        for (std::size_t i = 0; i < homs[u].size(); ++i) {
            where[homs[u][i]] = static_cast<int>(i);
            std::string n;
            for (int v : c.morphism(homs[u][i]).graph)
                n += (n.empty() ? "" : ",") + c.object(z).id(v);
            names[u].push_back("[" + n + "]");
        }
        sizes.push_back(static_cast<int>(homs[u].size()));
    }
    std::vector<std::vector<int>> restrictions(c.morphism_count());
    for (int m = 0; m < c.morphism_count(); ++m)
        for (int g : homs[c.target(m)])
            restrictions[m].push_back(where[c.compose(g, m)]);
    return Presheaf(site, std::move(sizes), std::move(restrictions), std::move(names));
}

Presheaf constant_presheaf(const std::shared_ptr<const SiteCategory>& site, int n)
{
    std::vector<int> id(n);
    std::iota(id.begin(), id.end(), 0);
    return Presheaf(site, std::vector<int>(site->object_count(), n),
                    std::vector<std::vector<int>>(site->morphism_count(), id));
}

bool is_natural(const Presheaf& from, const Presheaf& to, const PresheafMap& phi)
{
    const SiteCategory& c = from.site();
    if (static_cast<int>(phi.component.size()) != c.object_count())
        return false;
    for (int x = 0; x < c.object_count(); ++x) {
        if (static_cast<int>(phi.component[x].size()) != from.size(x))
            return false;
        for (int v : phi.component[x])
            if (v < 0 || v >= to.size(x))
                return false;
    }
    for (int m = 0; m < c.morphism_count(); ++m)
        for (int s = 0; s < from.size(c.target(m)); ++s)
            if (phi.component[c.source(m)][from.restrict(m, s)] != to.restrict(m, phi.component[c.target(m)][s]))
                return false;
    return true;
}

void for_each_presheaf(const std::shared_ptr<const SiteCategory>& site, int max_size,
                       const std::function<void(const Presheaf&)>& visit)
{
    const SiteCategory& c = *site;
    const int n_obj = c.object_count();
    std::vector<int> order;
    std::vector<int> step(c.morphism_count(), -1);
    for (int m = 0; m < c.morphism_count(); ++m)
        if (!c.is_identity(m)) {
            step[m] = static_cast<int>(order.size());
            order.push_back(m);
        }
    // Functoriality constraints F(f∘g) = F(g)∘F(f), bucketed by the step at which all three are known.
    struct Triple {
        int f, g, fg;
    };
    std::vector<std::vector<Triple>> checks(order.size());
    for (int f = 0; f < c.morphism_count(); ++f)
        for (int g : c.into(c.source(f))) {
            const int fg = c.compose(f, g);
            const int when = std::max({step[f], step[g], step[fg]});
            if (when >= 0)
                checks[when].push_back({f, g, fg});
        }

    std::vector<int> sizes(n_obj, 0);
    std::vector<std::vector<int>> r(c.morphism_count());
    std::function<void(std::size_t)> assign = [&](std::size_t k) {
        if (k == order.size()) {
            visit(Presheaf(site, sizes, r));
            return;
        }
        const int m = order[k];
        const int dom = sizes[c.target(m)];
        const int cod = sizes[c.source(m)];
        if (dom > 0 && cod == 0)
            return;
        std::vector<int> f(dom, 0);
        while (true) {
            r[m] = f;
            bool ok = true;
            for (const auto& t : checks[k]) {
                for (int s = 0; s < sizes[c.target(t.f)] && ok; ++s)
                    ok = r[t.fg][s] == r[t.g][r[t.f][s]];
                if (!ok)
                    break;
            }
            if (ok)
                assign(k + 1);
            int i = 0;
            while (i < dom && ++f[i] == cod)
                f[i++] = 0;
            if (i == dom)
                break;
        }
    };
    std::function<void(int)> choose = [&](int x) {
        if (x == n_obj) {
            for (int m = 0; m < c.morphism_count(); ++m)
                if (c.is_identity(m)) {
                    r[m].resize(sizes[c.target(m)]);
                    std::iota(r[m].begin(), r[m].end(), 0);
                }
            assign(0);
            return;
        }
        for (int s = 0; s <= max_size; ++s) {
            sizes[x] = s;
            choose(x + 1);
        }
    };
    choose(0);
}

DescentReport square_descent_check(const Presheaf& f, const SiteSquare& q)
{
    DescentReport rep;
    rep.square = q;
    for (int a = 0; a < f.size(q.a); ++a)
        for (int y = 0; y < f.size(q.y); ++y)
            if (f.restrict(q.e_b, a) == f.restrict(q.p_b, y))
                rep.fiber_product.emplace_back(a, y);
    std::map<std::pair<int, int>, int> hit;
    for (int s = 0; s < f.size(q.x); ++s) {
        const std::pair<int, int> img{f.restrict(q.e, s), f.restrict(q.p, s)};
        rep.comparison.push_back(img);
        auto [it, fresh] = hit.emplace(img, s);
        if (!fresh && !rep.collision)
            rep.collision = std::make_pair(it->second, s);
    }
    for (const auto& pr : rep.fiber_product)
        if (!hit.count(pr)) {
            rep.missed = pr;
            break;
        }
    rep.bijective = !rep.collision && !rep.missed;
    return rep;
}

std::vector<Sieve> all_sieves(const SiteCategory& site, int object, std::size_t cap)
{
    const auto& arrows = site.into(object);
    const int n = static_cast<int>(arrows.size());
    if (n > 64)
        throw DepthExhausted("too many arrows to enumerate sieves");
    std::vector<std::uint64_t> below(n, 0), above(n, 0);
    for (int k = 0; k < n; ++k) {
        const int f = arrows[k];
        for (std::size_t j = 0; j < site.into(site.source(f)).size(); ++j) {
            const int pos = site.position(site.post_compose(f, static_cast<int>(j)));
            below[k] |= std::uint64_t{1} << pos;
            above[pos] |= std::uint64_t{1} << k;
        }
    }
    std::vector<std::uint64_t> found;
    std::function<void(int, std::uint64_t, std::uint64_t)> rec = [&](int k, std::uint64_t in, std::uint64_t out) {
        if (k == n) {
            found.push_back(in);
            if (found.size() > cap)
                throw DepthExhausted("too many sieves to enumerate");
            return;
        }
        const std::uint64_t b = std::uint64_t{1} << k;
        if ((in | out) & b) {
            rec(k + 1, in, out);
            return;
        }
        if ((below[k] & out) == 0)
            rec(k + 1, in | below[k], out);
        if ((above[k] & in) == 0)
            rec(k + 1, in, out | above[k]);
    };
    rec(0, 0, 0);
    std::sort(found.begin(), found.end());
    std::vector<Sieve> out;
    for (auto mask : found) {
        Sieve s{object, std::vector<bool>(n)};
        for (int k = 0; k < n; ++k)
            s.members[k] = (mask >> k) & 1U;
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

/// All matching families of F on a sieve, each listed by member in the sieve's order.
std::vector<std::vector<int>> matching_families(const Presheaf& f, const Sieve& s)
{
    const SiteCategory& c = f.site();
    const auto members = s.morphisms(c);
    std::map<int, int> slot;
    for (std::size_t i = 0; i < members.size(); ++i)
        slot[members[i]] = static_cast<int>(i);
    // constraint (i, k, j): F(k)(x_i) = x_j where members[i] ∘ k = members[j]
    struct Link {
        int i, k, j;
    };
    std::vector<std::vector<Link>> links(members.size());
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t idx = 0; idx < c.into(c.source(members[i])).size(); ++idx) {
            const int k = c.into(c.source(members[i]))[idx];
            const int j = slot.at(c.post_compose(members[i], static_cast<int>(idx)));
            links[std::max(static_cast<int>(i), j)].push_back({static_cast<int>(i), k, j});
        }
    std::vector<std::vector<int>> out;
    std::vector<int> x(members.size(), 0);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == members.size()) {
            out.push_back(x);
            return;
        }
        for (int v = 0; v < f.size(c.source(members[i])); ++v) {
            x[i] = v;
            bool ok = true;
            for (const auto& l : links[i])
                if (f.restrict(l.k, x[l.i]) != x[l.j]) {
                    ok = false;
                    break;
                }
            if (ok)
                rec(i + 1);
        }
    };
    rec(0);
    return out;
}

std::vector<int> family_of_section(const Presheaf& f, const Sieve& s, int section)
{
    std::vector<int> out;
    for (int m : s.morphisms(f.site()))
        out.push_back(f.restrict(m, section));
    return out;
}

/// Covering sieves per object at the given depth; throws DepthExhausted if any sieve is unsettled.
std::vector<std::vector<Sieve>> settled_covers(const CoveringOracle& oracle, int depth)
{
    const SiteCategory& c = oracle.cd_site().site();
    std::vector<std::vector<Sieve>> out(c.object_count());
    for (int x = 0; x < c.object_count(); ++x)
        for (auto& s : all_sieves(c, x)) {
            const auto d = oracle.minimal_depth(s);
            if (d && *d > depth)
                throw DepthExhausted("covering status of a sieve needs more depth");
            if (d)
                out[x].push_back(std::move(s));
        }
    return out;
}

struct UnionFind {
    std::vector<int> parent;
    int add()
    {
        parent.push_back(static_cast<int>(parent.size()));
        return parent.back();
    }
    int find(int a)
    {
        while (parent[a] != a)
            a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a != b)
            parent[std::max(a, b)] = std::min(a, b);
    }
};

Sheafification plus(const Presheaf& f, const std::vector<std::vector<Sieve>>& covers)
{
    const SiteCategory& c = f.site();
    const int n_obj = c.object_count();
    std::vector<int> sizes(n_obj);
    std::vector<std::map<std::pair<int, std::vector<int>>, int>> node(n_obj);  // (sieve index, family) → node
    std::vector<std::vector<std::pair<int, std::vector<int>>>> rep(n_obj);      // class → representative
    std::vector<std::vector<int>> class_of_node(n_obj);
    std::vector<std::map<Sieve, int>> sieve_index(n_obj);
    for (int x = 0; x < n_obj; ++x) {
        UnionFind uf;
        std::vector<std::pair<int, std::vector<int>>> nodes;
        for (std::size_t si = 0; si < covers[x].size(); ++si) {
            sieve_index[x][covers[x][si]] = static_cast<int>(si);
            for (auto& fam : matching_families(f, covers[x][si])) {
                node[x][{static_cast<int>(si), fam}] = uf.add();
                nodes.emplace_back(static_cast<int>(si), std::move(fam));
            }
        }
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            const Sieve& big = covers[x][nodes[n].first];
            const auto members = big.morphisms(c);
            for (std::size_t sj = 0; sj < covers[x].size(); ++sj) {
                const Sieve& small = covers[x][sj];
                if (sj == static_cast<std::size_t>(nodes[n].first) || !small.subset_of(big))
                    continue;
                std::vector<int> restricted;
                for (std::size_t i = 0; i < members.size(); ++i)
                    if (small.contains(c, members[i]))
                        restricted.push_back(nodes[n].second[i]);
                uf.unite(static_cast<int>(n), node[x].at({static_cast<int>(sj), restricted}));
            }
        }
        std::map<int, int> class_id;
        class_of_node[x].resize(nodes.size());
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            const int root = uf.find(static_cast<int>(n));
            auto [it, fresh] = class_id.emplace(root, static_cast<int>(class_id.size()));
            if (fresh)
                rep[x].push_back(nodes[n]);
            class_of_node[x][n] = it->second;
        }
        sizes[x] = static_cast<int>(class_id.size());
    }
    auto class_of = [&](int x, int si, const std::vector<int>& fam) {
        return class_of_node[x][node[x].at({si, fam})];
    };
    std::vector<std::vector<int>> restrictions(c.morphism_count());
    for (int m = 0; m < c.morphism_count(); ++m) {
        const int x = c.target(m);
        const int u = c.source(m);
        for (const auto& [si, fam] : rep[x]) {
            const Sieve& s = covers[x][si];
            const Sieve pulled = s.pullback(c, m);
            const auto members = s.morphisms(c);
            std::map<int, int> value;
            for (std::size_t i = 0; i < members.size(); ++i)
                value[members[i]] = fam[i];
            std::vector<int> pulled_fam;
            for (int g : pulled.morphisms(c))
                pulled_fam.push_back(value.at(c.compose(m, g)));
            restrictions[m].push_back(class_of(u, sieve_index[u].at(pulled), pulled_fam));
        }
    }
    PresheafMap unit;
    for (int x = 0; x < n_obj; ++x) {
        const Sieve top = Sieve::maximal(c, x);
        const int si = sieve_index[x].at(top);
        std::vector<int> comp;
        for (int s = 0; s < f.size(x); ++s)
            comp.push_back(class_of(x, si, family_of_section(f, top, s)));
        unit.component.push_back(std::move(comp));
    }
    return Sheafification{Presheaf(f.site_ptr(), std::move(sizes), std::move(restrictions)), std::move(unit)};
}

}  // namespace

SheafCheck is_sheaf(const Presheaf& f, const CoveringOracle& oracle, int depth)
{
    const SiteCategory& c = f.site();
    SheafCheck out;
    bool unsettled = false;
    for (int x = 0; x < c.object_count(); ++x) {
        std::vector<Sieve> sieves;
        try {
            sieves = all_sieves(c, x);
        } catch (const DepthExhausted&) {
            unsettled = true;
            continue;
        }
        for (const auto& s : sieves) {
            std::optional<int> d;
            try {
                d = oracle.minimal_depth(s);
            } catch (const DepthExhausted&) {
                unsettled = true;
                continue;
            }
            if (!d)
                continue;
            if (*d > depth) {
                unsettled = true;
                continue;
            }
            const auto families = matching_families(f, s);
            std::vector<std::vector<int>> images;
            for (int sec = 0; sec < f.size(x); ++sec)
                images.push_back(family_of_section(f, s, sec));
            std::sort(images.begin(), images.end());
            const bool unique = std::adjacent_find(images.begin(), images.end()) == images.end();
            images.erase(std::unique(images.begin(), images.end()), images.end());
            const bool exists = images.size() == families.size();
            if (!unique || !exists) {
                out.verdict = Verdict::no;
                out.object = x;
                out.sieve = s;
                out.uniqueness_failed = !unique;
                out.existence_failed = !exists;
                return out;
            }
        }
    }
    out.verdict = unsettled ? Verdict::inconclusive : Verdict::yes;
    return out;
}

bool satisfies_square_descent(const Presheaf& f, const CdSite& cd)
{
    const SiteCategory& c = f.site();
    for (int x = 0; x < c.object_count(); ++x)
        if (c.is_empty_object(x) && f.size(x) != 1)
            return false;
    for (const auto& q : cd.squares())
        if (!square_descent_check(f, q).bijective)
            return false;
    return true;
}

Sheafification sheafify(const Presheaf& f, const CoveringOracle& oracle, int depth)
{
    const auto covers = settled_covers(oracle, depth);
    auto once = plus(f, covers);
    auto twice = plus(once.sheaf, covers);
    PresheafMap unit;
    for (std::size_t x = 0; x < once.unit.component.size(); ++x) {
        std::vector<int> comp;
        for (int v : once.unit.component[x])
            comp.push_back(twice.unit.component[x][v]);
        unit.component.push_back(std::move(comp));
    }
    return Sheafification{std::move(twice.sheaf), std::move(unit)};
}

bool presheaves_isomorphic(const Presheaf& a, const Presheaf& b)
{
    const SiteCategory& c = a.site();
    if (a.sizes() != b.sizes())
        return false;
    const int n_obj = c.object_count();
    std::vector<std::vector<int>> perm(n_obj);
    std::function<bool(int)> rec = [&](int x) {
        if (x == n_obj)
            return true;
        std::vector<int> p(a.size(x));
        std::iota(p.begin(), p.end(), 0);
        do {
            perm[x] = p;
            bool ok = true;
            for (int m = 0; m < c.morphism_count() && ok; ++m) {
                const int t = c.target(m), s = c.source(m);
                if (t > x || s > x)
                    continue;
                for (int v = 0; v < a.size(t) && ok; ++v)
                    ok = perm[s][a.restrict(m, v)] == b.restrict(m, perm[t][v]);
            }
            if (ok && rec(x + 1))
                return true;
        } while (std::next_permutation(p.begin(), p.end()));
        return false;
    };
    return rec(0);
}

LocalSurjectivity local_surjectivity(const Presheaf& from, const Presheaf& to, const PresheafMap& phi,
                                     const CoveringOracle& oracle, int depth)
{
    if (!is_natural(from, to, phi))
        throw PreconditionViolated("map of presheaves is not natural");
    const SiteCategory& c = to.site();
    std::vector<std::vector<bool>> in_image(c.object_count());
    for (int x = 0; x < c.object_count(); ++x) {
        in_image[x].assign(to.size(x), false);
        for (int v : phi.component[x])
            in_image[x][v] = true;
    }
    LocalSurjectivity out;
    bool unsettled = false;
    for (int u = 0; u < c.object_count(); ++u)
        for (int t = 0; t < to.size(u); ++t) {
            Sieve r = Sieve::empty(c, u);
            const auto& arrows = c.into(u);
            for (std::size_t k = 0; k < arrows.size(); ++k)
                r.members[k] = in_image[c.source(arrows[k])][to.restrict(arrows[k], t)];
            std::optional<int> d;
            try {
                d = oracle.minimal_depth(r);
            } catch (const DepthExhausted&) {
                unsettled = true;
                continue;
            }
            if (!d) {
                out.verdict = Verdict::no;
                out.object = u;
                out.section = t;
                return out;
            }
            if (*d > depth)
                unsettled = true;
        }
    out.verdict = unsettled ? Verdict::inconclusive : Verdict::yes;
    return out;
}

}  // namespace cdsite
