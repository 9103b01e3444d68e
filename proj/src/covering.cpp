#include "cdsite/covering.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>

#include "cdsite/density.hpp"
#include "cdsite/errors.hpp"

namespace cdsite {

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::yes: return "pass";
    case Verdict::no: return "fail";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

ConcreteSquare concrete_square(const SiteCategory& site, const SiteSquare& q)
{
    return ConcreteSquare{site.object(q.x),           site.object(q.a),           site.object(q.y),
                          site.object(q.b),           site.morphism(q.e).graph,   site.morphism(q.p).graph,
                          site.morphism(q.e_b).graph, site.morphism(q.p_b).graph};
}

CdSite::CdSite(std::shared_ptr<const SiteCategory> site, CdStructure structure)
    : site_(std::move(site)), structure_(std::move(structure))
{
    const SiteCategory& c = *site_;
    for (int x = 0; x < c.object_count(); ++x) {
        std::vector<int> lefts, rights;
        for (int m : c.into(x)) {
            const auto& src = c.object(c.source(m));
            if (!structure_.left_filter || structure_.left_filter(src, c.object(x), c.morphism(m).graph))
                lefts.push_back(m);
            if (!structure_.right_filter || structure_.right_filter(src, c.object(x), c.morphism(m).graph))
                rights.push_back(m);
        }
        for (int e : lefts)
            for (int p : rights) {
                try {
                    const auto q = complete_square(c.object(x), c.object(c.source(e)), c.morphism(e).graph,
                                                   c.object(c.source(p)), c.morphism(p).graph, c.residues());
                    if (!structure_.admits(q, c.residues()))
                        continue;
                } catch (const MissingPullback&) {
                    continue;
                }
                auto cone = c.pullback(e, p);
                if (!cone)
                    continue;
                squares_.push_back({x, c.source(e), c.source(p), cone->object, e, p, cone->to_left, cone->to_right});
            }
    }
    index();
}

CdSite::CdSite(std::shared_ptr<const SiteCategory> site, CdStructure structure, std::vector<SiteSquare> squares)
    : site_(std::move(site)), structure_(std::move(structure)), squares_(std::move(squares))
{
    const SiteCategory& c = *site_;
    for (const auto& q : squares_) {
        const int n = c.morphism_count();
        for (int m : {q.e, q.p, q.e_b, q.p_b})
            if (m < 0 || m >= n)
                throw ValidationError("square", "unknown morphism");
        if (c.target(q.e) != q.x || c.target(q.p) != q.x || c.source(q.e) != q.a || c.source(q.p) != q.y ||
            c.source(q.e_b) != q.b || c.target(q.e_b) != q.a || c.source(q.p_b) != q.b || c.target(q.p_b) != q.y)
            throw ValidationError("square", "corners do not match the maps");
        if (c.compose(q.e, q.e_b) != c.compose(q.p, q.p_b))
            throw ValidationError("square-commutes", "square does not commute");
    }
    index();
}

void CdSite::index()
{
    over_.assign(site_->object_count(), {});
    for (int i = 0; i < static_cast<int>(squares_.size()); ++i)
        over_[squares_[i].x].push_back(i);
}

Sieve CdSite::square_sieve(int square) const
{
    const auto& q = squares_[square];
    return Sieve::generated(*site_, q.x, {q.e, q.p});
}

int SimpleCovering::depth() const
{
    int d = 0;
    for (const auto& c : children)
        d = std::max(d, 1 + c.depth());
    return d;
}

namespace {

void collect_leaves(const CdSite& cd, const SimpleCovering& t, int into_root, std::vector<int>& out)
{
    const SiteCategory& c = cd.site();
    if (t.is_leaf()) {
        if (!t.empty_leaf)
            out.push_back(into_root);
        return;
    }
    const auto& q = cd.squares()[t.square];
    collect_leaves(cd, t.children[0], c.compose(into_root, q.e), out);
    collect_leaves(cd, t.children[1], c.compose(into_root, q.p), out);
}

}  // namespace

std::vector<int> leaf_morphisms(const CdSite& cd, const SimpleCovering& tree)
{
    std::vector<int> out;
    collect_leaves(cd, tree, cd.site().identity(tree.object), out);
    return out;
}

bool is_valid_simple_covering(const CdSite& cd, const SimpleCovering& t)
{
    if (t.object < 0 || t.object >= cd.site().object_count())
        return false;
    if (t.is_leaf())
        return t.children.empty() && (!t.empty_leaf || cd.site().is_empty_object(t.object));
    if (t.square >= static_cast<int>(cd.squares().size()) || t.children.size() != 2)
        return false;
    const auto& q = cd.squares()[t.square];
    if (!cd.structure().admits(cd.concrete(t.square), cd.site().residues()))
        return false;
    return q.x == t.object && t.children[0].object == q.a && t.children[1].object == q.y &&
           is_valid_simple_covering(cd, t.children[0]) && is_valid_simple_covering(cd, t.children[1]);
}

Sieve covering_sieve(const CdSite& cd, const SimpleCovering& tree)
{
    return Sieve::generated(cd.site(), tree.object, leaf_morphisms(cd, tree));
}

CoveringOracle::CoveringOracle(const CdSite& cd, std::size_t state_cap) : cd_(cd), state_cap_(state_cap) {}

std::optional<int> CoveringOracle::minimal_depth(const Sieve& root) const
{
    std::lock_guard lock(mutex_);
    if (auto it = known_.find(root); it != known_.end())
        return it->second == kNever ? std::nullopt : std::optional<int>(it->second);

    const SiteCategory& c = cd_.site();
    constexpr int inf = std::numeric_limits<int>::max();
    struct Option {
        int left, right;
    };
    std::vector<Sieve> states{root};
    std::unordered_map<Sieve, int, SieveHash> index{{root, 0}};
    std::vector<int> value;
    std::vector<bool> fixed;
    std::vector<std::vector<Option>> options;
    auto intern = [&](Sieve s) {
        auto [it, fresh] = index.emplace(s, static_cast<int>(states.size()));
        if (fresh) {
            states.push_back(std::move(s));
            if (states.size() > state_cap_)
                throw DepthExhausted("covering search exceeded its state cap");
        }
        return it->second;
    };
    for (std::size_t i = 0; i < states.size(); ++i) {
        const Sieve s = states[i];
        options.emplace_back();
        if (auto it = known_.find(s); it != known_.end()) {
            value.push_back(it->second == kNever ? inf : it->second);
            fixed.push_back(true);
            continue;
        }
        if (s.contains_identity(c) || c.is_empty_object(s.target)) {
            value.push_back(0);
            fixed.push_back(true);
            continue;
        }
        value.push_back(inf);
        fixed.push_back(false);
        std::vector<Option> opts;
        for (int qi : cd_.squares_over(s.target)) {
            const auto& q = cd_.squares()[qi];
            const int l = intern(s.pullback(c, q.e));
            const int r = intern(s.pullback(c, q.p));
            opts.push_back({l, r});
        }
        options[i] = std::move(opts);
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (fixed[i])
                continue;
            for (const auto& o : options[i]) {
                if (value[o.left] == inf || value[o.right] == inf)
                    continue;
                const int v = 1 + std::max(value[o.left], value[o.right]);
                if (v < value[i]) {
                    value[i] = v;
                    changed = true;
                }
            }
        }
    }
    for (std::size_t i = 0; i < states.size(); ++i)
        known_.emplace(states[i], value[i] == inf ? kNever : value[i]);
    return value[0] == inf ? std::nullopt : std::optional<int>(value[0]);
}

SimpleCovering CoveringOracle::tree(const Sieve& sieve) const
{
    const SiteCategory& c = cd_.site();
    const auto d = minimal_depth(sieve);
    if (!d)
        throw NotACovering("sieve contains no simple covering");
    SimpleCovering t;
    t.object = sieve.target;
    if (*d == 0) {
        t.empty_leaf = !sieve.contains_identity(c);
        return t;
    }
    for (int qi : cd_.squares_over(sieve.target)) {
        const auto& q = cd_.squares()[qi];
        const Sieve l = sieve.pullback(c, q.e);
        const Sieve r = sieve.pullback(c, q.p);
        const auto dl = minimal_depth(l);
        const auto dr = minimal_depth(r);
        if (dl && dr && 1 + std::max(*dl, *dr) == *d) {
            t.square = qi;
            t.children.push_back(tree(l));
            t.children.push_back(tree(r));
            return t;
        }
    }
    throw Error("covering search cache is inconsistent");
}

CoverSearchResult CoveringOracle::search(const Sieve& sieve, int depth) const
{
    CoverSearchResult out;
    try {
        out.minimal_depth = minimal_depth(sieve);
    } catch (const DepthExhausted&) {
        return out;
    }
    if (!out.minimal_depth) {
        out.verdict = Verdict::no;
    } else if (*out.minimal_depth <= depth) {
        out.verdict = Verdict::yes;
        out.tree = tree(sieve);
    }
    return out;
}

CoverSearchResult sieve_contains_simple_covering(const CdSite& cd, const Sieve& sieve, int depth)
{
    if (!sieve.is_valid(cd.site()))
        throw PreconditionViolated("not a sieve: not closed under precomposition");
    return CoveringOracle(cd).search(sieve, depth);
}

bool CoveringFamily::covers(const Sieve& s) const
{
    for (const auto& m : minimal)
        if (m.subset_of(s))
            return true;
    return false;
}

namespace {

void keep_minimal(std::vector<Sieve>& sieves)
{
    std::sort(sieves.begin(), sieves.end(), [](const Sieve& a, const Sieve& b) {
        const auto ca = std::count(a.members.begin(), a.members.end(), true);
        const auto cb = std::count(b.members.begin(), b.members.end(), true);
        return ca != cb ? ca < cb : a.members < b.members;
    });
    std::vector<Sieve> out;
    for (auto& s : sieves) {
        bool redundant = false;
        for (const auto& m : out)
            if (m.subset_of(s)) {
                redundant = true;
                break;
            }
        if (!redundant)
            out.push_back(std::move(s));
    }
    sieves = std::move(out);
}

}  // namespace

CoveringFamily covering_sieves(const CdSite& cd, int object, int depth, std::size_t cap)
{
    if (depth < 0)
        throw PreconditionViolated("depth must be non-negative");
    const SiteCategory& c = cd.site();
    std::map<std::pair<int, int>, std::vector<Sieve>> memo;
    std::function<const std::vector<Sieve>&(int, int)> level = [&](int x, int d) -> const std::vector<Sieve>& {
        auto key = std::make_pair(x, d);
        if (auto it = memo.find(key); it != memo.end())
            return it->second;
        std::vector<Sieve> out;
        if (c.is_empty_object(x))
            out.push_back(Sieve::empty(c, x));
        else
            out.push_back(Sieve::maximal(c, x));
        if (d > 0) {
            for (int qi : cd.squares_over(x)) {
                const auto& q = cd.squares()[qi];
                const auto left = level(q.a, d - 1);
                const auto& right = level(q.y, d - 1);
                for (const auto& s1 : left)
                    for (const auto& s2 : right) {
                        Sieve s = s1.pushforward(c, q.e);
                        s.unite(s2.pushforward(c, q.p));
                        out.push_back(std::move(s));
                        if (out.size() > cap)
                            throw DepthExhausted("too many covering sieves");
                    }
            }
        }
        keep_minimal(out);
        return memo.emplace(key, std::move(out)).first->second;
    };
    return CoveringFamily{object, level(object, depth)};
}

SiteSquare pullback_square(const SiteCategory& site, const SiteSquare& q, int f)
{
    if (site.target(f) != q.x)
        throw PreconditionViolated("base change along a map into a different object");
    const auto ca = site.pullback(f, q.e);
    const auto cy = site.pullback(f, q.p);
    if (!ca || !cy)
        throw MissingPullback("category has no pullback of a leg along the given map");
    const auto cb = site.pullback(ca->to_left, cy->to_left);
    if (!cb)
        throw MissingPullback("category has no pullback of the base-changed legs");
    return SiteSquare{site.source(f), ca->object, cy->object, cb->object,
                      ca->to_left,    cy->to_left, cb->to_left, cb->to_right};
}

int max_dimension(const SiteCategory& site)
{
    int best = -1;
    for (int o = 0; o < site.object_count(); ++o)
        best = std::max(best, dimension(site.object(o)));
    return best;
}

}  // namespace cdsite
