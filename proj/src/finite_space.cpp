#include "cdsite/finite_space.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "cdsite/errors.hpp"

namespace cdsite {

namespace {

void transitive_closure(std::vector<PointSet>& above)
{
    const int n = static_cast<int>(above.size());
    for (int i = 0; i < n; ++i)
        above[i] |= bit(i);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < n; ++i) {
            PointSet acc = above[i];
            for (int j : members(above[i]))
                acc |= above[j];
            if (acc != above[i]) {
                above[i] = acc;
                changed = true;
            }
        }
    }
}

}  // namespace

FiniteSpace FiniteSpace::from_relation(std::vector<Point> points, const std::vector<PointSet>& above)
{
    const int n = static_cast<int>(points.size());
    if (n > kMaxPoints)
        throw ValidationError("size", "space has more than 64 points");
    std::vector<PointSet> closed = above;
    closed.resize(n, 0);
    transitive_closure(closed);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (contains(closed[i], j) && contains(closed[j], i))
                throw ValidationError("antisymmetry", "points '" + points[i].id + "' and '" + points[j].id +
                                                          "' specialize each other");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return points[a].id < points[b].id; });
    for (int i = 0; i + 1 < n; ++i)
        if (points[order[i]].id == points[order[i + 1]].id)
            throw ValidationError("unique-ids", "duplicate point identifier '" + points[order[i]].id + "'");
    std::vector<int> rank(n);
    for (int i = 0; i < n; ++i)
        rank[order[i]] = i;

    FiniteSpace space;
    space.points_.resize(n);
    space.up_.assign(n, 0);
    space.down_.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        space.points_[rank[i]] = std::move(points[i]);
        for (int j : members(closed[i])) {
            space.up_[rank[i]] |= bit(rank[j]);
            space.down_[rank[j]] |= bit(rank[i]);
        }
    }
    return space;
}

FiniteSpace FiniteSpace::build(std::vector<Point> points,
                               const std::vector<std::pair<std::string, std::string>>& specializations)
{
    std::map<std::string, int> where;
    for (int i = 0; i < static_cast<int>(points.size()); ++i)
        if (!where.emplace(points[i].id, i).second)
            throw ValidationError("unique-ids", "duplicate point identifier '" + points[i].id + "'");
    std::vector<PointSet> above(points.size(), 0);
    for (const auto& [a, b] : specializations) {
        auto ia = where.find(a);
        auto ib = where.find(b);
        if (ia == where.end())
            throw UnknownPoint(a);
        if (ib == where.end())
            throw UnknownPoint(b);
        above[ia->second] |= bit(ib->second);
    }
    return from_relation(std::move(points), above);
}

std::optional<int> FiniteSpace::find(std::string_view id) const
{
    auto it = std::lower_bound(points_.begin(), points_.end(), id,
                               [](const Point& p, std::string_view v) { return p.id < v; });
    if (it == points_.end() || it->id != id)
        return std::nullopt;
    return static_cast<int>(it - points_.begin());
}

int FiniteSpace::index_of(std::string_view id) const
{
    auto i = find(id);
    if (!i)
        throw UnknownPoint(std::string(id));
    return *i;
}

PointSet FiniteSpace::set_of(const std::vector<std::string>& ids) const
{
    PointSet s = 0;
    for (const auto& id : ids)
        s |= bit(index_of(id));
    return s;
}

std::vector<std::string> FiniteSpace::ids_of(PointSet s) const
{
    std::vector<std::string> out;
    for (int i : members(s))
        out.push_back(id(i));
    return out;
}

FiniteSpace FiniteSpace::subspace(PointSet s) const
{
    FiniteSpace sub;
    const auto keep = members(s & all());
    std::vector<int> pos(size(), -1);
    for (int k = 0; k < static_cast<int>(keep.size()); ++k)
        pos[keep[k]] = k;
    for (int i : keep) {
        sub.points_.push_back(points_[i]);
        PointSet u = 0, d = 0;
        for (int j : members(up_[i] & s))
            u |= bit(pos[j]);
        for (int j : members(down_[i] & s))
            d |= bit(pos[j]);
        sub.up_.push_back(u);
        sub.down_.push_back(d);
    }
    return sub;
}

FiniteSpace FiniteSpace::relabeled(const std::vector<std::string>& labels) const
{
    FiniteSpace out = *this;
    for (int i = 0; i < size(); ++i)
        out.points_[i].label = labels[i];
    return out;
}

std::vector<std::pair<int, int>> FiniteSpace::cover_relations() const
{
    std::vector<std::pair<int, int>> out;
    for (int x = 0; x < size(); ++x)
        for (int y : members(up_[x] & ~bit(x))) {
            const PointSet between = (up_[x] & down_[y]) & ~(bit(x) | bit(y));
            if (between == 0)
                out.emplace_back(x, y);
        }
    return out;
}

bool operator==(const FiniteSpace& a, const FiniteSpace& b)
{
    if (a.size() != b.size())
        return false;
    for (int i = 0; i < a.size(); ++i)
        if (a.points_[i].id != b.points_[i].id || a.points_[i].label != b.points_[i].label ||
            a.up_[i] != b.up_[i])
            return false;
    return true;
}

PointSet image_of(Graph g, PointSet s)
{
    PointSet out = 0;
    for (int x : members(s))
        out |= bit(g[x]);
    return out;
}

PointSet preimage_of(Graph g, PointSet s)
{
    PointSet out = 0;
    for (int x = 0; x < static_cast<int>(g.size()); ++x)
        if (contains(s, g[x]))
            out |= bit(x);
    return out;
}

PointSet SpaceMap::image(PointSet s) const { return image_of(graph, s); }
PointSet SpaceMap::preimage(PointSet s) const { return preimage_of(graph, s); }

SpaceMap compose(const SpaceMap& f, const SpaceMap& g)
{
    SpaceMap out{g.source, f.target, std::vector<int>(g.graph.size())};
    for (std::size_t i = 0; i < g.graph.size(); ++i)
        out.graph[i] = f.graph[g.graph[i]];
    return out;
}

SpaceMap identity_map(const SpacePtr& space)
{
    SpaceMap out{space, space, std::vector<int>(space->size())};
    std::iota(out.graph.begin(), out.graph.end(), 0);
    return out;
}

SpaceMap inclusion_map(const SpacePtr& ambient, PointSet subset, SpacePtr* sub_out)
{
    auto sub = share(ambient->subspace(subset));
    if (sub_out)
        *sub_out = sub;
    return SpaceMap{sub, ambient, members(subset)};
}

bool is_monotone(const FiniteSpace& src, const FiniteSpace& dst, Graph g)
{
    for (int x = 0; x < src.size(); ++x)
        for (int y : members(src.up(x)))
            if (!dst.leq(g[x], g[y]))
                return false;
    return true;
}

bool is_label_compatible(const FiniteSpace& src, const FiniteSpace& dst, Graph g, const ResidueOrder& residues)
{
    for (int x = 0; x < src.size(); ++x)
        if (!residues.extends(dst.label(g[x]), src.label(x)))
            return false;
    return true;
}

bool is_label_preserving(const FiniteSpace& src, const FiniteSpace& dst, Graph g)
{
    for (int x = 0; x < src.size(); ++x)
        if (dst.label(g[x]) != src.label(x))
            return false;
    return true;
}

bool is_morphism(const FiniteSpace& src, const FiniteSpace& dst, Graph g, const ResidueOrder& residues)
{
    if (static_cast<int>(g.size()) != src.size())
        return false;
    for (int y : g)
        if (y < 0 || y >= dst.size())
            return false;
    return is_monotone(src, dst, g) && is_label_compatible(src, dst, g, residues);
}

bool is_injective(Graph g)
{
    PointSet seen = 0;
    for (int y : g) {
        if (contains(seen, y))
            return false;
        seen |= bit(y);
    }
    return true;
}

bool is_embedding(const FiniteSpace& src, const FiniteSpace& dst, Graph g)
{
    if (!is_injective(g) || !is_label_preserving(src, dst, g))
        return false;
    for (int x = 0; x < src.size(); ++x)
        for (int y = 0; y < src.size(); ++y)
            if (src.leq(x, y) != dst.leq(g[x], g[y]))
                return false;
    return true;
}

bool is_open_embedding(const FiniteSpace& src, const FiniteSpace& dst, Graph g)
{
    if (!is_embedding(src, dst, g))
        return false;
    const PointSet img = image_of(g, src.all());
    for (int y : members(img))
        if (!subset_of(dst.up(y), img))
            return false;
    return true;
}

bool is_closed_embedding(const FiniteSpace& src, const FiniteSpace& dst, Graph g)
{
    if (!is_embedding(src, dst, g))
        return false;
    const PointSet img = image_of(g, src.all());
    for (int y : members(img))
        if (!subset_of(dst.down(y), img))
            return false;
    return true;
}

bool is_etale_like(const FiniteSpace& src, const FiniteSpace& dst, Graph g)
{
    if (!is_label_preserving(src, dst, g) || !is_monotone(src, dst, g))
        return false;
    for (int y = 0; y < src.size(); ++y) {
        const PointSet nbhd = src.up(y);
        const PointSet target = dst.up(g[y]);
        if (cardinality(nbhd) != cardinality(target) || image_of(g, nbhd) != target)
            return false;
        for (int a : members(nbhd))
            for (int b : members(nbhd))
                if (src.leq(a, b) != dst.leq(g[a], g[b]))
                    return false;
    }
    return true;
}

bool is_proper_like(const FiniteSpace& src, const FiniteSpace& dst, Graph g, const ResidueOrder& residues)
{
    if (!is_morphism(src, dst, g, residues))
        return false;
    for (int y = 0; y < src.size(); ++y)
        if (image_of(g, src.down(y)) != dst.down(g[y]))
            return false;
    return true;
}

bool is_iso_over(const FiniteSpace& src, const FiniteSpace& dst, Graph g, PointSet s)
{
    const PointSet pre = preimage_of(g, s);
    if (cardinality(pre) != cardinality(s) || image_of(g, pre) != s)
        return false;
    for (int a : members(pre)) {
        if (src.label(a) != dst.label(g[a]))
            return false;
        for (int b : members(pre))
            if (src.leq(a, b) != dst.leq(g[a], g[b]))
                return false;
    }
    return true;
}

FiberProduct fiber_product(const FiniteSpace& left, Graph left_map, const FiniteSpace& right, Graph right_map,
                           const ResidueOrder& residues)
{
    std::vector<FiniteSpace::Point> pts;
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < left.size(); ++a)
        for (int y = 0; y < right.size(); ++y) {
            if (left_map[a] != right_map[y])
                continue;
            auto label = residues.join(left.label(a), right.label(y));
            if (!label)
                throw MissingPullback("residue symbols '" + left.label(a) + "' and '" + right.label(y) +
                                      "' have no least common extension");
            if (static_cast<int>(pairs.size()) == kMaxPoints)
                throw MissingPullback("fiber product exceeds 64 points");
            pts.push_back({"(" + left.id(a) + "," + right.id(y) + ")", *label});
            pairs.emplace_back(a, y);
        }
    std::vector<PointSet> above(pairs.size(), 0);
    for (std::size_t i = 0; i < pairs.size(); ++i)
        for (std::size_t j = 0; j < pairs.size(); ++j)
            if (left.leq(pairs[i].first, pairs[j].first) && right.leq(pairs[i].second, pairs[j].second))
                above[i] |= bit(static_cast<int>(j));
    FiberProduct out;
    out.space = FiniteSpace::from_relation(pts, above);
    out.to_left.resize(pairs.size());
    out.to_right.resize(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const int k = out.space.index_of(pts[i].id);
        out.to_left[k] = pairs[i].first;
        out.to_right[k] = pairs[i].second;
    }
    return out;
}

Coproduct coproduct(const FiniteSpace& left, const FiniteSpace& right)
{
    std::vector<FiniteSpace::Point> pts;
    std::vector<PointSet> above;
    const int nl = left.size();
    for (int i = 0; i < nl; ++i) {
        pts.push_back({"0:" + left.id(i), left.label(i)});
        above.push_back(left.up(i));
    }
    for (int i = 0; i < right.size(); ++i) {
        pts.push_back({"1:" + right.id(i), right.label(i)});
        above.push_back(right.up(i) << nl);
    }
    Coproduct out;
    out.space = FiniteSpace::from_relation(pts, above);
    for (int i = 0; i < nl; ++i)
        out.from_left.push_back(out.space.index_of("0:" + left.id(i)));
    for (int i = 0; i < right.size(); ++i)
        out.from_right.push_back(out.space.index_of("1:" + right.id(i)));
    return out;
}

std::vector<PointSet> components(const FiniteSpace& space)
{
    std::vector<PointSet> out;
    PointSet seen = 0;
    for (int x = 0; x < space.size(); ++x) {
        if (contains(seen, x))
            continue;
        PointSet comp = bit(x);
        PointSet frontier = comp;
        while (frontier != 0) {
            PointSet next = 0;
            for (int y : members(frontier))
                next |= space.up(y) | space.down(y);
            frontier = next & ~comp;
            comp |= next;
        }
        seen |= comp;
        out.push_back(comp);
    }
    return out;
}

namespace {

struct IsoSearch {
    const FiniteSpace& a;
    const FiniteSpace& b;
    std::vector<std::vector<int>> candidates;
    std::vector<int> order;
    std::vector<int> assignment;
    PointSet used = 0;

    bool consistent(int x, int y) const
    {
        for (int k = 0; k < a.size(); ++k) {
            const int z = assignment[k];
            if (z < 0)
                continue;
            if (a.leq(x, k) != b.leq(y, z) || a.leq(k, x) != b.leq(z, y))
                return false;
        }
        return true;
    }

    bool search(std::size_t depth)
    {
        if (depth == order.size())
            return true;
        const int x = order[depth];
        for (int y : candidates[x]) {
            if (contains(used, y) || !consistent(x, y))
                continue;
            assignment[x] = y;
            used |= bit(y);
            if (search(depth + 1))
                return true;
            assignment[x] = -1;
            used &= ~bit(y);
        }
        return false;
    }
};

}  // namespace

std::optional<std::vector<int>> find_isomorphism(const FiniteSpace& a, const FiniteSpace& b,
                                                 const std::function<bool(int, int)>& allowed)
{
    if (a.size() != b.size())
        return std::nullopt;
    IsoSearch s{a, b, std::vector<std::vector<int>>(a.size()), {}, std::vector<int>(a.size(), -1)};
    for (int x = 0; x < a.size(); ++x) {
        for (int y = 0; y < b.size(); ++y) {
            if (a.label(x) != b.label(y) || cardinality(a.up(x)) != cardinality(b.up(y)) ||
                cardinality(a.down(x)) != cardinality(b.down(y)))
                continue;
            if (allowed && !allowed(x, y))
                continue;
            s.candidates[x].push_back(y);
        }
        if (s.candidates[x].empty())
            return std::nullopt;
        s.order.push_back(x);
    }
    std::sort(s.order.begin(), s.order.end(),
              [&](int x, int y) { return s.candidates[x].size() < s.candidates[y].size(); });
    if (!s.search(0))
        return std::nullopt;
    return s.assignment;
}

std::vector<std::vector<int>> enumerate_morphisms(const FiniteSpace& src, const FiniteSpace& dst,
                                                  const ResidueOrder& residues,
                                                  const std::function<bool(int, int)>& allowed)
{
    std::vector<std::vector<int>> out;
    const int n = src.size();
    std::vector<std::vector<int>> candidates(n);
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < dst.size(); ++y)
            if (residues.extends(dst.label(y), src.label(x)) && (!allowed || allowed(x, y)))
                candidates[x].push_back(y);
        if (candidates[x].empty())
            return out;
    }
    std::vector<int> g(n, -1);
    std::function<void(int)> rec = [&](int x) {
        if (x == n) {
            out.push_back(g);
            return;
        }
        for (int y : candidates[x]) {
            bool ok = true;
            for (int k = 0; k < x && ok; ++k) {
                if (src.leq(k, x) && !dst.leq(g[k], y))
                    ok = false;
                if (src.leq(x, k) && !dst.leq(y, g[k]))
                    ok = false;
            }
            if (!ok)
                continue;
            g[x] = y;
            rec(x + 1);
        }
        g[x] = -1;
    };
    rec(0);
    return out;
}

}  // namespace cdsite
