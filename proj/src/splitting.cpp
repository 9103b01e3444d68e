#include "cdsite/splitting.hpp"

#include <algorithm>
#include <functional>

#include "cdsite/density.hpp"
#include "cdsite/errors.hpp"

namespace cdsite {

std::string_view to_string(Side side) { return side == Side::upper ? "upper" : "lower"; }

PointSet SplittingSequence::stratum(int i) const
{
    const PointSet next = i + 1 < static_cast<int>(closed.size()) ? closed[i + 1] : 0;
    return closed[i] & ~next;
}

bool has_residue_iso_lifts(const SpaceMap& f)
{
    std::vector<bool> hit(f.target->size(), false);
    for (int y = 0; y < f.source->size(); ++y)
        if (f.source->label(y) == f.target->label(f(y)))
            hit[f(y)] = true;
    return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

std::optional<std::vector<int>> find_section(const SpaceMap& f, PointSet over)
{
    const FiniteSpace& src = *f.source;
    const FiniteSpace& dst = *f.target;
    const auto pts = members(over);
    std::vector<std::vector<int>> options(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
        for (int y = 0; y < src.size(); ++y)
            if (f(y) == pts[k] && src.label(y) == dst.label(pts[k]))
                options[k].push_back(y);
        if (options[k].empty())
            return std::nullopt;
    }
    std::vector<int> s(dst.size(), -1);
    std::function<bool(std::size_t)> place = [&](std::size_t k) {
        if (k == pts.size())
            return true;
        const int x = pts[k];
        for (int y : options[k]) {
            bool ok = true;
            for (std::size_t j = 0; j < k && ok; ++j) {
                const int x2 = pts[j];
                if (dst.leq(x2, x) && !src.leq(s[x2], y))
                    ok = false;
                if (dst.leq(x, x2) && !src.leq(y, s[x2]))
                    ok = false;
            }
            if (!ok)
                continue;
            s[x] = y;
            if (place(k + 1))
                return true;
        }
        s[x] = -1;
        return false;
    };
    if (!place(0))
        return std::nullopt;
    return s;
}

bool is_splitting_sequence(const SpaceMap& f, const SplittingSequence& s)
{
    const FiniteSpace& dst = *f.target;
    const FiniteSpace& src = *f.source;
    if (dst.empty())
        return s.closed.empty() && s.sections.empty();
    if (s.closed.empty() || s.closed.size() != s.sections.size() || s.closed[0] != dst.all())
        return false;
    for (std::size_t i = 0; i < s.closed.size(); ++i) {
        if (!is_closed(dst, s.closed[i]) || s.closed[i] == 0)
            return false;
        if (i > 0 && (!subset_of(s.closed[i], s.closed[i - 1]) || s.closed[i] == s.closed[i - 1]))
            return false;
        const PointSet st = s.stratum(static_cast<int>(i));
        const auto& sec = s.sections[i];
        if (static_cast<int>(sec.size()) != dst.size())
            return false;
        for (int x = 0; x < dst.size(); ++x) {
            if (!contains(st, x)) {
                if (sec[x] != -1)
                    return false;
                continue;
            }
            if (sec[x] < 0 || sec[x] >= src.size() || f(sec[x]) != x || src.label(sec[x]) != dst.label(x))
                return false;
            for (int x2 : members(st))
                if (dst.leq(x, x2) && !src.leq(sec[x], sec[x2]))
                    return false;
        }
    }
    return true;
}

std::optional<SplittingSequence> splitting_sequence(const SpaceMap& f)
{
    const FiniteSpace& dst = *f.target;
    SplittingSequence out;
    if (!has_residue_iso_lifts(f))
        return std::nullopt;
    PointSet z = dst.all();
    while (z != 0) {
        const auto pts = members(z);
        const FiniteSpace sub = dst.subspace(z);
        std::vector<std::vector<int>> opens;
        for (PointSet o : open_subsets(sub)) {
            if (o == 0)
                continue;
            std::vector<int> idx;
            for (int k : members(o))
                idx.push_back(pts[k]);
            opens.push_back(std::move(idx));
        }
        std::sort(opens.begin(), opens.end(), [](const auto& a, const auto& b) {
            return a.size() != b.size() ? a.size() > b.size() : a < b;
        });
        bool advanced = false;
        for (const auto& o : opens) {
            PointSet os = 0;
            for (int x : o)
                os |= bit(x);
            if (auto s = find_section(f, os)) {
                out.closed.push_back(z);
                out.sections.push_back(std::move(*s));
                z &= ~os;
                advanced = true;
                break;
            }
        }
        if (!advanced)
            return std::nullopt;
    }
    return out;
}

namespace {

void require_class(const SpaceMap& f, Side side, const ResidueOrder& residues)
{
    if (side == Side::upper && !is_etale_like(*f.source, *f.target, f.graph))
        throw WrongMorphismClass("upper coverings need an étale-like map");
    if (side == Side::lower && !is_proper_like(*f.source, *f.target, f.graph, residues))
        throw WrongMorphismClass("lower coverings need a proper-like map");
}

PointSet section_image(const std::vector<int>& section, PointSet over)
{
    PointSet out = 0;
    for (int x : members(over))
        out |= bit(section[x]);
    return out;
}

/// Graph of the restriction part → into of `graph`, in subspace indices.
std::vector<int> restricted(const std::vector<int>& graph, PointSet part, PointSet into)
{
    const auto into_pts = members(into);
    std::vector<int> out;
    for (int x : members(part))
        out.push_back(static_cast<int>(std::lower_bound(into_pts.begin(), into_pts.end(), graph[x]) -
                                       into_pts.begin()));
    return out;
}

struct Builder {
    const SpaceMap& f;
    Side side;
    const ResidueOrder& residues;

    CoveringTree leaf_over_source(PointSet ys) const
    {
        CoveringTree t;
        t.object = f.source->subspace(ys);
        for (int y : members(ys)) {
            t.to_base.push_back(f(y));
            t.lift.push_back(y);
        }
        return t;
    }

    // Node over the subspace xs of the base, given the strata Z_0 = xs ⊋ … ⊋ Z_n and their sections.
    CoveringTree build(PointSet xs, std::vector<PointSet> closed, std::vector<std::vector<int>> sections) const
    {
        CoveringTree t;
        t.object = f.target->subspace(xs);
        t.to_base = members(xs);
        if (xs == 0)
            return t;
        const int n = static_cast<int>(closed.size()) - 1;
        if (n == 0) {
            for (int x : members(xs))
                t.lift.push_back(sections[0][x]);
            return t;
        }
        PointSet a, w;
        if (side == Side::upper) {
            a = xs & ~closed[n];
            w = f.preimage(closed[n]) & ~section_image(sections[n], closed[n]);
            closed.pop_back();
            sections.pop_back();
            for (auto& z : closed)
                z &= a;
        } else {
            a = closed[1];
            const PointSet u = xs & ~closed[1];
            w = f.preimage(u) & ~section_image(sections[0], u);
            closed.erase(closed.begin());
            sections.erase(sections.begin());
        }
        const PointSet ys = f.preimage(xs) & ~w;
        std::vector<int> identity(f.target->size());
        for (int x = 0; x < f.target->size(); ++x)
            identity[x] = x;
        t.square = complete_square(t.object, f.target->subspace(a), restricted(identity, a, xs),
                                   f.source->subspace(ys), restricted(f.graph, ys, xs), residues);
        t.children.push_back(build(a, std::move(closed), std::move(sections)));
        t.children.push_back(leaf_over_source(ys));
        return t;
    }
};

bool valid_node(const SpaceMap& f, const CdStructure& st, const CoveringTree& t, const ResidueOrder& residues)
{
    if (static_cast<int>(t.to_base.size()) != t.object.size() ||
        !is_morphism(t.object, *f.target, t.to_base, residues))
        return false;
    if (t.is_leaf()) {
        if (t.object.empty())
            return t.children.empty();
        if (static_cast<int>(t.lift.size()) != t.object.size() || !t.children.empty() ||
            !is_morphism(t.object, *f.source, t.lift, residues))
            return false;
        for (int i = 0; i < t.object.size(); ++i)
            if (f(t.lift[i]) != t.to_base[i])
                return false;
        return true;
    }
    const ConcreteSquare& q = *t.square;
    if (t.children.size() != 2 || !(q.x == t.object) || !st.admits(q, residues) || !commutes(q))
        return false;
    const auto& ca = t.children[0];
    const auto& cy = t.children[1];
    if (!(ca.object == q.a) || !(cy.object == q.y))
        return false;
    for (int i = 0; i < q.a.size(); ++i)
        if (ca.to_base[i] != t.to_base[q.e[i]])
            return false;
    for (int i = 0; i < q.y.size(); ++i)
        if (cy.to_base[i] != t.to_base[q.p[i]])
            return false;
    return valid_node(f, st, ca, residues) && valid_node(f, st, cy, residues);
}

}  // namespace

int CoveringTree::depth() const
{
    int d = 0;
    for (const auto& c : children)
        d = std::max(d, c.depth() + 1);
    return d;
}

bool is_cd_covering(const SpaceMap& f, Side side, const ResidueOrder& residues)
{
    require_class(f, side, residues);
    return splitting_sequence(f).has_value();
}

CoveringTree covering_decomposition(const SpaceMap& f, Side side, const ResidueOrder& residues)
{
    require_class(f, side, residues);
    Builder b{f, side, residues};
    auto seq = splitting_sequence(f);
    if (!seq)
        throw NotACovering("some point has no lift with the same residue symbol");
    return b.build(f.target->all(), std::move(seq->closed), std::move(seq->sections));
}

bool is_valid_decomposition(const SpaceMap& f, Side side, const CoveringTree& tree, const ResidueOrder& residues)
{
    if (!(tree.object == *f.target))
        return false;
    for (int x = 0; x < f.target->size(); ++x)
        if (tree.to_base[x] != x)
            return false;
    const auto st = standard_structure(side == Side::upper ? StructureName::up : StructureName::low);
    return valid_node(f, st, tree, residues);
}

}  // namespace cdsite
