#include "cdsite/squares.hpp"

#include <algorithm>
#include <map>

#include "cdsite/errors.hpp"

namespace cdsite {

namespace {

int rank_in(PointSet s, int i) { return cardinality(s & (bit(i) - 1)); }

std::vector<int> restrict_graph(const std::vector<int>& g, PointSet from, PointSet to)
{
    std::vector<int> out;
    for (int i : members(from))
        out.push_back(rank_in(to, g[i]));
    return out;
}

bool lifts_specializations(const FiniteSpace& src, const FiniteSpace& dst, Graph g)
{
    for (int y = 0; y < src.size(); ++y)
        if (image_of(g, src.down(y)) != dst.down(g[y]))
            return false;
    return true;
}

bool basic_shape(const ConcreteSquare& q, StructureName name, const ResidueOrder& residues)
{
    const PointSet ea = image_of(q.e, q.a.all());
    const PointSet py = image_of(q.p, q.y.all());
    const PointSet rest = q.x.all() & ~ea;
    switch (name) {
    case StructureName::add:
        return q.b.empty() && is_embedding(q.a, q.x, q.e) && is_embedding(q.y, q.x, q.p) && (ea & py) == 0 &&
               (ea | py) == q.x.all() && is_open_embedding(q.a, q.x, q.e) && is_closed_embedding(q.a, q.x, q.e);
    case StructureName::p_up:
        return is_open_embedding(q.a, q.x, q.e) && is_open_embedding(q.y, q.x, q.p) && (ea | py) == q.x.all();
    case StructureName::p_low:
        return is_closed_embedding(q.a, q.x, q.e) && is_closed_embedding(q.y, q.x, q.p) && (ea | py) == q.x.all();
    case StructureName::up:
        return is_open_embedding(q.a, q.x, q.e) && is_etale_like(q.y, q.x, q.p) &&
               is_iso_over(q.y, q.x, q.p, rest);
    case StructureName::low:
        return is_closed_embedding(q.a, q.x, q.e) && is_proper_like(q.y, q.x, q.p, residues) &&
               is_iso_over(q.y, q.x, q.p, rest);
    default:
        return false;
    }
}

bool basic_right_leg(StructureName name, const FiniteSpace& src, const FiniteSpace& dst, Graph g)
{
    switch (name) {
    case StructureName::add:
        return is_embedding(src, dst, g);
    case StructureName::p_up:
        return is_open_embedding(src, dst, g);
    case StructureName::p_low:
        return is_closed_embedding(src, dst, g);
    case StructureName::up:
        return is_etale_like(src, dst, g);
    case StructureName::low:
        return is_monotone(src, dst, g) && lifts_specializations(src, dst, g);
    default:
        return false;
    }
}

}  // namespace

bool commutes(const ConcreteSquare& q)
{
    for (int b = 0; b < q.b.size(); ++b)
        if (q.e[q.e_b[b]] != q.p[q.p_b[b]])
            return false;
    return true;
}

bool is_pullback_square(const ConcreteSquare& q, const ResidueOrder& residues)
{
    if (!commutes(q))
        return false;
    int pairs = 0;
    for (int a = 0; a < q.a.size(); ++a)
        for (int y = 0; y < q.y.size(); ++y)
            if (q.e[a] == q.p[y])
                ++pairs;
    if (pairs != q.b.size())
        return false;
    for (int b1 = 0; b1 < q.b.size(); ++b1) {
        auto joined = residues.join(q.a.label(q.e_b[b1]), q.y.label(q.p_b[b1]));
        if (!joined || *joined != q.b.label(b1))
            return false;
        for (int b2 = 0; b2 < q.b.size(); ++b2) {
            if (b1 != b2 && q.e_b[b1] == q.e_b[b2] && q.p_b[b1] == q.p_b[b2])
                return false;
            const bool product = q.a.leq(q.e_b[b1], q.e_b[b2]) && q.y.leq(q.p_b[b1], q.p_b[b2]);
            if (product != q.b.leq(b1, b2))
                return false;
        }
    }
    return true;
}

ConcreteSquare complete_square(const FiniteSpace& x, const FiniteSpace& a, std::vector<int> e, const FiniteSpace& y,
                               std::vector<int> p, const ResidueOrder& residues)
{
    auto fp = fiber_product(a, e, y, p, residues);
    return ConcreteSquare{x, a, y, std::move(fp.space), std::move(e), std::move(p), std::move(fp.to_left),
                          std::move(fp.to_right)};
}

ConcreteSquare restrict_square(const ConcreteSquare& q, PointSet x_part, PointSet a_part, PointSet y_part)
{
    if (!subset_of(image_of(q.e, a_part), x_part) || !subset_of(image_of(q.p, y_part), x_part))
        throw PreconditionViolated("restricted corners do not land in the restricted base");
    const PointSet b_part = preimage_of(q.e_b, a_part) & preimage_of(q.p_b, y_part);
    return ConcreteSquare{q.x.subspace(x_part),
                          q.a.subspace(a_part),
                          q.y.subspace(y_part),
                          q.b.subspace(b_part),
                          restrict_graph(q.e, a_part, x_part),
                          restrict_graph(q.p, y_part, x_part),
                          restrict_graph(q.e_b, b_part, a_part),
                          restrict_graph(q.p_b, b_part, y_part)};
}

const std::array<StructureName, 9>& all_structures()
{
    static const std::array<StructureName, 9> names{
        StructureName::add, StructureName::p_up, StructureName::up,       StructureName::p_low, StructureName::p,
        StructureName::p_low_up, StructureName::low, StructureName::low_p_up, StructureName::cdh};
    return names;
}

std::string_view to_string(StructureName name)
{
    switch (name) {
    case StructureName::add: return "add";
    case StructureName::p_up: return "p.up";
    case StructureName::up: return "up";
    case StructureName::p_low: return "p.low";
    case StructureName::p: return "p";
    case StructureName::p_low_up: return "p.low+up";
    case StructureName::low: return "low";
    case StructureName::low_p_up: return "low+p.up";
    case StructureName::cdh: return "cdh";
    }
    return "?";
}

std::optional<StructureName> parse_structure(std::string_view text)
{
    for (auto n : all_structures())
        if (to_string(n) == text)
            return n;
    return std::nullopt;
}

std::vector<std::pair<StructureName, StructureName>> lattice_inclusions()
{
    using S = StructureName;
    return {{S::add, S::p_up},   {S::p_up, S::up},          {S::p_low, S::p},       {S::p, S::p_low_up},
            {S::low, S::low_p_up}, {S::low_p_up, S::cdh},   {S::add, S::p_low},     {S::p_low, S::low},
            {S::p_up, S::p},       {S::p, S::low_p_up},     {S::up, S::p_low_up},   {S::p_low_up, S::cdh}};
}

bool lattice_leq(StructureName smaller, StructureName larger)
{
    if (smaller == larger)
        return true;
    for (auto [from, to] : lattice_inclusions())
        if (from == smaller && lattice_leq(to, larger))
            return true;
    return false;
}

std::vector<StructureName> generating_structures(StructureName name)
{
    using S = StructureName;
    switch (name) {
    case S::p: return {S::p_up, S::p_low};
    case S::p_low_up: return {S::p_low, S::up};
    case S::low_p_up: return {S::low, S::p_up};
    case S::cdh: return {S::up, S::low};
    default: return {name};
    }
}

bool classify_square(const ConcreteSquare& q, StructureName name, const ResidueOrder& residues)
{
    if (!is_pullback_square(q, residues))
        return false;
    for (auto basic : generating_structures(name))
        if (basic_shape(q, basic, residues))
            return true;
    return false;
}

CdStructure standard_structure(StructureName name)
{
    CdStructure s;
    s.name = std::string(to_string(name));
    s.predicate = [name](const ConcreteSquare& q, const ResidueOrder& r) { return classify_square(q, name, r); };
    s.left_filter = [](const FiniteSpace& src, const FiniteSpace& dst, Graph g) { return is_embedding(src, dst, g); };
    s.right_filter = [name](const FiniteSpace& src, const FiniteSpace& dst, Graph g) {
        for (auto basic : generating_structures(name))
            if (basic_right_leg(basic, src, dst, g))
                return true;
        return false;
    };
    s.jointly_surjective = true;
    return s;
}

DerivedSquare derived_square(const ConcreteSquare& q, const ResidueOrder& residues)
{
    DerivedSquare d{fiber_product(q.y, q.p, q.y, q.p, residues), fiber_product(q.b, q.e_b, q.b, q.e_b, residues),
                    {}, {}};
    std::map<std::pair<int, int>, int> where;
    for (int k = 0; k < d.yy.space.size(); ++k)
        where[{d.yy.to_left[k], d.yy.to_right[k]}] = k;
    for (int k = 0; k < d.bb.space.size(); ++k)
        d.bb_to_yy.push_back(where.at({q.p_b[d.bb.to_left[k]], q.p_b[d.bb.to_right[k]]}));
    for (int y = 0; y < q.y.size(); ++y)
        d.diagonal.push_back(where.at({y, y}));
    return d;
}

bool derived_identity_holds(const DerivedSquare& d)
{
    return (image_of(d.bb_to_yy, d.bb.space.all()) | image_of(d.diagonal, full_set(static_cast<int>(d.diagonal.size())))) ==
           d.yy.space.all();
}

ConcreteSquare additive_core(const ConcreteSquare& q)
{
    const PointSet rest = q.x.all() & ~image_of(q.e, q.a.all());
    return restrict_square(q, q.x.all(), q.a.all(), preimage_of(q.p, rest));
}

}  // namespace cdsite
