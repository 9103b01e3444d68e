#include "cdsite/family.hpp"

#include <algorithm>

#include "cdsite/density.hpp"
#include "cdsite/errors.hpp"

namespace cdsite {

const ResidueOrder& two_symbol_order()
{
    static const ResidueOrder order({"k", "K"}, {{"k", "K"}});
    return order;
}

namespace {

std::vector<std::vector<PointSet>> posets_on(int n)
{
    // Relations as strict up-sets; keep the transitive, antisymmetric ones.
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j)
                pairs.emplace_back(i, j);
    std::vector<std::vector<PointSet>> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs.size()); ++mask) {
        std::vector<PointSet> above(n, 0);
        for (std::size_t k = 0; k < pairs.size(); ++k)
            if (mask >> k & 1U)
                above[pairs[k].first] |= bit(pairs[k].second);
        bool ok = true;
        for (int i = 0; i < n && ok; ++i)
            for (int j : members(above[i]))
                if (!subset_of(above[j], above[i]) || contains(above[j], i))
                    ok = false;
        if (ok)
            out.push_back(above);
    }
    return out;
}

std::string set_name(const FiniteSpace& space, PointSet s)
{
    std::string out = "{";
    for (const auto& id : space.ids_of(s))
        out += (out.size() > 1 ? "," : "") + id;
    return out + "}";
}

struct Entry {
    FiniteSpace space;
    std::vector<int> to_base;
    std::string name;
};

class Collector {
public:
    explicit Collector(std::size_t cap) : cap_(cap) {}

    void add(FiniteSpace space, std::vector<int> to_base, std::string name)
    {
        for (const auto& e : entries_) {
            if (e.space.size() != space.size() || e.to_base.size() != to_base.size())
                continue;
            auto same_over_base = [&](int i, int j) { return to_base[i] == e.to_base[j]; };
            if (find_isomorphism(space, e.space, same_over_base))
                return;
        }
        if (entries_.size() >= cap_)
            throw Error("site has more than " + std::to_string(cap_) + " objects");
        entries_.push_back({std::move(space), std::move(to_base), std::move(name)});
    }

    std::vector<Entry>& entries() { return entries_; }

private:
    std::size_t cap_;
    std::vector<Entry> entries_;
};

std::optional<std::string> raise(const ResidueOrder& residues, const std::string& label)
{
    for (const auto& s : residues.symbols())
        if (s != label && residues.extends(label, s))
            return s;
    return std::nullopt;
}

}  // namespace

std::vector<FiniteSpace> labeled_posets(int max_points, const std::vector<std::string>& labels)
{
    std::vector<FiniteSpace> out;
    const int nl = static_cast<int>(labels.size());
    for (int n = 0; n <= max_points; ++n) {
        const std::size_t first = out.size();
        std::vector<FiniteSpace::Point> pts(n);
        for (const auto& above : posets_on(n)) {
            std::vector<int> digits(n, 0);
            while (true) {
                for (int i = 0; i < n; ++i)
                    pts[i] = {"p" + std::to_string(i), labels[digits[i]]};
                auto s = FiniteSpace::from_relation(pts, above);
                bool seen = false;
                for (std::size_t k = first; k < out.size() && !seen; ++k)
                    seen = find_isomorphism(s, out[k]).has_value();
                if (!seen)
                    out.push_back(std::move(s));
                int i = 0;
                while (i < n && ++digits[i] == nl)
                    digits[i++] = 0;
                if (i == n)
                    break;
            }
        }
    }
    return out;
}

std::vector<FiniteSpace> larger_fixtures()
{
    auto build = [](std::vector<std::string> ids, std::vector<std::pair<std::string, std::string>> rel,
                    std::vector<std::string> labels) {
        std::vector<FiniteSpace::Point> pts;
        for (std::size_t i = 0; i < ids.size(); ++i)
            pts.push_back({ids[i], labels[i]});
        return FiniteSpace::build(pts, rel);
    };
    return {
        // Chain of length 4.
        build({"x0", "x1", "x2", "x3", "x4"}, {{"x0", "x1"}, {"x1", "x2"}, {"x2", "x3"}, {"x3", "x4"}},
              {"k", "k", "k", "k", "k"}),
        // Two closed points on two curves through a generic point, with a residue extension.
        build({"a", "b", "c1", "c2", "g"}, {{"a", "c1"}, {"b", "c1"}, {"b", "c2"}, {"c1", "g"}, {"c2", "g"}},
              {"k", "K", "k", "k", "k"}),
        // Surface-like: closed point, two curves, generic point, plus an isolated point.
        build({"s", "c1", "c2", "g", "t", "u"}, {{"s", "c1"}, {"s", "c2"}, {"c1", "g"}, {"c2", "g"}, {"t", "u"}},
              {"k", "k", "k", "k", "K", "k"}),
    };
}

std::shared_ptr<const SiteCategory> family_site(const FiniteSpace& base, const ResidueOrder& residues,
                                                const FamilySiteOptions& options)
{
    Collector col(options.cap);
    const auto lc = locally_closed_subsets(base);
    for (PointSet t : lc)
        col.add(base.subspace(t), members(t), set_name(base, t));
    if (options.double_covers) {
        std::vector<std::pair<PointSet, PointSet>> covers;
        for (const auto& parts : {open_subsets(base), closed_subsets(base)})
            for (std::size_t i = 0; i < parts.size(); ++i)
                for (std::size_t j = i + 1; j < parts.size(); ++j) {
                    const PointSet u = parts[i], v = parts[j];
                    if (u != base.all() && v != base.all() && (u | v) == base.all() && (u & v) != 0 &&
                        covers.size() < options.max_covers)
                        covers.emplace_back(u, v);
                }
        for (auto [u0, v0] : covers)
            for (PointSet t : lc) {
                const PointSet u = u0 & t, v = v0 & t;
                if (u == 0 || v == 0)
                    continue;
                const auto cp = coproduct(base.subspace(u), base.subspace(v));
                std::vector<int> to_base(cp.space.size());
                const auto mu = members(u), mv = members(v);
                for (std::size_t k = 0; k < mu.size(); ++k)
                    to_base[cp.from_left[k]] = mu[k];
                for (std::size_t k = 0; k < mv.size(); ++k)
                    to_base[cp.from_right[k]] = mv[k];
                col.add(cp.space, std::move(to_base), set_name(base, u) + "+" + set_name(base, v));
            }
    }
    if (options.raised) {
        for (PointSet t : lc) {
            const FiniteSpace sub = base.subspace(t);
            const auto pts = members(t);
            for (PointSet z : closed_subsets(sub)) {
                if (z == 0)
                    continue;
                std::vector<std::string> labels;
                bool ok = true;
                for (int k = 0; k < sub.size(); ++k) {
                    if (!contains(z, k)) {
                        labels.push_back(sub.label(k));
                        continue;
                    }
                    const auto up = raise(residues, sub.label(k));
                    ok = ok && up.has_value();
                    labels.push_back(up.value_or(""));
                }
                if (!ok)
                    continue;
                PointSet zb = 0;
                for (int k : members(z))
                    zb |= bit(pts[k]);
                col.add(sub.relabeled(labels), pts, set_name(base, t) + "^" + set_name(base, zb));
            }
        }
    }
    std::vector<FiniteSpace> objects;
    std::vector<std::vector<int>> structure;
    std::vector<std::string> names;
    for (auto& e : col.entries()) {
        objects.push_back(std::move(e.space));
        structure.push_back(std::move(e.to_base));
        names.push_back(std::move(e.name));
    }
    return std::make_shared<const SiteCategory>(
        SiteCategory::over(base, std::move(objects), std::move(structure), std::move(names), residues));
}

std::vector<FamilyInstance> axiom_family()
{
    std::vector<FamilyInstance> out;
    for (auto& x : labeled_posets(4, {"k", "K"})) {
        FamilySiteOptions o;
        if (x.size() == 4)
            o.max_covers = 2;
        out.push_back({std::move(x), o});
    }
    for (auto& x : larger_fixtures()) {
        FamilySiteOptions o;
        o.max_covers = 1;
        out.push_back({std::move(x), o});
    }
    return out;
}

}  // namespace cdsite
