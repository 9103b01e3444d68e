#include "cdsite/axioms.hpp"

#include <algorithm>
#include <unordered_map>

#include "cdsite/density.hpp"
#include "cdsite/errors.hpp"

namespace cdsite {

AxiomReport is_complete(const CdSite& cd, const CoveringOracle& oracle, std::optional<int> depth)
{
    const SiteCategory& c = cd.site();
    AxiomReport rep;
    rep.axiom = "complete";
    bool unsettled = false;
    for (int qi = 0; qi < static_cast<int>(cd.squares().size()); ++qi) {
        const auto& q = cd.squares()[qi];
        const Sieve s = cd.square_sieve(qi);
        const int dim_x = dimension(c.object(q.x));
        for (int f : c.into(q.x)) {
            ++rep.checked;
            const int bound = depth.value_or(std::max(dim_x, dimension(c.object(c.source(f)))) + 2);
            std::optional<int> d;
            try {
                d = oracle.minimal_depth(s.pullback(c, f));
            } catch (const DepthExhausted&) {
                unsettled = true;
                continue;
            }
            if (!d) {
                rep.verdict = Verdict::no;
                rep.square = qi;
                rep.morphism = f;
                rep.reason = "pulled-back sieve contains no simple covering";
                return rep;
            }
            if (*d > bound)
                unsettled = true;
        }
    }
    rep.verdict = unsettled ? Verdict::inconclusive : Verdict::yes;
    return rep;
}

RegularityMap regularity_map(const CdSite& cd, int square)
{
    const SiteCategory& c = cd.site();
    const auto& q = cd.squares()[square];
    const int n_obj = c.object_count();
    std::vector<int> where(c.morphism_count(), -1);
    std::vector<std::vector<int>> to_y(n_obj), to_b(n_obj);
    for (int u = 0; u < n_obj; ++u) {
        to_y[u] = c.hom(u, q.y);
        to_b[u] = c.hom(u, q.b);
        for (std::size_t i = 0; i < to_y[u].size(); ++i)
            where[to_y[u][i]] = static_cast<int>(i);
        for (std::size_t i = 0; i < to_b[u].size(); ++i)
            where[to_b[u][i]] = static_cast<int>(i);
    }
    // Target: pairs (a, b) into Y with p a = p b. Source: maps into Y, then pairs into B with e_b b1 = e_b b2.
    // Pairs are indexed through flat position tables.
    std::vector<std::vector<std::pair<int, int>>> tgt(n_obj), pairs_b(n_obj);
    std::vector<std::vector<int>> tgt_at(n_obj), src_at(n_obj);
    for (int u = 0; u < n_obj; ++u) {
        const std::size_t ny = to_y[u].size(), nb = to_b[u].size();
        std::vector<int> py(ny), eb(nb);
        for (std::size_t i = 0; i < ny; ++i)
            py[i] = c.compose(q.p, to_y[u][i]);
        for (std::size_t i = 0; i < nb; ++i)
            eb[i] = c.compose(q.e_b, to_b[u][i]);
        tgt_at[u].assign(ny * ny, -1);
        for (std::size_t i = 0; i < ny; ++i)
            for (std::size_t j = 0; j < ny; ++j)
                if (py[i] == py[j]) {
                    tgt_at[u][i * ny + j] = static_cast<int>(tgt[u].size());
                    tgt[u].emplace_back(to_y[u][i], to_y[u][j]);
                }
        src_at[u].assign(nb * nb, -1);
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t j = 0; j < nb; ++j)
                if (eb[i] == eb[j]) {
                    src_at[u][i * nb + j] = static_cast<int>(ny + pairs_b[u].size());
                    pairs_b[u].emplace_back(to_b[u][i], to_b[u][j]);
                }
    }
    auto tgt_index = [&](int u, int a, int b) {
        return tgt_at[u][where[a] * to_y[u].size() + where[b]];
    };
    std::vector<int> tgt_sizes, src_sizes;
    for (int u = 0; u < n_obj; ++u) {
        tgt_sizes.push_back(static_cast<int>(tgt[u].size()));
        src_sizes.push_back(static_cast<int>(to_y[u].size() + pairs_b[u].size()));
    }
    std::vector<std::vector<int>> tgt_r(c.morphism_count()), src_r(c.morphism_count());
    for (int m = 0; m < c.morphism_count(); ++m) {
        const int u = c.target(m);
        const int v = c.source(m);
        tgt_r[m].reserve(tgt[u].size());
        for (auto [a, b] : tgt[u])
            tgt_r[m].push_back(tgt_index(v, c.compose(a, m), c.compose(b, m)));
        src_r[m].reserve(src_sizes[u]);
        for (int a : to_y[u])
            src_r[m].push_back(where[c.compose(a, m)]);
        const std::size_t nb = to_b[v].size();
        for (auto [a, b] : pairs_b[u])
            src_r[m].push_back(src_at[v][where[c.compose(a, m)] * nb + where[c.compose(b, m)]]);
    }
    PresheafMap phi;
    for (int u = 0; u < n_obj; ++u) {
        std::vector<int> comp;
        comp.reserve(src_sizes[u]);
        for (int a : to_y[u])
            comp.push_back(tgt_index(u, a, a));
        for (auto [a, b] : pairs_b[u])
            comp.push_back(tgt_index(u, c.compose(q.p_b, a), c.compose(q.p_b, b)));
        phi.component.push_back(std::move(comp));
    }
    return RegularityMap{Presheaf::from_functorial(cd.site_ptr(), std::move(src_sizes), std::move(src_r)),
                         Presheaf::from_functorial(cd.site_ptr(), std::move(tgt_sizes), std::move(tgt_r)),
                         std::move(phi)};
}

AxiomReport is_regular(const CdSite& cd, const CoveringOracle& oracle, std::optional<int> depth)
{
    const SiteCategory& c = cd.site();
    AxiomReport rep;
    rep.axiom = "regular";
    const int bound = depth.value_or(max_dimension(c) + 2);
    bool unsettled = false;
    std::unordered_map<int, bool> p_monic;
    for (int qi = 0; qi < static_cast<int>(cd.squares().size()); ++qi) {
        const auto& q = cd.squares()[qi];
        ++rep.checked;
        auto fail = [&](const std::string& why) {
            rep.verdict = Verdict::no;
            rep.square = qi;
            rep.reason = why;
            return rep;
        };
        if (!is_pullback_square(cd.concrete(qi), c.residues()) ||
            !c.verify_pullback(q.e, q.p, PullbackCone{q.b, q.e_b, q.p_b}))
            return fail("square is not a pullback");
        if (!c.is_monomorphism(q.e))
            return fail("e is not a monomorphism");
        // With p monic, Y ×_X Y is the diagonal and the map is already surjective.
        auto known = p_monic.find(q.p);
        if (known == p_monic.end())
            known = p_monic.emplace(q.p, c.is_monomorphism(q.p)).first;
        if (known->second)
            continue;
        const auto rm = regularity_map(cd, qi);
        const auto ls = local_surjectivity(rm.source, rm.target, rm.map, oracle, bound);
        if (ls.verdict == Verdict::no)
            return fail("derived map is not locally surjective over " + c.name(ls.object));
        if (ls.verdict == Verdict::inconclusive)
            unsettled = true;
    }
    rep.verdict = unsettled ? Verdict::inconclusive : Verdict::yes;
    return rep;
}

namespace {

std::vector<PointSet> subsets_of(PointSet s)
{
    std::vector<PointSet> out;
    PointSet sub = s;
    while (true) {
        out.push_back(sub);
        if (sub == 0)
            break;
        sub = (sub - 1) & s;
    }
    return out;
}

}  // namespace

ReducingResult is_reducing(const ConcreteSquare& q, const CdStructure& structure, const ResidueOrder& residues, int d)
{
    if (d < 1)
        throw PreconditionViolated("reducing index must be at least 1");
    ReducingResult out;
    out.a0 = smallest_dense(q.a, d);
    out.y0 = smallest_dense(q.y, d);
    out.b0 = smallest_dense(q.b, d - 1);
    for (PointSet xp : density_class(q.x, d)) {
        const PointSet a_room = out.a0 & preimage_of(q.e, xp);
        const PointSet y_room = out.y0 & preimage_of(q.p, xp);
        if (structure.jointly_surjective && (image_of(q.e, a_room) | image_of(q.p, y_room)) != xp)
            continue;
        for (PointSet ap : subsets_of(a_room)) {
            const PointSet rest = xp & ~image_of(q.e, ap);
            if (structure.jointly_surjective && !subset_of(rest, image_of(q.p, y_room)))
                continue;
            // B' is cut out by A' and Y'; points of B outside B0 rule out their Y-images.
            const PointSet forbidden_y = image_of(q.p_b, preimage_of(q.e_b, ap) & ~out.b0);
            const PointSet y_allowed = y_room & ~forbidden_y;
            if (structure.jointly_surjective && !subset_of(rest, image_of(q.p, y_allowed)))
                continue;
            for (PointSet yp : subsets_of(y_allowed)) {
                if (structure.jointly_surjective && !subset_of(rest, image_of(q.p, yp)))
                    continue;
                const auto sub = restrict_square(q, xp, ap, yp);
                if (!structure.admits(sub, residues))
                    continue;
                const PointSet bp = preimage_of(q.e_b, ap) & preimage_of(q.p_b, yp);
                out.reducing = true;
                out.witness = SubSquare{xp, ap, yp, bp};
                return out;
            }
        }
    }
    return out;
}

ConcreteSquare closure_refinement(const ConcreteSquare& q)
{
    const PointSet rest = q.x.all() & ~image_of(q.e, q.a.all());
    return restrict_square(q, q.x.all(), q.a.all(), closure(q.y, preimage_of(q.p, rest)));
}

AxiomReport is_bounded(const CdSite& cd)
{
    const SiteCategory& c = cd.site();
    AxiomReport rep;
    rep.axiom = "bounded";
    for (int qi = 0; qi < static_cast<int>(cd.squares().size()); ++qi) {
        ++rep.checked;
        const auto q = cd.concrete(qi);
        const int top = dimension(q.x) + 1;
        int failed_at = -1;
        auto reducing_everywhere = [&](const ConcreteSquare& cand) {
            for (int d = 1; d <= top; ++d)
                if (!is_reducing(cand, cd.structure(), c.residues(), d).reducing) {
                    failed_at = d;
                    return false;
                }
            return true;
        };
        if (reducing_everywhere(q))
            continue;
        const auto refined = closure_refinement(q);
        if (cd.structure().admits(refined, c.residues()) && reducing_everywhere(refined))
            continue;
        rep.verdict = Verdict::no;
        rep.square = qi;
        rep.density_index = failed_at;
        rep.reason = "no refinement is reducing";
        return rep;
    }
    rep.verdict = Verdict::yes;
    return rep;
}

}  // namespace cdsite
