#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "cdsite/axioms.hpp"
#include "cdsite/density.hpp"
#include "cdsite/errors.hpp"
#include "cdsite/family.hpp"
#include "fixtures.hpp"

using namespace cdsite;

namespace {

/// Canonical code of a labeled poset: the smallest relation-plus-labels string over all relabelings.
std::string canonical(const FiniteSpace& s)
{
    const int n = s.size();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::string best;
    do {
        std::string code;
        for (int i = 0; i < n; ++i) {
            code += s.label(perm[i]) + ":";
            for (int j = 0; j < n; ++j)
                code += s.leq(perm[i], perm[j]) ? '1' : '0';
        }
        if (best.empty() || code < best)
            best = code;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::size_t orbit_count(int n)
{
    std::set<std::string> seen;
    for (const auto& s : fixtures::all_posets(n))
        for (unsigned mask = 0; mask < (1U << n); ++mask) {
            std::vector<std::string> labels;
            for (int i = 0; i < n; ++i)
                labels.push_back(mask >> i & 1U ? "K" : "k");
            seen.insert(canonical(s.relabeled(labels)));
        }
    return seen.size();
}

}  // namespace

TEST_CASE("labeled posets are one per isomorphism class")
{
    const auto all = labeled_posets(4, {"k", "K"});
    std::set<std::string> codes;
    for (const auto& s : all)
        codes.insert(canonical(s));
    CHECK(codes.size() == all.size());
    for (int n = 0; n <= 4; ++n) {
        CAPTURE(n);
        const auto count = std::count_if(all.begin(), all.end(), [n](const auto& s) { return s.size() == n; });
        CHECK(static_cast<std::size_t>(count) == orbit_count(n));
    }
    // Unlabeled posets: 1, 1, 2, 5, 16.
    CHECK(labeled_posets(4, {"k"}).size() == 25);
}

TEST_CASE("family site objects")
{
    const auto x = fixtures::space({"c1", "c2", "g"}, {{"c1", "g"}, {"c2", "g"}});
    const auto site = family_site(x, two_symbol_order());
    const auto lc = locally_closed_subsets(x);
    CHECK(site->object_count() > static_cast<int>(lc.size()));
    // Each locally closed subset appears with its inclusion.
    for (PointSet t : lc) {
        const auto sub = x.subspace(t);
        bool found = false;
        for (int o = 0; o < site->object_count() && !found; ++o)
            found = site->object(o) == sub;
        CHECK(found);
    }
    // The two-branch cover shows up as a non-injective map onto the base.
    const auto bases = site->object_named("{c1,c2,g}");
    REQUIRE(bases);
    bool non_injective = false;
    for (int m : site->into(*bases))
        non_injective = non_injective || !is_injective(site->morphism(m).graph);
    CHECK(non_injective);
    FamilySiteOptions bare;
    bare.double_covers = false;
    bare.raised = false;
    CHECK(family_site(x, two_symbol_order(), bare)->object_count() == static_cast<int>(lc.size()));
    FamilySiteOptions tiny;
    tiny.cap = 3;
    CHECK_THROWS_AS(family_site(x, two_symbol_order(), tiny), Error);
}

TEST_CASE("up and p.up differ on a family site")
{
    const auto x = fixtures::space({"c1", "c2", "g"}, {{"c1", "g"}, {"c2", "g"}});
    const auto site = family_site(x, two_symbol_order());
    CdSite up(site, standard_structure(StructureName::up));
    CdSite plain(site, standard_structure(StructureName::p_up));
    CHECK(up.squares().size() > plain.squares().size());
}

TEST_CASE("axioms hold for every structure on small family sites")
{
    for (const auto& x : {fixtures::sier(), fixtures::vee(), fixtures::space({"a", "b"}, {}, {"k", "K"})}) {
        const auto site = family_site(x, two_symbol_order());
        for (StructureName name : all_structures()) {
            CAPTURE(to_string(name));
            CdSite cd(site, standard_structure(name));
            CoveringOracle oracle(cd);
            CHECK(is_complete(cd, oracle).verdict == Verdict::yes);
            CHECK(is_regular(cd, oracle).verdict == Verdict::yes);
            CHECK(is_bounded(cd).verdict == Verdict::yes);
        }
    }
}

TEST_CASE("axiom family covers all small bases")
{
    const auto fam = axiom_family();
    CHECK(fam.size() == labeled_posets(4, {"k", "K"}).size() + larger_fixtures().size());
    for (const auto& f : larger_fixtures())
        CHECK(f.size() >= 5);
}
