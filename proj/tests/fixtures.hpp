#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cdsite/finite_space.hpp"
#include "cdsite/squares.hpp"

namespace fixtures {

using cdsite::FiniteSpace;

inline FiniteSpace space(std::vector<std::string> ids, std::vector<std::pair<std::string, std::string>> rel,
                         std::vector<std::string> labels = {})
{
    std::vector<FiniteSpace::Point> pts;
    for (std::size_t i = 0; i < ids.size(); ++i)
        pts.push_back({ids[i], labels.empty() ? "k" : labels[i]});
    return FiniteSpace::build(pts, rel);
}

inline FiniteSpace pt() { return space({"p"}, {}); }
/// Sierpinski space: closed point s specializing the generic point g.
inline FiniteSpace sier() { return space({"g", "s"}, {{"s", "g"}}); }
/// Same space with the closed point named c.
inline FiniteSpace sier_c() { return space({"c", "g"}, {{"c", "g"}}); }
inline FiniteSpace ch2() { return space({"x0", "x1", "x2"}, {{"x0", "x1"}, {"x1", "x2"}}); }
inline FiniteSpace vee() { return space({"g1", "g2", "s"}, {{"s", "g1"}, {"s", "g2"}}); }
inline FiniteSpace diamond()
{
    return space({"b", "m1", "m2", "t"}, {{"b", "m1"}, {"b", "m2"}, {"m1", "t"}, {"m2", "t"}});
}

/// Brute-force enumeration of every finite poset on n labelled points (as relation lists).
inline std::vector<FiniteSpace> all_posets(int n)
{
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j)
                pairs.emplace_back(i, j);
    std::vector<FiniteSpace> out;
    for (unsigned mask = 0; mask < (1U << pairs.size()); ++mask) {
        bool ok = true;
        std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
        for (std::size_t k = 0; k < pairs.size(); ++k)
            if (mask >> k & 1U)
                r[pairs[k].first][pairs[k].second] = true;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j)
                for (int l = 0; l < n && ok; ++l)
                    if (r[i][j] && r[j][l] && i != l && !r[i][l])
                        ok = false;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j)
                if (r[i][j] && r[j][i])
                    ok = false;
        if (!ok)
            continue;
        std::vector<std::string> ids;
        for (int i = 0; i < n; ++i)
            ids.push_back("p" + std::to_string(i));
        std::vector<std::pair<std::string, std::string>> rel;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (r[i][j])
                    rel.emplace_back(ids[i], ids[j]);
        out.push_back(space(ids, rel));
    }
    return out;
}

/// Nisnevich-type double cover of SIER (c < g): Y = {c' < g1'} ⊔ {g2'}, A = {g}.
inline cdsite::ConcreteSquare sier_double_cover()
{
    const auto x = sier_c();
    const auto y = space({"c'", "g1'", "g2'"}, {{"c'", "g1'"}});
    const auto a = x.subspace(x.set_of({"g"}));
    return cdsite::complete_square(x, a, {1}, y, {0, 1, 1});
}

/// Every square with e an embedding over spaces with at most `max_points` points, B the fiber product.
template <typename Visit>
void for_each_small_square(int max_points, Visit&& visit)
{
    std::vector<FiniteSpace> spaces;
    for (int n = 0; n <= max_points; ++n)
        for (auto& s : all_posets(n))
            spaces.push_back(s);
    const auto& r = cdsite::ResidueOrder::trivial();
    for (const auto& x : spaces)
        for (const auto& a : spaces) {
            if (a.size() > x.size())
                continue;
            for (auto& e : cdsite::enumerate_morphisms(a, x, r)) {
                if (!cdsite::is_embedding(a, x, e))
                    continue;
                for (const auto& y : spaces)
                    for (auto& p : cdsite::enumerate_morphisms(y, x, r))
                        visit(cdsite::complete_square(x, a, e, y, p));
            }
        }
}

}  // namespace fixtures
