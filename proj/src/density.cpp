#include "cdsite/density.hpp"

#include <algorithm>
#include <functional>

#include "cdsite/errors.hpp"

namespace cdsite {

namespace {

void check_points(const FiniteSpace& space, PointSet s)
{
    if (!subset_of(s, space.all()))
        throw UnknownPoint("#" + std::to_string(std::countr_zero(s & ~space.all())));
}

void check_point(const FiniteSpace& space, int x)
{
    if (x < 0 || x >= space.size())
        throw UnknownPoint("#" + std::to_string(x));
}

}  // namespace

PointSet closure(const FiniteSpace& space, PointSet s)
{
    check_points(space, s);
    PointSet out = 0;
    for (int x : members(s))
        out |= space.down(x);
    return out;
}

PointSet generization(const FiniteSpace& space, PointSet s)
{
    check_points(space, s);
    PointSet out = 0;
    for (int x : members(s))
        out |= space.up(x);
    return out;
}

bool is_open(const FiniteSpace& space, PointSet s) { return generization(space, s) == s; }
bool is_closed(const FiniteSpace& space, PointSet s) { return closure(space, s) == s; }

bool is_locally_closed(const FiniteSpace& space, PointSet s)
{
    return (generization(space, s) & closure(space, s)) == s;
}

std::vector<PointSet> open_subsets(const FiniteSpace& space)
{
    // Decide points from the top down: including x forces ↑x, excluding x forces ↓x out.
    std::vector<int> order(space.size());
    for (int i = 0; i < space.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return cardinality(space.up(a)) < cardinality(space.up(b));
    });
    std::vector<PointSet> out;
    std::function<void(std::size_t, PointSet, PointSet)> rec = [&](std::size_t k, PointSet in, PointSet outside) {
        if (k == order.size()) {
            out.push_back(in);
            return;
        }
        const int x = order[k];
        if (contains(in, x) || contains(outside, x)) {
            rec(k + 1, in, outside);
            return;
        }
        if ((space.up(x) & outside) == 0)
            rec(k + 1, in | space.up(x), outside);
        if ((space.down(x) & in) == 0)
            rec(k + 1, in, outside | space.down(x));
    };
    rec(0, 0, 0);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<PointSet> closed_subsets(const FiniteSpace& space)
{
    std::vector<PointSet> out;
    for (PointSet u : open_subsets(space))
        out.push_back(space.all() & ~u);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<PointSet> locally_closed_subsets(const FiniteSpace& space)
{
    std::vector<PointSet> out;
    const auto opens = open_subsets(space);
    const auto closeds = closed_subsets(space);
    for (PointSet u : opens)
        for (PointSet z : closeds)
            out.push_back(u & z);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

PointSet maximal_points(const FiniteSpace& space, PointSet within)
{
    PointSet out = 0;
    for (int x : members(within))
        if ((space.up(x) & within) == bit(x))
            out |= bit(x);
    return out;
}

bool is_dense_open(const FiniteSpace& space, PointSet open)
{
    if (!is_open(space, open))
        throw NotOpen("subset is not generization-closed");
    return closure(space, open) == space.all();
}

int chain_height(const FiniteSpace& space, int z)
{
    check_point(space, z);
    int best = 0;
    for (int y : members(space.up(z) & ~bit(z)))
        best = std::max(best, 1 + chain_height(space, y));
    return best;
}

bool has_increasing_sequence(const FiniteSpace& space, int z, int length)
{
    return length <= 0 ? (check_point(space, z), true) : chain_height(space, z) >= length;
}

std::vector<int> longest_chain_from(const FiniteSpace& space, int z)
{
    std::vector<int> chain{z};
    int h = chain_height(space, z);
    while (h > 0) {
        for (int y : members(space.up(chain.back()) & ~bit(chain.back())))
            if (chain_height(space, y) == h - 1) {
                chain.push_back(y);
                break;
            }
        --h;
    }
    return chain;
}

int dimension(const FiniteSpace& space)
{
    int best = -1;
    for (int x = 0; x < space.size(); ++x)
        best = std::max(best, chain_height(space, x));
    return best;
}

bool is_increasing_sequence(const FiniteSpace& space, const std::vector<int>& chain)
{
    if (chain.empty())
        return false;
    for (int x : chain)
        if (x < 0 || x >= space.size())
            return false;
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
        if (!space.less(chain[i], chain[i + 1]))
            return false;
    return true;
}

bool in_density_class(const FiniteSpace& space, PointSet open, int d)
{
    if (!is_open(space, open))
        return false;
    for (int z : members(space.all() & ~open))
        if (!has_increasing_sequence(space, z, d))
            return false;
    return true;
}

std::vector<PointSet> density_class(const FiniteSpace& space, int d)
{
    if (d < 0)
        throw PreconditionViolated("density index must be non-negative");
    std::vector<PointSet> out;
    for (PointSet u : open_subsets(space))
        if (in_density_class(space, u, d))
            out.push_back(u);
    return out;
}

PointSet smallest_dense(const FiniteSpace& space, int d)
{
    // Points that cannot start a chain of length d must stay; close them upwards.
    PointSet forced = 0;
    for (int z = 0; z < space.size(); ++z)
        if (!has_increasing_sequence(space, z, d))
            forced |= bit(z);
    return generization(space, forced);
}

const std::vector<PointSet>& DensityStructure::classes(const FiniteSpace& space, int d)
{
    std::vector<PointSet> key;
    for (int x = 0; x < space.size(); ++x)
        key.push_back(space.up(x));
    std::lock_guard lock(mutex_);
    auto& per_space = cache_[key];
    auto it = per_space.find(d);
    if (it == per_space.end())
        it = per_space.emplace(d, density_class(space, d)).first;
    return it->second;
}

bool verify_repair_failure(const FiniteSpace& space, const RepairFailure& failure)
{
    const int x0 = failure.bottom;
    const int x2 = failure.top;
    if (x0 < 0 || x2 < 0 || x0 >= space.size() || x2 >= space.size() || !space.less(x0, x2))
        return false;
    if (!is_closed(space, failure.closed) || contains(failure.closed, x2))
        return false;
    const PointSet interval = space.up(x0) & space.down(x2);
    if (interval != failure.interval)
        return false;
    // The interval is a local space of dimension >= 2 in which the generic point is locally closed.
    const bool tall = dimension(space.subspace(interval)) >= 2;
    const bool isolated_top = (interval & ~failure.closed) == bit(x2);
    return tall && isolated_top;
}

Repair repair_middle(const FiniteSpace& space, int x0, int x1, int x2, PointSet closed)
{
    if (!is_increasing_sequence(space, {x0, x1, x2}))
        throw PreconditionViolated("repair_middle needs an increasing sequence of length 2");
    if (!is_closed(space, closed))
        throw PreconditionViolated("Z must be specialization-closed");
    if (contains(closed, x2))
        throw PreconditionViolated("top point of the sequence lies in Z");
    if (!contains(closed, x1))
        return {x1, std::nullopt};
    const PointSet middle = (space.up(x0) & space.down(x2)) & ~(bit(x0) | bit(x2));
    const PointSet candidates = middle & ~closed;
    if (candidates != 0)
        return {std::countr_zero(candidates), std::nullopt};
    return {std::nullopt, RepairFailure{x0, x2, closed, space.up(x0) & space.down(x2)}};
}

ChainRefinement refine_chain_through_dense(const FiniteSpace& space, PointSet dense_open,
                                           const std::vector<int>& chain)
{
    if (!is_increasing_sequence(space, chain))
        throw PreconditionViolated("not an increasing sequence");
    if (!is_dense_open(space, dense_open))
        throw PreconditionViolated("U is not dense");
    std::vector<int> out = chain;
    const int d = static_cast<int>(chain.size()) - 1;
    if (d == 0)
        return {out, std::nullopt};
    if (!contains(dense_open, out[d])) {
        const PointSet options = space.up(out[d - 1]) & dense_open;
        out[d] = std::countr_zero(options);
    }
    const PointSet z = space.all() & ~dense_open;
    for (int i = d - 1; i >= 1; --i) {
        auto repaired = repair_middle(space, out[i - 1], out[i], out[i + 1], z);
        if (!repaired.middle)
            return {std::nullopt, repaired.failure};
        out[i] = *repaired.middle;
    }
    return {out, std::nullopt};
}

int closure_witness(const FiniteSpace& space, PointSet subset, int point)
{
    check_points(space, subset);
    check_point(space, point);
    if (contains(subset, point))
        return point;
    const PointSet options = space.up(point) & subset;
    if (options == 0)
        throw PreconditionViolated("point is not in the closure of the subset");
    return std::countr_zero(options);
}

PointSet pushforward_complement(const SpaceMap& f, PointSet dense_source)
{
    const FiniteSpace& x = *f.source;
    const FiniteSpace& y = *f.target;
    return y.all() & ~closure(y, f.image(x.all() & ~dense_source));
}

PointSet pushforward_density(const SpaceMap& f, PointSet open_target, PointSet dense_source, int d)
{
    const FiniteSpace& x = *f.source;
    const FiniteSpace& y = *f.target;
    if (!is_open(y, open_target))
        throw PreconditionViolated("U is not open in the target");
    const PointSet over = f.preimage(open_target);
    if (closure(x, over) != x.all())
        throw PreconditionViolated("f⁻¹(U) is not dense in the source");
    for (int a : members(over))
        for (int b : members(over))
            if (a != b && f(a) == f(b) && x.leq(a, b))
                throw PreconditionViolated("fiber of f over U contains a strict chain");
    if (!in_density_class(x, dense_source, d))
        throw PreconditionViolated("V is not in D_d of the source");
    return pushforward_complement(f, dense_source);
}

}  // namespace cdsite
