#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cdsite/point_set.hpp"
#include "cdsite/residue.hpp"

namespace cdsite {

/**
 * A finite spectral space presented as a poset under specialization.
 *
 * `leq(x, y)` means x lies in the closure of y. Open sets are the up-sets and
 * closed sets the down-sets. Points are stored sorted by identifier, so the
 * point with the smallest index is also the lexicographically smallest one;
 * every tie-break in the library relies on this.
 */
class FiniteSpace {
public:
    struct Point {
        std::string id;
        std::string label;
    };

    FiniteSpace() = default;

    /// Order is the reflexive-transitive closure of `specializations` ([a, b] asserts a <= b).
    /// Throws ValidationError for duplicate ids or antisymmetry violations.
    static FiniteSpace build(std::vector<Point> points,
                             const std::vector<std::pair<std::string, std::string>>& specializations);

    /// `above[i]` lists indices j with i <= j (into `points`, unsorted); closure is taken.
    static FiniteSpace from_relation(std::vector<Point> points, const std::vector<PointSet>& above);

    int size() const { return static_cast<int>(points_.size()); }
    bool empty() const { return points_.empty(); }
    PointSet all() const { return full_set(size()); }

    const std::string& id(int i) const { return points_[i].id; }
    const std::string& label(int i) const { return points_[i].label; }
    const std::vector<Point>& points() const { return points_; }

    /// Throws UnknownPoint.
    int index_of(std::string_view id) const;
    std::optional<int> find(std::string_view id) const;
    PointSet set_of(const std::vector<std::string>& ids) const;
    std::vector<std::string> ids_of(PointSet s) const;

    bool leq(int x, int y) const { return contains(up_[x], y); }
    bool less(int x, int y) const { return x != y && leq(x, y); }
    PointSet up(int x) const { return up_[x]; }
    PointSet down(int x) const { return down_[x]; }

    /// The subspace on `s`; identifiers and labels are kept.
    FiniteSpace subspace(PointSet s) const;
    /// Same space with some labels replaced.
    FiniteSpace relabeled(const std::vector<std::string>& labels) const;

    /// Strict covering pairs (x, y) with x < y and nothing in between.
    std::vector<std::pair<int, int>> cover_relations() const;

    friend bool operator==(const FiniteSpace& a, const FiniteSpace& b);

private:
    std::vector<Point> points_;
    std::vector<PointSet> up_;
    std::vector<PointSet> down_;
};

using SpacePtr = std::shared_ptr<const FiniteSpace>;

inline SpacePtr share(FiniteSpace s) { return std::make_shared<const FiniteSpace>(std::move(s)); }

/// A map of finite spaces given by its graph on point indices.
struct SpaceMap {
    SpacePtr source;
    SpacePtr target;
    std::vector<int> graph;

    int operator()(int x) const { return graph[x]; }
    PointSet image(PointSet s) const;
    PointSet preimage(PointSet s) const;
};

/// f ∘ g
SpaceMap compose(const SpaceMap& f, const SpaceMap& g);
SpaceMap identity_map(const SpacePtr& space);
SpaceMap inclusion_map(const SpacePtr& ambient, PointSet subset, SpacePtr* sub_out = nullptr);

// Predicates on raw graphs. `graph[x]` is the image of source point x.
using Graph = std::span<const int>;

bool is_monotone(const FiniteSpace& src, const FiniteSpace& dst, Graph g);
/// label(g(x)) is extended by label(x) for every x.
bool is_label_compatible(const FiniteSpace& src, const FiniteSpace& dst, Graph g,
                         const ResidueOrder& residues = ResidueOrder::trivial());
bool is_label_preserving(const FiniteSpace& src, const FiniteSpace& dst, Graph g);
/// Monotone and label-compatible: a morphism of labeled spaces.
bool is_morphism(const FiniteSpace& src, const FiniteSpace& dst, Graph g,
                 const ResidueOrder& residues = ResidueOrder::trivial());
bool is_injective(Graph g);
/// Injective, order-reflecting and label-preserving.
bool is_embedding(const FiniteSpace& src, const FiniteSpace& dst, Graph g);
bool is_open_embedding(const FiniteSpace& src, const FiniteSpace& dst, Graph g);
bool is_closed_embedding(const FiniteSpace& src, const FiniteSpace& dst, Graph g);
/// Label-preserving local isomorphism: each up-set ↑y maps isomorphically onto ↑g(y).
bool is_etale_like(const FiniteSpace& src, const FiniteSpace& dst, Graph g);
/// Specialization lifting: x <= g(y) implies x = g(y') for some y' <= y.
bool is_proper_like(const FiniteSpace& src, const FiniteSpace& dst, Graph g,
                    const ResidueOrder& residues = ResidueOrder::trivial());
/// g restricted to g⁻¹(s) is a label-preserving order isomorphism onto s.
bool is_iso_over(const FiniteSpace& src, const FiniteSpace& dst, Graph g, PointSet s);

PointSet image_of(Graph g, PointSet s);
PointSet preimage_of(Graph g, PointSet s);

struct FiberProduct {
    FiniteSpace space;
    std::vector<int> to_left;   ///< projection onto the source of the first map
    std::vector<int> to_right;  ///< projection onto the source of the second map
};

/**
 * Fiber product in the category of labeled finite spaces. A pair (a, y) gets
 * the least upper bound of the two labels; throws MissingPullback if none
 * exists or if the product would exceed kMaxPoints.
 */
FiberProduct fiber_product(const FiniteSpace& left, Graph left_map, const FiniteSpace& right,
                           Graph right_map, const ResidueOrder& residues = ResidueOrder::trivial());

struct Coproduct {
    FiniteSpace space;
    std::vector<int> from_left;
    std::vector<int> from_right;
};

Coproduct coproduct(const FiniteSpace& left, const FiniteSpace& right);

/// Connected components of the comparability graph, each as a point set.
std::vector<PointSet> components(const FiniteSpace& space);

/**
 * Searches for a label-preserving order isomorphism a → b. `allowed(i, j)`
 * can restrict which points may correspond (e.g. to stay over a base).
 */
std::optional<std::vector<int>> find_isomorphism(
    const FiniteSpace& a, const FiniteSpace& b,
    const std::function<bool(int, int)>& allowed = nullptr);

/// Enumerates all morphisms src → dst accepted by `filter(x, y)` pointwise.
std::vector<std::vector<int>> enumerate_morphisms(
    const FiniteSpace& src, const FiniteSpace& dst, const ResidueOrder& residues,
    const std::function<bool(int, int)>& allowed = nullptr);

}  // namespace cdsite
