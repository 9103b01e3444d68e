#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cdsite {

/**
 * Partial order on abstract residue-field symbols. `extends(k, K)` holds when
 * K is an extension of k. Two points have isomorphic residue fields exactly
 * when their symbols are equal; symbols not registered with the order are
 * comparable only to themselves.
 */
class ResidueOrder {
public:
    ResidueOrder() = default;

    /// Builds the reflexive-transitive closure of the listed extensions.
    /// Throws ValidationError on cycles between distinct symbols.
    ResidueOrder(std::vector<std::string> symbols,
                 const std::vector<std::pair<std::string, std::string>>& extensions);

    static const ResidueOrder& trivial();

    bool extends(const std::string& base, const std::string& ext) const;

    /// Least upper bound, if one exists and is unique.
    std::optional<std::string> join(const std::string& a, const std::string& b) const;

    const std::vector<std::string>& symbols() const { return symbols_; }
    std::vector<std::pair<std::string, std::string>> strict_pairs() const;

private:
    int index_of(const std::string& s) const;

    std::vector<std::string> symbols_;
    std::vector<std::vector<bool>> leq_;
};

}  // namespace cdsite
