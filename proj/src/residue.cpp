#include "cdsite/residue.hpp"

#include <algorithm>

#include "cdsite/errors.hpp"

namespace cdsite {

ResidueOrder::ResidueOrder(std::vector<std::string> symbols,
                           const std::vector<std::pair<std::string, std::string>>& extensions)
    : symbols_(std::move(symbols))
{
    std::sort(symbols_.begin(), symbols_.end());
    symbols_.erase(std::unique(symbols_.begin(), symbols_.end()), symbols_.end());
    for (const auto& [k, big] : extensions) {
        for (const auto& s : {k, big}) {
            if (!std::binary_search(symbols_.begin(), symbols_.end(), s))
                throw ValidationError("residue-symbol", "extension mentions undeclared symbol '" + s + "'");
        }
    }
    const auto n = symbols_.size();
    leq_.assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        leq_[i][i] = true;
    for (const auto& [k, big] : extensions)
        leq_[index_of(k)][index_of(big)] = true;
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t i = 0; i < n; ++i)
            if (leq_[i][m])
                for (std::size_t j = 0; j < n; ++j)
                    if (leq_[m][j])
                        leq_[i][j] = true;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (leq_[i][j] && leq_[j][i])
                throw ValidationError("antisymmetry",
                                      "residue symbols '" + symbols_[i] + "' and '" + symbols_[j] +
                                          "' extend each other");
}

const ResidueOrder& ResidueOrder::trivial()
{
    static const ResidueOrder order;
    return order;
}

int ResidueOrder::index_of(const std::string& s) const
{
    auto it = std::lower_bound(symbols_.begin(), symbols_.end(), s);
    if (it == symbols_.end() || *it != s)
        return -1;
    return static_cast<int>(it - symbols_.begin());
}

bool ResidueOrder::extends(const std::string& base, const std::string& ext) const
{
    if (base == ext)
        return true;
    const int i = index_of(base);
    const int j = index_of(ext);
    return i >= 0 && j >= 0 && leq_[i][j];
}

std::optional<std::string> ResidueOrder::join(const std::string& a, const std::string& b) const
{
    if (extends(a, b))
        return b;
    if (extends(b, a))
        return a;
    const int i = index_of(a);
    const int j = index_of(b);
    if (i < 0 || j < 0)
        return std::nullopt;
    std::vector<int> bounds;
    for (int m = 0; m < static_cast<int>(symbols_.size()); ++m)
        if (leq_[i][m] && leq_[j][m])
            bounds.push_back(m);
    for (int m : bounds) {
        const bool least = std::all_of(bounds.begin(), bounds.end(), [&](int o) { return leq_[m][o]; });
        if (least)
            return symbols_[m];
    }
    return std::nullopt;
}

std::vector<std::pair<std::string, std::string>> ResidueOrder::strict_pairs() const
{
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < symbols_.size(); ++i)
        for (std::size_t j = 0; j < symbols_.size(); ++j)
            if (i != j && leq_[i][j])
                out.emplace_back(symbols_[i], symbols_[j]);
    return out;
}

}  // namespace cdsite
