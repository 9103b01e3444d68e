#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cdsite/instance.hpp"
#include "json.hpp"

namespace cdsite {

/// Command-line settings. Empty fields fall back to the instance's `checks` entry, then to defaults.
struct RunFlags {
    std::optional<int> depth;
    std::vector<std::string> structures;
    std::vector<std::string> axioms;
    std::vector<std::string> targets;
    std::optional<std::string> side;
    std::optional<int> max_presheaf_size;
    bool timing = false;
};

struct Report {
    nlohmann::ordered_json body;
    /// 0 when everything passed, 1 when something failed, 2 when inconclusive or on error.
    int exit_code = 0;
};

/**
 * Runs one of verify, covering, sheaf, lattice or density. `instance` may be
 * null only for lattice. Output is deterministic unless `timing` is set.
 * Throws Error for unknown commands or targets.
 */
Report run(const std::string& command, const InstanceFile* instance, const RunFlags& flags);

/// Combines exit codes: any fail gives 1, otherwise any inconclusive or error gives 2.
int combine_exit_codes(int a, int b);

}  // namespace cdsite
