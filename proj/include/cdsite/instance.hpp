#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdsite/family.hpp"
#include "cdsite/finite_space.hpp"
#include "cdsite/residue.hpp"
#include "cdsite/sheaves.hpp"
#include "cdsite/site.hpp"
#include "cdsite/squares.hpp"

namespace cdsite {

struct MapDecl {
    std::string from;
    std::string to;
    std::vector<int> graph;
};

/// A square given by its two legs into a common target; B is the fiber product.
struct SquareDecl {
    std::string e;
    std::string p;
};

struct CategoryDecl {
    std::string kind;  ///< full, over, generated or family
    std::vector<std::string> objects;
    std::string base;
    /// For `over`: the structure map of each object ("identity" for the base itself).
    std::vector<std::string> structure;
    std::vector<std::string> generators;
    FamilySiteOptions family;
};

struct PresheafDecl {
    std::map<std::string, std::vector<std::string>> sections;
    std::map<std::string, std::map<std::string, std::string>> restrictions;
};

/// Defaults for each command, overridable from the command line.
struct CheckDecl {
    std::vector<std::string> structures;
    std::vector<std::string> axioms;
    std::vector<std::string> targets;  ///< maps, spaces or presheaves, depending on the command
    std::optional<std::string> side;
    std::optional<int> depth;
    std::optional<int> max_presheaf_size;
};

struct InstanceFile {
    ResidueOrder residues;
    std::map<std::string, SpacePtr> spaces;
    std::map<std::string, MapDecl> maps;
    std::map<std::string, SquareDecl> squares;
    std::optional<CategoryDecl> category;
    std::map<std::string, PresheafDecl> presheaves;
    std::map<std::string, CheckDecl> checks;

    SpaceMap map(const std::string& name) const;
    ConcreteSquare square(const std::string& name) const;
};

/**
 * Parses and validates a version-1 instance. Throws ParseError for malformed
 * JSON (with line and column) and ValidationError naming the violated invariant,
 * with the JSON pointer of the offending value in the message.
 */
InstanceFile parse_instance(std::string_view text);

/// The category of an instance, with its declared maps resolved to morphisms.
struct BuiltCategory {
    std::shared_ptr<const SiteCategory> site;
    std::map<std::string, int> morphisms;
};

/// Throws ValidationError when the instance has no category.
BuiltCategory build_category(const InstanceFile& inst);

/**
 * The presheaf `name` on the built category. Restrictions are given along
 * declared maps; those along other morphisms follow by composition.
 * Throws ValidationError when a morphism is not reached or two composites disagree.
 */
Presheaf build_presheaf(const InstanceFile& inst, const BuiltCategory& cat, const std::string& name);

}  // namespace cdsite
