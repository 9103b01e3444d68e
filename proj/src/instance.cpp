#include "cdsite/instance.hpp"

#include <algorithm>
#include <set>

#include "cdsite/errors.hpp"
#include "json.hpp"

namespace cdsite {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& invariant, const std::string& where, const std::string& what)
{
    throw ValidationError(invariant, "at " + (where.empty() ? std::string("/") : where) + ": " + what);
}

std::string child(const std::string& where, const std::string& key)
{
    std::string escaped;
    for (char ch : key) {
        if (ch == '~')
            escaped += "~0";
        else if (ch == '/')
            escaped += "~1";
        else
            escaped += ch;
    }
    return where + "/" + escaped;
}

std::string child(const std::string& where, std::size_t index)
{
    return where + "/" + std::to_string(index);
}

/// Re-raises an inner validation error with the location prepended.
[[noreturn]] void relocate(const ValidationError& e, const std::string& where)
{
    std::string what = e.what();
    const std::string prefix = e.invariant() + ": ";
    if (what.rfind(prefix, 0) == 0)
        what.erase(0, prefix.size());
    invalid(e.invariant(), where, what);
}

void need_object(const json& v, const std::string& where)
{
    if (!v.is_object())
        invalid("schema", where, "expected an object");
}

void need_array(const json& v, const std::string& where)
{
    if (!v.is_array())
        invalid("schema", where, "expected an array");
}

std::string need_string(const json& v, const std::string& where)
{
    if (!v.is_string())
        invalid("schema", where, "expected a string");
    return v.get<std::string>();
}

int need_int(const json& v, const std::string& where)
{
    if (!v.is_number_integer())
        invalid("schema", where, "expected an integer");
    return v.get<int>();
}

bool need_bool(const json& v, const std::string& where)
{
    if (!v.is_boolean())
        invalid("schema", where, "expected a boolean");
    return v.get<bool>();
}

const json& field(const json& obj, const std::string& key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end())
        invalid("schema", where, "missing field '" + key + "'");
    return *it;
}

void only_fields(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where)
{
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            invalid("schema", child(where, it.key()), "unknown field");
}

std::vector<std::string> string_list(const json& v, const std::string& where)
{
    need_array(v, where);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(need_string(v[i], child(where, i)));
    return out;
}

std::pair<std::string, std::string> string_pair(const json& v, const std::string& where)
{
    need_array(v, where);
    if (v.size() != 2)
        invalid("schema", where, "expected a pair");
    return {need_string(v[0], child(where, 0)), need_string(v[1], child(where, 1))};
}

struct Parser {
    InstanceFile inst;
    std::string default_label = "k";
    bool labels_checked = false;

    void residues(const json& v)
    {
        const std::string where = "/residue_order";
        need_object(v, where);
        only_fields(v, {"symbols", "extensions"}, where);
        auto symbols = string_list(field(v, "symbols", where), child(where, "symbols"));
        if (symbols.empty())
            invalid("schema", child(where, "symbols"), "expected at least one symbol");
        std::vector<std::pair<std::string, std::string>> ext;
        if (auto it = v.find("extensions"); it != v.end()) {
            const std::string ew = child(where, "extensions");
            need_array(*it, ew);
            for (std::size_t i = 0; i < it->size(); ++i) {
                auto pr = string_pair((*it)[i], child(ew, i));
                for (const auto& s : {pr.first, pr.second})
                    if (std::find(symbols.begin(), symbols.end(), s) == symbols.end())
                        invalid("cross-reference", child(ew, i), "unknown residue symbol '" + s + "'");
                ext.push_back(pr);
            }
        }
        default_label = symbols.front();
        labels_checked = true;
        try {
            inst.residues = ResidueOrder(symbols, ext);
        } catch (const ValidationError& e) {
            relocate(e, where);
        }
    }

    void space(const std::string& name, const json& v, const std::string& where)
    {
        need_object(v, where);
        only_fields(v, {"points", "order"}, where);
        const json& pts = field(v, "points", where);
        const std::string pw = child(where, "points");
        need_array(pts, pw);
        if (pts.size() > 64)
            invalid("size", pw, "at most 64 points are supported");
        std::vector<FiniteSpace::Point> points;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const std::string w = child(pw, i);
            FiniteSpace::Point pt;
            if (pts[i].is_string()) {
                pt.id = pts[i].get<std::string>();
                pt.label = default_label;
            } else {
                need_object(pts[i], w);
                only_fields(pts[i], {"id", "label"}, w);
                pt.id = need_string(field(pts[i], "id", w), child(w, "id"));
                auto lab = pts[i].find("label");
                pt.label = lab == pts[i].end() ? default_label : need_string(*lab, child(w, "label"));
            }
            const auto& syms = inst.residues.symbols();
            if (labels_checked && std::find(syms.begin(), syms.end(), pt.label) == syms.end())
                invalid("cross-reference", w, "unknown residue symbol '" + pt.label + "'");
            points.push_back(std::move(pt));
        }
        std::vector<std::pair<std::string, std::string>> order;
        if (auto it = v.find("order"); it != v.end()) {
            const std::string ow = child(where, "order");
            need_array(*it, ow);
            for (std::size_t i = 0; i < it->size(); ++i)
                order.push_back(string_pair((*it)[i], child(ow, i)));
        }
        try {
            inst.spaces.emplace(name, share(FiniteSpace::build(std::move(points), order)));
        } catch (const UnknownPoint& e) {
            invalid("cross-reference", child(where, "order"), e.what());
        } catch (const ValidationError& e) {
            relocate(e, where);
        }
    }

    const FiniteSpace& space_named(const std::string& name, const std::string& where) const
    {
        auto it = inst.spaces.find(name);
        if (it == inst.spaces.end())
            invalid("cross-reference", where, "unknown space '" + name + "'");
        return *it->second;
    }

    void map(const std::string& name, const json& v, const std::string& where)
    {
        need_object(v, where);
        only_fields(v, {"from", "to", "graph"}, where);
        MapDecl m;
        m.from = need_string(field(v, "from", where), child(where, "from"));
        m.to = need_string(field(v, "to", where), child(where, "to"));
        const FiniteSpace& src = space_named(m.from, child(where, "from"));
        const FiniteSpace& dst = space_named(m.to, child(where, "to"));
        const json& g = field(v, "graph", where);
        const std::string gw = child(where, "graph");
        need_object(g, gw);
        m.graph.assign(src.size(), -1);
        for (auto it = g.begin(); it != g.end(); ++it) {
            auto x = src.find(it.key());
            if (!x)
                invalid("cross-reference", child(gw, it.key()), "unknown point of '" + m.from + "'");
            auto y = dst.find(need_string(it.value(), child(gw, it.key())));
            if (!y)
                invalid("cross-reference", child(gw, it.key()), "unknown point of '" + m.to + "'");
            m.graph[*x] = *y;
        }
        for (int x = 0; x < src.size(); ++x)
            if (m.graph[x] < 0)
                invalid("total-map", gw, "point '" + src.id(x) + "' has no image");
        if (!is_monotone(src, dst, m.graph))
            invalid("monotonicity", where, "map is not order-preserving");
        if (!is_label_compatible(src, dst, m.graph, inst.residues))
            invalid("label-compatibility", where, "a residue symbol is not an extension of its image's");
        inst.maps.emplace(name, std::move(m));
    }

    const MapDecl& map_named(const std::string& name, const std::string& where) const
    {
        auto it = inst.maps.find(name);
        if (it == inst.maps.end())
            invalid("cross-reference", where, "unknown map '" + name + "'");
        return it->second;
    }

    void square(const std::string& name, const json& v, const std::string& where)
    {
        need_object(v, where);
        only_fields(v, {"e", "p"}, where);
        SquareDecl q;
        q.e = need_string(field(v, "e", where), child(where, "e"));
        q.p = need_string(field(v, "p", where), child(where, "p"));
        if (map_named(q.e, child(where, "e")).to != map_named(q.p, child(where, "p")).to)
            invalid("cospan", where, "e and p must share their target");
        inst.squares.emplace(name, q);
        try {
            inst.square(name);
        } catch (const MissingPullback& e) {
            invalid("pullback", where, e.what());
        }
    }

    void category(const json& v)
    {
        const std::string where = "/category";
        need_object(v, where);
        CategoryDecl c;
        c.kind = need_string(field(v, "kind", where), child(where, "kind"));
        auto object_list = [&] {
            c.objects = string_list(field(v, "objects", where), child(where, "objects"));
            std::set<std::string> seen;
            for (std::size_t i = 0; i < c.objects.size(); ++i) {
                space_named(c.objects[i], child(child(where, "objects"), i));
                if (!seen.insert(c.objects[i]).second)
                    invalid("unique-objects", child(child(where, "objects"), i), "object listed twice");
            }
        };
        auto in_objects = [&](const std::string& s) {
            return std::find(c.objects.begin(), c.objects.end(), s) != c.objects.end();
        };
        if (c.kind == "full") {
            only_fields(v, {"kind", "objects"}, where);
            object_list();
        } else if (c.kind == "over") {
            only_fields(v, {"kind", "base", "objects", "structure"}, where);
            c.base = need_string(field(v, "base", where), child(where, "base"));
            space_named(c.base, child(where, "base"));
            object_list();
            const std::string sw = child(where, "structure");
            const json& s = field(v, "structure", where);
            need_object(s, sw);
            for (auto it = s.begin(); it != s.end(); ++it)
                if (!in_objects(it.key()))
                    invalid("cross-reference", child(sw, it.key()), "not an object of the category");
            for (const auto& obj : c.objects) {
                const std::string w = child(sw, obj);
                auto it = s.find(obj);
                if (it == s.end())
                    invalid("schema", sw, "missing structure map for '" + obj + "'");
                const std::string m = need_string(*it, w);
                if (m == "identity") {
                    if (obj != c.base)
                        invalid("structure-map", w, "only the base may use the identity");
                } else {
                    const MapDecl& md = map_named(m, w);
                    if (md.from != obj || md.to != c.base)
                        invalid("structure-map", w, "map must go from the object to the base");
                }
                c.structure.push_back(m);
            }
        } else if (c.kind == "generated") {
            only_fields(v, {"kind", "objects", "generators"}, where);
            object_list();
            c.generators = string_list(field(v, "generators", where), child(where, "generators"));
            for (std::size_t i = 0; i < c.generators.size(); ++i) {
                const std::string w = child(child(where, "generators"), i);
                const MapDecl& md = map_named(c.generators[i], w);
                if (!in_objects(md.from) || !in_objects(md.to))
                    invalid("cross-reference", w, "generator between spaces outside the category");
            }
        } else if (c.kind == "family") {
            only_fields(v, {"kind", "base", "double_covers", "max_covers", "raised", "cap"}, where);
            c.base = need_string(field(v, "base", where), child(where, "base"));
            space_named(c.base, child(where, "base"));
            if (auto it = v.find("double_covers"); it != v.end())
                c.family.double_covers = need_bool(*it, child(where, "double_covers"));
            if (auto it = v.find("raised"); it != v.end())
                c.family.raised = need_bool(*it, child(where, "raised"));
            if (auto it = v.find("max_covers"); it != v.end()) {
                const int n = need_int(*it, child(where, "max_covers"));
                if (n < 0)
                    invalid("schema", child(where, "max_covers"), "expected a non-negative integer");
                c.family.max_covers = static_cast<std::size_t>(n);
            }
            if (auto it = v.find("cap"); it != v.end()) {
                const int n = need_int(*it, child(where, "cap"));
                if (n < 1)
                    invalid("schema", child(where, "cap"), "expected a positive integer");
                c.family.cap = static_cast<std::size_t>(n);
            }
        } else {
            invalid("schema", child(where, "kind"), "expected full, over, generated or family");
        }
        inst.category = std::move(c);
    }

    void presheaf(const std::string& name, const json& v, const std::string& where)
    {
        need_object(v, where);
        only_fields(v, {"sections", "restrictions"}, where);
        if (!inst.category)
            invalid("cross-reference", where, "presheaves need a category");
        if (inst.category->kind == "family")
            invalid("cross-reference", where, "presheaves need a full, over or generated category");
        const auto& objects = inst.category->objects;
        PresheafDecl d;
        const json& secs = field(v, "sections", where);
        const std::string sw = child(where, "sections");
        need_object(secs, sw);
        for (auto it = secs.begin(); it != secs.end(); ++it) {
            if (std::find(objects.begin(), objects.end(), it.key()) == objects.end())
                invalid("cross-reference", child(sw, it.key()), "not an object of the category");
            auto elems = string_list(it.value(), child(sw, it.key()));
            std::set<std::string> uniq(elems.begin(), elems.end());
            if (uniq.size() != elems.size())
                invalid("unique-sections", child(sw, it.key()), "section listed twice");
            d.sections.emplace(it.key(), std::move(elems));
        }
        for (const auto& obj : objects)
            if (!d.sections.count(obj))
                invalid("schema", sw, "missing sections over '" + obj + "'");
        auto has = [&](const std::string& obj, const std::string& s) {
            const auto& l = d.sections.at(obj);
            return std::find(l.begin(), l.end(), s) != l.end();
        };
        const std::string rw = child(where, "restrictions");
        if (auto it = v.find("restrictions"); it != v.end()) {
            need_object(*it, rw);
            for (auto r = it->begin(); r != it->end(); ++r) {
                const std::string w = child(rw, r.key());
                const MapDecl& md = map_named(r.key(), w);
                if (!d.sections.count(md.from) || !d.sections.count(md.to))
                    invalid("cross-reference", w, "map between spaces outside the category");
                need_object(r.value(), w);
                std::map<std::string, std::string> table;
                for (auto e = r.value().begin(); e != r.value().end(); ++e) {
                    const std::string ew = child(w, e.key());
                    if (!has(md.to, e.key()))
                        invalid("cross-reference", ew, "not a section over '" + md.to + "'");
                    const std::string img = need_string(e.value(), ew);
                    if (!has(md.from, img))
                        invalid("cross-reference", ew, "not a section over '" + md.from + "'");
                    table.emplace(e.key(), img);
                }
                for (const auto& s : d.sections.at(md.to))
                    if (!table.count(s))
                        invalid("total-map", w, "section '" + s + "' has no restriction");
                d.restrictions.emplace(r.key(), std::move(table));
            }
        }
        inst.presheaves.emplace(name, std::move(d));
    }

    void check(const std::string& command, const json& v, const std::string& where)
    {
        static const std::set<std::string> commands = {"verify", "covering", "sheaf", "lattice", "density"};
        if (!commands.count(command))
            invalid("schema", where, "unknown command");
        need_object(v, where);
        only_fields(v, {"structures", "axioms", "targets", "side", "depth", "max_presheaf_size"}, where);
        CheckDecl c;
        if (auto it = v.find("structures"); it != v.end()) {
            c.structures = string_list(*it, child(where, "structures"));
            for (std::size_t i = 0; i < c.structures.size(); ++i)
                if (!parse_structure(c.structures[i]))
                    invalid("schema", child(child(where, "structures"), i), "unknown structure");
        }
        if (auto it = v.find("axioms"); it != v.end()) {
            c.axioms = string_list(*it, child(where, "axioms"));
            for (std::size_t i = 0; i < c.axioms.size(); ++i)
                if (c.axioms[i] != "complete" && c.axioms[i] != "regular" && c.axioms[i] != "bounded")
                    invalid("schema", child(child(where, "axioms"), i), "unknown axiom");
        }
        if (auto it = v.find("targets"); it != v.end())
            c.targets = string_list(*it, child(where, "targets"));
        if (auto it = v.find("side"); it != v.end()) {
            c.side = need_string(*it, child(where, "side"));
            if (*c.side != "upper" && *c.side != "lower")
                invalid("schema", child(where, "side"), "expected upper or lower");
        }
        if (auto it = v.find("depth"); it != v.end())
            c.depth = need_int(*it, child(where, "depth"));
        if (auto it = v.find("max_presheaf_size"); it != v.end())
            c.max_presheaf_size = need_int(*it, child(where, "max_presheaf_size"));
        inst.checks.emplace(command, std::move(c));
    }

    void run(const json& doc)
    {
        need_object(doc, "");
        only_fields(doc, {"version", "description", "residue_order", "spaces", "maps", "squares", "category",
                          "presheaves", "checks"},
                    "");
        if (need_int(field(doc, "version", ""), "/version") != 1)
            invalid("version", "/version", "only version 1 is supported");
        if (auto it = doc.find("description"); it != doc.end())
            need_string(*it, "/description");
        if (auto it = doc.find("residue_order"); it != doc.end())
            residues(*it);
        auto each = [&](const char* key, auto&& fn) {
            auto it = doc.find(key);
            if (it == doc.end())
                return;
            const std::string where = child("", key);
            need_object(*it, where);
            for (auto e = it->begin(); e != it->end(); ++e)
                fn(e.key(), e.value(), child(where, e.key()));
        };
        each("spaces", [&](const std::string& k, const json& v, const std::string& w) { space(k, v, w); });
        each("maps", [&](const std::string& k, const json& v, const std::string& w) { map(k, v, w); });
        each("squares", [&](const std::string& k, const json& v, const std::string& w) { square(k, v, w); });
        if (auto it = doc.find("category"); it != doc.end())
            category(*it);
        each("presheaves", [&](const std::string& k, const json& v, const std::string& w) { presheaf(k, v, w); });
        each("checks", [&](const std::string& k, const json& v, const std::string& w) { check(k, v, w); });
    }
};

}  // namespace

SpaceMap InstanceFile::map(const std::string& name) const
{
    const MapDecl& m = maps.at(name);
    return SpaceMap{spaces.at(m.from), spaces.at(m.to), m.graph};
}

ConcreteSquare InstanceFile::square(const std::string& name) const
{
    const SquareDecl& q = squares.at(name);
    const SpaceMap e = map(q.e);
    const SpaceMap p = map(q.p);
    return complete_square(*e.target, *e.source, e.graph, *p.source, p.graph, residues);
}

InstanceFile parse_instance(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    Parser parser;
    parser.run(doc);
    // Presheaves are only fully validated against their category.
    if (!parser.inst.presheaves.empty()) {
        const BuiltCategory cat = build_category(parser.inst);
        for (const auto& [name, decl] : parser.inst.presheaves) {
            try {
                build_presheaf(parser.inst, cat, name);
            } catch (const ValidationError& e) {
                relocate(e, child("/presheaves", name));
            }
        }
    }
    return std::move(parser.inst);
}

BuiltCategory build_category(const InstanceFile& inst)
{
    if (!inst.category)
        throw ValidationError("category", "the instance declares no category");
    const CategoryDecl& c = *inst.category;
    BuiltCategory out;
    std::vector<FiniteSpace> objects;
    for (const auto& name : c.objects)
        objects.push_back(*inst.spaces.at(name));
    try {
        if (c.kind == "full") {
            out.site = std::make_shared<const SiteCategory>(SiteCategory::full(objects, c.objects, inst.residues));
        } else if (c.kind == "over") {
            const FiniteSpace& base = *inst.spaces.at(c.base);
            std::vector<std::vector<int>> structure;
            for (const auto& m : c.structure) {
                if (m == "identity") {
                    std::vector<int> id(base.size());
                    for (int i = 0; i < base.size(); ++i)
                        id[i] = i;
                    structure.push_back(std::move(id));
                } else {
                    structure.push_back(inst.maps.at(m).graph);
                }
            }
            out.site = std::make_shared<const SiteCategory>(
                SiteCategory::over(base, objects, std::move(structure), c.objects, inst.residues));
        } else if (c.kind == "generated") {
            std::vector<Morphism> gens;
            auto index = [&](const std::string& s) {
                return static_cast<int>(std::find(c.objects.begin(), c.objects.end(), s) - c.objects.begin());
            };
            for (const auto& g : c.generators) {
                const MapDecl& m = inst.maps.at(g);
                gens.push_back(Morphism{index(m.from), index(m.to), m.graph});
            }
            out.site = std::make_shared<const SiteCategory>(
                SiteCategory::generated(objects, c.objects, gens, inst.residues));
        } else {
            return BuiltCategory{family_site(*inst.spaces.at(c.base), inst.residues, c.family), {}};
        }
    } catch (const ValidationError& e) {
        relocate(e, "/category");
    }
    for (const auto& [name, m] : inst.maps) {
        auto s = out.site->object_named(m.from);
        auto t = out.site->object_named(m.to);
        if (!s || !t)
            continue;
        if (auto found = out.site->find_morphism(*s, *t, m.graph))
            out.morphisms.emplace(name, *found);
    }
    return out;
}

Presheaf build_presheaf(const InstanceFile& inst, const BuiltCategory& cat, const std::string& name)
{
    const PresheafDecl& d = inst.presheaves.at(name);
    const SiteCategory& c = *cat.site;
    const int n_obj = c.object_count();
    std::vector<int> sizes(n_obj);
    std::vector<std::vector<std::string>> names(n_obj);
    for (int i = 0; i < n_obj; ++i) {
        names[i] = d.sections.at(c.name(i));
        sizes[i] = static_cast<int>(names[i].size());
    }
    auto position = [&](int obj, const std::string& s) {
        return static_cast<int>(std::find(names[obj].begin(), names[obj].end(), s) - names[obj].begin());
    };
    std::vector<std::optional<std::vector<int>>> table(c.morphism_count());
    for (int x = 0; x < n_obj; ++x) {
        std::vector<int> id(sizes[x]);
        for (int s = 0; s < sizes[x]; ++s)
            id[s] = s;
        table[c.identity(x)] = std::move(id);
    }
    auto record = [&](int m, std::vector<int> r, const std::string& via) {
        if (table[m] && *table[m] != r)
            throw ValidationError("functoriality", "restrictions along " + via + " disagree");
        table[m] = std::move(r);
    };
    for (const auto& [map_name, entries] : d.restrictions) {
        auto it = cat.morphisms.find(map_name);
        if (it == cat.morphisms.end())
            throw ValidationError("cross-reference", "map '" + map_name + "' is not a morphism of the category");
        const int m = it->second;
        std::vector<int> r(sizes[c.target(m)]);
        for (int s = 0; s < sizes[c.target(m)]; ++s)
            r[s] = position(c.source(m), entries.at(names[c.target(m)][s]));
        record(m, std::move(r), "'" + map_name + "'");
    }
    // Close under composition: F(f ∘ g) = F(g) ∘ F(f).
    for (bool grew = true; grew;) {
        grew = false;
        for (int f = 0; f < c.morphism_count(); ++f) {
            if (!table[f])
                continue;
            for (int g : c.into(c.source(f))) {
                if (!table[g])
                    continue;
                const int h = c.compose(f, g);
                std::vector<int> r(sizes[c.target(f)]);
                for (int s = 0; s < sizes[c.target(f)]; ++s)
                    r[s] = (*table[g])[(*table[f])[s]];
                const bool had = table[h].has_value();
                record(h, std::move(r), "two composites into '" + c.name(c.target(h)) + "'");
                grew = grew || !had;
            }
        }
    }
    std::vector<std::vector<int>> restrictions(c.morphism_count());
    for (int m = 0; m < c.morphism_count(); ++m) {
        if (!table[m])
            throw ValidationError("coverage", "no restriction along a morphism " + c.name(c.source(m)) + " → " +
                                                  c.name(c.target(m)) + " follows from the declared maps");
        restrictions[m] = std::move(*table[m]);
    }
    return Presheaf(cat.site, std::move(sizes), std::move(restrictions), std::move(names));
}

}  // namespace cdsite
