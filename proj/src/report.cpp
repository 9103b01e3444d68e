#include "cdsite/report.hpp"

#include <chrono>

#include "cdsite/axioms.hpp"
#include "cdsite/covering.hpp"
#include "cdsite/density.hpp"
#include "cdsite/errors.hpp"
#include "cdsite/sheaves.hpp"
#include "cdsite/splitting.hpp"

namespace cdsite {

namespace {

using ojson = nlohmann::ordered_json;

std::string verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::yes: return "pass";
    case Verdict::no: return "fail";
    default: return "inconclusive";
    }
}

/// Running exit status of a report.
struct Tally {
    bool failed = false;
    bool unsettled = false;

    void add(const std::string& verdict)
    {
        if (verdict == "fail")
            failed = true;
        else if (verdict != "pass")
            unsettled = true;
    }
    int code() const { return failed ? 1 : unsettled ? 2 : 0; }
    std::string verdict() const { return failed ? "fail" : unsettled ? "inconclusive" : "pass"; }
};

class Stopwatch {
public:
    explicit Stopwatch(bool on) : on_(on), start_(std::chrono::steady_clock::now()) {}
    void stamp(ojson& j) const
    {
        if (on_)
            j["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    bool on_;
    std::chrono::steady_clock::time_point start_;
};

ojson ids_json(const FiniteSpace& s, PointSet set)
{
    ojson out = ojson::array();
    for (const auto& id : s.ids_of(set))
        out.push_back(id);
    return out;
}

ojson space_json(const FiniteSpace& s)
{
    ojson pts = ojson::array();
    for (int i = 0; i < s.size(); ++i)
        pts.push_back({{"id", s.id(i)}, {"label", s.label(i)}});
    ojson order = ojson::array();
    for (auto [x, y] : s.cover_relations())
        order.push_back({s.id(x), s.id(y)});
    return {{"points", pts}, {"order", order}};
}

ojson graph_json(const FiniteSpace& src, const FiniteSpace& dst, const std::vector<int>& g)
{
    ojson out = ojson::object();
    for (int x = 0; x < src.size(); ++x)
        if (g[x] >= 0)
            out[src.id(x)] = dst.id(g[x]);
    return out;
}

ojson concrete_json(const ConcreteSquare& q)
{
    return {{"x", space_json(q.x)},         {"a", space_json(q.a)},
            {"y", space_json(q.y)},         {"b", space_json(q.b)},
            {"e", graph_json(q.a, q.x, q.e)}, {"p", graph_json(q.y, q.x, q.p)},
            {"e_b", graph_json(q.b, q.a, q.e_b)}, {"p_b", graph_json(q.b, q.y, q.p_b)}};
}

ojson morphism_json(const SiteCategory& c, int m)
{
    return {{"source", c.name(c.source(m))},
            {"target", c.name(c.target(m))},
            {"graph", graph_json(c.object(c.source(m)), c.object(c.target(m)), c.morphism(m).graph)}};
}

ojson site_square_json(const SiteCategory& c, const SiteSquare& q)
{
    return {{"x", c.name(q.x)},
            {"a", c.name(q.a)},
            {"y", c.name(q.y)},
            {"b", c.name(q.b)},
            {"e", morphism_json(c, q.e)["graph"]},
            {"p", morphism_json(c, q.p)["graph"]},
            {"e_b", morphism_json(c, q.e_b)["graph"]},
            {"p_b", morphism_json(c, q.p_b)["graph"]}};
}

template <class T>
std::vector<T> pick(const std::vector<T>& flag, const std::vector<T>& fallback)
{
    return flag.empty() ? fallback : flag;
}

std::vector<StructureName> structures_of(const std::vector<std::string>& names)
{
    if (names.empty())
        return {all_structures().begin(), all_structures().end()};
    std::vector<StructureName> out;
    for (const auto& n : names) {
        auto s = parse_structure(n);
        if (!s)
            throw Error("unknown structure '" + n + "'");
        out.push_back(*s);
    }
    return out;
}

const CheckDecl& check_of(const InstanceFile& inst, const std::string& command)
{
    static const CheckDecl none;
    auto it = inst.checks.find(command);
    return it == inst.checks.end() ? none : it->second;
}

template <class Map>
std::vector<std::string> targets_of(const Map& all, const std::vector<std::string>& requested, const char* what)
{
    std::vector<std::string> out;
    if (requested.empty()) {
        for (const auto& entry : all)
            out.push_back(entry.first);
        return out;
    }
    for (const auto& t : requested) {
        if (!all.count(t))
            throw Error(std::string("unknown ") + what + " '" + t + "'");
        out.push_back(t);
    }
    return out;
}

// --- verify --------------------------------------------------------------------

ojson axiom_json(const CdSite& cd, const AxiomReport& r, Tally& tally)
{
    ojson j = {{"axiom", r.axiom}, {"verdict", verdict_name(r.verdict)}, {"checked", r.checked}};
    tally.add(j["verdict"]);
    if (r.verdict == Verdict::no) {
        ojson cert = {{"reason", r.reason}};
        if (r.square >= 0)
            cert["square"] = site_square_json(cd.site(), cd.squares()[r.square]);
        if (r.morphism >= 0)
            cert["morphism"] = morphism_json(cd.site(), r.morphism);
        if (r.density_index >= 0)
            cert["density_index"] = r.density_index;
        j["certificate"] = cert;
    }
    return j;
}

Report verify(const InstanceFile& inst, const RunFlags& flags)
{
    const CheckDecl& req = check_of(inst, "verify");
    const auto structures = structures_of(pick(flags.structures, req.structures));
    const auto axioms = pick(flags.axioms, pick(req.axioms, {"complete", "regular", "bounded"}));
    for (const auto& a : axioms)
        if (a != "complete" && a != "regular" && a != "bounded")
            throw Error("unknown axiom '" + a + "'");
    const auto depth = flags.depth ? flags.depth : req.depth;
    const BuiltCategory cat = build_category(inst);
    Tally tally;
    ojson results = ojson::array();
    for (StructureName s : structures) {
        const Stopwatch watch(flags.timing);
        const CdSite cd(cat.site, standard_structure(s));
        const CoveringOracle oracle(cd);
        ojson entry = {{"structure", std::string(to_string(s))}, {"squares", cd.squares().size()}};
        ojson list = ojson::array();
        for (const auto& a : axioms) {
            if (a == "complete")
                list.push_back(axiom_json(cd, is_complete(cd, oracle, depth), tally));
            else if (a == "regular")
                list.push_back(axiom_json(cd, is_regular(cd, oracle, depth), tally));
            else
                list.push_back(axiom_json(cd, is_bounded(cd), tally));
        }
        entry["axioms"] = list;
        watch.stamp(entry);
        results.push_back(entry);
    }
    return {{{"objects", cat.site->object_count()}, {"results", results}, {"verdict", tally.verdict()}},
            tally.code()};
}

// --- covering ------------------------------------------------------------------

ojson tree_json(const CoveringTree& t, const FiniteSpace& base, const FiniteSpace& source)
{
    ojson j = {{"object", space_json(t.object)},
               {"to_base", graph_json(t.object, base, t.to_base)},
               {"depth", t.depth()}};
    if (t.is_leaf()) {
        j["lift"] = graph_json(t.object, source, t.lift);
    } else {
        j["square"] = concrete_json(*t.square);
        ojson kids = ojson::array();
        for (const auto& c : t.children)
            kids.push_back(tree_json(c, base, source));
        j["children"] = kids;
    }
    return j;
}

ojson splitting_json(const SpaceMap& f, const SplittingSequence& s)
{
    ojson closed = ojson::array();
    for (PointSet z : s.closed)
        closed.push_back(ids_json(*f.target, z));
    ojson sections = ojson::array();
    for (const auto& sec : s.sections)
        sections.push_back(graph_json(*f.target, *f.source, sec));
    return {{"closed", closed}, {"sections", sections}};
}

Report covering(const InstanceFile& inst, const RunFlags& flags)
{
    const CheckDecl& req = check_of(inst, "covering");
    const auto targets = targets_of(inst.maps, pick(flags.targets, req.targets), "map");
    const auto side_flag = flags.side ? flags.side : req.side;
    if (side_flag && *side_flag != "upper" && *side_flag != "lower")
        throw Error("side must be upper or lower");
    Tally tally;
    ojson results = ojson::array();
    for (const auto& name : targets) {
        const Stopwatch watch(flags.timing);
        const SpaceMap f = inst.map(name);
        const bool etale = is_etale_like(*f.source, *f.target, f.graph);
        const bool proper = is_proper_like(*f.source, *f.target, f.graph, inst.residues);
        ojson entry = {{"map", name}, {"etale_like", etale}, {"proper_like", proper}};
        std::optional<Side> side;
        if (side_flag)
            side = *side_flag == "upper" ? Side::upper : Side::lower;
        else if (etale)
            side = Side::upper;
        else if (proper)
            side = Side::lower;
        if (!side) {
            entry["verdict"] = "error";
            entry["error"] = "map is neither étale-like nor proper-like";
        } else {
            entry["side"] = std::string(to_string(*side));
            try {
                if (is_cd_covering(f, *side, inst.residues)) {
                    entry["verdict"] = "pass";
                    entry["splitting"] = splitting_json(f, *splitting_sequence(f));
                    entry["tree"] = tree_json(covering_decomposition(f, *side, inst.residues), *f.target, *f.source);
                } else {
                    entry["verdict"] = "fail";
                    PointSet unlifted = 0;
                    for (int y = 0; y < f.target->size(); ++y) {
                        bool lifted = false;
                        for (int x = 0; x < f.source->size(); ++x)
                            lifted = lifted || (f.graph[x] == y && f.source->label(x) == f.target->label(y));
                        if (!lifted)
                            unlifted |= bit(y);
                    }
                    entry["certificate"] = {{"unlifted", ids_json(*f.target, unlifted)}};
                }
            } catch (const Error& e) {
                entry["verdict"] = "error";
                entry["error"] = e.what();
            }
        }
        tally.add(entry["verdict"]);
        watch.stamp(entry);
        results.push_back(entry);
    }
    return {{{"results", results}, {"verdict", tally.verdict()}}, tally.code()};
}

// --- sheaf ---------------------------------------------------------------------

ojson descent_json(const Presheaf& f, const CdSite& cd, bool& holds)
{
    const SiteCategory& c = cd.site();
    bool empty_ok = true;
    for (int x = 0; x < c.object_count(); ++x)
        if (c.is_empty_object(x) && f.size(x) != 1)
            empty_ok = false;
    holds = empty_ok;
    ojson failures = ojson::array();
    for (const auto& q : cd.squares()) {
        const auto r = square_descent_check(f, q);
        if (r.bijective)
            continue;
        holds = false;
        ojson j = {{"square", site_square_json(c, q)}};
        if (r.collision)
            j["collision"] = {f.section_name(q.x, r.collision->first), f.section_name(q.x, r.collision->second)};
        if (r.missed)
            j["missed"] = {f.section_name(q.a, r.missed->first), f.section_name(q.y, r.missed->second)};
        failures.push_back(j);
    }
    return {{"empty_is_point", empty_ok}, {"squares", cd.squares().size()}, {"failures", failures}};
}

Report sheaf(const InstanceFile& inst, const RunFlags& flags)
{
    const CheckDecl& req = check_of(inst, "sheaf");
    const auto structures = structures_of(pick(flags.structures, req.structures));
    const auto targets = targets_of(inst.presheaves, pick(flags.targets, req.targets), "presheaf");
    const auto max_size = flags.max_presheaf_size ? flags.max_presheaf_size : req.max_presheaf_size;
    const BuiltCategory cat = build_category(inst);
    const int depth = flags.depth ? *flags.depth : req.depth ? *req.depth : max_dimension(*cat.site) + 2;
    std::vector<Presheaf> presheaves;
    for (const auto& t : targets)
        presheaves.push_back(build_presheaf(inst, cat, t));
    Tally tally;
    ojson results = ojson::array();
    ojson enumeration = ojson::array();
    for (StructureName s : structures) {
        const CdSite cd(cat.site, standard_structure(s));
        const CoveringOracle oracle(cd);
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const Stopwatch watch(flags.timing);
            const auto check = is_sheaf(presheaves[i], oracle, depth);
            bool descent = false;
            ojson entry = {{"presheaf", targets[i]},
                           {"structure", std::string(to_string(s))},
                           {"verdict", verdict_name(check.verdict)}};
            if (check.verdict == Verdict::no) {
                ojson sieve = ojson::array();
                for (int m : check.sieve->morphisms(*cat.site))
                    sieve.push_back(morphism_json(*cat.site, m));
                entry["certificate"] = {{"object", cat.site->name(check.object)},
                                        {"sieve", sieve},
                                        {"uniqueness_failed", check.uniqueness_failed},
                                        {"existence_failed", check.existence_failed}};
            }
            entry["descent"] = descent_json(presheaves[i], cd, descent);
            entry["descent"]["holds"] = descent;
            if (check.verdict != Verdict::inconclusive)
                entry["agreement"] = descent == (check.verdict == Verdict::yes);
            tally.add(entry["verdict"]);
            watch.stamp(entry);
            results.push_back(entry);
        }
        if (max_size) {
            const Stopwatch watch(flags.timing);
            std::size_t total = 0, sheaves = 0, descents = 0, unsettled = 0, disagreements = 0;
            for_each_presheaf(cat.site, *max_size, [&](const Presheaf& f) {
                ++total;
                const auto check = is_sheaf(f, oracle, depth);
                const bool d = satisfies_square_descent(f, cd);
                descents += d;
                if (check.verdict == Verdict::inconclusive) {
                    ++unsettled;
                    return;
                }
                const bool is = check.verdict == Verdict::yes;
                sheaves += is;
                disagreements += is != d;
            });
            ojson entry = {{"structure", std::string(to_string(s))},
                           {"max_size", *max_size},
                           {"presheaves", total},
                           {"sheaves", sheaves},
                           {"descent", descents},
                           {"unsettled", unsettled},
                           {"disagreements", disagreements}};
            entry["verdict"] = disagreements ? "fail" : unsettled ? "inconclusive" : "pass";
            tally.add(entry["verdict"]);
            watch.stamp(entry);
            enumeration.push_back(entry);
        }
    }
    ojson body = {{"depth", depth}, {"results", results}};
    if (max_size)
        body["enumeration"] = enumeration;
    body["verdict"] = tally.verdict();
    return {body, tally.code()};
}

// --- density and lattice -------------------------------------------------------

Report density(const InstanceFile& inst, const RunFlags& flags)
{
    const CheckDecl& req = check_of(inst, "density");
    const auto targets = targets_of(inst.spaces, pick(flags.targets, req.targets), "space");
    ojson results = ojson::array();
    for (const auto& name : targets) {
        const FiniteSpace& x = *inst.spaces.at(name);
        const int dim = dimension(x);
        ojson classes = ojson::array();
        for (int d = 0; d <= dim + 1; ++d) {
            ojson opens = ojson::array();
            for (PointSet u : density_class(x, d))
                opens.push_back(ids_json(x, u));
            classes.push_back({{"d", d}, {"smallest", ids_json(x, smallest_dense(x, d))}, {"opens", opens}});
        }
        results.push_back({{"space", name}, {"points", x.size()}, {"dimension", dim}, {"classes", classes}});
    }
    return {{{"results", results}, {"verdict", "pass"}}, 0};
}

Report lattice(const InstanceFile* inst)
{
    ojson structures = ojson::array();
    for (StructureName s : all_structures()) {
        ojson gens = ojson::array();
        for (StructureName g : generating_structures(s))
            gens.push_back(std::string(to_string(g)));
        structures.push_back({{"name", std::string(to_string(s))}, {"generated_by", gens}});
    }
    ojson arrows = ojson::array();
    for (auto [a, b] : lattice_inclusions())
        arrows.push_back({std::string(to_string(a)), std::string(to_string(b))});
    ojson body = {{"structures", structures}, {"arrows", arrows}};
    if (inst) {
        ojson squares = ojson::array();
        for (const auto& [name, decl] : inst->squares) {
            const auto q = inst->square(name);
            ojson in = ojson::array();
            for (StructureName s : all_structures())
                if (classify_square(q, s, inst->residues))
                    in.push_back(std::string(to_string(s)));
            squares.push_back({{"square", name}, {"structures", in}});
        }
        body["squares"] = squares;
    }
    body["verdict"] = "pass";
    return {body, 0};
}

}  // namespace

int combine_exit_codes(int a, int b)
{
    if (a == 1 || b == 1)
        return 1;
    return std::max(a, b);
}

Report run(const std::string& command, const InstanceFile* instance, const RunFlags& flags)
{
    if (command == "lattice")
        return lattice(instance);
    if (command != "verify" && command != "covering" && command != "sheaf" && command != "density")
        throw Error("unknown command '" + command + "'");
    if (!instance)
        throw Error("command '" + command + "' needs an instance file");
    if (command == "verify")
        return verify(*instance, flags);
    if (command == "covering")
        return covering(*instance, flags);
    if (command == "sheaf")
        return sheaf(*instance, flags);
    return density(*instance, flags);
}

}  // namespace cdsite
