#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "cdsite/covering.hpp"
#include "cdsite/errors.hpp"
#include "cdsite/instance.hpp"
#include "cdsite/report.hpp"
#include "cdsite/splitting.hpp"

using namespace cdsite;

namespace {

std::string fixture(const std::string& name) { return std::string(CDSITE_FIXTURE_DIR) + "/" + name; }

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

InstanceFile load(const std::string& name) { return parse_instance(slurp(fixture(name))); }

struct Process {
    std::string out;
    int code = -1;
};

Process cli(const std::string& args)
{
    const std::string cmd = std::string(CDSITE_CLI) + " " + args + " 2>/dev/null";
    Process p;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        p.out.append(buf.data(), n);
    const int status = pclose(pipe);
    p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return p;
}

/// The invariant named by a validation failure, or "" when the text parses.
std::string violated(const std::string& text)
{
    try {
        parse_instance(text);
    } catch (const ValidationError& e) {
        return e.invariant();
    }
    return "";
}

}  // namespace

TEST_CASE("minimal instance with one point")
{
    const auto inst = parse_instance(R"({"version": 1, "spaces": {"P": {"points": ["p"]}}})");
    REQUIRE(inst.spaces.size() == 1);
    CHECK(inst.spaces.at("P")->size() == 1);
    CHECK(inst.spaces.at("P")->label(0) == "k");
}

TEST_CASE("instance errors name the violated invariant")
{
    CHECK(violated(R"({"version": 1, "spaces": {"X": {"points": ["a", "b"], "order": [["a", "b"], ["b", "a"]]}}})") ==
          "antisymmetry");
    CHECK(violated(R"({"version": 2})") == "version");
    CHECK(violated(R"({"spaces": {}})") == "schema");
    CHECK(violated(R"({"version": 1, "bogus": 0})") == "schema");
    CHECK(violated(R"({"version": 1, "spaces": {"X": {"points": ["a", "a"]}}})") == "unique-ids");
    CHECK(violated(R"({"version": 1, "spaces": {"X": {"points": ["a"], "order": [["a", "z"]]}}})") ==
          "cross-reference");
    CHECK(violated(R"({"version": 1, "spaces": {"X": {"points": ["a"]}},
                       "maps": {"f": {"from": "X", "to": "Y", "graph": {}}}})") == "cross-reference");
    CHECK(violated(R"({"version": 1, "spaces": {"X": {"points": ["a"]}},
                       "maps": {"f": {"from": "X", "to": "X", "graph": {}}}})") == "total-map");
    // The order-reversing map of the Sierpinski space.
    CHECK(violated(R"({"version": 1, "spaces": {"X": {"points": ["c", "g"], "order": [["c", "g"]]}},
                       "maps": {"f": {"from": "X", "to": "X", "graph": {"c": "g", "g": "c"}}}})") == "monotonicity");
    CHECK(violated(R"({"version": 1, "residue_order": {"symbols": ["k", "K"], "extensions": [["k", "K"]]},
                       "spaces": {"X": {"points": [{"id": "a", "label": "K"}]}, "Y": {"points": ["b"]}},
                       "maps": {"f": {"from": "Y", "to": "X", "graph": {"b": "a"}}}})") == "label-compatibility");
    CHECK(violated(R"({"version": 1, "residue_order": {"symbols": ["k"]},
                       "spaces": {"X": {"points": [{"id": "a", "label": "L"}]}}})") == "cross-reference");
    CHECK(violated(R"({"version": 1, "checks": {"verify": {"structures": ["nope"]}}})") == "schema");
}

TEST_CASE("validation messages carry the location")
{
    try {
        parse_instance(R"({"version": 1, "spaces": {"X": {"points": ["a", 3]}}})");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("/spaces/X/points/1") != std::string::npos);
    }
    try {
        parse_instance("{\"version\": 1,\n  \"spaces\": [}");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("Nisnevich square fixture round-trips through classification")
{
    const auto inst = load("sier_nisnevich.json");
    const auto q = inst.square("nisnevich");
    CHECK(q.b.size() == 2);
    CHECK(classify_square(q, StructureName::up));
    CHECK_FALSE(classify_square(q, StructureName::p_up));
    CHECK_FALSE(classify_square(q, StructureName::low));
}

TEST_CASE("presheaves are completed along composites")
{
    const auto inst = load("four_object.json");
    const auto cat = build_category(inst);
    const auto f = build_presheaf(inst, cat, "subsets");
    const auto& c = *cat.site;
    const int d = *c.object_named("D");
    const int e = *c.object_named("empty");
    const auto to_empty = c.hom(e, d);
    REQUIRE(to_empty.size() == 1);
    for (int s = 0; s < 4; ++s)
        CHECK(f.restrict(to_empty[0], s) == 0);
    CHECK(f.section_name(d, 2) == "10");
}

TEST_CASE("presheaf declarations are checked against the category")
{
    const std::string head = R"({"version": 1,
        "spaces": {"E": {"points": []}, "P": {"points": ["p"]}, "Q": {"points": ["q"]}},
        "maps": {"ep": {"from": "E", "to": "P", "graph": {}}, "eq": {"from": "E", "to": "Q", "graph": {}},
                 "pq": {"from": "P", "to": "Q", "graph": {"p": "q"}}},
        "category": {"kind": "generated", "objects": ["E", "P", "Q"], "generators": ["ep", "eq", "pq"]},
        "presheaves": {"F": {"sections": {"E": ["x", "y"], "P": ["x", "y"], "Q": ["x"]}, "restrictions": )";
    // E → Q directly and through P must agree.
    CHECK(violated(head + R"({"ep": {"x": "x", "y": "y"}, "eq": {"x": "x"}, "pq": {"x": "y"}}}}})") ==
          "functoriality");
    CHECK(violated(head + R"({"ep": {"x": "x", "y": "y"}, "pq": {"x": "y"}}}}})") == "");
    CHECK(violated(head + R"({"ep": {"x": "x", "y": "y"}}}}})") == "coverage");
}

TEST_CASE("lattice report lists nine structures and twelve arrows")
{
    const auto r = run("lattice", nullptr, {});
    CHECK(r.exit_code == 0);
    CHECK(r.body["structures"].size() == 9);
    CHECK(r.body["arrows"].size() == 12);
}

TEST_CASE("open point of the Sierpinski space fails with a replayable certificate")
{
    const auto inst = load("sier_nisnevich.json");
    RunFlags flags;
    flags.side = "upper";
    flags.targets = {"j"};
    const auto r = run("covering", &inst, flags);
    CHECK(r.exit_code == 1);
    const auto& entry = r.body["results"][0];
    CHECK(entry["verdict"] == "fail");
    const auto f = inst.map("j");
    CHECK_FALSE(is_cd_covering(f, Side::upper));
    for (const auto& id : entry["certificate"]["unlifted"])
        CHECK(f.preimage(bit(f.target->index_of(id.get<std::string>()))) == 0);
}

TEST_CASE("covering report carries a valid tree")
{
    const auto inst = load("residue_lower.json");
    RunFlags flags;
    flags.targets = {"f"};
    const auto r = run("covering", &inst, flags);
    CHECK(r.exit_code == 0);
    const auto& entry = r.body["results"][0];
    CHECK(entry["side"] == "lower");
    CHECK(entry["tree"]["depth"] == 1);
    CHECK(entry["splitting"]["closed"].size() == 2);
}

TEST_CASE("sheaf report: failures carry a sieve the library confirms")
{
    const auto inst = load("four_object.json");
    RunFlags flags;
    flags.structures = {"add"};
    const auto r = run("sheaf", &inst, flags);
    CHECK(r.exit_code == 1);
    const auto cat = build_category(inst);
    const CdSite cd(cat.site, standard_structure(StructureName::add));
    const CoveringOracle oracle(cd);
    for (const auto& entry : r.body["results"]) {
        const auto f = build_presheaf(inst, cat, entry["presheaf"]);
        const auto check = is_sheaf(f, oracle, 3);
        CHECK(entry["verdict"] == std::string(check.verdict == Verdict::yes ? "pass" : "fail"));
        CHECK(entry["agreement"] == true);
        if (entry["verdict"] == "fail")
            CHECK(entry["certificate"]["object"] == cat.site->name(check.object));
    }
    const auto& e = r.body["enumeration"][0];
    CHECK(e["structure"] == "add");
    CHECK(e["presheaves"].get<int>() > 0);
    CHECK(e["sheaves"] == e["descent"]);
    CHECK(e["disagreements"] == 0);
}

TEST_CASE("density report matches the Sierpinski tables")
{
    const auto inst = load("density_spaces.json");
    RunFlags flags;
    flags.targets = {"SIER"};
    const auto r = run("density", &inst, flags);
    const auto& entry = r.body["results"][0];
    CHECK(entry["dimension"] == 1);
    CHECK(entry["classes"][0]["opens"].size() == 3);
    CHECK(entry["classes"][1]["opens"].size() == 2);
    CHECK(entry["classes"][2]["opens"].size() == 1);
}

TEST_CASE("unknown targets are errors")
{
    const auto inst = load("density_spaces.json");
    RunFlags flags;
    flags.targets = {"nowhere"};
    CHECK_THROWS_AS(run("density", &inst, flags), Error);
    CHECK_THROWS_AS(run("explode", &inst, {}), Error);
    CHECK_THROWS_AS(run("verify", nullptr, {}), Error);
}

TEST_CASE("exit codes combine with fail taking precedence")
{
    CHECK(combine_exit_codes(0, 0) == 0);
    CHECK(combine_exit_codes(0, 2) == 2);
    CHECK(combine_exit_codes(2, 1) == 1);
    CHECK(combine_exit_codes(1, 0) == 1);
}

TEST_CASE("executable: exit codes and stable output")
{
    const auto lattice = cli("lattice");
    CHECK(lattice.code == 0);
    const auto verify = cli("verify --structure up --axioms complete,regular,bounded " + fixture("*.json"));
    CHECK(verify.code == 0);
    CHECK(verify.out.find("\"fail\"") == std::string::npos);
    const auto cover = cli("covering --side upper --map j " + fixture("sier_nisnevich.json"));
    CHECK(cover.code == 1);
    CHECK(cover.out.find("\"fail\"") != std::string::npos);
    CHECK(cli("density /nonexistent.json").code == 2);
    CHECK(cli("covering --side sideways " + fixture("sier_nisnevich.json")).code != 0);
    CHECK(cli("verify --structure up " + fixture("*.json")).out == verify.out);
}
