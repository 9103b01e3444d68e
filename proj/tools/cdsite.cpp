// Batch front-end: reads instance files and prints a JSON report.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cdsite/errors.hpp"
#include "cdsite/report.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw cdsite::Error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Checks cd-structure axioms, coverings and sheaf conditions on finite spaces"};
    app.require_subcommand(1);

    std::vector<std::string> files;
    std::string structures, axioms, targets, side;
    std::optional<int> depth, max_size;
    bool timing = false;

    auto common = [&](CLI::App* sub, bool needs_file) {
        auto* opt = sub->add_option("instances", files, "Instance files (JSON, version 1)");
        if (needs_file)
            opt->required();
        sub->add_option("--depth", depth, "Search bound for coverings (default: dimension + 2)");
        sub->add_flag("--timing", timing, "Add wall-clock seconds to each result");
    };
    auto* verify = app.add_subcommand("verify", "Completeness, regularity and boundedness per structure");
    common(verify, true);
    verify->add_option("--structure", structures, "Comma list of structures (default: all nine)");
    verify->add_option("--axioms", axioms, "Comma list from complete,regular,bounded");

    auto* covering = app.add_subcommand("covering", "Covering recognition and decomposition of maps");
    common(covering, true);
    covering->add_option("--map", targets, "Comma list of maps (default: all)");
    covering->add_option("--side", side, "upper or lower (default: from the map's class)")
        ->check(CLI::IsMember({"upper", "lower"}));

    auto* sheaf = app.add_subcommand("sheaf", "Sheaf condition and square descent for presheaves");
    common(sheaf, true);
    sheaf->add_option("--structure", structures, "Comma list of structures (default: all nine)");
    sheaf->add_option("--presheaf", targets, "Comma list of presheaves (default: all)");
    sheaf->add_option("--max-presheaf-size", max_size,
                      "Also compare both conditions on every presheaf with at most this many sections per object");

    auto* lattice = app.add_subcommand("lattice", "The nine standard structures and their inclusions");
    common(lattice, false);

    auto* density = app.add_subcommand("density", "Density classes and dimension of each space");
    common(density, true);
    density->add_option("--space", targets, "Comma list of spaces (default: all)");

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    cdsite::RunFlags flags;
    flags.depth = depth;
    flags.structures = split_list(structures);
    flags.axioms = split_list(axioms);
    flags.targets = split_list(targets);
    if (!side.empty())
        flags.side = side;
    flags.max_presheaf_size = max_size;
    flags.timing = timing;

    nlohmann::ordered_json out = {{"command", command}, {"version", 1}};
    int code = 0;
    if (files.empty()) {
        try {
            auto report = cdsite::run(command, nullptr, flags);
            out.update(report.body);
            code = report.exit_code;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        }
    } else {
        nlohmann::ordered_json runs = nlohmann::ordered_json::array();
        bool errored = false;
        for (const auto& path : files) {
            nlohmann::ordered_json entry = {{"instance", path}};
            int run_code = 2;
            try {
                const auto inst = cdsite::parse_instance(read_file(path));
                auto report = cdsite::run(command, &inst, flags);
                entry.update(report.body);
                run_code = report.exit_code;
            } catch (const cdsite::ValidationError& e) {
                std::cerr << path << ": invalid instance: " << e.what() << '\n';
                entry["verdict"] = "error";
                entry["error"] = {{"kind", "validation"}, {"invariant", e.invariant()}, {"message", e.what()}};
            } catch (const cdsite::ParseError& e) {
                std::cerr << path << ": " << e.what() << '\n';
                entry["verdict"] = "error";
                entry["error"] = {{"kind", "parse"}, {"message", e.what()}};
            } catch (const std::exception& e) {
                std::cerr << path << ": error: " << e.what() << '\n';
                entry["verdict"] = "error";
                entry["error"] = {{"kind", "runtime"}, {"message", e.what()}};
            }
            errored = errored || entry["verdict"] == "error";
            code = cdsite::combine_exit_codes(code, run_code);
            runs.push_back(entry);
        }
        out["runs"] = runs;
        out["verdict"] = code == 0 ? "pass" : code == 1 ? "fail" : errored ? "error" : "inconclusive";
    }
    std::cout << out.dump(2) << '\n';
    return code;
}
