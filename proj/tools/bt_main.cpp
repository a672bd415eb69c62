// Command-line front end: parse a behavior-tree document and run, analyze,
// plan, convert, or export it.
//
// Exit codes: 0 = positive verdict (run reached Success, plan reached the
// goal, analysis/convert/export completed), 1 = negative verdict (run ended
// in Failure, plan cannot expand further), 2 = no verdict (tick or iteration
// budget exhausted, bad input, or any other error).
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "bt/error.hpp"
#include "bt/text.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw bt::Error(bt::Errc::MissingSection, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Seed precedence: --seed flag, then the BT_SEED environment variable, then
/// the document's own seed, then 0.
std::optional<std::uint64_t> env_seed() {
    const char* env = std::getenv("BT_SEED");
    if (!env || !*env) return std::nullopt;
    char* end = nullptr;
    std::uint64_t v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
        throw bt::Error(bt::Errc::SyntaxError, "BT_SEED must be a non-negative integer");
    return v;
}

std::optional<std::uint64_t> resolve_seed(bool flag_set, std::uint64_t flag_value) {
    if (flag_set) return flag_value;
    return env_seed();  // nullopt falls through to the document seed
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Behavior-tree document toolkit.\n"
        "Exit codes: 0 = success verdict, 1 = failure verdict (run failed, plan\n"
        "cannot expand), 2 = no verdict (budget exhausted or error)."};
    app.require_subcommand(1);

    std::string file;
    long ticks = 1000;
    std::uint64_t seed = 0;
    std::string what;
    int grid = 0;
    double horizon = 0.0;
    long runs = 0;
    long max_iter = 100;
    std::string from;

    CLI::App* run = app.add_subcommand("run", "Tick the tree until it resolves; print a JSON trace line per tick");
    run->add_option("file", file, "Document to run")->required();
    run->add_option("--ticks", ticks, "Tick budget (default 1000)");
    CLI::Option* run_seed = run->add_option("--seed", seed, "RNG seed for profiled leaves");

    CLI::App* analyze = app.add_subcommand("analyze", "Analyze the document; print a JSON report");
    analyze->add_option("file", file, "Document to analyze")->required();
    analyze->add_option("what", what, "Analysis to run: reliability or statespace (default: inferred)");
    analyze->add_option("--grid", grid, "Time-grid sample count, or per-dimension grid density");
    analyze->add_option("--horizon", horizon, "Time horizon for transient probabilities");
    analyze->add_option("--runs", runs, "Monte Carlo run count (0 = skip)");
    CLI::Option* analyze_seed = analyze->add_option("--seed", seed, "Monte Carlo seed");

    CLI::App* plan = app.add_subcommand("plan", "Plan toward the goal in the domain section; print a JSON report");
    plan->add_option("file", file, "Document to plan from")->required();
    plan->add_option("--max-iter", max_iter, "Iteration budget (default 100)");

    CLI::App* convert = app.add_subcommand("convert", "Convert a controller section to a behavior tree");
    convert->add_option("file", file, "Document to convert")->required();
    convert->add_option("--from", from, "Source section: decision_tree, subsumption, teleo_reactive, or fsm");

    CLI::App* export_dot = app.add_subcommand("export-dot", "Print the tree in DOT format");
    export_dot->add_option("file", file, "Document to export")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        bt::text::BTDocument doc = bt::text::parse(read_file(file));

        if (run->parsed()) {
            bt::text::RunOptions options;
            options.max_ticks = ticks;
            options.seed = resolve_seed(run_seed->count() > 0, seed);
            bt::text::RunResult result = bt::text::run_document(doc, options);
            for (const auto& line : result.trace) std::cout << line.dump() << "\n";
            return bt::text::exit_code(result);
        }
        if (analyze->parsed()) {
            bt::text::AnalyzeOptions options;
            options.what = what;
            options.grid = grid;
            options.horizon = horizon;
            options.runs = runs;
            options.seed = resolve_seed(analyze_seed->count() > 0, seed);
            std::cout << bt::text::analyze_document(doc, options).dump(2) << "\n";
            return 0;
        }
        if (plan->parsed()) {
            nlohmann::json report = bt::text::plan_document(doc, max_iter);
            std::cout << report.dump(2) << "\n";
            const std::string outcome = report["outcome"].get<std::string>();
            if (outcome == "Success") return 0;
            if (outcome == "CannotExpand") return 1;
            return 2;
        }
        if (convert->parsed()) {
            std::cout << bt::text::convert_document(doc, from).dump(2) << "\n";
            return 0;
        }
        if (export_dot->parsed()) {
            if (!doc.root)
                throw bt::Error(bt::Errc::MissingSection, "the document has no tree to export");
            std::cout << bt::text::export_dot(*doc.root);
            return 0;
        }
    } catch (const bt::Error& e) {
        std::cerr << file << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
