#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bt/converters.hpp"
#include "bt/node.hpp"
#include "bt/planner_domains.hpp"
#include "bt/reliability.hpp"
#include "bt/status.hpp"

// Text document format, DOT export, and the command back-ends shared by the
// `bt` command-line tool and the Python bindings. A document bundles one
// behavior tree with the optional sections the analysis commands consume:
// leaf outcome profiles, scripted leaf statuses, a named state-space system,
// a planning domain with its world and perturbation script, and converter
// sources (decision tree, subsumption stack, teleo-reactive program, state
// machine). All operations are deterministic given (document, flags, seed).
namespace bt::text {

/// Format version stamped into every analysis report.
inline constexpr const char* kFormatVersion = "1";

// ---------------------------------------------------------------------------
// Document model
// ---------------------------------------------------------------------------

/// Parsed form of one `.bt` text document. Move-only (it owns trees).
///
/// Resolution invariant: each leaf of `root` may be bound by at most one
/// section (a script entry or a profile entry); parse() rejects double
/// bindings and bindings that name no leaf. Commands that need every leaf
/// bound (run, analyze reliability) check coverage and report the first
/// unbound leaf.
struct BTDocument {
    std::string unit;                      ///< free-form time unit, carried, never interpreted
    std::optional<std::uint64_t> seed;     ///< document default seed
    std::string tree_name = "main";
    NodePtr root;                          ///< may be null (section-only documents)

    bt::rel::ProfileMap profiles;                        ///< leaf ref -> outcome profile
    std::map<std::string, std::vector<Status>> scripts;  ///< leaf ref -> replayed statuses

    std::optional<std::string> system;     ///< named built-in state-space system
    std::optional<int> grid;               ///< section default for grid density

    std::optional<bt::plan::PlanningProblem> problem;    ///< planning domain + init + goal
    std::vector<bt::plan::ScriptedEvent> events;         ///< world perturbations, by tick

    std::optional<bt::conv::DecisionTree> dtree;
    std::optional<bt::conv::SubsumptionStack> stack;
    std::optional<bt::conv::TRProgram> tr;
    std::optional<bt::conv::FSMSpec> fsm;
};

/// Name accepted in the `statespace` section on top of the built-in systems:
/// the battery-powered task robot, analyzed with the safety checker instead
/// of the completion-time checker.
inline constexpr const char* kBatteryRobotSystem = "battery_robot";

// ---------------------------------------------------------------------------
// Parse / serialize / export
// ---------------------------------------------------------------------------

/// Parses document text. Throws Error(SyntaxError) with "line:column:"
/// prefixed messages for malformed input, Error(UnresolvedReference) for
/// names that do not resolve (unknown state-space system, profile or script
/// entries naming no tree leaf, a leaf bound in two sections, a Parallel
/// whose threshold exceeds its child count), and Error(MalformedTree) when
/// the tree breaks structural rules.
[[nodiscard]] BTDocument parse(const std::string& input);

/// Canonical text for a document. parse(serialize(parse(x))) is structurally
/// identical to parse(x): same tree shape, ids, profiles, scripts, and
/// sections. Byte-identical for equal documents.
[[nodiscard]] std::string serialize(const BTDocument& doc);

/// Graphviz DOT text for a tree: one DOT node per tree node, children kept
/// in declaration order, byte-identical across calls. Control nodes carry
/// the conventional glyph labels ("?" fallback, "→" sequence, "⇉"
/// parallel, "*" suffix on the memory variants); leaves are labeled by ref.
[[nodiscard]] std::string export_dot(const BTNode& root);

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct RunOptions {
    long max_ticks = 1000;                 ///< tick budget
    std::optional<std::uint64_t> seed;     ///< sampled-outcome seed; unset = document seed
};

struct RunResult {
    Status status = Status::Running;   ///< root status of the last tick
    long ticks = 0;                    ///< ticks executed
    bool exhausted = false;            ///< budget ran out before resolution
    std::vector<nlohmann::json> trace; ///< one entry per tick: tick, status, leaves
};

/// Ticks the document's tree until the root resolves or the budget runs out.
/// Scripted leaves replay their statuses; profiled leaves draw an outcome
/// and a resolution time from their profile (conditions resolve instantly),
/// seeded so identical (document, seed) give identical traces. Every leaf
/// must be bound by exactly one section.
[[nodiscard]] RunResult run_document(const BTDocument& doc, const RunOptions& options);

/// Exit code for the scriptable command contract: 0 root Success, 1 root
/// Failure, 2 out of budget.
[[nodiscard]] int exit_code(const RunResult& result);

struct AnalyzeOptions {
    std::string what;            ///< "reliability", "statespace", or "" = infer
    int grid = 0;                ///< samples per axis (statespace) / time samples (reliability)
    double horizon = 0.0;        ///< reliability: last grid time; 0 = no time grid
    long runs = 0;                         ///< reliability: Monte Carlo cross-check runs; 0 = skip
    std::optional<std::uint64_t> seed;     ///< Monte Carlo seed; unset = document seed
};

/// Dispatches to the reliability or state-space analysis and returns the
/// JSON report (schema in schemas/report.schema.json). Throws
/// Error(MissingSection) when the document lacks the section the analysis
/// needs or the mode cannot be inferred.
[[nodiscard]] nlohmann::json analyze_document(const BTDocument& doc, const AnalyzeOptions& options);

/// Runs the reactive planner on the document's domain section (with its
/// perturbation script) and returns the JSON report. Throws
/// Error(MissingSection) without a domain section.
[[nodiscard]] nlohmann::json plan_document(const BTDocument& doc, long max_iterations);

/// Converts the named source section ("decision_tree", "subsumption",
/// "teleo_reactive", "fsm", or "" to infer the unique one present) into a
/// behavior tree and returns the JSON report carrying the converted document
/// text and its DOT rendering.
[[nodiscard]] nlohmann::json convert_document(const BTDocument& doc, const std::string& from);

/// Exit code for a planner outcome: 0 Success, 1 CannotExpand, 2 budget.
[[nodiscard]] int exit_code(const bt::plan::PlanOutcome outcome);

}  // namespace bt::text
