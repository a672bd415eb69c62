#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bt/node.hpp"

// Stochastic analysis of behavior trees whose leaves carry probabilistic
// outcome profiles. A control node's execution is tracked by the vector of its
// children's latched outcomes (-1 failed, 0 pending, +1 succeeded); the
// reachable outcome vectors form an acyclic graph whose absorbing states are
// the node's own Success/Failure. From that graph the module derives a
// discrete-time Markov chain, a continuous-time generator, mean times to
// succeed/fail, success/failure probabilities over time, an exact
// piecewise-constant variant for fixed-duration leaves, a Monte Carlo
// cross-check, and two quick structural estimators.
namespace bt::rel {

// ---------------------------------------------------------------------------
// Leaf profiles
// ---------------------------------------------------------------------------

enum class ProfileKind {
    Stochastic,        // exponential time to succeed (rate mu) and to fail (rate nu)
    Deterministic,     // fixed times tau_s / tau_f
    HybridFixedSuccess,  // fixed success time tau_s, exponential failure (rate nu)
    HybridFixedFailure,  // exponential success (rate mu), fixed failure time tau_f
    Condition,         // constant-truth check: resolves (near-)instantly
};

[[nodiscard]] const char* to_string(ProfileKind k);

/// Sojourn assigned to Condition leaves: effectively instantaneous, but kept
/// strictly positive so every transition carries a well-defined rate.
inline constexpr double kConditionSojourn = 1e-9;

/// Per-leaf stochastic description. Invariants: p_s + p_f = 1; for every
/// outcome with positive probability the matching rate or time is set, finite
/// and strictly positive. Parameters attached to a zero-probability outcome
/// are ignored (stored unset).
struct ActionProfile {
    ProfileKind kind = ProfileKind::Stochastic;
    double p_s = 1.0;
    double p_f = 0.0;
    std::optional<double> mu;     // success rate (1/time)
    std::optional<double> nu;     // failure rate (1/time)
    std::optional<double> tau_s;  // fixed success time
    std::optional<double> tau_f;  // fixed failure time

    [[nodiscard]] static ActionProfile stochastic(double p_s, double mu, double nu);
    [[nodiscard]] static ActionProfile deterministic(double p_s, double tau_s, double tau_f);
    [[nodiscard]] static ActionProfile hybrid_fixed_success(double p_s, double tau_s, double nu);
    [[nodiscard]] static ActionProfile hybrid_fixed_failure(double p_s, double mu, double tau_f);
    [[nodiscard]] static ActionProfile condition(double p_s);

    /// Mean time to resolve conditional on the outcome. Only meaningful when
    /// the corresponding probability is positive.
    [[nodiscard]] double success_time() const;
    [[nodiscard]] double failure_time() const;
    /// Unconditional mean resolution time p_s*success_time + p_f*failure_time.
    [[nodiscard]] double mean_time() const;
    /// 1 / mean_time(): the rate at which the leaf leaves its running state.
    [[nodiscard]] double resolution_rate() const;
};

/// Throws Error(InvalidProfile) if the profile breaks its invariants.
void validate_profile(const ActionProfile& profile, const std::string& who = "");

/// Profiles keyed by the leaf's behavior reference (a leaf's `ref`, falling
/// back to its `id` when the ref is empty).
using ProfileMap = std::map<std::string, ActionProfile>;

// ---------------------------------------------------------------------------
// Outcome-vector graph of a single control node
// ---------------------------------------------------------------------------

/// Latched child outcomes: -1 failed, 0 pending, +1 succeeded.
using Marking = std::vector<int>;

enum class MarkingClass { Transient, FailureAbsorbing, SuccessAbsorbing };

struct MarkingEdge {
    int from = 0;      // state indices in canonical order
    int to = 0;
    int child = 0;     // which child resolved
    int outcome = 0;   // +1 success, -1 failure
};

/// All outcome vectors reachable from the all-pending start, with transitions
/// labeled by the resolving child. States are stored in canonical order:
/// transient states first (breadth-first discovery order, start state at index
/// 0), then failure-absorbing, then success-absorbing states. The graph is
/// acyclic: every transition latches one more child outcome.
struct MarkingGraph {
    NodeKind node_kind = NodeKind::Fallback;  // Sequence | Fallback | Parallel
    int n_children = 0;
    int parallel_m = 0;  // success threshold, Parallel only
    std::vector<Marking> markings;
    std::vector<MarkingClass> classes;
    std::vector<MarkingEdge> edges;
    int n_transient = 0;
    int n_failure = 0;
    int n_success = 0;

    [[nodiscard]] int size() const { return static_cast<int>(markings.size()); }
    [[nodiscard]] bool is_transient(int i) const {
        return classes[static_cast<std::size_t>(i)] == MarkingClass::Transient;
    }
    [[nodiscard]] int index_of(const Marking& m) const;  // -1 if absent
};

/// Build the outcome graph for one control node. A Sequence succeeds at the
/// all-ones vector and fails as soon as any child fails; a Fallback is the
/// dual; Parallel(m) succeeds once >= m children have succeeded and fails once
/// more than n_children - m have failed. Requires n_children >= 1 and, for
/// Parallel, 1 <= m <= n_children.
[[nodiscard]] MarkingGraph build_marking_graph(NodeKind kind, int n_children, int parallel_m = 0);

// ---------------------------------------------------------------------------
// Markov model of the node
// ---------------------------------------------------------------------------

/// Matrices live on the canonical state order of the graph. P is
/// row-stochastic (P[i][j] = probability that the next resolution moves the
/// node from state i to state j; absorbing rows are identity). SJ holds the
/// expected waiting time in each transient state. Q is the continuous-time
/// generator (rows sum to zero; absorbing rows are zero). edge_time[i][j] is
/// the expected time attributed to the i->j transition: the resolving child's
/// outcome-conditional mean when it runs alone, the state's combined waiting
/// time when several children race.
struct MarkovModel {
    MarkingGraph graph;
    std::vector<std::vector<double>> P;
    std::vector<double> SJ;  // size n_transient
    std::vector<std::vector<double>> Q;
    std::vector<std::vector<double>> edge_time;
    std::vector<std::string> notes;
};

/// One-step transition matrix. When several children race (Parallel), child h
/// resolves first with probability proportional to its resolution rate, then
/// its outcome is decided by its own p_s/p_f; with a single running child this
/// reduces to plain p_s/p_f (Sequence and Fallback always hit this case).
[[nodiscard]] std::vector<std::vector<double>> build_dtmc(const MarkingGraph& graph,
                                                          const std::vector<ActionProfile>& child_profiles);

/// Expected waiting time per transient state: the inverse of the summed
/// resolution rates of the children that can resolve there.
/// Throws Error(NoFeasibleEvent) if a transient state has no outgoing edge.
[[nodiscard]] std::vector<double> sojourn_times(const MarkingGraph& graph,
                                                const std::vector<ActionProfile>& child_profiles);

/// Continuous-time generator from the jump chain and the waiting times:
/// Q[i][j] = P[i][j] / SJ[i] off the diagonal, diagonal completes rows to 0,
/// absorbing rows all zero.
[[nodiscard]] std::vector<std::vector<double>> build_generator(const std::vector<std::vector<double>>& P,
                                                               const std::vector<double>& SJ,
                                                               int n_transient);

/// Assemble P, SJ, Q and edge times for one node over its children.
[[nodiscard]] MarkovModel build_markov_model(const MarkingGraph& graph,
                                             const std::vector<ActionProfile>& child_profiles);

// ---------------------------------------------------------------------------
// Absorption analysis
// ---------------------------------------------------------------------------

/// Probabilities of ending in Success/Failure and mean times conditioned on
/// the outcome. A mean time is unset when its outcome has zero probability.
struct AbsorptionAnalysis {
    double p_success = 0.0;
    double p_failure = 0.0;
    std::optional<double> mtts;
    std::optional<double> mttf;
};

/// First-step analysis over the acyclic state graph: walk transient states in
/// reverse topological order accumulating outcome probability and
/// probability-weighted time (edge times as in MarkovModel::edge_time).
[[nodiscard]] AbsorptionAnalysis absorption_analysis(const MarkovModel& model);

/// Same quantities via exponential time accumulation: path products of
/// exp(edge time) summed to each absorbing state, logged, and weighted by the
/// absorption probabilities. Exact when each absorbing state is reached by a
/// single path (always true for Sequence and Fallback). Kept as a bounded
/// cross-check; the first-step route is the production path.
[[nodiscard]] AbsorptionAnalysis absorption_analysis_exp_log(const MarkovModel& model);

// ---------------------------------------------------------------------------
// Probabilities over time
// ---------------------------------------------------------------------------

struct TransientSample {
    double t = 0.0;
    std::vector<double> pi;  // per-state occupation probability (canonical order)
    double p_success = 0.0;  // mass absorbed in success states
    double p_failure = 0.0;  // mass absorbed in failure states
    double p_running = 0.0;  // remaining transient mass
};

/// Integrate d(pi)/dt = Q^T pi from pi(0) = start (default: all mass in the
/// start state) and sample on the given ascending time grid. Uses
/// uniformization with per-step truncation error <= 1e-10; transient states
/// with waiting time below 1e-6 (instantaneous condition checks) are spliced
/// out beforehand so the integration is never stiff; their pi entries read 0.
/// Throws Error(IntegrationDiverged) if probability conservation breaks 1e-9.
[[nodiscard]] std::vector<TransientSample> transient_probabilities(const MarkovModel& model,
                                                                   const std::vector<double>& time_grid,
                                                                   const std::vector<double>& start = {});

/// Exact occupation probabilities when every child resolves in fixed time:
/// mass moves in discrete jumps at cumulative resolution times. Returns one
/// sample at t = 0, one after every distinct jump time <= horizon, and one at
/// the horizon; the trajectory is piecewise constant in between. All child
/// times must share a common step at rational precision 1e-6 (else
/// Error(NoCommonStep)); all profiles must be Deterministic (else
/// Error(InvalidProfile)).
[[nodiscard]] std::vector<TransientSample> deterministic_transient(const MarkingGraph& graph,
                                                                   const std::vector<ActionProfile>& child_profiles,
                                                                   double horizon);

// ---------------------------------------------------------------------------
// Whole-tree analysis
// ---------------------------------------------------------------------------

/// Result of analyzing one node: the equivalent profile handed to its parent
/// (success probability, rates = inverse mean times) plus the node's own
/// absorption numbers.
struct NodeAnalysis {
    ActionProfile profile;
    AbsorptionAnalysis absorption;
};

struct ComposedAnalysis {
    std::map<std::string, NodeAnalysis> per_node;  // keyed by node id
    NodeAnalysis root;
    std::vector<std::string> notes;
};

/// Bottom-up analysis: every internal node (Sequence/Fallback/Parallel and
/// their memory variants, which latch outcomes exactly like the model does)
/// is replaced by an equivalent stochastic profile computed from its
/// children's. Mean times propagate exactly for every leaf kind because only
/// conditional means enter the arithmetic. Decorators are not analyzable
/// (Error(InvalidProfile)); every leaf must be profiled.
[[nodiscard]] ComposedAnalysis compose_profiles(const BTNode& tree, const ProfileMap& leaf_profiles);

/// Full report for the tree root: absorption numbers, equivalent rates, and
/// success/failure probabilities sampled on the time grid (grid may be empty).
struct ReliabilityReport {
    double ps_inf = 0.0;
    double pf_inf = 0.0;
    std::optional<double> mtts;
    std::optional<double> mttf;
    std::optional<double> mu;  // 1/mtts
    std::optional<double> nu;  // 1/mttf
    std::vector<TransientSample> grid;
    std::vector<std::string> notes;
};

[[nodiscard]] ReliabilityReport analyze(const BTNode& tree, const ProfileMap& leaf_profiles,
                                        const std::vector<double>& time_grid = {});

// ---------------------------------------------------------------------------
// Monte Carlo cross-check
// ---------------------------------------------------------------------------

/// Deterministic seedable generator (64-bit splitmix). Uniform doubles use the
/// top 53 bits; exponentials by inverse CDF. The exact algorithm is echoed in
/// MonteCarloReport::rng_algorithm so reported numbers are reproducible.
struct SplitMix64 {
    std::uint64_t state = 0;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next();
    double uniform01();               // in [0, 1)
    double exponential(double rate);  // mean 1/rate
};

/// Stream seed for one run: independent of how runs are sharded over workers.
[[nodiscard]] std::uint64_t run_stream_seed(std::uint64_t seed, std::uint64_t run_index);

struct MonteCarloReport {
    long runs = 0;
    std::uint64_t seed = 0;
    double ps_hat = 0.0;
    double pf_hat = 0.0;
    std::optional<double> mtts_hat;  // mean completion time of successful runs
    std::optional<double> mttf_hat;
    std::optional<double> mu_hat;    // 1/mtts_hat
    std::optional<double> nu_hat;
    std::vector<TransientSample> grid;  // empirical CDFs at grid times (pi left empty)
    std::string rng_algorithm;
};

/// Simulate the tree `runs` times with true concurrent semantics: every leaf
/// draws its outcome then its outcome-conditional time; Sequence/Fallback sum
/// times along the visited prefix; Parallel replays its children's completion
/// times in order and resolves at the threshold-crossing arrival. Identical
/// (seed, runs) give a bitwise-identical report.
[[nodiscard]] MonteCarloReport monte_carlo(const BTNode& tree, const ProfileMap& leaf_profiles,
                                           long runs, std::uint64_t seed,
                                           const std::vector<double>& time_grid = {});

// ---------------------------------------------------------------------------
// Structural estimators
// ---------------------------------------------------------------------------

/// Success-probability estimate ignoring time: product over Sequence children,
/// complement-product over Fallback children (memory variants included).
/// Parallel nodes are outside this estimator (Error(ParallelUnsupported));
/// leaves must map into [0, 1] (Error(OutOfRange)).
[[nodiscard]] double static_success_probability(const BTNode& tree,
                                                const std::map<std::string, double>& leaf_p_s);

/// Utility estimate: max over children at every control node; leaf utilities
/// must lie in [0, 1] (Error(OutOfRange)).
[[nodiscard]] double utility_propagate(const BTNode& tree,
                                       const std::map<std::string, double>& leaf_utility);

}  // namespace bt::rel
