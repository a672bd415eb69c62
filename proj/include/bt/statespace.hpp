#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bt/error.hpp"
#include "bt/status.hpp"

/// State-space view of behavior trees: a tree is a pair (f, r) of a dynamics
/// map and a return-status map over R^n, executed as a difference equation
/// x_{k+1} = f(x_k). Compositions rewrite (f, r) by case split on the
/// children's regions; the checkers verify robustness, safety and chattering
/// properties on finite sampled domains.
namespace bt::ss {

using Vec = std::vector<double>;
using Dynamics = std::function<Vec(const Vec&)>;
using Predicate = std::function<bool(const Vec&)>;
using ScalarField = std::function<double(const Vec&)>;

struct StateSpaceBT {
    std::string name;
    int dim = 0;
    double dt = 1.0;       ///< seconds per step
    Dynamics f;            ///< total dynamics map
    std::function<Status(const Vec&)> r;  ///< return-status map
};

/// Claimed regions of a system: Success / Failure / Running predicates,
/// an optional region of attraction (subset of Running) and an optional
/// completion-time bound in steps.
struct RegionSpec {
    Predicate success;
    Predicate failure;   ///< may be the constant-false predicate
    Predicate running;
    Predicate attraction;          ///< null means "same as running"
    std::optional<double> tau;     ///< declared bound, in steps

    bool in_attraction(const Vec& x) const { return attraction ? attraction(x) : running(x); }
};

/// Builds a status map from region predicates (first match wins; the
/// predicates are expected to partition the domain).
std::function<Status(const Vec&)> status_from_regions(const RegionSpec& spec);

/// Finite verification surrogate: an explicit set of start states plus the
/// bounds they were drawn from.
struct SampledDomain {
    std::vector<Vec> points;
    Vec lo, hi;

    /// Axis-aligned grid with `counts[i]` evenly spaced values per dimension,
    /// endpoints included.
    static SampledDomain grid(Vec lo, Vec hi, const std::vector<int>& counts);
};

enum class StopReason { Resolved, MaxSteps, OutOfDomain };

struct TrajectoryPoint {
    double t;
    Vec x;
    Status status;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    StopReason reason = StopReason::MaxSteps;

    /// Number of steps taken before the final recorded point.
    int steps() const { return static_cast<int>(points.size()) - 1; }
    Status final_status() const { return points.back().status; }
};

/// Iterates x_{k+1} = f(x_k), recording status each step, until the status
/// resolves or max_steps is reached. When bounds are given, leaving them
/// stops the trajectory with OutOfDomain. Throws NonFiniteState on NaN/inf.
Trajectory execute(const StateSpaceBT& bt, const Vec& x0, int max_steps,
                   const Vec* lo = nullptr, const Vec* hi = nullptr);

/// Sequence composition: delegate to the second system inside the first's
/// success region, else run the first. Requires equal dimension and step.
StateSpaceBT compose_sequence(const StateSpaceBT& bt1, const StateSpaceBT& bt2);

/// Fallback composition: delegate to the second system inside the first's
/// failure region, else run the first.
StateSpaceBT compose_fallback(const StateSpaceBT& bt1, const StateSpaceBT& bt2);

/// Right-fold n-ary forms; the fold equals the flat n-ary composition.
StateSpaceBT compose_sequence_n(const std::vector<StateSpaceBT>& parts);
StateSpaceBT compose_fallback_n(const std::vector<StateSpaceBT>& parts);

/// Parallel composition of systems acting on disjoint coordinate sets.
/// `part1` lists the coordinates owned by bt1; all others belong to bt2.
/// Each child's dynamics must leave the other's coordinates untouched on
/// every sampled point (PartitionViolation otherwise). M=1 is OR-success /
/// AND-failure; M=2 is AND-success / OR-failure.
StateSpaceBT compose_parallel(const StateSpaceBT& bt1, const StateSpaceBT& bt2, int m,
                              const std::vector<int>& part1, const SampledDomain& domain);

/// Pads a lower-dimensional system into `total_dim` coordinates: the system
/// acts on the listed dims, the rest pass through unchanged.
StateSpaceBT lift(const StateSpaceBT& bt, int total_dim, const std::vector<int>& dims);

/// Points of the sampled domain where not exactly one of S/F/R holds.
std::vector<Vec> check_partition(const RegionSpec& spec, const SampledDomain& domain);

struct FtsReport {
    bool is_fts = false;
    int worst_tau = -1;          ///< max observed steps to success, -1 if no start sampled
    int starts_checked = 0;
    std::vector<Vec> witnesses;  ///< starts that left the region, failed, or ran over budget
};

/// Finite-time-success check: from every sampled start in the region of
/// attraction, the trajectory must stay inside it until entering the success
/// region within the declared step bound.
FtsReport check_fts(const StateSpaceBT& bt, const RegionSpec& spec, const SampledDomain& domain);

enum class CompositionKind { Sequence, Fallback, Parallel };

struct LemmaReport {
    bool child1_fts = false;
    bool child2_fts = false;
    bool hypotheses_hold = false;
    bool conclusion_holds = false;
    double tau0 = 0.0;           ///< combined bound in steps
    Predicate attraction0;       ///< the composition's claimed region of attraction
    Predicate success0;          ///< the composition's claimed success region
    std::vector<Vec> hypothesis_witnesses;
    std::vector<Vec> conclusion_witnesses;
    std::vector<std::string> assumptions;
};

/// Checks a composition lemma instance on samples: the set hypotheses first,
/// then (independently) that the composed system really is FTS with the
/// combined bound and the claimed regions. A hypothesis that holds on every
/// sample does not prove the conclusion; the conclusion is always verified
/// by direct execution, so an overclaimed instance is reported honestly.
LemmaReport check_composition_lemma(CompositionKind kind, const StateSpaceBT& bt1,
                                    const RegionSpec& spec1, const StateSpaceBT& bt2,
                                    const RegionSpec& spec2, const SampledDomain& domain,
                                    int parallel_m = 1, const std::vector<int>& part1 = {});

struct SafetyReport {
    bool margin_ok = false;        ///< d-collar of the first system's success region lies in I
    bool trajectories_ok = false;  ///< no sampled start in I reaches the obstacle region
    bool safe = false;
    double max_step = 0.0;         ///< largest sampled ||x - f2(x)||
    std::vector<Vec> margin_witnesses;
    std::vector<Vec> trajectory_witnesses;
    std::vector<std::string> notes;
};

/// Safety of Sequence(bt1, bt2) with respect to obstacle region O and
/// initialization region I: (i) every sampled point within distance d of
/// bt1's success set lies in I, (ii) no sampled trajectory from I enters O.
/// Throws StepLengthViolated if bt2 moves a sampled point by d or more.
SafetyReport check_safety(const StateSpaceBT& bt1, const RegionSpec& spec1,
                          const StateSpaceBT& bt2, const Predicate& obstacle,
                          const Predicate& init_region, double d, const SampledDomain& domain,
                          int max_steps);

struct ChatterReport {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    bool chatter_free = false;
};

/// Directional derivatives of the switching surface s along both systems'
/// one-step displacements, via central differences with step h. The switch
/// is chatter-free when lambda1 < 0 or lambda2 > 0.
ChatterReport chattering_indicator(const Vec& x, const ScalarField& s, const StateSpaceBT& bt1,
                                   const StateSpaceBT& bt2, double h);

}  // namespace bt::ss
