#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bt/error.hpp"
#include "bt/reliability.hpp"

namespace bt::rel {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

[[nodiscard]] std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

[[nodiscard]] const std::string& leaf_key(const BTNode& leaf) {
    return leaf.ref.empty() ? leaf.id : leaf.ref;
}

}  // namespace

std::uint64_t SplitMix64::next() {
    state += kGolden;
    return mix64(state);
}

double SplitMix64::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

std::uint64_t run_stream_seed(std::uint64_t seed, std::uint64_t run_index) {
    return mix64(mix64(seed + kGolden * (run_index + 1)));
}

// ---------------------------------------------------------------------------
// Monte Carlo simulation
// ---------------------------------------------------------------------------

namespace {

struct Resolution {
    bool success = false;
    double time = 0.0;
};

[[nodiscard]] Resolution simulate_leaf(const ActionProfile& p, SplitMix64& rng) {
    Resolution r;
    r.success = rng.uniform01() < p.p_s;
    switch (p.kind) {
        case ProfileKind::Stochastic:
            r.time = r.success ? rng.exponential(*p.mu) : rng.exponential(*p.nu);
            break;
        case ProfileKind::Deterministic:
            r.time = r.success ? *p.tau_s : *p.tau_f;
            break;
        case ProfileKind::HybridFixedSuccess:
            r.time = r.success ? *p.tau_s : rng.exponential(*p.nu);
            break;
        case ProfileKind::HybridFixedFailure:
            r.time = r.success ? rng.exponential(*p.mu) : *p.tau_f;
            break;
        case ProfileKind::Condition:
            r.time = 0.0;  // a check resolves within the tick it runs in
            break;
    }
    return r;
}

Resolution simulate_node(const BTNode& node, const ProfileMap& profiles, SplitMix64& rng) {
    switch (node.kind) {
        case NodeKind::Action:
        case NodeKind::Condition:
            return simulate_leaf(profiles.at(leaf_key(node)), rng);
        case NodeKind::Sequence:
        case NodeKind::SequenceMemory: {
            Resolution r{true, 0.0};
            for (const auto& child : node.children) {
                Resolution c = simulate_node(*child, profiles, rng);
                r.time += c.time;
                if (!c.success) {
                    r.success = false;
                    break;
                }
            }
            return r;
        }
        case NodeKind::Fallback:
        case NodeKind::FallbackMemory: {
            Resolution r{false, 0.0};
            for (const auto& child : node.children) {
                Resolution c = simulate_node(*child, profiles, rng);
                r.time += c.time;
                if (c.success) {
                    r.success = true;
                    break;
                }
            }
            return r;
        }
        case NodeKind::Parallel: {
            // All children run from t = 0; replay their completions in time
            // order and stop at the first threshold crossing.
            const int n = static_cast<int>(node.children.size());
            const int m = node.parallel_m;
            std::vector<Resolution> done;
            done.reserve(node.children.size());
            for (const auto& child : node.children)
                done.push_back(simulate_node(*child, profiles, rng));
            std::vector<int> order(done.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return done[static_cast<std::size_t>(a)].time < done[static_cast<std::size_t>(b)].time;
            });
            int succeeded = 0;
            int failed = 0;
            for (int idx : order) {
                const Resolution& c = done[static_cast<std::size_t>(idx)];
                if (c.success)
                    ++succeeded;
                else
                    ++failed;
                if (succeeded >= m) return {true, c.time};
                if (failed >= n - m + 1) return {false, c.time};
            }
            // Unreachable: one of the thresholds must cross by the last event.
            return {false, done.empty() ? 0.0 : done.back().time};
        }
        case NodeKind::Decorator:
            break;
    }
    throw Error(Errc::InvalidProfile,
                "node '" + node.id + "' (" + to_string(node.kind) + ") cannot be simulated");
}

void check_simulable(const BTNode& node, const ProfileMap& profiles) {
    if (is_leaf(node.kind)) {
        auto it = profiles.find(leaf_key(node));
        if (it == profiles.end())
            throw Error(Errc::InvalidProfile, "leaf '" + leaf_key(node) + "' has no profile");
        validate_profile(it->second, leaf_key(node));
        return;
    }
    if (node.kind == NodeKind::Decorator)
        throw Error(Errc::InvalidProfile, "node '" + node.id + "' (decorator) cannot be simulated");
    if (node.kind == NodeKind::Parallel)
        if (node.parallel_m < 1 || node.parallel_m > static_cast<int>(node.children.size()))
            throw Error(Errc::MalformedTree, "parallel success threshold outside [1, n]");
    if (node.children.empty())
        throw Error(Errc::MalformedTree, "control node '" + node.id + "' has no children");
    for (const auto& child : node.children) check_simulable(*child, profiles);
}

}  // namespace

MonteCarloReport monte_carlo(const BTNode& tree, const ProfileMap& leaf_profiles, long runs,
                             std::uint64_t seed, const std::vector<double>& time_grid) {
    if (runs < 1) throw Error(Errc::OutOfRange, "need at least one simulation run");
    for (std::size_t i = 1; i < time_grid.size(); ++i)
        if (time_grid[i] < time_grid[i - 1])
            throw Error(Errc::OutOfRange, "time grid must be ascending");
    check_simulable(tree, leaf_profiles);

    MonteCarloReport report;
    report.runs = runs;
    report.seed = seed;
    report.rng_algorithm = "splitmix64; uniforms from the top 53 bits; exponentials by inverse CDF";

    long n_success = 0;
    long n_failure = 0;
    double time_success = 0.0;
    double time_failure = 0.0;
    // Histogram of completion times bucketed by the first grid point at or
    // after the completion; prefix sums give the empirical CDFs.
    std::vector<long> success_at(time_grid.size(), 0);
    std::vector<long> failure_at(time_grid.size(), 0);
    for (long run = 0; run < runs; ++run) {
        SplitMix64 rng(run_stream_seed(seed, static_cast<std::uint64_t>(run)));
        const Resolution r = simulate_node(tree, leaf_profiles, rng);
        if (r.success) {
            ++n_success;
            time_success += r.time;
        } else {
            ++n_failure;
            time_failure += r.time;
        }
        if (!time_grid.empty()) {
            const auto it = std::lower_bound(time_grid.begin(), time_grid.end(), r.time);
            if (it != time_grid.end()) {
                const std::size_t bucket = static_cast<std::size_t>(it - time_grid.begin());
                (r.success ? success_at : failure_at)[bucket] += 1;
            }
        }
    }

    const double n = static_cast<double>(runs);
    report.ps_hat = static_cast<double>(n_success) / n;
    report.pf_hat = static_cast<double>(n_failure) / n;
    if (n_success > 0) {
        report.mtts_hat = time_success / static_cast<double>(n_success);
        report.mu_hat = 1.0 / *report.mtts_hat;
    }
    if (n_failure > 0) {
        report.mttf_hat = time_failure / static_cast<double>(n_failure);
        report.nu_hat = 1.0 / *report.mttf_hat;
    }
    long cum_s = 0;
    long cum_f = 0;
    for (std::size_t i = 0; i < time_grid.size(); ++i) {
        cum_s += success_at[i];
        cum_f += failure_at[i];
        TransientSample s;
        s.t = time_grid[i];
        s.p_success = static_cast<double>(cum_s) / n;
        s.p_failure = static_cast<double>(cum_f) / n;
        s.p_running = 1.0 - s.p_success - s.p_failure;
        report.grid.push_back(std::move(s));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Structural estimators
// ---------------------------------------------------------------------------

namespace {

[[nodiscard]] double leaf_value(const BTNode& node, const std::map<std::string, double>& values,
                                const char* what) {
    auto it = values.find(leaf_key(node));
    if (it == values.end())
        throw Error(Errc::InvalidProfile,
                    "leaf '" + leaf_key(node) + "' has no " + std::string(what));
    if (!std::isfinite(it->second) || it->second < 0.0 || it->second > 1.0)
        throw Error(Errc::OutOfRange, "leaf '" + leaf_key(node) + "' " + std::string(what) + " " +
                                          std::to_string(it->second) + " outside [0, 1]");
    return it->second;
}

}  // namespace

double static_success_probability(const BTNode& tree, const std::map<std::string, double>& leaf_p_s) {
    switch (tree.kind) {
        case NodeKind::Action:
        case NodeKind::Condition:
            return leaf_value(tree, leaf_p_s, "success probability");
        case NodeKind::Sequence:
        case NodeKind::SequenceMemory: {
            double p = 1.0;
            for (const auto& child : tree.children) p *= static_success_probability(*child, leaf_p_s);
            return p;
        }
        case NodeKind::Fallback:
        case NodeKind::FallbackMemory: {
            double q = 1.0;
            for (const auto& child : tree.children)
                q *= 1.0 - static_success_probability(*child, leaf_p_s);
            return 1.0 - q;
        }
        case NodeKind::Parallel:
            throw Error(Errc::ParallelUnsupported,
                        "the static success estimate covers sequence/fallback compositions only");
        case NodeKind::Decorator:
            break;
    }
    throw Error(Errc::InvalidProfile, "node '" + tree.id + "' cannot carry a success estimate");
}

double utility_propagate(const BTNode& tree, const std::map<std::string, double>& leaf_utility) {
    if (is_leaf(tree.kind)) return leaf_value(tree, leaf_utility, "utility");
    if (tree.children.empty())
        throw Error(Errc::MalformedTree, "control node '" + tree.id + "' has no children");
    double best = 0.0;
    for (const auto& child : tree.children)
        best = std::max(best, utility_propagate(*child, leaf_utility));
    return best;
}

}  // namespace bt::rel
