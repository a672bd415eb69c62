#include "bt/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "bt/error.hpp"

namespace bt::rel {

namespace {

constexpr double kVanishingSojourn = 1e-6;   // states faster than this are spliced out
constexpr double kUniformizationTail = 1e-13;
constexpr double kConservationTol = 1e-9;
constexpr double kRationalScale = 1e6;       // fixed-time lattice: 1e-6 time units

using Matrix = std::vector<std::vector<double>>;

[[nodiscard]] Matrix zeros(std::size_t r, std::size_t c) {
    return Matrix(r, std::vector<double>(c, 0.0));
}

[[nodiscard]] Matrix identity(std::size_t n) {
    Matrix m = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    return m;
}

[[nodiscard]] Matrix mat_mul(const Matrix& a, const Matrix& b) {
    const std::size_t r = a.size();
    const std::size_t inner = b.size();
    const std::size_t c = inner == 0 ? 0 : b[0].size();
    Matrix out = zeros(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = a[i][k];
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < c; ++j) out[i][j] += aik * b[k][j];
        }
    return out;
}

[[nodiscard]] std::string describe(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

void require(bool ok, Errc code, const std::string& message) {
    if (!ok) throw Error(code, message);
}

[[nodiscard]] bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

const char* to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::Stochastic: return "stochastic";
        case ProfileKind::Deterministic: return "deterministic";
        case ProfileKind::HybridFixedSuccess: return "hybrid-fixed-success";
        case ProfileKind::HybridFixedFailure: return "hybrid-fixed-failure";
        case ProfileKind::Condition: return "condition";
    }
    return "?";
}

void validate_profile(const ActionProfile& p, const std::string& who) {
    const std::string tag = who.empty() ? std::string("profile") : "profile '" + who + "'";
    require(std::isfinite(p.p_s) && p.p_s >= 0.0 && p.p_s <= 1.0, Errc::InvalidProfile,
            tag + ": success probability " + describe(p.p_s) + " outside [0, 1]");
    require(std::isfinite(p.p_f) && p.p_f >= 0.0 && p.p_f <= 1.0, Errc::InvalidProfile,
            tag + ": failure probability " + describe(p.p_f) + " outside [0, 1]");
    require(std::abs(p.p_s + p.p_f - 1.0) <= 1e-9, Errc::InvalidProfile,
            tag + ": outcome probabilities must sum to 1");
    for (const auto* opt : {&p.mu, &p.nu, &p.tau_s, &p.tau_f})
        if (opt->has_value())
            require(finite_positive(**opt), Errc::InvalidProfile,
                    tag + ": rates and times must be finite and strictly positive");
    auto need = [&](const std::optional<double>& v, const char* name) {
        require(v.has_value(), Errc::InvalidProfile,
                tag + ": missing " + std::string(name) + " for a positive-probability outcome");
    };
    switch (p.kind) {
        case ProfileKind::Stochastic:
            if (p.p_s > 0.0) need(p.mu, "success rate");
            if (p.p_f > 0.0) need(p.nu, "failure rate");
            break;
        case ProfileKind::Deterministic:
            if (p.p_s > 0.0) need(p.tau_s, "success time");
            if (p.p_f > 0.0) need(p.tau_f, "failure time");
            break;
        case ProfileKind::HybridFixedSuccess:
            if (p.p_s > 0.0) need(p.tau_s, "success time");
            if (p.p_f > 0.0) need(p.nu, "failure rate");
            break;
        case ProfileKind::HybridFixedFailure:
            if (p.p_s > 0.0) need(p.mu, "success rate");
            if (p.p_f > 0.0) need(p.tau_f, "failure time");
            break;
        case ProfileKind::Condition:
            break;
    }
}

namespace {

[[nodiscard]] ActionProfile finish(ActionProfile p) {
    validate_profile(p);
    return p;
}

[[nodiscard]] std::optional<double> param_if(double prob, double value) {
    if (prob > 0.0) return value;
    return std::nullopt;  // parameters of impossible outcomes are ignored
}

}  // namespace

ActionProfile ActionProfile::stochastic(double p_s, double mu, double nu) {
    ActionProfile p;
    p.kind = ProfileKind::Stochastic;
    p.p_s = p_s;
    p.p_f = 1.0 - p_s;
    p.mu = param_if(p.p_s, mu);
    p.nu = param_if(p.p_f, nu);
    return finish(p);
}

ActionProfile ActionProfile::deterministic(double p_s, double tau_s, double tau_f) {
    ActionProfile p;
    p.kind = ProfileKind::Deterministic;
    p.p_s = p_s;
    p.p_f = 1.0 - p_s;
    p.tau_s = param_if(p.p_s, tau_s);
    p.tau_f = param_if(p.p_f, tau_f);
    return finish(p);
}

ActionProfile ActionProfile::hybrid_fixed_success(double p_s, double tau_s, double nu) {
    ActionProfile p;
    p.kind = ProfileKind::HybridFixedSuccess;
    p.p_s = p_s;
    p.p_f = 1.0 - p_s;
    p.tau_s = param_if(p.p_s, tau_s);
    p.nu = param_if(p.p_f, nu);
    return finish(p);
}

ActionProfile ActionProfile::hybrid_fixed_failure(double p_s, double mu, double tau_f) {
    ActionProfile p;
    p.kind = ProfileKind::HybridFixedFailure;
    p.p_s = p_s;
    p.p_f = 1.0 - p_s;
    p.mu = param_if(p.p_s, mu);
    p.tau_f = param_if(p.p_f, tau_f);
    return finish(p);
}

ActionProfile ActionProfile::condition(double p_s) {
    ActionProfile p;
    p.kind = ProfileKind::Condition;
    p.p_s = p_s;
    p.p_f = 1.0 - p_s;
    return finish(p);
}

double ActionProfile::success_time() const {
    switch (kind) {
        case ProfileKind::Stochastic:
        case ProfileKind::HybridFixedFailure:
            require(mu.has_value(), Errc::InvalidProfile, "success time queried without a rate");
            return 1.0 / *mu;
        case ProfileKind::Deterministic:
        case ProfileKind::HybridFixedSuccess:
            require(tau_s.has_value(), Errc::InvalidProfile, "success time queried without a time");
            return *tau_s;
        case ProfileKind::Condition:
            return kConditionSojourn;
    }
    return 0.0;
}

double ActionProfile::failure_time() const {
    switch (kind) {
        case ProfileKind::Stochastic:
        case ProfileKind::HybridFixedSuccess:
            require(nu.has_value(), Errc::InvalidProfile, "failure time queried without a rate");
            return 1.0 / *nu;
        case ProfileKind::Deterministic:
        case ProfileKind::HybridFixedFailure:
            require(tau_f.has_value(), Errc::InvalidProfile, "failure time queried without a time");
            return *tau_f;
        case ProfileKind::Condition:
            return kConditionSojourn;
    }
    return 0.0;
}

double ActionProfile::mean_time() const {
    double t = 0.0;
    if (p_s > 0.0) t += p_s * success_time();
    if (p_f > 0.0) t += p_f * failure_time();
    return t;
}

double ActionProfile::resolution_rate() const { return 1.0 / mean_time(); }

// ---------------------------------------------------------------------------
// Outcome-vector graph
// ---------------------------------------------------------------------------

namespace {

[[nodiscard]] MarkingClass classify(NodeKind kind, int n, int m, const Marking& marking) {
    int succeeded = 0;
    int failed = 0;
    for (int v : marking) {
        if (v > 0) ++succeeded;
        if (v < 0) ++failed;
    }
    switch (kind) {
        case NodeKind::Sequence:
            if (failed > 0) return MarkingClass::FailureAbsorbing;
            if (succeeded == n) return MarkingClass::SuccessAbsorbing;
            return MarkingClass::Transient;
        case NodeKind::Fallback:
            if (succeeded > 0) return MarkingClass::SuccessAbsorbing;
            if (failed == n) return MarkingClass::FailureAbsorbing;
            return MarkingClass::Transient;
        case NodeKind::Parallel:
            if (succeeded >= m) return MarkingClass::SuccessAbsorbing;
            if (failed >= n - m + 1) return MarkingClass::FailureAbsorbing;
            return MarkingClass::Transient;
        default:
            throw Error(Errc::MalformedTree, "outcome graphs exist for sequence/fallback/parallel");
    }
}

/// Children that can resolve from a transient outcome vector.
[[nodiscard]] std::vector<int> feasible_children(NodeKind kind, const Marking& marking) {
    std::vector<int> out;
    switch (kind) {
        case NodeKind::Sequence:
        case NodeKind::Fallback:
            // The running child is the first unresolved one; everything before
            // it has the node-specific pass-through outcome.
            for (std::size_t h = 0; h < marking.size(); ++h)
                if (marking[h] == 0) {
                    out.push_back(static_cast<int>(h));
                    break;
                }
            break;
        case NodeKind::Parallel:
            for (std::size_t h = 0; h < marking.size(); ++h)
                if (marking[h] == 0) out.push_back(static_cast<int>(h));
            break;
        default:
            break;
    }
    return out;
}

}  // namespace

int MarkingGraph::index_of(const Marking& m) const {
    for (std::size_t i = 0; i < markings.size(); ++i)
        if (markings[i] == m) return static_cast<int>(i);
    return -1;
}

MarkingGraph build_marking_graph(NodeKind kind, int n_children, int parallel_m) {
    require(n_children >= 1, Errc::MalformedTree, "analysis node needs at least one child");
    if (kind == NodeKind::Parallel)
        require(parallel_m >= 1 && parallel_m <= n_children, Errc::MalformedTree,
                "parallel success threshold outside [1, n]");
    else
        require(kind == NodeKind::Sequence || kind == NodeKind::Fallback, Errc::MalformedTree,
                "outcome graphs exist for sequence/fallback/parallel");

    struct Discovered {
        Marking marking;
        MarkingClass cls;
    };
    std::vector<Discovered> found;
    std::map<Marking, int> index;
    struct RawEdge {
        int from, to, child, outcome;
    };
    std::vector<RawEdge> raw;

    auto discover = [&](const Marking& m) {
        auto it = index.find(m);
        if (it != index.end()) return it->second;
        const int id = static_cast<int>(found.size());
        index.emplace(m, id);
        found.push_back({m, classify(kind, n_children, parallel_m, m)});
        return id;
    };

    std::deque<int> queue;
    queue.push_back(discover(Marking(static_cast<std::size_t>(n_children), 0)));
    std::set<int> expanded;
    while (!queue.empty()) {
        const int i = queue.front();
        queue.pop_front();
        if (!expanded.insert(i).second) continue;
        if (found[static_cast<std::size_t>(i)].cls != MarkingClass::Transient) continue;
        const Marking m = found[static_cast<std::size_t>(i)].marking;
        for (int h : feasible_children(kind, m)) {
            for (int outcome : {1, -1}) {
                Marking next = m;
                next[static_cast<std::size_t>(h)] = outcome;
                const int j = discover(next);
                if (found[static_cast<std::size_t>(j)].cls == MarkingClass::Transient)
                    queue.push_back(j);
                raw.push_back({i, j, h, outcome});
            }
        }
    }

    // Canonical order: transient states first (discovery order keeps the
    // start state at index 0 and is topological on the acyclic graph), then
    // failure states, then success states.
    std::vector<int> order;
    for (MarkingClass target : {MarkingClass::Transient, MarkingClass::FailureAbsorbing,
                                MarkingClass::SuccessAbsorbing})
        for (std::size_t i = 0; i < found.size(); ++i)
            if (found[i].cls == target) order.push_back(static_cast<int>(i));
    std::vector<int> to_canonical(found.size(), -1);
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        to_canonical[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos);

    MarkingGraph g;
    g.node_kind = kind;
    g.n_children = n_children;
    g.parallel_m = kind == NodeKind::Parallel ? parallel_m : 0;
    for (int old : order) {
        g.markings.push_back(found[static_cast<std::size_t>(old)].marking);
        g.classes.push_back(found[static_cast<std::size_t>(old)].cls);
        switch (found[static_cast<std::size_t>(old)].cls) {
            case MarkingClass::Transient: ++g.n_transient; break;
            case MarkingClass::FailureAbsorbing: ++g.n_failure; break;
            case MarkingClass::SuccessAbsorbing: ++g.n_success; break;
        }
    }
    for (const RawEdge& e : raw)
        g.edges.push_back({to_canonical[static_cast<std::size_t>(e.from)],
                           to_canonical[static_cast<std::size_t>(e.to)], e.child, e.outcome});
    return g;
}

// ---------------------------------------------------------------------------
// Markov model
// ---------------------------------------------------------------------------

namespace {

void check_children(const MarkingGraph& g, const std::vector<ActionProfile>& profiles) {
    require(static_cast<int>(profiles.size()) == g.n_children, Errc::InvalidProfile,
            "expected one profile per child");
    for (std::size_t i = 0; i < profiles.size(); ++i)
        validate_profile(profiles[i], "child " + std::to_string(i));
}

/// Outgoing edges grouped by source state.
[[nodiscard]] std::vector<std::vector<const MarkingEdge*>> adjacency(const MarkingGraph& g) {
    std::vector<std::vector<const MarkingEdge*>> out(static_cast<std::size_t>(g.size()));
    for (const MarkingEdge& e : g.edges) out[static_cast<std::size_t>(e.from)].push_back(&e);
    return out;
}

[[nodiscard]] std::vector<int> running_children(const std::vector<const MarkingEdge*>& edges) {
    std::vector<int> out;
    for (const auto* e : edges)
        if (std::find(out.begin(), out.end(), e->child) == out.end()) out.push_back(e->child);
    return out;
}

}  // namespace

std::vector<std::vector<double>> build_dtmc(const MarkingGraph& g,
                                            const std::vector<ActionProfile>& profiles) {
    check_children(g, profiles);
    const auto adj = adjacency(g);
    const std::size_t K = static_cast<std::size_t>(g.size());
    Matrix P = zeros(K, K);
    for (int i = 0; i < g.size(); ++i) {
        if (!g.is_transient(i)) {
            P[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
            continue;
        }
        const auto& edges = adj[static_cast<std::size_t>(i)];
        const std::vector<int> running = running_children(edges);
        double total_rate = 0.0;
        if (running.size() > 1)
            for (int h : running) total_rate += profiles[static_cast<std::size_t>(h)].resolution_rate();
        double off = 0.0;
        for (const auto* e : edges) {
            const ActionProfile& p = profiles[static_cast<std::size_t>(e->child)];
            const double outcome_p = e->outcome > 0 ? p.p_s : p.p_f;
            double prob = outcome_p;
            if (running.size() > 1) prob = outcome_p * p.resolution_rate() / total_rate;
            P[static_cast<std::size_t>(i)][static_cast<std::size_t>(e->to)] += prob;
            off += prob;
        }
        // A jump always latches one more child, so the diagonal is a
        // structural zero; normalizing by the (mathematically unit) row sum
        // removes accumulated rounding.
        for (const auto* e : edges)
            P[static_cast<std::size_t>(i)][static_cast<std::size_t>(e->to)] /= off;
    }
    return P;
}

std::vector<double> sojourn_times(const MarkingGraph& g, const std::vector<ActionProfile>& profiles) {
    check_children(g, profiles);
    const auto adj = adjacency(g);
    std::vector<double> sj(static_cast<std::size_t>(g.n_transient), 0.0);
    for (int i = 0; i < g.n_transient; ++i) {
        const std::vector<int> running = running_children(adj[static_cast<std::size_t>(i)]);
        require(!running.empty(), Errc::NoFeasibleEvent,
                "transient state " + std::to_string(i) + " has no resolving child");
        double rate = 0.0;
        for (int h : running) rate += profiles[static_cast<std::size_t>(h)].resolution_rate();
        sj[static_cast<std::size_t>(i)] = 1.0 / rate;
    }
    return sj;
}

std::vector<std::vector<double>> build_generator(const std::vector<std::vector<double>>& P,
                                                 const std::vector<double>& SJ, int n_transient) {
    const std::size_t K = P.size();
    Matrix Q = zeros(K, K);
    for (int i = 0; i < n_transient; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
            if (static_cast<int>(j) == i) continue;
            Q[static_cast<std::size_t>(i)][j] = P[static_cast<std::size_t>(i)][j] / SJ[static_cast<std::size_t>(i)];
            off += Q[static_cast<std::size_t>(i)][j];
        }
        Q[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = -off;
    }
    return Q;
}

MarkovModel build_markov_model(const MarkingGraph& g, const std::vector<ActionProfile>& profiles) {
    MarkovModel m;
    m.graph = g;
    m.P = build_dtmc(g, profiles);
    m.SJ = sojourn_times(g, profiles);
    m.Q = build_generator(m.P, m.SJ, g.n_transient);
    m.edge_time = zeros(static_cast<std::size_t>(g.size()), static_cast<std::size_t>(g.size()));
    const auto adj = adjacency(g);
    for (int i = 0; i < g.n_transient; ++i) {
        const auto& edges = adj[static_cast<std::size_t>(i)];
        const bool race = running_children(edges).size() > 1;
        for (const auto* e : edges) {
            const ActionProfile& p = profiles[static_cast<std::size_t>(e->child)];
            const double outcome_p = e->outcome > 0 ? p.p_s : p.p_f;
            if (outcome_p <= 0.0) continue;  // impossible transition: no time needed
            double t = 0.0;
            if (race)
                t = m.SJ[static_cast<std::size_t>(i)];  // memoryless race: wait is outcome-free
            else
                t = e->outcome > 0 ? p.success_time() : p.failure_time();
            m.edge_time[static_cast<std::size_t>(e->from)][static_cast<std::size_t>(e->to)] = t;
        }
    }
    bool has_condition = false;
    bool has_fixed = false;
    for (const auto& p : profiles) {
        has_condition |= p.kind == ProfileKind::Condition;
        has_fixed |= p.kind != ProfileKind::Stochastic && p.kind != ProfileKind::Condition;
    }
    if (has_condition)
        m.notes.push_back("condition leaves resolve in a nominal 1e-9 time units");
    if (has_fixed)
        m.notes.push_back(
            "fixed-time outcomes use exact conditional means; probabilities over time treat them "
            "as rates");
    return m;
}

// ---------------------------------------------------------------------------
// Absorption analysis
// ---------------------------------------------------------------------------

AbsorptionAnalysis absorption_analysis(const MarkovModel& m) {
    const MarkingGraph& g = m.graph;
    const int nt = g.n_transient;
    std::vector<double> ws(static_cast<std::size_t>(nt), 0.0);
    std::vector<double> gs(static_cast<std::size_t>(nt), 0.0);
    std::vector<double> wf(static_cast<std::size_t>(nt), 0.0);
    std::vector<double> gf(static_cast<std::size_t>(nt), 0.0);
    const auto adj = adjacency(g);
    // Transient states in canonical order are topologically sorted, so a
    // single reverse sweep resolves every expectation.
    for (int i = nt - 1; i >= 0; --i) {
        for (const auto* e : adj[static_cast<std::size_t>(i)]) {
            const double p = m.P[static_cast<std::size_t>(e->from)][static_cast<std::size_t>(e->to)];
            if (p == 0.0) continue;
            const double t = m.edge_time[static_cast<std::size_t>(e->from)][static_cast<std::size_t>(e->to)];
            switch (g.classes[static_cast<std::size_t>(e->to)]) {
                case MarkingClass::SuccessAbsorbing:
                    ws[static_cast<std::size_t>(i)] += p;
                    gs[static_cast<std::size_t>(i)] += p * t;
                    break;
                case MarkingClass::FailureAbsorbing:
                    wf[static_cast<std::size_t>(i)] += p;
                    gf[static_cast<std::size_t>(i)] += p * t;
                    break;
                case MarkingClass::Transient: {
                    const std::size_t j = static_cast<std::size_t>(e->to);
                    ws[static_cast<std::size_t>(i)] += p * ws[j];
                    gs[static_cast<std::size_t>(i)] += p * (t * ws[j] + gs[j]);
                    wf[static_cast<std::size_t>(i)] += p * wf[j];
                    gf[static_cast<std::size_t>(i)] += p * (t * wf[j] + gf[j]);
                    break;
                }
            }
        }
    }
    AbsorptionAnalysis a;
    a.p_success = ws[0];
    a.p_failure = wf[0];
    if (a.p_success > 0.0) a.mtts = gs[0] / ws[0];
    if (a.p_failure > 0.0) a.mttf = gf[0] / wf[0];
    return a;
}

AbsorptionAnalysis absorption_analysis_exp_log(const MarkovModel& m) {
    const MarkingGraph& g = m.graph;
    const std::size_t nt = static_cast<std::size_t>(g.n_transient);
    const std::size_t K = static_cast<std::size_t>(g.size());
    // Path-probability and exp(time) accumulators over the transient block.
    Matrix T = zeros(nt, nt), A_T = zeros(nt, nt);
    Matrix R = zeros(nt, K), A_R = zeros(nt, K);  // transient -> absorbing
    for (const MarkingEdge& e : g.edges) {
        const double p = m.P[static_cast<std::size_t>(e.from)][static_cast<std::size_t>(e.to)];
        if (p == 0.0) continue;
        const double t = m.edge_time[static_cast<std::size_t>(e.from)][static_cast<std::size_t>(e.to)];
        if (g.is_transient(e.to)) {
            T[static_cast<std::size_t>(e.from)][static_cast<std::size_t>(e.to)] += p;
            A_T[static_cast<std::size_t>(e.from)][static_cast<std::size_t>(e.to)] += std::exp(t);
        } else {
            R[static_cast<std::size_t>(e.from)][static_cast<std::size_t>(e.to)] += p;
            A_R[static_cast<std::size_t>(e.from)][static_cast<std::size_t>(e.to)] += std::exp(t);
        }
    }
    // Finite sums up to the nilpotency index: visit counts and exp-time paths.
    Matrix U = identity(nt), H = identity(nt);
    Matrix u_term = identity(nt), h_term = identity(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        u_term = mat_mul(u_term, T);
        h_term = mat_mul(h_term, A_T);
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t j = 0; j < nt; ++j) {
                U[i][j] += u_term[i][j];
                H[i][j] += h_term[i][j];
            }
    }
    const Matrix absorb_p = mat_mul(U, R);    // absorption probabilities from each transient
    const Matrix absorb_e = mat_mul(H, A_R);  // summed exp(path time) per absorbing state
    AbsorptionAnalysis a;
    double gs = 0.0, gf = 0.0;
    for (std::size_t s = 0; s < K; ++s) {
        const double w = absorb_p[0][s];
        if (w <= 0.0) continue;
        const double logt = std::log(absorb_e[0][s]);
        if (g.classes[s] == MarkingClass::SuccessAbsorbing) {
            a.p_success += w;
            gs += w * logt;
        } else if (g.classes[s] == MarkingClass::FailureAbsorbing) {
            a.p_failure += w;
            gf += w * logt;
        }
    }
    if (a.p_success > 0.0) a.mtts = gs / a.p_success;
    if (a.p_failure > 0.0) a.mttf = gf / a.p_failure;
    return a;
}

// ---------------------------------------------------------------------------
// Probabilities over time
// ---------------------------------------------------------------------------

namespace {

struct ReducedChain {
    std::vector<int> keep;          // surviving canonical indices, canonical order
    std::vector<int> to_reduced;    // full index -> reduced index or -1
    Matrix P;
    std::vector<double> SJ;
    int n_transient = 0;
    std::vector<double> start;      // reduced start distribution
};

/// Splice out transient states whose waiting time is below the threshold:
/// their mass flows through instantly along their outgoing distribution.
[[nodiscard]] ReducedChain eliminate_vanishing(const MarkovModel& m, const std::vector<double>& start) {
    const MarkingGraph& g = m.graph;
    const std::size_t K = static_cast<std::size_t>(g.size());
    std::vector<bool> vanishing(K, false);
    for (int i = 0; i < g.n_transient; ++i)
        vanishing[static_cast<std::size_t>(i)] = m.SJ[static_cast<std::size_t>(i)] < kVanishingSojourn;

    // Resolved outgoing distribution of each vanishing state over surviving
    // states. Processed in reverse topological order so targets are ready.
    std::vector<std::vector<double>> resolved(K);
    for (int i = g.n_transient - 1; i >= 0; --i) {
        if (!vanishing[static_cast<std::size_t>(i)]) continue;
        std::vector<double> row(K, 0.0);
        for (std::size_t j = 0; j < K; ++j) {
            const double p = m.P[static_cast<std::size_t>(i)][j];
            if (p == 0.0 || j == static_cast<std::size_t>(i)) continue;
            if (vanishing[j])
                for (std::size_t t = 0; t < K; ++t) row[t] += p * resolved[j][t];
            else
                row[j] += p;
        }
        resolved[static_cast<std::size_t>(i)] = std::move(row);
    }

    ReducedChain r;
    r.to_reduced.assign(K, -1);
    for (std::size_t i = 0; i < K; ++i)
        if (!vanishing[i]) {
            r.to_reduced[i] = static_cast<int>(r.keep.size());
            r.keep.push_back(static_cast<int>(i));
            if (g.is_transient(static_cast<int>(i))) ++r.n_transient;
        }
    const std::size_t Kr = r.keep.size();
    r.P = zeros(Kr, Kr);
    r.SJ.assign(static_cast<std::size_t>(r.n_transient), 0.0);
    r.start.assign(Kr, 0.0);
    auto redistribute = [&](std::size_t full_target, double mass, std::vector<double>& into) {
        if (mass == 0.0) return;
        if (vanishing[full_target])
            for (std::size_t t = 0; t < K; ++t) {
                const double share = resolved[full_target][t];
                if (share > 0.0) into[static_cast<std::size_t>(r.to_reduced[t])] += mass * share;
            }
        else
            into[static_cast<std::size_t>(r.to_reduced[full_target])] += mass;
    };
    for (std::size_t pos = 0; pos < Kr; ++pos) {
        const std::size_t full = static_cast<std::size_t>(r.keep[pos]);
        if (g.is_transient(static_cast<int>(full))) {
            r.SJ[pos] = m.SJ[full];
            std::vector<double> row(Kr, 0.0);
            for (std::size_t j = 0; j < K; ++j)
                if (j != full) redistribute(j, m.P[full][j], row);
            for (std::size_t j = 0; j < Kr; ++j) r.P[pos][j] = row[j];
            double off = 0.0;
            for (std::size_t j = 0; j < Kr; ++j)
                if (j != pos) off += r.P[pos][j];
            r.P[pos][pos] = 1.0 - off;
        } else {
            r.P[pos][pos] = 1.0;
        }
    }
    for (std::size_t i = 0; i < K; ++i) redistribute(i, start[i], r.start);
    return r;
}

}  // namespace

std::vector<TransientSample> transient_probabilities(const MarkovModel& m,
                                                     const std::vector<double>& time_grid,
                                                     const std::vector<double>& start) {
    const MarkingGraph& g = m.graph;
    const std::size_t K = static_cast<std::size_t>(g.size());
    std::vector<double> pi0(K, 0.0);
    if (start.empty()) {
        pi0[0] = 1.0;
    } else {
        require(start.size() == K, Errc::OutOfRange, "start distribution has the wrong length");
        double sum = 0.0;
        for (double v : start) {
            require(std::isfinite(v) && v >= 0.0, Errc::OutOfRange,
                    "start distribution entries must be nonnegative");
            sum += v;
        }
        require(std::abs(sum - 1.0) <= 1e-9, Errc::OutOfRange, "start distribution must sum to 1");
        pi0 = start;
    }
    for (std::size_t i = 1; i < time_grid.size(); ++i)
        require(time_grid[i] >= time_grid[i - 1], Errc::OutOfRange,
                "time grid must be ascending");
    if (!time_grid.empty())
        require(time_grid.front() >= 0.0, Errc::OutOfRange, "time grid must start at t >= 0");

    const ReducedChain r = eliminate_vanishing(m, pi0);
    const std::size_t Kr = r.keep.size();
    const Matrix Qr = build_generator(r.P, r.SJ, r.n_transient);
    double lambda = 0.0;
    for (int i = 0; i < r.n_transient; ++i)
        lambda = std::max(lambda, 1.0 / r.SJ[static_cast<std::size_t>(i)]);

    // Uniformized jump matrix: M = I + Q/lambda, row-stochastic.
    Matrix M = identity(Kr);
    if (lambda > 0.0)
        for (std::size_t i = 0; i < Kr; ++i)
            for (std::size_t j = 0; j < Kr; ++j) M[i][j] += Qr[i][j] / lambda;

    auto advance = [&](std::vector<double>& pi, double dt) {
        if (lambda == 0.0 || dt <= 0.0) return;
        double remaining = dt;
        while (remaining > 0.0) {
            const double step = std::min(remaining, 64.0 / lambda);
            const double lt = lambda * step;
            std::vector<double> v = pi;
            std::vector<double> acc(Kr, 0.0);
            double w = std::exp(-lt);
            double used = w;
            for (std::size_t j = 0; j < Kr; ++j) acc[j] = w * v[j];
            for (int k = 1; used < 1.0 - kUniformizationTail && k < 4096; ++k) {
                std::vector<double> next(Kr, 0.0);
                for (std::size_t i = 0; i < Kr; ++i) {
                    const double vi = v[i];
                    if (vi == 0.0) continue;
                    for (std::size_t j = 0; j < Kr; ++j) next[j] += vi * M[i][j];
                }
                v = std::move(next);
                w *= lt / static_cast<double>(k);
                used += w;
                for (std::size_t j = 0; j < Kr; ++j) acc[j] += w * v[j];
            }
            // Renormalize by the realized Poisson weight so the truncated
            // tail never drains probability mass across many substeps.
            for (std::size_t j = 0; j < Kr; ++j) acc[j] /= used;
            pi = std::move(acc);
            remaining -= step;
        }
    };

    std::vector<TransientSample> out;
    std::vector<double> pi = r.start;
    double now = 0.0;
    for (double t : time_grid) {
        advance(pi, t - now);
        now = t;
        TransientSample s;
        s.t = t;
        s.pi.assign(K, 0.0);
        double total = 0.0;
        for (std::size_t pos = 0; pos < Kr; ++pos) {
            double v = pi[pos];
            if (v < 0.0) {
                require(v >= -1e-9, Errc::IntegrationDiverged, "negative occupation probability");
                v = 0.0;
            }
            s.pi[static_cast<std::size_t>(r.keep[pos])] = v;
            total += v;
            switch (g.classes[static_cast<std::size_t>(r.keep[pos])]) {
                case MarkingClass::SuccessAbsorbing: s.p_success += v; break;
                case MarkingClass::FailureAbsorbing: s.p_failure += v; break;
                case MarkingClass::Transient: s.p_running += v; break;
            }
        }
        require(std::abs(total - 1.0) <= kConservationTol, Errc::IntegrationDiverged,
                "probability mass not conserved at t = " + describe(t));
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<TransientSample> deterministic_transient(const MarkingGraph& g,
                                                     const std::vector<ActionProfile>& profiles,
                                                     double horizon) {
    check_children(g, profiles);
    require(std::isfinite(horizon) && horizon >= 0.0, Errc::OutOfRange,
            "horizon must be nonnegative");
    for (std::size_t i = 0; i < profiles.size(); ++i)
        require(profiles[i].kind == ProfileKind::Deterministic, Errc::InvalidProfile,
                "fixed-time analysis needs deterministic profiles (child " + std::to_string(i) +
                    " is " + to_string(profiles[i].kind) + ")");
    const auto adj = adjacency(g);
    for (int i = 0; i < g.n_transient; ++i)
        require(running_children(adj[static_cast<std::size_t>(i)]).size() == 1, Errc::InvalidProfile,
                "fixed-time analysis covers single-runner compositions (sequence/fallback)");

    // Snap every positive-probability time onto the rational lattice.
    auto snap = [](double t) -> long long {
        const long long n = std::llround(t * kRationalScale);
        require(n > 0, Errc::NoCommonStep,
                "time " + describe(t) + " is below the supported resolution of 1e-6");
        return n;
    };
    long long gcd = 0;
    std::vector<std::pair<long long, long long>> snapped(profiles.size(), {0, 0});
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        if (profiles[i].p_s > 0.0) {
            snapped[i].first = snap(profiles[i].success_time());
            gcd = std::gcd(gcd, snapped[i].first);
        }
        if (profiles[i].p_f > 0.0) {
            snapped[i].second = snap(profiles[i].failure_time());
            gcd = std::gcd(gcd, snapped[i].second);
        }
    }
    require(gcd > 0, Errc::NoCommonStep, "no resolution times to schedule");

    // Propagate (arrival time, mass) through the acyclic graph, then sweep
    // arrival/departure events in time order.
    const std::size_t K = static_cast<std::size_t>(g.size());
    std::vector<std::map<long long, double>> arrivals(K);
    arrivals[0][0] = 1.0;
    std::map<long long, std::vector<std::pair<std::size_t, double>>> deltas;
    auto add_delta = [&](long long t, std::size_t state, double mass) {
        deltas[t].push_back({state, mass});
    };
    for (int i = 0; i < g.n_transient; ++i) {
        for (const auto& [t0, mass] : arrivals[static_cast<std::size_t>(i)]) {
            add_delta(t0, static_cast<std::size_t>(i), mass);
            for (const auto* e : adj[static_cast<std::size_t>(i)]) {
                const ActionProfile& p = profiles[static_cast<std::size_t>(e->child)];
                const double prob = e->outcome > 0 ? p.p_s : p.p_f;
                if (prob == 0.0) continue;
                const long long step =
                    e->outcome > 0 ? snapped[static_cast<std::size_t>(e->child)].first
                                   : snapped[static_cast<std::size_t>(e->child)].second;
                add_delta(t0 + step, static_cast<std::size_t>(i), -mass * prob);
                arrivals[static_cast<std::size_t>(e->to)][t0 + step] += mass * prob;
            }
        }
    }
    for (int i = g.n_transient; i < g.size(); ++i)
        for (const auto& [t0, mass] : arrivals[static_cast<std::size_t>(i)])
            add_delta(t0, static_cast<std::size_t>(i), mass);

    const long long horizon_ticks = static_cast<long long>(std::floor(horizon * kRationalScale + 0.5));
    std::vector<double> pi(K, 0.0);
    std::vector<TransientSample> out;
    auto emit = [&](long long ticks) {
        TransientSample s;
        s.t = static_cast<double>(ticks) / kRationalScale;
        s.pi = pi;
        for (std::size_t i = 0; i < K; ++i) {
            switch (g.classes[i]) {
                case MarkingClass::SuccessAbsorbing: s.p_success += pi[i]; break;
                case MarkingClass::FailureAbsorbing: s.p_failure += pi[i]; break;
                case MarkingClass::Transient: s.p_running += pi[i]; break;
            }
        }
        out.push_back(std::move(s));
    };
    bool emitted_horizon = false;
    for (const auto& [t, list] : deltas) {
        if (t > horizon_ticks) break;
        for (const auto& [state, mass] : list) pi[state] += mass;
        emit(t);
        emitted_horizon |= t == horizon_ticks;
    }
    if (!emitted_horizon) emit(horizon_ticks);
    return out;
}

// ---------------------------------------------------------------------------
// Whole-tree analysis
// ---------------------------------------------------------------------------

namespace {

[[nodiscard]] std::string profile_key(const BTNode& leaf) {
    return leaf.ref.empty() ? leaf.id : leaf.ref;
}

[[nodiscard]] NodeKind analysis_kind(const BTNode& node) {
    switch (node.kind) {
        case NodeKind::Sequence:
        case NodeKind::SequenceMemory:
            return NodeKind::Sequence;
        case NodeKind::Fallback:
        case NodeKind::FallbackMemory:
            return NodeKind::Fallback;
        case NodeKind::Parallel:
            return NodeKind::Parallel;
        default:
            throw Error(Errc::InvalidProfile,
                        "node '" + node.id + "' (" + to_string(node.kind) +
                            ") is outside the analyzable fragment "
                            "(sequence/fallback/parallel and profiled leaves)");
    }
}

[[nodiscard]] NodeAnalysis leaf_analysis(const BTNode& node, const ProfileMap& profiles,
                                         std::set<std::string>& notes) {
    const std::string key = profile_key(node);
    auto it = profiles.find(key);
    if (it == profiles.end())
        throw Error(Errc::InvalidProfile, "leaf '" + key + "' has no profile");
    validate_profile(it->second, key);
    if (it->second.kind == ProfileKind::Condition)
        notes.insert("condition leaves resolve in a nominal 1e-9 time units");
    else if (it->second.kind != ProfileKind::Stochastic)
        notes.insert(
            "fixed-time outcomes use exact conditional means; probabilities over time treat them "
            "as rates");
    NodeAnalysis a;
    a.profile = it->second;
    a.absorption.p_success = a.profile.p_s;
    a.absorption.p_failure = a.profile.p_f;
    if (a.profile.p_s > 0.0) a.absorption.mtts = a.profile.success_time();
    if (a.profile.p_f > 0.0) a.absorption.mttf = a.profile.failure_time();
    return a;
}

[[nodiscard]] ActionProfile equivalent_profile(const AbsorptionAnalysis& a) {
    ActionProfile p;
    p.kind = ProfileKind::Stochastic;
    p.p_s = a.p_success;
    p.p_f = 1.0 - a.p_success;
    if (a.mtts) p.mu = 1.0 / *a.mtts;
    if (a.mttf) p.nu = 1.0 / *a.mttf;
    validate_profile(p);
    return p;
}

NodeAnalysis analyze_node(const BTNode& node, const ProfileMap& profiles,
                          std::map<std::string, NodeAnalysis>& per_node,
                          std::set<std::string>& notes) {
    NodeAnalysis result;
    if (is_leaf(node.kind)) {
        result = leaf_analysis(node, profiles, notes);
    } else {
        const NodeKind kind = analysis_kind(node);
        std::vector<ActionProfile> child_profiles;
        for (const auto& child : node.children)
            child_profiles.push_back(analyze_node(*child, profiles, per_node, notes).profile);
        if (kind == NodeKind::Parallel && child_profiles.size() > 1)
            notes.insert(
                "parallel waiting times use the exponential race model; outcome probabilities are "
                "exact");
        const MarkingGraph graph = build_marking_graph(
            kind, static_cast<int>(child_profiles.size()), node.parallel_m);
        const MarkovModel model = build_markov_model(graph, child_profiles);
        result.absorption = absorption_analysis(model);
        result.profile = equivalent_profile(result.absorption);
    }
    per_node[node.id] = result;
    return result;
}

}  // namespace

ComposedAnalysis compose_profiles(const BTNode& tree, const ProfileMap& leaf_profiles) {
    ComposedAnalysis out;
    std::set<std::string> notes;
    out.root = analyze_node(tree, leaf_profiles, out.per_node, notes);
    out.notes.assign(notes.begin(), notes.end());
    return out;
}

ReliabilityReport analyze(const BTNode& tree, const ProfileMap& leaf_profiles,
                          const std::vector<double>& time_grid) {
    ComposedAnalysis composed = compose_profiles(tree, leaf_profiles);
    ReliabilityReport report;
    report.ps_inf = composed.root.absorption.p_success;
    report.pf_inf = composed.root.absorption.p_failure;
    report.mtts = composed.root.absorption.mtts;
    report.mttf = composed.root.absorption.mttf;
    report.mu = composed.root.profile.mu;
    report.nu = composed.root.profile.nu;
    report.notes = composed.notes;
    if (!time_grid.empty()) {
        // The root's own model over its children's equivalent profiles; a
        // lone leaf is wrapped as a single-child fallback with identical
        // dynamics.
        std::vector<ActionProfile> child_profiles;
        NodeKind kind = NodeKind::Fallback;
        int m = 0;
        if (is_leaf(tree.kind)) {
            child_profiles.push_back(composed.root.profile);
        } else {
            kind = analysis_kind(tree);
            m = tree.parallel_m;
            for (const auto& child : tree.children)
                child_profiles.push_back(composed.per_node.at(child->id).profile);
        }
        const MarkingGraph graph =
            build_marking_graph(kind, static_cast<int>(child_profiles.size()), m);
        const MarkovModel model = build_markov_model(graph, child_profiles);
        report.grid = transient_probabilities(model, time_grid);
    }
    return report;
}

}  // namespace bt::rel
