#include "bt/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bt::ss {

namespace {

bool finite(const Vec& x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

bool within(const Vec& x, const Vec& lo, const Vec& hi) {
    for (size_t i = 0; i < x.size(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

double dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

void require_compatible(const StateSpaceBT& a, const StateSpaceBT& b) {
    if (a.dim != b.dim || a.dt != b.dt)
        throw Error(Errc::DimensionMismatch, a.name + " and " + b.name +
                                                 " disagree on state dimension or time step");
}

int step_bound(const RegionSpec& spec, const char* who) {
    if (!spec.tau)
        throw std::invalid_argument(std::string(who) + ": a declared step bound is required");
    return static_cast<int>(std::floor(*spec.tau + 1e-12));
}

}  // namespace

std::function<Status(const Vec&)> status_from_regions(const RegionSpec& spec) {
    return [success = spec.success, failure = spec.failure](const Vec& x) {
        if (success(x)) return Status::Success;
        if (failure && failure(x)) return Status::Failure;
        return Status::Running;
    };
}

SampledDomain SampledDomain::grid(Vec lo, Vec hi, const std::vector<int>& counts) {
    if (lo.size() != hi.size() || lo.size() != counts.size())
        throw std::invalid_argument("grid: lo/hi/counts sizes differ");
    const size_t n = lo.size();
    std::vector<std::vector<double>> axes(n);
    for (size_t i = 0; i < n; ++i) {
        if (counts[i] < 1) throw std::invalid_argument("grid: counts must be positive");
        if (counts[i] == 1) {
            axes[i] = {lo[i]};
            continue;
        }
        for (int k = 0; k < counts[i]; ++k)
            axes[i].push_back(lo[i] + (hi[i] - lo[i]) * k / (counts[i] - 1));
    }
    SampledDomain d;
    d.lo = std::move(lo);
    d.hi = std::move(hi);
    Vec cur(n, 0.0);
    // odometer enumeration, last dimension fastest: deterministic fixed order
    std::vector<size_t> idx(n, 0);
    while (true) {
        for (size_t i = 0; i < n; ++i) cur[i] = axes[i][idx[i]];
        d.points.push_back(cur);
        size_t i = n;
        while (i > 0) {
            --i;
            if (++idx[i] < axes[i].size()) break;
            idx[i] = 0;
            if (i == 0) return d;
        }
    }
}

Trajectory execute(const StateSpaceBT& bt, const Vec& x0, int max_steps, const Vec* lo,
                   const Vec* hi) {
    if (max_steps < 1) throw std::invalid_argument("execute: max_steps must be >= 1");
    if (static_cast<int>(x0.size()) != bt.dim)
        throw Error(Errc::DimensionMismatch, bt.name + ": start state has wrong dimension");
    Trajectory traj;
    Vec x = x0;
    for (int k = 0;; ++k) {
        Status s = bt.r(x);
        traj.points.push_back({k * bt.dt, x, s});
        if (s != Status::Running) {
            traj.reason = StopReason::Resolved;
            return traj;
        }
        if (k == max_steps) {
            traj.reason = StopReason::MaxSteps;
            return traj;
        }
        x = bt.f(x);
        if (!finite(x))
            throw Error(Errc::NonFiniteState, bt.name + ": dynamics produced a non-finite state");
        if (lo && hi && !within(x, *lo, *hi)) {
            traj.points.push_back({(k + 1) * bt.dt, x, bt.r(x)});
            traj.reason = StopReason::OutOfDomain;
            return traj;
        }
    }
}

StateSpaceBT compose_sequence(const StateSpaceBT& bt1, const StateSpaceBT& bt2) {
    require_compatible(bt1, bt2);
    StateSpaceBT out;
    out.name = "Sequence(" + bt1.name + "," + bt2.name + ")";
    out.dim = bt1.dim;
    out.dt = bt1.dt;
    out.f = [r1 = bt1.r, f1 = bt1.f, f2 = bt2.f](const Vec& x) {
        return r1(x) == Status::Success ? f2(x) : f1(x);
    };
    out.r = [r1 = bt1.r, r2 = bt2.r](const Vec& x) {
        return r1(x) == Status::Success ? r2(x) : r1(x);
    };
    return out;
}

StateSpaceBT compose_fallback(const StateSpaceBT& bt1, const StateSpaceBT& bt2) {
    require_compatible(bt1, bt2);
    StateSpaceBT out;
    out.name = "Fallback(" + bt1.name + "," + bt2.name + ")";
    out.dim = bt1.dim;
    out.dt = bt1.dt;
    out.f = [r1 = bt1.r, f1 = bt1.f, f2 = bt2.f](const Vec& x) {
        return r1(x) == Status::Failure ? f2(x) : f1(x);
    };
    out.r = [r1 = bt1.r, r2 = bt2.r](const Vec& x) {
        return r1(x) == Status::Failure ? r2(x) : r1(x);
    };
    return out;
}

StateSpaceBT compose_sequence_n(const std::vector<StateSpaceBT>& parts) {
    if (parts.empty()) throw std::invalid_argument("compose_sequence_n: empty");
    StateSpaceBT acc = parts.back();
    for (size_t i = parts.size() - 1; i-- > 0;) acc = compose_sequence(parts[i], acc);
    return acc;
}

StateSpaceBT compose_fallback_n(const std::vector<StateSpaceBT>& parts) {
    if (parts.empty()) throw std::invalid_argument("compose_fallback_n: empty");
    StateSpaceBT acc = parts.back();
    for (size_t i = parts.size() - 1; i-- > 0;) acc = compose_fallback(parts[i], acc);
    return acc;
}

StateSpaceBT compose_parallel(const StateSpaceBT& bt1, const StateSpaceBT& bt2, int m,
                              const std::vector<int>& part1, const SampledDomain& domain) {
    require_compatible(bt1, bt2);
    if (m != 1 && m != 2) throw std::invalid_argument("compose_parallel: M must be 1 or 2");
    std::vector<bool> owned1(bt1.dim, false);
    for (int i : part1) {
        if (i < 0 || i >= bt1.dim)
            throw std::invalid_argument("compose_parallel: partition index out of range");
        owned1[i] = true;
    }
    // Each child must leave the other's coordinates untouched on every sample.
    for (const Vec& x : domain.points) {
        Vec y1 = bt1.f(x), y2 = bt2.f(x);
        for (int i = 0; i < bt1.dim; ++i) {
            if (!owned1[i] && std::abs(y1[i] - x[i]) > 1e-12)
                throw Error(Errc::PartitionViolation,
                            bt1.name + " writes coordinate " + std::to_string(i) +
                                " outside its partition");
            if (owned1[i] && std::abs(y2[i] - x[i]) > 1e-12)
                throw Error(Errc::PartitionViolation,
                            bt2.name + " writes coordinate " + std::to_string(i) +
                                " outside its partition");
        }
    }
    StateSpaceBT out;
    out.name = "Parallel" + std::to_string(m) + "(" + bt1.name + "," + bt2.name + ")";
    out.dim = bt1.dim;
    out.dt = bt1.dt;
    out.f = [f1 = bt1.f, f2 = bt2.f, owned1](const Vec& x) {
        Vec y1 = f1(x), y2 = f2(x);
        Vec y(x.size());
        for (size_t i = 0; i < x.size(); ++i) y[i] = owned1[i] ? y1[i] : y2[i];
        return y;
    };
    out.r = [r1 = bt1.r, r2 = bt2.r, m](const Vec& x) {
        Status s1 = r1(x), s2 = r2(x);
        if (m == 1) {
            if (s1 == Status::Success || s2 == Status::Success) return Status::Success;
            if (s1 == Status::Failure && s2 == Status::Failure) return Status::Failure;
        } else {
            if (s1 == Status::Success && s2 == Status::Success) return Status::Success;
            if (s1 == Status::Failure || s2 == Status::Failure) return Status::Failure;
        }
        return Status::Running;
    };
    return out;
}

StateSpaceBT lift(const StateSpaceBT& bt, int total_dim, const std::vector<int>& dims) {
    if (static_cast<int>(dims.size()) != bt.dim)
        throw Error(Errc::DimensionMismatch, bt.name + ": lift needs one target per dimension");
    for (int i : dims)
        if (i < 0 || i >= total_dim)
            throw std::invalid_argument("lift: target dimension out of range");
    auto project = [dims, n = bt.dim](const Vec& x) {
        Vec sub(n);
        for (int i = 0; i < n; ++i) sub[i] = x[dims[i]];
        return sub;
    };
    StateSpaceBT out;
    out.name = bt.name;
    out.dim = total_dim;
    out.dt = bt.dt;
    out.f = [f = bt.f, project, dims](const Vec& x) {
        Vec sub = f(project(x));
        Vec y = x;
        for (size_t i = 0; i < dims.size(); ++i) y[dims[i]] = sub[i];
        return y;
    };
    out.r = [r = bt.r, project](const Vec& x) { return r(project(x)); };
    return out;
}

std::vector<Vec> check_partition(const RegionSpec& spec, const SampledDomain& domain) {
    std::vector<Vec> witnesses;
    for (const Vec& x : domain.points) {
        int hits = (spec.success(x) ? 1 : 0) + (spec.failure && spec.failure(x) ? 1 : 0) +
                   (spec.running(x) ? 1 : 0);
        if (hits != 1) witnesses.push_back(x);
    }
    return witnesses;
}

FtsReport check_fts(const StateSpaceBT& bt, const RegionSpec& spec, const SampledDomain& domain) {
    const int bound = step_bound(spec, "check_fts");
    FtsReport report;
    for (const Vec& x0 : domain.points) {
        if (!spec.in_attraction(x0)) continue;
        ++report.starts_checked;
        Vec x = x0;
        bool ok = false;
        for (int k = 0; k <= bound; ++k) {
            if (spec.success(x)) {
                report.worst_tau = std::max(report.worst_tau, k);
                ok = true;
                break;
            }
            // still unresolved: the FTS definition demands the state keeps to
            // the region of attraction until the success step
            if ((spec.failure && spec.failure(x)) || !spec.in_attraction(x)) break;
            if (k == bound) break;
            x = bt.f(x);
            if (!finite(x))
                throw Error(Errc::NonFiniteState,
                            bt.name + ": dynamics produced a non-finite state");
        }
        if (!ok) report.witnesses.push_back(x0);
    }
    report.is_fts = report.witnesses.empty();
    return report;
}

LemmaReport check_composition_lemma(CompositionKind kind, const StateSpaceBT& bt1,
                                    const RegionSpec& spec1, const StateSpaceBT& bt2,
                                    const RegionSpec& spec2, const SampledDomain& domain,
                                    int parallel_m, const std::vector<int>& part1) {
    LemmaReport report;
    report.child1_fts = check_fts(bt1, spec1, domain).is_fts;
    report.child2_fts = check_fts(bt2, spec2, domain).is_fts;
    report.assumptions.push_back("regions and trajectories verified on the sampled grid only");

    const double tau1 = *spec1.tau, tau2 = *spec2.tau;
    auto in_attr1 = [&spec1](const Vec& x) { return spec1.in_attraction(x); };
    auto in_attr2 = [&spec2](const Vec& x) { return spec2.in_attraction(x); };

    StateSpaceBT composed;
    switch (kind) {
        case CompositionKind::Sequence:
            // hypothesis: the first system's success set equals exactly the set
            // the second system can finish from
            for (const Vec& x : domain.points) {
                bool lhs = spec1.success(x);
                bool rhs = in_attr2(x) || spec2.success(x);
                if (lhs != rhs) report.hypothesis_witnesses.push_back(x);
            }
            report.tau0 = tau1 + tau2;
            report.success0 = spec2.success;
            report.attraction0 = [in_attr1, in_attr2](const Vec& x) {
                return in_attr1(x) || in_attr2(x);
            };
            composed = compose_sequence(bt1, bt2);
            break;
        case CompositionKind::Fallback:
            // hypothesis: the rescuer's success set lands where the first system
            // can take over (or has already finished), and the first system's
            // attraction covers its whole running region
            report.assumptions.push_back(
                "rescuer containment read as S2 within R1' union S1 (source statement garbled)");
            report.assumptions.push_back(
                "first system's attraction assumed to cover its running region");
            for (const Vec& x : domain.points) {
                if (spec2.success(x) && !(in_attr1(x) || spec1.success(x)))
                    report.hypothesis_witnesses.push_back(x);
            }
            report.tau0 = tau1 + tau2;
            report.success0 = spec1.success;
            report.attraction0 = [in_attr1, in_attr2](const Vec& x) {
                return in_attr1(x) || in_attr2(x);
            };
            composed = compose_fallback(bt1, bt2);
            break;
        case CompositionKind::Parallel: {
            auto s1 = spec1.success, s2 = spec2.success;
            if (parallel_m == 1) {
                report.tau0 = std::min(tau1, tau2);
                report.success0 = [s1, s2](const Vec& x) { return s1(x) || s2(x); };
                report.attraction0 = [in_attr1, in_attr2, s1, s2](const Vec& x) {
                    return (in_attr1(x) || in_attr2(x)) && !(s1(x) || s2(x));
                };
            } else {
                report.tau0 = std::max(tau1, tau2);
                report.success0 = [s1, s2](const Vec& x) { return s1(x) && s2(x); };
                report.attraction0 = [in_attr1, in_attr2, s1, s2](const Vec& x) {
                    return (in_attr1(x) && in_attr2(x)) && !(s1(x) && s2(x));
                };
            }
            composed = compose_parallel(bt1, bt2, parallel_m, part1, domain);
            break;
        }
    }
    report.hypotheses_hold =
        report.child1_fts && report.child2_fts && report.hypothesis_witnesses.empty();

    // The conclusion is never taken on faith: run the composed system from
    // every sampled point of the claimed region of attraction.
    RegionSpec claimed;
    claimed.success = report.success0;
    claimed.failure = nullptr;
    claimed.running = [s0 = report.success0](const Vec& x) { return !s0(x); };
    claimed.attraction = report.attraction0;
    claimed.tau = report.tau0;
    FtsReport conclusion = check_fts(composed, claimed, domain);
    report.conclusion_holds = conclusion.is_fts;
    report.conclusion_witnesses = std::move(conclusion.witnesses);
    return report;
}

SafetyReport check_safety(const StateSpaceBT& bt1, const RegionSpec& spec1,
                          const StateSpaceBT& bt2, const Predicate& obstacle,
                          const Predicate& init_region, double d, const SampledDomain& domain,
                          int max_steps) {
    SafetyReport report;
    report.notes.push_back("reachable set approximated by the declared sampled bounds");
    report.notes.push_back("distance to the success set measured against its sampled points");

    // Step-length precondition for the second system.
    for (const Vec& x : domain.points) {
        double step = dist(x, bt2.f(x));
        report.max_step = std::max(report.max_step, step);
        if (step >= d)
            throw Error(Errc::StepLengthViolated,
                        bt2.name + ": one-step displacement " + std::to_string(step) +
                            " reaches the margin " + std::to_string(d));
    }

    // (i) the d-collar around the first system's success set lies inside I
    std::vector<const Vec*> success_pts;
    for (const Vec& x : domain.points)
        if (spec1.success(x)) success_pts.push_back(&x);
    if (success_pts.empty())
        report.notes.push_back("no sampled point of the success set: margin check vacuous");
    for (const Vec& x : domain.points) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const Vec* s : success_pts) nearest = std::min(nearest, dist(x, *s));
        if (nearest <= d && !init_region(x)) report.margin_witnesses.push_back(x);
    }
    report.margin_ok = report.margin_witnesses.empty();

    // (ii) no trajectory of Sequence(bt1, bt2) from I reaches the obstacle
    StateSpaceBT composed = compose_sequence(bt1, bt2);
    for (const Vec& x0 : domain.points) {
        if (!init_region(x0)) continue;
        Vec x = x0;
        for (int k = 0; k <= max_steps; ++k) {
            if (obstacle(x)) {
                report.trajectory_witnesses.push_back(x0);
                break;
            }
            if (k == max_steps) break;
            x = composed.f(x);
            if (!finite(x))
                throw Error(Errc::NonFiniteState,
                            composed.name + ": dynamics produced a non-finite state");
        }
    }
    report.trajectories_ok = report.trajectory_witnesses.empty();
    report.safe = report.margin_ok && report.trajectories_ok;
    return report;
}

ChatterReport chattering_indicator(const Vec& x, const ScalarField& s, const StateSpaceBT& bt1,
                                   const StateSpaceBT& bt2, double h) {
    if (h <= 0) throw std::invalid_argument("chattering_indicator: h must be positive");
    Vec grad(x.size());
    double norm2 = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        Vec hi = x, lo = x;
        hi[i] += h;
        lo[i] -= h;
        grad[i] = (s(hi) - s(lo)) / (2 * h);
        norm2 += grad[i] * grad[i];
    }
    if (std::sqrt(norm2) < 1e-12)
        throw Error(Errc::DegenerateGradient, "switching surface gradient vanishes at the point");
    ChatterReport report;
    Vec y1 = bt1.f(x), y2 = bt2.f(x);
    for (size_t i = 0; i < x.size(); ++i) {
        report.lambda1 += grad[i] * (y1[i] - x[i]);
        report.lambda2 += grad[i] * (y2[i] - x[i]);
    }
    report.chatter_free = report.lambda1 < 0 || report.lambda2 > 0;
    return report;
}

}  // namespace bt::ss
