#include <cmath>
#include <vector>

#include "doctest.h"

#include "bt/statespace.hpp"
#include "bt/statespace_models.hpp"

using namespace bt;
using namespace bt::ss;

namespace {

/// 1-D climber lifted into the plane: owns one coordinate, raises it by
/// `step` per tick, succeeds at or above `goal`, fails at or below `fail`
/// when a failure floor is given.
StateSpaceBT climber(const std::string& name, int coord, double step, double goal,
                     std::optional<double> fail = std::nullopt) {
    StateSpaceBT bt;
    bt.name = name;
    bt.dim = 2;
    bt.dt = 1.0;
    bt.f = [coord, step](const Vec& x) {
        Vec y = x;
        y[coord] += step;
        return y;
    };
    bt.r = [coord, goal, fail](const Vec& x) {
        if (x[coord] >= goal - 1e-9) return Status::Success;
        if (fail && x[coord] <= *fail + 1e-9) return Status::Failure;
        return Status::Running;
    };
    return bt;
}

Status parallel_oracle(Status s1, Status s2, int m) {
    int succ = (s1 == Status::Success) + (s2 == Status::Success);
    int fail = (s1 == Status::Failure) + (s2 == Status::Failure);
    if (succ >= m) return Status::Success;
    if (fail > 2 - m) return Status::Failure;
    return Status::Running;
}

/// 1-D system on the line for the sequence-lemma desk instances.
StateSpaceBT line_system(const std::string& name, double lo_fail, double goal) {
    StateSpaceBT bt;
    bt.name = name;
    bt.dim = 1;
    bt.dt = 1.0;
    bt.f = [](const Vec& x) { return Vec{x[0] + 0.5}; };
    bt.r = [lo_fail, goal](const Vec& x) {
        if (x[0] >= goal - 1e-9) return Status::Success;
        if (x[0] < lo_fail - 1e-9) return Status::Failure;
        return Status::Running;
    };
    return bt;
}

}  // namespace

TEST_CASE("grid sampling covers the box deterministically") {
    auto d = SampledDomain::grid({0.0, 1.0}, {1.0, 2.0}, {3, 5});
    REQUIRE(d.points.size() == 15);
    CHECK(d.points.front() == Vec{0.0, 1.0});
    CHECK(d.points.back() == Vec{1.0, 2.0});
    for (const Vec& p : d.points) {
        CHECK(p[0] >= 0.0);
        CHECK(p[0] <= 1.0);
        CHECK(p[1] >= 1.0);
        CHECK(p[1] <= 2.0);
    }
}

TEST_CASE("walking home resolves in five steps from half a meter out") {
    auto sys = models::walk_home();
    auto traj = execute(sys.bt, {0.5, 0.5}, 100);
    CHECK(traj.reason == StopReason::Resolved);
    CHECK(traj.final_status() == Status::Success);
    CHECK(traj.steps() == 5);
    for (int k = 0; k <= 5; ++k) CHECK(traj.points[k].t == doctest::Approx(k * 1.0));
    CHECK(traj.points.back().x[0] <= models::kBoundaryTol);
}

TEST_CASE("a start inside the success region resolves immediately") {
    auto sys = models::walk_home();
    auto traj = execute(sys.bt, {-0.2, 0.1}, 10);
    CHECK(traj.points.size() == 1);
    CHECK(traj.final_status() == Status::Success);
}

TEST_CASE("the posture chain stands the robot up and walks it home") {
    auto sys = models::standing_fallback();
    auto traj = execute(sys.bt, {0.5, 0.0}, 100);
    CHECK(traj.reason == StopReason::Resolved);
    CHECK(traj.final_status() == Status::Success);
    CHECK(traj.steps() <= 24);
    CHECK(traj.steps() == 19);  // 10 rise to sitting + 4 to standing + 5 walking
}

TEST_CASE("execute guards states and domains") {
    SUBCASE("non-finite dynamics") {
        StateSpaceBT bad;
        bad.name = "bad";
        bad.dim = 1;
        bad.f = [](const Vec& x) { return Vec{x[0] / 0.0}; };
        bad.r = [](const Vec&) { return Status::Running; };
        try {
            execute(bad, {1.0}, 5);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::NonFiniteState);
        }
    }
    SUBCASE("dimension mismatch") {
        auto sys = models::walk_home();
        CHECK_THROWS_AS(execute(sys.bt, {1.0}, 5), Error);
    }
    SUBCASE("leaving declared bounds") {
        auto sys = models::lie_to_sit();  // raises x2 without bound until success
        Vec lo{0.0, 0.0}, hi{1.0, 0.1};
        auto traj = execute(sys.bt, {0.5, 0.05}, 100, &lo, &hi);
        CHECK(traj.reason == StopReason::OutOfDomain);
    }
}

TEST_CASE("region predicates partition the sampled domain for every built-in") {
    auto humanoid = models::humanoid_domain(25);
    for (const char* name : {"walk_home", "sit_to_stand", "lie_to_sit", "standing_fallback"}) {
        auto sys = models::find_system(name);
        REQUIRE(sys.has_value());
        CHECK(check_partition(sys->spec, humanoid).empty());
    }
    auto battery = models::battery_domain(25);
    for (const char* name : {"guarantee_power", "do_other_task"}) {
        auto sys = models::find_system(name);
        REQUIRE(sys.has_value());
        CHECK(check_partition(sys->spec, battery).empty());
    }
}

TEST_CASE("composition status follows the case split literally on every sample") {
    auto walk = models::walk_home(), sit = models::sit_to_stand();
    auto seq = compose_sequence(walk.bt, sit.bt);
    auto fb = compose_fallback(walk.bt, sit.bt);
    for (const Vec& x : models::humanoid_domain(25).points) {
        Status s1 = walk.bt.r(x);
        CHECK(seq.r(x) == (s1 == Status::Success ? sit.bt.r(x) : s1));
        CHECK(fb.r(x) == (s1 == Status::Failure ? sit.bt.r(x) : s1));
        CHECK(seq.f(x) == (s1 == Status::Success ? sit.bt.f(x) : walk.bt.f(x)));
        CHECK(fb.f(x) == (s1 == Status::Failure ? sit.bt.f(x) : walk.bt.f(x)));
    }
}

TEST_CASE("right-folded fallback equals the flat first-non-failure scan") {
    auto walk = models::walk_home(), sit = models::sit_to_stand(), lie = models::lie_to_sit();
    auto folded = compose_fallback_n({walk.bt, sit.bt, lie.bt});
    for (const Vec& x : models::humanoid_domain(20).points) {
        // independent flat-scan oracle over the three children
        Status expect = Status::Failure;
        for (const auto* child : {&walk.bt, &sit.bt, &lie.bt}) {
            expect = child->r(x);
            if (expect != Status::Failure) break;
        }
        CHECK(folded.r(x) == expect);
    }
}

TEST_CASE("composing systems with different shapes is rejected") {
    auto walk = models::walk_home();
    StateSpaceBT other = walk.bt;
    other.dt = 2.0;
    CHECK_THROWS_AS(compose_sequence(walk.bt, other), Error);
    CHECK_THROWS_AS(compose_fallback(other, walk.bt), Error);
}

TEST_CASE("parallel composition splits coordinates and follows the M rule") {
    auto domain = SampledDomain::grid({-2.0, -2.0}, {2.0, 2.0}, {9, 9});
    auto a = climber("a", 0, 0.5, 1.0, -1.0);
    auto b = climber("b", 1, 0.5, 1.0, -1.0);

    for (int m : {1, 2}) {
        auto par = compose_parallel(a, b, m, {0}, domain);
        for (const Vec& x : domain.points)
            CHECK(par.r(x) == parallel_oracle(a.r(x), b.r(x), m));
        // each child's coordinate advances independently
        Vec y = par.f({0.0, -0.5});
        CHECK(y == Vec{0.5, 0.0});
    }

    SUBCASE("a child writing outside its partition is rejected") {
        StateSpaceBT greedy = a;
        greedy.f = [](const Vec& x) { return Vec{x[0] + 0.5, x[1] + 0.5}; };
        try {
            compose_parallel(greedy, b, 1, {0}, domain);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::PartitionViolation);
        }
    }
}

TEST_CASE("lifting pads dynamics with identity on the other coordinates") {
    StateSpaceBT one;
    one.name = "one";
    one.dim = 1;
    one.dt = 1.0;
    one.f = [](const Vec& x) { return Vec{x[0] * 2.0}; };
    one.r = [](const Vec& x) { return x[0] > 4.0 ? Status::Success : Status::Running; };
    auto lifted = lift(one, 3, {1});
    CHECK(lifted.f({7.0, 3.0, 9.0}) == Vec{7.0, 6.0, 9.0});
    CHECK(lifted.r({0.0, 5.0, 0.0}) == Status::Success);
}

TEST_CASE("finite-time success of the posture systems over the shared grid") {
    auto domain = models::humanoid_domain(50);

    auto walk = models::walk_home();
    auto r_walk = check_fts(walk.bt, walk.spec, domain);
    CHECK(r_walk.is_fts);
    CHECK(walk.spec.tau == 10.0);    // declared bound
    CHECK(r_walk.worst_tau == 5);    // observed worst start x1 = 0.5

    auto sit = models::sit_to_stand();
    auto r_sit = check_fts(sit.bt, sit.spec, domain);
    CHECK(r_sit.is_fts);
    CHECK(r_sit.worst_tau == 4);

    auto lie = models::lie_to_sit();
    auto r_lie = check_fts(lie.bt, lie.spec, domain);
    CHECK(r_lie.is_fts);
    CHECK(r_lie.worst_tau == 10);

    auto chain = models::standing_fallback();
    auto r_chain = check_fts(chain.bt, chain.spec, domain);
    CHECK(r_chain.is_fts);
    CHECK(r_chain.worst_tau == 19);
    CHECK(r_chain.worst_tau <= 24);
}

TEST_CASE("a stationary system outside success is reported with a witness") {
    StateSpaceBT still;
    still.name = "still";
    still.dim = 1;
    still.dt = 1.0;
    still.f = [](const Vec& x) { return x; };
    still.r = [](const Vec& x) { return x[0] >= 1.0 ? Status::Success : Status::Running; };
    RegionSpec spec;
    spec.success = [](const Vec& x) { return x[0] >= 1.0; };
    spec.failure = nullptr;
    spec.running = [](const Vec& x) { return x[0] < 1.0; };
    spec.attraction = spec.running;
    spec.tau = 5.0;
    auto report = check_fts(still, spec, SampledDomain::grid({0.0}, {2.0}, {9}));
    CHECK_FALSE(report.is_fts);
    CHECK_FALSE(report.witnesses.empty());

    spec.tau = std::nullopt;
    CHECK_THROWS_AS(check_fts(still, spec, SampledDomain::grid({0.0}, {2.0}, {9})),
                    std::invalid_argument);
}

TEST_CASE("sequence lemma desk instance: equality hypothesis and chained bound") {
    // first stage lifts the state from [0,1) to >= 1; second from [1,3) to >= 3
    auto t1 = line_system("t1", 0.0, 1.0);
    auto t2 = line_system("t2", -1e9, 3.0);
    RegionSpec s1;
    s1.success = [](const Vec& x) { return x[0] >= 1.0 - 1e-9; };
    s1.failure = [](const Vec& x) { return x[0] < 0.0 - 1e-9; };
    s1.running = [](const Vec& x) { return x[0] >= 0.0 - 1e-9 && x[0] < 1.0 - 1e-9; };
    s1.attraction = s1.running;
    s1.tau = 2.0;
    RegionSpec s2;
    s2.success = [](const Vec& x) { return x[0] >= 3.0 - 1e-9; };
    s2.failure = nullptr;
    s2.running = [](const Vec& x) { return x[0] < 3.0 - 1e-9; };
    s2.attraction = [](const Vec& x) { return x[0] >= 1.0 - 1e-9 && x[0] < 3.0 - 1e-9; };
    s2.tau = 4.0;
    auto domain = SampledDomain::grid({0.0}, {3.5}, {29});

    auto report =
        check_composition_lemma(CompositionKind::Sequence, t1, s1, t2, s2, domain);
    CHECK(report.child1_fts);
    CHECK(report.child2_fts);
    CHECK(report.hypotheses_hold);
    CHECK(report.conclusion_holds);
    CHECK(report.tau0 == 6.0);

    SUBCASE("breaking the equality is caught with a witness") {
        RegionSpec broken = s1;
        broken.success = [](const Vec& x) { return x[0] >= 0.5 - 1e-9; };
        broken.running = [](const Vec& x) { return x[0] >= 0.0 - 1e-9 && x[0] < 0.5 - 1e-9; };
        broken.attraction = broken.running;
        auto bad = check_composition_lemma(CompositionKind::Sequence, t1, broken, t2, s2, domain);
        CHECK_FALSE(bad.hypotheses_hold);
        CHECK_FALSE(bad.hypothesis_witnesses.empty());
    }
}

TEST_CASE("fallback lemma holds for the adjacent posture pairs and the full chain") {
    auto domain = models::humanoid_domain(50);
    auto walk = models::walk_home(), sit = models::sit_to_stand(), lie = models::lie_to_sit();

    auto pair_ws = check_composition_lemma(CompositionKind::Fallback, walk.bt, walk.spec,
                                           sit.bt, sit.spec, domain);
    CHECK(pair_ws.hypotheses_hold);
    CHECK(pair_ws.conclusion_holds);
    CHECK(pair_ws.tau0 == 14.0);

    auto pair_sl = check_composition_lemma(CompositionKind::Fallback, sit.bt, sit.spec, lie.bt,
                                           lie.spec, domain);
    CHECK(pair_sl.hypotheses_hold);
    CHECK(pair_sl.conclusion_holds);
    CHECK(pair_sl.tau0 == 14.0);

    // nested application: treat Fallback(walk, sit) as the first system with
    // the bound and regions the pairwise lemma just established
    StateSpaceBT ws = compose_fallback(walk.bt, sit.bt);
    RegionSpec ws_spec;
    ws_spec.success = pair_ws.success0;
    ws_spec.failure = nullptr;
    ws_spec.running = [s0 = pair_ws.success0](const Vec& x) { return !s0(x); };
    ws_spec.attraction = pair_ws.attraction0;
    ws_spec.tau = pair_ws.tau0;
    auto full = check_composition_lemma(CompositionKind::Fallback, ws, ws_spec, lie.bt, lie.spec,
                                        domain);
    CHECK(full.hypotheses_hold);
    CHECK(full.conclusion_holds);
    CHECK(full.tau0 == 24.0);
}

TEST_CASE("parallel lemma desk instances: min and max bounds") {
    auto domain = SampledDomain::grid({0.0, 0.0}, {1.2, 1.2}, {13, 13});
    auto a = climber("a", 0, 1.0, 1.0);  // resolves in one step from [0,1)
    auto b = climber("b", 1, 1.0, 1.0);
    RegionSpec sa;
    sa.success = [](const Vec& x) { return x[0] >= 1.0 - 1e-9; };
    sa.failure = nullptr;
    sa.running = [](const Vec& x) { return x[0] < 1.0 - 1e-9; };
    sa.attraction = [](const Vec& x) { return x[0] >= 0.0 && x[0] < 1.0 - 1e-9; };
    sa.tau = 1.0;
    RegionSpec sb;
    sb.success = [](const Vec& x) { return x[1] >= 1.0 - 1e-9; };
    sb.failure = nullptr;
    sb.running = [](const Vec& x) { return x[1] < 1.0 - 1e-9; };
    sb.attraction = [](const Vec& x) { return x[1] >= 0.0 && x[1] < 1.0 - 1e-9; };
    sb.tau = 1.0;

    auto m1 = check_composition_lemma(CompositionKind::Parallel, a, sa, b, sb, domain, 1, {0});
    CHECK(m1.hypotheses_hold);
    CHECK(m1.conclusion_holds);
    CHECK(m1.tau0 == 1.0);

    auto m2 = check_composition_lemma(CompositionKind::Parallel, a, sa, b, sb, domain, 2, {0});
    CHECK(m2.hypotheses_hold);
    CHECK(m2.conclusion_holds);
    CHECK(m2.tau0 == 1.0);

    SUBCASE("the M=1 bound is the faster child's bound") {
        auto slow = climber("slow", 1, 0.25, 1.0);
        RegionSpec ss = sb;
        ss.tau = 4.0;
        auto r = check_composition_lemma(CompositionKind::Parallel, a, sa, slow, ss, domain, 1,
                                         {0});
        CHECK(r.hypotheses_hold);
        CHECK(r.conclusion_holds);
        CHECK(r.tau0 == 1.0);
    }
}

TEST_CASE("battery safety: collar inside I and no sampled trajectory drains to zero") {
    auto power = models::guarantee_power();
    auto task = models::do_other_task();
    auto domain = models::battery_domain(12);

    auto report = check_safety(power.bt, power.spec, task.bt, models::battery_obstacle(),
                               models::battery_invariant(), models::kBatteryMargin, domain,
                               2000);
    CHECK(report.margin_ok);
    CHECK(report.trajectories_ok);
    CHECK(report.safe);
    CHECK(report.max_step == doctest::Approx(std::sqrt(1.0 + 0.01)).epsilon(1e-6));

    SUBCASE("the published trajectory start stays charged above zero") {
        auto composed = compose_sequence(power.bt, task.bt);
        Vec x{80.0, 50.0};
        double min_battery = x[1];
        for (int k = 0; k < 10000; ++k) {
            x = composed.f(x);
            min_battery = std::min(min_battery, x[1]);
        }
        CHECK(min_battery > 0.0);
        CHECK(min_battery == doctest::Approx(15.0).epsilon(1e-6));
    }
    SUBCASE("a margin too small for the task's stride is an error") {
        try {
            check_safety(power.bt, power.spec, task.bt, models::battery_obstacle(),
                         models::battery_invariant(), 0.5, domain, 10);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::StepLengthViolated);
        }
    }
    SUBCASE("shrinking I breaks the collar condition") {
        Predicate tight = [](const Vec& x) { return x[1] >= 40.0; };
        auto bad = check_safety(power.bt, power.spec, task.bt, models::battery_obstacle(), tight,
                                models::kBatteryMargin, domain, 10);
        CHECK_FALSE(bad.margin_ok);
        CHECK_FALSE(bad.margin_witnesses.empty());
    }
}

TEST_CASE("chattering indicator matches analytic directional derivatives") {
    ScalarField s = [](const Vec& x) { return 3 * x[0] * x[0] + 2 * x[1] * x[1] - x[0] * x[1]; };
    StateSpaceBT f1, f2;
    f1.dim = f2.dim = 2;
    f1.f = [](const Vec& x) { return Vec{x[0] + 0.3, x[1] - 0.2}; };
    f2.f = [](const Vec& x) { return Vec{x[0] - 0.1, x[1] + 0.5}; };
    Vec x{0.7, -1.2};
    Vec grad{6 * x[0] - x[1], 4 * x[1] - x[0]};
    auto r = chattering_indicator(x, s, f1, f2, 1e-4);
    CHECK(r.lambda1 == doctest::Approx(grad[0] * 0.3 + grad[1] * -0.2).epsilon(1e-6));
    CHECK(r.lambda2 == doctest::Approx(grad[0] * -0.1 + grad[1] * 0.5).epsilon(1e-6));
}

TEST_CASE("opposed fields across the boundary alternate every step") {
    // index 1 owns the negative side of s; both fields point across the surface
    ScalarField s = [](const Vec& x) { return x[0]; };
    StateSpaceBT up, down;
    up.dim = down.dim = 1;
    up.f = [](const Vec& x) { return Vec{x[0] + 0.1}; };
    down.f = [](const Vec& x) { return Vec{x[0] - 0.1}; };

    auto r = chattering_indicator({0.0}, s, up, down, 1e-6);
    CHECK(r.lambda1 == doctest::Approx(0.1));
    CHECK(r.lambda2 == doctest::Approx(-0.1));
    CHECK_FALSE(r.chatter_free);

    // simulate the switched system: "up" active on s < 0, "down" on s >= 0
    Vec x{0.05};
    int switches = 0;
    bool was_negative = false;
    for (int k = 0; k < 10; ++k) {
        x = x[0] < 0 ? up.f(x) : down.f(x);
        bool negative = x[0] < 0;
        if (k > 0 && negative != was_negative) ++switches;
        was_negative = negative;
    }
    CHECK(switches == 9);  // ping-pong on every step after the first

    SUBCASE("a field retreating from the surface is chatter-free") {
        auto ok = chattering_indicator({0.0}, s, down, down, 1e-6);
        CHECK(ok.chatter_free);
        Vec y{-0.05};
        int crossings = 0;
        for (int k = 0; k < 10; ++k) {
            y = y[0] < 0 ? down.f(y) : up.f(y);
            if (y[0] >= 0) ++crossings;
        }
        CHECK(crossings == 0);
    }
    SUBCASE("a flat surface has no usable gradient") {
        ScalarField flat = [](const Vec&) { return 7.0; };
        try {
            chattering_indicator({0.0}, flat, up, down, 1e-6);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::DegenerateGradient);
        }
    }
}
