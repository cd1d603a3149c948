#include "repcomm/equilibrium_machine.hpp"
#include "repcomm/occupation_lp.hpp"
#include "repcomm/simulator.hpp"

#include <doctest.h>

#include <cmath>

using namespace repcomm;

namespace {
struct ProfileObserver : NullObserver<EqState> {
    explicit ProfileObserver(double delta) : acc(delta) {}
    void begin_path(std::size_t, std::size_t) { acc.begin_path(); }
    void on_step(std::size_t, std::size_t, const EqState&, const Prescription& p, Omega, Message, SenderAction a,
                 double, const EqState&) {
        acc.add(a, p.receiver);
        if (a != SenderAction::Honest || p.receiver != ReceiverAction::Trust) all_honest_trust = false;
    }
    void end_path(std::size_t, std::size_t, double) { acc.end_path(); }
    OccupationAccumulator acc;
    bool all_honest_trust = true;
};
}  // namespace

TEST_CASE("full honesty pays p_h") {
    GameParams g;
    EquilibriumMachine m(g, 0.0);
    SimConfig c;
    c.horizon = 2000;
    c.paths = 2000;
    c.seed = 17;
    ProfileObserver obs(g.delta);
    auto ens = run(m, m.initial_state(), c, obs);
    CHECK(obs.all_honest_trust);
    double expect = g.p_h * (1.0 - std::pow(g.delta, 2000.0));
    for (const auto& s : ens.per_type) {
        REQUIRE(s.count > 0);
        CHECK(std::abs(s.mean - expect) <= 3.0 * s.stderr_());
    }
}

TEST_CASE("identical seeds give identical ensembles") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    SimConfig c;
    c.horizon = 500;
    c.paths = 50;
    c.seed = 99;
    c.keep_traces = true;
    auto a = run(m, m.initial_state(), c);
    auto b = run(m, m.initial_state(), c);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(a.per_type[j].count == b.per_type[j].count);
        CHECK(a.per_type[j].mean == b.per_type[j].mean);
        CHECK(a.per_type[j].m2 == b.per_type[j].m2);
    }
    for (std::size_t p = 0; p < a.traces.size(); ++p) CHECK(a.traces[p].discounted == b.traces[p].discounted);

    c.paths = 1;
    auto first = run(m, m.initial_state(), c);
    CHECK(first.traces[0].discounted == a.traces[0].discounted);

    c.seed = 100;
    auto other = run(m, m.initial_state(), c);
    CHECK(other.traces[0].discounted != a.traces[0].discounted);
}

TEST_CASE("highest-cost type earns at most p_h") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    SimConfig c;
    c.horizon = 3000;
    c.paths = 2000;
    c.seed = 4;
    c.fixed_type = 0;
    auto ens = run(m, m.initial_state(), c);
    const auto& s = ens.per_type[0];
    CHECK(s.mean <= g.p_h + 3.0 * s.stderr_());
}

TEST_CASE("occupation measure of the constructed equilibrium") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    SimConfig c;
    c.horizon = 3000;
    c.paths = 2000;
    c.seed = 8;
    c.fixed_type = 1;
    ProfileObserver obs(g.delta);
    run(m, m.initial_state(), c, obs);
    auto gm = obs.acc.measure();
    const int H = 0, L = 1, T = 0, N = 1;
    CHECK(gm[H][T] + gm[L][T] + gm[L][N] >= 0.99);
    double u1 = 0.0;
    for (SenderAction a : kSenderActions)
        for (ReceiverAction b : kReceiverActions)
            u1 += gm[static_cast<int>(a)][static_cast<int>(b)] * sender_stage_payoff(g, g.costs[0], a, b);
    CHECK(u1 <= g.p_h + 0.02);
}

TEST_CASE("simulation input validation") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    SimConfig c;
    c.horizon = 0;
    CHECK_THROWS_AS(run(m, m.initial_state(), c), ValidationError);
    c.horizon = 10;
    c.fixed_type = 5;
    CHECK_THROWS_AS(run(m, m.initial_state(), c), ValidationError);
}

TEST_CASE("truncation bound") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    SimConfig c;
    c.horizon = 3000;
    c.paths = 1;
    auto ens = run(m, m.initial_state(), c);
    CHECK(ens.tail_bound == doctest::Approx(std::pow(0.99, 3000.0) * 1.5));
    CHECK(ens.tail_bound < 1e-12);
}
