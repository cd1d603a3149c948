#include "repcomm/punishment_machine.hpp"
#include "repcomm/verifier.hpp"

#include <doctest.h>

using namespace repcomm;

namespace {
GameParams ethical(std::vector<double> costs, double delta = 0.999) {
    GameParams g;
    g.costs = std::move(costs);
    g.prior.assign(g.costs.size(), 1.0 / static_cast<double>(g.costs.size()));
    g.delta = delta;
    return g;
}
}  // namespace

TEST_CASE("class 2 split count") {
    CHECK(class2_k({0.3, 0.3, 0.4}, 0, 1.0 / 3.0) == 1);
    CHECK(class2_k({0.8, 0.1, 0.1}, 0, 1.0 / 3.0) == 2);
}

TEST_CASE("initial weights deliver w(rho')") {
    GameParams g = ethical({1.5, 0.5});
    PunishmentMachine m(g, 1.0);
    auto s = m.initial_state();
    CHECK(s.w[0] == doctest::Approx(9.0 / 11.0));
    CHECK(s.w[1] == doctest::Approx(0.0));
    CHECK(s.w[2] == doctest::Approx(2.0 / 11.0));

    PunishmentMachine m6(g, 0.6);
    auto v = m6.value(m6.initial_state());
    auto w = w_of_rho_prime(g, 0.6);
    CHECK(v[0] == doctest::Approx(w[0]).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(w[1]));

    CHECK_THROWS_AS(PunishmentMachine(g, 0.2), ValidationError);
}

TEST_CASE("high-state outcomes leave class 1 untouched") {
    GameParams g = ethical({1.5, 0.5});
    PunishmentMachine m(g, 0.6);
    auto s = m.initial_state();
    REQUIRE(s.phase == PunishPhase::Class1);
    s = m.step(s, Omega::l, Message::h);
    REQUIRE(s.phase == PunishPhase::Class1);
    auto hh = m.step(s, Omega::h, Message::h);
    CHECK(hh.w == s.w);
    CHECK(m.zeta(hh) == m.zeta(s));
}

TEST_CASE("off-path messages restart the punishment") {
    GameParams g = ethical({1.5, 0.5});
    PunishmentMachine m(g, 0.6);
    auto s = m.step(m.initial_state(), Omega::l, Message::h);
    Prescription p = m.prescribe(s);
    REQUIRE(p.lie_in_h[0] == 0.0);
    REQUIRE(p.lie_in_h[1] == 0.0);
    auto r = m.step(s, Omega::h, Message::l);
    auto init = m.initial_state();
    CHECK(r.w == init.w);
    CHECK(r.phase == init.phase);
}

TEST_CASE("local conditions along punishment paths") {
    GameParams g = ethical({1.5, 0.5});
    PunishmentMachine m(g, 0.6);
    for (std::size_t j = 0; j < 2; ++j) {
        SimConfig c;
        c.horizon = 3000;
        c.paths = 100;
        c.seed = 11;
        c.fixed_type = j;
        StateCheckObserver<PunishmentMachine> obs(m);
        run(m, m.initial_state(), c, obs);
        auto rep = obs.report();
        INFO(rep.summary());
        CHECK(rep.all_pass());
    }
}

TEST_CASE("rho' selection") {
    GameParams g = ethical({1.5, 0.5});
    auto rp = select_rho_prime(g, 0.3);
    REQUIRE(rp.has_value());
    CHECK(*rp > g.rho_star());
    CHECK(*rp <= 1.0);
    Basis b = profile_vectors(g);
    double v2 = 0.3 * b.vL[1] + 0.7 * b.vH[1];
    CHECK(w_of_rho_prime(g, *rp)[1] < v2);

    CHECK_THROWS_AS(select_rho_prime(ethical({0.5, 0.2}), 0.3), ValidationError);
    CHECK_THROWS_AS(select_rho_prime(ethical({4.0, 0.5}), 0.3), ValidationError);
}

TEST_CASE("composite signaling rule") {
    GameParams g = ethical({4.0, 1.5, 0.5});
    CompositeMachine m(g, 0.3);
    CHECK(m.cstar_index() == 1);
    CHECK_FALSE(m.sends_high_at_signal(0));
    CHECK(m.sends_high_at_signal(1));
}

TEST_CASE("composite alternation tracks the target frequency") {
    GameParams g = ethical({1.5, 0.5});
    CompositeMachine m(g, 0.3);
    const double target = 0.4, d = g.delta;
    double r = target, achieved = 0.0, disc = 1.0;
    for (int t = 0; t < 20000; ++t) {
        bool trust = m.alternation_trusts(r, target);
        double x = trust ? 1.0 : 0.0;
        achieved += (1.0 - d) * disc * x;
        disc *= d;
        r = (r - (1.0 - d) * x) / d;
    }
    CHECK(achieved == doctest::Approx(target).epsilon(1e-6));
}

TEST_CASE("composite local conditions for the nonethical types") {
    GameParams g = ethical({1.5, 0.5});
    CompositeMachine m(g, 0.3);
    SimConfig c;
    c.horizon = 3000;
    c.paths = 100;
    c.seed = 5;
    c.fixed_type = 1;
    StateCheckObserver<CompositeMachine> obs(m);
    run(m, m.initial_state(), c, obs);
    auto rep = obs.report();
    INFO(rep.summary());
    CHECK(rep.find("receiver_best_reply")->pass());
    CHECK(rep.find("promise_keeping")->pass());
    CHECK(rep.find("belief_martingale")->pass());
    CHECK(rep.find("incentive_indifference")->pass());
}
