#include "repcomm/equilibrium_machine.hpp"
#include "repcomm/verifier.hpp"

#include <doctest.h>

using namespace repcomm;

namespace {
GameParams three_types() {
    GameParams g;
    g.costs = {0.5, 0.3, 0.2};
    g.prior = {0.4, 0.3, 0.3};
    return g;
}
}  // namespace

TEST_CASE("derived constants") {
    GameParams g;
    g.delta = 0.9;
    auto k = derive_constants(g, 0.3);
    CHECK(k.delta_hat_q == Rational(27, 31));
    CHECK(k.K == 2);
    CHECK(k.n_num == 7);
    CHECK(k.l_den == 22);
    CHECK(k.rho < static_cast<double>(k.n_num) / static_cast<double>(k.l_den));
    CHECK(k.rho_tilde < k.rho_hat);
    CHECK(k.rho_hat < k.rho_star);
    CHECK(k.eta_star == doctest::Approx(1.0 / 3.0));
    CHECK(k.lambda > 0.0);
    CHECK(growth_factor(k.lambda_root, k.rho_star, k.rho_hat) == doctest::Approx(1.0).epsilon(1e-9));

    auto k3 = derive_constants(three_types(), 0.3);
    CHECK(k3.k[2] == 2);

    CHECK_THROWS_AS(derive_constants(g, 1.0 / 3.0), ValidationError);
    CHECK_THROWS_AS(derive_constants(g, -0.1), ValidationError);
}

TEST_CASE("reputation growth factor") {
    CHECK(growth_factor(0.05, 1.0 / 3.0, 0.3) == doctest::Approx(1.00140).epsilon(1e-5));
    CHECK(growth_factor(0.05, 1.0 / 3.0, 0.4) == doctest::Approx(0.99636).epsilon(1e-5));
}

TEST_CASE("sustainability factor crosses 1 once, at rho*") {
    const double rs = 1.0 / 3.0, lam = 0.05;
    int crossings = 0;
    double prev = growth_factor(lam, rs, 0.0);
    for (int i = 1; i <= 1000; ++i) {
        double cur = growth_factor(lam, rs, i / 1000.0);
        if ((prev - 1.0) * (cur - 1.0) < 0.0) ++crossings;
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK(crossings == 1);
}

TEST_CASE("class 1 belief update") {
    DerivedConstants k;
    k.eta_star = 0.1;
    k.lambda = 0.05;
    k.rho_star = 1.0 / 3.0;
    auto [lh, ll] = belief_update_class1(k, 0.5);
    CHECK(lh == doctest::Approx(0.486667).epsilon(1e-6));
    CHECK(ll == doctest::Approx(0.506667).epsilon(1e-6));

    auto [a, b] = belief_update_class1(k, 0.1);
    CHECK(a == doctest::Approx(0.1));
    CHECK(b == doctest::Approx(0.1));

    CHECK(belief_update_class1(k, 0.999).second <= 1.0);
}

TEST_CASE("mixing from posteriors") {
    Mixing x = mixing_from_posteriors(0.5, 0.5 - 0.04 / 3.0, 0.5 + 0.02 / 3.0);
    CHECK(x.x1 == doctest::Approx(0.675556).epsilon(1e-5));
    CHECK(x.x2 == doctest::Approx(0.657778).epsilon(1e-5));

    Mixing capped = mixing_from_posteriors(0.9, 0.85, 1.0);
    CHECK(capped.x2 == doctest::Approx(0.0));

    CHECK_THROWS_AS(mixing_from_posteriors(0.5, 0.6, 0.7), NonBayesian);
}

TEST_CASE("initial weights") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    auto t = m.preset_weights(Preset::Target);
    auto P = exact(g);
    auto tw = target_weights(P, to_rational(0.3));
    for (int i = 0; i < 3; ++i) CHECK(t[i] == doctest::Approx(tw[i].get_d()));

    auto pw = printed_weights(P, P.rho_star());
    CHECK(pw[0] == Rational(1, 2));
    CHECK(pw[1] == Rational(1, 4));
    CHECK(pw[2] == Rational(1, 4));

    EquilibriumMachine m0(g, 0.0);
    auto s0 = m0.initial_state();
    CHECK(s0.w[0] == doctest::Approx(1.0));
    CHECK(s0.phase == Phase::Absorbing);
    CHECK(m0.absorbing_honest(s0));

    CHECK_THROWS_AS(m.initial_state({0.5, 0.6, -0.1}), ValidationError);
}

TEST_CASE("initial value equals the target payoff") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    auto v = m.value(m.initial_state());
    auto vt = v_target(g, 0.3);
    CHECK(v[0] == doctest::Approx(vt[0]));
    CHECK(v[1] == doctest::Approx(vt[1]));
    CHECK(v[0] == doctest::Approx(g.p_h));
}

TEST_CASE("class 1 transitions") {
    GameParams g;
    g.delta = 0.9;
    EquilibriumMachine m(g, 0.3);
    auto s = m.initial_state({0.5, 0.25, 0.25});
    REQUIRE(s.phase == Phase::Class1);

    auto hh = m.step(s, Omega::h, Message::h);
    CHECK(hh.w == s.w);
    CHECK(hh.eta() == s.eta());

    auto lh = m.step(s, Omega::l, Message::h);
    CHECK(lh.w[0] == doctest::Approx(0.574074).epsilon(1e-6));
    CHECK(lh.w[1] == doctest::Approx(0.138889).epsilon(1e-6));
    CHECK(lh.w[2] == doctest::Approx(0.287037).epsilon(1e-6));
}

TEST_CASE("class 1 prescription") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    auto s = m.initial_state();
    REQUIRE(s.phase == Phase::Class1);
    Prescription p = m.prescribe(s);
    CHECK(p.receiver == ReceiverAction::Trust);
    auto [lh, ll] = belief_update_class1(m.constants(), s.eta());
    Mixing x = mixing_from_posteriors(s.eta(), lh, ll);
    CHECK(p.lie_in_l[0] == doctest::Approx(1.0 - x.x1));
    CHECK(p.lie_in_l[1] == doctest::Approx(1.0 - x.x2));
    CHECK(p.lie_in_h[0] == 0.0);
    CHECK(p.lie_in_h[1] == 0.0);
}

TEST_CASE("capped reputation makes the low-cost type lie for sure") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    EqState s = m.initial_state();
    s.post[0] = 0.995;
    s.post[1] = 0.005;
    REQUIRE(belief_update_class1(m.constants(), s.eta()).second == doctest::Approx(1.0));
    Prescription p = m.prescribe(s);
    CHECK(p.lie_in_l[1] == doctest::Approx(1.0));
}

TEST_CASE("rebounding prescription") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    EqState s = m.initial_state();
    s.phase = Phase::Rebounding;
    Prescription p = m.prescribe(s);
    CHECK(p.receiver == ReceiverAction::NeverTrust);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(p.lie_in_l[j] == 1.0);
        CHECK(p.lie_in_h[j] == 0.0);
    }
}

TEST_CASE("class 2 lie probabilities") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    EqState s = m.initial_state();
    s.phase = Phase::Class2;
    s.low = 1;
    s.post[0] = 0.5;
    s.post[1] = 0.5;
    CHECK(m.prescribe(s).lie_in_l[1] == doctest::Approx(2.0 / 3.0));
    CHECK(m.prescribe(s).lie_in_l[0] == 0.0);

    EquilibriumMachine m3(three_types(), 0.3);
    EqState t = m3.initial_state();
    t.phase = Phase::Class2;
    t.low = 2;
    t.counter = 1;
    CHECK(m3.prescribe(t).lie_in_l[2] == doctest::Approx(1.0));
}

TEST_CASE("local equilibrium conditions at the initial state") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    auto r = state_residuals(m, m.initial_state());
    CHECK(r.receiver_br <= 1e-9);
    CHECK(r.incentive <= 1e-9);
    CHECK(r.promise <= 1e-9);
    CHECK(r.martingale <= 1e-12);
}

TEST_CASE("phase names and presets") {
    CHECK(to_string(Phase::Rebounding) == "Rebounding");
    CHECK(parse_preset("printed") == Preset::Printed);
    CHECK(parse_preset("target") == Preset::Target);
    CHECK_THROWS_AS(parse_preset("x"), ValidationError);
}
