#include "repcomm/bounds.hpp"

#include <doctest.h>

#include <cmath>

using namespace repcomm;

namespace {
GameParams baseline() { return GameParams{}; }

GameParams with_costs(std::vector<double> costs) {
    GameParams g;
    g.costs = std::move(costs);
    g.prior.assign(g.costs.size(), 1.0 / static_cast<double>(g.costs.size()));
    return g;
}
}  // namespace

TEST_CASE("highest equilibrium payoff") {
    auto v = v_star(baseline());
    CHECK(v[0] == doctest::Approx(0.25));
    CHECK(v[1] == doctest::Approx(0.35));

    auto near = v_star(with_costs({1 - 1e-9, 0.2}));
    CHECK(near[1] == doctest::Approx(0.45).epsilon(1e-7));
    CHECK_THROWS_AS(v_star(with_costs({1.5, 0.2})), ValidationError);
}

TEST_CASE("entry 1 of the highest payoff is p_h exactly") {
    for (int a = 1; a <= 9; ++a) {
        GameParams g = with_costs({a / 10.0, 0.0});
        g.p_h = 0.05 * a;
        auto P = exact(g);
        CHECK(v_star(P)[0] == P.p_h);
        CHECK(v_dagger(P)[0] == P.p_h);
    }
}

TEST_CASE("commitment payoff") {
    GameParams g = baseline();
    auto vv = v_star_star(g);
    CHECK(vv[1] == doctest::Approx(0.45));
    auto P = exact(with_costs({0.9, 0.0}));
    auto e = v_star_star(P);
    CHECK(e[1] == 2 * P.p_h);
    Primitives<Rational> one{P.p_h, {Rational(1)}};
    CHECK(v_star_star(one)[0] == P.p_h);
}

TEST_CASE("consequentialist bound") {
    auto v = v_dagger(baseline());
    CHECK(v[0] == doctest::Approx(0.25));
    CHECK(v[1] == doctest::Approx(0.30));
}

TEST_CASE("ordering v_star > v_dagger > p_h beyond entry 1") {
    auto a = v_star(baseline());
    auto b = v_dagger(baseline());
    CHECK(a[1] > b[1]);
    CHECK(b[1] > 0.25);
}

TEST_CASE("ethical bounds") {
    auto e1 = ethical_bounds<double>(0.25, 1.5, 1.5);
    CHECK(e1.vbar == doctest::Approx(0.125));
    CHECK(e1.vunder == doctest::Approx(0.0));
    auto e2 = ethical_bounds<double>(0.25, 4.0, 1.5);
    CHECK(e2.vbar == doctest::Approx(0.125));
    CHECK(e2.vunder == doctest::Approx(0.125));
    auto e3 = ethical_bounds<double>(0.25, 2.0, 2.0);
    CHECK(e3.vbar == doctest::Approx(0.0));
    CHECK(e3.vunder == doctest::Approx(0.0));
    CHECK_THROWS_AS(ethical_bounds<double>(0.25, 2.0, 0.5), ValidationError);
}

TEST_CASE("commitment attainability") {
    auto a = commitment_attainable(with_costs({1.5, 0.5}));
    CHECK(a.attainable);
    REQUIRE(a.witness.has_value());
    CHECK(*a.witness == doctest::Approx(1.5));

    CHECK_FALSE(commitment_attainable(with_costs({4.0, 0.5})).attainable);
    CHECK(commitment_attainable(with_costs({2.0, 1.0, 0.5})).attainable);

    auto none = commitment_attainable(baseline());
    CHECK_FALSE(none.attainable);
    CHECK(none.reason.find("no ethical type") != std::string::npos);

    CHECK_THROWS_AS(commitment_attainable(with_costs({2.0, 2.0, 0.5})), ValidationError);
}

TEST_CASE("v(rho) and the target mixture") {
    GameParams g = baseline();
    auto v0 = v_of_rho(g, 0.0);
    CHECK(v0[0] == doctest::Approx(0.25));
    CHECK(v0[1] == doctest::Approx(0.25));

    auto P = exact(g);
    Rational rs = P.rho_star();
    auto vt = v_target(P, rs);
    auto vs = v_star(P);
    CHECK(vt[0] == vs[0]);
    CHECK(vt[1] == vs[1]);

    auto printed = v_of_rho(g, 1.0 / 3.0);
    CHECK(printed[0] == doctest::Approx(0.1875));
    CHECK(printed[1] == doctest::Approx(0.30));

    auto w = target_weights(P, rs);
    CHECK(w[0] == Rational(5, 9));
    CHECK(w[1] == Rational(5, 18));
    CHECK(w[2] == Rational(1, 6));
    CHECK_THROWS_AS(v_target(g, 0.5), ValidationError);
}

TEST_CASE("target entry 1 stays at p_h for every rho") {
    auto P = exact(baseline());
    for (int i = 0; i <= 10; ++i) {
        Rational rho = P.rho_star() * Rational(i, 10);
        CHECK(v_target(P, rho)[0] == P.p_h);
    }
}

TEST_CASE("polytope vertices") {
    auto P = exact(baseline());
    auto poly = polytope(P);
    CHECK(poly.vstar[0] == Rational(1, 4));
    CHECK(poly.vstar[1] == Rational(7, 20));
    CHECK(poly.vbar[0] == 0);
    CHECK(poly.vbar[1] == Rational(3, 20));
    CHECK(poly.vunder[0] == 0);
    CHECK(poly.vunder[1] == Rational(9, 100));
    CHECK(poly.p_star == Rational(3, 5));
    CHECK(poly.q_star == Rational(1, 2));
}

TEST_CASE("punishment payoff w(rho')") {
    GameParams g = with_costs({1.5, 0.5});
    auto P = exact(g);
    Rational rs = P.rho_star();
    auto lo = w_of_rho_prime(P, rs);
    CHECK(lo[0] == 0);
    CHECK(lo[1] == Rational(1, 10));
    auto hi = w_of_rho_prime(g, 1.0);
    CHECK(hi[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(hi[1] == doctest::Approx(0.1875 / 1.375));

    auto wts = punish_weights(P, Rational(1));
    CHECK(wts[0] == Rational(9, 11));
    CHECK(wts[1] == 0);
    CHECK(wts[2] == Rational(2, 11));

    CHECK_THROWS_AS(w_of_rho_prime(g, 0.2), ValidationError);
    CHECK_THROWS_AS(w_of_rho_prime(g, 1.1), ValidationError);
}

TEST_CASE("w(rho') entries beyond the first increase in rho'") {
    auto P = exact(with_costs({2.0, 1.5, 0.5, 0.1}));
    Rational rs = P.rho_star();
    auto prev = w_of_rho_prime(P, rs);
    for (int i = 1; i <= 20; ++i) {
        Rational r = rs + (Rational(1) - rs) * Rational(i, 20);
        auto cur = w_of_rho_prime(P, r);
        CHECK(cur[0] == 0);
        for (std::size_t j = 1; j < cur.size(); ++j) CHECK(cur[j] > prev[j]);
        prev = cur;
    }
}

TEST_CASE("persuasion limit is approached monotonically") {
    GameParams g = baseline();
    double prev = 1.0;
    for (double e : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
        g.costs = {1 - e, 0.2};
        double gap = std::abs(v_star(g)[1] - v_star_star(g)[1]);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev <= 1e-5);
}
