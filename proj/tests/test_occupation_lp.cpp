#include "repcomm/occupation_lp.hpp"

#include <doctest.h>

using namespace repcomm;

namespace {
constexpr int H = static_cast<int>(SenderAction::Honest);
constexpr int L = static_cast<int>(SenderAction::AlwaysHigh);
constexpr int T = static_cast<int>(ReceiverAction::Trust);
constexpr int N = static_cast<int>(ReceiverAction::NeverTrust);
constexpr int O = static_cast<int>(ReceiverAction::Oppose);

GameParams costs(std::vector<double> c) {
    GameParams g;
    g.costs = std::move(c);
    g.prior.assign(g.costs.size(), 1.0 / static_cast<double>(g.costs.size()));
    return g;
}
}  // namespace

TEST_CASE("highest payoff program at baseline") {
    auto r = solve_exact(GameParams{}, {Program::ThmOne, 1});
    REQUIRE(r.feasible);
    CHECK(r.value == Rational(7, 20));
    CHECK(r.gamma[L][T] == Rational(5, 18));
    CHECK(r.gamma[H][T] == Rational(5, 9));
    // NeverTrust and Oppose both answer h with L, so the optimum can split the last 1/6 between them.
    CHECK(r.gamma[L][N] + r.gamma[L][O] == Rational(1, 6));

    auto r1 = solve_exact(GameParams{}, {Program::ThmOne, 0});
    CHECK(r1.value == Rational(1, 4));
}

TEST_CASE("the NeverTrust optimizer is feasible with the same value") {
    GameParams g;
    JointDistribution<double> gamma{};
    gamma[H][T] = 10.0 / 18.0;
    gamma[L][T] = 5.0 / 18.0;
    gamma[L][N] = 1.0 / 6.0;
    auto rep = check_feasible(gamma, g, 0.0);
    CHECK(rep.feasible);
    CHECK(rep.sender_c1_slack == doctest::Approx(0.0).epsilon(1e-12));
    double v2 = 0.0;
    for (int a : {H, L})
        for (int b : {T, N})
            v2 += gamma[a][b] * sender_stage_payoff(g, 0.2, static_cast<SenderAction>(a), static_cast<ReceiverAction>(b));
    CHECK(v2 == doctest::Approx(0.35));
}

TEST_CASE("consequentialist program") {
    GameParams g;
    g.view = View::Consequentialist;
    auto r = solve_exact(g, {Program::ThmOne, 1});
    CHECK(r.value == Rational(3, 10));
}

TEST_CASE("float mode agrees with rational mode") {
    GameParams g = costs({0.7, 0.4, 0.1});
    g.p_h = 0.35;
    for (std::size_t j = 0; j < 3; ++j) {
        auto a = solve(g, {Program::ThmOne, j});
        auto b = solve_exact(g, {Program::ThmOne, j});
        CHECK(a.value == doctest::Approx(b.value.get_d()).epsilon(1e-12));
    }
}

TEST_CASE("relaxed program family") {
    auto v = solve_eps_family(GameParams{}, 1, {0.1, 0.01, 0.001, 0.0});
    REQUIRE(v.size() == 4);
    CHECK(v[0] >= 0.35);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] <= v[i - 1]);
    CHECK(v[3] == doctest::Approx(0.35));
    CHECK(std::abs(v[2] - 0.35) <= 0.02);
}

TEST_CASE("ethical programs") {
    GameParams g = costs({2.0, 1.5, 0.5});
    auto P = exact(g);
    auto vb = solve_exact(g, {Program::VbarEthical, 1});
    CHECK(vb.value == P.p_h * (2 - P.costs[1]));
    auto vu = solve_exact(g, {Program::VunderEthical, 1});
    CHECK(vu.value == P.p_h * (P.costs[0] - P.costs[1]) / (1 + P.costs[0]));
}

TEST_CASE("feasibility check") {
    GameParams g;
    auto opt = solve(g, {Program::ThmOne, 1});
    auto rep = check_feasible(opt.gamma, g, 0.0);
    CHECK(rep.feasible);
    CHECK(rep.sender_c1_slack == doctest::Approx(0.0).epsilon(1e-12));

    JointDistribution<double> lie{};
    lie[L][T] = 1.0;
    CHECK_FALSE(check_feasible(lie, g, 0.0).feasible);

    JointDistribution<double> honest{};
    honest[H][T] = 1.0;
    auto hr = check_feasible(honest, g, 0.0);
    CHECK(hr.feasible);
    CHECK(hr.sender_c1_slack == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("occupation measure of a single one-period path") {
    ProfileSequence one{{SenderAction::Honest, ReceiverAction::Trust}};
    auto m = occupation_measure({one}, 0.9);
    CHECK(m[H][T] == doctest::Approx(1.0));
    double total = 0.0;
    for (const auto& row : m)
        for (double x : row) total += x;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("occupation accumulator discounts and renormalizes") {
    OccupationAccumulator acc(0.5);
    acc.begin_path();
    acc.add(SenderAction::Honest, ReceiverAction::Trust);
    acc.add(SenderAction::AlwaysHigh, ReceiverAction::NeverTrust);
    acc.end_path();
    auto m = acc.measure();
    CHECK(m[H][T] == doctest::Approx(2.0 / 3.0));
    CHECK(m[L][N] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("program names") {
    CHECK(parse_program("thm1") == Program::ThmOne);
    CHECK(parse_program("vbar") == Program::VbarEthical);
    CHECK(parse_program("vunder") == Program::VunderEthical);
    CHECK_THROWS_AS(parse_program("other"), ValidationError);
}
