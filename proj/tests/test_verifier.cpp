#include "repcomm/trace_io.hpp"
#include "repcomm/verifier.hpp"

#include <doctest.h>

#include <sstream>

using namespace repcomm;

namespace {
PathEnsemble<EqState> short_run(const EquilibriumMachine& m, std::size_t horizon, std::size_t paths) {
    SimConfig c;
    c.horizon = horizon;
    c.paths = paths;
    c.seed = 21;
    c.keep_traces = true;
    return run(m, m.initial_state(), c);
}

std::string corrupt_pl(const std::string& csv, std::size_t path, std::size_t t) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    std::string key = std::to_string(path) + ",";
    while (std::getline(in, line)) {
        if (line.rfind(key, 0) == 0) {
            std::vector<std::string> f;
            std::stringstream ss(line);
            std::string x;
            while (std::getline(ss, x, ',')) f.push_back(x);
            if (f.size() > 6 && f[2] == std::to_string(t)) {
                f[6] = "-" + f[6];
                line.clear();
                for (std::size_t i = 0; i < f.size(); ++i) line += (i ? "," : "") + f[i];
            }
        }
        out << line << '\n';
    }
    return out.str();
}
}  // namespace

TEST_CASE("full honesty: strict best reply every period") {
    GameParams g;
    EquilibriumMachine m(g, 0.0);
    EqTraceObserver obs(m, 500);
    SimConfig c;
    c.horizon = 500;
    c.paths = 100;
    run(m, m.initial_state(), c, obs);
    auto rep = obs.report();
    CHECK(rep.all_pass());
    CHECK(rep.find("receiver_best_reply")->worst < 0.0);
}

TEST_CASE("baseline counting bounds and absorption") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    EqTraceObserver obs(m, 3000, false);
    SimConfig c;
    c.horizon = 3000;
    c.paths = 500;
    c.seed = 2;
    run(m, m.initial_state(), c, obs);
    auto rep = obs.report();
    CHECK(rep.find("rebound_spell_le_K")->pass());
    CHECK(rep.find("class2_after_l_le_M")->pass());
    CHECK(rep.find("absorption_monotone")->pass());
    CHECK(obs.max_rebound_l <= static_cast<std::size_t>(m.constants().K));
}

TEST_CASE("trace round trip") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    auto ens = short_run(m, 40, 3);
    std::ostringstream os;
    write_trace_csv(os, ens, m);
    std::istringstream is(os.str());
    auto back = read_trace_csv(is, m);
    REQUIRE(back.traces.size() == 3);
    for (std::size_t p = 0; p < 3; ++p) {
        CHECK(back.traces[p].type == ens.traces[p].type);
        CHECK(back.traces[p].discounted == doctest::Approx(ens.traces[p].discounted).epsilon(1e-14));
    }
    auto rep = verify_trace(back, m);
    INFO(rep.summary());
    CHECK(rep.find("trace_transition")->pass());
    CHECK(rep.find("trace_payoff")->pass());
}

TEST_CASE("corrupted trace fails at the corrupted period") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    auto ens = short_run(m, 20, 3);
    std::ostringstream os;
    write_trace_csv(os, ens, m);
    std::istringstream is(corrupt_pl(os.str(), 1, 5));
    auto rep = verify_trace(read_trace_csv(is, m), m);
    CHECK_FALSE(rep.all_pass());
    const Check* c = rep.find("polytope_membership");
    REQUIRE(c != nullptr);
    CHECK_FALSE(c->pass());
    CHECK(c->path == 1);
    CHECK(c->t == 5);
    CHECK(c->where.find("phase=") != std::string::npos);
    CHECK_FALSE(rep.find("trace_transition")->pass());
}

TEST_CASE("malformed traces are rejected") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_trace_csv(empty, m), ValidationError);
    std::istringstream bad("path,type,t\n0,1,x\n");
    CHECK_THROWS_AS(read_trace_csv(bad, m), ValidationError);
}

TEST_CASE("no always-mixing type at baseline") {
    GameParams g;
    EquilibriumMachine m(g, 0.3);
    auto rep = detect_always_mixing(m, 3000);
    CHECK(rep.no_always_mixing());
    CHECK(rep.states > 0);
}

TEST_CASE("single-type machine reaches pure play") {
    GameParams g;
    g.costs = {0.5};
    g.prior = {1.0};
    EquilibriumMachine m(g, 0.3);
    auto rep = detect_always_mixing(m, 3000);
    REQUIRE(rep.always_eps_close.size() == 1);
    CHECK_FALSE(rep.always_eps_close[0]);
    CHECK(rep.pure_somewhere[0]);
}

TEST_CASE("KL diagnostic") {
    GameParams g;
    EquilibriumMachine m0(g, 0.0);
    KLObserver k0(m0, 300);
    SimConfig c;
    c.horizon = 300;
    c.paths = 50;
    run(m0, m0.initial_state(), c, k0);
    CHECK(k0.result().mean_full == 0.0);

    EquilibriumMachine m(g, 0.3);
    KLObserver k1(m, 300);
    run(m, m.initial_state(), c, k1);
    auto r = k1.result();
    CHECK(std::isfinite(r.mean_full));
    CHECK(r.mean_full >= r.mean_half);
    CHECK(bernoulli_kl(0.3, 0.3) == doctest::Approx(0.0));
}

TEST_CASE("sustainability boundary") {
    GameParams g;
    auto rep = sustainability(derive_constants(g, 0.3), 10000);
    CHECK(rep.factor_at_rho > 1.0);
    CHECK(rep.factor_above < 1.0);
    CHECK(rep.analytic_ok);
    CHECK(rep.trace_ok);
}

TEST_CASE("continuation payoff") {
    std::vector<double> u{1.0, 0.0, 1.0};
    CHECK(continuation(u, 0, 0.5) == doctest::Approx(0.5 * (1.0 + 0.25)));
    CHECK(continuation(u, 2, 0.5) == doctest::Approx(0.5));
}
