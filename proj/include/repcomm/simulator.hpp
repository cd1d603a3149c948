#pragma once

#include "repcomm/machine.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace repcomm {

struct SimConfig {
    std::size_t horizon = 1000;
    std::size_t paths = 1000;
    std::uint64_t seed = 1;
    std::optional<std::size_t> fixed_type;  // nullopt: type drawn from the prior
    bool keep_traces = false;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent stream per path so results do not depend on execution order.
inline std::mt19937_64 path_rng(std::uint64_t seed, std::size_t path) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(path) + 1)));
}

template <class State>
struct StepRecord {
    State state;
    Omega omega;
    Message message;
    SenderAction action;
    ReceiverAction receiver;
    double payoff;
};

template <class State>
struct PathRecord {
    std::size_t type = 0;
    std::vector<StepRecord<State>> steps;
    double discounted = 0.0;
};

struct TypeSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double stderr_() const { return count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count)) : 0.0; }
    void add(double x) {
        ++count;
        double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
};

template <class State>
struct PathEnsemble {
    SimConfig config;
    double delta = 0.0;
    std::vector<TypeSummary> per_type;
    std::vector<PathRecord<State>> traces;  // only when keep_traces
    std::size_t h_count = 0;
    std::size_t periods = 0;
    double tail_bound = 0.0;  // delta^T * max |stage payoff|
};

// Observer with no-op hooks; derive and override what is needed.
template <class State>
struct NullObserver {
    void begin_path(std::size_t, std::size_t) {}
    void on_step(std::size_t, std::size_t, const State&, const Prescription&, Omega, Message, SenderAction,
                 double, const State&) {}
    void end_path(std::size_t, std::size_t, double) {}
};

template <class M, class Obs>
PathEnsemble<typename M::State> run(const M& machine, const typename M::State& init, const SimConfig& cfg,
                                    Obs& obs) {
    using State = typename M::State;
    const GameParams& g = machine.params();
    if (cfg.horizon < 1 || cfg.paths < 1) throw ValidationError("horizon and paths must be >= 1");
    if (cfg.fixed_type && *cfg.fixed_type >= g.n()) throw ValidationError("type index out of range");
    const PayoffTable& table = machine.payoffs();
    PathEnsemble<State> ens;
    ens.config = cfg;
    ens.delta = g.delta;
    ens.per_type.assign(g.n(), {});
    double max_u = 1.0;
    for (double c : g.costs) max_u = std::max(max_u, 1.0 + c);
    ens.tail_bound = std::pow(g.delta, static_cast<double>(cfg.horizon)) * max_u;
    std::discrete_distribution<std::size_t> type_dist(g.prior.begin(), g.prior.end());
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    for (std::size_t path = 0; path < cfg.paths; ++path) {
        auto rng = path_rng(cfg.seed, path);
        std::size_t j = cfg.fixed_type ? *cfg.fixed_type : type_dist(rng);
        obs.begin_path(path, j);
        PathRecord<State> rec;
        rec.type = j;
        State s = init;
        double disc = 1.0, total = 0.0;
        for (std::size_t t = 0; t < cfg.horizon; ++t) {
            Prescription p = machine.prescribe(s);
            Omega om = unif(rng) < g.p_h ? Omega::h : Omega::l;
            // Draw the whole pure map so the profile is well defined.
            Message in_h = unif(rng) < p.lie_in_h[j] ? Message::l : Message::h;
            Message in_l = unif(rng) < p.lie_in_l[j] ? Message::h : Message::l;
            Message m = om == Omega::h ? in_h : in_l;
            double u = table(j, om, m, p.receiver);
            State nx = machine.step(s, om, m);
            SenderAction a = pure_action(in_h, in_l);
            obs.on_step(path, t, s, p, om, m, a, u, nx);
            if (cfg.keep_traces) rec.steps.push_back({s, om, m, a, p.receiver, u});
            if (om == Omega::h) ++ens.h_count;
            total += (1.0 - g.delta) * disc * u;
            disc *= g.delta;
            s = nx;
        }
        ens.periods += cfg.horizon;
        rec.discounted = total;
        ens.per_type[j].add(total);
        obs.end_path(path, j, total);
        if (cfg.keep_traces) ens.traces.push_back(std::move(rec));
    }
    return ens;
}

template <class M>
PathEnsemble<typename M::State> run(const M& machine, const typename M::State& init, const SimConfig& cfg) {
    NullObserver<typename M::State> obs;
    return run(machine, init, cfg, obs);
}

}  // namespace repcomm
