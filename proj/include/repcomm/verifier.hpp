#pragma once

#include "repcomm/equilibrium_machine.hpp"
#include "repcomm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace repcomm {

struct Check {
    Check() = default;
    Check(std::string n, bool a, double tol) : name(std::move(n)), asserted(a), tolerance(tol) {}

    std::string name;
    bool asserted = true;  // false: reported only
    double tolerance = 0.0;
    double worst = 0.0;    // worst residual (larger is worse)
    std::size_t path = 0, t = 0;
    std::size_t count = 0;  // number of evaluations
    std::size_t failures = 0;
    std::string where;      // serialized state at the worst point

    bool pass() const { return !asserted || failures == 0; }
    void record(double residual, std::size_t p, std::size_t tt) {
        ++count;
        if (residual > tolerance) ++failures;
        if (count == 1 || residual > worst) {
            worst = residual;
            path = p;
            t = tt;
            where.clear();
        }
    }
};

struct VerificationReport {
    std::vector<Check> checks;
    std::map<std::string, double> metrics;  // reported values

    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
    }
    const Check* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
    std::string summary() const;
};

std::string describe(const EqState& s);

// Residuals of the local equilibrium conditions at one state.
struct StateResiduals {
    double receiver_br = -std::numeric_limits<double>::infinity();  // negative: strict best reply
    double incentive = 0.0;
    double promise = 0.0;
    double martingale = 0.0;
    double promise_scale = 1.0;  // max |weight| involved, for context
};

template <class M>
StateResiduals state_residuals(const M& mach, const typename M::State& s) {
    const GameParams& g = mach.params();
    const std::size_t n = g.n();
    const double d = g.delta;
    const PayoffTable& table = mach.payoffs();
    Prescription p = mach.prescribe(s);
    StateResiduals r;

    typename M::State nx[2][2] = {{mach.step(s, Omega::h, Message::h), mach.step(s, Omega::h, Message::l)},
                                  {mach.step(s, Omega::l, Message::h), mach.step(s, Omega::l, Message::l)}};
    TypeArray vx[2][2];
    for (int w = 0; w < 2; ++w)
        for (int m = 0; m < 2; ++m) vx[w][m] = mach.value(nx[w][m]);
    TypeArray v = mach.value(s);

    // Receiver: posterior on omega = h after each message.
    for (int m = 0; m < 2; ++m) {
        double ph = 0.0, pl = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            ph += s.post[j] * p.p_message(j, Omega::h, static_cast<Message>(m));
            pl += s.post[j] * p.p_message(j, Omega::l, static_cast<Message>(m));
        }
        ph *= g.p_h;
        pl *= 1.0 - g.p_h;
        if (ph + pl <= 0.0) continue;
        double post_h = ph / (ph + pl);
        Act a = action_of(p.receiver, static_cast<Message>(m));
        double viol = a == Act::H ? 0.5 - post_h : post_h - 0.5;
        r.receiver_br = std::max(r.receiver_br, viol);
    }

    for (std::size_t j = 0; j < n; ++j) {
        if (s.post[j] <= 0.0 || !std::isfinite(v[j])) continue;
        bool defined = true;
        for (int w = 0; w < 2; ++w)
            for (int m = 0; m < 2; ++m) defined = defined && std::isfinite(vx[w][m][j]);
        if (!defined) continue;
        double pk = 0.0;
        for (int w = 0; w < 2; ++w) {
            Omega om = static_cast<Omega>(w);
            double pay[2];
            for (int m = 0; m < 2; ++m)
                pay[m] = (1.0 - d) * table(j, om, static_cast<Message>(m), p.receiver) + d * vx[w][m][j];
            double best = std::max(pay[0], pay[1]);
            double pw = om == Omega::h ? g.p_h : 1.0 - g.p_h;
            for (int m = 0; m < 2; ++m) {
                double pm = p.p_message(j, om, static_cast<Message>(m));
                if (pm <= 0.0) continue;
                r.incentive = std::max(r.incentive, best - pay[m]);
                pk += pw * pm * pay[m];
            }
        }
        r.promise = std::max(r.promise, std::abs(pk - v[j]));
        r.promise_scale = std::max(r.promise_scale, std::abs(v[j]));
    }

    for (int w = 0; w < 2; ++w) {
        Omega om = static_cast<Omega>(w);
        TypeArray mix{};
        for (int m = 0; m < 2; ++m) {
            double agg = 0.0;
            for (std::size_t j = 0; j < n; ++j) agg += s.post[j] * p.p_message(j, om, static_cast<Message>(m));
            if (agg <= 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) mix[j] += agg * nx[w][m].post[j];
        }
        for (std::size_t j = 0; j < n; ++j) r.martingale = std::max(r.martingale, std::abs(mix[j] - s.post[j]));
    }
    return r;
}

// Local checks on every visited state of any machine.
template <class M>
class StateCheckObserver {
public:
    explicit StateCheckObserver(const M& m) : mach_(m) {}
    void begin_path(std::size_t, std::size_t) {}
    void on_step(std::size_t path, std::size_t t, const typename M::State& s, const Prescription&, Omega, Message,
                 SenderAction, double, const typename M::State&) {
        StateResiduals r = state_residuals(mach_, s);
        br_.record(r.receiver_br, path, t);
        inc_.record(r.incentive, path, t);
        pk_.record(r.promise, path, t);
        mart_.record(r.martingale, path, t);
        double v1 = mach_.value(s)[0];
        if (s.post[0] > 0.0 && std::isfinite(v1)) top_.record(-v1, path, t);
    }
    void end_path(std::size_t, std::size_t, double) {}
    VerificationReport report() const { return {{br_, inc_, pk_, mart_, top_}, {}}; }

private:
    const M& mach_;
    Check br_{"receiver_best_reply", true, 1e-9};
    Check inc_{"incentive_indifference", true, 1e-9};
    Check pk_{"promise_keeping", true, 1e-9};
    Check mart_{"belief_martingale", true, 1e-12};
    Check top_{"highest_cost_value_nonnegative", true, 1e-9};
};

// Tracks everything verify_trace and phase_statistics need, streamed per step.
class EqTraceObserver {
public:
    EqTraceObserver(const EquilibriumMachine& m, std::size_t horizon, bool check_states = true);

    void begin_path(std::size_t path, std::size_t type);
    void on_step(std::size_t path, std::size_t t, const EqState& s, const Prescription& p, Omega om, Message m,
                 SenderAction a, double u, const EqState& nx);
    void end_path(std::size_t path, std::size_t type, double total);

    VerificationReport report() const;

    // Phase statistics.
    std::size_t max_rebound_l = 0;     // l-state periods within one rebounding spell
    std::size_t max_class2_after_l = 0;
    std::size_t paths = 0;
    std::size_t negative_weight_paths = 0;

private:
    const EquilibriumMachine& mach_;
    std::size_t horizon_;
    bool check_states_;

public:
    std::vector<std::size_t> absorbed_at;  // paths absorbing at time t

private:
    Check br_{"receiver_best_reply", true, 1e-9};
    Check inc_{"incentive_indifference", true, 1e-9};
    Check pk_{"promise_keeping", true, 1e-9};
    Check mart_{"belief_martingale", true, 1e-12};
    Check eta_{"eta_floor", true, 0.0};
    Check poly_{"polytope_membership", true, 1e-12};
    Check window_{"learning_window", false, 0.0};
    Check type1_cont_{"type1_continuation_le_ph", true, 0.0};

    // per path
    std::size_t type_ = 0;
    bool prev_l_ = false;
    std::size_t spell_l_ = 0, class2_l_ = 0;
    bool neg_ = false;
    bool in_run_ = false;
    double run_L_ = 0.0, run_H_ = 0.0, run_w_ = 1.0;
    double max_T_ = 0.0;
    std::vector<double> u_;
    // decile continuation accumulators for type 0
    std::vector<TypeSummary> decile_;
};

// Offline decile continuation from a payoff stream.
double continuation(const std::vector<double>& u, std::size_t from, double delta);

struct MixingReport {
    std::vector<bool> pure_somewhere;
    std::vector<bool> always_eps_close;  // eps-optimal disclosure mixture at every reachable state
    std::size_t states = 0;
    bool no_always_mixing() const {
        for (bool b : pure_somewhere)
            if (!b) return false;
        for (bool b : always_eps_close)
            if (b) return false;
        return true;
    }
};

class StateExplosion : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

MixingReport detect_always_mixing(const EquilibriumMachine& m, std::size_t horizon, double eps = 0.05,
                                  std::size_t cap = 1000000);

struct KLSeries {
    double mean_half = 0.0, mean_full = 0.0;  // mean cumulative KL at T/2 and T
    double max_full = 0.0;
    std::size_t paths = 0;
};

// Cumulative one-step prediction error of type j's signal distribution against the aggregate.
class KLObserver {
public:
    KLObserver(const EquilibriumMachine& m, std::size_t horizon) : mach_(m), horizon_(horizon) {}
    void begin_path(std::size_t, std::size_t type) {
        type_ = type;
        cum_ = 0.0;
    }
    void on_step(std::size_t, std::size_t t, const EqState& s, const Prescription& p, Omega, Message, SenderAction,
                 double, const EqState&);
    void end_path(std::size_t, std::size_t, double) {
        full_.add(cum_);
        out_.max_full = std::max(out_.max_full, cum_);
    }
    KLSeries result() const {
        KLSeries r = out_;
        r.mean_half = half_.mean;
        r.mean_full = full_.mean;
        r.paths = full_.count;
        return r;
    }

private:
    const EquilibriumMachine& mach_;
    std::size_t horizon_;
    std::size_t type_ = 0;
    double cum_ = 0.0;
    TypeSummary half_, full_;
    KLSeries out_;
};

double bernoulli_kl(double p, double q);

struct SustainabilityReport {
    double factor_at_rho = 0.0, factor_above = 0.0;
    double rho_above = 0.0;
    double trend_at_rho = 0.0, trend_above = 0.0;  // mean log-ratio of eta - eta* per non-cap step
    bool analytic_ok = false, trace_ok = false;
};

SustainabilityReport sustainability(const DerivedConstants& k, std::size_t periods = 10000);

}  // namespace repcomm
