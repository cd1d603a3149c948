#pragma once

#include "repcomm/bounds.hpp"
#include "repcomm/equilibrium_machine.hpp"
#include "repcomm/machine.hpp"

#include <optional>
#include <vector>

namespace repcomm {

enum class PunishPhase { Class1, Class2, Class3 };
std::string to_string(PunishPhase p);

struct PunishState {
    PunishPhase phase = PunishPhase::Class1;
    std::array<double, 3> w{};  // weights on vH, vO (zero vector), vN
    TypeArray post{};
    int top = 0;      // highest-cost type in the support
    int counter = 0;  // Class-2 l-state periods with the current top type
};

struct PunishConstants {
    double delta = 0.0, delta_hat = 0.0, rho_star = 0.0;
    double rho_prime = 0.0;
    double lambda = 0.0;
    double zeta_star = 0.0;
    double p_star = 0.0;
    std::vector<long> k;  // per type index; 0 where unused
    int last = 0;         // lowest-cost type in the initial support
};

// Smallest k with (pi_j/k)/(pi_j/k + pi_{j+1} + ... + pi_n) <= 1 - rho*.
long class2_k(const std::vector<double>& pi, std::size_t j, double rho_star);

class PunishmentMachine {
public:
    using State = PunishState;

    // post0: receiver belief at entry; lambda <= 0 selects the default step size.
    PunishmentMachine(const GameParams& g, double rho_prime, const TypeArray& post0, double lambda = 0.0);
    PunishmentMachine(const GameParams& g, double rho_prime);

    const GameParams& params() const { return g_; }
    const PunishConstants& constants() const { return k_; }
    std::size_t num_types() const { return g_.n(); }
    const PayoffTable& payoffs() const { return table_; }

    // Also the continuation after any deviation: punishment restarts.
    State initial_state() const;
    State absorbing_state(const std::array<double, 3>& w, const TypeArray& post) const;

    PunishPhase classify(const std::array<double, 3>& w) const;
    Prescription prescribe(const State& s) const;
    State step(const State& s, Omega w, Message m) const;
    TypeArray value(const State& s) const;
    double value_of(const std::array<double, 3>& w, std::size_t j) const;
    double zeta(const State& s) const { return s.post[k_.last]; }
    bool honest_regime(const State& s) const;

private:
    double top_honesty(const State& s) const;
    std::array<double, 3> qmix(const std::array<double, 3>& target, std::size_t j) const;
    State to_class3(State s, const std::array<double, 3>& w) const;
    int next_top(const TypeArray& post, int from) const;

    GameParams g_;
    PunishConstants k_;
    std::vector<double> vH_, vN_;
    PayoffTable table_;
    TypeArray post0_{};
};

// Smallest rho' on a 1e-3 grid in (rho*, 1] separating the types as the composite requires.
std::optional<double> select_rho_prime(const GameParams& g, double rho);

enum class Stage { Aux, Signal, Alternate, Punish };
std::string to_string(Stage s);

struct CompositeState {
    Stage stage = Stage::Aux;
    EqState aux;
    PunishState pun;
    TypeArray post{};     // receiver belief over all types
    bool lied = false;    // some message differed from the state
    double v_signal = 0.0;  // c*'s continuation at the signaling history
    double r = 0.0;       // remaining discounted frequency of (Honest, Trust)
    double rho_tilde = 0.0;
};

class CompositeMachine {
public:
    using State = CompositeState;

    CompositeMachine(const GameParams& g, double rho);

    const GameParams& params() const { return g_; }
    std::size_t num_types() const { return g_.n(); }
    const PayoffTable& payoffs() const { return table_; }
    const EquilibriumMachine& auxiliary() const { return aux_; }
    const PunishmentMachine& punishment() const { return pun_; }
    double rho_prime() const { return rho_prime_; }
    std::size_t cstar_index() const { return istar_; }
    bool sends_high_at_signal(std::size_t j) const;
    // Frequency of (Honest, Trust) solving the signaling-period promise for c*.
    double alternation_frequency(double v_signal) const;
    bool alternation_trusts(double r, double target) const;

    State initial_state() const;
    Prescription prescribe(const State& s) const;
    State step(const State& s, Omega w, Message m) const;
    // NaN for types whose continuation the construction leaves implicit.
    TypeArray value(const State& s) const;

private:
    static GameParams auxiliary_params(const GameParams& g, std::size_t& istar);
    State enter(State s, const EqState& aux) const;

    GameParams g_;
    std::size_t istar_ = 0;
    EquilibriumMachine aux_;
    double rho_prime_ = 0.0;
    PunishmentMachine pun_;
    PayoffTable table_;
    std::vector<double> vN_;
};

}  // namespace repcomm
