#pragma once

#include "repcomm/bounds.hpp"
#include "repcomm/machine.hpp"

#include <string>
#include <vector>

namespace repcomm {

struct DerivedConstants {
    double delta = 0.0;
    double delta_hat = 0.0;
    double rho = 0.0;
    double rho_star = 0.0;
    long n_num = 0, l_den = 0;  // the rational n/l in (rho, rho*)
    double rho_tilde = 0.0;
    double rho_hat = 0.0;
    double lambda = 0.0;
    double lambda_root = 0.0;  // largest admissible lambda before the 0.9 factor
    double eta_star = 0.0;
    std::vector<long> k;       // k[j] for type index j >= 2 (0-based); 0 elsewhere
    long K = 0;                // rebound bound
    long M_hat = 0;
    long M = 0;                // Class-2-after-l bound
    double p_star = 0.0;
    Rational delta_hat_q, rho_star_q;
};

// Largest k-independent n/l: iterate l upward, n = largest integer with n/l < rho*,
// stop once n/(l+1) > rho.
std::pair<long, long> choose_n_over_l(const Rational& rho, const Rational& rho_star);
double growth_factor(double lambda, double rho_star, double rho);
DerivedConstants derive_constants(const GameParams& g, double rho);

enum class Phase { Class1, Class2, Rebounding, Absorbing };
std::string to_string(Phase p);

struct EqState {
    Phase phase = Phase::Class1;
    std::array<double, 3> w{};  // weights on vH, vL, vN
    TypeArray post{};           // receiver posterior over types
    int low = 0;                // lowest-cost type in the support
    int counter = 0;            // Class-2 l-state count for the current lowest type
    double eta() const { return post[0]; }
};

enum class Preset { Target, Printed };
Preset parse_preset(const std::string& s);

struct Mixing {
    double x1, x2;  // honesty probabilities in state l: type c_1, other types
};

std::pair<double, double> belief_update_class1(const DerivedConstants& k, double eta);
Mixing mixing_from_posteriors(double eta, double eta_lh, double eta_ll);

class EquilibriumMachine {
public:
    using State = EqState;

    EquilibriumMachine(const GameParams& g, const DerivedConstants& k, bool check_polytope = true);
    EquilibriumMachine(const GameParams& g, double rho);

    const GameParams& params() const { return g_; }
    const DerivedConstants& constants() const { return k_; }
    std::size_t num_types() const { return g_.n(); }
    const PayoffTable& payoffs() const { return table_; }
    const Basis& basis() const { return basis_; }

    std::array<double, 3> preset_weights(Preset p) const;
    // Throws ValidationError for weights outside the simplex or the polytope.
    State initial_state(const std::array<double, 3>& w) const;
    State initial_state(Preset p = Preset::Target) const { return initial_state(preset_weights(p)); }

    Phase classify(const std::array<double, 3>& w) const;
    Prescription prescribe(const State& s) const;
    State step(const State& s, Omega w, Message m) const;
    TypeArray value(const State& s) const;
    double value_of(const std::array<double, 3>& w, std::size_t j) const;

    bool active_learning(const State& s) const { return s.phase == Phase::Class1 || s.phase == Phase::Class2; }
    bool absorbing_honest(const State& s) const;
    // Weight-space membership in the quadrilateral vH, v*, vbar, underline-v.
    double polytope_violation(const State& s) const;
    int top_type(const State& s) const;
    std::array<double, 3> vunder_weights() const { return {k_.p_star, 0.0, 1.0 - k_.p_star}; }
    bool polytope_checked() const { return check_polytope_; }

private:
    double top_value_after_lie(const std::array<double, 3>& w) const;
    double class2_lie(const State& s) const;
    std::array<double, 3> qmix(const std::array<double, 3>& target, std::size_t j) const;
    State absorb(const State& s, const std::array<double, 3>& w) const;

    GameParams g_;
    DerivedConstants k_;
    Basis basis_;
    PayoffTable table_;
    bool check_polytope_;
};

}  // namespace repcomm
