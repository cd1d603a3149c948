#pragma once

#include "repcomm/bounds.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace repcomm {

// gamma[a][b], indexed by SenderAction and ReceiverAction.
template <class T>
using JointDistribution = std::array<std::array<T, 4>, 4>;

enum class Program { ThmOne, VbarEthical, VunderEthical };
// Restricted: sender support {Honest, AlwaysHigh}. Full: all 16 cells (diagnostic).
enum class Support { Restricted, Full };

std::string to_string(Program p);
Program parse_program(const std::string& s);

struct ProgramSpec {
    Program program = Program::ThmOne;
    std::size_t objective = 0;  // index into costs
    double eps = 0.0;           // best-reply relaxation, receiver payoff units
    Support support = Support::Restricted;
};

template <class T>
struct LPResult {
    bool feasible = false;
    T value{};
    JointDistribution<T> gamma{};
    std::optional<std::size_t> witness;  // VbarEthical: index of the c' achieving the max
};

class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Exact when T = Rational. Returns feasible=false instead of throwing.
template <class T>
LPResult<T> solve_program(const Primitives<T>& P, const ProgramSpec& spec);

extern template LPResult<double> solve_program(const Primitives<double>&, const ProgramSpec&);
extern template LPResult<Rational> solve_program(const Primitives<Rational>&, const ProgramSpec&);

// Throws Infeasible when the feasible set is empty.
LPResult<double> solve(const GameParams& g, const ProgramSpec& spec);
LPResult<Rational> solve_exact(const GameParams& g, const ProgramSpec& spec);

std::vector<double> solve_eps_family(const GameParams& g, std::size_t j, const std::vector<double>& eps_list,
                                     bool exact_mode = true);

struct ConstraintSlack {
    std::string name;
    double slack;
    bool pass;
};

struct FeasibilityReport {
    std::vector<ConstraintSlack> constraints;
    bool feasible = true;
    double sender_c1_slack = 0.0;  // p_h minus type c_1's payoff
};

// Checks the type-c_1 payoff cap and the linearized best-reply rows over the full grid.
FeasibilityReport check_feasible(const JointDistribution<double>& gamma, const GameParams& g, double eps);

// Streaming discounted empirical measure over pure profiles.
class OccupationAccumulator {
public:
    explicit OccupationAccumulator(double delta) : delta_(delta) {}
    void begin_path();
    void add(SenderAction a, ReceiverAction b);
    void end_path();
    std::size_t paths() const { return paths_; }
    // Mean over paths, each renormalized by (1 - delta^T).
    JointDistribution<double> measure() const;
    double max_truncation() const { return max_trunc_; }

private:
    double delta_;
    double weight_ = 1.0;
    JointDistribution<double> cur_{};
    JointDistribution<double> sum_{};
    std::size_t paths_ = 0;
    double max_trunc_ = 0.0;
};

using ProfileSequence = std::vector<std::pair<SenderAction, ReceiverAction>>;
JointDistribution<double> occupation_measure(const std::vector<ProfileSequence>& paths, double delta,
                                             double* truncated_mass = nullptr);

}  // namespace repcomm
