#pragma once

#include "repcomm/equilibrium_machine.hpp"
#include "repcomm/simulator.hpp"
#include "repcomm/verifier.hpp"

#include <iosfwd>
#include <string>

namespace repcomm {

// One row per (path, t): state snapshot, realized outcome, prescription.
void write_trace_csv(std::ostream& os, const PathEnsemble<EqState>& ens, const EquilibriumMachine& m);
// Throws ValidationError on malformed input.
PathEnsemble<EqState> read_trace_csv(std::istream& is, const EquilibriumMachine& m);

// Replays recorded paths through the state checks and also checks that every recorded
// transition matches the machine's own step.
VerificationReport verify_trace(const PathEnsemble<EqState>& ens, const EquilibriumMachine& m);

}  // namespace repcomm
