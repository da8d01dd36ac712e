#pragma once

#include <string>
#include <vector>

#include "evolvegen/compile/ts.hpp"
#include "evolvegen/netlist/aig.hpp"

namespace evolvegen::netlist {

struct BitblastOptions {
  // Emit every bit of every TS output as an AIG output.
  bool keep_outputs = true;
  // Drop state bits outside the cone of influence of the kept outputs and
  // the bad property. Off by default so latch i maps to a fixed state bit.
  bool prune_latches = false;
};

// Bit-level view of a transition system. Without pruning, inputs are laid
// out bit by bit in TS input order (LSB first), latches likewise in state
// order, and outputs in TS output order.
AigCircuit bitblast(const ts::TransitionSystem& ts, const BitblastOptions& options = {});

// Artifact form used by the pipeline: bad only, pruned to its cone.
AigCircuit bitblast_property(const ts::TransitionSystem& ts);

// Word-level BTOR2 text. Line ids increase strictly; sorts are declared
// before first use.
std::string write_btor2(const ts::TransitionSystem& ts);

}  // namespace evolvegen::netlist
