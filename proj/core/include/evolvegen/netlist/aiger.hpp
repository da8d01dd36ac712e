#pragma once

#include <string>
#include <string_view>

#include "evolvegen/netlist/aig.hpp"

namespace evolvegen::netlist {

enum class AigerMode { kAscii, kBinary };

// AIGER 1.9. The header carries the B field only when bad properties exist.
std::string write_aiger(const AigCircuit& aig, AigerMode mode);

// Accepts both `aag` and `aig`. ASCII files with arbitrary variable
// numbering are renumbered into canonical order. Throws FormatError with the
// byte offset of the offending token.
AigCircuit read_aiger(std::string_view bytes);

}  // namespace evolvegen::netlist
