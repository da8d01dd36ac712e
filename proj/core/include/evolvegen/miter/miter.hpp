#pragma once

#include "evolvegen/compile/ts.hpp"

namespace evolvegen::miter {

// Equivalence miter over two scheduled variants. Primary inputs are sampled
// once at cycle 0 into shadow registers and both sides read the held values.
// Each side's first valid result is captured in sticky registers; bad fires
// once both sides are done and the captured results differ. State names are
// prefixed "A." and "B.". Throws SignatureMismatch when the input lists or
// result widths differ.
ts::TransitionSystem build_miter(const ts::TransitionSystem& a, const ts::TransitionSystem& b);

}  // namespace evolvegen::miter
