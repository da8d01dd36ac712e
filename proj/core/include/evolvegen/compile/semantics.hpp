#pragma once

#include <span>

#include "evolvegen/common/word.hpp"
#include "evolvegen/graph/graph.hpp"

namespace evolvegen::compile {

// Exact-integer reference semantics of one OpNode (see docs/semantics.md).
// `raw` holds operand bit patterns, `types` their value types; the result is
// the raw bit pattern of the node's declared width.
Word eval_op_scalar(const graph::OpAttrs& attrs, std::span<const Word> raw,
                    std::span<const graph::ValueType> types);

// Intermediate width after operand alignment, capped at 64 bits.
unsigned intermediate_width(const graph::OpAttrs& attrs, std::span<const graph::ValueType> types);
// Fraction bits of the intermediate value.
unsigned intermediate_frac(const graph::OpAttrs& attrs, std::span<const graph::ValueType> types);

// Converts a value between types: align fraction bits (floor when dropping),
// then wrap to the target width. Used for dependency initial values.
Word cast_scalar(Word raw, const graph::ValueType& from, const graph::ValueType& to);

}  // namespace evolvegen::compile
