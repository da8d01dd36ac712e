#pragma once

#include <span>

#include "evolvegen/compile/ts.hpp"
#include "evolvegen/graph/graph.hpp"

namespace evolvegen::compile {

// Bit-vector construction of an OpNode inside `ts`. Must agree with
// eval_op_scalar for every operand value.
ts::ExprId lower_op(ts::TransitionSystem& ts, const graph::OpAttrs& attrs, std::span<const ts::ExprId> operands,
                    std::span<const graph::ValueType> types);

ts::ExprId lower_cast(ts::TransitionSystem& ts, ts::ExprId raw, const graph::ValueType& from,
                      const graph::ValueType& to);

}  // namespace evolvegen::compile
