#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "evolvegen/compile/ts.hpp"
#include "evolvegen/graph/graph.hpp"

namespace evolvegen::compile {

enum class ScheduleKind { kBasic, kOptimized };

std::string_view schedule_kind_name(ScheduleKind k);
std::optional<ScheduleKind> parse_schedule_kind(std::string_view name);

struct ScheduleStrategy {
  ScheduleKind kind = ScheduleKind::kBasic;
  // Optimized only: straight-line ops are staged so that no combinational
  // path crosses more than this many ops without a register.
  unsigned register_depth_threshold = 2;
  // Optimized only: cap on replicated op instances.
  std::size_t node_budget = 20000;
};

// Lowers the graph to a cycle-level transition system with inputs named after
// the primary inputs and outputs "valid" and "result". Inputs must be held
// stable; `valid` rises once and stays high, `result` is stable from then on.
// Throws ResourceBound when full unrolling exceeds the budget.
ts::TransitionSystem schedule(const graph::ComputationGraph& g, const ScheduleStrategy& strategy);

// Number of control steps of the schedule (exposed for tests and reports).
std::size_t schedule_steps(const graph::ComputationGraph& g, const ScheduleStrategy& strategy);

// HLS-style C++ rendering of the graph. Optimized output carries pipeline,
// unroll and flatten pragmas; Basic output carries none. Deterministic.
std::string emit_hls_source(const graph::ComputationGraph& g, const ScheduleStrategy& strategy);

}  // namespace evolvegen::compile
