#pragma once

#include "evolvegen/evolve/evolve.hpp"

namespace evolvegen::testing {

inline std::size_t count_loops(const graph::ComputationGraph& g) {
  std::size_t n = 0;
  for (const graph::Node& node : g.nodes) n += node.kind() == graph::NodeKind::kLoop ? 1 : 0;
  return n;
}

// Reward grows with the loop count and nothing else, so AddLoop is the only
// mutation that can beat its parent.
class LoopRewardEvaluator : public evolve::Evaluator {
 public:
  evolve::Evaluation evaluate(const graph::ComputationGraph& g) override {
    evolve::Evaluation e;
    e.success = true;
    e.reward = 1.0 + static_cast<double>(count_loops(g));
    e.draft.graph = g;
    e.draft.graph_hash = graph::canonical_hash(g);
    e.draft.predicted_time_s = e.reward;
    e.draft.and_count = g.nodes.size();
    return e;
  }
};

}  // namespace evolvegen::testing
