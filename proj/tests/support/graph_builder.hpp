#pragma once

#include <optional>
#include <string>

#include "evolvegen/graph/graph.hpp"

namespace evolvegen::testing {

// Hand assembly of small graphs. Callers are responsible for validity; the
// outputs are recomputed by finish().
class GraphBuilder {
 public:
  using NodeId = graph::NodeId;
  using Producer = graph::Producer;

  Producer input(unsigned width, bool is_signed = false, std::optional<unsigned> int_bits = std::nullopt) {
    graph::PrimaryInput in;
    in.name = "in" + std::to_string(g.inputs.size());
    in.width = width;
    in.is_signed = is_signed;
    in.dtype = int_bits ? graph::DType::kFixed : graph::DType::kInt;
    in.int_bits = int_bits.value_or(width);
    g.inputs.push_back(in);
    return Producer::of_input(static_cast<std::uint32_t>(g.inputs.size() - 1));
  }

  NodeId op(graph::OpAttrs attrs, std::initializer_list<Producer> operands,
            std::optional<NodeId> region = std::nullopt) {
    NodeId id = add(attrs, region);
    unsigned slot = 0;
    for (const Producer& p : operands) g.edges.push_back({p, id, slot++});
    return id;
  }

  NodeId loop(graph::LoopAttrs attrs, std::optional<NodeId> region = std::nullopt) { return add(attrs, region); }

  NodeId branch(NodeId condition, std::optional<NodeId> region = std::nullopt) {
    return add(graph::BranchAttrs{condition}, region);
  }

  // Dep in `loop` fed back from `source`; `init` becomes the slot-0 edge.
  NodeId dep(NodeId loop, NodeId source, unsigned distance, std::optional<Producer> init = std::nullopt) {
    NodeId id = add(graph::DepAttrs{distance, source}, loop);
    if (init) g.edges.push_back({*init, id, 0});
    return id;
  }

  // Rewires slot `slot` of `consumer` to `producer`.
  void rewire(NodeId consumer, unsigned slot, Producer producer) {
    for (graph::Edge& e : g.edges) {
      if (e.consumer == consumer && e.slot == slot) e.producer = producer;
    }
  }

  graph::ComputationGraph finish() {
    g.outputs = graph::compute_outputs(g);
    return g;
  }

  graph::ComputationGraph g;

 private:
  NodeId add(graph::NodeAttrs attrs, std::optional<NodeId> region) {
    NodeId id{static_cast<std::uint32_t>(g.nodes.size())};
    g.nodes.push_back({id, std::move(attrs), region});
    return id;
  }
};

inline graph::OpAttrs int_op(graph::OpKind kind, unsigned width, bool is_signed = false,
                             graph::Saturation sat = graph::Saturation::kWrap) {
  graph::OpAttrs a;
  a.kind = kind;
  a.width = width;
  a.is_signed = is_signed;
  a.int_bits = width;
  a.saturation = sat;
  return a;
}

inline graph::OpAttrs fixed_op(graph::OpKind kind, unsigned width, unsigned int_bits, bool is_signed,
                               graph::Saturation sat, graph::Rounding rnd = graph::Rounding::kTruncate) {
  graph::OpAttrs a = int_op(kind, width, is_signed, sat);
  a.dtype = graph::DType::kFixed;
  a.int_bits = int_bits;
  a.rounding = rnd;
  return a;
}

inline graph::LoopAttrs counted_loop(std::int64_t trip) {
  graph::LoopAttrs l;
  l.start = 0;
  l.end = trip;
  l.step = 1;
  return l;
}

}  // namespace evolvegen::testing
