#include <algorithm>
#include <unordered_map>

#include "evolvegen/common/error.hpp"
#include "evolvegen/graph/graph.hpp"

namespace evolvegen::graph {

namespace {

OpAttrs sample_op_attrs(Rng& r, const GenerationConfig& cfg) {
  OpAttrs a;
  a.kind = static_cast<OpKind>(r.index(kNumOpKinds));
  a.width = static_cast<unsigned>(r.uniform_int(cfg.min_width, cfg.max_width));
  a.is_signed = r.bernoulli(0.5);
  a.rounding = r.bernoulli(0.5) ? Rounding::kRoundHalfUp : Rounding::kTruncate;
  a.saturation = r.bernoulli(0.5) ? Saturation::kSaturate : Saturation::kWrap;
  a.dtype = DType::kInt;
  a.int_bits = a.width;
  if (r.bernoulli(cfg.fixed_prob)) {
    a.dtype = DType::kFixed;
    a.int_bits = static_cast<unsigned>(r.uniform_int(1, a.width));
  }
  if (is_comparison(a.kind)) {
    a.width = 1;
    a.is_signed = false;
    a.dtype = DType::kInt;
    a.int_bits = 1;
  }
  return a;
}

LoopAttrs sample_loop_attrs(Rng& r, const GenerationConfig& cfg) {
  LoopAttrs l;
  std::int64_t trip = r.uniform_int(std::min<std::int64_t>(2, cfg.max_trip), cfg.max_trip);
  static constexpr std::int64_t kSteps[] = {1, 1, 2, -1};
  l.step = kSteps[r.index(4)];
  l.start = r.uniform_int(0, 8);
  l.end = l.start + trip * l.step;
  l.pipelined = r.bernoulli(0.5);
  l.flattened = r.bernoulli(0.5);
  l.fully_unrolled = r.bernoulli(0.3);
  l.unroll_factor = 1;
  if (!l.fully_unrolled && r.bernoulli(0.4)) {
    l.unroll_factor = static_cast<unsigned>(r.uniform_int(1, trip));
  }
  return l;
}

[[noreturn]] void infeasible(const std::string& why) { throw PlacementInfeasible(why); }

// Scope information for a node inserted at the end of `region`.
struct Scope {
  ComputationGraph& g;
  NodeId self;
  std::unordered_map<std::uint32_t, std::size_t> pos;
  std::vector<NodeId> chain;  // enclosing regions, outermost first

  Scope(ComputationGraph& graph, NodeId id) : g(graph), self(id) {
    auto order = program_order(g);
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i].value] = i;
    chain = region_chain(g, id);
  }

  bool in_chain(NodeId n) const { return std::find(chain.begin(), chain.end(), n) != chain.end(); }

  std::vector<Producer> value_producers() const {
    std::vector<Producer> out;
    for (std::uint32_t i = 0; i < g.inputs.size(); ++i) out.push_back(Producer::of_input(i));
    for (const Node& n : g.nodes) {
      if (n.id == self) continue;
      switch (n.kind()) {
        case NodeKind::kOp:
          if (pos.at(n.id.value) < pos.at(self.value)) out.push_back(Producer::of_node(n.id));
          break;
        case NodeKind::kLoop:
          if (in_chain(n.id)) out.push_back(Producer::of_node(n.id));
          break;
        case NodeKind::kDep:
          if (n.region && in_chain(*n.region)) out.push_back(Producer::of_node(n.id));
          break;
        case NodeKind::kBranch: break;
      }
    }
    return out;
  }
};

unsigned loop_depth(const ComputationGraph& g, std::optional<NodeId> region) {
  if (!region) return 0;
  unsigned depth = g.node(*region).kind() == NodeKind::kLoop ? 1 : 0;
  for (NodeId r : region_chain(g, *region)) {
    if (g.node(r).kind() == NodeKind::kLoop) ++depth;
  }
  return depth;
}

std::vector<std::optional<NodeId>> region_candidates(const ComputationGraph& g) {
  std::vector<std::optional<NodeId>> out{std::nullopt};
  for (const Node& n : g.nodes) {
    if (n.kind() == NodeKind::kLoop || n.kind() == NodeKind::kBranch) out.emplace_back(n.id);
  }
  return out;
}

std::optional<NodeId> resolve_region(const ComputationGraph& g, const ConstructionAction& a, Rng& r) {
  if (a.region) {
    if (*a.region) {
      auto idx = g.find(**a.region);
      if (!idx) infeasible("target region does not exist");
      NodeKind k = g.nodes[*idx].kind();
      if (k != NodeKind::kLoop && k != NodeKind::kBranch) infeasible("target region is not a loop or branch");
    }
    return *a.region;
  }
  auto cands = region_candidates(g);
  return cands[r.index(cands.size())];
}

Producer random_const(Rng& r, unsigned width, bool is_signed) {
  std::uint64_t v = r.next();
  if (width < 64) v &= (std::uint64_t{1} << width) - 1;
  return Producer::of_const(v, width, is_signed);
}

void add_op(ComputationGraph& g, const ConstructionAction& a, Rng& r, const GenerationConfig& cfg,
            ConstructionAction& logged) {
  // Attributes, region and operands draw from separate streams so that a
  // logged action with fixed attrs and region replays its operand choices.
  Rng ra(r.next()), rg(r.next());
  OpAttrs attrs;
  if (a.attrs) {
    if (!std::holds_alternative<OpAttrs>(*a.attrs)) infeasible("AddOp requires op attributes");
    attrs = std::get<OpAttrs>(*a.attrs);
  } else {
    attrs = sample_op_attrs(ra, cfg);
  }
  std::optional<NodeId> region = resolve_region(g, a, rg);
  NodeId id = g.fresh_id();
  g.nodes.push_back({id, attrs, region});
  Scope scope(g, id);
  auto producers = scope.value_producers();

  for (unsigned slot = 0; slot < op_arity(attrs.kind); ++slot) {
    Producer p;
    if (attrs.kind == OpKind::kMux && slot == 0) {
      std::vector<Producer> sel;
      for (const Producer& q : producers) {
        if (g.type_of(q).width == 1) sel.push_back(q);
      }
      if (sel.empty()) infeasible("no 1-bit select value in scope");
      p = sel[r.index(sel.size())];
    } else if (producers.empty() || r.bernoulli(cfg.const_operand_prob)) {
      unsigned w = is_comparison(attrs.kind)
                       ? static_cast<unsigned>(r.uniform_int(cfg.min_width, cfg.max_width))
                       : attrs.width;
      p = random_const(r, w, attrs.is_signed);
    } else {
      p = producers[r.index(producers.size())];
    }
    g.edges.push_back({p, id, slot});
  }
  logged.attrs = attrs;
  logged.region = region;
}

void add_loop(ComputationGraph& g, const ConstructionAction& a, Rng& r, const GenerationConfig& cfg,
              ConstructionAction& logged) {
  Rng ra(r.next()), rg(r.next());
  LoopAttrs attrs;
  if (a.attrs) {
    if (!std::holds_alternative<LoopAttrs>(*a.attrs)) infeasible("AddLoop requires loop attributes");
    attrs = std::get<LoopAttrs>(*a.attrs);
    std::int64_t trip = attrs.trip();
    if (trip < 1 || trip > 64 || attrs.unroll_factor < 1 || attrs.unroll_factor > trip) {
      infeasible("loop attributes out of range");
    }
  } else {
    attrs = sample_loop_attrs(ra, cfg);
  }
  std::optional<NodeId> region;
  if (a.region) {
    region = resolve_region(g, a, rg);
    if (loop_depth(g, region) >= cfg.max_loop_depth) infeasible("loop nesting limit reached");
  } else {
    std::vector<std::optional<NodeId>> cands;
    for (const auto& c : region_candidates(g)) {
      if (loop_depth(g, c) < cfg.max_loop_depth) cands.push_back(c);
    }
    if (cands.empty()) infeasible("loop nesting limit reached");
    region = cands[rg.index(cands.size())];
  }
  g.nodes.push_back({g.fresh_id(), attrs, region});
  logged.attrs = attrs;
  logged.region = region;
}

void add_branch(ComputationGraph& g, const ConstructionAction& a, Rng& r, ConstructionAction& logged) {
  if (a.attrs && !std::holds_alternative<BranchAttrs>(*a.attrs)) infeasible("AddBranch requires branch attributes");
  Rng ra(r.next()), rg(r.next());
  std::optional<NodeId> region = resolve_region(g, a, rg);
  NodeId id = g.fresh_id();
  g.nodes.push_back({id, BranchAttrs{}, region});
  Scope scope(g, id);
  std::vector<NodeId> conds;
  for (const Producer& p : scope.value_producers()) {
    if (p.kind != Producer::Kind::kNode) continue;
    const Node& n = g.node(p.node);
    if (n.kind() == NodeKind::kOp && n.op().width == 1) conds.push_back(n.id);
  }
  BranchAttrs attrs;
  if (a.attrs) {
    attrs = std::get<BranchAttrs>(*a.attrs);
    if (std::find(conds.begin(), conds.end(), attrs.condition) == conds.end()) {
      infeasible("branch condition not in scope");
    }
  } else {
    if (conds.empty()) infeasible("no 1-bit condition in scope");
    attrs.condition = conds[ra.index(conds.size())];
  }
  g.nodes.back().attrs = attrs;
  logged.attrs = attrs;
  logged.region = region;
}

void add_dep(ComputationGraph& g, const ConstructionAction& a, Rng& r, ConstructionAction& logged) {
  Rng ra(r.next());
  std::optional<DepAttrs> given;
  if (a.attrs) {
    if (!std::holds_alternative<DepAttrs>(*a.attrs)) infeasible("AddDep requires dep attributes");
    given = std::get<DepAttrs>(*a.attrs);
  }
  std::vector<NodeId> sources;
  for (const Node& n : g.nodes) {
    if (n.kind() != NodeKind::kOp) continue;
    auto loop = innermost_loop(g, n.id);
    if (!loop) continue;
    if (a.region && *a.region != loop) continue;
    if (given && given->source != n.id) continue;
    sources.push_back(n.id);
  }
  if (sources.empty()) infeasible("no op node inside a loop");
  NodeId src = sources[ra.index(sources.size())];
  NodeId loop = *innermost_loop(g, src);
  std::int64_t trip = g.node(loop).loop().trip();
  unsigned distance;
  if (given) {
    distance = given->distance;
    if (distance < 1 || distance > trip) infeasible("dep distance exceeds trip count");
  } else {
    distance = static_cast<unsigned>(ra.uniform_int(1, trip));
  }
  const OpAttrs& sop = g.node(src).op();
  unsigned arity = op_arity(sop.kind);
  unsigned slot = sop.kind == OpKind::kMux ? 1 + static_cast<unsigned>(r.index(2))
                                           : static_cast<unsigned>(r.index(arity));

  NodeId id = g.fresh_id();
  DepAttrs attrs{distance, src};
  g.nodes.push_back({id, attrs, loop});

  Edge* rewired = nullptr;
  for (Edge& e : g.edges) {
    if (e.consumer == src && e.slot == slot) rewired = &e;
  }
  Producer old = rewired->producer;
  rewired->producer = Producer::of_node(id);

  bool pre_loop = old.kind != Producer::Kind::kNode;
  if (old.kind == Producer::Kind::kNode) {
    const Node& pn = g.node(old.node);
    if (pn.kind() == NodeKind::kOp) {
      auto chain = region_chain(g, pn.id);
      bool inside = std::find(chain.begin(), chain.end(), loop) != chain.end();
      auto order = program_order(g);
      auto at = [&](NodeId n) { return std::find(order.begin(), order.end(), n) - order.begin(); };
      pre_loop = !inside && at(pn.id) < at(loop);
    }
  }
  if (pre_loop) g.edges.push_back({old, id, 0});
  logged.attrs = attrs;
  logged.region = std::optional<NodeId>(loop);
}

}  // namespace

ComputationGraph apply_action(const ComputationGraph& g, const ConstructionAction& a, Rng& rng,
                              const GenerationConfig& cfg) {
  ComputationGraph out = g;
  ConstructionAction logged;
  logged.kind = a.kind;
  // A fully specified action (as found in an action log) replays with its
  // own seed; otherwise operand selection is seeded from `rng`.
  logged.seed = a.attrs && a.region ? a.seed : rng.next();
  Rng r(logged.seed);
  switch (a.kind) {
    case ActionKind::kAddOp: add_op(out, a, r, cfg, logged); break;
    case ActionKind::kAddLoop: add_loop(out, a, r, cfg, logged); break;
    case ActionKind::kAddBranch: add_branch(out, a, r, logged); break;
    case ActionKind::kAddDep: add_dep(out, a, r, logged); break;
  }
  out.outputs = compute_outputs(out);
  out.action_log.push_back(std::move(logged));
  return out;
}

bool action_applicable(const ComputationGraph& g, ActionKind k, const GenerationConfig& cfg) {
  switch (k) {
    case ActionKind::kAddOp: return true;
    case ActionKind::kAddLoop: return cfg.max_loop_depth > 0;
    case ActionKind::kAddBranch:
      // A top-level branch appended last sees every 1-bit op.
      return std::any_of(g.nodes.begin(), g.nodes.end(),
                         [](const Node& n) { return n.kind() == NodeKind::kOp && n.op().width == 1; });
    case ActionKind::kAddDep:
      return std::any_of(g.nodes.begin(), g.nodes.end(), [&](const Node& n) {
        return n.kind() == NodeKind::kOp && innermost_loop(g, n.id).has_value();
      });
  }
  return false;
}

ComputationGraph generate_fresh(Rng& rng, unsigned length, const GenerationConfig& cfg) {
  if (length < 1 || length > 40) throw ConfigError("fresh graph length must be in [1,40]");
  ComputationGraph g;
  auto n_inputs = static_cast<unsigned>(rng.uniform_int(cfg.min_inputs, cfg.max_inputs));
  for (unsigned i = 0; i < n_inputs; ++i) {
    PrimaryInput in;
    in.name = "in" + std::to_string(i);
    in.width = static_cast<unsigned>(rng.uniform_int(cfg.min_width, cfg.max_width));
    in.is_signed = rng.bernoulli(0.5);
    in.dtype = DType::kInt;
    in.int_bits = in.width;
    if (rng.bernoulli(cfg.fixed_prob)) {
      in.dtype = DType::kFixed;
      in.int_bits = static_cast<unsigned>(rng.uniform_int(1, in.width));
    }
    g.inputs.push_back(in);
  }
  const double weights[kNumActionKinds] = {cfg.weight_op, cfg.weight_loop, cfg.weight_branch, cfg.weight_dep};
  double total = 0;
  for (double w : weights) total += w;
  unsigned accepted = 0, stalled = 0;
  while (accepted < length) {
    double x = rng.uniform_real() * total;
    int kind = 0;
    while (kind < kNumActionKinds - 1 && x >= weights[kind]) x -= weights[kind++];
    ConstructionAction a;
    a.kind = static_cast<ActionKind>(kind);
    try {
      g = apply_action(g, a, rng, cfg);
      ++accepted;
      stalled = 0;
    } catch (const PlacementInfeasible&) {
      if (++stalled >= 10 * length) {
        throw GenerationStalled("fresh generation stalled after " + std::to_string(stalled) +
                                " infeasible placements");
      }
    }
  }
  return g;
}

}  // namespace evolvegen::graph
