#include "evolvegen/graph/graph.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace evolvegen::graph {

namespace {

constexpr std::array<std::string_view, kNumOpKinds> kOpNames = {
    "ADD", "SUB", "MUL", "AND", "OR", "XOR", "NOT", "SHL", "SHR", "EQ", "NEQ", "LT", "LE", "MUX"};

constexpr std::array<std::string_view, kNumActionKinds> kActionNames = {"AddOp", "AddLoop", "AddBranch",
                                                                         "AddDep"};

}  // namespace

std::string_view op_kind_name(OpKind k) { return kOpNames[static_cast<std::size_t>(k)]; }

std::optional<OpKind> parse_op_kind(std::string_view name) {
  for (std::size_t i = 0; i < kOpNames.size(); ++i) {
    if (kOpNames[i] == name) return static_cast<OpKind>(i);
  }
  return std::nullopt;
}

unsigned op_arity(OpKind k) {
  switch (k) {
    case OpKind::kNot: return 1;
    case OpKind::kMux: return 3;
    default: return 2;
  }
}

bool is_comparison(OpKind k) {
  return k == OpKind::kEq || k == OpKind::kNeq || k == OpKind::kLt || k == OpKind::kLe;
}

std::string_view action_kind_name(ActionKind k) { return kActionNames[static_cast<std::size_t>(k)]; }

std::optional<ActionKind> parse_action_kind(std::string_view name) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == name) return static_cast<ActionKind>(i);
  }
  return std::nullopt;
}

std::int64_t LoopAttrs::trip() const {
  if (step == 0) return 0;
  std::int64_t span = end - start;
  if ((span > 0) != (step > 0) || span == 0) return 0;
  std::int64_t a = span < 0 ? -span : span;
  std::int64_t b = step < 0 ? -step : step;
  return (a + b - 1) / b;
}

std::optional<std::size_t> ComputationGraph::find(NodeId id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return i;
  }
  return std::nullopt;
}

const Node& ComputationGraph::node(NodeId id) const {
  auto i = find(id);
  if (!i) throw std::out_of_range("unknown node id " + std::to_string(id.value));
  return nodes[*i];
}

Node& ComputationGraph::node(NodeId id) {
  auto i = find(id);
  if (!i) throw std::out_of_range("unknown node id " + std::to_string(id.value));
  return nodes[*i];
}

NodeId ComputationGraph::fresh_id() const {
  std::uint32_t next = 0;
  for (const Node& n : nodes) next = std::max(next, n.id.value + 1);
  return NodeId{next};
}

std::vector<const Edge*> ComputationGraph::operands(NodeId consumer) const {
  std::vector<const Edge*> out;
  for (const Edge& e : edges) {
    if (e.consumer == consumer) out.push_back(&e);
  }
  std::sort(out.begin(), out.end(), [](const Edge* a, const Edge* b) { return a->slot < b->slot; });
  return out;
}

ValueType ComputationGraph::type_of(const Producer& p) const {
  switch (p.kind) {
    case Producer::Kind::kInput: {
      const PrimaryInput& in = inputs.at(p.input);
      return {in.width, in.is_signed, in.dtype == DType::kFixed ? in.width - in.int_bits : 0};
    }
    case Producer::Kind::kConst: return {p.width, p.is_signed, 0};
    case Producer::Kind::kNode: break;
  }
  const Node& n = node(p.node);
  switch (n.kind()) {
    case NodeKind::kOp: return {n.op().width, n.op().is_signed, n.op().frac_bits()};
    case NodeKind::kLoop: return {kInductionWidth, true, 0};
    case NodeKind::kDep: return type_of(Producer::of_node(n.dep().source));
    case NodeKind::kBranch: break;
  }
  throw std::logic_error("branch node used as a value");
}

std::vector<NodeId> program_order(const ComputationGraph& g) {
  std::unordered_map<std::uint32_t, std::vector<NodeId>> children;
  std::vector<NodeId> roots;
  for (const Node& n : g.nodes) {
    if (n.region) {
      children[n.region->value].push_back(n.id);
    } else {
      roots.push_back(n.id);
    }
  }
  std::vector<NodeId> order;
  order.reserve(g.nodes.size());
  std::set<std::uint32_t> seen;
  auto visit = [&](auto&& self, NodeId id) -> void {
    if (!seen.insert(id.value).second) return;
    order.push_back(id);
    auto it = children.find(id.value);
    if (it == children.end()) return;
    for (NodeId c : it->second) self(self, c);
  };
  for (NodeId r : roots) visit(visit, r);
  return order;
}

std::vector<NodeId> region_chain(const ComputationGraph& g, NodeId n) {
  std::vector<NodeId> chain;
  std::optional<NodeId> cur = g.node(n).region;
  while (cur) {
    if (chain.size() > g.nodes.size()) throw std::logic_error("region cycle");
    chain.push_back(*cur);
    cur = g.node(*cur).region;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::optional<NodeId> innermost_loop(const ComputationGraph& g, NodeId n) {
  auto chain = region_chain(g, n);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    if (g.node(*it).kind() == NodeKind::kLoop) return *it;
  }
  return std::nullopt;
}

std::vector<NodeId> compute_outputs(const ComputationGraph& g) {
  std::set<std::uint32_t> used;
  for (const Edge& e : g.edges) {
    if (e.producer.kind == Producer::Kind::kNode) used.insert(e.producer.node.value);
  }
  for (const Node& n : g.nodes) {
    if (n.kind() == NodeKind::kBranch) used.insert(n.branch().condition.value);
  }
  std::vector<NodeId> out;
  for (const Node& n : g.nodes) {
    if (n.kind() == NodeKind::kOp && !used.count(n.id.value)) out.push_back(n.id);
  }
  return out;
}

namespace {

struct Checker {
  const ComputationGraph& g;
  ValidationReport report;
  std::unordered_map<std::uint32_t, std::size_t> pos;  // program-order position
  std::unordered_map<std::uint32_t, std::size_t> index;

  void add(std::string msg) { report.violations.push_back(std::move(msg)); }

  static std::string id_str(NodeId id) { return "node " + std::to_string(id.value); }

  bool has(NodeId id) const { return index.count(id.value) != 0; }
  const Node& at(NodeId id) const { return g.nodes[index.at(id.value)]; }

  bool chain_contains(NodeId n, NodeId anc) const {
    std::optional<NodeId> cur = at(n).region;
    while (cur) {
      if (*cur == anc) return true;
      cur = at(*cur).region;
    }
    return false;
  }

  void check_inputs() {
    std::set<std::string> names;
    for (std::size_t i = 0; i < g.inputs.size(); ++i) {
      const PrimaryInput& in = g.inputs[i];
      if (in.name.empty()) add("input " + std::to_string(i) + " has an empty name");
      if (!names.insert(in.name).second) add("duplicate input name '" + in.name + "'");
      if (in.width < 1 || in.width > 64) add("input '" + in.name + "' width outside [1,64]");
      if (in.dtype == DType::kFixed && (in.int_bits < 1 || in.int_bits > in.width)) {
        add("input '" + in.name + "' int_bits outside [1,width]");
      }
    }
  }

  bool check_structure() {
    bool ok = true;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      if (!index.emplace(g.nodes[i].id.value, i).second) {
        add("duplicate " + id_str(g.nodes[i].id));
        ok = false;
      }
    }
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const Node& n = g.nodes[i];
      if (!n.region) continue;
      auto it = index.find(n.region->value);
      if (it == index.end()) {
        add(id_str(n.id) + " region refers to a missing node");
        ok = false;
        continue;
      }
      NodeKind pk = g.nodes[it->second].kind();
      if (pk != NodeKind::kLoop && pk != NodeKind::kBranch) {
        add(id_str(n.id) + " region parent is not a loop or branch");
        ok = false;
      }
      if (it->second >= i) {
        add(id_str(n.id) + " region parent created after child");
        ok = false;
      }
    }
    return ok;
  }

  // Whether producer p may feed consumer c (an OpNode).
  bool op_operand_visible(const Producer& p, NodeId c) const {
    if (p.kind != Producer::Kind::kNode) return true;
    if (!has(p.node)) return false;
    const Node& pn = at(p.node);
    switch (pn.kind()) {
      case NodeKind::kOp: return pos.at(p.node.value) < pos.at(c.value);
      case NodeKind::kLoop: return chain_contains(c, p.node);
      case NodeKind::kDep: return pn.region && chain_contains(c, *pn.region);
      case NodeKind::kBranch: return false;
    }
    return false;
  }

  void check_producer(const Producer& p, const std::string& where) {
    switch (p.kind) {
      case Producer::Kind::kInput:
        if (p.input >= g.inputs.size()) add(where + " reads a missing input");
        break;
      case Producer::Kind::kConst:
        if (p.width < 1 || p.width > 64) {
          add(where + " constant width outside [1,64]");
        } else if (p.width < 64 && (p.value >> p.width) != 0) {
          add(where + " constant does not fit its width");
        }
        break;
      case Producer::Kind::kNode:
        if (!has(p.node)) add(where + " reads a missing node");
        break;
    }
  }

  void check_nodes() {
    for (const Node& n : g.nodes) {
      const std::string who = id_str(n.id);
      switch (n.kind()) {
        case NodeKind::kOp: {
          const OpAttrs& a = n.op();
          if (a.width < 1 || a.width > 64) add(who + " width outside [1,64]");
          if (is_comparison(a.kind) && a.width != 1) add(who + " comparison width ≠ 1");
          if (a.dtype == DType::kFixed && (a.int_bits < 1 || a.int_bits > a.width)) {
            add(who + " int_bits outside [1,width]");
          }
          break;
        }
        case NodeKind::kLoop: {
          const LoopAttrs& l = n.loop();
          std::int64_t trip = l.trip();
          if (l.step == 0) {
            add(who + " loop step is zero");
          } else if (trip < 1 || trip > 64) {
            add(who + " trip count outside [1,64]");
          } else if (l.unroll_factor < 1 || l.unroll_factor > trip) {
            add(who + " unroll factor exceeds trip count");
          }
          break;
        }
        case NodeKind::kBranch: {
          NodeId c = n.branch().condition;
          if (!has(c)) {
            add(who + " condition refers to a missing node");
          } else if (at(c).kind() != NodeKind::kOp) {
            add(who + " condition is not an op node");
          } else {
            if (at(c).op().width != 1) add(who + " condition width ≠ 1");
            if (pos.at(c.value) >= pos.at(n.id.value)) add(who + " condition does not precede branch");
          }
          break;
        }
        case NodeKind::kDep: {
          const DepAttrs& d = n.dep();
          if (!n.region || at(*n.region).kind() != NodeKind::kLoop) {
            add(who + " dep outside loop");
            break;
          }
          std::int64_t trip = at(*n.region).loop().trip();
          if (d.distance < 1) add(who + " distance is zero");
          if (static_cast<std::int64_t>(d.distance) > trip) add(who + " distance exceeds trip count");
          if (!has(d.source) || at(d.source).kind() != NodeKind::kOp) {
            add(who + " source is not an op node");
          } else if (innermost_loop(g, d.source) != n.region) {
            add(who + " source is not in the dep's loop");
          }
          break;
        }
      }
    }
  }

  void check_edges() {
    std::unordered_map<std::uint32_t, std::vector<unsigned>> slots;
    for (const Edge& e : g.edges) {
      std::string where = "edge into " + id_str(e.consumer) + " slot " + std::to_string(e.slot);
      check_producer(e.producer, where);
      if (!has(e.consumer)) {
        add(where + " consumer missing");
        continue;
      }
      slots[e.consumer.value].push_back(e.slot);
      const Node& c = at(e.consumer);
      if (e.producer.kind == Producer::Kind::kNode && has(e.producer.node) &&
          at(e.producer.node).kind() == NodeKind::kBranch) {
        add(where + " reads a branch node");
        continue;
      }
      if (c.kind() == NodeKind::kOp) {
        if (e.producer.kind == Producer::Kind::kNode && has(e.producer.node) &&
            !op_operand_visible(e.producer, e.consumer)) {
          add(where + " producer not visible");
        }
        if (c.op().kind == OpKind::kMux && e.slot == 0 && has_type(e.producer) &&
            g.type_of(e.producer).width != 1) {
          add(where + " mux select width ≠ 1");
        }
      } else if (c.kind() == NodeKind::kDep) {
        if (e.slot != 0) add(where + " dep accepts only an init operand");
        if (e.producer.kind == Producer::Kind::kNode && has(e.producer.node) && c.region) {
          const Node& pn = at(e.producer.node);
          NodeId loop = *c.region;
          bool pre_loop = pn.kind() == NodeKind::kOp && pn.id != loop && !chain_contains(pn.id, loop) &&
                          pos.at(pn.id.value) < pos.at(loop.value);
          if (!pre_loop) add(where + " dep init is not a pre-loop value");
        }
      } else {
        add(where + " consumer is not an op or dep node");
      }
    }
    for (const Node& n : g.nodes) {
      std::vector<unsigned> s = slots[n.id.value];
      std::sort(s.begin(), s.end());
      if (n.kind() == NodeKind::kOp) {
        unsigned arity = op_arity(n.op().kind);
        bool good = s.size() == arity;
        for (unsigned k = 0; good && k < arity; ++k) good = s[k] == k;
        if (!good) add(id_str(n.id) + " operand count mismatch");
      } else if (n.kind() == NodeKind::kDep) {
        if (s.size() > 1) add(id_str(n.id) + " has more than one init operand");
      }
    }
  }

  bool has_type(const Producer& p) const {
    switch (p.kind) {
      case Producer::Kind::kInput: return p.input < g.inputs.size();
      case Producer::Kind::kConst: return true;
      case Producer::Kind::kNode:
        if (!has(p.node)) return false;
        if (at(p.node).kind() == NodeKind::kDep) return has(at(p.node).dep().source);
        return at(p.node).kind() != NodeKind::kBranch;
    }
    return false;
  }

  void check_outputs() {
    if (g.outputs != compute_outputs(g)) add("outputs do not match the graph's sink op nodes");
  }
};

}  // namespace

ValidationReport validate(const ComputationGraph& g) {
  Checker c{g, {}, {}, {}};
  c.check_inputs();
  if (!c.check_structure()) return c.report;
  auto order = program_order(g);
  for (std::size_t i = 0; i < order.size(); ++i) c.pos[order[i].value] = i;
  c.check_nodes();
  c.check_edges();
  c.check_outputs();
  return c.report;
}

}  // namespace evolvegen::graph
