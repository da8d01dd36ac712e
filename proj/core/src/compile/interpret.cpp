#include "evolvegen/compile/interpret.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "evolvegen/compile/semantics.hpp"

namespace evolvegen::compile {

using namespace graph;

unsigned result_width(const ComputationGraph& g) {
  unsigned w = 1;
  for (NodeId o : g.outputs) w = std::max(w, g.node(o).op().width);
  return w;
}

namespace {

// Iteration vector: one index per enclosing loop, outermost first.
using Iters = std::vector<std::int64_t>;

class Interpreter {
 public:
  Interpreter(const ComputationGraph& g, const std::vector<Word>& inputs) : g_(g), inputs_(inputs) {
    for (const Node& n : g.nodes) {
      Info info;
      info.chain = region_chain(g, n.id);
      for (NodeId r : info.chain) {
        if (g.node(r).kind() == NodeKind::kLoop) info.loops.push_back(r);
      }
      info_.emplace(n.id.value, std::move(info));
    }
    for (const Edge& e : g.edges) operands_[e.consumer.value].push_back(&e);
    for (auto& [id, ops] : operands_) {
      std::sort(ops.begin(), ops.end(), [](const Edge* a, const Edge* b) { return a->slot < b->slot; });
    }
  }

  // Value of producer `p` read by a site whose enclosing regions are
  // `chain` with loop iterations `iters` (aligned with the site's loops).
  Word read(const Producer& p, const std::vector<NodeId>& chain, const Iters& iters) {
    switch (p.kind) {
      case Producer::Kind::kInput: return truncate(inputs_.at(p.input), g_.inputs[p.input].width);
      case Producer::Kind::kConst: return p.value;
      case Producer::Kind::kNode: break;
    }
    const Node& n = g_.node(p.node);
    const std::vector<NodeId> site_loops = loops_of(chain);
    if (n.kind() == NodeKind::kLoop) {
      auto it = std::find(site_loops.begin(), site_loops.end(), n.id);
      if (it == site_loops.end()) throw std::logic_error("induction variable read outside its loop");
      const LoopAttrs& l = n.loop();
      std::int64_t i = iters[static_cast<std::size_t>(it - site_loops.begin())];
      return from_signed(l.start + i * l.step, kInductionWidth);
    }
    const Info& info = info_.at(n.id.value);
    // Longest common region prefix.
    std::size_t common = 0;
    while (common < chain.size() && common < info.chain.size() && chain[common] == info.chain[common]) ++common;
    Iters target;
    std::size_t shared_loops = 0;
    for (std::size_t k = 0; k < common; ++k) {
      if (g_.node(chain[k]).kind() == NodeKind::kLoop) ++shared_loops;
    }
    for (std::size_t k = 0; k < info.loops.size(); ++k) {
      if (k < shared_loops) {
        target.push_back(iters[k]);
      } else {
        target.push_back(g_.node(info.loops[k]).loop().trip() - 1);
      }
    }
    Word v = n.kind() == NodeKind::kDep ? dep_value(n, target) : op_value(n, target);
    for (std::size_t k = common; k < info.chain.size(); ++k) {
      const Node& b = g_.node(info.chain[k]);
      if (b.kind() != NodeKind::kBranch) continue;
      if (!read(Producer::of_node(b.branch().condition), chain, iters)) v = 0;
    }
    return v;
  }

  Word op_value(const Node& n, const Iters& iters) {
    auto key = memo_key(n.id, iters);
    auto hit = memo_.find(key);
    if (hit != memo_.end()) return hit->second;
    const Info& info = info_.at(n.id.value);
    std::vector<Word> raw;
    std::vector<ValueType> types;
    for (const Edge* e : operands_.at(n.id.value)) {
      if (e->producer.kind == Producer::Kind::kNode && g_.node(e->producer.node).kind() == NodeKind::kDep) {
        const Node& d = g_.node(e->producer.node);
        // A dep is read with the iteration vector of its own loop nest.
        const Info& dinfo = info_.at(d.id.value);
        Iters sub(iters.begin(), iters.begin() + static_cast<std::ptrdiff_t>(dinfo.loops.size()));
        raw.push_back(dep_value(d, sub));
      } else {
        raw.push_back(read(e->producer, info.chain, iters));
      }
      types.push_back(g_.type_of(e->producer));
    }
    Word v = eval_op_scalar(n.op(), raw, types);
    memo_.emplace(std::move(key), v);
    return v;
  }

  Word dep_value(const Node& d, const Iters& iters) {
    const DepAttrs& attrs = d.dep();
    const ValueType type = g_.type_of(Producer::of_node(attrs.source));
    const Info& info = info_.at(d.id.value);
    std::int64_t i = iters.back();
    if (i < static_cast<std::int64_t>(attrs.distance)) {
      auto it = operands_.find(d.id.value);
      if (it == operands_.end() || it->second.empty()) return 0;
      const Producer& init = it->second.front()->producer;
      return cast_scalar(read(init, info.chain, iters), g_.type_of(init), type);
    }
    Iters earlier = iters;
    earlier.back() = i - attrs.distance;
    return read(Producer::of_node(attrs.source), info.chain, earlier);
  }

 private:
  struct Info {
    std::vector<NodeId> chain;
    std::vector<NodeId> loops;
  };

  std::vector<NodeId> loops_of(const std::vector<NodeId>& chain) const {
    std::vector<NodeId> out;
    for (NodeId r : chain) {
      if (g_.node(r).kind() == NodeKind::kLoop) out.push_back(r);
    }
    return out;
  }

  static std::string memo_key(NodeId id, const Iters& iters) {
    std::string k = std::to_string(id.value);
    for (std::int64_t i : iters) k += ',' + std::to_string(i);
    return k;
  }

  const ComputationGraph& g_;
  const std::vector<Word>& inputs_;
  std::unordered_map<std::uint32_t, Info> info_;
  std::unordered_map<std::uint32_t, std::vector<const Edge*>> operands_;
  std::unordered_map<std::string, Word> memo_;
};

}  // namespace

std::map<std::string, Word> interpret(const ComputationGraph& g, const std::map<std::string, Word>& inputs) {
  std::vector<Word> vec(g.inputs.size(), 0);
  for (std::size_t i = 0; i < g.inputs.size(); ++i) {
    auto it = inputs.find(g.inputs[i].name);
    if (it == inputs.end()) throw std::invalid_argument("unbound input '" + g.inputs[i].name + "'");
    vec[i] = it->second;
  }
  Interpreter interp(g, vec);
  std::map<std::string, Word> out;
  Word result = 0;
  for (NodeId o : g.outputs) {
    Word v = interp.read(Producer::of_node(o), {}, {});
    out["node" + std::to_string(o.value)] = v;
    result ^= v;
  }
  out["result"] = result;
  return out;
}

Word interpret_result(const ComputationGraph& g, const std::vector<Word>& inputs) {
  Interpreter interp(g, inputs);
  Word result = 0;
  for (NodeId o : g.outputs) result ^= interp.read(Producer::of_node(o), {}, {});
  return result;
}

}  // namespace evolvegen::compile
