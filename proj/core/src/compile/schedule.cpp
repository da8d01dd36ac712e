#include "evolvegen/compile/schedule.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "evolvegen/common/error.hpp"
#include "evolvegen/compile/interpret.hpp"
#include "lower_op.hpp"

namespace evolvegen::compile {

using namespace graph;
using ts::ExprId;
using ts::TransitionSystem;

std::string_view schedule_kind_name(ScheduleKind k) { return k == ScheduleKind::kBasic ? "basic" : "optimized"; }

std::optional<ScheduleKind> parse_schedule_kind(std::string_view name) {
  if (name == "basic") return ScheduleKind::kBasic;
  if (name == "optimized") return ScheduleKind::kOptimized;
  return std::nullopt;
}

namespace {

unsigned bits_for(std::uint64_t n) {
  unsigned b = 1;
  while (b < 64 && (n >> b) != 0) ++b;
  return b;
}

// How one graph loop is realised.
struct Plan {
  bool full = false;  // replicated `trip` times, no counter
  unsigned u = 1;     // replicas per dynamic iteration
};

// One enclosing graph loop of an instance. `replica` is the iteration for a
// fully unrolled loop, or the replica index within a dynamic iteration.
struct Frame {
  NodeId loop;
  bool full = false;
  unsigned replica = 0;
  int loop_inst = -1;
};

// One copy of an OpNode.
struct VInst {
  NodeId node;
  std::vector<Frame> env;
  int step = -1;
  bool force_reg = false;
  bool built = false;
  ExprId expr = 0;
  std::optional<std::uint32_t> reg;
};

struct Dim {
  NodeId loop;
  std::int64_t count = 1;
  unsigned u = 1;
  std::uint32_t ctr = 0;
};

struct Item {
  bool is_loop = false;
  int index = 0;
};

// Dynamic loop (possibly a flattened nest) driven by counters.
struct LoopInst {
  std::vector<Dim> dims;
  std::vector<Item> body;
  bool pipelined = false;
  int first_step = -1;
  int last_step = -1;
};

// Recurrence history of one DepNode in one dynamic loop instance.
struct DepHist {
  NodeId dep;
  int loop_inst = -1;
  std::vector<Frame> env;  // the dep's frames with its own loop at replica 0
  std::vector<std::uint32_t> regs;
};

struct Site {
  const std::vector<NodeId>* chain = nullptr;
  std::vector<Frame> env;
  int step = -1;
};

class Scheduler {
 public:
  Scheduler(const ComputationGraph& g, const ScheduleStrategy& s) : g_(g), s_(s) {
    if (s_.register_depth_threshold == 0) throw ConfigError("register_depth_threshold must be at least 1");
    for (const Node& n : g.nodes) {
      children_[n.region ? n.region->value + 1 : 0].push_back(n.id);
      chains_[n.id.value] = region_chain(g, n.id);
      if (n.kind() == NodeKind::kLoop) {
        const LoopAttrs& l = n.loop();
        Plan p;
        if (s_.kind == ScheduleKind::kOptimized) {
          if (l.fully_unrolled || static_cast<std::int64_t>(l.unroll_factor) >= l.trip()) {
            p.full = true;
          } else {
            p.u = std::max(1u, l.unroll_factor);
          }
        }
        plans_[n.id.value] = p;
      }
    }
    for (const Edge& e : g.edges) operands_[e.consumer.value].push_back(&e);
    for (auto& [id, ops] : operands_) {
      std::sort(ops.begin(), ops.end(), [](const Edge* a, const Edge* b) { return a->slot < b->slot; });
    }
  }

  void instantiate() { walk(children(0), {}, -1, top_); }

  void assign_steps() {
    linearize(top_);
    if (num_steps_ == 0) num_steps_ = 1;
  }

  std::size_t num_steps() const { return static_cast<std::size_t>(num_steps_); }

  TransitionSystem build() {
    ts_.name = "design";
    for (const PrimaryInput& in : g_.inputs) ts_.add_input(in.name, in.width);
    pc_ = ts_.add_state("pc", bits_for(static_cast<std::uint64_t>(num_steps_)), 0);
    for (std::size_t i = 0; i < loops_.size(); ++i) {
      for (Dim& d : loops_[i].dims) {
        d.ctr = ts_.add_state("ctr" + std::to_string(d.loop.value) + "_" + std::to_string(i),
                              bits_for(static_cast<std::uint64_t>(d.count - 1)), 0);
      }
    }

    for (std::size_t i = 0; i < vals_.size(); ++i) build_val(static_cast<int>(i));
    for (std::size_t i = 0; i < vals_.size(); ++i) {
      if (vals_[i].force_reg) reg_of(static_cast<int>(i));
    }

    // Result, read from the top level during the last step.
    const int last = num_steps_ - 1;
    const unsigned rw = result_width(g_);
    Site root{&empty_chain_, {}, last};
    ExprId result = ts_.zero(rw);
    for (NodeId o : g_.outputs) result = ts_.bxor(result, ts_.zext(read(Producer::of_node(o), root), rw));

    build_control(result);

    // Histories may be created while building updates of other histories.
    for (std::size_t i = 0; i < hists_.size(); ++i) build_hist_update(i);

    for (std::size_t i = 0; i < vals_.size(); ++i) {
      if (!vals_[i].reg) continue;
      ExprId cur = ts_.state_ref(*vals_[i].reg);
      ts_.set_next(*vals_[i].reg, ts_.ite(at_step(vals_[i].step), vals_[i].expr, cur));
    }
    return std::move(ts_);
  }

 private:
  const std::vector<NodeId>& children(std::uint32_t key) {
    auto it = children_.find(key);
    return it == children_.end() ? empty_chain_ : it->second;
  }

  const std::vector<NodeId>& chain(NodeId n) const { return chains_.at(n.value); }

  // ---- instantiation ----

  void walk(const std::vector<NodeId>& kids, const std::vector<Frame>& env, int loop_inst,
            std::vector<Item>& out) {
    for (NodeId c : kids) {
      const Node& n = g_.node(c);
      switch (n.kind()) {
        case NodeKind::kOp: {
          if (vals_.size() >= s_.node_budget) {
            throw ResourceBound("schedule exceeds node budget of " + std::to_string(s_.node_budget));
          }
          VInst v;
          v.node = c;
          v.env = env;
          val_index_[key_string(c, env)] = static_cast<int>(vals_.size());
          vals_.push_back(std::move(v));
          out.push_back({false, static_cast<int>(vals_.size() - 1)});
          break;
        }
        case NodeKind::kDep: break;
        case NodeKind::kBranch: walk(children(c.value + 1), env, loop_inst, out); break;
        case NodeKind::kLoop: walk_loop(n, env, out); break;
      }
    }
  }

  void walk_loop(const Node& n, const std::vector<Frame>& env, std::vector<Item>& out) {
    const Plan p = plans_.at(n.id.value);
    const std::int64_t trip = n.loop().trip();
    if (p.full) {
      for (std::int64_t i = 0; i < trip; ++i) {
        std::vector<Frame> e = env;
        e.push_back({n.id, true, static_cast<unsigned>(i), -1});
        walk(children(n.id.value + 1), e, -1, out);
      }
      return;
    }
    LoopInst li;
    li.dims.push_back({n.id, (trip + p.u - 1) / p.u, p.u, 0});
    NodeId inner = n.id;
    if (s_.kind == ScheduleKind::kOptimized) {
      // Perfect nests marked for flattening collapse into one counter chain.
      while (g_.node(inner).loop().flattened && plans_.at(inner.value).u == 1) {
        const auto& kids = children(inner.value + 1);
        if (kids.size() != 1 || g_.node(kids[0]).kind() != NodeKind::kLoop) break;
        const Plan ip = plans_.at(kids[0].value);
        if (ip.full) break;
        std::int64_t t = g_.node(kids[0]).loop().trip();
        li.dims.push_back({kids[0], (t + ip.u - 1) / ip.u, ip.u, 0});
        inner = kids[0];
      }
    }
    li.pipelined = s_.kind == ScheduleKind::kOptimized && g_.node(inner).loop().pipelined;
    const int idx = static_cast<int>(loops_.size());
    const unsigned u = li.dims.back().u;
    loops_.push_back(std::move(li));
    std::vector<Frame> e = env;
    for (std::size_t k = 0; k + 1 < loops_[idx].dims.size(); ++k) e.push_back({loops_[idx].dims[k].loop, false, 0, idx});
    std::vector<Item> body;
    for (unsigned j = 0; j < u; ++j) {
      std::vector<Frame> ej = e;
      ej.push_back({inner, false, j, idx});
      walk(children(inner.value + 1), ej, idx, body);
    }
    loops_[idx].body = std::move(body);
    out.push_back({true, idx});
  }

  static std::string key_string(NodeId n, const std::vector<Frame>& env) {
    std::string k = std::to_string(n.value);
    for (const Frame& f : env) k += ',' + std::to_string(f.replica);
    return k;
  }

  // ---- step assignment ----

  static bool has_vals(const std::vector<Item>& items, const std::vector<LoopInst>& loops) {
    for (const Item& it : items) {
      if (!it.is_loop || has_vals(loops[it.index].body, loops)) return true;
    }
    return false;
  }

  void linearize(const std::vector<Item>& items) {
    std::vector<int> segment;
    auto flush = [&] {
      if (!segment.empty()) stage(segment);
      segment.clear();
    };
    for (const Item& it : items) {
      if (!it.is_loop) {
        if (s_.kind == ScheduleKind::kBasic) {
          vals_[it.index].step = num_steps_++;
        } else {
          segment.push_back(it.index);
        }
        continue;
      }
      flush();
      LoopInst& li = loops_[it.index];
      if (!has_vals(li.body, loops_)) continue;
      if (s_.kind == ScheduleKind::kBasic) {
        ++num_steps_;  // loop entry
        li.first_step = num_steps_;
        linearize(li.body);
      } else if (li.pipelined &&
                 std::none_of(li.body.begin(), li.body.end(), [](const Item& b) { return b.is_loop; })) {
        li.first_step = num_steps_;
        for (const Item& b : li.body) vals_[b.index].step = num_steps_;
        ++num_steps_;
      } else {
        li.first_step = num_steps_;
        linearize(li.body);
      }
      loops_[it.index].last_step = num_steps_ - 1;
    }
    flush();
  }

  // Depth staging of straight-line ops.
  void stage(const std::vector<int>& segment) {
    const unsigned t = s_.register_depth_threshold;
    std::unordered_map<int, unsigned> level;
    for (int v : segment) level[v] = 0;
    unsigned max_stage = 0;
    for (int v : segment) {
      std::vector<int> deps;
      Site site{&chain(vals_[v].node), vals_[v].env, -1};
      for (const Edge* e : operands_of(vals_[v].node)) read(e->producer, site, &deps);
      unsigned lv = 1;
      for (int d : deps) {
        auto it = level.find(d);
        if (it != level.end()) lv = std::max(lv, it->second + 1);
      }
      level[v] = lv;
      unsigned st = (lv - 1) / t;
      vals_[v].step = num_steps_ + static_cast<int>(st);
      vals_[v].force_reg = lv % t == 0;
      max_stage = std::max(max_stage, st);
    }
    num_steps_ += static_cast<int>(max_stage) + 1;
  }

  const std::vector<const Edge*>& operands_of(NodeId n) {
    auto it = operands_.find(n.value);
    return it == operands_.end() ? no_edges_ : it->second;
  }

  // ---- reads ----

  // Replica key of node `p` as seen from `site`: loops shared with the site
  // use the site's replica, other loops have completed.
  std::vector<Frame> resolve_env(NodeId p, const Site& site) const {
    const auto& pc = chain(p);
    const auto& sc = *site.chain;
    std::size_t common = 0;
    while (common < pc.size() && common < sc.size() && pc[common] == sc[common]) ++common;
    std::vector<Frame> env;
    std::size_t li = 0;
    for (std::size_t k = 0; k < pc.size(); ++k) {
      const Node& r = g_.node(pc[k]);
      if (r.kind() != NodeKind::kLoop) continue;
      if (k < common) {
        env.push_back(site.env[li]);
      } else {
        const Plan p2 = plans_.at(r.id.value);
        std::int64_t trip = r.loop().trip();
        env.push_back({r.id, p2.full, static_cast<unsigned>(p2.full ? trip - 1 : (trip - 1) % p2.u), -1});
      }
      ++li;
    }
    return env;
  }

  std::size_t common_prefix(NodeId p, const Site& site) const {
    const auto& pc = chain(p);
    const auto& sc = *site.chain;
    std::size_t common = 0;
    while (common < pc.size() && common < sc.size() && pc[common] == sc[common]) ++common;
    return common;
  }

  // Expression for producer `p` at `site`. With `collect` set, only records
  // the instances that would be read and returns 0.
  ExprId read(const Producer& p, const Site& site, std::vector<int>* collect = nullptr) {
    switch (p.kind) {
      case Producer::Kind::kInput: return collect ? 0 : ts_.input_ref(p.input);
      case Producer::Kind::kConst: return collect ? 0 : ts_.constant(p.width, p.value);
      case Producer::Kind::kNode: break;
    }
    const Node& n = g_.node(p.node);
    if (n.kind() == NodeKind::kLoop) return collect ? 0 : induction(n, site);
    if (n.kind() == NodeKind::kDep) return read_dep(n, site, collect);

    const std::size_t common = common_prefix(n.id, site);
    std::vector<Frame> env = resolve_env(n.id, site);
    auto found = val_index_.find(key_string(n.id, env));
    if (found == val_index_.end()) throw std::logic_error("missing instance for node " + std::to_string(n.id.value));
    const int vi = found->second;
    ExprId v = 0;
    if (collect) {
      collect->push_back(vi);
    } else {
      v = value_at(vi, site.step);
    }
    const auto& pc = chain(n.id);
    for (std::size_t k = common; k < pc.size(); ++k) {
      const Node& b = g_.node(pc[k]);
      if (b.kind() != NodeKind::kBranch) continue;
      ExprId c = read(Producer::of_node(b.branch().condition), site, collect);
      if (!collect) v = ts_.ite(c, v, ts_.zero(ts_.width(v)));
    }
    return v;
  }

  ExprId value_at(int vi, int step) {
    VInst& v = vals_[vi];
    if (v.step == step) {
      if (!v.built) throw std::logic_error("wire read before definition");
      return v.expr;
    }
    return ts_.state_ref(reg_of(vi));
  }

  std::uint32_t reg_of(int vi) {
    VInst& v = vals_[vi];
    if (!v.reg) {
      std::string name = "r" + key_string(v.node, v.env);
      std::replace(name.begin(), name.end(), ',', '_');
      v.reg = ts_.add_state(name, g_.node(v.node).op().width, 0);
    }
    return *v.reg;
  }

  const Dim& dim_of(const Frame& f) const {
    for (const Dim& d : loops_[f.loop_inst].dims) {
      if (d.loop == f.loop) return d;
    }
    throw std::logic_error("loop frame without a counter");
  }

  ExprId induction(const Node& n, const Site& site) {
    const LoopAttrs& l = n.loop();
    for (const Frame& f : site.env) {
      if (f.loop != n.id) continue;
      ExprId base = ts_.constant(kInductionWidth, from_signed(l.start + std::int64_t{f.replica} * l.step, kInductionWidth));
      if (f.full) return base;
      const Dim& d = dim_of(f);
      ExprId ctr = ts_.resize(ts_.state_ref(d.ctr), kInductionWidth, false);
      ExprId stride = ts_.constant(kInductionWidth, from_signed(std::int64_t{d.u} * l.step, kInductionWidth));
      return ts_.add(base, ts_.mul(ctr, stride));
    }
    throw std::logic_error("induction variable read outside its loop");
  }

  ExprId read_dep(const Node& dn, const Site& site, std::vector<int>* collect) {
    const DepAttrs& a = dn.dep();
    const NodeId loop = *dn.region;
    // The dep lives directly in `loop`; read its source and init from there.
    Site ds;
    ds.chain = &chain(dn.id);
    ds.step = site.step;
    std::size_t li = 0;
    for (const Frame& f : site.env) {
      ds.env.push_back(f);
      if (f.loop == loop) break;
      ++li;
    }
    if (ds.env.empty() || ds.env.back().loop != loop) throw std::logic_error("dep read outside its loop");
    const ValueType st = g_.type_of(Producer::of_node(a.source));
    const Frame f = ds.env.back();

    auto init = [&]() -> ExprId {
      const auto& ops = operands_of(dn.id);
      if (ops.empty()) return collect ? 0 : ts_.zero(st.width);
      ExprId raw = read(ops.front()->producer, ds, collect);
      return collect ? 0 : lower_cast(ts_, raw, g_.type_of(ops.front()->producer), st);
    };
    auto source_at = [&](unsigned replica) {
      Site s2 = ds;
      s2.env.back().replica = replica;
      return read(Producer::of_node(a.source), s2, collect);
    };

    if (f.full) return f.replica < a.distance ? init() : source_at(f.replica - a.distance);
    if (f.replica >= a.distance) return source_at(f.replica - a.distance);
    if (collect) return init();

    const Dim& d = dim_of(f);
    const int h = history(dn, ds.env);
    const unsigned m = a.distance - f.replica;
    ExprId hv = ts_.state_ref(hists_[h].regs[m - 1]);
    std::uint64_t first_live = (m + d.u - 1) / d.u;
    ExprId ctr = ts_.state_ref(d.ctr);
    ExprId guard = first_live >= (std::uint64_t{1} << ts_.width(ctr))
                       ? ts_.ones(1)
                       : ts_.ult(ctr, ts_.constant(ts_.width(ctr), first_live));
    return ts_.ite(guard, init(), hv);
  }

  int history(const Node& dn, const std::vector<Frame>& env) {
    std::vector<Frame> e = env;
    e.back().replica = 0;
    std::string key = key_string(dn.id, e);
    auto it = hist_index_.find(key);
    if (it != hist_index_.end()) return it->second;
    DepHist hst;
    hst.dep = dn.id;
    hst.loop_inst = e.back().loop_inst;
    hst.env = e;
    const unsigned w = g_.type_of(Producer::of_node(dn.dep().source)).width;
    std::string base = "h" + key;
    std::replace(base.begin(), base.end(), ',', '_');
    for (unsigned m = 1; m <= dn.dep().distance; ++m) {
      hst.regs.push_back(ts_.add_state(base + "_" + std::to_string(m), w, 0));
    }
    const int idx = static_cast<int>(hists_.size());
    hists_.push_back(std::move(hst));
    hist_index_.emplace(std::move(key), idx);
    return idx;
  }

  // ---- expressions ----

  void build_val(int vi) {
    VInst& v = vals_[vi];
    const Node& n = g_.node(v.node);
    Site site{&chain(v.node), v.env, v.step};
    std::vector<ExprId> ops;
    std::vector<ValueType> types;
    for (const Edge* e : operands_of(v.node)) {
      ops.push_back(read(e->producer, site));
      types.push_back(g_.type_of(e->producer));
    }
    ExprId x = lower_op(ts_, n.op(), ops, types);
    vals_[vi].expr = x;
    vals_[vi].built = true;
  }

  ExprId at_step(int s) { return ts_.eq(ts_.state_ref(pc_), ts_.constant(ts_.width(ts_.state_ref(pc_)), s)); }

  ExprId is_max(const Dim& d) {
    ExprId c = ts_.state_ref(d.ctr);
    return ts_.eq(c, ts_.constant(ts_.width(c), static_cast<Word>(d.count - 1)));
  }

  ExprId is_last(const LoopInst& li) {
    ExprId r = ts_.ones(1);
    for (const Dim& d : li.dims) r = ts_.band(r, is_max(d));
    return r;
  }

  // Loops whose body ends at step `s`, innermost first.
  std::vector<int> ending_at(int s) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < loops_.size(); ++i) {
      if (loops_[i].first_step >= 0 && loops_[i].last_step == s) out.push_back(static_cast<int>(i));
    }
    std::sort(out.rbegin(), out.rend());
    return out;
  }

  // End of one innermost iteration of loop `li` (ending at its last step).
  ExprId iteration_end(int li) {
    const int s = loops_[li].last_step;
    ExprId r = at_step(s);
    for (int inner : ending_at(s)) {
      if (inner == li) break;
      r = ts_.band(r, is_last(loops_[inner]));
    }
    return r;
  }

  void build_control(ExprId result) {
    const unsigned pw = ts_.width(ts_.state_ref(pc_));
    const int halt = num_steps_;
    ExprId pc = ts_.state_ref(pc_);
    ExprId next = pc;
    ExprId final_step = 0;
    for (int s = num_steps_ - 1; s >= 0; --s) {
      const std::vector<int> ends = ending_at(s);
      ExprId nxt = ts_.constant(pw, s + 1);
      for (auto it = ends.rbegin(); it != ends.rend(); ++it) {
        nxt = ts_.ite(is_last(loops_[*it]), nxt, ts_.constant(pw, loops_[*it].first_step));
      }
      next = ts_.ite(at_step(s), nxt, next);
      if (s == halt - 1) {
        final_step = at_step(s);
        for (int l : ends) final_step = ts_.band(final_step, is_last(loops_[l]));
      }
    }
    ts_.set_next(pc_, next);

    for (std::size_t i = 0; i < loops_.size(); ++i) {
      LoopInst& li = loops_[i];
      if (li.first_step < 0) continue;
      ExprId end = iteration_end(static_cast<int>(i));
      for (std::size_t k = 0; k < li.dims.size(); ++k) {
        ExprId carry = end;
        for (std::size_t k2 = k + 1; k2 < li.dims.size(); ++k2) carry = ts_.band(carry, is_max(li.dims[k2]));
        ExprId c = ts_.state_ref(li.dims[k].ctr);
        unsigned w = ts_.width(c);
        ExprId inc = ts_.ite(is_max(li.dims[k]), ts_.zero(w), ts_.add(c, ts_.constant(w, 1)));
        ts_.set_next(li.dims[k].ctr, ts_.ite(carry, inc, c));
      }
    }

    const std::uint32_t done = ts_.add_state("done", 1, 0);
    const std::uint32_t res = ts_.add_state("result_q", ts_.width(result), 0);
    ts_.set_next(done, ts_.bor(ts_.state_ref(done), final_step));
    ts_.set_next(res, ts_.ite(final_step, result, ts_.state_ref(res)));
    ts_.set_output("valid", ts_.state_ref(done));
    ts_.set_output("result", ts_.state_ref(res));
  }

  void build_hist_update(std::size_t hi) {
    const NodeId dep = hists_[hi].dep;
    const int li = hists_[hi].loop_inst;
    const DepAttrs& a = g_.node(dep).dep();
    const Dim& d = loops_[li].dims.back();
    Site ds{&chain(dep), hists_[hi].env, loops_[li].last_step};
    ExprId end = iteration_end(li);
    std::vector<ExprId> next(a.distance);
    for (unsigned m = 1; m <= a.distance; ++m) {
      if (m <= d.u) {
        Site s2 = ds;
        s2.env.back().replica = d.u - m;
        next[m - 1] = read(Producer::of_node(a.source), s2);
      } else {
        next[m - 1] = ts_.state_ref(hists_[hi].regs[m - d.u - 1]);
      }
    }
    for (unsigned m = 1; m <= a.distance; ++m) {
      std::uint32_t r = hists_[hi].regs[m - 1];
      ts_.set_next(r, ts_.ite(end, next[m - 1], ts_.state_ref(r)));
    }
  }

  const ComputationGraph& g_;
  ScheduleStrategy s_;
  TransitionSystem ts_;
  std::unordered_map<std::uint32_t, std::vector<NodeId>> children_;
  std::unordered_map<std::uint32_t, std::vector<NodeId>> chains_;
  std::unordered_map<std::uint32_t, Plan> plans_;
  std::unordered_map<std::uint32_t, std::vector<const Edge*>> operands_;
  std::vector<const Edge*> no_edges_;
  std::vector<NodeId> empty_chain_;

  std::vector<VInst> vals_;
  std::unordered_map<std::string, int> val_index_;
  std::vector<LoopInst> loops_;
  std::vector<Item> top_;
  std::vector<DepHist> hists_;
  std::unordered_map<std::string, int> hist_index_;
  int num_steps_ = 0;
  std::uint32_t pc_ = 0;
};

}  // namespace

TransitionSystem schedule(const ComputationGraph& g, const ScheduleStrategy& strategy) {
  Scheduler s(g, strategy);
  s.instantiate();
  s.assign_steps();
  return s.build();
}

std::size_t schedule_steps(const ComputationGraph& g, const ScheduleStrategy& strategy) {
  Scheduler s(g, strategy);
  s.instantiate();
  s.assign_steps();
  return s.num_steps();
}

}  // namespace evolvegen::compile
