#include <sstream>
#include <unordered_map>

#include "evolvegen/compile/interpret.hpp"
#include "evolvegen/compile/schedule.hpp"

namespace evolvegen::compile {

using namespace graph;

namespace {

std::string type_name(unsigned width, bool is_signed, unsigned frac) {
  if (frac == 0) return std::string(is_signed ? "ap_int<" : "ap_uint<") + std::to_string(width) + ">";
  return std::string(is_signed ? "ap_fixed<" : "ap_ufixed<") + std::to_string(width) + "," +
         std::to_string(static_cast<int>(width) - static_cast<int>(frac)) + ">";
}

std::string type_name(const OpAttrs& a) {
  std::string base = type_name(a.width, a.is_signed, a.frac_bits());
  if (a.dtype != DType::kFixed) return base;
  base.pop_back();
  base += a.rounding == Rounding::kRoundHalfUp ? ",AP_RND" : ",AP_TRN";
  base += a.saturation == Saturation::kSaturate ? ",AP_SAT>" : ",AP_WRAP>";
  return base;
}

class Emitter {
 public:
  Emitter(const ComputationGraph& g, const ScheduleStrategy& s) : g_(g), s_(s) {
    for (const Node& n : g.nodes) children_[n.region ? n.region->value + 1 : 0].push_back(n.id);
  }

  std::string run() {
    out_ << "#include <ap_fixed.h>\n#include <ap_int.h>\n\n";
    out_ << "void design(";
    for (std::size_t i = 0; i < g_.inputs.size(); ++i) {
      const PrimaryInput& in = g_.inputs[i];
      out_ << type_name(in.width, in.is_signed, in.dtype == DType::kFixed ? in.width - in.int_bits : 0) << " "
           << in.name << ", ";
    }
    out_ << "ap_uint<" << result_width(g_) << ">& result) {\n";
    // Values are declared up front so that loop and branch results remain
    // visible after their region closes.
    for (const Node& n : g_.nodes) {
      if (n.kind() == NodeKind::kOp) out_ << "  " << type_name(n.op()) << " n" << n.id.value << " = 0;\n";
    }
    body(0, 1);
    out_ << "  result = 0";
    for (NodeId o : g_.outputs) out_ << " ^ n" << o.value << ".range()";
    out_ << ";\n}\n";
    return out_.str();
  }

 private:
  void indent(int depth) { out_ << std::string(static_cast<std::size_t>(depth) * 2, ' '); }

  std::string operand(const Producer& p) {
    switch (p.kind) {
      case Producer::Kind::kInput: return g_.inputs[p.input].name;
      case Producer::Kind::kConst:
        return "(" + type_name(p.width, p.is_signed, 0) + ")" + std::to_string(p.value);
      case Producer::Kind::kNode: break;
    }
    const Node& n = g_.node(p.node);
    if (n.kind() == NodeKind::kLoop) return "i" + std::to_string(n.id.value);
    return "n" + std::to_string(n.id.value);
  }

  std::vector<std::string> operands(NodeId id) {
    std::vector<std::string> out;
    for (const Edge* e : g_.operands(id)) out.push_back(operand(e->producer));
    return out;
  }

  std::string expr(const Node& n) {
    auto o = operands(n.id);
    switch (n.op().kind) {
      case OpKind::kAdd: return o[0] + " + " + o[1];
      case OpKind::kSub: return o[0] + " - " + o[1];
      case OpKind::kMul: return o[0] + " * " + o[1];
      case OpKind::kAnd: return o[0] + " & " + o[1];
      case OpKind::kOr: return o[0] + " | " + o[1];
      case OpKind::kXor: return o[0] + " ^ " + o[1];
      case OpKind::kNot: return "~" + o[0];
      case OpKind::kShl: return o[0] + " << " + o[1];
      case OpKind::kShr: return o[0] + " >> " + o[1];
      case OpKind::kEq: return o[0] + " == " + o[1];
      case OpKind::kNeq: return o[0] + " != " + o[1];
      case OpKind::kLt: return o[0] + " < " + o[1];
      case OpKind::kLe: return o[0] + " <= " + o[1];
      case OpKind::kMux: return o[0] + " ? " + o[1] + " : " + o[2];
    }
    return {};
  }

  void body(std::uint32_t key, int depth) {
    auto it = children_.find(key);
    if (it == children_.end()) return;
    for (NodeId c : it->second) {
      const Node& n = g_.node(c);
      switch (n.kind()) {
        case NodeKind::kOp:
          indent(depth);
          out_ << "n" << c.value << " = " << expr(n) << ";\n";
          break;
        case NodeKind::kDep: {
          const DepAttrs& d = n.dep();
          auto ops = operands(c);
          const Node& loop = g_.node(*n.region);
          std::string k = "k" + std::to_string(loop.id.value);
          indent(depth);
          out_ << "auto n" << c.value << " = " << k << " < " << d.distance << " ? "
               << (ops.empty() ? std::string("0") : ops[0]) << " : h" << c.value << "[(" << k << " - "
               << d.distance << ") % " << d.distance << "];\n";
          break;
        }
        case NodeKind::kBranch:
          indent(depth);
          out_ << "if (n" << n.branch().condition.value << ") {\n";
          body(c.value + 1, depth + 1);
          indent(depth);
          out_ << "}\n";
          break;
        case NodeKind::kLoop: loop(n, depth); break;
      }
    }
  }

  void loop(const Node& n, int depth) {
    const LoopAttrs& l = n.loop();
    const std::string id = std::to_string(n.id.value);
    // Dependency histories of this loop.
    std::vector<const Node*> deps;
    for (const Node& m : g_.nodes) {
      if (m.kind() == NodeKind::kDep && m.region && *m.region == n.id) deps.push_back(&m);
    }
    for (const Node* d : deps) {
      indent(depth);
      const Node& src = g_.node(d->dep().source);
      out_ << type_name(src.op()) << " h" << d->id.value << "[" << d->dep().distance << "];\n";
    }
    indent(depth);
    out_ << "L" << id << ": for (int k" << id << " = 0; k" << id << " < " << l.trip() << "; ++k" << id
         << ") {\n";
    if (s_.kind == ScheduleKind::kOptimized) {
      if (l.pipelined) {
        indent(depth + 1);
        out_ << "#pragma HLS pipeline II=1\n";
      }
      if (l.fully_unrolled) {
        indent(depth + 1);
        out_ << "#pragma HLS unroll\n";
      } else if (l.unroll_factor > 1) {
        indent(depth + 1);
        out_ << "#pragma HLS unroll factor=" << l.unroll_factor << "\n";
      }
      if (l.flattened) {
        indent(depth + 1);
        out_ << "#pragma HLS loop_flatten\n";
      }
    }
    indent(depth + 1);
    out_ << "ap_int<8> i" << id << " = " << l.start << " + k" << id << " * " << l.step << ";\n";
    body(n.id.value + 1, depth + 1);
    for (const Node* d : deps) {
      indent(depth + 1);
      out_ << "h" << d->id.value << "[k" << id << " % " << d->dep().distance << "] = n"
           << d->dep().source.value << ";\n";
    }
    indent(depth);
    out_ << "}\n";
  }

  const ComputationGraph& g_;
  ScheduleStrategy s_;
  std::unordered_map<std::uint32_t, std::vector<NodeId>> children_;
  std::ostringstream out_;
};

}  // namespace

std::string emit_hls_source(const ComputationGraph& g, const ScheduleStrategy& strategy) {
  return Emitter(g, strategy).run();
}

}  // namespace evolvegen::compile
