#include <map>
#include <sstream>

#include "evolvegen/netlist/bitblast.hpp"

namespace evolvegen::netlist {

using ts::ExprId;
using ts::ExprNode;
using ts::ExprOp;

namespace {

std::string binary(Word v, unsigned width) {
  std::string s(width, '0');
  for (unsigned k = 0; k < width; ++k) {
    if (test_bit(v, k)) s[width - 1 - k] = '1';
  }
  return s;
}

class Btor2Writer {
 public:
  explicit Btor2Writer(const ts::TransitionSystem& t) : t_(t) {}

  std::string run() {
    std::vector<std::uint64_t> in_id(t_.inputs().size()), st_id(t_.states().size());
    for (std::size_t i = 0; i < t_.inputs().size(); ++i) {
      std::uint64_t s = sort(t_.inputs()[i].width);
      in_id[i] = line("input " + std::to_string(s) + " " + t_.inputs()[i].name);
    }
    for (std::size_t i = 0; i < t_.states().size(); ++i) {
      std::uint64_t s = sort(t_.states()[i].width);
      st_id[i] = line("state " + std::to_string(s) + " " + t_.states()[i].name);
    }

    // Expressions needed by next functions, outputs and bad, in arena order.
    std::vector<bool> need(t_.num_exprs(), false);
    for (const auto& s : t_.states()) need[s.next] = true;
    for (const auto& o : t_.outputs()) need[o.expr] = true;
    if (t_.bad()) need[*t_.bad()] = true;
    for (ExprId e = static_cast<ExprId>(t_.num_exprs()); e-- > 0;) {
      if (!need[e]) continue;
      const ExprNode& n = t_.expr(e);
      for (int k = 0; k < arity(n.op); ++k) need[n.args[k]] = true;
    }

    ids_.assign(t_.num_exprs(), 0);
    for (ExprId e = 0; e < t_.num_exprs(); ++e) {
      if (!need[e]) continue;
      const ExprNode& n = t_.expr(e);
      if (n.op == ExprOp::kInput) {
        ids_[e] = in_id[n.aux];
      } else if (n.op == ExprOp::kState) {
        ids_[e] = st_id[n.aux];
      } else {
        ids_[e] = emit(n);
      }
    }

    for (std::size_t i = 0; i < t_.states().size(); ++i) {
      const auto& s = t_.states()[i];
      std::uint64_t srt = sort(s.width);
      std::uint64_t c = line("const " + std::to_string(srt) + " " + binary(s.init, s.width));
      line("init " + std::to_string(srt) + " " + std::to_string(st_id[i]) + " " + std::to_string(c));
    }
    for (std::size_t i = 0; i < t_.states().size(); ++i) {
      const auto& s = t_.states()[i];
      line("next " + std::to_string(sort(s.width)) + " " + std::to_string(st_id[i]) + " " +
           std::to_string(ids_[s.next]));
    }
    for (const auto& o : t_.outputs()) line("output " + std::to_string(ids_[o.expr]) + " " + o.name);
    if (t_.bad()) line("bad " + std::to_string(ids_[*t_.bad()]));
    return out_.str();
  }

 private:
  static int arity(ExprOp op) {
    switch (op) {
      case ExprOp::kConst:
      case ExprOp::kInput:
      case ExprOp::kState: return 0;
      case ExprOp::kNot:
      case ExprOp::kZext:
      case ExprOp::kSext:
      case ExprOp::kExtract: return 1;
      case ExprOp::kIte: return 3;
      default: return 2;
    }
  }

  std::uint64_t line(const std::string& body) {
    std::uint64_t id = next_++;
    out_ << id << ' ' << body << '\n';
    return id;
  }

  std::uint64_t sort(unsigned width) {
    auto it = sorts_.find(width);
    if (it != sorts_.end()) return it->second;
    std::uint64_t id = line("sort bitvec " + std::to_string(width));
    sorts_.emplace(width, id);
    return id;
  }

  std::uint64_t emit(const ExprNode& n) {
    const std::string s = std::to_string(sort(n.width));
    auto a = [&](int k) { return std::to_string(ids_[n.args[k]]); };
    auto bin = [&](const char* op) { return line(std::string(op) + " " + s + " " + a(0) + " " + a(1)); };
    switch (n.op) {
      case ExprOp::kConst: return line("const " + s + " " + binary(n.value, n.width));
      case ExprOp::kNot: return line("not " + s + " " + a(0));
      case ExprOp::kAnd: return bin("and");
      case ExprOp::kOr: return bin("or");
      case ExprOp::kXor: return bin("xor");
      case ExprOp::kAdd: return bin("add");
      case ExprOp::kSub: return bin("sub");
      case ExprOp::kMul: return bin("mul");
      case ExprOp::kShl: return bin("sll");
      case ExprOp::kLshr: return bin("srl");
      case ExprOp::kAshr: return bin("sra");
      case ExprOp::kEq: return bin("eq");
      case ExprOp::kUlt: return bin("ult");
      case ExprOp::kSlt: return bin("slt");
      case ExprOp::kIte: return line("ite " + s + " " + a(0) + " " + a(1) + " " + a(2));
      case ExprOp::kZext:
      case ExprOp::kSext: {
        unsigned from = t_.width(n.args[0]);
        return line(std::string(n.op == ExprOp::kZext ? "uext " : "sext ") + s + " " + a(0) + " " +
                    std::to_string(n.width - from));
      }
      case ExprOp::kExtract:
        return line("slice " + s + " " + a(0) + " " + std::to_string(n.aux + n.width - 1) + " " +
                    std::to_string(n.aux));
      case ExprOp::kInput:
      case ExprOp::kState: break;
    }
    return 0;
  }

  const ts::TransitionSystem& t_;
  std::ostringstream out_;
  std::uint64_t next_ = 1;
  std::map<unsigned, std::uint64_t> sorts_;
  std::vector<std::uint64_t> ids_;
};

}  // namespace

std::string write_btor2(const ts::TransitionSystem& ts) { return Btor2Writer(ts).run(); }

}  // namespace evolvegen::netlist
