#include "evolvegen/netlist/aiger.hpp"

#include <algorithm>
#include <unordered_map>
#include <vector>

#include "evolvegen/common/error.hpp"

namespace evolvegen::netlist {

namespace {

void put_uint(std::string& out, std::uint64_t v) { out += std::to_string(v); }

void put_delta(std::string& out, std::uint32_t x) {
  while (x & ~0x7Fu) {
    out.push_back(static_cast<char>((x & 0x7Fu) | 0x80u));
    x >>= 7;
  }
  out.push_back(static_cast<char>(x));
}

void put_latch_init(std::string& out, const AigLatch& l, AigLit self) {
  switch (l.init) {
    case LatchInit::kZero: break;
    case LatchInit::kOne: out += " 1"; break;
    case LatchInit::kUndefined:
      out += ' ';
      put_uint(out, self);
      break;
  }
}

}  // namespace

std::string write_aiger(const AigCircuit& aig, AigerMode mode) {
  check_well_formed(aig);
  const bool ascii = mode == AigerMode::kAscii;
  std::string out = ascii ? "aag " : "aig ";
  put_uint(out, aig.max_var());
  out += ' ';
  put_uint(out, aig.num_inputs);
  out += ' ';
  put_uint(out, aig.num_latches());
  out += ' ';
  put_uint(out, aig.outputs.size());
  out += ' ';
  put_uint(out, aig.num_ands());
  if (!aig.bad.empty()) {
    out += ' ';
    put_uint(out, aig.bad.size());
  }
  out += '\n';
  if (ascii) {
    for (std::uint32_t i = 0; i < aig.num_inputs; ++i) {
      put_uint(out, aig.input_lit(i));
      out += '\n';
    }
  }
  for (std::uint32_t i = 0; i < aig.num_latches(); ++i) {
    if (ascii) {
      put_uint(out, aig.latch_lit(i));
      out += ' ';
    }
    put_uint(out, aig.latches[i].next);
    put_latch_init(out, aig.latches[i], aig.latch_lit(i));
    out += '\n';
  }
  for (AigLit l : aig.outputs) {
    put_uint(out, l);
    out += '\n';
  }
  for (AigLit l : aig.bad) {
    put_uint(out, l);
    out += '\n';
  }
  for (const AigAnd& g : aig.and_gates) {
    if (ascii) {
      put_uint(out, g.lhs);
      out += ' ';
      put_uint(out, g.rhs0);
      out += ' ';
      put_uint(out, g.rhs1);
      out += '\n';
    } else {
      put_delta(out, g.lhs - g.rhs0);
      put_delta(out, g.rhs0 - g.rhs1);
    }
  }
  for (std::size_t i = 0; i < aig.input_names.size(); ++i) {
    out += 'i';
    put_uint(out, i);
    out += ' ';
    out += aig.input_names[i];
    out += '\n';
  }
  for (std::size_t i = 0; i < aig.latch_names.size(); ++i) {
    out += 'l';
    put_uint(out, i);
    out += ' ';
    out += aig.latch_names[i];
    out += '\n';
  }
  return out;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(what, pos_); }

  void expect(char c, const char* what) {
    if (peek() != c) fail(std::string("expected ") + what);
    ++pos_;
  }

  void expect_word(std::string_view w) {
    if (s_.substr(pos_, w.size()) != w) fail("expected '" + std::string(w) + "'");
    pos_ += w.size();
  }

  std::uint64_t read_uint() {
    if (peek() < '0' || peek() > '9') fail("expected unsigned integer");
    std::uint64_t v = 0;
    while (peek() >= '0' && peek() <= '9') {
      v = v * 10 + static_cast<std::uint64_t>(peek() - '0');
      if (v > 0xFFFFFFFFull) fail("integer too large");
      ++pos_;
    }
    return v;
  }

  std::uint32_t read_delta() {
    std::uint32_t x = 0;
    int shift = 0;
    while (true) {
      if (at_end()) fail("truncated binary and-gate section");
      auto ch = static_cast<unsigned char>(s_[pos_++]);
      if (shift > 28) fail("binary delta overflow");
      x |= static_cast<std::uint32_t>(ch & 0x7Fu) << shift;
      if (!(ch & 0x80u)) return x;
      shift += 7;
    }
  }

  std::string read_line_rest() {
    std::size_t end = s_.find('\n', pos_);
    if (end == std::string_view::npos) end = s_.size();
    std::string out(s_.substr(pos_, end - pos_));
    pos_ = end < s_.size() ? end + 1 : end;
    return out;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

struct RawLatch {
  AigLit lhs;
  AigLit next;
  std::uint64_t init;
  std::size_t pos;
};

struct RawAnd {
  AigLit lhs, rhs0, rhs1;
  std::size_t pos;
};

}  // namespace

AigCircuit read_aiger(std::string_view bytes) {
  Reader r(bytes);
  bool binary = false;
  if (bytes.substr(0, 4) == "aag ") {
    r.expect_word("aag ");
  } else if (bytes.substr(0, 4) == "aig ") {
    r.expect_word("aig ");
    binary = true;
  } else {
    r.fail("missing 'aag'/'aig' header");
  }
  std::vector<std::uint64_t> hdr;
  hdr.push_back(r.read_uint());
  while (r.peek() == ' ') {
    r.expect(' ', "space");
    hdr.push_back(r.read_uint());
  }
  r.expect('\n', "newline after header");
  if (hdr.size() < 5 || hdr.size() > 9) r.fail("header needs between 5 and 9 fields");
  const std::uint64_t M = hdr[0], I = hdr[1], L = hdr[2], O = hdr[3], A = hdr[4];
  const std::uint64_t B = hdr.size() > 5 ? hdr[5] : 0;
  for (std::size_t k = 6; k < hdr.size(); ++k) {
    if (hdr[k] != 0) r.fail("constraints, justice and fairness sections are not supported");
  }
  if (binary && M != I + L + A) r.fail("binary header requires M = I + L + A");
  if (M < I + L + A) r.fail("header M smaller than I + L + A");
  const std::uint64_t max_lit = 2 * M + 1;

  auto read_lit = [&]() -> AigLit {
    std::size_t at = r.pos();
    std::uint64_t v = r.read_uint();
    if (v > max_lit) throw FormatError("literal " + std::to_string(v) + " exceeds 2M+1", at);
    return static_cast<AigLit>(v);
  };

  std::vector<std::pair<AigLit, std::size_t>> inputs;
  for (std::uint64_t i = 0; i < I; ++i) {
    if (binary) {
      inputs.emplace_back(static_cast<AigLit>(2 * (i + 1)), r.pos());
    } else {
      std::size_t at = r.pos();
      inputs.emplace_back(read_lit(), at);
      r.expect('\n', "newline after input");
    }
  }
  std::vector<RawLatch> latches;
  for (std::uint64_t i = 0; i < L; ++i) {
    RawLatch l{};
    l.pos = r.pos();
    l.lhs = binary ? static_cast<AigLit>(2 * (I + i + 1)) : read_lit();
    if (!binary) r.expect(' ', "space in latch line");
    l.next = read_lit();
    l.init = 0;
    if (r.peek() == ' ') {
      r.expect(' ', "space");
      std::size_t at = r.pos();
      l.init = r.read_uint();
      if (l.init != 0 && l.init != 1 && l.init != l.lhs) throw FormatError("invalid latch init", at);
    }
    r.expect('\n', "newline after latch");
    latches.push_back(l);
  }
  std::vector<AigLit> outputs, bad;
  for (std::uint64_t i = 0; i < O; ++i) {
    outputs.push_back(read_lit());
    r.expect('\n', "newline after output");
  }
  for (std::uint64_t i = 0; i < B; ++i) {
    bad.push_back(read_lit());
    r.expect('\n', "newline after bad literal");
  }
  std::vector<RawAnd> ands;
  for (std::uint64_t i = 0; i < A; ++i) {
    RawAnd g{};
    g.pos = r.pos();
    if (binary) {
      g.lhs = static_cast<AigLit>(2 * (I + L + i + 1));
      std::uint32_t d0 = r.read_delta();
      if (d0 == 0 || d0 > g.lhs) throw FormatError("invalid delta in and gate", g.pos);
      g.rhs0 = g.lhs - d0;
      std::uint32_t d1 = r.read_delta();
      if (d1 > g.rhs0) throw FormatError("invalid delta in and gate", g.pos);
      g.rhs1 = g.rhs0 - d1;
    } else {
      g.lhs = read_lit();
      r.expect(' ', "space in and line");
      g.rhs0 = read_lit();
      r.expect(' ', "space in and line");
      g.rhs1 = read_lit();
      r.expect('\n', "newline after and gate");
    }
    ands.push_back(g);
  }

  std::vector<std::string> input_names, latch_names;
  std::vector<bool> input_named(I, false), latch_named(L, false);
  while (!r.at_end()) {
    char c = r.peek();
    if (c == 'c') break;
    std::size_t at = r.pos();
    if (c != 'i' && c != 'l' && c != 'o' && c != 'b') r.fail("unexpected symbol table entry");
    r.expect(c, "symbol kind");
    std::uint64_t idx = r.read_uint();
    r.expect(' ', "space in symbol entry");
    std::string name = r.read_line_rest();
    if (c == 'i') {
      if (idx >= I) throw FormatError("input symbol index out of range", at);
      if (input_names.empty()) input_names.resize(I);
      input_names[idx] = name;
      input_named[idx] = true;
    } else if (c == 'l') {
      if (idx >= L) throw FormatError("latch symbol index out of range", at);
      if (latch_names.empty()) latch_names.resize(L);
      latch_names[idx] = name;
      latch_named[idx] = true;
    }
  }

  // Map file variables to canonical variables.
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  std::unordered_map<std::uint32_t, std::size_t> and_index;
  remap[0] = 0;
  std::uint32_t next_var = 1;
  auto define = [&](AigLit lhs, std::size_t at) {
    if (aig_sign(lhs) || lhs < 2) throw FormatError("defined literal must be positive and even", at);
    if (remap.count(aig_var(lhs)) || and_index.count(aig_var(lhs))) {
      throw FormatError("variable defined twice", at);
    }
  };
  for (auto [lit, at] : inputs) {
    define(lit, at);
    remap[aig_var(lit)] = next_var++;
  }
  for (const RawLatch& l : latches) {
    define(l.lhs, l.pos);
    remap[aig_var(l.lhs)] = next_var++;
  }
  for (std::size_t i = 0; i < ands.size(); ++i) {
    define(ands[i].lhs, ands[i].pos);
    and_index[aig_var(ands[i].lhs)] = i;
  }

  AigCircuit out;
  out.num_inputs = static_cast<std::uint32_t>(I);
  // Topological order over and gates, preserving file order where possible.
  std::vector<std::uint8_t> state(ands.size(), 0);
  auto map_lit = [&](AigLit l, std::size_t at) -> AigLit {
    auto it = remap.find(aig_var(l));
    if (it == remap.end()) throw FormatError("literal " + std::to_string(l) + " is undefined", at);
    return aig_make(it->second, aig_sign(l));
  };
  for (std::size_t root = 0; root < ands.size(); ++root) {
    if (state[root] == 2) continue;
    std::vector<std::pair<std::size_t, int>> stack{{root, 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& [idx, child] = stack.back();
      const RawAnd& g = ands[idx];
      if (child < 2) {
        AigLit operand = child == 0 ? g.rhs0 : g.rhs1;
        ++child;
        auto it = and_index.find(aig_var(operand));
        if (it != and_index.end()) {
          if (state[it->second] == 1) throw FormatError("combinational cycle through and gate", g.pos);
          if (state[it->second] == 0) {
            state[it->second] = 1;
            stack.emplace_back(it->second, 0);
          }
        }
        continue;
      }
      AigLit a = map_lit(g.rhs0, g.pos);
      AigLit b = map_lit(g.rhs1, g.pos);
      if (a < b) std::swap(a, b);
      remap[aig_var(g.lhs)] = next_var;
      out.and_gates.push_back({aig_make(next_var), a, b});
      ++next_var;
      state[idx] = 2;
      stack.pop_back();
    }
  }
  for (const RawLatch& l : latches) {
    AigLatch latch;
    latch.next = map_lit(l.next, l.pos);
    latch.init = l.init == 0 ? LatchInit::kZero : l.init == 1 ? LatchInit::kOne : LatchInit::kUndefined;
    out.latches.push_back(latch);
  }
  for (AigLit l : outputs) out.outputs.push_back(map_lit(l, r.pos()));
  for (AigLit l : bad) out.bad.push_back(map_lit(l, r.pos()));
  if (!input_names.empty()) {
    for (std::size_t i = 0; i < I; ++i) {
      if (!input_named[i]) input_names[i] = "i" + std::to_string(i);
    }
    out.input_names = std::move(input_names);
  }
  if (!latch_names.empty()) {
    for (std::size_t i = 0; i < L; ++i) {
      if (!latch_named[i]) latch_names[i] = "l" + std::to_string(i);
    }
    out.latch_names = std::move(latch_names);
  }
  return out;
}

}  // namespace evolvegen::netlist
