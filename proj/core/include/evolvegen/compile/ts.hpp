#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evolvegen/common/word.hpp"

namespace evolvegen::ts {

using ExprId = std::uint32_t;

enum class ExprOp : std::uint8_t {
  kConst,
  kInput,
  kState,
  kNot,
  kAnd,
  kOr,
  kXor,
  kAdd,
  kSub,
  kMul,
  kShl,
  kLshr,
  kAshr,
  kEq,
  kUlt,
  kSlt,
  kIte,
  kZext,
  kSext,
  kExtract,
};

std::string_view expr_op_name(ExprOp op);

// Bit-vector expression node. Binary operators take equal-width operands;
// shifts by at least the width yield 0 (or the sign fill for kAshr).
struct ExprNode {
  ExprOp op = ExprOp::kConst;
  unsigned width = 1;
  std::array<ExprId, 3> args{};
  std::uint32_t aux = 0;  // input/state index, or low bit for kExtract
  Word value = 0;         // kConst payload
};

struct TsInput {
  std::string name;
  unsigned width = 1;
};

struct StateVar {
  std::string name;
  unsigned width = 1;
  Word init = 0;
  ExprId next = 0;
};

struct TsOutput {
  std::string name;
  ExprId expr = 0;
};

// Word-level transition system. Expressions live in a hash-consed arena in
// creation order, so every node's arguments precede it.
class TransitionSystem {
 public:
  std::string name;

  std::uint32_t add_input(std::string input_name, unsigned width);
  // The next-state function defaults to holding the current value.
  std::uint32_t add_state(std::string state_name, unsigned width, Word init = 0);
  void set_next(std::uint32_t state, ExprId next);
  void set_output(std::string output_name, ExprId e);
  void set_bad(ExprId e);

  ExprId constant(unsigned width, Word value);
  ExprId zero(unsigned width) { return constant(width, 0); }
  ExprId ones(unsigned width) { return constant(width, width_mask(width)); }
  ExprId input_ref(std::uint32_t i);
  ExprId state_ref(std::uint32_t s);

  ExprId op1(ExprOp op, ExprId a);
  ExprId op2(ExprOp op, ExprId a, ExprId b);
  ExprId ite(ExprId c, ExprId t, ExprId e);
  ExprId zext(ExprId a, unsigned width);
  ExprId sext(ExprId a, unsigned width);
  ExprId extract(ExprId a, unsigned lo, unsigned width);
  // Resizes to `width`: truncates, or extends by sign when `is_signed`.
  ExprId resize(ExprId a, unsigned width, bool is_signed);

  ExprId bnot(ExprId a) { return op1(ExprOp::kNot, a); }
  ExprId band(ExprId a, ExprId b) { return op2(ExprOp::kAnd, a, b); }
  ExprId bor(ExprId a, ExprId b) { return op2(ExprOp::kOr, a, b); }
  ExprId bxor(ExprId a, ExprId b) { return op2(ExprOp::kXor, a, b); }
  ExprId add(ExprId a, ExprId b) { return op2(ExprOp::kAdd, a, b); }
  ExprId sub(ExprId a, ExprId b) { return op2(ExprOp::kSub, a, b); }
  ExprId mul(ExprId a, ExprId b) { return op2(ExprOp::kMul, a, b); }
  ExprId eq(ExprId a, ExprId b) { return op2(ExprOp::kEq, a, b); }
  ExprId ne(ExprId a, ExprId b) { return bnot(eq(a, b)); }
  ExprId ult(ExprId a, ExprId b) { return op2(ExprOp::kUlt, a, b); }
  ExprId slt(ExprId a, ExprId b) { return op2(ExprOp::kSlt, a, b); }

  const ExprNode& expr(ExprId id) const { return exprs_[id]; }
  std::size_t num_exprs() const { return exprs_.size(); }
  unsigned width(ExprId id) const { return exprs_[id].width; }
  bool is_const(ExprId id) const { return exprs_[id].op == ExprOp::kConst; }

  const std::vector<TsInput>& inputs() const { return inputs_; }
  const std::vector<StateVar>& states() const { return states_; }
  const std::vector<TsOutput>& outputs() const { return outputs_; }
  const std::optional<ExprId>& bad() const { return bad_; }
  std::optional<ExprId> output(std::string_view output_name) const;

  // Throws std::logic_error on width or reference errors.
  void check_well_typed() const;

 private:
  ExprId intern(const ExprNode& n);
  ExprId fold(const ExprNode& n);

  std::vector<ExprNode> exprs_;
  std::unordered_map<std::string, ExprId> table_;
  std::vector<TsInput> inputs_;
  std::vector<StateVar> states_;
  std::vector<ExprId> state_refs_;
  std::vector<ExprId> input_refs_;
  std::vector<TsOutput> outputs_;
  std::optional<ExprId> bad_;
};

// Evaluates one operator on argument values (already truncated to their
// widths).
Word eval_op(const ExprNode& n, Word a, Word b, Word c);

// Evaluates every expression of `ts` for the given input and state values.
std::vector<Word> evaluate_all(const TransitionSystem& ts, const std::vector<Word>& inputs,
                               const std::vector<Word>& states);

struct Trace {
  std::vector<std::vector<Word>> states;   // per cycle, when recorded
  std::vector<std::vector<Word>> outputs;  // per cycle, when recorded
  std::optional<std::uint64_t> first_valid_cycle;
  Word result_at_valid = 0;
  std::uint64_t cycles_run = 0;
};

// Inputs held constant for the whole run. Stops at the first valid cycle
// unless `record` requests the full trace.
Trace simulate(const TransitionSystem& ts, const std::vector<Word>& inputs, std::uint64_t max_cycles,
               bool record = false);
// Name-keyed convenience overload; missing inputs are zero.
Trace simulate(const TransitionSystem& ts, const std::unordered_map<std::string, Word>& inputs,
               std::uint64_t max_cycles, bool record = false);

}  // namespace evolvegen::ts
