#include <gtest/gtest.h>

#include <cctype>

#include "evolvegen/common/error.hpp"
#include "evolvegen/compile/interpret.hpp"
#include "evolvegen/compile/schedule.hpp"
#include "evolvegen/compile/semantics.hpp"
#include "support/graph_builder.hpp"

namespace evolvegen::compile {
namespace {

using namespace graph;
using testing::counted_loop;
using testing::fixed_op;
using testing::GraphBuilder;
using testing::int_op;

constexpr ScheduleStrategy kBasic{ScheduleKind::kBasic};
constexpr ScheduleStrategy kOptimized{ScheduleKind::kOptimized};

Word run_schedule(const ComputationGraph& g, const ScheduleStrategy& s, const std::vector<Word>& in,
                  std::uint64_t* cycle = nullptr) {
  ts::TransitionSystem t = schedule(g, s);
  t.check_well_typed();
  ts::Trace tr = ts::simulate(t, in, 100000);
  EXPECT_TRUE(tr.first_valid_cycle.has_value());
  if (cycle) *cycle = tr.first_valid_cycle.value_or(0);
  return tr.result_at_valid;
}

Word single_op(const OpAttrs& a, std::vector<Word> raw, std::vector<ValueType> types) {
  return eval_op_scalar(a, raw, types);
}

TEST(Semantics, IntWrapAdd) {
  // 9 + 9 = 18 wraps to 2 in 4 bits.
  EXPECT_EQ(single_op(int_op(OpKind::kAdd, 4), {9, 9}, {{4, false, 0}, {4, false, 0}}), 2);
}

TEST(Semantics, SignedSaturatingAdd) {
  EXPECT_EQ(single_op(int_op(OpKind::kAdd, 4, true, Saturation::kSaturate), {7, 7}, {{4, true, 0}, {4, true, 0}}), 7);
  // -8 + -8 clamps to -8.
  EXPECT_EQ(single_op(int_op(OpKind::kAdd, 4, true, Saturation::kSaturate), {8, 8}, {{4, true, 0}, {4, true, 0}}), 8);
}

TEST(Semantics, FixedPointAddSaturateAndWrap) {
  // Fixed(4,2): 1.75 is raw 0b0111. Sum 3.5 saturates to 1.75, wraps to -0.5.
  ValueType f{4, true, 2};
  EXPECT_EQ(single_op(fixed_op(OpKind::kAdd, 4, 2, true, Saturation::kSaturate), {7, 7}, {f, f}), 7);
  EXPECT_EQ(single_op(fixed_op(OpKind::kAdd, 4, 2, true, Saturation::kWrap), {7, 7}, {f, f}), 0b1110);
}

TEST(Semantics, FixedMultiplyRounding) {
  // 0.75 * 0.75 = 0.5625 in Fixed(4,2): truncate to 0.5, round half up to 0.5.
  ValueType f{4, true, 2};
  EXPECT_EQ(single_op(fixed_op(OpKind::kMul, 4, 2, true, Saturation::kWrap), {3, 3}, {f, f}), 2);
  // 0.5 * 0.75 = 0.375: truncates to 0.25, rounds to 0.5.
  EXPECT_EQ(single_op(fixed_op(OpKind::kMul, 4, 2, true, Saturation::kWrap), {2, 3}, {f, f}), 1);
  EXPECT_EQ(single_op(fixed_op(OpKind::kMul, 4, 2, true, Saturation::kWrap, Rounding::kRoundHalfUp), {2, 3}, {f, f}), 2);
}

TEST(Semantics, ComparisonsUseValuesNotBits) {
  // Signed -1 (0xF) is less than unsigned 1.
  OpAttrs lt = int_op(OpKind::kLt, 1);
  EXPECT_EQ(single_op(lt, {0xF, 1}, {{4, true, 0}, {4, false, 0}}), 1);
  EXPECT_EQ(single_op(lt, {0xF, 1}, {{4, false, 0}, {4, false, 0}}), 0);
}

TEST(Semantics, ShiftAmountIsUnsignedRawBits) {
  // Shift amount 0xF read as 15 even from a signed operand.
  EXPECT_EQ(single_op(int_op(OpKind::kShl, 8), {1, 0xF}, {{8, false, 0}, {4, true, 0}}), 0);
  EXPECT_EQ(single_op(int_op(OpKind::kShr, 8, true), {0x80, 3}, {{8, true, 0}, {4, false, 0}}), 0xF0);
}

// Plain modular arithmetic as an independent oracle for integer wrap ops.
TEST(Semantics, IntegerWrapMatchesModularArithmetic) {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    unsigned w0 = static_cast<unsigned>(rng.uniform_int(1, 12));
    unsigned w1 = static_cast<unsigned>(rng.uniform_int(1, 12));
    unsigned w = static_cast<unsigned>(rng.uniform_int(1, 12));
    bool s0 = rng.bernoulli(0.5), s1 = rng.bernoulli(0.5);
    Word a = rng.next() & width_mask(w0), b = rng.next() & width_mask(w1);
    std::int64_t va = s0 ? static_cast<std::int64_t>(to_signed(a, w0)) : static_cast<std::int64_t>(a);
    std::int64_t vb = s1 ? static_cast<std::int64_t>(to_signed(b, w1)) : static_cast<std::int64_t>(b);
    std::vector<ValueType> t{{w0, s0, 0}, {w1, s1, 0}};
    auto mod = [&](std::int64_t x) { return static_cast<Word>(static_cast<std::uint64_t>(x) & ((1ull << w) - 1)); };
    EXPECT_EQ(single_op(int_op(OpKind::kAdd, w), {a, b}, t), mod(va + vb));
    EXPECT_EQ(single_op(int_op(OpKind::kSub, w), {a, b}, t), mod(va - vb));
    EXPECT_EQ(single_op(int_op(OpKind::kMul, w), {a, b}, t), mod(va * vb));
    EXPECT_EQ(single_op(int_op(OpKind::kXor, w), {a, b}, t), mod(va ^ vb));
    EXPECT_EQ(single_op(int_op(OpKind::kLe, 1), {a, b}, t), va <= vb ? 1u : 0u);
  }
}

TEST(Schedule, SingleAddLatency) {
  GraphBuilder b;
  auto x = b.input(4), y = b.input(4);
  b.op(int_op(OpKind::kAdd, 4), {x, y});
  ComputationGraph g = b.finish();
  std::uint64_t cycle = 0;
  EXPECT_EQ(run_schedule(g, kBasic, {9, 9}, &cycle), 2);
  EXPECT_EQ(cycle, 1u);
  EXPECT_EQ(run_schedule(g, kOptimized, {9, 9}, &cycle), 2);
  EXPECT_EQ(cycle, 1u);
}

// acc += a * b over four iterations.
ComputationGraph mac(LoopAttrs loop) {
  GraphBuilder b;
  auto a = b.input(4), c = b.input(4);
  NodeId l = b.loop(loop);
  NodeId m = b.op(int_op(OpKind::kMul, 8), {a, c}, l);
  NodeId acc = b.op(int_op(OpKind::kAdd, 10), {Producer::of_const(0, 1, false), Producer::of_node(m)}, l);
  NodeId d = b.dep(l, acc, 1, Producer::of_const(0, 1, false));
  b.rewire(acc, 0, Producer::of_node(d));
  return b.finish();
}

TEST(Schedule, MultiplyAccumulate) {
  ComputationGraph g = mac(counted_loop(4));
  ASSERT_TRUE(validate(g).ok()) << validate(g).violations.front();
  EXPECT_EQ(interpret_result(g, {3, 5}), 60u);
  std::uint64_t cycle = 0;
  EXPECT_EQ(run_schedule(g, kBasic, {3, 5}, &cycle), 60u);
  EXPECT_EQ(cycle, 9u);  // entry step plus two ops per iteration

  for (unsigned u : {1u, 2u, 3u, 4u}) {
    for (bool pipe : {false, true}) {
      LoopAttrs l = counted_loop(4);
      l.unroll_factor = u;
      l.pipelined = pipe;
      ComputationGraph go = mac(l);
      EXPECT_EQ(run_schedule(go, kOptimized, {3, 5}, &cycle), 60u) << "u=" << u << " pipe=" << pipe;
    }
  }
  LoopAttrs pipe = counted_loop(4);
  pipe.pipelined = true;
  run_schedule(mac(pipe), kOptimized, {3, 5}, &cycle);
  EXPECT_EQ(cycle, 4u);
  LoopAttrs full = counted_loop(4);
  full.fully_unrolled = true;
  run_schedule(mac(full), kOptimized, {3, 5}, &cycle);
  EXPECT_LT(cycle, 9u);
}

TEST(Schedule, DistanceTwoRecurrenceUnrolled) {
  // Two interleaved running sums seeded from the input.
  for (unsigned u : {1u, 2u, 3u, 5u}) {
    GraphBuilder b;
    auto a = b.input(6);
    LoopAttrs la = counted_loop(5);
    la.unroll_factor = u;
    NodeId l = b.loop(la);
    NodeId s = b.op(int_op(OpKind::kAdd, 8), {Producer::of_const(0, 1, false), Producer::of_node(l)}, l);
    NodeId d = b.dep(l, s, 2, a);
    b.rewire(s, 0, Producer::of_node(d));
    ComputationGraph g = b.finish();
    ASSERT_TRUE(validate(g).ok()) << validate(g).violations.front();
    // i=0: a+0, i=1: a+1, i=2: a+2, i=3: a+1+3, i=4: a+2+4 = a+6.
    EXPECT_EQ(interpret_result(g, {10}), 16u);
    EXPECT_EQ(run_schedule(g, kOptimized, {10}), 16u) << "u=" << u;
    EXPECT_EQ(run_schedule(g, kBasic, {10}), 16u);
  }
}

TEST(Schedule, BranchMasksValueWhenConditionFalse) {
  GraphBuilder b;
  auto x = b.input(4), y = b.input(4);
  NodeId c = b.op(int_op(OpKind::kLt, 1), {x, y});
  NodeId br = b.branch(c);
  b.op(int_op(OpKind::kAdd, 5), {x, y}, br);
  ComputationGraph g = b.finish();
  ASSERT_TRUE(validate(g).ok());
  for (Word xv : {Word{2}, Word{9}}) {
    Word expect = xv < 5 ? xv + 5 : 0;
    EXPECT_EQ(interpret_result(g, {xv, 5}), expect);
    EXPECT_EQ(run_schedule(g, kBasic, {xv, 5}), expect);
    EXPECT_EQ(run_schedule(g, kOptimized, {xv, 5}), expect);
  }
}

TEST(Schedule, FlattenedNestCountsAllIterations) {
  GraphBuilder b;
  auto x = b.input(4);
  LoopAttrs outer = counted_loop(3);
  outer.flattened = true;
  NodeId lo = b.loop(outer);
  NodeId li = b.loop(counted_loop(4), lo);
  NodeId s = b.op(int_op(OpKind::kAdd, 8), {Producer::of_const(0, 1, false), x}, li);
  NodeId d = b.dep(li, s, 1);
  b.rewire(s, 0, Producer::of_node(d));
  ComputationGraph g = b.finish();
  ASSERT_TRUE(validate(g).ok()) << validate(g).violations.front();
  // The inner sum restarts for each outer iteration; the last one is 4x.
  EXPECT_EQ(interpret_result(g, {3}), 12u);
  std::uint64_t cycle = 0;
  EXPECT_EQ(run_schedule(g, kOptimized, {3}, &cycle), 12u);
  EXPECT_EQ(cycle, 12u);
  EXPECT_EQ(run_schedule(g, kBasic, {3}), 12u);
}

TEST(Schedule, InductionVariableWrapsAtEightBits) {
  GraphBuilder b;
  b.input(1);
  LoopAttrs l;
  l.start = 120;
  l.end = 132;
  l.step = 4;
  NodeId lp = b.loop(l);
  b.op(int_op(OpKind::kAdd, 16, true), {Producer::of_node(lp), Producer::of_const(0, 1, false)}, lp);
  ComputationGraph g = b.finish();
  // Last iteration value 128 reads as -128.
  EXPECT_EQ(interpret_result(g, {0}), from_signed(-128, 16));
  EXPECT_EQ(run_schedule(g, kBasic, {0}), from_signed(-128, 16));
  EXPECT_EQ(run_schedule(g, kOptimized, {0}), from_signed(-128, 16));
}

TEST(Schedule, EmptyGraphProducesZero) {
  GraphBuilder b;
  b.input(3);
  ComputationGraph g = b.finish();
  EXPECT_EQ(run_schedule(g, kBasic, {5}), 0u);
  EXPECT_EQ(run_schedule(g, kOptimized, {5}), 0u);
}

TEST(Schedule, BudgetExceededThrows) {
  GraphBuilder b;
  auto x = b.input(4);
  LoopAttrs l = counted_loop(8);
  l.fully_unrolled = true;
  NodeId lp = b.loop(l);
  b.op(int_op(OpKind::kAdd, 4), {x, x}, lp);
  ComputationGraph g = b.finish();
  ScheduleStrategy s{ScheduleKind::kOptimized, 2, 4};
  EXPECT_THROW(schedule(g, s), ResourceBound);
}

TEST(Schedule, DepthThresholdOneRegistersEveryLevel) {
  GraphBuilder b;
  auto x = b.input(4);
  NodeId n0 = b.op(int_op(OpKind::kAdd, 4), {x, x});
  NodeId n1 = b.op(int_op(OpKind::kAdd, 4), {Producer::of_node(n0), x});
  b.op(int_op(OpKind::kAdd, 4), {Producer::of_node(n1), x});
  ComputationGraph g = b.finish();
  EXPECT_EQ(schedule_steps(g, {ScheduleKind::kOptimized, 1}), 3u);
  EXPECT_EQ(schedule_steps(g, {ScheduleKind::kOptimized, 2}), 2u);
  EXPECT_EQ(schedule_steps(g, {ScheduleKind::kOptimized, 3}), 1u);
  ts::TransitionSystem t = schedule(g, {ScheduleKind::kOptimized, 1});
  std::size_t regs = 0;
  for (const auto& s : t.states()) regs += s.name[0] == 'r' && std::isdigit(static_cast<unsigned char>(s.name[1])) ? 1 : 0;
  EXPECT_EQ(regs, 3u);
}

TEST(Schedule, HlsSourcePragmas) {
  LoopAttrs l = counted_loop(4);
  l.pipelined = true;
  l.unroll_factor = 2;
  ComputationGraph g = mac(l);
  std::string opt = emit_hls_source(g, kOptimized);
  EXPECT_NE(opt.find("#pragma HLS pipeline II=1"), std::string::npos);
  EXPECT_NE(opt.find("#pragma HLS unroll factor=2"), std::string::npos);
  std::string basic = emit_hls_source(g, kBasic);
  EXPECT_EQ(basic.find("#pragma"), std::string::npos);
  EXPECT_EQ(opt, emit_hls_source(g, kOptimized));
}

// Both schedules against the interpreter on random graphs, including
// after-valid stability of the outputs.
TEST(Schedule, RandomGraphsAgreeWithInterpreter) {
  GenerationConfig cfg;
  cfg.max_width = 8;
  cfg.max_trip = 4;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    Rng rng(seed);
    unsigned length = static_cast<unsigned>(rng.uniform_int(1, 20));
    ComputationGraph g = generate_fresh(rng, length, cfg);
    ASSERT_TRUE(validate(g).ok());
    ts::TransitionSystem tb = schedule(g, kBasic);
    ts::TransitionSystem to = schedule(g, kOptimized);
    for (int v = 0; v < 5; ++v) {
      std::vector<Word> in;
      for (const PrimaryInput& p : g.inputs) in.push_back(rng.next() & width_mask(p.width));
      Word want = interpret_result(g, in);
      for (const ts::TransitionSystem* t : {&tb, &to}) {
        ts::Trace tr = ts::simulate(*t, in, 200000);
        ASSERT_TRUE(tr.first_valid_cycle) << "seed " << seed;
        ASSERT_EQ(tr.result_at_valid, want) << "seed " << seed << " graph:\n" << serialize(g);
      }
    }
    std::vector<Word> in(g.inputs.size(), 1);
    ts::Trace tr = ts::simulate(tb, in, 200000);
    ts::Trace rec = ts::simulate(tb, in, *tr.first_valid_cycle + 4, true);
    for (std::size_t c = *tr.first_valid_cycle; c < rec.outputs.size(); ++c) {
      EXPECT_EQ(rec.outputs[c], rec.outputs[*tr.first_valid_cycle]);
    }
  }
}

}  // namespace
}  // namespace evolvegen::compile
