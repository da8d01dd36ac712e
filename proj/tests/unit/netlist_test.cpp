#include <gtest/gtest.h>

#include <sstream>

#include "evolvegen/common/error.hpp"
#include "evolvegen/compile/schedule.hpp"
#include "evolvegen/netlist/aiger.hpp"
#include "evolvegen/netlist/bitblast.hpp"
#include "evolvegen/netlist/static_features.hpp"
#include "support/aig_oracle.hpp"

namespace evolvegen::netlist {
namespace {

TEST(Aiger, EmptyCircuitGolden) {
  AigCircuit c;
  EXPECT_EQ(write_aiger(c, AigerMode::kAscii), "aag 0 0 0 0 0\n");
  EXPECT_EQ(read_aiger("aag 0 0 0 0 0\n"), c);
}

TEST(Aiger, BufferGolden) {
  AigCircuit c;
  c.num_inputs = 1;
  c.outputs = {2};
  EXPECT_EQ(write_aiger(c, AigerMode::kAscii), "aag 1 1 0 1 0\n2\n2\n");
  EXPECT_EQ(read_aiger("aag 1 1 0 1 0\n2\n2\n"), c);
}

TEST(Aiger, BadSectionInHeader) {
  AigCircuit c;
  c.num_inputs = 1;
  c.latches = {{2, LatchInit::kZero}};
  c.bad = {4};
  EXPECT_EQ(write_aiger(c, AigerMode::kAscii), "aag 2 1 1 0 0 1\n2\n4 2\n4\n");
}

TEST(Aiger, RoundTripRandomCircuits) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    AigCircuit c = testing::random_aig(rng, 6, 6, 40, i % 2 == 0);
    check_well_formed(c);
    for (AigerMode m : {AigerMode::kAscii, AigerMode::kBinary}) {
      AigCircuit back = read_aiger(write_aiger(c, m));
      ASSERT_EQ(back, c) << write_aiger(c, AigerMode::kAscii);
    }
  }
}

TEST(Aiger, AsciiRenumbering) {
  // Gate defined with a higher variable first; reader sorts topologically.
  AigCircuit c = read_aiger("aag 4 2 0 1 2\n2\n4\n6\n8 2 4\n6 9 2\n");
  EXPECT_EQ(c.num_ands(), 2u);
  check_well_formed(c);
  std::vector<std::uint64_t> in{0b1100, 0b1010};
  auto v = evaluate_words(c, in, {});
  // out = ~(a & b) & a = a & ~b
  EXPECT_EQ(lit_word(v, c.outputs[0]) & 0xF, 0b0100u);
}

TEST(Aiger, MalformedInputsReportOffsets) {
  EXPECT_THROW(read_aiger("aag 1 1 0 1\n2\n2\n"), FormatError);
  EXPECT_THROW(read_aiger("aag 1 1 0 1 0\n2\n"), FormatError);
  EXPECT_THROW(read_aiger("abc 0 0 0 0 0\n"), FormatError);
  EXPECT_THROW(read_aiger("aag 2 0 0 1 2\n4\n4 6 2\n6 4 2\n"), FormatError);  // cycle
  try {
    read_aiger("aag 1 1 0 1 0\n2\nx\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.position(), 16u);
  }
}

TEST(StaticFeatures, SingleAnd) {
  AigCircuit c;
  c.num_inputs = 2;
  c.and_gates = {{6, 4, 2}};
  c.outputs = {6};
  StaticFeatures f = static_features(c);
  EXPECT_EQ(f.pi_count, 2);
  EXPECT_EQ(f.and_count, 1);
  EXPECT_EQ(f.latch_count, 0);
  EXPECT_EQ(f.depth_max, 1);
  EXPECT_EQ(f.depth_avg, 1);
}

ts::TransitionSystem binary_op_ts(ts::ExprOp op, unsigned width) {
  ts::TransitionSystem t;
  t.add_input("a", width);
  t.add_input("b", width);
  t.set_output("y", t.op2(op, t.input_ref(0), t.input_ref(1)));
  return t;
}

TEST(StaticFeatures, OneBitXor) {
  AigCircuit c = bitblast(binary_op_ts(ts::ExprOp::kXor, 1));
  EXPECT_EQ(c.num_ands(), 3u);
  EXPECT_EQ(static_features(c).xor_count, 1);
  // 1-bit add is the same structure.
  EXPECT_EQ(bitblast(binary_op_ts(ts::ExprOp::kAdd, 1)), c);
}

TEST(StaticFeatures, RippleAdderChain) {
  StaticFeatures f = static_features(bitblast(binary_op_ts(ts::ExprOp::kAdd, 4)));
  EXPECT_GE(f.adder_chain_count, 1);
  EXPECT_GE(f.xor_count, 4);
}

TEST(StaticFeatures, FlopFanout) {
  // Two latches, one feeding two gates and one feeding none.
  AigCircuit c;
  c.num_inputs = 1;
  c.latches = {{2, LatchInit::kZero}, {2, LatchInit::kZero}};
  c.and_gates = {{8, 4, 2}, {10, 5, 2}};
  c.outputs = {8, 10};
  StaticFeatures f = static_features(c);
  EXPECT_EQ(f.flop_fanout_min, 0);
  EXPECT_EQ(f.flop_fanout_max, 2);
  EXPECT_EQ(f.flop_fanout_mean, 1);
  EXPECT_EQ(f.flop_fanout_std, 1);
}

TEST(Bitblast, EqualityGrowsLinearly) {
  std::uint32_t prev = 0;
  for (unsigned w = 1; w <= 8; ++w) {
    AigCircuit c = bitblast(binary_op_ts(ts::ExprOp::kEq, w));
    EXPECT_EQ(c.num_ands(), 4 * w - 1);
    EXPECT_GT(c.num_ands(), prev);
    prev = c.num_ands();
  }
}

// Exhaustive (n*n <= 64 patterns) check of every binary operator against word evaluation.
TEST(Bitblast, OperatorsMatchWordSemantics) {
  using ts::ExprOp;
  for (ExprOp op : {ExprOp::kAnd, ExprOp::kOr, ExprOp::kXor, ExprOp::kAdd, ExprOp::kSub, ExprOp::kMul,
                    ExprOp::kShl, ExprOp::kLshr, ExprOp::kAshr, ExprOp::kEq, ExprOp::kUlt, ExprOp::kSlt}) {
    for (unsigned w : {1u, 2u, 3u}) {
      ts::TransitionSystem t = binary_op_ts(op, w);
      AigCircuit c = bitblast(t);
      const unsigned n = 1u << w;
      std::vector<std::uint64_t> in(2 * w, 0);
      for (unsigned p = 0; p < n * n; ++p) {
        unsigned a = p % n, b = p / n;
        for (unsigned k = 0; k < w; ++k) {
          if ((a >> k) & 1) in[k] |= 1ull << p;
          if ((b >> k) & 1) in[w + k] |= 1ull << p;
        }
      }
      auto v = evaluate_words(c, in, {});
      for (unsigned p = 0; p < n * n; ++p) {
        Word want = ts::evaluate_all(t, {p % n, p / n}, {})[t.outputs()[0].expr];
        Word got = 0;
        for (std::size_t k = 0; k < c.outputs.size(); ++k) {
          if ((lit_word(v, c.outputs[k]) >> p) & 1) got |= Word{1} << k;
        }
        ASSERT_EQ(got, want) << ts::expr_op_name(op) << " w=" << w << " a=" << p % n << " b=" << p / n;
      }
    }
  }
}

// Dual simulation: scheduled designs of random graphs, word level versus AIG.
TEST(Bitblast, SequentialDualSimulation) {
  graph::GenerationConfig cfg;
  cfg.max_width = 8;
  cfg.max_trip = 4;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed + 1000);
    graph::ComputationGraph g = graph::generate_fresh(rng, static_cast<unsigned>(rng.uniform_int(1, 12)), cfg);
    ts::TransitionSystem t = compile::schedule(
        g, {seed % 2 ? compile::ScheduleKind::kOptimized : compile::ScheduleKind::kBasic});
    AigCircuit c = bitblast(t);
    ASSERT_NO_THROW(check_well_formed(c));
    // 64 input vectors in parallel, 32 cycles.
    std::vector<std::vector<Word>> vecs(64);
    std::vector<std::uint64_t> in_words;
    for (const auto& in : t.inputs()) {
      for (unsigned k = 0; k < in.width; ++k) in_words.push_back(0);
    }
    for (int p = 0; p < 64; ++p) {
      std::size_t bit = 0;
      for (const auto& in : t.inputs()) {
        Word v = rng.next() & width_mask(in.width);
        vecs[p].push_back(v);
        for (unsigned k = 0; k < in.width; ++k, ++bit) {
          if (test_bit(v, k)) in_words[bit] |= 1ull << p;
        }
      }
    }
    std::vector<ts::Trace> traces;
    for (int p = 0; p < 64; ++p) traces.push_back(ts::simulate(t, vecs[p], 32, true));
    auto latches = initial_latch_words(c);
    for (int cycle = 0; cycle < 32; ++cycle) {
      auto v = evaluate_words(c, in_words, latches);
      for (int p = 0; p < 64; ++p) {
        // Latches mirror state bits in order.
        std::size_t li = 0;
        for (std::size_t s = 0; s < t.states().size(); ++s) {
          for (unsigned k = 0; k < t.states()[s].width; ++k, ++li) {
            bool want = test_bit(traces[p].states[cycle][s], k);
            ASSERT_EQ(((latches[li] >> p) & 1) != 0, want) << "seed " << seed << " cycle " << cycle;
          }
        }
        std::size_t oi = 0;
        for (std::size_t o = 0; o < t.outputs().size(); ++o) {
          for (unsigned k = 0; k < t.width(t.outputs()[o].expr); ++k, ++oi) {
            bool want = test_bit(traces[p].outputs[cycle][o], k);
            ASSERT_EQ(((lit_word(v, c.outputs[oi]) >> p) & 1) != 0, want);
          }
        }
      }
      latches = next_latch_words(c, v);
    }
  }
}

TEST(Btor2, SortsBeforeUseAndIncreasingIds) {
  ts::TransitionSystem t;
  t.add_input("x", 8);
  std::uint32_t s = t.add_state("s", 8, 0);
  t.set_next(s, t.add(t.state_ref(s), t.input_ref(0)));
  t.set_bad(t.eq(t.state_ref(s), t.constant(8, 200)));
  std::string text = write_btor2(t);
  EXPECT_EQ(text.rfind("1 sort bitvec 8\n2 input 1 x\n", 0), 0u) << text;
  std::istringstream in(text);
  std::string line;
  std::uint64_t prev = 0;
  int bads = 0;
  while (std::getline(in, line)) {
    std::uint64_t id = std::stoull(line);
    EXPECT_EQ(id, prev + 1);
    prev = id;
    bads += line.find(" bad ") != std::string::npos ? 1 : 0;
  }
  EXPECT_EQ(bads, 1);
}

TEST(Btor2, ConstantFalseBad) {
  ts::TransitionSystem t;
  t.add_input("x", 1);
  t.set_bad(t.zero(1));
  EXPECT_EQ(write_btor2(t), "1 sort bitvec 1\n2 input 1 x\n3 const 1 0\n4 bad 3\n");
}

}  // namespace
}  // namespace evolvegen::netlist
