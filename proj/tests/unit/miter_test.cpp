#include <gtest/gtest.h>

#include "evolvegen/checker/checker.hpp"
#include "evolvegen/common/error.hpp"
#include "evolvegen/compile/schedule.hpp"
#include "evolvegen/miter/miter.hpp"
#include "evolvegen/netlist/bitblast.hpp"

namespace evolvegen::miter {
namespace {

using checker::Verdict;
using compile::ScheduleKind;

ts::TransitionSystem adder(unsigned in_width, unsigned result_width) {
  ts::TransitionSystem t;
  t.add_input("x", in_width);
  t.add_input("y", in_width);
  t.set_output("valid", t.ones(1));
  t.set_output("result", t.resize(t.add(t.input_ref(0), t.input_ref(1)), result_width, false));
  return t;
}

std::uint64_t latency(const ts::TransitionSystem& t) {
  std::vector<Word> zeros(t.inputs().size(), 0);
  return *ts::simulate(t, zeros, 10'000).first_valid_cycle;
}

TEST(Miter, SelfMiterIsSafe) {
  ts::TransitionSystem a = adder(4, 4);
  netlist::AigCircuit c = netlist::bitblast_property(build_miter(a, a));
  EXPECT_EQ(checker::pdr(c, {}).verdict, Verdict::kSafe);
}

TEST(Miter, ResultWidthMismatch) {
  EXPECT_THROW(build_miter(adder(4, 8), adder(4, 16)), SignatureMismatch);
  EXPECT_THROW(build_miter(adder(4, 8), adder(5, 8)), SignatureMismatch);
  ts::TransitionSystem no_valid;
  no_valid.add_input("x", 4);
  no_valid.add_input("y", 4);
  no_valid.set_output("result", no_valid.input_ref(0));
  EXPECT_THROW(build_miter(adder(4, 4), no_valid), SignatureMismatch);
}

TEST(Miter, PortsAndPrefixes) {
  ts::TransitionSystem m = build_miter(adder(4, 4), adder(4, 4));
  ASSERT_EQ(m.inputs().size(), 2u);
  EXPECT_EQ(m.inputs()[0].name, "x");
  EXPECT_TRUE(m.bad().has_value());
  EXPECT_TRUE(m.output("unsafe_signal").has_value());
}

graph::ComputationGraph sample_graph(std::uint64_t seed) {
  graph::GenerationConfig cfg;
  cfg.max_width = 6;
  cfg.max_trip = 4;
  Rng rng(seed);
  return graph::generate_fresh(rng, static_cast<unsigned>(rng.uniform_int(1, 10)), cfg);
}

// Basic versus Optimized of the same graph: no counterexample within the
// latency bound, whatever the inputs do after the first cycle.
TEST(Miter, ScheduledVariantsAreEquivalent) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    graph::ComputationGraph g = sample_graph(seed + 500);
    ts::TransitionSystem a = compile::schedule(g, {ScheduleKind::kBasic});
    ts::TransitionSystem b = compile::schedule(g, {ScheduleKind::kOptimized});
    netlist::AigCircuit c = netlist::bitblast_property(build_miter(a, b));
    auto bound = static_cast<unsigned>(std::max(latency(a), latency(b)) + 4);
    checker::CheckResult r = checker::bmc(c, bound);
    EXPECT_EQ(r.verdict, Verdict::kUnknown) << "seed " << seed;
  }
}

// Corrupting the result by XOR 1 is caught once both sides are done.
TEST(Miter, PlantedInequivalenceFound) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    graph::ComputationGraph g = sample_graph(seed + 900);
    ts::TransitionSystem a = compile::schedule(g, {ScheduleKind::kBasic});
    ts::TransitionSystem b = compile::schedule(g, {ScheduleKind::kOptimized});
    ts::ExprId res = *b.output("result");
    b.set_output("result", b.bxor(res, b.constant(b.width(res), 1)));
    netlist::AigCircuit c = netlist::bitblast_property(build_miter(a, b));
    const std::uint64_t lat = std::max(latency(a), latency(b));
    checker::CheckResult r = checker::bmc(c, static_cast<unsigned>(lat + 2));
    ASSERT_EQ(r.verdict, Verdict::kUnsafe) << "seed " << seed;
    EXPECT_EQ(r.trace->length(), lat) << "seed " << seed;
    EXPECT_TRUE(checker::replay_trace(c, *r.trace));
  }
}

}  // namespace
}  // namespace evolvegen::miter
