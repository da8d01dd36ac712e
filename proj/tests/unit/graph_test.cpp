#include <gtest/gtest.h>

#include <algorithm>

#include "evolvegen/common/error.hpp"
#include "evolvegen/graph/graph.hpp"
#include "support/graph_builder.hpp"

namespace evolvegen::graph {
namespace {

using testing::counted_loop;
using testing::GraphBuilder;
using testing::int_op;

bool mentions(const ValidationReport& r, std::string_view text) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const std::string& v) { return v.find(text) != std::string::npos; });
}

TEST(Validate, AcceptsHandBuiltGraph) {
  GraphBuilder b;
  auto x = b.input(4);
  NodeId c = b.op(int_op(OpKind::kEq, 1), {x, x});
  NodeId br = b.branch(c);
  b.op(int_op(OpKind::kAdd, 4), {x, x}, br);
  ComputationGraph g = b.finish();
  EXPECT_TRUE(validate(g).ok());
  ASSERT_EQ(g.outputs.size(), 1u);  // the condition is not an output
}

TEST(Validate, DistanceBeyondTrip) {
  GraphBuilder b;
  auto x = b.input(4);
  NodeId l = b.loop(counted_loop(2));
  NodeId s = b.op(int_op(OpKind::kAdd, 4), {x, x}, l);
  NodeId d = b.dep(l, s, 3);
  b.rewire(s, 0, Producer::of_node(d));
  EXPECT_TRUE(mentions(validate(b.finish()), "distance exceeds trip count"));
}

TEST(Validate, WideBranchCondition) {
  GraphBuilder b;
  auto x = b.input(4);
  NodeId c = b.op(int_op(OpKind::kAdd, 4), {x, x});
  b.branch(c);
  EXPECT_TRUE(mentions(validate(b.finish()), "condition width"));
}

TEST(Validate, DepReadOutsideItsLoop) {
  GraphBuilder b;
  auto x = b.input(4);
  NodeId l = b.loop(counted_loop(2));
  NodeId s = b.op(int_op(OpKind::kAdd, 4), {x, x}, l);
  NodeId d = b.dep(l, s, 1);
  b.rewire(s, 0, Producer::of_node(d));
  b.op(int_op(OpKind::kAdd, 4), {Producer::of_node(d), x});
  EXPECT_FALSE(validate(b.finish()).ok());
}

TEST(Validate, UnrollFactorAboveTrip) {
  GraphBuilder b;
  b.input(4);
  LoopAttrs l = counted_loop(2);
  l.unroll_factor = 3;
  b.loop(l);
  EXPECT_TRUE(mentions(validate(b.finish()), "unroll factor"));
}

TEST(Validate, OperandCountMismatch) {
  GraphBuilder b;
  auto x = b.input(4);
  b.op(int_op(OpKind::kAdd, 4), {x});
  EXPECT_TRUE(mentions(validate(b.finish()), "operand count"));
}

TEST(Validate, StaleOutputsRejected) {
  GraphBuilder b;
  auto x = b.input(4);
  b.op(int_op(OpKind::kAdd, 4), {x, x});
  ComputationGraph g = b.finish();
  g.outputs.clear();
  EXPECT_TRUE(mentions(validate(g), "outputs"));
}

// Closure: every accepted action keeps the graph valid and grows it by one.
TEST(Actions, ClosureUnderRandomActions) {
  GenerationConfig cfg;
  int accepted = 0, infeasible = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    ComputationGraph g = generate_fresh(rng, 3, cfg);
    for (int step = 0; step < 15; ++step) {
      ConstructionAction a;
      a.kind = static_cast<ActionKind>(rng.index(kNumActionKinds));
      try {
        ComputationGraph h = apply_action(g, a, rng, cfg);
        ValidationReport r = validate(h);
        ASSERT_TRUE(r.ok()) << r.violations.front();
        ASSERT_EQ(h.nodes.size(), g.nodes.size() + 1);
        ASSERT_EQ(h.action_log.size(), g.action_log.size() + 1);
        EXPECT_EQ(h.action_log.back().kind, a.kind);
        EXPECT_TRUE(h.action_log.back().attrs.has_value());
        g = std::move(h);
        ++accepted;
      } catch (const PlacementInfeasible&) {
        ++infeasible;
      }
    }
  }
  EXPECT_GT(accepted, 1000);
}

TEST(Actions, AddDepNeedsLoopWithOp) {
  GraphBuilder b;
  auto x = b.input(4);
  b.op(int_op(OpKind::kAdd, 4), {x, x});
  ComputationGraph g = b.finish();
  Rng rng(1);
  EXPECT_THROW(apply_action(g, {ActionKind::kAddDep, {}, {}, 0}, rng), PlacementInfeasible);
}

TEST(Actions, ActionLogReplaysToSameGraph) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    ComputationGraph g = generate_fresh(rng, 12);
    // Replaying the logged actions (attrs, region and seed fixed) on the
    // same inputs reproduces the graph.
    ComputationGraph h;
    h.inputs = g.inputs;
    h.outputs = compute_outputs(h);
    Rng unused(999);
    for (const ConstructionAction& a : g.action_log) h = apply_action(h, a, unused);
    EXPECT_EQ(serialize(h), serialize(g)) << "seed " << seed;
  }
}

TEST(Generate, DeterministicPerSeed) {
  Rng a(42), b(42);
  EXPECT_EQ(serialize(generate_fresh(a, 20)), serialize(generate_fresh(b, 20)));
}

TEST(Generate, LengthOutOfRange) {
  Rng rng(1);
  EXPECT_THROW(generate_fresh(rng, 0), ConfigError);
  EXPECT_THROW(generate_fresh(rng, 41), ConfigError);
}

TEST(Serialize, RoundTrip) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    ComputationGraph g = generate_fresh(rng, 1 + static_cast<unsigned>(seed % 20));
    std::string text = serialize(g);
    ComputationGraph back = deserialize(text);
    EXPECT_EQ(back, g);
    EXPECT_EQ(serialize(back), text);
  }
}

TEST(Serialize, RejectsUnknownVersionAndGarbage) {
  EXPECT_THROW(deserialize("{\"version\": 99}"), SchemaViolation);
  EXPECT_THROW(deserialize("not json"), SchemaViolation);
  EXPECT_THROW(deserialize("{\"version\": 1, \"inputs\": 3}"), SchemaViolation);
}

TEST(Hash, IgnoresIdLabelsAndActionLog) {
  Rng rng(5);
  ComputationGraph g = generate_fresh(rng, 10);
  ComputationGraph h = g;
  h.action_log.clear();
  EXPECT_EQ(canonical_hash(g), canonical_hash(h));
  // Shift every id by 100: same structure, same hash.
  auto shift = [](NodeId& id) { id.value += 100; };
  for (Node& n : h.nodes) {
    shift(n.id);
    if (n.region) shift(*n.region);
    if (n.kind() == NodeKind::kBranch) shift(std::get<BranchAttrs>(n.attrs).condition);
    if (n.kind() == NodeKind::kDep) shift(std::get<DepAttrs>(n.attrs).source);
  }
  for (Edge& e : h.edges) {
    shift(e.consumer);
    if (e.producer.kind == Producer::Kind::kNode) shift(e.producer.node);
  }
  for (NodeId& o : h.outputs) shift(o);
  std::reverse(h.edges.begin(), h.edges.end());
  EXPECT_EQ(canonical_hash(g), canonical_hash(h));
  EXPECT_EQ(canonical_hash(g).size(), 64u);
}

TEST(Hash, DistinguishesAttributes) {
  GraphBuilder b1, b2;
  auto x1 = b1.input(4);
  b1.op(int_op(OpKind::kAdd, 4), {x1, x1});
  auto x2 = b2.input(4);
  b2.op(int_op(OpKind::kAdd, 5), {x2, x2});
  EXPECT_NE(canonical_hash(b1.finish()), canonical_hash(b2.finish()));
}

}  // namespace
}  // namespace evolvegen::graph
