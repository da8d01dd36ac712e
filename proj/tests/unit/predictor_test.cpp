#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "evolvegen/common/error.hpp"
#include "evolvegen/common/rng.hpp"
#include "evolvegen/netlist/aiger.hpp"
#include "evolvegen/netlist/bitblast.hpp"
#include "evolvegen/predictor/predictor.hpp"

namespace evolvegen::predictor {
namespace {

LabeledExample example(std::initializer_list<std::pair<std::size_t, double>> xs, double label) {
  LabeledExample e;
  for (auto [i, v] : xs) e.features.values[i] = v;
  e.label = label;
  return e;
}

TEST(Assemble, ZeroInZeroOut) {
  FeatureVector fv = assemble({}, {});
  EXPECT_EQ(fv.values.size(), 23u);
  for (double v : fv.values) EXPECT_EQ(v, 0);
}

TEST(Assemble, ClausesMaxLandsAtSchemaIndex) {
  checker::DynamicFeatures df;
  df.clauses_max = 42;
  FeatureVector fv = assemble({}, df);
  EXPECT_EQ(FeatureVector::index_of("clauses_max"), 14u);
  EXPECT_EQ(fv.values[14], 42);
  EXPECT_EQ(FeatureVector::names()[0], "pi_count");
  EXPECT_THROW(FeatureVector::index_of("time_sat"), SchemaMismatch);
}

TEST(Assemble, VersionMismatch) {
  EXPECT_THROW(assemble({}, 1, {}, 2), SchemaMismatch);
  EXPECT_NO_THROW(assemble({}, 1, {}, 1));
}

TEST(Assemble, JsonRoundTrip) {
  checker::DynamicFeatures df;
  df.obligations = 7;
  df.frac_sat = 0.25;
  netlist::StaticFeatures sf;
  sf.depth_avg = 1.0 / 3;
  FeatureVector fv = assemble(sf, df);
  EXPECT_EQ(features_from_json(features_to_json(fv)), fv);
  EXPECT_THROW(features_from_json("{\"schema_version\": 7}"), SchemaMismatch);
}

TEST(Train, ZeroRoundsPredictsMean) {
  std::vector<LabeledExample> d{example({{0, 1}}, 1.0), example({{0, 2}}, 3.0)};
  GbrtModel m = train(d, {0, 4, 0.1, 1});
  EXPECT_TRUE(m.trees.empty());
  EXPECT_DOUBLE_EQ(m.predict_raw(d[0].features), 2.0);
  EXPECT_DOUBLE_EQ(predict(m, d[1].features), std::expm1(2.0));
}

TEST(Train, SingleSplitFitsTwoPoints) {
  std::vector<LabeledExample> d{example({{3, 0.5}}, 1.0), example({{3, 4.0}}, 2.5)};
  TrainReport rep;
  GbrtModel m = train(d, {1, 1, 1.0, 1}, &rep);
  ASSERT_EQ(m.trees.size(), 1u);
  EXPECT_EQ(m.trees[0].nodes[0].feature, 3);
  EXPECT_DOUBLE_EQ(rep.mse_per_round.back(), 0.0);
}

TEST(Train, DegenerateLabelsGiveFlaggedConstant) {
  std::vector<LabeledExample> d;
  for (int i = 0; i < 12; ++i) d.push_back(example({{0, double(i)}}, 0.7));
  GbrtModel m = train(d, {});
  EXPECT_TRUE(m.degenerate);
  EXPECT_TRUE(m.trees.empty());
  EXPECT_DOUBLE_EQ(m.base_prediction, 0.7);
  EXPECT_THROW(evaluate_r2(m, d), DegenerateData);
}

std::vector<LabeledExample> linear_data(std::uint64_t seed, int n) {
  Rng rng(seed);
  std::vector<LabeledExample> d;
  for (int i = 0; i < n; ++i) {
    LabeledExample e;
    for (double& v : e.features.values) v = rng.uniform_real();
    e.label = 3 * e.features.values[1] + rng.normal(0, 0.1);
    d.push_back(e);
  }
  return d;
}

TEST(Train, LinearSignalHeldOut) {
  std::vector<LabeledExample> train_set, holdout;
  split_dataset(linear_data(1, 500), 7, train_set, holdout);
  EXPECT_EQ(train_set.size(), 350u);
  TrainReport rep;
  GbrtModel m = train(train_set, {}, &rep);
  EXPECT_GE(evaluate_r2(m, holdout), 0.9);
  ASSERT_EQ(rep.mse_per_round.size(), 201u);
  for (std::size_t r = 1; r < rep.mse_per_round.size(); ++r) {
    EXPECT_LE(rep.mse_per_round[r], rep.mse_per_round[r - 1] + 1e-12) << r;
  }
  for (const auto& t : m.trees) EXPECT_LE(t.depth(), 4u);
}

TEST(Train, DeterministicAndSerializable) {
  auto d = linear_data(2, 200);
  GbrtModel a = train(d, {50, 3, 0.2, 3});
  GbrtModel b = train(d, {50, 3, 0.2, 3});
  EXPECT_EQ(a, b);
  GbrtModel back = model_from_json(model_to_json(a));
  EXPECT_EQ(back, a);
  for (const auto& e : d) EXPECT_EQ(predict(back, e.features), predict(a, e.features));
  EXPECT_THROW(model_from_json("{}"), SchemaViolation);
}

TEST(Train, SchemaMismatchOnPredict) {
  GbrtModel m = train(linear_data(3, 20), {5, 2, 0.1, 2});
  FeatureVector fv;
  fv.schema_version = 2;
  EXPECT_THROW(predict(m, fv), SchemaMismatch);
}

TEST(R2, PerfectAndMeanOnly) {
  auto d = linear_data(4, 40);
  GbrtModel mean_only;
  double mean = 0;
  for (const auto& e : d) mean += e.label;
  mean_only.base_prediction = mean / static_cast<double>(d.size());
  EXPECT_NEAR(evaluate_r2(mean_only, d), 0.0, 1e-12);

  GbrtModel m = train(d, {20, 3, 0.3, 2});
  for (auto& e : d) e.label = m.predict_raw(e.features);
  EXPECT_DOUBLE_EQ(evaluate_r2(m, d), 1.0);
}

netlist::AigCircuit counter(unsigned width, Word step, Word target) {
  ts::TransitionSystem t;
  std::uint32_t c = t.add_state("c", width, 0);
  t.set_next(c, t.add(t.state_ref(c), t.constant(width, step)));
  t.set_bad(t.eq(t.state_ref(c), t.constant(width, target)));
  return netlist::bitblast_property(t);
}

// Wraps to zero after `limit`; bad = all ones, unreachable when limit is below it.
netlist::AigCircuit wrapping_counter(unsigned width, Word limit) {
  ts::TransitionSystem t;
  std::uint32_t c = t.add_state("c", width, 0);
  ts::ExprId cur = t.state_ref(c);
  t.set_next(c, t.ite(t.eq(cur, t.constant(width, limit)), t.zero(width), t.add(cur, t.constant(width, 1))));
  t.set_bad(t.eq(cur, t.ones(width)));
  return netlist::bitblast_property(t);
}

netlist::AigCircuit toggle(unsigned copies) {
  netlist::AigCircuit c;
  for (unsigned i = 0; i < copies; ++i) c.latches.push_back({netlist::aig_make(1 + i, true), netlist::LatchInit::kZero});
  c.and_gates = {{netlist::aig_make(copies + 1), copies >= 2 ? 5u : 3u, 2}};
  c.bad = {netlist::aig_make(copies + 1)};
  return c;
}

// Easy toggles versus wrapping counters whose invariants need many clauses;
// labels are measured PDR times. A wider counter ranks above the toggles.
TEST(Predict, RanksPlantedHardInstance) {
  DatasetOptions opt;
  opt.max_frames = 1000;
  std::vector<LabeledExample> d;
  for (unsigned copies = 2; copies <= 6; ++copies) {
    for (int rep = 0; rep < 4; ++rep) d.push_back(*label_instance(toggle(copies), "", "", opt));
  }
  for (unsigned w = 3; w <= 7; ++w) {
    for (Word gap : {2, 3}) d.push_back(*label_instance(wrapping_counter(w, (Word{1} << w) - gap), "", "", opt));
  }
  GbrtModel m = train(d, {100, 3, 0.1, 2});
  LabeledExample hard = *label_instance(wrapping_counter(8, 200), "", "", opt);
  const double hard_pred = predict(m, hard.features);
  int below = 0, easy = 0;
  for (unsigned copies = 2; copies <= 7; ++copies) {
    LabeledExample e = *label_instance(toggle(copies), "", "", opt);
    ++easy;
    below += predict(m, e.features) < hard_pred ? 1 : 0;
  }
  EXPECT_GE(below, (easy * 9 + 9) / 10);
}

TEST(Dataset, FiltersAndPersistence) {
  auto dir = std::filesystem::temp_directory_path() / ("evolvegen_ds_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir / "aa");
  std::filesystem::create_directories(dir / "bb");
  std::ofstream(dir / "aa" / "a.aig", std::ios::binary) << netlist::write_aiger(toggle(2), netlist::AigerMode::kBinary);
  // Unsafe only at depth 31: beyond five frames.
  std::ofstream(dir / "bb" / "a.aig", std::ios::binary) << netlist::write_aiger(counter(5, 1, 31), netlist::AigerMode::kBinary);
  std::filesystem::create_directories(dir / "cc");
  std::ofstream(dir / "cc" / "a.aig") << "garbage";

  Dataset d = build_dataset(dir.string(), {});
  EXPECT_EQ(d.provenance.instances_seen, 3u);
  ASSERT_EQ(d.examples.size(), 1u);
  EXPECT_EQ(d.examples[0].meta.graph_hash, "aa");
  EXPECT_EQ(d.provenance.excluded_frames, 1u);
  EXPECT_EQ(d.provenance.failures, 1u);
  EXPECT_GE(d.examples[0].label, 0);

  DatasetOptions strict;
  strict.max_label_s = 0;
  EXPECT_EQ(build_dataset(dir.string(), strict).provenance.excluded_time, 1u);

  Dataset back = dataset_from_json(dataset_to_json(d));
  ASSERT_EQ(back.examples.size(), 1u);
  EXPECT_EQ(back.examples[0].features, d.examples[0].features);
  EXPECT_EQ(back.examples[0].label, d.examples[0].label);
  std::filesystem::remove_all(dir);

  Dataset empty = build_dataset((dir / "missing").string(), {});
  EXPECT_TRUE(empty.examples.empty());
  EXPECT_EQ(empty.provenance.warnings.size(), 1u);
}

}  // namespace
}  // namespace evolvegen::predictor
