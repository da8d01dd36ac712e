#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evolvegen/checker/checker.hpp"
#include "evolvegen/netlist/static_features.hpp"

namespace evolvegen::predictor {

inline constexpr int kFeatureSchemaVersion = 1;
inline constexpr std::size_t kNumFeatures = netlist::StaticFeatures::kCount + checker::DynamicFeatures::kCount;
static_assert(kNumFeatures == 23);

struct FeatureVector {
  int schema_version = kFeatureSchemaVersion;
  std::array<double, kNumFeatures> values{};

  static const std::array<std::string, kNumFeatures>& names();
  // Index of a named feature; throws SchemaMismatch for unknown names.
  static std::size_t index_of(std::string_view name);
  bool operator==(const FeatureVector&) const = default;
};

FeatureVector assemble(const netlist::StaticFeatures& sf, const checker::DynamicFeatures& df);
// Throws SchemaMismatch when the two versions differ.
FeatureVector assemble(const netlist::StaticFeatures& sf, int static_version, const checker::DynamicFeatures& df,
                       int dynamic_version);

// Flat {"name": value, ..., "schema_version": n} object.
std::string features_to_json(const FeatureVector& fv);
FeatureVector features_from_json(const std::string& text);

struct ExampleMeta {
  std::string graph_hash;
  std::string checker_id;
  bool censored = false;
  double solve_seconds = 0;
};

struct LabeledExample {
  FeatureVector features;
  double label = 0;  // log(1 + seconds)
  ExampleMeta meta;
};

double time_to_label(double seconds);
double label_to_time(double label);

struct GbrtParams {
  unsigned rounds = 200;
  unsigned max_depth = 4;
  double learning_rate = 0.1;
  unsigned min_leaf = 5;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;     // taken when value <= threshold
  int right = -1;
  double value = 0;
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // root at 0
  double eval(const FeatureVector& fv) const;
  unsigned depth() const;
  bool operator==(const RegressionTree&) const = default;
};

struct GbrtModel {
  int schema_version = kFeatureSchemaVersion;
  std::string checker_id = "internal";
  double base_prediction = 0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  bool degenerate = false;  // all training labels were equal

  double predict_raw(const FeatureVector& fv) const;
  bool operator==(const GbrtModel&) const = default;
};

struct TrainReport {
  std::vector<double> mse_per_round;  // entry 0 is the base model
};

// Squared-error boosting with exact greedy splits. A dataset whose labels
// are all equal yields a constant model flagged `degenerate`.
GbrtModel train(const std::vector<LabeledExample>& data, const GbrtParams& params, TrainReport* report = nullptr);

// Seconds: exp(raw) - 1 clamped at zero. Throws SchemaMismatch.
double predict(const GbrtModel& model, const FeatureVector& fv);

// Coefficient of determination on log labels. Throws DegenerateData when the
// holdout is empty or has zero label variance.
double evaluate_r2(const GbrtModel& model, const std::vector<LabeledExample>& holdout);

std::string model_to_json(const GbrtModel& model);
GbrtModel model_from_json(const std::string& text);

struct DatasetOptions {
  std::string checker_id = "internal";
  std::optional<checker::ExternalAdapter> adapter;  // empty: internal PDR
  double timeout_s = 60;
  unsigned max_frames = 5;
  double max_label_s = 120;
  double dynamic_budget_s = 10;
  std::uint64_t dynamic_budget_propagations = 5'000'000;
};

struct DatasetProvenance {
  std::string corpus_dir;
  DatasetOptions options;
  std::size_t instances_seen = 0;
  std::size_t excluded_frames = 0;
  std::size_t excluded_time = 0;
  std::size_t failures = 0;
  std::vector<std::string> warnings;
};

struct Dataset {
  std::vector<LabeledExample> examples;
  DatasetProvenance provenance;
};

// Labels one problem. Returns nothing when the frame or time filter rejects
// it; `why` then names the filter.
std::optional<LabeledExample> label_instance(const netlist::AigCircuit& aig, const std::string& aig_path,
                                             const std::string& graph_hash, const DatasetOptions& options,
                                             std::string* why = nullptr);

// Every *.aig file below corpus_dir, in sorted path order; the hash is the
// parent directory name. Per-instance failures are recorded and skipped.
Dataset build_dataset(const std::string& corpus_dir, const DatasetOptions& options);

std::string dataset_to_json(const Dataset& d);
Dataset dataset_from_json(const std::string& text);

// Deterministic split: every example whose position modulo 10 is below
// train_tenths goes to training.
void split_dataset(const std::vector<LabeledExample>& all, unsigned train_tenths,
                   std::vector<LabeledExample>& train_set, std::vector<LabeledExample>& holdout);

}  // namespace evolvegen::predictor
