#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "evolvegen/common/error.hpp"
#include "evolvegen/predictor/predictor.hpp"

namespace evolvegen::predictor {

using nlohmann::json;

const std::array<std::string, kNumFeatures>& FeatureVector::names() {
  static const std::array<std::string, kNumFeatures> n = [] {
    std::array<std::string, kNumFeatures> out;
    std::size_t k = 0;
    for (auto s : netlist::StaticFeatures::names()) out[k++] = std::string(s);
    for (auto s : checker::DynamicFeatures::names()) out[k++] = std::string(s);
    return out;
  }();
  return n;
}

std::size_t FeatureVector::index_of(std::string_view name) {
  const auto& n = names();
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] == name) return i;
  }
  throw SchemaMismatch("unknown feature '" + std::string(name) + "'");
}

FeatureVector assemble(const netlist::StaticFeatures& sf, const checker::DynamicFeatures& df) {
  FeatureVector fv;
  auto s = sf.to_array();
  auto d = df.to_array();
  std::copy(s.begin(), s.end(), fv.values.begin());
  std::copy(d.begin(), d.end(), fv.values.begin() + static_cast<std::ptrdiff_t>(s.size()));
  return fv;
}

FeatureVector assemble(const netlist::StaticFeatures& sf, int static_version, const checker::DynamicFeatures& df,
                       int dynamic_version) {
  if (static_version != dynamic_version) {
    throw SchemaMismatch("static features v" + std::to_string(static_version) + " vs dynamic v" +
                         std::to_string(dynamic_version));
  }
  FeatureVector fv = assemble(sf, df);
  fv.schema_version = static_version;
  return fv;
}

std::string features_to_json(const FeatureVector& fv) {
  json j = json::object();
  for (std::size_t i = 0; i < kNumFeatures; ++i) j[FeatureVector::names()[i]] = fv.values[i];
  j["schema_version"] = fv.schema_version;
  return j.dump(2);
}

FeatureVector features_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (!j.is_object()) throw SchemaViolation("feature vector is not a JSON object");
  FeatureVector fv;
  fv.schema_version = j.value("schema_version", -1);
  if (fv.schema_version != kFeatureSchemaVersion) {
    throw SchemaMismatch("feature schema v" + std::to_string(fv.schema_version));
  }
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const auto& name = FeatureVector::names()[i];
    if (!j.contains(name) || !j[name].is_number()) throw SchemaMismatch("missing feature '" + name + "'");
    fv.values[i] = j[name].get<double>();
  }
  return fv;
}

double time_to_label(double seconds) { return std::log1p(std::max(0.0, seconds)); }
double label_to_time(double label) { return std::max(0.0, std::expm1(label)); }

double RegressionTree::eval(const FeatureVector& fv) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    i = fv.values[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

unsigned RegressionTree::depth() const {
  std::vector<unsigned> d(nodes.size(), 0);
  unsigned best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

double GbrtModel::predict_raw(const FeatureVector& fv) const {
  double sum = 0;
  for (const RegressionTree& t : trees) sum += t.eval(fv);
  return base_prediction + learning_rate * sum;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<LabeledExample>& data, const std::vector<std::vector<std::uint32_t>>& order,
              const GbrtParams& p)
      : data_(data), order_(order), p_(p), member_(data.size(), 0) {}

  RegressionTree build(const std::vector<double>& residual) {
    residual_ = &residual;
    tree_ = {};
    std::vector<std::uint32_t> all(data_.size());
    std::iota(all.begin(), all.end(), 0u);
    grow(all, 0);
    return std::move(tree_);
  }

 private:
  int grow(const std::vector<std::uint32_t>& idx, unsigned depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double sum = 0;
    for (auto i : idx) sum += (*residual_)[i];
    const double n = static_cast<double>(idx.size());
    tree_.nodes[static_cast<std::size_t>(id)].value = sum / n;
    if (depth >= p_.max_depth || idx.size() < 2 * static_cast<std::size_t>(p_.min_leaf)) return id;

    ++stamp_;
    for (auto i : idx) member_[i] = stamp_;
    double best_gain = 1e-12;
    int best_f = -1;
    double best_t = 0;
    const double parent = sum * sum / n;
    std::vector<std::uint32_t> sorted;
    sorted.reserve(idx.size());
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      sorted.clear();
      for (auto i : order_[f]) {
        if (member_[i] == stamp_) sorted.push_back(i);
      }
      double left = 0;
      for (std::size_t k = 1; k < sorted.size(); ++k) {
        left += (*residual_)[sorted[k - 1]];
        const double a = x(sorted[k - 1], f), b = x(sorted[k], f);
        if (k < p_.min_leaf || sorted.size() - k < p_.min_leaf || !(a < b)) continue;
        const double nl = static_cast<double>(k), nr = n - nl, right = sum - left;
        const double gain = left * left / nl + right * right / nr - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_f = static_cast<int>(f);
          double mid = a + (b - a) / 2;
          best_t = mid < b ? mid : a;
        }
      }
    }
    if (best_f < 0) return id;
    std::vector<std::uint32_t> l, r;
    for (auto i : idx) (x(i, static_cast<std::size_t>(best_f)) <= best_t ? l : r).push_back(i);
    tree_.nodes[static_cast<std::size_t>(id)].feature = best_f;
    tree_.nodes[static_cast<std::size_t>(id)].threshold = best_t;
    int li = grow(l, depth + 1);
    int ri = grow(r, depth + 1);
    tree_.nodes[static_cast<std::size_t>(id)].left = li;
    tree_.nodes[static_cast<std::size_t>(id)].right = ri;
    return id;
  }

  double x(std::uint32_t i, std::size_t f) const { return data_[i].features.values[f]; }

  const std::vector<LabeledExample>& data_;
  const std::vector<std::vector<std::uint32_t>>& order_;
  GbrtParams p_;
  std::vector<std::uint32_t> member_;
  std::uint32_t stamp_ = 0;
  const std::vector<double>* residual_ = nullptr;
  RegressionTree tree_;
};

double mse(const std::vector<LabeledExample>& data, const std::vector<double>& pred) {
  double s = 0;
  for (std::size_t i = 0; i < data.size(); ++i) s += (data[i].label - pred[i]) * (data[i].label - pred[i]);
  return s / static_cast<double>(data.size());
}

}  // namespace

GbrtModel train(const std::vector<LabeledExample>& data, const GbrtParams& params, TrainReport* report) {
  if (data.empty()) throw DegenerateData("empty training set");
  if (params.max_depth == 0 || params.min_leaf == 0 || !(params.learning_rate > 0)) {
    throw ConfigError("GBRT parameters must be positive");
  }
  for (const auto& e : data) {
    if (e.features.schema_version != kFeatureSchemaVersion) throw SchemaMismatch("training example schema");
  }
  GbrtModel m;
  m.learning_rate = params.learning_rate;
  m.checker_id = data.front().meta.checker_id;
  double sum = 0;
  for (const auto& e : data) sum += e.label;
  m.base_prediction = sum / static_cast<double>(data.size());
  m.degenerate = std::all_of(data.begin(), data.end(), [&](const auto& e) { return e.label == data[0].label; });

  std::vector<double> pred(data.size(), m.base_prediction);
  if (report) report->mse_per_round = {mse(data, pred)};
  if (m.degenerate) return m;

  std::vector<std::vector<std::uint32_t>> order(kNumFeatures);
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    order[f].resize(data.size());
    std::iota(order[f].begin(), order[f].end(), 0u);
    std::stable_sort(order[f].begin(), order[f].end(), [&](auto a, auto b) {
      return data[a].features.values[f] < data[b].features.values[f];
    });
  }
  TreeBuilder builder(data, order, params);
  std::vector<double> residual(data.size());
  for (unsigned r = 0; r < params.rounds; ++r) {
    for (std::size_t i = 0; i < data.size(); ++i) residual[i] = data[i].label - pred[i];
    RegressionTree t = builder.build(residual);
    for (std::size_t i = 0; i < data.size(); ++i) pred[i] += m.learning_rate * t.eval(data[i].features);
    m.trees.push_back(std::move(t));
    if (report) report->mse_per_round.push_back(mse(data, pred));
  }
  return m;
}

double predict(const GbrtModel& model, const FeatureVector& fv) {
  if (fv.schema_version != model.schema_version) {
    throw SchemaMismatch("feature schema v" + std::to_string(fv.schema_version) + " vs model v" +
                         std::to_string(model.schema_version));
  }
  return label_to_time(model.predict_raw(fv));
}

double evaluate_r2(const GbrtModel& model, const std::vector<LabeledExample>& holdout) {
  if (holdout.empty()) throw DegenerateData("empty holdout");
  if (std::all_of(holdout.begin(), holdout.end(), [&](const auto& e) { return e.label == holdout[0].label; })) {
    throw DegenerateData("holdout labels have zero variance");
  }
  double mean = 0;
  for (const auto& e : holdout) mean += e.label;
  mean /= static_cast<double>(holdout.size());
  double ss_tot = 0, ss_res = 0;
  for (const auto& e : holdout) {
    if (e.features.schema_version != model.schema_version) throw SchemaMismatch("holdout example schema");
    const double p = model.predict_raw(e.features);
    ss_tot += (e.label - mean) * (e.label - mean);
    ss_res += (e.label - p) * (e.label - p);
  }
  return 1 - ss_res / ss_tot;
}

std::string model_to_json(const GbrtModel& m) {
  json j;
  j["format"] = "evolvegen-gbrt";
  j["version"] = 1;
  j["schema_version"] = m.schema_version;
  j["feature_names"] = FeatureVector::names();
  j["checker_id"] = m.checker_id;
  j["base_prediction"] = m.base_prediction;
  j["learning_rate"] = m.learning_rate;
  j["degenerate"] = m.degenerate;
  j["trees"] = json::array();
  for (const RegressionTree& t : m.trees) {
    json nodes = json::array();
    for (const TreeNode& n : t.nodes) {
      if (n.feature < 0) {
        nodes.push_back({{"value", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value}});
      }
    }
    j["trees"].push_back(std::move(nodes));
  }
  return j.dump();
}

GbrtModel model_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (!j.is_object() || j.value("format", "") != "evolvegen-gbrt") throw SchemaViolation("not a GBRT model");
  GbrtModel m;
  try {
    if (j.at("version").get<int>() != 1) throw SchemaViolation("unsupported model version");
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kFeatureSchemaVersion) throw SchemaMismatch("model feature schema");
    m.checker_id = j.at("checker_id").get<std::string>();
    m.base_prediction = j.at("base_prediction").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.degenerate = j.at("degenerate").get<bool>();
    for (const json& jt : j.at("trees")) {
      RegressionTree t;
      for (const json& jn : jt) {
        TreeNode n;
        n.value = jn.at("value").get<double>();
        if (jn.contains("feature")) {
          n.feature = jn.at("feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
          if (n.feature >= static_cast<int>(kNumFeatures)) throw SchemaViolation("feature index out of range");
        }
        t.nodes.push_back(n);
      }
      const int size = static_cast<int>(t.nodes.size());
      for (const TreeNode& n : t.nodes) {
        if (n.feature >= 0 && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size)) {
          throw SchemaViolation("tree child index out of range");
        }
      }
      if (t.nodes.empty()) throw SchemaViolation("empty tree");
      m.trees.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw SchemaViolation(std::string("model: ") + e.what());
  }
  return m;
}

void split_dataset(const std::vector<LabeledExample>& all, unsigned train_tenths,
                   std::vector<LabeledExample>& train_set, std::vector<LabeledExample>& holdout) {
  train_set.clear();
  holdout.clear();
  for (std::size_t i = 0; i < all.size(); ++i) (i % 10 < train_tenths ? train_set : holdout).push_back(all[i]);
}

}  // namespace evolvegen::predictor
