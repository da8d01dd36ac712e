#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "evolvegen/common/error.hpp"
#include "evolvegen/netlist/aiger.hpp"
#include "evolvegen/predictor/predictor.hpp"

namespace evolvegen::predictor {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<LabeledExample> label_instance(const netlist::AigCircuit& aig, const std::string& aig_path,
                                             const std::string& graph_hash, const DatasetOptions& options,
                                             std::string* why) {
  checker::DynamicRun dyn = checker::dynamic_features(aig, options.max_frames, options.dynamic_budget_s,
                                                      options.dynamic_budget_propagations);
  if (dyn.result.verdict == checker::Verdict::kUnknown) {
    if (why) *why = "frames";
    return std::nullopt;
  }
  LabeledExample ex;
  ex.features = assemble(netlist::static_features(aig), dyn.features);
  ex.meta.graph_hash = graph_hash;
  ex.meta.checker_id = options.checker_id;
  double seconds;
  if (options.adapter) {
    std::string problem = aig_path;
    if (options.adapter->format == "btor2") problem = fs::path(aig_path).replace_extension(".btor2").string();
    checker::ExternalResult r = checker::run_external(*options.adapter, problem, options.timeout_s,
                                                      problem + "." + options.adapter->name + ".log");
    seconds = r.wall_time;
    ex.meta.censored = r.reason == "timeout";
  } else {
    checker::CheckResult r = checker::pdr(aig, {1000, options.timeout_s, 0});
    seconds = r.wall_time;
    ex.meta.censored = r.verdict == checker::Verdict::kUnknown;
  }
  if (ex.meta.censored) seconds = options.timeout_s;
  if (seconds > options.max_label_s) {
    if (why) *why = "time";
    return std::nullopt;
  }
  ex.meta.solve_seconds = seconds;
  ex.label = time_to_label(seconds);
  return ex;
}

Dataset build_dataset(const std::string& corpus_dir, const DatasetOptions& options) {
  Dataset d;
  d.provenance.corpus_dir = corpus_dir;
  d.provenance.options = options;
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(corpus_dir, ec)) {
    for (const auto& e : fs::recursive_directory_iterator(corpus_dir)) {
      if (e.is_regular_file() && e.path().extension() == ".aig") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) d.provenance.warnings.push_back("empty corpus: no .aig files under " + corpus_dir);
  for (const fs::path& p : files) {
    ++d.provenance.instances_seen;
    try {
      std::ifstream in(p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      netlist::AigCircuit aig = netlist::read_aiger(ss.str());
      std::string why;
      auto ex = label_instance(aig, p.string(), p.parent_path().filename().string(), options, &why);
      if (ex) {
        d.examples.push_back(std::move(*ex));
      } else if (why == "frames") {
        ++d.provenance.excluded_frames;
      } else {
        ++d.provenance.excluded_time;
      }
    } catch (const std::exception& e) {
      ++d.provenance.failures;
      d.provenance.warnings.push_back(p.string() + ": " + e.what());
    }
  }
  return d;
}

std::string dataset_to_json(const Dataset& d) {
  json j;
  j["format"] = "evolvegen-dataset";
  j["version"] = 1;
  j["schema_version"] = kFeatureSchemaVersion;
  j["feature_names"] = FeatureVector::names();
  const auto& o = d.provenance.options;
  j["provenance"] = {{"corpus_dir", d.provenance.corpus_dir},
                     {"checker_id", o.checker_id},
                     {"timeout_s", o.timeout_s},
                     {"max_frames", o.max_frames},
                     {"max_label_s", o.max_label_s},
                     {"dynamic_budget_s", o.dynamic_budget_s},
                     {"dynamic_budget_propagations", o.dynamic_budget_propagations},
                     {"instances_seen", d.provenance.instances_seen},
                     {"excluded_frames", d.provenance.excluded_frames},
                     {"excluded_time", d.provenance.excluded_time},
                     {"failures", d.provenance.failures},
                     {"warnings", d.provenance.warnings}};
  j["examples"] = json::array();
  for (const LabeledExample& e : d.examples) {
    j["examples"].push_back({{"features", e.features.values},
                             {"label", e.label},
                             {"meta",
                              {{"graph_hash", e.meta.graph_hash},
                               {"checker_id", e.meta.checker_id},
                               {"censored", e.meta.censored},
                               {"solve_seconds", e.meta.solve_seconds}}}});
  }
  return j.dump(1);
}

Dataset dataset_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (!j.is_object() || j.value("format", "") != "evolvegen-dataset") throw SchemaViolation("not a dataset");
  if (j.value("schema_version", -1) != kFeatureSchemaVersion) throw SchemaMismatch("dataset feature schema");
  Dataset d;
  try {
    const json& p = j.at("provenance");
    d.provenance.corpus_dir = p.at("corpus_dir").get<std::string>();
    d.provenance.options.checker_id = p.at("checker_id").get<std::string>();
    d.provenance.options.timeout_s = p.at("timeout_s").get<double>();
    d.provenance.options.max_frames = p.at("max_frames").get<unsigned>();
    d.provenance.options.max_label_s = p.at("max_label_s").get<double>();
    d.provenance.options.dynamic_budget_s = p.at("dynamic_budget_s").get<double>();
    d.provenance.options.dynamic_budget_propagations = p.at("dynamic_budget_propagations").get<std::uint64_t>();
    d.provenance.instances_seen = p.at("instances_seen").get<std::size_t>();
    d.provenance.excluded_frames = p.at("excluded_frames").get<std::size_t>();
    d.provenance.excluded_time = p.at("excluded_time").get<std::size_t>();
    d.provenance.failures = p.at("failures").get<std::size_t>();
    d.provenance.warnings = p.at("warnings").get<std::vector<std::string>>();
    for (const json& je : j.at("examples")) {
      LabeledExample e;
      auto values = je.at("features").get<std::vector<double>>();
      if (values.size() != kNumFeatures) throw SchemaMismatch("example has " + std::to_string(values.size()) + " features");
      std::copy(values.begin(), values.end(), e.features.values.begin());
      e.label = je.at("label").get<double>();
      const json& m = je.at("meta");
      e.meta.graph_hash = m.at("graph_hash").get<std::string>();
      e.meta.checker_id = m.at("checker_id").get<std::string>();
      e.meta.censored = m.at("censored").get<bool>();
      e.meta.solve_seconds = m.at("solve_seconds").get<double>();
      d.examples.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw SchemaViolation(std::string("dataset: ") + e.what());
  }
  return d;
}

}  // namespace evolvegen::predictor
