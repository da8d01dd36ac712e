#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "evolvegen/common/error.hpp"
#include "evolvegen/compile/schedule.hpp"
#include "evolvegen/evolve/evolve.hpp"
#include "evolvegen/miter/miter.hpp"
#include "evolvegen/netlist/aiger.hpp"
#include "evolvegen/netlist/bitblast.hpp"
#include "evolvegen/netlist/static_features.hpp"

namespace evolvegen::evolve {

namespace fs = std::filesystem;

namespace {

// Concurrent writers of the same hash produce identical bytes, so a
// rename over an existing file is harmless.
void write_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << bytes;
    if (!out) throw IoError("short write on " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

Problem build_problem(const graph::ComputationGraph& g, std::size_t node_budget) {
  Problem p;
  p.hash = graph::canonical_hash(g);
  ts::TransitionSystem a = compile::schedule(g, {compile::ScheduleKind::kBasic, 2, node_budget});
  ts::TransitionSystem b = compile::schedule(g, {compile::ScheduleKind::kOptimized, 2, node_budget});
  p.miter = miter::build_miter(a, b);
  p.aig = netlist::bitblast_property(p.miter);
  return p;
}

CorpusStats write_random_corpus(const std::string& dir, std::uint64_t seed, std::size_t count, unsigned max_length,
                                const graph::GenerationConfig& gen, std::size_t node_budget) {
  CorpusStats st;
  for (std::size_t k = 0; k < count; ++k) {
    ++st.generated;
    try {
      Rng rng(derive_seed(seed, k));
      const auto len = static_cast<unsigned>(1 + rng.index(max_length));
      graph::ComputationGraph g = graph::generate_fresh(rng, len, gen);
      Problem p = build_problem(g, node_budget);
      fs::path d = fs::path(dir) / p.hash;
      if (fs::exists(d / "a.aig")) continue;
      fs::create_directories(d);
      write_atomic(d / "graph.json", graph::serialize(g));
      write_atomic(d / "a.aig", netlist::write_aiger(p.aig, netlist::AigerMode::kBinary));
      write_atomic(d / "a.btor2", netlist::write_btor2(p.miter));
      ++st.written;
    } catch (const Error& e) {
      st.failures.push_back("candidate " + std::to_string(k) + ": " + std::string(error_code_name(e.code())));
    }
  }
  return st;
}

PipelineEvaluator::PipelineEvaluator(predictor::GbrtModel model, PipelineOptions options)
    : model_(std::move(model)), options_(std::move(options)) {}

Evaluation PipelineEvaluator::evaluate(const graph::ComputationGraph& g) {
  Evaluation ev;
  ev.draft.graph = g;
  try {
    ev.draft.graph_hash = graph::canonical_hash(g);
    Problem prob = build_problem(g, options_.node_budget);
    const netlist::AigCircuit& aig = prob.aig;
    checker::DynamicRun dyn = checker::dynamic_features(aig, options_.frames, options_.dynamic_budget_s,
                                                        options_.dynamic_budget_propagations);
    if (dyn.result.verdict == checker::Verdict::kUnsafe) {
      ev.failure_reason = "MiterUnsafe";
      return ev;
    }
    predictor::FeatureVector fv = predictor::assemble(netlist::static_features(aig), dyn.features);
    ev.reward = predictor::predict(model_, fv);
    ev.draft.predicted_time_s = ev.reward;
    ev.draft.and_count = aig.num_ands();
    ev.draft.latch_count = aig.num_latches();
    if (!options_.artifact_dir.empty()) {
      fs::path dir = fs::path(options_.artifact_dir) / ev.draft.graph_hash;
      fs::create_directories(dir);
      ArtifactPaths& p = ev.draft.artifacts;
      p.graph_json = (dir / "graph.json").string();
      p.aiger = (dir / "a.aig").string();
      p.btor2 = (dir / "a.btor2").string();
      p.features_json = (dir / "features.json").string();
      write_atomic(p.graph_json, graph::serialize(g));
      write_atomic(p.aiger, netlist::write_aiger(aig, netlist::AigerMode::kBinary));
      write_atomic(p.btor2, netlist::write_btor2(prob.miter));
      write_atomic(p.features_json, predictor::features_to_json(fv));
    }
    ev.success = true;
  } catch (const Error& e) {
    ev.failure_reason = std::string(error_code_name(e.code()));
  } catch (const std::exception& e) {
    ev.failure_reason = std::string("CheckerCrash: ") + e.what();
  }
  return ev;
}

}  // namespace evolvegen::evolve
