#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "evolvegen/checker/checker.hpp"
#include "evolvegen/common/error.hpp"
#include "evolvegen/compile/schedule.hpp"
#include "evolvegen/evolve/evolve.hpp"
#include "evolvegen/miter/miter.hpp"
#include "evolvegen/netlist/aiger.hpp"
#include "evolvegen/netlist/bitblast.hpp"
#include "evolvegen/netlist/static_features.hpp"
#include "evolvegen/predictor/predictor.hpp"

extern char** environ;

namespace evolvegen::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw IoError("cannot write " + path.string());
}

void print_human(const json& j, const std::string& indent = "") {
  for (const auto& [k, v] : j.items()) {
    if (v.is_object()) {
      std::cout << indent << k << ":\n";
      print_human(v, indent + "  ");
    } else if (v.is_array() && !v.empty() && v.front().is_object()) {
      std::cout << indent << k << ":\n";
      for (const json& row : v) {
        std::cout << indent << " ";
        for (const auto& [rk, rv] : row.items()) std::cout << " " << rk << "=" << (rv.is_string() ? rv.get<std::string>() : rv.dump());
        std::cout << "\n";
      }
    } else {
      std::cout << indent << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    }
  }
}

struct Context {
  RunConfig cfg;
  bool human = false;
  std::vector<std::pair<std::string, std::string>> overrides;

  void emit(const json& j) const {
    if (human) {
      print_human(j);
    } else {
      std::cout << j.dump(2) << "\n";
    }
  }

  bool info() const { return cfg.str("log_level") == "info" || cfg.str("log_level") == "debug"; }
};

compile::ScheduleStrategy strategy_of(const std::string& name, const Context& ctx) {
  auto k = compile::parse_schedule_kind(name);
  if (!k) throw ConfigError("unknown strategy " + name);
  return {*k, 2, ctx.cfg.uint("node_budget")};
}

netlist::AigCircuit load_aig(const std::string& path) { return netlist::read_aiger(read_file(path)); }

predictor::GbrtModel load_model(const Context& ctx) {
  const std::string path = ctx.cfg.str("model");
  if (path.empty()) throw ConfigError("a trained model is required (--model or \"model\" in the config)");
  return predictor::model_from_json(read_file(path));
}

json check_to_json(const checker::CheckResult& r) {
  json j = {{"verdict", checker::verdict_name(r.verdict)}, {"reason", r.reason}, {"wall_time_s", r.wall_time}};
  if (r.verdict == checker::Verdict::kSafe) j["proof_frames"] = r.proof_frames;
  if (r.trace) j["trace_length"] = r.trace->length();
  return j;
}

// Runs the named engine on an AIGER problem: internal PDR, BMC, or an adapter.
json run_engine(const Context& ctx, const std::string& engine, const std::string& problem, double timeout_s) {
  if (engine == "internal") {
    json j = check_to_json(checker::pdr(load_aig(problem), {1000, timeout_s, 0}));
    j["engine"] = engine;
    return j;
  }
  if (engine == "bmc") {
    json j = check_to_json(checker::bmc(load_aig(problem), {static_cast<unsigned>(ctx.cfg.uint("frames")), timeout_s}));
    j["engine"] = engine;
    return j;
  }
  checker::ExternalAdapter a = ctx.cfg.adapter(engine);
  std::string path = problem;
  if (a.format == "btor2") path = fs::path(problem).replace_extension(".btor2").string();
  checker::ExternalResult r = checker::run_external(a, path, timeout_s, path + "." + a.name + ".log");
  return {{"engine", engine},
          {"verdict", checker::verdict_name(r.verdict)},
          {"reason", r.reason},
          {"wall_time_s", r.wall_time},
          {"exit_status", r.exit_status}};
}

graph::ComputationGraph load_graph(const std::string& path) { return graph::deserialize(read_file(path)); }

void setup(CLI::App& app, Context& ctx) {
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--human", ctx.human, "Readable text instead of JSON");
  app.add_option_function<std::string>(
      "--config", [&](const std::string& p) { ctx.cfg.merge_file(p); }, "JSON config document");
  auto over = [&](const std::string& flag, const std::string& key, const std::string& help) {
    app.add_option_function<std::string>(
        flag, [&ctx, key](const std::string& v) { ctx.overrides.emplace_back(key, v); }, help);
  };
  over("--seed", "seed", "Random seed");
  over("--workers", "workers", "Parallel evaluations");
  over("--timeout", "timeout_s", "Checker timeout in seconds");
  over("--out", "out", "Output file or directory");
  over("--model", "model", "Trained predictor model");
  over("--log-level", "log_level", "warn | info");
}

}  // namespace

int main_impl(int argc, char** argv) {
  Context ctx;
  CLI::App app{"Equivalence-checking benchmark generator"};
  app.name("evolvegen");
  setup(app, ctx);

  // generate
  unsigned length = 10;
  auto* gen = app.add_subcommand("generate", "Emit one fresh graph as JSON");
  gen->add_option("--length", length, "Construction actions")->check(CLI::Range(1u, 40u));

  // compile / miter
  std::string graph_path, graph_b_path, strategy = "basic", strategy_a = "basic", strategy_b = "optimized";
  auto* comp = app.add_subcommand("compile", "Schedule a graph and write AIGER, BTOR2 and HLS source");
  comp->add_option("--graph", graph_path)->required();
  comp->add_option("--strategy", strategy, "basic | optimized");
  auto* mit = app.add_subcommand("miter", "Write the equivalence problem for two schedules");
  mit->add_option("--graph", graph_path)->required();
  mit->add_option("--graph-b", graph_b_path, "Second graph (default: the same graph)");
  mit->add_option("--a-strategy", strategy_a);
  mit->add_option("--b-strategy", strategy_b);

  // check / features
  std::string problem, engine = "internal";
  unsigned frames = 5;
  double budget = 10;
  auto* chk = app.add_subcommand("check", "Model check an AIGER problem");
  chk->add_option("problem", problem)->required();
  chk->add_option("--engine", engine, "internal | bmc | adapter name");
  auto* feat = app.add_subcommand("features", "Static and dynamic feature vector of a problem");
  feat->add_option("problem", problem)->required();
  feat->add_option("--frames", frames);
  feat->add_option("--budget", budget, "Dynamic run budget in seconds");

  // corpus / dataset / train
  std::size_t count = 300;
  unsigned max_length = 8;
  std::string corpus, dataset_path;
  auto* corp = app.add_subcommand("corpus", "Write miter problems for fresh random graphs");
  corp->add_option("--count", count);
  corp->add_option("--max-length", max_length)->check(CLI::Range(1u, 40u));
  auto* ds = app.add_subcommand("dataset", "Label a corpus of problems");
  ds->add_option("corpus", corpus)->required();
  auto* tr = app.add_subcommand("train", "Fit the runtime predictor");
  predictor::GbrtParams params;
  unsigned train_tenths = 7;
  tr->add_option("dataset", dataset_path)->required();
  tr->add_option("--rounds", params.rounds);
  tr->add_option("--depth", params.max_depth);
  tr->add_option("--learning-rate", params.learning_rate);
  tr->add_option("--min-leaf", params.min_leaf);
  tr->add_option("--train-tenths", train_tenths, "Split; 10 trains on everything")->check(CLI::Range(1u, 10u));

  // evolve / baseline / recheck / report
  std::string resume_dir, pool_dir;
  auto* evo = app.add_subcommand("evolve", "Run the two-agent generation loop");
  evo->add_option("--resume", resume_dir, "Continue the run in this directory");
  std::size_t candidates = 0;
  auto* base = app.add_subcommand("baseline", "Random generation with the same evaluator");
  base->add_option("--candidates", candidates)->required();
  auto* rec = app.add_subcommand("recheck", "Measure real checker times for a pool");
  rec->add_option("pool", pool_dir)->required();
  rec->add_option("--engine", engine, "internal | adapter name");
  auto* rep = app.add_subcommand("report", "QR table for a pool");
  rep->add_option("pool", pool_dir)->required();

  try {
    ctx.cfg.merge_env(environ);
    app.parse(argc, argv);
    for (const auto& [k, v] : ctx.overrides) ctx.cfg.set(k, v);
    // Flags are applied after the config file whatever their position.
    if (rec->parsed() && !app.get_option("--timeout")->count()) {
      ctx.cfg.set("timeout_s", ctx.cfg.get("recheck_timeout_s").dump());
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "error: ConfigError: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const std::string out = ctx.cfg.str("out");
    const double timeout_s = ctx.cfg.real("timeout_s");
    if (gen->parsed()) {
      Rng rng(ctx.cfg.uint("seed"));
      graph::ComputationGraph g = graph::generate_fresh(rng, length, ctx.cfg.generation());
      const std::string text = graph::serialize(g);
      if (out.empty()) {
        std::cout << text << "\n";
      } else {
        write_file(out, text);
        ctx.emit({{"graph", out}, {"hash", graph::canonical_hash(g)}, {"nodes", g.nodes.size()}});
      }
    } else if (comp->parsed()) {
      if (out.empty()) throw ConfigError("compile needs --out");
      graph::ComputationGraph g = load_graph(graph_path);
      compile::ScheduleStrategy s = strategy_of(strategy, ctx);
      ts::TransitionSystem t = compile::schedule(g, s);
      netlist::AigCircuit aig = netlist::bitblast(t);
      write_file(fs::path(out) / "design.aig", netlist::write_aiger(aig, netlist::AigerMode::kBinary));
      write_file(fs::path(out) / "design.btor2", netlist::write_btor2(t));
      write_file(fs::path(out) / "design.cpp", compile::emit_hls_source(g, s));
      ctx.emit({{"strategy", compile::schedule_kind_name(s.kind)},
                {"steps", compile::schedule_steps(g, s)},
                {"and_count", aig.num_ands()},
                {"latch_count", aig.num_latches()},
                {"out", out}});
    } else if (mit->parsed()) {
      if (out.empty()) throw ConfigError("miter needs --out");
      graph::ComputationGraph ga = load_graph(graph_path);
      graph::ComputationGraph gb = graph_b_path.empty() ? ga : load_graph(graph_b_path);
      ts::TransitionSystem m = miter::build_miter(compile::schedule(ga, strategy_of(strategy_a, ctx)),
                                                  compile::schedule(gb, strategy_of(strategy_b, ctx)));
      netlist::AigCircuit aig = netlist::bitblast_property(m);
      write_file(fs::path(out) / "a.aig", netlist::write_aiger(aig, netlist::AigerMode::kBinary));
      write_file(fs::path(out) / "a.btor2", netlist::write_btor2(m));
      ctx.emit({{"aiger", (fs::path(out) / "a.aig").string()},
                {"btor2", (fs::path(out) / "a.btor2").string()},
                {"and_count", aig.num_ands()},
                {"latch_count", aig.num_latches()},
                {"inputs", aig.num_inputs}});
    } else if (chk->parsed()) {
      ctx.emit(run_engine(ctx, engine, problem, timeout_s));
    } else if (feat->parsed()) {
      netlist::AigCircuit aig = load_aig(problem);
      checker::DynamicRun d =
          checker::dynamic_features(aig, frames, budget, ctx.cfg.uint("dynamic_budget_propagations"));
      json j = json::parse(predictor::features_to_json(predictor::assemble(netlist::static_features(aig), d.features)));
      ctx.emit({{"features", j}, {"verdict", checker::verdict_name(d.result.verdict)}, {"reason", d.result.reason}});
    } else if (corp->parsed()) {
      if (out.empty()) throw ConfigError("corpus needs --out");
      evolve::CorpusStats st = evolve::write_random_corpus(out, ctx.cfg.uint("seed"), count, max_length,
                                                           ctx.cfg.generation(), ctx.cfg.uint("node_budget"));
      ctx.emit({{"generated", st.generated}, {"written", st.written}, {"failures", st.failures}, {"out", out}});
    } else if (ds->parsed()) {
      predictor::DatasetOptions o;
      o.checker_id = ctx.cfg.str("checker");
      if (o.checker_id != "internal") o.adapter = ctx.cfg.adapter(o.checker_id);
      o.timeout_s = timeout_s;
      o.max_frames = static_cast<unsigned>(ctx.cfg.uint("frames"));
      o.max_label_s = ctx.cfg.real("max_label_s");
      o.dynamic_budget_s = ctx.cfg.real("dynamic_budget_s");
      o.dynamic_budget_propagations = ctx.cfg.uint("dynamic_budget_propagations");
      predictor::Dataset d = predictor::build_dataset(corpus, o);
      for (const std::string& w : d.provenance.warnings) std::cerr << "warning: " << w << "\n";
      if (!out.empty()) write_file(out, predictor::dataset_to_json(d));
      ctx.emit({{"instances_seen", d.provenance.instances_seen},
                {"examples", d.examples.size()},
                {"excluded_frames", d.provenance.excluded_frames},
                {"excluded_time", d.provenance.excluded_time},
                {"failures", d.provenance.failures},
                {"out", out}});
    } else if (tr->parsed()) {
      if (out.empty()) throw ConfigError("train needs --out");
      predictor::Dataset d = predictor::dataset_from_json(read_file(dataset_path));
      std::vector<predictor::LabeledExample> train_set, holdout;
      predictor::split_dataset(d.examples, train_tenths, train_set, holdout);
      if (train_set.empty()) throw DegenerateData("dataset has no training examples");
      predictor::GbrtModel m = predictor::train(train_set, params);
      m.checker_id = d.provenance.options.checker_id;
      write_file(out, predictor::model_to_json(m));
      json j = {{"model", out}, {"train", train_set.size()}, {"holdout", holdout.size()}, {"degenerate", m.degenerate}};
      try {
        j["holdout_r2"] = predictor::evaluate_r2(m, holdout);
      } catch (const DegenerateData&) {
        j["holdout_r2"] = nullptr;
      }
      ctx.emit(j);
    } else if (evo->parsed() || base->parsed()) {
      if (!resume_dir.empty()) ctx.cfg.set("out", resume_dir);
      evolve::EvolveConfig ec = ctx.cfg.evolve_config();
      if (!resume_dir.empty()) ec.run_dir = resume_dir;
      predictor::GbrtModel model = load_model(ctx);
      if (model.checker_id != ec.checker) {
        throw ConfigError("model was trained for checker '" + model.checker_id + "', run selects '" + ec.checker + "'");
      }
      evolve::PipelineOptions po;
      po.node_budget = ec.node_budget;
      po.frames = ec.frames;
      po.dynamic_budget_s = ec.dynamic_budget_s;
      po.dynamic_budget_propagations = ctx.cfg.uint("dynamic_budget_propagations");
      if (!ec.run_dir.empty()) po.artifact_dir = (fs::path(ec.run_dir) / "artifacts").string();
      evolve::PipelineEvaluator evaluator(model, po);
      if (base->parsed()) {
        evolve::BaselineResult b = evolve::random_baseline(ec, evaluator, candidates);
        json j = {{"candidates", b.candidates}, {"successes", b.successes}, {"pool_size", b.pool.size()}};
        j["mean_predicted_s"] = b.pool.empty() ? 0.0 : evolve::average_pool_performance(b.pool);
        j["mean_qr"] = evolve::mean_qr(b.pool);
        ctx.emit(j);
      } else {
        if (ec.run_dir.empty()) throw ConfigError("evolve needs --out or --resume");
        if (ctx.info()) ec.observer = [](const evolve::AdmissionEvent& e) { std::cerr << evolve::event_to_json(e) << "\n"; };
        evolve::RunState st = resume_dir.empty() ? evolve::run(ec, evaluator) : evolve::resume(ec, evaluator);
        ctx.emit({{"run_dir", ec.run_dir},
                  {"pool_size", st.pool.size()},
                  {"loop_iterations", st.loop_iterations},
                  {"candidates_evaluated", st.candidates_evaluated},
                  {"mean_predicted_s", st.pool.empty() ? 0.0 : evolve::average_pool_performance(st.pool)},
                  {"mean_qr", evolve::mean_qr(st.pool)}});
      }
    } else if (rec->parsed()) {
      const fs::path pool_file = fs::path(pool_dir) / "pool.json";
      evolve::Pool pool = evolve::pool_from_json(read_file(pool_file.string()));
      json rows = json::array();
      for (evolve::PoolRecord& r : pool.records) {
        json res = run_engine(ctx, engine, r.artifacts.aiger, timeout_s);
        double t = res["wall_time_s"].get<double>();
        if (res["reason"] == "timeout") t = timeout_s;
        r.measured_time_s = t;
        rows.push_back({{"hash", r.graph_hash}, {"verdict", res["verdict"]}, {"measured_time_s", t}, {"qr", r.qr()}});
      }
      write_file(pool_file, evolve::pool_to_json(pool));
      ctx.emit({{"engine", engine}, {"records", rows}});
    } else if (rep->parsed()) {
      evolve::Pool pool = evolve::pool_from_json(read_file((fs::path(pool_dir) / "pool.json").string()));
      json rows = json::array();
      double sum_t = 0;
      for (const evolve::PoolRecord& r : pool.records) {
        const double t = r.measured_time_s.value_or(r.predicted_time_s);
        sum_t += t;
        rows.push_back({{"hash", r.graph_hash.substr(0, 12)},
                        {"time_s", t},
                        {"time_kind", r.measured_time_s ? "measured" : "predicted"},
                        {"and_count", r.and_count},
                        {"latch_count", r.latch_count},
                        {"qr", r.qr()}});
      }
      ctx.emit({{"records", rows},
                {"pool_size", pool.size()},
                {"mean_time_s", pool.empty() ? 0.0 : sum_t / static_cast<double>(pool.size())},
                {"mean_qr", evolve::mean_qr(pool)}});
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: ConfigError: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

}  // namespace evolvegen::cli

int main(int argc, char** argv) { return evolvegen::cli::main_impl(argc, argv); }
