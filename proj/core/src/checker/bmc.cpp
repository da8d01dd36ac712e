#include "encode.hpp"
#include "evolvegen/checker/checker.hpp"

namespace evolvegen::checker {

using namespace detail;

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kSafe: return "safe";
    case Verdict::kUnsafe: return "unsafe";
    case Verdict::kUnknown: return "unknown";
  }
  return "unknown";
}

CheckResult bmc(const AigCircuit& aig, const BmcLimits& limits) {
  const auto t0 = Clock::now();
  CheckResult r;
  BmcStats st;
  sat::Solver s;
  Lit tru = make_true(s);

  std::vector<FrameEncoder> frames;
  std::vector<std::vector<Lit>> inputs;
  std::vector<Lit> init(aig.num_latches());

  auto finish = [&](Verdict v, std::string reason) {
    r.verdict = v;
    r.reason = std::move(reason);
    st.propagations = s.stats().propagations;
    r.bmc_stats = st;
    r.wall_time = seconds_since(t0);
    return r;
  };

  for (unsigned d = 0; d <= limits.max_depth; ++d) {
    frames.emplace_back(aig, s, tru);
    FrameEncoder& f = frames.back();
    inputs.emplace_back();
    for (std::uint32_t i = 0; i < aig.num_inputs; ++i) {
      inputs.back().push_back(s.new_lit());
      f.set_input(i, inputs.back().back());
    }
    for (std::uint32_t i = 0; i < aig.num_latches(); ++i) {
      Lit l;
      if (d == 0) {
        switch (aig.latches[i].init) {
          case netlist::LatchInit::kZero: l = ~tru; break;
          case netlist::LatchInit::kOne: l = tru; break;
          case netlist::LatchInit::kUndefined: l = s.new_lit(); break;
        }
        init[i] = l;
      } else {
        l = frames[d - 1].lit(aig.latches[i].next);
      }
      f.set_latch(i, l);
    }
    Lit bad = f.bad_any();
    st.depth_reached = d;

    sat::Status res;
    for (;;) {
      if (limits.max_seconds > 0) {
        if (seconds_since(t0) > limits.max_seconds) return finish(Verdict::kUnknown, "timeout");
        s.set_propagation_budget(1'000'000);
      }
      ++st.sat_calls;
      res = s.solve({bad});
      if (res != sat::Status::kUnknown) break;
    }
    if (res == sat::Status::kSat) {
      Trace tr;
      for (Lit l : init) tr.initial_latches.push_back(s.model_value(l));
      for (const auto& frame : inputs) {
        std::vector<bool> v;
        for (Lit l : frame) v.push_back(s.model_value(l));
        tr.inputs.push_back(std::move(v));
      }
      r.trace = std::move(tr);
      return finish(Verdict::kUnsafe, "");
    }
    s.add_clause({~bad});
  }
  return finish(Verdict::kUnknown, "bound");
}

bool replay_trace(const AigCircuit& aig, const Trace& trace) {
  if (trace.inputs.empty() || trace.initial_latches.size() != aig.num_latches()) return false;
  std::vector<std::uint64_t> latches;
  for (bool b : trace.initial_latches) latches.push_back(b ? 1 : 0);
  for (std::size_t k = 0; k < trace.inputs.size(); ++k) {
    if (trace.inputs[k].size() != aig.num_inputs) return false;
    std::vector<std::uint64_t> in;
    for (bool b : trace.inputs[k]) in.push_back(b ? 1 : 0);
    auto v = netlist::evaluate_words(aig, in, latches);
    if (k + 1 == trace.inputs.size()) {
      for (AigLit b : aig.bad) {
        if (netlist::lit_word(v, b) & 1) return true;
      }
      return false;
    }
    latches = netlist::next_latch_words(aig, v);
    for (auto& w : latches) w &= 1;
  }
  return false;
}

}  // namespace evolvegen::checker
