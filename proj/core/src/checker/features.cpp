#include <algorithm>
#include <cmath>

#include "evolvegen/checker/checker.hpp"

namespace evolvegen::checker {

std::array<double, DynamicFeatures::kCount> DynamicFeatures::to_array() const {
  return {clauses_mean, clauses_std, clauses_max, clauses_total, clauses_pushed, obligations,
          sat_calls,    frames_reached, frac_sat,  frac_generalize, frac_push};
}

const std::array<std::string_view, DynamicFeatures::kCount>& DynamicFeatures::names() {
  static const std::array<std::string_view, kCount> n{
      "clauses_mean", "clauses_std",    "clauses_max", "clauses_total",   "clauses_pushed", "obligations",
      "sat_calls",    "frames_reached", "frac_sat",    "frac_generalize", "frac_push"};
  return n;
}

DynamicFeatures features_from_stats(const PdrStats& st) {
  DynamicFeatures f;
  const auto& c = st.clauses_generated_per_frame;
  if (!c.empty()) {
    double sum = 0, mx = 0;
    for (auto x : c) {
      sum += static_cast<double>(x);
      mx = std::max(mx, static_cast<double>(x));
    }
    const double mean = sum / static_cast<double>(c.size());
    double var = 0;
    for (auto x : c) var += (static_cast<double>(x) - mean) * (static_cast<double>(x) - mean);
    f.clauses_mean = mean;
    f.clauses_std = std::sqrt(var / static_cast<double>(c.size()));
    f.clauses_max = mx;
    f.clauses_total = sum;
  }
  f.clauses_pushed = static_cast<double>(st.clauses_pushed);
  f.obligations = static_cast<double>(st.proof_obligations);
  f.sat_calls = static_cast<double>(st.sat_calls);
  f.frames_reached = st.frames_opened;
  const double total = static_cast<double>(st.effort_sat + st.effort_generalize + st.effort_push);
  if (total > 0) {
    f.frac_sat = static_cast<double>(st.effort_sat) / total;
    f.frac_generalize = static_cast<double>(st.effort_generalize) / total;
    f.frac_push = static_cast<double>(st.effort_push) / total;
  } else {
    f.frac_sat = 1;
  }
  f.time_sat = st.time_sat;
  f.time_generalize = st.time_generalize;
  f.time_push = st.time_push;
  return f;
}

DynamicRun dynamic_features(const netlist::AigCircuit& aig, unsigned frames, double budget_seconds,
                            std::uint64_t budget_propagations) {
  if (frames == 0) frames = 1;
  DynamicRun run;
  run.result = pdr(aig, {frames, budget_seconds, budget_propagations});
  run.features = features_from_stats(*run.result.pdr_stats);
  return run;
}

}  // namespace evolvegen::checker
