#include "evolvegen/evolve/evolve.hpp"

namespace evolvegen::evolve {

BanditAgent BanditAgent::make(std::vector<std::string> labels, double alpha0, double beta0) {
  BanditAgent a;
  a.arms.assign(labels.size(), BetaArm{alpha0, beta0, 0});
  a.labels = std::move(labels);
  return a;
}

std::size_t thompson_select(const BanditAgent& agent, Rng& rng) {
  return thompson_select(agent, rng, std::vector<bool>(agent.arms.size(), true));
}

std::size_t thompson_select(const BanditAgent& agent, Rng& rng, const std::vector<bool>& allowed) {
  std::size_t best = 0;
  double best_draw = -1;
  for (std::size_t i = 0; i < agent.arms.size(); ++i) {
    double d = rng.beta(agent.arms[i].alpha, agent.arms[i].beta);
    if (allowed.at(i) && d > best_draw) {
      best_draw = d;
      best = i;
    }
  }
  return best;
}

void agent_update(BanditAgent& agent, std::size_t arm, bool improved) {
  BetaArm& a = agent.arms.at(arm);
  (improved ? a.alpha : a.beta) += 1;
  ++a.pulls;
}

std::string_view strategy_name(Strategy s) { return s == Strategy::kMutate ? "mutate" : "generate"; }

}  // namespace evolvegen::evolve
