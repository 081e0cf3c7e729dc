#include "hlm/agents.hpp"

#include <string>

namespace hlm {

void check_hyperparams(const Hyperparams& hp) {
  if (!(hp.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(hp.discount > 0.0 && hp.discount <= 1.0)) throw std::invalid_argument("discount must lie in (0, 1]");
  if (!(hp.exploration >= 0.0 && hp.exploration <= 1.0)) {
    throw std::invalid_argument("exploration must lie in [0, 1]");
  }
  if (!(hp.learn_decay > 0.0 && hp.learn_decay <= 1.0)) {
    throw std::invalid_argument("learn_decay must lie in (0, 1]");
  }
  if (!(hp.explore_decay > 0.0 && hp.explore_decay <= 1.0)) {
    throw std::invalid_argument("explore_decay must lie in (0, 1]");
  }
  if (!(hp.init_low <= hp.init_high)) throw std::invalid_argument("init_low must not exceed init_high");
}

QTable init_qtable(int state_count, int material_count, int terminal_state, Rng& rng, double low,
                   double high) {
  QTable q(state_count, material_count);
  for (int s = 0; s < state_count; ++s) {
    for (int a = 0; a < material_count; ++a) q(s, a) = low + (high - low) * uniform01(rng);
  }
  if (terminal_state >= 0 && terminal_state < state_count) q.row(terminal_state).setZero();
  return q;
}

std::vector<int> admissible_materials(const AttributeHierarchy& hierarchy, const StateSpace& states,
                                      const std::vector<LearningMaterial>& materials, int state) {
  std::vector<int> out;
  const Levels& levels = states.levels(state);
  for (const auto& m : materials) {
    if (can_acquire(hierarchy, levels, m.attribute, m.level)) out.push_back(m.id);
  }
  return out;
}

int heuristic_policy(const AttributeHierarchy& hierarchy, const StateSpace& states,
                     const std::vector<LearningMaterial>& materials, int state, Rng& rng) {
  const auto options = admissible_materials(hierarchy, states, materials, state);
  if (options.empty()) {
    throw std::logic_error("no admissible material at state " + format_levels(states.levels(state)));
  }
  return options[uniform_index(rng, options.size())];
}

OracleSolution value_iteration_oracle(const TransitionModel& model, const StateSpace& states,
                                      const OracleOptions& options) {
  OracleSolution sol;
  sol.q = solve_oracle<double>(model, states, options, &sol.residual, &sol.iterations);
  return sol;
}

}  // namespace hlm
