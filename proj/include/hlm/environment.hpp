#pragma once

// The learner as a Markov decision process over the restricted state space.
// Actions are learning materials, each aimed at one (attribute, level) flag.

#include "hlm/hierarchy.hpp"
#include "hlm/rng.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace hlm {

struct LearningMaterial {
  int id = 0;
  std::string name;
  int attribute = 0;
  int level = 1;
};

// Throws std::invalid_argument when ids are not dense or a target flag does
// not exist in the hierarchy.
void check_materials(const AttributeHierarchy& hierarchy,
                     const std::vector<LearningMaterial>& materials);

// One row-stochastic matrix per material: probs[a](s, s') = P(s' | s, a).
class TransitionModel {
 public:
  TransitionModel() = default;
  TransitionModel(int state_count, int material_count);
  explicit TransitionModel(std::vector<Eigen::MatrixXd> probs);

  int state_count() const { return state_count_; }
  int material_count() const { return static_cast<int>(probs_.size()); }

  const Eigen::MatrixXd& matrix(int material) const { return probs_.at(material); }
  Eigen::MatrixXd& matrix(int material) { return probs_.at(material); }
  double operator()(int state, int material, int next) const {
    return probs_.at(material)(state, next);
  }

 private:
  int state_count_ = 0;
  std::vector<Eigen::MatrixXd> probs_;
};

struct TransitionRecord {
  Levels from;
  int material = 0;
  Levels to;
  double probability = 0.0;
};

// Builds dense matrices from sparse improvement records; whatever mass is
// left in a row becomes the self-transition. Terminal rows are identity.
// Throws std::invalid_argument on unknown states or materials, duplicate
// records, or rows whose listed mass exceeds one.
TransitionModel model_from_records(const StateSpace& states, int material_count,
                                   const std::vector<TransitionRecord>& records);

// Probability that `material` sets its own target flag from `state`.
double success_probability(const TransitionModel& model, const StateSpace& states,
                           const LearningMaterial& material, int state);

struct Violation {
  std::string kind;
  int state = -1;
  int material = -1;
  std::string detail;
};

std::string describe(const Violation& v, const StateSpace& states);

// Empty iff every row is a distribution, mastery never decreases, at most one
// flag is gained per step, success probability is non-decreasing across
// dominating states, every hierarchy-admissible material can succeed and no
// non-terminal state is a dead end.
std::vector<Violation> validate_transition_model(const TransitionModel& model,
                                                 const AttributeHierarchy& hierarchy,
                                                 const StateSpace& states,
                                                 const std::vector<LearningMaterial>& materials);

// Samples the successor; consumes exactly one uniform draw.
int step(const TransitionModel& model, const StateSpace& states, int state, int material, Rng& rng);

struct StepOutcome {
  int next_state = 0;
  double reward = 0.0;
  bool terminal = false;
  bool truncated = false;
  int step_index = 0;
};

// Reward in tenths so that episode totals are exact.
//   gain:     20 (n_next - n_prev) - t
//   no gain: -10 (1 + n_prev - n_next) - t
inline long long reward_tenths(int n_prev, int n_next, int t) {
  if (n_next > n_prev) return 20LL * (n_next - n_prev) - t;
  return -10LL * (1 + n_prev - n_next) - t;
}

inline double reward(int n_prev, int n_next, int t) {
  return static_cast<double>(reward_tenths(n_prev, n_next, t)) / 10.0;
}

// Mean of a geometric waiting time. Throws on p outside (0, 1].
double expected_learning_time(double success_prob);
double expected_learning_time(const std::vector<double>& path);

}  // namespace hlm
