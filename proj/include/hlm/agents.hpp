#pragma once

// Policies over the material action space: tabular Q-learning, the
// admissible-uniform heuristic, and an exact dynamic-programming oracle.

#include "hlm/environment.hpp"
#include "hlm/hierarchy.hpp"
#include "hlm/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hlm {

template <typename Scalar>
using QTableT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using QTable = QTableT<double>;

struct Hyperparams {
  double learning_rate = 0.01;  // beta
  double discount = 0.99;       // gamma
  double exploration = 1.0;     // epsilon
  double learn_decay = 0.999;   // lambda_l
  double explore_decay = 0.99;  // lambda_e
  double init_low = -0.01;      // initial Q-values are uniform on [init_low, init_high]
  double init_high = 0.01;
};

// Throws std::invalid_argument when a field leaves its domain.
void check_hyperparams(const Hyperparams& hp);

// One decay step: beta *= lambda_l, epsilon *= lambda_e.
inline Hyperparams decay(Hyperparams hp) {
  hp.learning_rate *= hp.learn_decay;
  hp.exploration *= hp.explore_decay;
  return hp;
}

// Uniform on [low, high] except the terminal row, which stays zero.
QTable init_qtable(int state_count, int material_count, int terminal_state, Rng& rng,
                   double low = -0.01, double high = 0.01);

// argmax over the row; ties go to the lowest material id.
template <typename Derived>
int greedy_action(const Eigen::MatrixBase<Derived>& q, int state) {
  if (q.cols() == 0) throw std::invalid_argument("empty action set");
  int best = 0;
  for (int a = 1; a < q.cols(); ++a) {
    if (q(state, a) > q(state, best)) best = a;
  }
  return best;
}

// Epsilon-greedy. Always consumes one uniform draw, plus one index draw when
// exploring.
template <typename Derived>
int select_action(const Eigen::MatrixBase<Derived>& q, int state, double epsilon, Rng& rng) {
  if (q.cols() == 0) throw std::invalid_argument("empty action set");
  if (uniform01(rng) < epsilon) {
    return static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(q.cols())));
  }
  return greedy_action(q, state);
}

// Q(s, a) += beta [r + gamma max_a' Q(s', a') - Q(s, a)]; the bootstrap term
// is dropped when s' is terminal.
template <typename Scalar>
void q_update(QTableT<Scalar>& q, int state, int action, Scalar r, int next_state,
              bool next_terminal, Scalar beta, Scalar gamma) {
  const Scalar bootstrap = next_terminal ? Scalar(0) : q.row(next_state).maxCoeff();
  q(state, action) += beta * (r + gamma * bootstrap - q(state, action));
}

// Greedy action per state.
template <typename Derived>
std::vector<int> greedy_policy(const Eigen::MatrixBase<Derived>& q) {
  std::vector<int> out(static_cast<std::size_t>(q.rows()));
  for (int s = 0; s < q.rows(); ++s) out[s] = greedy_action(q, s);
  return out;
}

// Materials whose target flag can be acquired next from `state`.
std::vector<int> admissible_materials(const AttributeHierarchy& hierarchy, const StateSpace& states,
                                      const std::vector<LearningMaterial>& materials, int state);

// Uniform draw among admissible materials. Throws std::logic_error when none is
// admissible.
int heuristic_policy(const AttributeHierarchy& hierarchy, const StateSpace& states,
                     const std::vector<LearningMaterial>& materials, int state, Rng& rng);

// How the oracle treats the -0.1 t term of the reward.
enum class OracleMode {
  Stationary,    // penalty dropped; infinite-horizon discounted value iteration
  TimeIndexed,   // state augmented with t up to the step cap; backward induction
};

struct OracleOptions {
  OracleMode mode = OracleMode::TimeIndexed;
  double discount = 0.99;
  double tolerance = 1e-10;
  int max_iterations = 100000;
  int step_cap = 200;
};

struct OracleSolution {
  // One table per t for TimeIndexed (t = 0..step_cap-1), a single table for
  // Stationary.
  std::vector<QTable> q;
  double residual = 0.0;
  int iterations = 0;

  const QTable& at(int t) const { return q.at(std::min<std::size_t>(t, q.size() - 1)); }
};

class OracleDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Expected reward of one step from each state under one material:
//   (P .* R).rowwise().sum() - 0.1 t
// where R(s, s') is the reward for moving s -> s' at t = 0.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> expected_step_reward(const TransitionModel& model,
                                                              const StateSpace& states, int material) {
  const int n = states.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> r(n, n);
  for (int s = 0; s < n; ++s) {
    for (int x = 0; x < n; ++x) r(s, x) = static_cast<Scalar>(reward(states.mastered(s), states.mastered(x), 0));
  }
  return (model.matrix(material).template cast<Scalar>().cwiseProduct(r)).rowwise().sum();
}

template <typename Scalar>
std::vector<QTableT<Scalar>> solve_oracle(const TransitionModel& model, const StateSpace& states,
                                          const OracleOptions& opt, double* residual_out,
                                          int* iterations_out) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int n = states.size();
  const int actions = model.material_count();
  const Scalar gamma = static_cast<Scalar>(opt.discount);

  std::vector<Vec> immediate;
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> p;
  for (int a = 0; a < actions; ++a) {
    immediate.push_back(expected_step_reward<Scalar>(model, states, a));
    p.push_back(model.matrix(a).template cast<Scalar>());
  }
  auto backup = [&](const Vec& next_value, Scalar penalty) {
    QTableT<Scalar> q(n, actions);
    for (int a = 0; a < actions; ++a) {
      q.col(a) = immediate[a] + gamma * (p[a] * next_value) - Vec::Constant(n, penalty);
    }
    q.row(states.terminal()).setZero();
    return q;
  };
  auto value_of = [&](const QTableT<Scalar>& q) {
    Vec v = q.rowwise().maxCoeff();
    v[states.terminal()] = Scalar(0);
    return v;
  };

  if (opt.mode == OracleMode::TimeIndexed) {
    if (opt.step_cap < 1) throw std::invalid_argument("step cap must be positive");
    std::vector<QTableT<Scalar>> out(static_cast<std::size_t>(opt.step_cap));
    Vec v = Vec::Zero(n);  // value once the cap is reached
    for (int t = opt.step_cap - 1; t >= 0; --t) {
      out[t] = backup(v, static_cast<Scalar>(0.1) * static_cast<Scalar>(t));
      v = value_of(out[t]);
    }
    if (residual_out) *residual_out = 0.0;
    if (iterations_out) *iterations_out = opt.step_cap;
    return out;
  }

  QTableT<Scalar> q = QTableT<Scalar>::Zero(n, actions);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    QTableT<Scalar> next = backup(value_of(q), Scalar(0));
    const double residual = static_cast<double>((next - q).cwiseAbs().maxCoeff());
    q = std::move(next);
    if (residual < opt.tolerance) {
      if (residual_out) *residual_out = residual;
      if (iterations_out) *iterations_out = it;
      return {q};
    }
  }
  throw OracleDivergence("value iteration did not reach tolerance within " +
                         std::to_string(opt.max_iterations) + " iterations");
}

OracleSolution value_iteration_oracle(const TransitionModel& model, const StateSpace& states,
                                      const OracleOptions& options = {});

}  // namespace hlm
