#include <doctest.h>

#include "hlm/agents.hpp"
#include "hlm/config.hpp"

#include <cmath>

using namespace hlm;

namespace {

Experiment bundled() {
  static const Experiment exp = load_experiment(HLM_BUNDLED_CONFIG);
  return exp;
}

// One attribute with K levels and one material per level, all succeeding
// with probability p.
struct Chain {
  AttributeHierarchy h;
  StateSpace states;
  TransitionModel model;
};

Chain chain(int k, double p) {
  AttributeHierarchy h({{0, "A", k}}, {});
  StateSpace s = enumerate_states(h);
  std::vector<TransitionRecord> recs;
  for (int l = 0; l < k; ++l) recs.push_back({{l}, l, {l + 1}, p});
  TransitionModel m = model_from_records(s, k, recs);
  return {h, s, m};
}

}  // namespace

TEST_CASE("epsilon-greedy selection") {
  QTable q(1, 6);
  q << 1.0, 2.0, 0.5, 0.1, 0.2, 0.3;
  Rng rng(3);
  CHECK(select_action(q, 0, 0.0, rng) == 1);

  QTable flat = QTable::Constant(1, 6, 0.25);
  CHECK(select_action(flat, 0, 0.0, rng) == 0);

  std::vector<int> hist(6, 0);
  for (int i = 0; i < 10000; ++i) ++hist[select_action(q, 0, 1.0, rng)];
  for (int c : hist) CHECK(std::abs(c / 10000.0 - 1.0 / 6.0) < 0.01);
}

TEST_CASE("Q update") {
  QTable q = QTable::Zero(2, 1);
  q_update(q, 0, 0, 2.0, 1, false, 1.0, 0.99);
  CHECK(q(0, 0) == doctest::Approx(2.0));

  QTable same = QTable::Constant(2, 1, 0.7);
  q_update(same, 0, 0, 5.0, 1, false, 0.0, 0.99);
  CHECK(same(0, 0) == 0.7);

  QTable h(2, 1);
  h << 1.0, 2.0;
  q_update(h, 0, 0, 1.0, 1, false, 0.5, 0.99);
  CHECK(h(0, 0) == doctest::Approx(1.99));

  QTable t(2, 1);
  t << 1.0, 2.0;
  q_update(t, 0, 0, 1.0, 1, true, 0.5, 0.99);
  CHECK(t(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("hyperparameter decay") {
  Hyperparams hp;
  for (int i = 0; i < 5000; ++i) hp = decay(hp);
  CHECK(hp.exploration == doctest::Approx(1.50e-22).epsilon(0.01));
  CHECK(hp.learning_rate / 0.01 == doctest::Approx(0.0067).epsilon(0.01));

  Hyperparams fixed;
  fixed.learn_decay = 1.0;
  fixed.explore_decay = 1.0;
  const Hyperparams after = decay(fixed);
  CHECK(after.learning_rate == fixed.learning_rate);
  CHECK(after.exploration == fixed.exploration);

  Hyperparams bad;
  bad.discount = 1.5;
  CHECK_THROWS_AS(check_hyperparams(bad), std::invalid_argument);
}

TEST_CASE("Q-table initialisation") {
  Rng rng(8);
  const QTable q = init_qtable(10, 6, 9, rng);
  CHECK(q.row(9).isZero());
  CHECK(q.topRows(9).cwiseAbs().maxCoeff() <= 0.01);
  CHECK(q.topRows(9).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("heuristic draws among admissible materials") {
  const Experiment exp = bundled();
  const auto& e = exp.env;
  CHECK(admissible_materials(e.hierarchy, e.states, e.materials, e.states.index_of({1, 0})) ==
        std::vector<int>{1, 3});
  CHECK(admissible_materials(e.hierarchy, e.states, e.materials, 0) == std::vector<int>{0});
  CHECK(admissible_materials(e.hierarchy, e.states, e.materials, e.states.index_of({3, 2})) ==
        std::vector<int>{5});

  Rng rng(4);
  int first = 0;
  for (int i = 0; i < 4000; ++i) {
    const int a = heuristic_policy(e.hierarchy, e.states, e.materials, e.states.index_of({1, 0}), rng);
    REQUIRE((a == 1 || a == 3));
    first += a == 1;
  }
  CHECK(std::abs(first / 4000.0 - 0.5) < 0.03);
  for (int i = 0; i < 50; ++i) CHECK(heuristic_policy(e.hierarchy, e.states, e.materials, 0, rng) == 0);
  CHECK_THROWS_AS(heuristic_policy(e.hierarchy, e.states, e.materials, e.states.terminal(), rng),
                  std::logic_error);
}

TEST_CASE("oracle on closed-form chains") {
  const Chain two = chain(1, 1.0);
  OracleOptions stationary;
  stationary.mode = OracleMode::Stationary;
  const OracleSolution a = value_iteration_oracle(two.model, two.states, stationary);
  CHECK(a.at(0)(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(a.at(0).row(1).isZero());

  OracleOptions timed;
  timed.step_cap = 5;
  const OracleSolution b = value_iteration_oracle(two.model, two.states, timed);
  REQUIRE(b.q.size() == 5);
  for (int t = 0; t < 5; ++t) CHECK(b.at(t)(0, 0) == doctest::Approx(2.0 - 0.1 * t));

  // Geometric series: V = (p r_gain - (1 - p)) / (1 - gamma (1 - p)) per level.
  const double p = 0.4, g = 0.99;
  const Chain three = chain(2, p);
  const OracleSolution c = value_iteration_oracle(three.model, three.states, stationary);
  const double v1 = (2.0 * p - (1.0 - p)) / (1.0 - g * (1.0 - p));
  const double v0 = (p * (2.0 + g * v1) - (1.0 - p)) / (1.0 - g * (1.0 - p));
  CHECK(std::abs(c.at(0)(1, 1) - v1) < 1e-8);
  CHECK(std::abs(c.at(0)(0, 0) - v0) < 1e-8);
  CHECK(greedy_action(c.at(0), 0) == 0);
  CHECK(greedy_action(c.at(0), 1) == 1);
}

TEST_CASE("oracle prefers A1 intermediate at 1:0 on the bundled model") {
  const Experiment exp = bundled();
  const int s = exp.env.states.index_of({1, 0});
  OracleOptions stationary;
  stationary.mode = OracleMode::Stationary;
  CHECK(greedy_action(value_iteration_oracle(exp.env.model, exp.env.states, stationary).at(0), s) == 1);
  CHECK(greedy_action(value_iteration_oracle(exp.env.model, exp.env.states).at(0), s) == 1);
}

TEST_CASE("oracle works in single precision too") {
  const Chain three = chain(2, 0.5);
  OracleOptions opt;
  opt.mode = OracleMode::Stationary;
  opt.tolerance = 1e-5;
  const auto qf = solve_oracle<float>(three.model, three.states, opt, nullptr, nullptr);
  const auto qd = value_iteration_oracle(three.model, three.states, opt);
  CHECK(std::abs(qf.front()(0, 0) - qd.at(0)(0, 0)) < 1e-3);
}
