#include <doctest.h>

#include "hlm/config.hpp"
#include "hlm/environment.hpp"

#include <cmath>

using namespace hlm;

namespace {

const ConfigParts& bundled() {
  static const ConfigParts parts = read_config_file(HLM_BUNDLED_CONFIG);
  return parts;
}

struct Setup {
  AttributeHierarchy h;
  StateSpace states;
  TransitionModel model;
};

Setup bundled_setup() {
  const auto& p = bundled();
  AttributeHierarchy h(p.attributes, p.edges, p.strict);
  StateSpace s = enumerate_states(h);
  TransitionModel m = model_from_records(s, static_cast<int>(p.materials.size()), p.transitions);
  return {h, s, m};
}

bool has_kind(const std::vector<Violation>& v, const std::string& kind) {
  for (const auto& x : v) {
    if (x.kind == kind) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("bundled transition model is clean") {
  const Setup s = bundled_setup();
  CHECK(validate_transition_model(s.model, s.h, s.states, bundled().materials).empty());
}

TEST_CASE("retrogress and broken rows are reported") {
  const Setup s = bundled_setup();
  std::vector<Eigen::MatrixXd> probs;
  for (int a = 0; a < s.model.material_count(); ++a) probs.push_back(s.model.matrix(a));

  SUBCASE("retrogress") {
    const int from = s.states.index_of({1, 1});
    probs[3](from, s.states.index_of({1, 0})) = 0.1;
    probs[3](from, from) -= 0.1;
    const auto v = validate_transition_model(TransitionModel(probs), s.h, s.states, bundled().materials);
    REQUIRE(has_kind(v, "retrogress"));
    CHECK(describe(v.front(), s.states).find("1:1") != std::string::npos);
  }
  SUBCASE("row summing to 0.98") {
    const int from = s.states.index_of({2, 0});
    probs[0](from, from) -= 0.02;
    CHECK(has_kind(validate_transition_model(TransitionModel(probs), s.h, s.states, bundled().materials),
                   "not a distribution"));
  }
  SUBCASE("two flags at once") {
    const int from = s.states.index_of({1, 0});
    probs[1](from, s.states.index_of({2, 1})) = 0.1;
    probs[1](from, from) -= 0.1;
    CHECK(has_kind(validate_transition_model(TransitionModel(probs), s.h, s.states, bundled().materials),
                   "multi-step"));
  }
  SUBCASE("blocked admissible material") {
    const int from = s.states.index_of({0, 0});
    probs[0](from, s.states.index_of({1, 0})) = 0.0;
    probs[0](from, from) = 1.0;
    const auto v = validate_transition_model(TransitionModel(probs), s.h, s.states, bundled().materials);
    CHECK(has_kind(v, "blocked material"));
    CHECK(has_kind(v, "dead end"));
  }
  SUBCASE("success falls as more is mastered") {
    const int lo = s.states.index_of({2, 0});
    const int hi = s.states.index_of({2, 1});
    const int lo_to = s.states.index_of({3, 0});
    const int hi_to = s.states.index_of({3, 1});
    probs[2](hi, hi_to) = probs[2](lo, lo_to) - 0.2;
    probs[2](hi, hi) = 1.0 - probs[2](hi, hi_to);
    CHECK(has_kind(validate_transition_model(TransitionModel(probs), s.h, s.states, bundled().materials),
                   "monotonicity"));
  }
}

TEST_CASE("model_from_records rejects malformed records") {
  const Setup s = bundled_setup();
  CHECK_THROWS_AS(model_from_records(s.states, 6, {{{0, 1}, 0, {1, 0}, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(model_from_records(s.states, 6, {{{0, 0}, 0, {1, 0}, 0.5}, {{0, 0}, 0, {1, 0}, 0.4}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(model_from_records(s.states, 6, {{{0, 0}, 0, {1, 0}, 1.5}}), std::invalid_argument);
  CHECK_THROWS_AS(model_from_records(s.states, 6, {{{0, 0}, 9, {1, 0}, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(model_from_records(s.states, 6, {{{3, 3}, 0, {3, 3}, 0.5}}), std::invalid_argument);
}

TEST_CASE("step") {
  const Setup s = bundled_setup();
  Rng rng(11);

  SUBCASE("certain success") {
    const TransitionModel m = model_from_records(s.states, 6, {{{0, 0}, 0, {1, 0}, 1.0}});
    for (int i = 0; i < 100; ++i) CHECK(step(m, s.states, 0, 0, rng) == s.states.index_of({1, 0}));
  }
  SUBCASE("inadmissible material never moves") {
    const int from = s.states.index_of({1, 0});
    for (int i = 0; i < 1000; ++i) CHECK(step(s.model, s.states, from, 5, rng) == from);
  }
  SUBCASE("A2 beginner from 1:0") {
    const int from = s.states.index_of({1, 0});
    const int to = s.states.index_of({1, 1});
    int hits = 0;
    for (int i = 0; i < 10000; ++i) hits += step(s.model, s.states, from, 3, rng) == to;
    CHECK(std::abs(hits / 10000.0 - 0.6) < 0.015);
  }
  SUBCASE("terminal state") {
    CHECK_THROWS_AS(step(s.model, s.states, s.states.terminal(), 0, rng), std::logic_error);
  }
}

TEST_CASE("reward branches") {
  CHECK(reward(2, 3, 0) == doctest::Approx(2.0));
  CHECK(reward(2, 2, 4) == doctest::Approx(-1.4));
  CHECK(reward(2, 3, 10) == doctest::Approx(1.0));
  CHECK(reward_tenths(2, 2, 4) == -14);
}

TEST_CASE("expected learning time") {
  CHECK(expected_learning_time(0.6) == doctest::Approx(1.6667).epsilon(1e-4));
  CHECK(expected_learning_time({0.55, 0.9}) == doctest::Approx(2.9293).epsilon(1e-4));
  CHECK(expected_learning_time({0.6, 0.6}) == doctest::Approx(3.3333).epsilon(1e-4));
  CHECK_THROWS_AS(expected_learning_time(0.0), std::invalid_argument);
}
