#include <doctest.h>

#include "hlm/psychometrics.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace hlm;

namespace {

Flags bits(std::initializer_list<int> b) {
  Flags f(static_cast<int>(b.size()));
  int i = 0;
  for (int x : b) f[i++] = x;
  return f;
}

Item item(std::initializer_list<int> q, double s, double g) { return Item{bits(q), s, g}; }

AttributeHierarchy two_by(int k) { return AttributeHierarchy({{0, "A1", k}, {1, "A2", k}}, {{0, 1}}); }

// Product likelihood written out item by item.
double product_likelihood(const ResponseVector& x, const ItemBank& bank, const Flags& alpha) {
  double l = 1.0;
  for (std::size_t j = 0; j < bank.size(); ++j) {
    bool all = true;
    for (int k = 0; k < alpha.size(); ++k) {
      if (bank[j].q_row[k] == 1 && alpha[k] == 0) all = false;
    }
    const double p = all ? 1.0 - bank[j].slip : bank[j].guess;
    l *= x[static_cast<int>(j)] ? p : 1.0 - p;
  }
  return l;
}

}  // namespace

TEST_CASE("eta is the conjunctive indicator") {
  CHECK(eta(item({1, 0, 0, 0}, 0.1, 0.1), MasteryProfile(bits({1, 0, 0, 0}))) == 1);
  CHECK(eta(item({1, 1, 1, 1}, 0.1, 0.1), MasteryProfile(bits({1, 1, 1, 0}))) == 0);
  CHECK(eta(item({1, 1, 1, 0}, 0.1, 0.1), MasteryProfile(bits({1, 1, 1, 1}))) == 1);
  CHECK_THROWS_AS(eta(item({1, 1, 1}, 0.1, 0.1), MasteryProfile(bits({1, 1, 1, 1}))), std::invalid_argument);
}

TEST_CASE("response probability") {
  const Item it = item({1, 0}, 0.1, 0.2);
  CHECK(response_prob(it, MasteryProfile(bits({1, 0}))) == doctest::Approx(0.9));
  CHECK(response_prob(it, MasteryProfile(bits({0, 0}))) == doctest::Approx(0.2));
  const Item exact = item({1, 0}, 0.0, 0.0);
  CHECK(response_prob(exact, MasteryProfile(bits({1, 0}))) == 1.0);
  CHECK(response_prob(exact, MasteryProfile(bits({0, 1}))) == 0.0);
}

TEST_CASE("items are checked") {
  CHECK_THROWS_AS(check_item(item({0, 0}, 0.1, 0.1)), std::invalid_argument);
  CHECK_THROWS_AS(check_item(item({1, 2}, 0.1, 0.1)), std::invalid_argument);
  CHECK_THROWS_AS(check_item(item({1, 0}, 0.6, 0.5)), std::invalid_argument);
  CHECK_THROWS_AS(check_item(item({1, 0}, -0.1, 0.1)), std::invalid_argument);
  CHECK_NOTHROW(check_item(item({1, 0}, 0.0, 0.0)));
}

TEST_CASE("simulated responses") {
  const ItemBank bank{item({1, 0}, 0, 0), item({1, 1}, 0, 0), item({0, 1}, 0, 0)};
  const MasteryProfile p(bits({1, 0}));
  Rng rng(1);
  const ResponseVector x = simulate_responses(bank, p, rng);
  CHECK(x == bits({1, 0, 0}));

  const ItemBank noisy{item({1, 0}, 0.3, 0.3), item({1, 1}, 0.3, 0.3), item({0, 1}, 0.3, 0.3)};
  Rng a(99), b(99);
  CHECK(simulate_responses(noisy, p, a) == simulate_responses(noisy, p, b));
  CHECK_THROWS_AS(simulate_responses({}, p, a), std::invalid_argument);

  const ItemBank one{item({1, 0}, 0.1, 0.2)};
  Rng rng2(2024);
  int correct = 0;
  for (int i = 0; i < 10000; ++i) correct += simulate_responses(one, p, rng2)[0];
  CHECK(std::abs(correct / 10000.0 - 0.9) < 0.01);
}

TEST_CASE("log likelihood") {
  const ItemBank exact{item({1, 0}, 0, 0), item({0, 1}, 0, 0)};
  const MasteryProfile p(bits({1, 0}));
  CHECK(log_likelihood(bits({1, 0}), exact, p) == 0.0);
  CHECK(log_likelihood(bits({1, 1}), exact, p) == doctest::Approx(std::log(1e-12)));

  const ItemBank bank{item({1, 0}, 0.1, 0.2), item({0, 1}, 0.1, 0.2)};
  CHECK(log_likelihood(bits({1, 1}), bank, p) == doctest::Approx(std::log(0.9) + std::log(0.2)));
}

TEST_CASE("MAP estimate") {
  const auto h = two_by(2);
  const StateSpace states = enumerate_states(h);
  // Each item isolates one flag; the bank identifies every state.
  const ItemBank ident{item({1, 0, 0, 0}, 0, 0), item({1, 1, 0, 0}, 0, 0), item({1, 0, 1, 0}, 0, 0),
                       item({1, 1, 1, 1}, 0, 0)};
  for (int k = 0; k < states.size(); ++k) {
    Rng rng(k);
    CHECK(map_estimate(simulate_responses(ident, states.profile(k), rng), ident, states) == k);
  }

  // Every state predicts the same responses.
  const ItemBank blind{item({1, 1, 1, 1}, 0.1, 0.1)};
  CHECK(map_estimate(bits({0}), blind, states) == 0);

  std::vector<double> prior(states.size(), 1.0);
  prior[0] = 0.0;
  CHECK(map_estimate(bits({0}), blind, states, prior) == 1);
}

TEST_CASE("MAP recovery on the three-item bank") {
  const auto h = two_by(2);
  const StateSpace states = enumerate_states(h);
  const ItemBank bank{item({1, 0, 0, 0}, 0.05, 0.05), item({1, 0, 1, 0}, 0.05, 0.05),
                      item({1, 1, 1, 1}, 0.05, 0.05)};
  const int truth = states.index_of({1, 1});
  Rng rng(31337);
  int hits = 0;
  for (int r = 0; r < 500; ++r) {
    const ResponseVector x = simulate_responses(bank, states.profile(truth), rng);
    const int est = map_estimate(x, bank, states);
    int best = 0;
    double best_l = -1.0;
    for (int s = 0; s < states.size(); ++s) {
      const double l = product_likelihood(x, bank, states.profile(s).flags());
      if (l > best_l) {
        best_l = l;
        best = s;
      }
    }
    CHECK(est == best);
    hits += est == truth;
  }
  CHECK(hits / 500.0 > 0.8);
}

TEST_CASE("error channel") {
  Rng rng(5);
  CHECK(error_channel(3, 0.0, 10, rng) == 3);
  CHECK_THROWS_AS(error_channel(0, 0.1, 1, rng), std::invalid_argument);
  CHECK_THROWS_AS(error_channel(0, 0.6, 10, rng), std::invalid_argument);

  const int n = 10000;
  int corrupted = 0;
  std::vector<int> hist(10, 0);
  for (int i = 0; i < n; ++i) {
    const int s = error_channel(4, 0.05, 10, rng);
    REQUIRE(s >= 0);
    REQUIRE(s < 10);
    if (s != 4) {
      ++corrupted;
      ++hist[s];
    }
  }
  CHECK(std::abs(corrupted / double(n) - 0.05) < 0.007);
  CHECK(hist[4] == 0);
  // Replacements spread evenly over the nine other states; chi-square with
  // 8 degrees of freedom, 0.999 quantile 26.12.
  double chi2 = 0.0;
  const double expect = corrupted / 9.0;
  for (int s = 0; s < 10; ++s) {
    if (s != 4) chi2 += (hist[s] - expect) * (hist[s] - expect) / expect;
  }
  CHECK(chi2 < 26.12);
}
