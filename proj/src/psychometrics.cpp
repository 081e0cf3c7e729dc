#include "hlm/psychometrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hlm {

void check_item(const Item& item) {
  const Flags& q = item.q_row;
  if (q.size() == 0 || (q.array() != 0 && q.array() != 1).any()) {
    throw std::invalid_argument("item q-row must be a non-empty binary vector");
  }
  if (q.sum() == 0) {
    throw std::invalid_argument("item q-row must require at least one flag");
  }
  if (!(item.slip >= 0.0 && item.slip < 1.0) || !(item.guess >= 0.0 && item.guess < 1.0)) {
    throw std::invalid_argument("slip and guess must lie in [0, 1)");
  }
  if (!(item.guess < 1.0 - item.slip)) {
    throw std::invalid_argument("guess must be below 1 - slip");
  }
}

QMatrix q_matrix(const ItemBank& bank) {
  if (bank.empty()) return {};
  QMatrix q(static_cast<Eigen::Index>(bank.size()), bank.front().q_row.size());
  for (std::size_t j = 0; j < bank.size(); ++j) {
    if (bank[j].q_row.size() != q.cols()) {
      throw std::invalid_argument("q-rows have inconsistent lengths");
    }
    q.row(static_cast<Eigen::Index>(j)) = bank[j].q_row.transpose();
  }
  return q;
}

int eta(const Item& item, const MasteryProfile& profile) {
  if (item.q_row.size() != profile.flags().size()) {
    throw std::invalid_argument("q-row has " + std::to_string(item.q_row.size()) +
                                " entries, profile has " + std::to_string(profile.size()));
  }
  return (item.q_row.array() <= profile.flags().array()).all() ? 1 : 0;
}

double response_prob(const Item& item, const MasteryProfile& profile) {
  return eta(item, profile) == 1 ? 1.0 - item.slip : item.guess;
}

ResponseVector simulate_responses(const ItemBank& bank, const MasteryProfile& profile, Rng& rng) {
  if (bank.empty()) throw std::invalid_argument("cannot simulate responses from an empty bank");
  ResponseVector x(static_cast<Eigen::Index>(bank.size()));
  for (std::size_t j = 0; j < bank.size(); ++j) {
    x[static_cast<Eigen::Index>(j)] = uniform01(rng) < response_prob(bank[j], profile) ? 1 : 0;
  }
  return x;
}

double log_likelihood(const ResponseVector& responses, const ItemBank& bank,
                      const MasteryProfile& profile) {
  if (static_cast<std::size_t>(responses.size()) != bank.size()) {
    throw std::invalid_argument("response vector length does not match the item bank");
  }
  double ll = 0.0;
  for (std::size_t j = 0; j < bank.size(); ++j) {
    const double p = response_prob(bank[j], profile);
    const double q = responses[static_cast<Eigen::Index>(j)] == 1 ? p : 1.0 - p;
    ll += std::log(std::max(q, kProbabilityFloor));
  }
  return ll;
}

int map_estimate(const ResponseVector& responses, const ItemBank& bank, const StateSpace& states,
                 const std::vector<double>& prior) {
  if (states.size() == 0) throw std::invalid_argument("empty state space");
  if (!prior.empty() && static_cast<int>(prior.size()) != states.size()) {
    throw std::invalid_argument("prior length does not match the state space");
  }
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < states.size(); ++s) {
    double score = log_likelihood(responses, bank, states.profile(s));
    if (!prior.empty()) {
      if (prior[s] <= 0.0) continue;
      score += std::log(prior[s]);
    }
    if (best < 0 || score > best_score) {
      best = s;
      best_score = score;
    }
  }
  if (best < 0) throw std::invalid_argument("prior assigns zero mass to every state");
  return best;
}

int error_channel(int state, double error_rate, int state_count, Rng& rng) {
  if (!(error_rate >= 0.0 && error_rate <= 0.5)) {
    throw std::invalid_argument("error rate must lie in [0, 0.5]");
  }
  if (state < 0 || state >= state_count) throw std::out_of_range("state outside the state space");
  if (error_rate == 0.0) return state;
  if (state_count < 2) {
    throw std::invalid_argument("error channel needs at least two states");
  }
  if (uniform01(rng) >= error_rate) return state;
  const int other = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(state_count - 1)));
  return other >= state ? other + 1 : other;
}

}  // namespace hlm
