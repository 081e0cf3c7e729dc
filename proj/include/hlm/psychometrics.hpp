#pragma once

// DINA response model over the flag layout of an AttributeHierarchy.

#include "hlm/hierarchy.hpp"
#include "hlm/rng.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace hlm {

using ResponseVector = Eigen::VectorXi;
using QMatrix = Eigen::MatrixXi;

struct Item {
  Flags q_row;
  double slip = 0.0;
  double guess = 0.0;
};

using ItemBank = std::vector<Item>;

// Throws std::invalid_argument unless the row is a non-empty 0/1 vector,
// 0 <= s < 1, 0 <= g < 1 and g < 1 - s.
void check_item(const Item& item);

// Rows are items, columns are flags.
QMatrix q_matrix(const ItemBank& bank);

// 1 iff the profile holds every flag the item requires.
int eta(const Item& item, const MasteryProfile& profile);

// P(X = 1 | profile) = (1 - s)^eta * g^(1 - eta)
double response_prob(const Item& item, const MasteryProfile& profile);

ResponseVector simulate_responses(const ItemBank& bank, const MasteryProfile& profile, Rng& rng);

inline constexpr double kProbabilityFloor = 1e-12;

double log_likelihood(const ResponseVector& responses, const ItemBank& bank,
                      const MasteryProfile& profile);

// Index of the state maximising log-likelihood + log prior; ties go to the
// lowest index. An empty prior means uniform.
int map_estimate(const ResponseVector& responses, const ItemBank& bank, const StateSpace& states,
                 const std::vector<double>& prior = {});

// With probability `error_rate` replaces `state` by a uniform draw from the
// other states.
int error_channel(int state, double error_rate, int state_count, Rng& rng);

}  // namespace hlm
