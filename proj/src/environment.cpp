#include "hlm/environment.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace hlm {

namespace {
constexpr double kSumTolerance = 1e-9;
}

void check_materials(const AttributeHierarchy& hierarchy,
                     const std::vector<LearningMaterial>& materials) {
  if (materials.empty()) throw std::invalid_argument("at least one learning material is required");
  for (std::size_t i = 0; i < materials.size(); ++i) {
    const auto& m = materials[i];
    if (m.id != static_cast<int>(i)) {
      throw std::invalid_argument("material ids must be dense 0..L-1 in order");
    }
    if (m.attribute < 0 || m.attribute >= hierarchy.attribute_count()) {
      throw std::invalid_argument("material '" + m.name + "' targets an unknown attribute");
    }
    if (m.level < 1 || m.level > hierarchy.levels(m.attribute)) {
      throw std::invalid_argument("material '" + m.name + "' targets level " +
                                  std::to_string(m.level) + " outside 1.." +
                                  std::to_string(hierarchy.levels(m.attribute)));
    }
  }
}

TransitionModel::TransitionModel(int state_count, int material_count)
    : state_count_(state_count),
      probs_(static_cast<std::size_t>(material_count), Eigen::MatrixXd::Zero(state_count, state_count)) {}

TransitionModel::TransitionModel(std::vector<Eigen::MatrixXd> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("transition model needs at least one material");
  state_count_ = static_cast<int>(probs_.front().rows());
  for (const auto& p : probs_) {
    if (p.rows() != state_count_ || p.cols() != state_count_) {
      throw std::invalid_argument("transition matrices must all be square and the same size");
    }
  }
}

TransitionModel model_from_records(const StateSpace& states, int material_count,
                                   const std::vector<TransitionRecord>& records) {
  TransitionModel model(states.size(), material_count);
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& r : records) {
    const int from = states.index_of(r.from);
    const int to = states.index_of(r.to);
    if (from < 0) throw std::invalid_argument("state " + format_levels(r.from) + " is not in the state space");
    if (to < 0) throw std::invalid_argument("state " + format_levels(r.to) + " is not in the state space");
    if (r.material < 0 || r.material >= material_count) {
      throw std::invalid_argument("material id " + std::to_string(r.material) + " is out of range");
    }
    if (!(r.probability >= 0.0 && r.probability <= 1.0)) {
      throw std::invalid_argument("probability must lie in [0, 1]");
    }
    if (!seen.emplace(from, r.material, to).second) {
      throw std::invalid_argument("duplicate record for " + format_levels(r.from) + " / material " +
                                  std::to_string(r.material) + " / " + format_levels(r.to));
    }
    if (states.is_terminal(from)) {
      throw std::invalid_argument("records from the terminal state are not allowed");
    }
    model.matrix(r.material)(from, to) += r.probability;
  }
  for (int a = 0; a < material_count; ++a) {
    Eigen::MatrixXd& p = model.matrix(a);
    for (int s = 0; s < states.size(); ++s) {
      if (states.is_terminal(s)) {
        p(s, s) = 1.0;
        continue;
      }
      const double listed = p.row(s).sum() - p(s, s);
      if (listed > 1.0 + kSumTolerance) {
        std::ostringstream msg;
        msg << "outgoing probability from " << format_levels(states.levels(s)) << " under material "
            << a << " sums to " << listed << " > 1";
        throw std::invalid_argument(msg.str());
      }
      p(s, s) = std::max(0.0, 1.0 - listed);
    }
  }
  return model;
}

double success_probability(const TransitionModel& model, const StateSpace& states,
                           const LearningMaterial& material, int state) {
  Levels target = states.levels(state);
  if (target.at(material.attribute) != material.level - 1) return 0.0;
  target[material.attribute] = material.level;
  const int next = states.index_of(target);
  return next < 0 ? 0.0 : model(state, material.id, next);
}

std::string describe(const Violation& v, const StateSpace& states) {
  std::ostringstream out;
  out << v.kind;
  if (v.state >= 0) out << " at state " << format_levels(states.levels(v.state));
  if (v.material >= 0) out << " material " << v.material;
  if (!v.detail.empty()) out << ": " << v.detail;
  return out.str();
}

std::vector<Violation> validate_transition_model(const TransitionModel& model,
                                                 const AttributeHierarchy& hierarchy,
                                                 const StateSpace& states,
                                                 const std::vector<LearningMaterial>& materials) {
  std::vector<Violation> out;
  if (model.state_count() != states.size()) {
    out.push_back({"dimension", -1, -1,
                   "model has " + std::to_string(model.state_count()) + " states, space has " +
                       std::to_string(states.size())});
    return out;
  }
  if (model.material_count() != static_cast<int>(materials.size())) {
    out.push_back({"dimension", -1, -1,
                   "model has " + std::to_string(model.material_count()) + " materials, config has " +
                       std::to_string(materials.size())});
    return out;
  }

  for (int a = 0; a < model.material_count(); ++a) {
    const Eigen::MatrixXd& p = model.matrix(a);
    for (int s = 0; s < states.size(); ++s) {
      if (states.is_terminal(s)) continue;
      const auto row = p.row(s);
      if (row.cwiseAbs().sum() == 0.0) {
        out.push_back({"missing", s, a, "no transition entries"});
        continue;
      }
      if ((row.array() < 0.0).any()) {
        out.push_back({"negative probability", s, a, ""});
      }
      const double total = row.sum();
      if (std::abs(total - 1.0) > kSumTolerance) {
        std::ostringstream d;
        d.precision(12);
        d << "row sums to " << total;
        out.push_back({"not a distribution", s, a, d.str()});
      }
      for (int n = 0; n < states.size(); ++n) {
        if (row[n] <= 0.0 || n == s) continue;
        if (!states.dominates(n, s)) {
          out.push_back({"retrogress", s, a, "reaches " + format_levels(states.levels(n))});
        } else if (states.mastered(n) - states.mastered(s) != 1) {
          out.push_back({"multi-step", s, a,
                         "reaches " + format_levels(states.levels(n)) + " gaining " +
                             std::to_string(states.mastered(n) - states.mastered(s)) + " flags"});
        }
      }
    }
  }

  // Every flag the hierarchy allows next must be learnable by its material,
  // and learning must be monotone in what else is already mastered.
  for (const auto& m : materials) {
    std::vector<int> applicable;
    for (int s = 0; s < states.size(); ++s) {
      if (states.is_terminal(s) || states.levels(s)[m.attribute] != m.level - 1) continue;
      applicable.push_back(s);
      if (can_acquire(hierarchy, states.levels(s), m.attribute, m.level) &&
          success_probability(model, states, m, s) <= 0.0) {
        out.push_back({"blocked material", s, m.id, "admissible target flag has zero success probability"});
      }
    }
    for (int lo : applicable) {
      for (int hi : applicable) {
        if (lo == hi || !states.dominates(hi, lo)) continue;
        const double p_lo = success_probability(model, states, m, lo);
        const double p_hi = success_probability(model, states, m, hi);
        if (p_hi + kSumTolerance < p_lo) {
          std::ostringstream d;
          d << "success " << p_hi << " at " << format_levels(states.levels(hi)) << " is below " << p_lo
            << " at " << format_levels(states.levels(lo));
          out.push_back({"monotonicity", hi, m.id, d.str()});
        }
      }
    }
  }

  for (int s = 0; s < states.size(); ++s) {
    if (states.is_terminal(s)) continue;
    bool progress = false;
    for (int a = 0; a < model.material_count() && !progress; ++a) {
      for (int n = 0; n < states.size(); ++n) {
        if (n != s && model(s, a, n) > 0.0 && states.mastered(n) > states.mastered(s)) {
          progress = true;
          break;
        }
      }
    }
    if (!progress) out.push_back({"dead end", s, -1, "no material can improve this state"});
  }
  return out;
}

int step(const TransitionModel& model, const StateSpace& states, int state, int material, Rng& rng) {
  if (states.is_terminal(state)) throw std::logic_error("step called on the terminal state");
  if (material < 0 || material >= model.material_count()) {
    throw std::out_of_range("material id out of range");
  }
  const auto row = model.matrix(material).row(state);
  const double u = uniform01(rng);
  double acc = 0.0;
  int last_positive = state;
  for (int n = 0; n < row.size(); ++n) {
    if (row[n] <= 0.0) continue;
    acc += row[n];
    last_positive = n;
    if (u < acc) return n;
  }
  return last_positive;  // rounding slack at the top of the row
}

double expected_learning_time(double success_prob) {
  if (!(success_prob > 0.0 && success_prob <= 1.0)) {
    throw std::invalid_argument("success probability must lie in (0, 1]; flag is unreachable");
  }
  return 1.0 / success_prob;
}

double expected_learning_time(const std::vector<double>& path) {
  double total = 0.0;
  for (double p : path) total += expected_learning_time(p);
  return total;
}

}  // namespace hlm
