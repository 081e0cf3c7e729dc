#include "hlm/hierarchy.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <sstream>

namespace hlm {

AttributeHierarchy::AttributeHierarchy(std::vector<Attribute> attributes,
                                       std::vector<PrerequisiteEdge> edges,
                                       bool strict)
    : attributes_(std::move(attributes)), edges_(std::move(edges)), strict_(strict) {
  if (attributes_.empty()) {
    throw std::invalid_argument("hierarchy needs at least one attribute");
  }
  const int n = attribute_count();
  offsets_.reserve(attributes_.size());
  for (int i = 0; i < n; ++i) {
    Attribute& a = attributes_[i];
    if (a.id != i) {
      throw std::invalid_argument("attribute ids must be dense 0..N-1 in order; got " +
                                  std::to_string(a.id) + " at position " + std::to_string(i));
    }
    if (a.levels < 1) {
      throw std::invalid_argument("attribute '" + a.name + "' must have at least one level");
    }
    offsets_.push_back(flag_count_);
    flag_count_ += a.levels;
  }

  std::vector<std::vector<int>> children(n);
  std::vector<int> indegree(n, 0);
  for (const auto& e : edges_) {
    if (e.parent < 0 || e.parent >= n || e.child < 0 || e.child >= n) {
      throw std::invalid_argument("prerequisite edge references an unknown attribute");
    }
    if (e.parent == e.child) {
      throw std::invalid_argument("attribute '" + attributes_[e.parent].name +
                                  "' cannot be its own prerequisite");
    }
    children[e.parent].push_back(e.child);
    ++indegree[e.child];
  }

  // Kahn: every node must drain for the graph to be acyclic.
  std::queue<int> ready;
  for (int i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  int drained = 0;
  while (!ready.empty()) {
    const int u = ready.front();
    ready.pop();
    ++drained;
    for (int c : children[u]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (drained != n) {
    throw std::invalid_argument("prerequisite graph contains a cycle");
  }
}

int AttributeHierarchy::find(const std::string& name) const {
  for (const auto& a : attributes_) {
    if (a.name == name) return a.id;
  }
  return -1;
}

MasteryProfile MasteryProfile::from_levels(const AttributeHierarchy& hierarchy,
                                           const Levels& levels) {
  if (static_cast<int>(levels.size()) != hierarchy.attribute_count()) {
    throw std::invalid_argument("level vector has " + std::to_string(levels.size()) +
                                " entries, hierarchy has " +
                                std::to_string(hierarchy.attribute_count()) + " attributes");
  }
  Flags flags = Flags::Zero(hierarchy.flag_count());
  for (int n = 0; n < hierarchy.attribute_count(); ++n) {
    if (levels[n] < 0 || levels[n] > hierarchy.levels(n)) {
      throw std::invalid_argument("level " + std::to_string(levels[n]) +
                                  " out of range for attribute " + std::to_string(n));
    }
    flags.segment(hierarchy.flag_offset(n), levels[n]).setOnes();
  }
  return MasteryProfile(std::move(flags));
}

Levels MasteryProfile::levels(const AttributeHierarchy& hierarchy) const {
  Levels out(hierarchy.attribute_count());
  for (int n = 0; n < hierarchy.attribute_count(); ++n) {
    out[n] = flags_.segment(hierarchy.flag_offset(n), hierarchy.levels(n)).sum();
  }
  return out;
}

namespace {

// Prerequisite rule for one edge on attained levels.
bool edge_ok(const AttributeHierarchy& h, const PrerequisiteEdge& e, int parent_level,
             int child_level) {
  const int parent_k = h.levels(e.parent);
  if (h.strict() && child_level >= 1 && parent_level < parent_k) return false;
  return parent_level >= std::min(child_level, parent_k);
}

}  // namespace

bool validate_profile(const AttributeHierarchy& hierarchy, const MasteryProfile& profile) {
  if (profile.size() != hierarchy.flag_count()) {
    throw std::invalid_argument("profile has " + std::to_string(profile.size()) +
                                " flags, hierarchy expects " +
                                std::to_string(hierarchy.flag_count()));
  }
  const Flags& f = profile.flags();
  for (int i = 0; i < f.size(); ++i) {
    if (f[i] != 0 && f[i] != 1) return false;
  }
  for (int n = 0; n < hierarchy.attribute_count(); ++n) {
    const int off = hierarchy.flag_offset(n);
    for (int k = 2; k <= hierarchy.levels(n); ++k) {
      if (f[off + k - 1] == 1 && f[off + k - 2] == 0) return false;
    }
  }
  return admissible_levels(hierarchy, profile.levels(hierarchy));
}

bool admissible_levels(const AttributeHierarchy& hierarchy, const Levels& levels) {
  if (static_cast<int>(levels.size()) != hierarchy.attribute_count()) {
    throw std::invalid_argument("level vector dimension mismatch");
  }
  for (int n = 0; n < hierarchy.attribute_count(); ++n) {
    if (levels[n] < 0 || levels[n] > hierarchy.levels(n)) return false;
  }
  return std::all_of(hierarchy.edges().begin(), hierarchy.edges().end(), [&](const auto& e) {
    return edge_ok(hierarchy, e, levels[e.parent], levels[e.child]);
  });
}

int mastered_count(const MasteryProfile& profile) { return profile.flags().sum(); }

bool is_terminal(const AttributeHierarchy& hierarchy, const MasteryProfile& profile) {
  return profile.size() == hierarchy.flag_count() && profile.flags().minCoeff() == 1;
}

bool can_acquire(const AttributeHierarchy& hierarchy, const Levels& levels, int attribute,
                 int level) {
  if (attribute < 0 || attribute >= hierarchy.attribute_count()) return false;
  if (level < 1 || level > hierarchy.levels(attribute)) return false;
  if (levels.at(attribute) != level - 1) return false;
  Levels next = levels;
  next[attribute] = level;
  return admissible_levels(hierarchy, next);
}

StateSpaceOverflow::StateSpaceOverflow(std::size_t cap)
    : std::runtime_error("state space exceeds the configured cap of " + std::to_string(cap) +
                         " states"),
      cap_(cap) {}

StateSpace::StateSpace(const AttributeHierarchy& hierarchy, std::vector<Levels> levels)
    : levels_(std::move(levels)) {
  profiles_.reserve(levels_.size());
  mastered_.reserve(levels_.size());
  for (int i = 0; i < size(); ++i) {
    profiles_.push_back(MasteryProfile::from_levels(hierarchy, levels_[i]));
    mastered_.push_back(std::accumulate(levels_[i].begin(), levels_[i].end(), 0));
    index_.emplace(levels_[i], i);
  }
}

int StateSpace::index_of(const Levels& levels) const {
  auto it = index_.find(levels);
  return it == index_.end() ? -1 : it->second;
}

bool StateSpace::dominates(int next, int current) const {
  const Levels& a = levels_.at(next);
  const Levels& b = levels_.at(current);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return false;
  }
  return true;
}

StateSpace enumerate_states(const AttributeHierarchy& hierarchy, std::size_t cap) {
  const int n = hierarchy.attribute_count();
  std::vector<Levels> out;
  Levels current(n, 0);

  // Edges grouped by their later endpoint so each can be checked as soon as
  // both of its attributes are assigned.
  std::vector<std::vector<PrerequisiteEdge>> closing(n);
  for (const auto& e : hierarchy.edges()) {
    closing[std::max(e.parent, e.child)].push_back(e);
  }

  auto recurse = [&](auto&& self, int attr) -> void {
    if (attr == n) {
      if (out.size() >= cap) throw StateSpaceOverflow(cap);
      out.push_back(current);
      return;
    }
    for (int k = 0; k <= hierarchy.levels(attr); ++k) {
      current[attr] = k;
      bool ok = true;
      for (const auto& e : closing[attr]) {
        if (!edge_ok(hierarchy, e, current[e.parent], current[e.child])) {
          ok = false;
          break;
        }
      }
      if (ok) self(self, attr + 1);
    }
    current[attr] = 0;
  };
  recurse(recurse, 0);
  return StateSpace(hierarchy, std::move(out));
}

std::string format_levels(const Levels& levels) {
  std::string s;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i) s += ':';
    s += std::to_string(levels[i]);
  }
  return s;
}

Levels parse_levels(const std::string& text) {
  Levels out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("malformed level vector '" + text + "'");
    }
    out.push_back(std::stoi(part));
  }
  if (out.empty()) throw std::invalid_argument("empty level vector");
  return out;
}

}  // namespace hlm
