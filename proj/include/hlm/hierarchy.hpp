#pragma once

// Attribute hierarchy, mastery profiles and the restricted state space.
//
// A profile is a binary flag vector laid out attribute-major: attribute 0
// levels 1..K_0, then attribute 1 levels 1..K_1, and so on. For a profile
// that satisfies within-attribute monotonicity this is equivalent to a
// per-attribute level vector, which is what most of the code passes around.

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hlm {

using Flags = Eigen::VectorXi;
using Levels = std::vector<int>;

struct Attribute {
  int id = 0;
  std::string name;
  int levels = 1;  // K, excluding the "not mastered" level 0
};

struct PrerequisiteEdge {
  int parent = 0;
  int child = 0;
};

class AttributeHierarchy {
 public:
  // Throws std::invalid_argument on K < 1, bad edge ids, self loops or cycles.
  AttributeHierarchy(std::vector<Attribute> attributes,
                     std::vector<PrerequisiteEdge> edges, bool strict = false);

  const std::vector<Attribute>& attributes() const { return attributes_; }
  const std::vector<PrerequisiteEdge>& edges() const { return edges_; }
  bool strict() const { return strict_; }

  int attribute_count() const { return static_cast<int>(attributes_.size()); }
  int levels(int attribute) const { return attributes_.at(attribute).levels; }

  // Total number of (attribute, level) flags.
  int flag_count() const { return flag_count_; }
  // Position of flag (attribute, 1) in the flag vector.
  int flag_offset(int attribute) const { return offsets_.at(attribute); }
  int flag_index(int attribute, int level) const {
    return offsets_.at(attribute) + level - 1;
  }

  // Attribute id by name, or -1.
  int find(const std::string& name) const;

 private:
  std::vector<Attribute> attributes_;
  std::vector<PrerequisiteEdge> edges_;
  bool strict_ = false;
  std::vector<int> offsets_;
  int flag_count_ = 0;
};

class MasteryProfile {
 public:
  MasteryProfile() = default;
  explicit MasteryProfile(Flags flags) : flags_(std::move(flags)) {}

  static MasteryProfile from_levels(const AttributeHierarchy& hierarchy,
                                    const Levels& levels);

  const Flags& flags() const { return flags_; }
  int size() const { return static_cast<int>(flags_.size()); }

  // Number of set flags per attribute. Equals the attained level whenever
  // the profile is within-attribute monotone.
  Levels levels(const AttributeHierarchy& hierarchy) const;

  bool operator==(const MasteryProfile& other) const {
    return flags_.size() == other.flags_.size() && flags_ == other.flags_;
  }

 private:
  Flags flags_;
};

// True iff the profile satisfies within-attribute monotonicity, the per-level
// prerequisite rule and, for strict hierarchies, full prerequisite mastery
// before any level of the child. Throws std::invalid_argument when the flag
// count does not match the hierarchy.
bool validate_profile(const AttributeHierarchy& hierarchy,
                      const MasteryProfile& profile);

// Level-vector form of the same check; levels must be in 0..K.
bool admissible_levels(const AttributeHierarchy& hierarchy, const Levels& levels);

int mastered_count(const MasteryProfile& profile);
bool is_terminal(const AttributeHierarchy& hierarchy,
                 const MasteryProfile& profile);

// True iff flag (attribute, level) is unset in `levels`, level-1 is attained,
// and setting it keeps the profile admissible.
bool can_acquire(const AttributeHierarchy& hierarchy, const Levels& levels,
                 int attribute, int level);

inline constexpr std::size_t kDefaultStateCap = 1'000'000;

class StateSpaceOverflow : public std::runtime_error {
 public:
  explicit StateSpaceOverflow(std::size_t cap);
  std::size_t cap() const { return cap_; }

 private:
  std::size_t cap_;
};

// Enumerated admissible profiles in canonical order (ascending level vector,
// lexicographic by attribute id) with a reverse lookup.
class StateSpace {
 public:
  StateSpace(const AttributeHierarchy& hierarchy, std::vector<Levels> levels);

  int size() const { return static_cast<int>(levels_.size()); }
  const Levels& levels(int state) const { return levels_.at(state); }
  const MasteryProfile& profile(int state) const { return profiles_.at(state); }
  int mastered(int state) const { return mastered_.at(state); }

  int initial() const { return 0; }
  int terminal() const { return size() - 1; }
  bool is_terminal(int state) const { return state == terminal(); }

  // Index of a level vector, or -1 when it is not in the space.
  int index_of(const Levels& levels) const;

  // flags(next) is a superset of flags(current).
  bool dominates(int next, int current) const;

 private:
  std::vector<Levels> levels_;
  std::vector<MasteryProfile> profiles_;
  std::vector<int> mastered_;
  std::map<Levels, int> index_;
};

StateSpace enumerate_states(const AttributeHierarchy& hierarchy,
                            std::size_t cap = kDefaultStateCap);

// "1:0:2" style rendering used by every text format in the project.
std::string format_levels(const Levels& levels);
// Inverse of format_levels; throws std::invalid_argument on malformed input.
Levels parse_levels(const std::string& text);

}  // namespace hlm
