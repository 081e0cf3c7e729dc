#pragma once

// Text formats: experiment config (JSON), transition records, item banks,
// Q-table files and run manifests.

#include "hlm/agents.hpp"
#include "hlm/harness.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlm {

// Anything wrong with user-supplied configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config pieces before the transition model is validated.
struct ConfigParts {
  ExperimentConfig config;
  std::vector<Attribute> attributes;
  std::vector<PrerequisiteEdge> edges;
  bool strict = false;
  std::size_t state_cap = kDefaultStateCap;
  std::vector<LearningMaterial> materials;
  std::vector<TransitionRecord> transitions;
  nlohmann::json resolved;  // self-contained snapshot, files inlined
};

ConfigParts parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ConfigParts read_config_file(const std::filesystem::path& path);

// Validates the transition model; throws ConfigError listing violations.
Experiment build_experiment(const ConfigParts& parts);
Experiment load_experiment(const std::filesystem::path& path);

// "<from> <material> <to> <probability>" per line; '#' starts a comment.
std::vector<TransitionRecord> parse_transitions(std::istream& in, const std::string& source);
// "<q-row bits> <slip> <guess>" per line.
ItemBank parse_item_bank(std::istream& in, const std::string& source, int flag_count);

void write_transitions(std::ostream& out, const std::vector<TransitionRecord>& records);

// Header "state <material ids...>", then one row per state with %.17g values.
void write_qtable(std::ostream& out, const QTable& q, const StateSpace& states);
QTable read_qtable(std::istream& in, const StateSpace& states, int material_count, const std::string& source);

nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace hlm
