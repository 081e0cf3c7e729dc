// hlm: train, evaluate and sweep learning-path policies from a config file.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error.

#include "hlm/config.hpp"
#include "hlm/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct Options {
  std::string command;
  std::string config;
  std::string manifest;
  std::string out = ".";
  std::string table;
  std::string rates;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes_train;
  std::optional<int> episodes_eval;
  std::optional<double> error_rate;
  int jobs = 1;
};

std::vector<double> parse_rates(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw hlm::ConfigError("--rates: malformed rate '" + part + "'");
    }
  }
  if (out.empty()) throw hlm::ConfigError("--rates: no rates given");
  return out;
}

void apply_overrides(hlm::ConfigParts& parts, const Options& opt) {
  hlm::ExperimentConfig& c = parts.config;
  if (opt.seed) c.seed = *opt.seed;
  if (opt.episodes_train) c.episodes_train = *opt.episodes_train;
  if (opt.episodes_eval) c.episodes_eval = *opt.episodes_eval;
  if (opt.error_rate) c.error_rate = *opt.error_rate;
  if (!opt.rates.empty()) c.error_rates = parse_rates(opt.rates);
  c.jobs = opt.jobs;
  try {
    hlm::check_config(c);
  } catch (const std::invalid_argument& e) {
    throw hlm::ConfigError(e.what());
  }
  const json synced = hlm::to_json(c);
  for (const char* key : {"agent", "experiment", "estimation"}) parts.resolved[key] = synced[key];
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  return f;
}

hlm::QTable load_table(const Options& opt, const hlm::Experiment& exp) {
  if (opt.table.empty()) {
    throw hlm::ConfigError("no Q-table given: run 'hlm train' first and pass its qtable.txt with --table");
  }
  std::ifstream in(opt.table);
  if (!in) throw hlm::ConfigError("cannot open Q-table '" + opt.table + "'");
  return hlm::read_qtable(in, exp.env.states, exp.env.material_count(), opt.table);
}

void write_manifest(const fs::path& out_dir, const Options& opt, const hlm::ConfigParts& parts,
                    const std::vector<std::string>& artifacts) {
  json m;
  m["tool"] = "hlm";
  m["version"] = kToolVersion;
  m["command"] = opt.command;
  m["seed"] = parts.config.seed;
  m["config"] = parts.resolved;
  m["options"] = {{"table", opt.table.empty() ? "" : fs::absolute(opt.table).string()}, {"jobs", opt.jobs}};
  json paths = json::array();
  for (const auto& a : artifacts) paths.push_back((out_dir / a).string());
  m["artifacts"] = paths;
  auto f = open_out(out_dir / "manifest.json");
  f << m.dump(2) << '\n';
}

std::string run_id(const Options& opt, const hlm::ExperimentConfig& c) {
  return opt.command + "-" + std::to_string(c.seed);
}

int cmd_validate(const hlm::ConfigParts& parts) {
  hlm::AttributeHierarchy h(parts.attributes, parts.edges, parts.strict);
  const hlm::StateSpace states = hlm::enumerate_states(h, parts.state_cap);
  std::cout << "states: " << states.size() << '\n';
  std::cout << "materials: " << parts.materials.size() << '\n';
  hlm::TransitionModel model;
  try {
    hlm::check_materials(h, parts.materials);
    model = hlm::model_from_records(states, static_cast<int>(parts.materials.size()), parts.transitions);
  } catch (const std::invalid_argument& e) {
    std::cout << "violation: " << e.what() << '\n';
    return 2;
  }
  const auto violations = hlm::validate_transition_model(model, h, states, parts.materials);
  for (const auto& v : violations) std::cout << "violation: " << hlm::describe(v, states) << '\n';
  if (violations.empty()) {
    std::cout << "transition model: clean\n";
    return 0;
  }
  std::cout << violations.size() << " violation(s)\n";
  return 2;
}

int cmd_train(const Options& opt, const hlm::ConfigParts& parts) {
  const hlm::Experiment exp = hlm::build_experiment(parts);
  const fs::path out(opt.out);
  write_manifest(out, opt, parts, {"qtable.txt", "training.csv"});

  const hlm::TrainingResult tr = hlm::train(exp);
  {
    auto f = open_out(out / "qtable.txt");
    hlm::write_qtable(f, tr.q, exp.env.states);
  }
  std::vector<double> rewards;
  for (const auto& r : tr.records) rewards.push_back(r.reward());
  const auto smoothed = hlm::smooth(rewards, exp.config.smoothing_window);
  auto f = open_out(out / "training.csv");
  f << "run_id,episode,initial_state,reward,smoothed,length,truncated\n";
  const std::string id = run_id(opt, exp.config);
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    const auto& r = tr.records[i];
    f << id << ',' << r.episode << ',' << hlm::format_levels(exp.env.states.levels(r.initial_state)) << ','
      << hlm::format_fixed6(r.reward()) << ',' << hlm::format_fixed6(smoothed[i]) << ',' << r.length << ','
      << (r.truncated ? 1 : 0) << '\n';
  }
  std::cout << "trained " << tr.records.size() << " episodes; wrote " << (out / "qtable.txt").string() << '\n';
  return 0;
}

int write_comparisons(const Options& opt, const hlm::Experiment& exp,
                      const std::vector<hlm::ComparisonResult>& results) {
  const fs::path out(opt.out);
  const std::string id = run_id(opt, exp.config);
  auto episodes = open_out(out / "episodes.csv");
  auto summary = open_out(out / "summary.csv");
  hlm::write_episodes_header(episodes);
  hlm::write_summary_header(summary);
  for (const auto& r : results) {
    hlm::write_episodes_rows(episodes, id, "rl", r.error_rate, r.rl, exp.env.states);
    hlm::write_episodes_rows(episodes, id, "heuristic", r.error_rate, r.heuristic, exp.env.states);
    hlm::write_summary_row(summary, id, r.rl_summary);
    hlm::write_summary_row(summary, id, r.heuristic_summary);
    std::printf("error %.3f  rl reward %.3f (sd %.3f) len %.3f | heuristic reward %.3f (sd %.3f) len %.3f\n",
                r.error_rate, r.rl_summary.reward_mean, r.rl_summary.reward_sd, r.rl_summary.el_mean,
                r.heuristic_summary.reward_mean, r.heuristic_summary.reward_sd, r.heuristic_summary.el_mean);
  }
  return 0;
}

int cmd_compare(const Options& opt, const hlm::ConfigParts& parts) {
  const hlm::Experiment exp = hlm::build_experiment(parts);
  const hlm::QTable q = load_table(opt, exp);
  write_manifest(opt.out, opt, parts, {"episodes.csv", "summary.csv"});
  return write_comparisons(opt, exp, {hlm::compare(exp, q, exp.config.error_rate)});
}

int cmd_sweep(const Options& opt, const hlm::ConfigParts& parts) {
  const hlm::Experiment exp = hlm::build_experiment(parts);
  const hlm::QTable q = load_table(opt, exp);
  write_manifest(opt.out, opt, parts, {"episodes.csv", "summary.csv"});
  return write_comparisons(opt, exp, hlm::error_sweep(exp, q, exp.config.error_rates));
}

int cmd_initial_states(const Options& opt, const hlm::ConfigParts& parts) {
  const hlm::Experiment exp = hlm::build_experiment(parts);
  const fs::path out(opt.out);
  write_manifest(out, opt, parts, {"initial_states.csv", "initial_states_summary.csv"});
  const auto study = hlm::initial_state_study(exp);
  const std::string id = run_id(opt, exp.config);
  auto series = open_out(out / "initial_states.csv");
  auto summary = open_out(out / "initial_states_summary.csv");
  series << "run_id,initial_state,episode,reward,smoothed,length\n";
  summary << "run_id,initial_state,el_mean,stabilization_ratio\n";
  for (const auto& s : study) {
    const std::string state = hlm::format_levels(exp.env.states.levels(s.initial_state));
    for (std::size_t i = 0; i < s.rewards.size(); ++i) {
      series << id << ',' << state << ',' << i << ',' << hlm::format_fixed6(s.rewards[i]) << ','
             << hlm::format_fixed6(s.smoothed[i]) << ',' << s.lengths[i] << '\n';
    }
    summary << id << ',' << state << ',' << hlm::format_fixed6(s.mean_length) << ','
            << hlm::format_fixed6(s.stabilization_ratio) << '\n';
    std::printf("start %s  mean length %.3f  stabilization ratio %.3f\n", state.c_str(), s.mean_length,
                s.stabilization_ratio);
  }
  return 0;
}

int dispatch(const Options& opt, hlm::ConfigParts parts) {
  if (opt.command == "validate") return cmd_validate(parts);
  fs::create_directories(opt.out);
  if (opt.command == "train") return cmd_train(opt, parts);
  if (opt.command == "compare") return cmd_compare(opt, parts);
  if (opt.command == "sweep") return cmd_sweep(opt, parts);
  if (opt.command == "initial-states") return cmd_initial_states(opt, parts);
  throw hlm::ConfigError("unknown command '" + opt.command + "'");
}

int replay(Options opt) {
  std::ifstream in(opt.manifest);
  if (!in) throw hlm::ConfigError("cannot open manifest '" + opt.manifest + "'");
  json m;
  try {
    m = json::parse(in);
  } catch (const json::parse_error& e) {
    throw hlm::ConfigError(opt.manifest + ": " + e.what());
  }
  if (!m.contains("command") || !m.contains("config")) {
    throw hlm::ConfigError(opt.manifest + ": not an hlm run manifest");
  }
  opt.command = m.at("command").get<std::string>();
  if (opt.command == "replay") throw hlm::ConfigError("manifest records a replay; replay its source instead");
  opt.table = m.value("options", json::object()).value("table", "");
  opt.jobs = m.value("options", json::object()).value("jobs", 1);
  hlm::ConfigParts parts = hlm::parse_config(m.at("config"), fs::path(opt.manifest).parent_path());
  return dispatch(opt, std::move(parts));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning-path optimisation over hierarchical skills"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", opt.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", opt.seed, "Root seed; overrides the config");
    if (needs_out) sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--jobs", opt.jobs, "Worker threads for independent cells")->check(CLI::PositiveNumber);
  };

  auto* train = app.add_subcommand("train", "Train a Q-table and write qtable.txt + training.csv");
  add_common(train, true);
  train->add_option("--episodes-train", opt.episodes_train, "Training episodes");
  train->add_option("--error-rate", opt.error_rate, "Estimation error rate during training");

  auto* compare = app.add_subcommand("compare", "Evaluate RL against the heuristic");
  add_common(compare, true);
  compare->add_option("--table", opt.table, "Q-table from 'hlm train'");
  compare->add_option("--episodes-eval", opt.episodes_eval, "Evaluation episodes");
  compare->add_option("--error-rate", opt.error_rate, "Estimation error rate");

  auto* sweep = app.add_subcommand("sweep", "Compare across estimation error rates");
  add_common(sweep, true);
  sweep->add_option("--table", opt.table, "Q-table from 'hlm train'");
  sweep->add_option("--episodes-eval", opt.episodes_eval, "Evaluation episodes per rate");
  sweep->add_option("--rates", opt.rates, "Comma-separated error rates, e.g. 0,0.05");

  auto* initial = app.add_subcommand("initial-states", "Train from every non-terminal initial state");
  add_common(initial, true);
  initial->add_option("--episodes-train", opt.episodes_train, "Training episodes per state");

  auto* validate = app.add_subcommand("validate", "Check the hierarchy and transition model");
  validate->add_option("--config", opt.config, "Experiment config (JSON)")->required();

  auto* replay_cmd = app.add_subcommand("replay", "Re-run a command from its manifest.json");
  replay_cmd->add_option("--manifest", opt.manifest, "manifest.json written by a previous run")->required();
  replay_cmd->add_option("--out", opt.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (replay_cmd->parsed()) return replay(opt);
    for (auto* sub : app.get_subcommands()) opt.command = sub->get_name();
    hlm::ConfigParts parts = hlm::read_config_file(opt.config);
    if (opt.command != "validate") apply_overrides(parts, opt);
    return dispatch(opt, std::move(parts));
  } catch (const hlm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
