#include "hlm/config.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hlm {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

std::string slurp(const fs::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + what + " '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(where + "." + key, e.what());
  }
}

int attribute_by_name(const std::vector<Attribute>& attrs, const json& ref, const std::string& where) {
  if (ref.is_number_integer()) {
    const int id = ref.get<int>();
    if (id < 0 || id >= static_cast<int>(attrs.size())) fail(where, "attribute id out of range");
    return id;
  }
  if (!ref.is_string()) fail(where, "attribute must be a name or an id");
  for (const auto& a : attrs) {
    if (a.name == ref.get<std::string>()) return a.id;
  }
  fail(where, "unknown attribute '" + ref.get<std::string>() + "'");
}

std::string item_bits(const Item& item) {
  std::string s;
  for (int i = 0; i < item.q_row.size(); ++i) s += item.q_row[i] ? '1' : '0';
  return s;
}

json records_to_json(const std::vector<TransitionRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) {
    arr.push_back({{"from", format_levels(r.from)},
                   {"material", r.material},
                   {"to", format_levels(r.to)},
                   {"probability", r.probability}});
  }
  return arr;
}

std::vector<TransitionRecord> records_from_json(const json& arr) {
  std::vector<TransitionRecord> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "transitions[" + std::to_string(i) + "]";
    try {
      const json& r = arr.at(i);
      out.push_back({parse_levels(r.at("from").get<std::string>()), r.at("material").get<int>(),
                     parse_levels(r.at("to").get<std::string>()), r.at("probability").get<double>()});
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }
  return out;
}

ItemBank items_from_json(const json& arr, int flag_count) {
  ItemBank bank;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::istringstream line(arr.at(i).get<std::string>());
    ItemBank one = parse_item_bank(line, "item_bank[" + std::to_string(i) + "]", flag_count);
    bank.insert(bank.end(), one.begin(), one.end());
  }
  return bank;
}

}  // namespace

std::vector<TransitionRecord> parse_transitions(std::istream& in, const std::string& source) {
  std::vector<TransitionRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string from, to, extra;
    int material = 0;
    double prob = 0.0;
    if (!(ss >> from)) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (!(ss >> material >> to >> prob) || (ss >> extra)) {
      fail(where, "expected '<from> <material> <to> <probability>'");
    }
    try {
      out.push_back({parse_levels(from), material, parse_levels(to), prob});
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }
  return out;
}

ItemBank parse_item_bank(std::istream& in, const std::string& source, int flag_count) {
  ItemBank bank;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string bits, extra;
    Item item;
    if (!(ss >> bits)) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (!(ss >> item.slip >> item.guess) || (ss >> extra)) fail(where, "expected '<q-row bits> <slip> <guess>'");
    if (static_cast<int>(bits.size()) != flag_count || bits.find_first_not_of("01") != std::string::npos) {
      fail(where, "q-row must be " + std::to_string(flag_count) + " binary digits");
    }
    item.q_row.resize(flag_count);
    for (int i = 0; i < flag_count; ++i) item.q_row[i] = bits[i] - '0';
    try {
      check_item(item);
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
    bank.push_back(std::move(item));
  }
  return bank;
}

void write_transitions(std::ostream& out, const std::vector<TransitionRecord>& records) {
  out << "# from material to probability\n";
  for (const auto& r : records) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", r.probability);
    out << format_levels(r.from) << ' ' << r.material << ' ' << format_levels(r.to) << ' ' << buf << '\n';
  }
}

json to_json(const ExperimentConfig& c) {
  json hp = {{"learning_rate", c.hyperparams.learning_rate},
             {"discount", c.hyperparams.discount},
             {"exploration", c.hyperparams.exploration},
             {"learn_decay", c.hyperparams.learn_decay},
             {"explore_decay", c.hyperparams.explore_decay},
             {"init_low", c.hyperparams.init_low},
             {"init_high", c.hyperparams.init_high}};
  json ex = {{"episodes_train", c.episodes_train},
             {"episodes_eval", c.episodes_eval},
             {"smoothing_window", c.smoothing_window},
             {"step_cap", c.step_cap},
             {"seed", c.seed},
             {"eval_continue_learning", c.eval_continue_learning}};
  if (c.initial_mode == InitialStateMode::Uniform) {
    ex["initial_state"] = "uniform";
  } else {
    ex["initial_state"] = c.initial_state.empty() ? std::string("all-zero") : format_levels(c.initial_state);
  }
  json est = {{"mode", c.estimation == EstimationMode::Map ? "map" : "error_channel"},
              {"error_rate", c.error_rate},
              {"error_rates", c.error_rates},
              {"study_error_rate", c.study_error_rate}};
  json bank = json::array();
  for (const auto& item : c.item_bank) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s %.17g %.17g", item_bits(item).c_str(), item.slip, item.guess);
    bank.push_back(buf);
  }
  est["item_bank"] = bank;
  return {{"agent", hp}, {"experiment", ex}, {"estimation", est}};
}

ConfigParts parse_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  ConfigParts parts;

  // hierarchy
  if (!doc.contains("hierarchy")) throw ConfigError("config: missing 'hierarchy'");
  const json& h = doc.at("hierarchy");
  if (!h.contains("attributes") || !h.at("attributes").is_array() || h.at("attributes").empty()) {
    throw ConfigError("hierarchy.attributes: expected a non-empty array");
  }
  for (std::size_t i = 0; i < h.at("attributes").size(); ++i) {
    const json& a = h.at("attributes").at(i);
    const std::string where = "hierarchy.attributes[" + std::to_string(i) + "]";
    Attribute attr;
    attr.id = static_cast<int>(i);
    attr.name = get_or<std::string>(a, "name", "A" + std::to_string(i + 1), where);
    attr.levels = get_or<int>(a, "levels", 0, where);
    if (attr.levels < 1) fail(where, "levels must be >= 1");
    parts.attributes.push_back(attr);
  }
  if (h.contains("prerequisites")) {
    const json& edges = h.at("prerequisites");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string where = "hierarchy.prerequisites[" + std::to_string(i) + "]";
      const json& e = edges.at(i);
      if (!e.is_array() || e.size() != 2) fail(where, "expected [parent, child]");
      parts.edges.push_back({attribute_by_name(parts.attributes, e.at(0), where),
                             attribute_by_name(parts.attributes, e.at(1), where)});
    }
  }
  parts.strict = get_or<bool>(h, "strict", false, "hierarchy");
  parts.state_cap = get_or<std::size_t>(h, "max_states", kDefaultStateCap, "hierarchy");
  try {
    AttributeHierarchy check(parts.attributes, parts.edges, parts.strict);
  } catch (const std::invalid_argument& e) {
    fail("hierarchy", e.what());
  }

  // materials
  if (!doc.contains("materials") || !doc.at("materials").is_array()) {
    throw ConfigError("config: missing 'materials' array");
  }
  for (std::size_t i = 0; i < doc.at("materials").size(); ++i) {
    const json& m = doc.at("materials").at(i);
    const std::string where = "materials[" + std::to_string(i) + "]";
    LearningMaterial mat;
    mat.id = static_cast<int>(i);
    mat.name = get_or<std::string>(m, "name", "material-" + std::to_string(i), where);
    if (!m.contains("attribute")) fail(where, "missing 'attribute'");
    mat.attribute = attribute_by_name(parts.attributes, m.at("attribute"), where);
    mat.level = get_or<int>(m, "level", 0, where);
    if (mat.level < 1 || mat.level > parts.attributes[mat.attribute].levels) fail(where, "level out of range");
    parts.materials.push_back(mat);
  }
  if (parts.materials.empty()) throw ConfigError("materials: at least one material is required");

  // transitions: file path relative to the config, or inline records
  if (!doc.contains("transitions")) throw ConfigError("config: missing 'transitions'");
  const json& tr = doc.at("transitions");
  if (tr.is_string()) {
    const fs::path p = base_dir / tr.get<std::string>();
    std::istringstream in(slurp(p, "transition file"));
    parts.transitions = parse_transitions(in, p.string());
  } else if (tr.is_array()) {
    parts.transitions = records_from_json(tr);
  } else {
    throw ConfigError("transitions: expected a file path or an array of records");
  }

  ExperimentConfig& c = parts.config;
  int flag_count = 0;
  for (const auto& a : parts.attributes) flag_count += a.levels;

  const json agent = doc.value("agent", json::object());
  c.hyperparams.learning_rate = get_or<double>(agent, "learning_rate", c.hyperparams.learning_rate, "agent");
  c.hyperparams.discount = get_or<double>(agent, "discount", c.hyperparams.discount, "agent");
  c.hyperparams.exploration = get_or<double>(agent, "exploration", c.hyperparams.exploration, "agent");
  c.hyperparams.learn_decay = get_or<double>(agent, "learn_decay", c.hyperparams.learn_decay, "agent");
  c.hyperparams.explore_decay = get_or<double>(agent, "explore_decay", c.hyperparams.explore_decay, "agent");
  c.hyperparams.init_low = get_or<double>(agent, "init_low", c.hyperparams.init_low, "agent");
  c.hyperparams.init_high = get_or<double>(agent, "init_high", c.hyperparams.init_high, "agent");

  const json ex = doc.value("experiment", json::object());
  c.episodes_train = get_or<int>(ex, "episodes_train", c.episodes_train, "experiment");
  c.episodes_eval = get_or<int>(ex, "episodes_eval", c.episodes_eval, "experiment");
  c.smoothing_window = get_or<int>(ex, "smoothing_window", c.smoothing_window, "experiment");
  c.step_cap = get_or<int>(ex, "step_cap", c.step_cap, "experiment");
  c.seed = get_or<std::uint64_t>(ex, "seed", c.seed, "experiment");
  c.eval_continue_learning = get_or<bool>(ex, "eval_continue_learning", false, "experiment");
  const std::string init = get_or<std::string>(ex, "initial_state", "all-zero", "experiment");
  if (init == "uniform") {
    c.initial_mode = InitialStateMode::Uniform;
  } else if (init != "all-zero") {
    try {
      c.initial_state = parse_levels(init);
    } catch (const std::exception& e) {
      fail("experiment.initial_state", e.what());
    }
  }

  const json est = doc.value("estimation", json::object());
  const std::string mode = get_or<std::string>(est, "mode", "error_channel", "estimation");
  if (mode == "map") {
    c.estimation = EstimationMode::Map;
  } else if (mode != "error_channel") {
    fail("estimation.mode", "expected 'error_channel' or 'map'");
  }
  c.error_rate = get_or<double>(est, "error_rate", c.error_rate, "estimation");
  c.error_rates = get_or<std::vector<double>>(est, "error_rates", c.error_rates, "estimation");
  c.study_error_rate = get_or<double>(est, "study_error_rate", c.study_error_rate, "estimation");
  if (est.contains("item_bank")) {
    const json& bank = est.at("item_bank");
    if (bank.is_string()) {
      const fs::path p = base_dir / bank.get<std::string>();
      std::istringstream in(slurp(p, "item bank"));
      c.item_bank = parse_item_bank(in, p.string(), flag_count);
    } else {
      c.item_bank = items_from_json(bank, flag_count);
    }
  }
  if (c.estimation == EstimationMode::Map && c.item_bank.empty()) {
    fail("estimation", "mode 'map' needs an item_bank");
  }
  try {
    check_config(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  json hier = {{"attributes", json::array()}, {"prerequisites", json::array()}, {"strict", parts.strict},
               {"max_states", parts.state_cap}};
  for (const auto& a : parts.attributes) hier["attributes"].push_back({{"name", a.name}, {"levels", a.levels}});
  for (const auto& e : parts.edges) {
    hier["prerequisites"].push_back({parts.attributes[e.parent].name, parts.attributes[e.child].name});
  }
  json mats = json::array();
  for (const auto& m : parts.materials) {
    mats.push_back({{"name", m.name}, {"attribute", parts.attributes[m.attribute].name}, {"level", m.level}});
  }
  parts.resolved = to_json(c);
  parts.resolved["hierarchy"] = hier;
  parts.resolved["materials"] = mats;
  parts.resolved["transitions"] = records_to_json(parts.transitions);
  return parts;
}

ConfigParts read_config_file(const fs::path& path) {
  const std::string text = slurp(path, "config file");
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

Experiment build_experiment(const ConfigParts& parts) {
  try {
    AttributeHierarchy h(parts.attributes, parts.edges, parts.strict);
    Environment env = make_environment(std::move(h), parts.materials, parts.transitions, parts.state_cap);
    Experiment exp{parts.config, std::move(env)};
    if (!exp.config.initial_state.empty() && exp.env.states.index_of(exp.config.initial_state) < 0) {
      throw ConfigError("experiment.initial_state: " + format_levels(exp.config.initial_state) +
                        " is not in the state space");
    }
    return exp;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const StateSpaceOverflow& e) {
    throw ConfigError(e.what());
  }
}

Experiment load_experiment(const fs::path& path) { return build_experiment(read_config_file(path)); }

void write_qtable(std::ostream& out, const QTable& q, const StateSpace& states) {
  out << "state";
  for (int a = 0; a < q.cols(); ++a) out << ' ' << a;
  out << '\n';
  char buf[64];
  for (int s = 0; s < q.rows(); ++s) {
    out << format_levels(states.levels(s));
    for (int a = 0; a < q.cols(); ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", q(s, a));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

QTable read_qtable(std::istream& in, const StateSpace& states, int material_count, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(source + ": empty Q-table file");
  std::istringstream header(line);
  std::string word;
  header >> word;
  if (word != "state") throw ConfigError(source + ":1: expected header starting with 'state'");
  int cols = 0, id = 0;
  while (header >> id) {
    if (id != cols) throw ConfigError(source + ":1: material ids must be 0..L-1 in order");
    ++cols;
  }
  if (cols != material_count) {
    throw ConfigError(source + ": table has " + std::to_string(cols) + " materials, config has " +
                      std::to_string(material_count));
  }
  QTable q = QTable::Zero(states.size(), material_count);
  std::vector<bool> seen(static_cast<std::size_t>(states.size()), false);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string state_text;
    if (!(ss >> state_text)) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    int s = -1;
    try {
      s = states.index_of(parse_levels(state_text));
    } catch (const std::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
    if (s < 0) throw ConfigError(where + ": state " + state_text + " is not in the state space");
    if (seen[s]) throw ConfigError(where + ": duplicate row for state " + state_text);
    seen[s] = true;
    for (int a = 0; a < material_count; ++a) {
      std::string cell;
      if (!(ss >> cell)) throw ConfigError(where + ": expected " + std::to_string(material_count) + " values");
      try {
        std::size_t used = 0;
        q(s, a) = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError(where + ": malformed value '" + cell + "'");
      }
    }
    std::string extra;
    if (ss >> extra) throw ConfigError(where + ": too many values");
  }
  for (int s = 0; s < states.size(); ++s) {
    if (!seen[s]) {
      throw ConfigError(source + ": missing row for state " + format_levels(states.levels(s)) + " (table has " +
                        "fewer states than the config)");
    }
  }
  return q;
}

}  // namespace hlm
