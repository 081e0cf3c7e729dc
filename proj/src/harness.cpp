#include "hlm/harness.hpp"

#include <cstdio>
#include <functional>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hlm {

Environment make_environment(AttributeHierarchy hierarchy, std::vector<LearningMaterial> materials,
                             const std::vector<TransitionRecord>& records, std::size_t state_cap) {
  check_materials(hierarchy, materials);
  StateSpace states = enumerate_states(hierarchy, state_cap);
  TransitionModel model = model_from_records(states, static_cast<int>(materials.size()), records);
  const auto violations = validate_transition_model(model, hierarchy, states, materials);
  if (!violations.empty()) {
    std::string msg = "transition model failed validation:";
    for (const auto& v : violations) msg += "\n  " + describe(v, states);
    throw std::invalid_argument(msg);
  }
  return Environment{std::move(hierarchy), std::move(states), std::move(materials), std::move(model)};
}

Estimator Estimator::exact() { return channel(0.0); }

Estimator Estimator::channel(double error_rate) {
  if (!(error_rate >= 0.0 && error_rate <= 0.5)) {
    throw std::invalid_argument("error rate must lie in [0, 0.5]");
  }
  Estimator e;
  e.mode_ = EstimationMode::ErrorChannel;
  e.error_rate_ = error_rate;
  return e;
}

Estimator Estimator::map(ItemBank bank, std::vector<double> prior) {
  if (bank.empty()) throw std::invalid_argument("MAP estimation needs a non-empty item bank");
  for (const auto& item : bank) check_item(item);
  Estimator e;
  e.mode_ = EstimationMode::Map;
  e.bank_ = std::move(bank);
  e.prior_ = std::move(prior);
  return e;
}

int Estimator::estimate(const Environment& env, int true_state, Rng& rng) const {
  if (mode_ == EstimationMode::ErrorChannel) {
    return error_channel(true_state, error_rate_, env.states.size(), rng);
  }
  const ResponseVector x = simulate_responses(bank_, env.states.profile(true_state), rng);
  return map_estimate(x, bank_, env.states, prior_);
}

void check_config(const ExperimentConfig& c) {
  check_hyperparams(c.hyperparams);
  if (c.episodes_train < 1 || c.episodes_eval < 1) throw std::invalid_argument("episode counts must be >= 1");
  if (c.smoothing_window < 1) throw std::invalid_argument("smoothing window must be >= 1");
  if (c.step_cap < 1) throw std::invalid_argument("step cap must be >= 1");
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 0.5; };
  if (!rate_ok(c.error_rate) || !rate_ok(c.study_error_rate)) {
    throw std::invalid_argument("error rates must lie in [0, 0.5]");
  }
  for (double r : c.error_rates) {
    if (!rate_ok(r)) throw std::invalid_argument("error rates must lie in [0, 0.5]");
  }
  if (c.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
}

Estimator Experiment::estimator(double error_rate) const {
  if (config.estimation == EstimationMode::Map) return Estimator::map(config.item_bank);
  return Estimator::channel(error_rate);
}

EpisodeStreams episode_streams(std::uint64_t root, Stream stream, std::uint64_t episode) {
  return {make_rng(root, stream, episode, Role::Environment), make_rng(root, stream, episode, Role::Estimation),
          make_rng(root, stream, episode, Role::Policy)};
}

int draw_initial_state(const Experiment& exp, Rng& rng) {
  const StateSpace& states = exp.env.states;
  if (exp.config.initial_mode == InitialStateMode::Uniform) {
    // Non-terminal states are 0..size-2 in canonical order.
    return static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(states.size() - 1)));
  }
  if (exp.config.initial_state.empty()) return states.initial();
  const int s = states.index_of(exp.config.initial_state);
  if (s < 0) throw std::invalid_argument("initial state " + format_levels(exp.config.initial_state) + " is not admissible");
  return s;
}

TrainingResult train(const Experiment& exp) {
  TrainOptions opt;
  opt.error_rate = exp.config.error_rate;
  opt.root_seed = exp.config.seed;
  return train(exp, opt);
}

TrainingResult train(const Experiment& exp, const TrainOptions& options) {
  const Environment& env = exp.env;
  const ExperimentConfig& cfg = exp.config;
  const Estimator estimator = exp.estimator(options.error_rate);

  Rng init_rng = make_rng(options.root_seed, Stream::QInit, 0, Role::Initial);
  TrainingResult result;
  result.q = init_qtable(env.states.size(), env.material_count(), env.states.terminal(), init_rng,
                         cfg.hyperparams.init_low, cfg.hyperparams.init_high);
  result.records.reserve(static_cast<std::size_t>(cfg.episodes_train));

  Hyperparams hp = cfg.hyperparams;
  QPolicy policy{&result.q, hp.exploration, hp.learning_rate, hp.discount, true};
  for (int e = 0; e < cfg.episodes_train; ++e) {
    Rng start_rng = make_rng(options.root_seed, Stream::Train, static_cast<std::uint64_t>(e), Role::Initial);
    const int start = options.initial_state ? *options.initial_state : draw_initial_state(exp, start_rng);
    EpisodeStreams streams = episode_streams(options.root_seed, Stream::Train, static_cast<std::uint64_t>(e));
    policy.epsilon = hp.exploration;
    policy.beta = hp.learning_rate;
    EpisodeRecord rec = run_episode(env, estimator, policy, start, cfg.step_cap, streams, options.keep_trace);
    rec.episode = e;
    result.records.push_back(std::move(rec));
    hp = decay(hp);
  }
  result.final_hyperparams = hp;
  return result;
}

SummaryMetrics summarize(const std::string& method, double error_rate, const std::vector<EpisodeRecord>& records) {
  SummaryMetrics m;
  m.method = method;
  m.error_rate = error_rate;
  m.n_episodes = static_cast<int>(records.size());
  std::vector<double> rewards, lengths;
  rewards.reserve(records.size());
  lengths.reserve(records.size());
  for (const auto& r : records) {
    rewards.push_back(r.reward());
    lengths.push_back(static_cast<double>(r.length));
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  m.reward_mean = mean(rewards);
  m.el_mean = mean(lengths);
  m.reward_sd = sample_sd(rewards.data(), rewards.size());
  m.el_sd = sample_sd(lengths.data(), lengths.size());
  return m;
}

ComparisonResult compare(const Experiment& exp, const QTable& q, double error_rate) {
  const Environment& env = exp.env;
  const ExperimentConfig& cfg = exp.config;
  if (q.rows() != env.states.size() || q.cols() != env.material_count()) {
    throw std::invalid_argument("Q-table is " + std::to_string(q.rows()) + "x" + std::to_string(q.cols()) +
                                ", environment needs " + std::to_string(env.states.size()) + "x" +
                                std::to_string(env.material_count()));
  }
  const Estimator estimator = exp.estimator(error_rate);

  QTable table = q;
  QPolicy rl{&table, 0.0, 0.0, cfg.hyperparams.discount, cfg.eval_continue_learning};
  if (cfg.eval_continue_learning) {
    rl.beta = cfg.hyperparams.learning_rate * std::pow(cfg.hyperparams.learn_decay, cfg.episodes_train);
  }
  HeuristicPolicy heuristic{&env};

  ComparisonResult out;
  out.error_rate = error_rate;
  out.rl.reserve(static_cast<std::size_t>(cfg.episodes_eval));
  out.heuristic.reserve(static_cast<std::size_t>(cfg.episodes_eval));
  for (int e = 0; e < cfg.episodes_eval; ++e) {
    const auto idx = static_cast<std::uint64_t>(e);
    Rng start_rng = make_rng(cfg.seed, Stream::Eval, idx, Role::Initial);
    const int start = draw_initial_state(exp, start_rng);

    EpisodeStreams a = episode_streams(cfg.seed, Stream::Eval, idx);
    EpisodeRecord ra = run_episode(env, estimator, rl, start, cfg.step_cap, a);
    ra.episode = e;
    out.rl.push_back(std::move(ra));

    EpisodeStreams b = episode_streams(cfg.seed, Stream::Eval, idx);
    EpisodeRecord rb = run_episode(env, estimator, heuristic, start, cfg.step_cap, b);
    rb.episode = e;
    out.heuristic.push_back(std::move(rb));
  }
  out.rl_summary = summarize("rl", error_rate, out.rl);
  out.heuristic_summary = summarize("heuristic", error_rate, out.heuristic);
  return out;
}

namespace {

// Runs task(i) for i in [0, n) on up to `jobs` threads; results keyed by i.
template <typename T>
std::vector<T> run_cells(int n, int jobs, const std::function<T(int)>& task) {
  std::vector<T> out(static_cast<std::size_t>(n));
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) out[i] = task(i);
    return out;
  }
  for (int begin = 0; begin < n; begin += jobs) {
    const int end = std::min(n, begin + jobs);
    std::vector<std::future<T>> pending;
    for (int i = begin; i < end; ++i) pending.push_back(std::async(std::launch::async, task, i));
    for (int i = begin; i < end; ++i) out[i] = pending[i - begin].get();
  }
  return out;
}

}  // namespace

std::vector<ComparisonResult> error_sweep(const Experiment& exp, const QTable& q, const std::vector<double>& rates) {
  return run_cells<ComparisonResult>(static_cast<int>(rates.size()), exp.config.jobs,
                                     [&](int i) { return compare(exp, q, rates[i]); });
}

double stabilization_ratio(const std::vector<double>& smoothed, std::size_t early, std::size_t late,
                           std::size_t window) {
  const double sd_early = trailing_sd(smoothed, early, window);
  const double sd_late = trailing_sd(smoothed, late, window);
  if (sd_early == 0.0) return sd_late == 0.0 ? 0.0 : INFINITY;
  return sd_late / sd_early;
}

std::vector<StudySeries> initial_state_study(const Experiment& exp) {
  const int n = exp.env.states.size() - 1;  // every state but the terminal one
  return run_cells<StudySeries>(n, exp.config.jobs, [&](int s) {
    TrainOptions opt;
    opt.error_rate = exp.config.study_error_rate;
    opt.initial_state = s;
    opt.root_seed = derive_seed(exp.config.seed, Stream::Study, static_cast<std::uint64_t>(s));
    const TrainingResult tr = train(exp, opt);

    StudySeries series;
    series.initial_state = s;
    double total_length = 0.0;
    for (const auto& r : tr.records) {
      series.rewards.push_back(r.reward());
      series.lengths.push_back(r.length);
      total_length += r.length;
    }
    series.mean_length = total_length / static_cast<double>(tr.records.size());
    series.smoothed = smooth(series.rewards, exp.config.smoothing_window);
    if (series.smoothed.size() >= 500) series.stabilization_ratio = stabilization_ratio(series.smoothed);
    return series;
  });
}

std::string format_fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

void write_episodes_header(std::ostream& out) {
  out << "run_id,method,error_rate,episode,initial_state,reward,length,truncated\n";
}

void write_episodes_rows(std::ostream& out, const std::string& run_id, const std::string& method,
                         double error_rate, const std::vector<EpisodeRecord>& records, const StateSpace& states) {
  for (const auto& r : records) {
    out << run_id << ',' << method << ',' << format_fixed6(error_rate) << ',' << r.episode << ','
        << format_levels(states.levels(r.initial_state)) << ',' << format_fixed6(r.reward()) << ',' << r.length
        << ',' << (r.truncated ? 1 : 0) << '\n';
  }
}

void write_summary_header(std::ostream& out) {
  out << "run_id,method,error_rate,reward_mean,reward_sd,el_mean,el_sd,n_episodes\n";
}

void write_summary_row(std::ostream& out, const std::string& run_id, const SummaryMetrics& m) {
  out << run_id << ',' << m.method << ',' << format_fixed6(m.error_rate) << ',' << format_fixed6(m.reward_mean)
      << ',' << format_fixed6(m.reward_sd) << ',' << format_fixed6(m.el_mean) << ',' << format_fixed6(m.el_sd) << ','
      << m.n_episodes << '\n';
}

std::vector<EpisodeCsvRow> read_episodes_csv(std::istream& in) {
  std::vector<EpisodeCsvRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw std::runtime_error("episodes.csv line " + std::to_string(line_no) + ": expected 8 fields");
    EpisodeCsvRow r;
    r.run_id = f[0];
    r.method = f[1];
    r.error_rate = std::stod(f[2]);
    r.episode = std::stoi(f[3]);
    r.initial_state = f[4];
    r.reward = std::stod(f[5]);
    r.length = std::stoi(f[6]);
    r.truncated = f[7] == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace hlm
