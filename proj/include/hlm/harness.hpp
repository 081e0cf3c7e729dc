#pragma once

// Experiment orchestration: episodes, training, policy comparison, error
// sweeps, initial-state studies and the CSV outputs built from them.

#include "hlm/agents.hpp"
#include "hlm/environment.hpp"
#include "hlm/hierarchy.hpp"
#include "hlm/psychometrics.hpp"
#include "hlm/rng.hpp"

#include <cmath>
#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hlm {

// Everything the learner simulation needs; immutable once built.
struct Environment {
  AttributeHierarchy hierarchy;
  StateSpace states;
  std::vector<LearningMaterial> materials;
  TransitionModel model;

  int material_count() const { return static_cast<int>(materials.size()); }
};

// Throws std::invalid_argument listing every violation when the model fails
// validate_transition_model.
Environment make_environment(AttributeHierarchy hierarchy, std::vector<LearningMaterial> materials,
                             const std::vector<TransitionRecord>& records,
                             std::size_t state_cap = kDefaultStateCap);

enum class EstimationMode { ErrorChannel, Map };

// How the system observes the learner's state after each step.
class Estimator {
 public:
  static Estimator exact();
  static Estimator channel(double error_rate);
  static Estimator map(ItemBank bank, std::vector<double> prior = {});

  int estimate(const Environment& env, int true_state, Rng& rng) const;

  EstimationMode mode() const { return mode_; }
  double error_rate() const { return error_rate_; }

 private:
  EstimationMode mode_ = EstimationMode::ErrorChannel;
  double error_rate_ = 0.0;
  ItemBank bank_;
  std::vector<double> prior_;
};

enum class InitialStateMode { Fixed, Uniform };

struct ExperimentConfig {
  Hyperparams hyperparams;
  int episodes_train = 5000;
  int episodes_eval = 1000;
  int smoothing_window = 20;
  int step_cap = 200;
  double error_rate = 0.0;  // used for training and compare
  std::vector<double> error_rates{0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10};
  double study_error_rate = 0.05;
  EstimationMode estimation = EstimationMode::ErrorChannel;
  ItemBank item_bank;
  InitialStateMode initial_mode = InitialStateMode::Fixed;
  Levels initial_state;  // empty means all-zero
  std::uint64_t seed = 20190417;
  bool eval_continue_learning = false;
  int jobs = 1;
};

// Throws std::invalid_argument on out-of-domain fields.
void check_config(const ExperimentConfig& config);

struct Experiment {
  ExperimentConfig config;
  Environment env;

  Estimator estimator(double error_rate) const;
};

struct EpisodeRecord {
  int episode = 0;
  int initial_state = 0;
  long long reward_tenths = 0;
  int length = 0;
  bool truncated = false;
  std::vector<int> trace;  // true states visited, filled on request

  double reward() const { return static_cast<double>(reward_tenths) / 10.0; }
};

struct EpisodeStreams {
  Rng environment;
  Rng estimation;
  Rng policy;
};

EpisodeStreams episode_streams(std::uint64_t root, Stream stream, std::uint64_t episode);

template <typename P>
concept EpisodePolicy = requires(P p, int s, Rng& rng, double r, bool b) {
  { p.act(s, rng) } -> std::convertible_to<int>;
  p.observe(s, s, r, s, b);
};

// Acts on the estimated state; dynamics and reward run on the true state.
// When the estimate claims full mastery while the learner is not done, a
// material is drawn uniformly and no update is made.
template <EpisodePolicy Policy>
EpisodeRecord run_episode(const Environment& env, const Estimator& estimator, Policy& policy,
                          int initial_state, int step_cap, EpisodeStreams& rng, bool keep_trace = false) {
  const StateSpace& states = env.states;
  EpisodeRecord rec;
  rec.initial_state = initial_state;
  int state = initial_state;
  if (keep_trace) rec.trace.push_back(state);
  if (states.is_terminal(state)) return rec;

  int observed = estimator.estimate(env, state, rng.estimation);
  for (int t = 0; t < step_cap; ++t) {
    const bool blind = states.is_terminal(observed);
    const int action = blind ? static_cast<int>(uniform_index(rng.policy, env.materials.size()))
                             : policy.act(observed, rng.policy);
    const int next = step(env.model, states, state, action, rng.environment);
    const long long r = reward_tenths(states.mastered(state), states.mastered(next), t);
    rec.reward_tenths += r;
    rec.length = t + 1;
    if (keep_trace) rec.trace.push_back(next);

    const bool done = states.is_terminal(next);
    const int observed_next = done ? next : estimator.estimate(env, next, rng.estimation);
    if (!blind) policy.observe(observed, action, static_cast<double>(r) / 10.0, observed_next, done);
    state = next;
    observed = observed_next;
    if (done) return rec;
  }
  rec.truncated = true;
  return rec;
}

// Epsilon-greedy over a table it does not own.
struct QPolicy {
  QTable* q = nullptr;
  double epsilon = 0.0;
  double beta = 0.0;
  double gamma = 0.99;
  bool learn = false;

  int act(int state, Rng& rng) { return select_action(*q, state, epsilon, rng); }
  void observe(int s, int a, double r, int next, bool next_terminal) {
    if (learn) q_update(*q, s, a, r, next, next_terminal, beta, gamma);
  }
};

struct HeuristicPolicy {
  const Environment* env = nullptr;

  int act(int state, Rng& rng) {
    return heuristic_policy(env->hierarchy, env->states, env->materials, state, rng);
  }
  void observe(int, int, double, int, bool) {}
};

struct TrainOptions {
  double error_rate = 0.0;
  std::optional<int> initial_state;  // overrides the config's initial-state mode
  std::uint64_t root_seed = 0;
  bool keep_trace = false;
};

struct TrainingResult {
  QTable q;
  Hyperparams final_hyperparams;
  std::vector<EpisodeRecord> records;
};

// Sequential Q-learning; hyperparameters decay once per episode.
TrainingResult train(const Experiment& exp, const TrainOptions& options);
TrainingResult train(const Experiment& exp);

int draw_initial_state(const Experiment& exp, Rng& rng);

struct SummaryMetrics {
  std::string method;
  double error_rate = 0.0;
  double reward_mean = 0.0;
  double reward_sd = 0.0;
  double el_mean = 0.0;
  double el_sd = 0.0;
  int n_episodes = 0;
};

SummaryMetrics summarize(const std::string& method, double error_rate,
                         const std::vector<EpisodeRecord>& records);

struct ComparisonResult {
  double error_rate = 0.0;
  std::vector<EpisodeRecord> rl;
  std::vector<EpisodeRecord> heuristic;
  SummaryMetrics rl_summary;
  SummaryMetrics heuristic_summary;
};

// Paired evaluation: episode i uses the same initial state and the same
// environment stream for both methods.
ComparisonResult compare(const Experiment& exp, const QTable& q, double error_rate);

std::vector<ComparisonResult> error_sweep(const Experiment& exp, const QTable& q,
                                          const std::vector<double>& rates);

struct StudySeries {
  int initial_state = 0;
  std::vector<double> rewards;
  std::vector<double> smoothed;
  std::vector<int> lengths;
  double mean_length = 0.0;
  double stabilization_ratio = 0.0;
};

// Trains from each non-terminal initial state at the study error rate.
std::vector<StudySeries> initial_state_study(const Experiment& exp);

// Trailing moving average; the first window-1 entries average the prefix.
template <typename Scalar>
std::vector<Scalar> smooth(const std::vector<Scalar>& series, int window) {
  if (series.empty()) throw std::invalid_argument("cannot smooth an empty series");
  if (window < 1) throw std::invalid_argument("smoothing window must be >= 1");
  std::vector<Scalar> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t n = std::min<std::size_t>(i + 1, window);
    Scalar sum = 0;
    for (std::size_t j = i + 1 - n; j <= i; ++j) sum += series[j];
    out[i] = sum / static_cast<Scalar>(n);
  }
  return out;
}

// Sample (n-1) standard deviation; zero for fewer than two values.
template <typename Scalar>
Scalar sample_sd(const Scalar* first, std::size_t n) {
  if (n < 2) return Scalar(0);
  Scalar mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += first[i];
  mean /= static_cast<Scalar>(n);
  Scalar ss = 0;
  for (std::size_t i = 0; i < n; ++i) ss += (first[i] - mean) * (first[i] - mean);
  return std::sqrt(ss / static_cast<Scalar>(n - 1));
}

// SD of series[episode-window, episode) with 1-based episode numbering.
template <typename Scalar>
Scalar trailing_sd(const std::vector<Scalar>& series, std::size_t episode, std::size_t window) {
  if (episode > series.size() || episode == 0) throw std::out_of_range("episode outside the series");
  const std::size_t n = std::min(window, episode);
  return sample_sd(series.data() + (episode - n), n);
}

// trailing_sd at episode 500 over trailing_sd at episode 100 (window 100).
double stabilization_ratio(const std::vector<double>& smoothed, std::size_t early = 100,
                           std::size_t late = 500, std::size_t window = 100);

// CSV emission; floats with six decimals.
void write_episodes_header(std::ostream& out);
void write_episodes_rows(std::ostream& out, const std::string& run_id, const std::string& method,
                         double error_rate, const std::vector<EpisodeRecord>& records,
                         const StateSpace& states);
void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const std::string& run_id, const SummaryMetrics& m);
std::string format_fixed6(double value);

struct EpisodeCsvRow {
  std::string run_id;
  std::string method;
  double error_rate = 0.0;
  int episode = 0;
  std::string initial_state;
  double reward = 0.0;
  int length = 0;
  bool truncated = false;
};

std::vector<EpisodeCsvRow> read_episodes_csv(std::istream& in);

}  // namespace hlm
