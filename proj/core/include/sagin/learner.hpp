#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sagin/env.hpp"
#include "sagin/nn.hpp"
#include "sagin/random.hpp"

namespace sagin {

struct TrainConfig {
  int episodes = 1000;
  double discount = 0.95;
  double learning_rate = 1e-3;
  int batch_size = 64;
  int target_sync_steps = 200;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.6;
  int entropy_window = 200;
  int replay_capacity = 50000;
  int hidden_units = 64;
  double grad_clip_norm = 10.0;
  // Environment steps between gradient updates.
  int train_every = 1;
  std::uint64_t seed = 0;

  void validate() const;
  [[nodiscard]] double epsilon(int episode) const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::uint64_t seed, int episode)
      : std::runtime_error(what), seed_(seed), episode_(episode) {}
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] int episode() const { return episode_; }

 private:
  std::uint64_t seed_;
  int episode_;
};

class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t obs_size);

  void push(std::span<const double> obs, int action, double reward, std::span<const double> next_obs, bool done);
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] std::size_t obs_size() const { return obs_size_; }

  struct Batch {
    Eigen::MatrixXd obs;       // obs_size x B
    Eigen::MatrixXd next_obs;  // obs_size x B
    std::vector<int> actions;
    Eigen::VectorXd rewards;
    std::vector<std::uint8_t> done;
  };
  /// Uniform sampling with replacement.
  [[nodiscard]] Batch sample(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t obs_size_;
  std::size_t next_ = 0;
  std::size_t size_ = 0;
  std::vector<double> obs_;
  std::vector<double> next_obs_;
  std::vector<int> actions_;
  std::vector<double> rewards_;
  std::vector<std::uint8_t> done_;
};

std::vector<double> q_forward(const ValueNet& net, std::span<const double> obs);

/// One gradient step on the mean squared TD error with targets
/// y = r + discount * max over valid a' of Q_target(s', a') (y = r when done).
/// Returns the pre-update loss.
double q_backward(ValueNet& net, AdamOptimizer& optimizer, const ReplayBuffer::Batch& batch,
                  const ValueNet& target_net, std::span<const std::uint8_t> mask, double discount,
                  double learning_rate, double grad_clip_norm = 10.0);

/// Epsilon-greedy over valid actions; ties go to the lowest index.
int select_action(std::span<const double> values, double epsilon, Rng& rng, std::span<const std::uint8_t> mask);

int random_baseline_policy(Rng& rng, std::span<const std::uint8_t> mask);

double action_distribution_entropy(std::span<const int> window, int num_actions);

/// Sliding window of recent actions with O(1) count updates.
class ActionHistory {
 public:
  ActionHistory(int window, int num_actions);
  void push(int action);
  [[nodiscard]] double entropy_bits() const;
  [[nodiscard]] std::size_t size() const { return actions_.size(); }

 private:
  int window_;
  std::deque<int> actions_;
  std::vector<int> counts_;
};

struct TypeNets {
  ValueNet gu;
  ValueNet uav;
};

TypeNets make_nets(const Env& env, int hidden_units, Rng& rng);

struct EpisodeRecord {
  int episode = 0;
  double normalized_reward = 0.0;
  double episode_return = 0.0;
  double epsilon = 0.0;
  double loss = 0.0;  // mean over this episode's gradient steps, 0 if none
};

struct TrainResult {
  TypeNets nets;
  std::vector<EpisodeRecord> curve;
  long gradient_steps = 0;
};

TrainResult train(const EnvConfig& env_config, const TrainConfig& config);

struct Metrics {
  int episodes = 0;
  std::vector<double> normalized_rewards;
  double gu_rate_mbps = 0.0;
  double uav_rate_mbps = 0.0;
  double gu_success = 0.0;
  double uav_success = 0.0;
  int gu_generated = 0;
  int uav_generated = 0;
  int gu_delivered = 0;
  int uav_delivered = 0;
  // Mean over all steps of the instantaneous sum rate, and its standard error.
  double sum_rate_bps = 0.0;
  double sum_rate_stderr_bps = 0.0;

  [[nodiscard]] double mean_normalized_reward() const;
};

/// Chooses one action index per agent for the current environment state.
using JointPolicy = std::function<std::vector<int>(const Env& env, const std::vector<std::vector<double>>& obs, Rng& rng)>;

JointPolicy greedy_policy(const TypeNets& nets, double epsilon = 0.0);
JointPolicy uniform_random_policy();

/// Greedy action for every agent, including agents with nothing to send.
std::vector<int> greedy_joint_actions(const Env& env, const std::vector<std::vector<double>>& obs,
                                      const TypeNets& nets);

struct EvalOptions {
  int entropy_window = 200;
  std::ostream* trajectory_log = nullptr;
  std::ostream* radio_debug_log = nullptr;
};

/// Rolls out `episodes` episodes with seeds derived from `seed`.
Metrics evaluate(const EnvConfig& env_config, const JointPolicy& policy, int episodes, std::uint64_t seed,
                 const EvalOptions& options = {});
Metrics evaluate(const EnvConfig& env_config, const TypeNets& nets, int episodes, std::uint64_t seed,
                 const EvalOptions& options = {});

}  // namespace sagin
