#include "sagin/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sagin {

void TrainConfig::validate() const {
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  if (!(discount > 0.0 && discount < 1.0)) throw std::invalid_argument("discount must be in (0, 1)");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (target_sync_steps < 1) throw std::invalid_argument("target sync interval must be >= 1");
  for (double e : {epsilon_start, epsilon_end})
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("epsilon must be in [0, 1]");
  if (!(epsilon_decay_fraction >= 0.0 && epsilon_decay_fraction <= 1.0))
    throw std::invalid_argument("epsilon decay fraction must be in [0, 1]");
  if (entropy_window < 1) throw std::invalid_argument("entropy window must be >= 1");
  if (replay_capacity < 1) throw std::invalid_argument("replay capacity must be >= 1");
  if (hidden_units < 1) throw std::invalid_argument("hidden units must be >= 1");
  if (!(grad_clip_norm > 0.0)) throw std::invalid_argument("gradient clip norm must be > 0");
  if (train_every < 1) throw std::invalid_argument("train_every must be >= 1");
}

double TrainConfig::epsilon(int episode) const {
  const double decay_episodes = epsilon_decay_fraction * episodes;
  if (decay_episodes <= 0.0 || episode >= decay_episodes) return epsilon_end;
  return epsilon_start + (epsilon_end - epsilon_start) * (static_cast<double>(episode) / decay_episodes);
}

// ---------------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_size)
    : capacity_(capacity),
      obs_size_(obs_size),
      obs_(capacity * obs_size),
      next_obs_(capacity * obs_size),
      actions_(capacity),
      rewards_(capacity),
      done_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(std::span<const double> obs, int action, double reward, std::span<const double> next_obs,
                        bool done) {
  if (obs.size() != obs_size_ || next_obs.size() != obs_size_)
    throw std::invalid_argument("transition observation size mismatch");
  std::copy(obs.begin(), obs.end(), obs_.begin() + static_cast<std::ptrdiff_t>(next_ * obs_size_));
  std::copy(next_obs.begin(), next_obs.end(), next_obs_.begin() + static_cast<std::ptrdiff_t>(next_ * obs_size_));
  actions_[next_] = action;
  rewards_[next_] = reward;
  done_[next_] = done ? 1 : 0;
  next_ = (next_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

ReplayBuffer::Batch ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (size_ == 0) throw std::logic_error("cannot sample from an empty replay buffer");
  const auto cols = static_cast<Eigen::Index>(batch_size);
  const auto rows = static_cast<Eigen::Index>(obs_size_);
  Batch b{Eigen::MatrixXd(rows, cols), Eigen::MatrixXd(rows, cols), std::vector<int>(batch_size),
          Eigen::VectorXd(cols), std::vector<std::uint8_t>(batch_size)};
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  for (std::size_t k = 0; k < batch_size; ++k) {
    const std::size_t i = pick(rng);
    const auto col = static_cast<Eigen::Index>(k);
    b.obs.col(col) = Eigen::Map<const Eigen::VectorXd>(obs_.data() + i * obs_size_, rows);
    b.next_obs.col(col) = Eigen::Map<const Eigen::VectorXd>(next_obs_.data() + i * obs_size_, rows);
    b.actions[k] = actions_[i];
    b.rewards(col) = rewards_[i];
    b.done[k] = done_[i];
  }
  return b;
}

// ---------------------------------------------------------------------------

std::vector<double> q_forward(const ValueNet& net, std::span<const double> obs) {
  const Eigen::VectorXd q = net.forward(obs);
  return {q.data(), q.data() + q.size()};
}

double q_backward(ValueNet& net, AdamOptimizer& optimizer, const ReplayBuffer::Batch& batch,
                  const ValueNet& target_net, std::span<const std::uint8_t> mask, double discount,
                  double learning_rate, double grad_clip_norm) {
  const Eigen::Index n = batch.obs.cols();
  if (n == 0) throw std::invalid_argument("empty batch");
  if (static_cast<int>(mask.size()) != net.output_size()) throw std::invalid_argument("mask size mismatch");

  Eigen::VectorXd targets = batch.rewards;
  const bool any_live = std::any_of(batch.done.begin(), batch.done.end(), [](std::uint8_t d) { return d == 0; });
  if (any_live) {
    const Eigen::MatrixXd next_q = target_net.forward_batch(batch.next_obs);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (batch.done[static_cast<std::size_t>(k)] != 0) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index a = 0; a < next_q.rows(); ++a)
        if (mask[static_cast<std::size_t>(a)] != 0) best = std::max(best, next_q(a, k));
      targets(k) += discount * best;
    }
  }

  ValueNet::Gradients grads;
  const double loss = net.loss_and_gradients(batch.obs, batch.actions, targets, grads);
  if (!std::isfinite(loss)) throw std::runtime_error("non-finite TD loss");
  const double norm = grads.norm();
  if (norm > grad_clip_norm) grads.scale(grad_clip_norm / norm);
  optimizer.apply(net, grads, learning_rate);
  return loss;
}

namespace {

std::vector<int> valid_indices(std::span<const std::uint8_t> mask) {
  std::vector<int> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] != 0) out.push_back(static_cast<int>(i));
  return out;
}

int random_valid(std::span<const std::uint8_t> mask, Rng& rng) {
  const std::vector<int> valid = valid_indices(mask);
  if (valid.empty()) throw std::invalid_argument("action mask has no valid action");
  std::uniform_int_distribution<std::size_t> pick(0, valid.size() - 1);
  return valid[pick(rng)];
}

}  // namespace

int select_action(std::span<const double> values, double epsilon, Rng& rng, std::span<const std::uint8_t> mask) {
  if (values.size() != mask.size()) throw std::invalid_argument("values and mask differ in length");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must be in [0, 1]");
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }))
    throw std::invalid_argument("action mask has no valid action");
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) return random_valid(mask, rng);
  }
  int best = -1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mask[i] == 0) continue;
    if (best < 0 || values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

int random_baseline_policy(Rng& rng, std::span<const std::uint8_t> mask) { return random_valid(mask, rng); }

double action_distribution_entropy(std::span<const int> window, int num_actions) {
  if (window.empty()) throw std::invalid_argument("entropy window is empty");
  if (num_actions < 1) throw std::invalid_argument("action count must be positive");
  std::vector<int> counts(static_cast<std::size_t>(num_actions), 0);
  for (int a : window) {
    if (a < 0 || a >= num_actions) throw std::out_of_range("action outside the action space");
    ++counts[static_cast<std::size_t>(a)];
  }
  const double n = static_cast<double>(window.size());
  double h = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    const double p = c / n;
    h -= p * std::log2(p);
  }
  return h;
}

ActionHistory::ActionHistory(int window, int num_actions)
    : window_(window), counts_(static_cast<std::size_t>(num_actions), 0) {
  if (window < 1) throw std::invalid_argument("entropy window must be >= 1");
}

void ActionHistory::push(int action) {
  actions_.push_back(action);
  ++counts_.at(static_cast<std::size_t>(action));
  if (static_cast<int>(actions_.size()) > window_) {
    --counts_[static_cast<std::size_t>(actions_.front())];
    actions_.pop_front();
  }
}

double ActionHistory::entropy_bits() const {
  if (actions_.empty()) return 0.0;
  const double n = static_cast<double>(actions_.size());
  double h = 0.0;
  for (int c : counts_) {
    if (c == 0) continue;
    const double p = c / n;
    h -= p * std::log2(p);
  }
  return h;
}

TypeNets make_nets(const Env& env, int hidden_units, Rng& rng) {
  const int in = static_cast<int>(env.observation_size());
  TypeNets nets;
  nets.gu = ValueNet({in, hidden_units, hidden_units, env.action_space(AgentType::gu).size()}, rng);
  nets.uav = ValueNet({in, hidden_units, hidden_units, env.action_space(AgentType::uav).size()}, rng);
  return nets;
}

// ---------------------------------------------------------------------------

namespace {

/// Greedy or epsilon-greedy choices for every agent holding a packet; idle
/// agents get their first valid action (they are silenced by the env).
std::vector<int> choose_actions(const Env& env, const std::vector<std::vector<double>>& obs, const TypeNets& nets,
                                double epsilon, Rng& rng, bool include_idle = false) {
  const int n = env.num_agents();
  std::vector<int> actions(static_cast<std::size_t>(n), 0);
  for (AgentType type : {AgentType::gu, AgentType::uav}) {
    const ActionSpace& space = env.action_space(type);
    const ValueNet& net = type == AgentType::gu ? nets.gu : nets.uav;
    std::vector<int> agents;
    for (int a = 0; a < n; ++a) {
      if (env.agent_type(a) != type) continue;
      if (include_idle || env.has_packet(a)) {
        agents.push_back(a);
      } else {
        actions[static_cast<std::size_t>(a)] = valid_indices(space.mask()).front();
      }
    }
    if (agents.empty()) continue;
    const auto rows = static_cast<Eigen::Index>(env.observation_size());
    Eigen::MatrixXd batch(rows, static_cast<Eigen::Index>(agents.size()));
    for (std::size_t k = 0; k < agents.size(); ++k)
      batch.col(static_cast<Eigen::Index>(k)) =
          Eigen::Map<const Eigen::VectorXd>(obs[static_cast<std::size_t>(agents[k])].data(), rows);
    const Eigen::MatrixXd q = net.forward_batch(batch);
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const auto col = q.col(static_cast<Eigen::Index>(k));
      actions[static_cast<std::size_t>(agents[k])] =
          select_action(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), epsilon, rng,
                        space.mask());
    }
  }
  return actions;
}

std::vector<ActionHistory> make_histories(const Env& env, int window) {
  std::vector<ActionHistory> out;
  for (int a = 0; a < env.num_agents(); ++a) out.emplace_back(window, env.action_space(env.agent_type(a)).size());
  return out;
}

}  // namespace

TrainResult train(const EnvConfig& env_config, const TrainConfig& config) {
  config.validate();
  Env env(env_config);
  Rng init_rng(derive_seed(config.seed, 100));
  Rng rng(derive_seed(config.seed, 101));

  TrainResult result;
  result.nets = make_nets(env, config.hidden_units, init_rng);
  TypeNets target = result.nets;
  AdamOptimizer gu_opt(result.nets.gu);
  AdamOptimizer uav_opt(result.nets.uav);
  const std::size_t obs_size = env.observation_size();
  ReplayBuffer gu_buffer(static_cast<std::size_t>(config.replay_capacity), obs_size);
  ReplayBuffer uav_buffer(static_cast<std::size_t>(config.replay_capacity), obs_size);
  std::vector<ActionHistory> histories = make_histories(env, config.entropy_window);
  const int n = env.num_agents();
  std::vector<double> entropies(static_cast<std::size_t>(n), 0.0);
  long env_steps = 0;

  for (int episode = 0; episode < config.episodes; ++episode) {
    const double epsilon = config.epsilon(episode);
    std::vector<std::vector<double>> obs = env.reset(derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(episode)));
    double loss_sum = 0.0;
    int loss_count = 0;

    while (!env.done()) {
      const std::vector<int> actions = choose_actions(env, obs, result.nets, epsilon, rng);
      std::vector<std::uint8_t> acting(static_cast<std::size_t>(n), 0);
      for (int a = 0; a < n; ++a) {
        if (!env.has_packet(a)) continue;
        acting[static_cast<std::size_t>(a)] = 1;
        histories[static_cast<std::size_t>(a)].push(actions[static_cast<std::size_t>(a)]);
        entropies[static_cast<std::size_t>(a)] = histories[static_cast<std::size_t>(a)].entropy_bits();
      }
      StepResult step = env.step(env.profile_from_actions(actions), entropies);

      for (int a = 0; a < n; ++a) {
        const auto i = static_cast<std::size_t>(a);
        if (acting[i] == 0) continue;
        const bool is_gu = env.agent_type(a) == AgentType::gu;
        const bool done = step.done || (is_gu && !env.has_packet(a));
        (is_gu ? gu_buffer : uav_buffer).push(obs[i], actions[i], step.reward.total, step.observations[i], done);
      }
      obs = std::move(step.observations);
      ++env_steps;

      if (env_steps % config.train_every != 0) continue;
      for (AgentType type : {AgentType::gu, AgentType::uav}) {
        ReplayBuffer& buffer = type == AgentType::gu ? gu_buffer : uav_buffer;
        if (buffer.size() < static_cast<std::size_t>(config.batch_size)) continue;
        const ReplayBuffer::Batch batch = buffer.sample(static_cast<std::size_t>(config.batch_size), rng);
        double loss = 0.0;
        try {
          loss = q_backward(type == AgentType::gu ? result.nets.gu : result.nets.uav,
                            type == AgentType::gu ? gu_opt : uav_opt, batch,
                            type == AgentType::gu ? target.gu : target.uav, env.action_space(type).mask(),
                            config.discount, config.learning_rate, config.grad_clip_norm);
        } catch (const std::runtime_error& e) {
          throw TrainingDiverged(std::string(e.what()) + " (seed " + std::to_string(config.seed) + ", episode " +
                                     std::to_string(episode) + ")",
                                 config.seed, episode);
        }
        loss_sum += loss;
        ++loss_count;
        ++result.gradient_steps;
        if (result.gradient_steps % config.target_sync_steps == 0) target = result.nets;
      }
    }

    EpisodeRecord record;
    record.episode = episode;
    record.episode_return = env.stats().episode_return;
    record.normalized_reward = normalize_return(record.episode_return, env.return_bounds());
    record.epsilon = epsilon;
    record.loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    result.curve.push_back(record);
  }
  return result;
}

// ---------------------------------------------------------------------------

double Metrics::mean_normalized_reward() const {
  if (normalized_rewards.empty()) return 0.0;
  return std::accumulate(normalized_rewards.begin(), normalized_rewards.end(), 0.0) /
         static_cast<double>(normalized_rewards.size());
}

JointPolicy greedy_policy(const TypeNets& nets, double epsilon) {
  return [nets, epsilon](const Env& env, const std::vector<std::vector<double>>& obs, Rng& rng) {
    return choose_actions(env, obs, nets, epsilon, rng);
  };
}

JointPolicy uniform_random_policy() {
  return [](const Env& env, const std::vector<std::vector<double>>&, Rng& rng) {
    std::vector<int> actions(static_cast<std::size_t>(env.num_agents()));
    for (int a = 0; a < env.num_agents(); ++a)
      actions[static_cast<std::size_t>(a)] = random_baseline_policy(rng, env.action_space(env.agent_type(a)).mask());
    return actions;
  };
}

std::vector<int> greedy_joint_actions(const Env& env, const std::vector<std::vector<double>>& obs,
                                      const TypeNets& nets) {
  Rng unused(0);
  return choose_actions(env, obs, nets, 0.0, unused, true);
}

Metrics evaluate(const EnvConfig& env_config, const JointPolicy& policy, int episodes, std::uint64_t seed,
                 const EvalOptions& options) {
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  Env env(env_config);
  env.set_trajectory_log(options.trajectory_log);
  env.set_radio_debug_log(options.radio_debug_log);
  const int entropy_window = options.entropy_window;
  Rng rng(derive_seed(seed, 102));
  std::vector<ActionHistory> histories = make_histories(env, entropy_window);
  const int n = env.num_agents();
  std::vector<double> entropies(static_cast<std::size_t>(n), 0.0);

  Metrics m;
  m.episodes = episodes;
  double gu_bits = 0.0;
  double uav_bits = 0.0;
  double rate_sum = 0.0;
  double rate_sq = 0.0;
  long steps = 0;
  for (int episode = 0; episode < episodes; ++episode) {
    std::vector<std::vector<double>> obs = env.reset(derive_seed(seed, 2000 + static_cast<std::uint64_t>(episode)));
    while (!env.done()) {
      const std::vector<int> actions = policy(env, obs, rng);
      for (int a = 0; a < n; ++a) {
        if (!env.has_packet(a)) continue;
        histories[static_cast<std::size_t>(a)].push(actions[static_cast<std::size_t>(a)]);
        entropies[static_cast<std::size_t>(a)] = histories[static_cast<std::size_t>(a)].entropy_bits();
      }
      StepResult step = env.step(env.profile_from_actions(actions), entropies);
      rate_sum += step.info.sum_rate_bps;
      rate_sq += step.info.sum_rate_bps * step.info.sum_rate_bps;
      ++steps;
      obs = std::move(step.observations);
    }
    const EpisodeStats& s = env.stats();
    m.normalized_rewards.push_back(normalize_return(s.episode_return, env.return_bounds()));
    gu_bits += s.gu_bits_sent;
    uav_bits += s.uav_bits_sent;
    m.gu_generated += s.gu_generated;
    m.uav_generated += s.uav_generated;
    m.gu_delivered += s.gu_delivered;
    m.uav_delivered += s.uav_delivered;
  }
  if (episodes > 0) {
    const double window_s = env_config.deadline_steps * env_config.step_s * episodes;
    m.gu_rate_mbps = gu_bits / (window_s * env_config.scenario.num_gus) / 1e6;
    m.uav_rate_mbps = uav_bits / (window_s * env_config.scenario.num_uavs) / 1e6;
  }
  m.gu_success = m.gu_generated > 0 ? static_cast<double>(m.gu_delivered) / m.gu_generated : 0.0;
  m.uav_success = m.uav_generated > 0 ? static_cast<double>(m.uav_delivered) / m.uav_generated : 0.0;
  if (steps > 0) {
    m.sum_rate_bps = rate_sum / static_cast<double>(steps);
    const double var = std::max(0.0, rate_sq / static_cast<double>(steps) - m.sum_rate_bps * m.sum_rate_bps);
    m.sum_rate_stderr_bps = std::sqrt(var / static_cast<double>(steps));
  }
  return m;
}

Metrics evaluate(const EnvConfig& env_config, const TypeNets& nets, int episodes, std::uint64_t seed,
                 const EvalOptions& options) {
  return evaluate(env_config, greedy_policy(nets), episodes, seed, options);
}

}  // namespace sagin
