#include "hdnf/matd3.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hdnf/errors.hpp"

namespace hdnf {

using nets::Adam;
using nets::Mlp;

namespace {

constexpr int kEncoderInput = kObsDims + kPooledFeatures;  // 320
constexpr int kEncoderFeatures = 128;
constexpr int kHeadInput = kEncoderFeatures + 1;  // + layer indicator

// Rows: [flat observation of `agent` | pooled grid features].
Eigen::MatrixXd encoder_inputs(const std::vector<const Transition*>& batch,
                               int agent, bool next) {
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd x(b, kEncoderInput);
  for (Eigen::Index j = 0; j < b; ++j) {
    const Transition& t = *batch[j];
    x.block(j, 0, 1, kObsDims) =
        next ? t.next_obs.row(agent) : t.obs.row(agent);
    x.block(j, kObsDims, 1, kPooledFeatures) =
        (next ? t.next_pooled : t.pooled).transpose();
  }
  return x;
}

Eigen::MatrixXd head_inputs(const Eigen::MatrixXd& features,
                            const std::vector<const Transition*>& batch,
                            int agent, bool next) {
  Eigen::MatrixXd x(features.rows(), kHeadInput);
  x.leftCols(kEncoderFeatures) = features;
  for (Eigen::Index j = 0; j < features.rows(); ++j) {
    const Transition& t = *batch[j];
    x(j, kEncoderFeatures) = next ? t.next_obs(agent, kLayerIndicatorIndex)
                                  : t.obs(agent, kLayerIndicatorIndex);
  }
  return x;
}

// In place: motion columns through tanh, gate column through the logistic.
void squash(Eigen::MatrixXd& raw) {
  raw.leftCols(3) = raw.leftCols(3).array().tanh().matrix();
  raw.col(3) = (1.0 / (1.0 + (-raw.col(3).array()).exp())).matrix();
}

// [obs agent-major | pooled | actions agent-major].
Eigen::MatrixXd critic_inputs(const std::vector<const Transition*>& batch,
                              bool next,
                              const Eigen::MatrixXd* actions_override,
                              int n_agents) {
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  const int obs_span = n_agents * kObsDims;
  const int act_base = obs_span + kPooledFeatures;
  Eigen::MatrixXd x(b, act_base + n_agents * kActionDims);
  for (Eigen::Index j = 0; j < b; ++j) {
    const Transition& t = *batch[j];
    const Eigen::MatrixXd& obs = next ? t.next_obs : t.obs;
    for (int i = 0; i < n_agents; ++i) {
      x.block(j, i * kObsDims, 1, kObsDims) = obs.row(i);
    }
    x.block(j, obs_span, 1, kPooledFeatures) =
        (next ? t.next_pooled : t.pooled).transpose();
    if (actions_override == nullptr) {
      for (int i = 0; i < n_agents; ++i) {
        x.block(j, act_base + i * kActionDims, 1, kActionDims) =
            t.actions.row(i);
      }
    }
  }
  if (actions_override != nullptr) {
    x.rightCols(n_agents * kActionDims) = *actions_override;
  }
  return x;
}

void scale_grads(Mlp::Grads& grads, double factor) {
  for (Mlp::Layer& g : grads) {
    g.w *= factor;
    g.b *= factor;
  }
}

void accumulate_grads(Mlp::Grads& into, const Mlp::Grads& add) {
  for (std::size_t l = 0; l < into.size(); ++l) {
    into[l].w += add[l].w;
    into[l].b += add[l].b;
  }
}

bool grads_finite(const Mlp::Grads& grads) {
  for (const Mlp::Layer& g : grads) {
    if (!g.w.allFinite() || !g.b.allFinite()) return false;
  }
  return true;
}

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  std::string bad;
  auto flag = [&bad](bool ok, const char* what) {
    if (!ok) {
      if (!bad.empty()) bad += "; ";
      bad += what;
    }
  };
  flag(episodes >= 1, "episodes >= 1");
  flag(steps_per_episode >= 1, "steps_per_episode >= 1");
  flag(gamma >= 0.0 && gamma <= 1.0, "gamma in [0,1]");
  flag(tau >= 0.0 && tau <= 1.0, "tau in [0,1]");
  flag(exploration_sigma >= 0.0, "exploration_sigma >= 0");
  flag(policy_delay >= 1, "policy_delay >= 1");
  flag(actor_lr > 0.0, "actor_lr > 0");
  flag(critic_lr > 0.0, "critic_lr > 0");
  flag(batch_size >= 1, "batch_size >= 1");
  flag(buffer_capacity >= static_cast<std::size_t>(std::max(batch_size, 1)),
       "buffer_capacity >= batch_size");
  flag(warmup_transitions >= 0, "warmup_transitions >= 0");
  flag(target_noise_std >= 0.0, "target_noise_std >= 0");
  flag(target_noise_clip >= 0.0, "target_noise_clip >= 0");
  flag(per_alpha > 0.0, "per_alpha > 0");
  flag(per_beta_start >= 0.0 && per_beta_start <= 1.0, "per_beta_start in [0,1]");
  flag(per_beta_end >= per_beta_start && per_beta_end <= 1.0,
       "per_beta_end in [per_beta_start,1]");
  flag(per_epsilon > 0.0, "per_epsilon > 0");
  flag(delta_t_s > 0.0, "delta_t_s > 0");
  if (!bad.empty()) throw ConfigError("invalid training config: " + bad);
}

nlohmann::json TrainConfig::to_json() const {
  return nlohmann::json{{"episodes", episodes},
                        {"steps_per_episode", steps_per_episode},
                        {"gamma", gamma},
                        {"tau", tau},
                        {"exploration_sigma", exploration_sigma},
                        {"policy_delay", policy_delay},
                        {"actor_lr", actor_lr},
                        {"critic_lr", critic_lr},
                        {"buffer_capacity", buffer_capacity},
                        {"batch_size", batch_size},
                        {"warmup_transitions", warmup_transitions},
                        {"target_noise_std", target_noise_std},
                        {"target_noise_clip", target_noise_clip},
                        {"per_alpha", per_alpha},
                        {"per_beta_start", per_beta_start},
                        {"per_beta_end", per_beta_end},
                        {"per_epsilon", per_epsilon},
                        {"no_per", no_per},
                        {"no_shared_backbone", no_shared_backbone},
                        {"flat2d", flat2d},
                        {"delta_t_s", delta_t_s},
                        {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  const nlohmann::json ref = c.to_json();
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!ref.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in training config");
    }
  }
  try {
    read_fields(j, c);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("training config: ") + e.what());
  }
  c.validate();
  return c;
}

void TrainConfig::read_fields(const nlohmann::json& j, TrainConfig& c) {
  c.episodes = j.value("episodes", c.episodes);
  c.steps_per_episode = j.value("steps_per_episode", c.steps_per_episode);
  c.gamma = j.value("gamma", c.gamma);
  c.tau = j.value("tau", c.tau);
  c.exploration_sigma = j.value("exploration_sigma", c.exploration_sigma);
  c.policy_delay = j.value("policy_delay", c.policy_delay);
  c.actor_lr = j.value("actor_lr", c.actor_lr);
  c.critic_lr = j.value("critic_lr", c.critic_lr);
  c.buffer_capacity = j.value("buffer_capacity", c.buffer_capacity);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.warmup_transitions = j.value("warmup_transitions", c.warmup_transitions);
  c.target_noise_std = j.value("target_noise_std", c.target_noise_std);
  c.target_noise_clip = j.value("target_noise_clip", c.target_noise_clip);
  c.per_alpha = j.value("per_alpha", c.per_alpha);
  c.per_beta_start = j.value("per_beta_start", c.per_beta_start);
  c.per_beta_end = j.value("per_beta_end", c.per_beta_end);
  c.per_epsilon = j.value("per_epsilon", c.per_epsilon);
  c.no_per = j.value("no_per", c.no_per);
  c.no_shared_backbone = j.value("no_shared_backbone", c.no_shared_backbone);
  c.flat2d = j.value("flat2d", c.flat2d);
  c.delta_t_s = j.value("delta_t_s", c.delta_t_s);
  c.seed = j.value("seed", c.seed);
}

PolicyBundle init_policy_bundle(const TrainConfig& config, int n_agents,
                                std::mt19937_64& rng) {
  config.validate();
  if (n_agents < 1) {
    throw ConfigError("init_policy_bundle: n_agents must be >= 1");
  }
  PolicyBundle b;
  b.config = config;
  b.n_agents = n_agents;
  const int actors = config.no_shared_backbone ? n_agents : 1;
  const std::vector<int> enc_sizes{kEncoderInput, 256, kEncoderFeatures};
  const std::vector<int> head_sizes{kHeadInput, 64, kActionDims};
  for (int a = 0; a < actors; ++a) {
    b.encoders.emplace_back(enc_sizes, rng);
  }
  for (int a = 0; a < actors; ++a) {
    b.heads.emplace_back(head_sizes, rng);
  }
  const std::vector<int> critic_sizes{b.critic_input_size(), 256, 256, 1};
  b.q1 = Mlp(critic_sizes, rng);
  b.q2 = Mlp(critic_sizes, rng);
  b.target_encoders = b.encoders;
  b.target_heads = b.heads;
  b.q1_target = b.q1;
  b.q2_target = b.q2;
  for (int a = 0; a < actors; ++a) {
    b.encoder_opts.emplace_back(b.encoders[a], config.actor_lr);
    b.head_opts.emplace_back(b.heads[a], config.actor_lr);
  }
  b.q1_opt = Adam(b.q1, config.critic_lr);
  b.q2_opt = Adam(b.q2, config.critic_lr);
  return b;
}

std::vector<AgentAction> policy_actions(const PolicyBundle& bundle,
                                        const Eigen::MatrixXd& obs,
                                        const Eigen::VectorXd& pooled) {
  if (obs.rows() != bundle.n_agents || obs.cols() != kObsDims ||
      pooled.size() != kPooledFeatures) {
    throw std::invalid_argument("policy_actions: observation shape mismatch");
  }
  std::vector<AgentAction> actions(bundle.n_agents);
  Eigen::MatrixXd x(1, kEncoderInput);
  for (int i = 0; i < bundle.n_agents; ++i) {
    x.leftCols(kObsDims) = obs.row(i);
    x.rightCols(kPooledFeatures) = pooled.transpose();
    const int a = bundle.actor_index(i);
    const Eigen::MatrixXd feats = bundle.encoders[a].forward(x);
    Eigen::MatrixXd head_in(1, kHeadInput);
    head_in.leftCols(kEncoderFeatures) = feats;
    head_in(0, kEncoderFeatures) = obs(i, kLayerIndicatorIndex);
    Eigen::MatrixXd raw = bundle.heads[a].forward(head_in);
    squash(raw);
    actions[i].motion_command = {raw(0, 0), raw(0, 1), raw(0, 2)};
    actions[i].gate_score = raw(0, 3);
  }
  return actions;
}

std::vector<double> critic_update(PolicyBundle& bundle,
                                  const std::vector<const Transition*>& batch,
                                  const std::vector<double>& weights,
                                  std::mt19937_64& rng) {
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  if (b == 0) throw std::invalid_argument("critic_update: empty batch");
  if (weights.size() != batch.size()) {
    throw std::invalid_argument("critic_update: weights length mismatch");
  }
  const int n = bundle.n_agents;
  const TrainConfig& cfg = bundle.config;

  // Target actions with clipped-Gaussian smoothing.
  Eigen::MatrixXd a_next(b, n * kActionDims);
  std::normal_distribution<double> noise(0.0, std::max(cfg.target_noise_std, 1e-300));
  for (int i = 0; i < n; ++i) {
    const int a = bundle.actor_index(i);
    const Eigen::MatrixXd x = encoder_inputs(batch, i, /*next=*/true);
    const Eigen::MatrixXd feats = bundle.target_encoders[a].forward(x);
    const Eigen::MatrixXd head_in = head_inputs(feats, batch, i, true);
    Eigen::MatrixXd raw = bundle.target_heads[a].forward(head_in);
    squash(raw);
    if (cfg.target_noise_std > 0.0) {
      for (Eigen::Index j = 0; j < b; ++j) {
        for (int d = 0; d < kActionDims; ++d) {
          const double e = std::clamp(noise(rng), -cfg.target_noise_clip,
                                      cfg.target_noise_clip);
          const double lo = d < 3 ? -1.0 : 0.0;
          raw(j, d) = std::clamp(raw(j, d) + e, lo, 1.0);
        }
      }
    }
    a_next.middleCols(i * kActionDims, kActionDims) = raw;
  }

  const Eigen::MatrixXd xq_next = critic_inputs(batch, true, &a_next, n);
  const Eigen::VectorXd q1t = bundle.q1_target.forward(xq_next).col(0);
  const Eigen::VectorXd q2t = bundle.q2_target.forward(xq_next).col(0);
  Eigen::VectorXd y(b);
  for (Eigen::Index j = 0; j < b; ++j) {
    y(j) = batch[j]->reward + cfg.gamma * std::min(q1t(j), q2t(j));
  }

  const Eigen::MatrixXd xq = critic_inputs(batch, false, nullptr, n);
  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), b);

  std::vector<double> td(batch.size());
  double loss_total = 0.0;
  bool first = true;
  for (Mlp* critic : {&bundle.q1, &bundle.q2}) {
    Mlp::Cache cache;
    const Eigen::VectorXd pred = critic->forward_cached(xq, cache).col(0);
    const Eigen::VectorXd res = pred - y;
    loss_total += (w.array() * res.array().square()).sum() / b;
    Eigen::MatrixXd grad_out =
        ((2.0 / b) * (w.array() * res.array())).matrix();
    Mlp::Grads grads = critic->zero_grads();
    critic->backward(cache, grad_out, grads);
    if (first) {
      for (Eigen::Index j = 0; j < b; ++j) td[j] = std::abs(res(j));
      bundle.q1_opt.step(*critic, grads);
      first = false;
    } else {
      bundle.q2_opt.step(*critic, grads);
    }
  }
  if (!std::isfinite(loss_total)) {
    throw TrainingFault("non-finite critic loss");
  }
  ++bundle.critic_updates;
  return td;
}

void actor_update(PolicyBundle& bundle,
                  const std::vector<const Transition*>& batch) {
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  if (b == 0) throw std::invalid_argument("actor_update: empty batch");
  const int n = bundle.n_agents;
  const TrainConfig& cfg = bundle.config;

  std::vector<Mlp::Cache> enc_caches(n), head_caches(n);
  std::vector<Eigen::MatrixXd> actions(n);
  for (int i = 0; i < n; ++i) {
    const int a = bundle.actor_index(i);
    const Eigen::MatrixXd x = encoder_inputs(batch, i, false);
    const Eigen::MatrixXd feats =
        bundle.encoders[a].forward_cached(x, enc_caches[i]);
    const Eigen::MatrixXd head_in = head_inputs(feats, batch, i, false);
    Eigen::MatrixXd raw =
        bundle.heads[a].forward_cached(head_in, head_caches[i]);
    squash(raw);
    actions[i] = std::move(raw);
  }
  Eigen::MatrixXd a_all(b, n * kActionDims);
  for (int i = 0; i < n; ++i) {
    a_all.middleCols(i * kActionDims, kActionDims) = actions[i];
  }

  const Eigen::MatrixXd xq = critic_inputs(batch, false, &a_all, n);
  Mlp::Cache cq;
  const Eigen::VectorXd q = bundle.q1.forward_cached(xq, cq).col(0);
  if (!q.allFinite()) throw TrainingFault("non-finite actor objective");

  // Gradient of the loss (-mean Q) with respect to the critic inputs.
  Eigen::MatrixXd gout = Eigen::MatrixXd::Constant(b, 1, -1.0 / b);
  Mlp::Grads discard = bundle.q1.zero_grads();
  const Eigen::MatrixXd gin = bundle.q1.backward(cq, gout, discard);
  if (!gin.allFinite()) throw TrainingFault("non-finite actor gradient");

  const int act_base = n * kObsDims + kPooledFeatures;
  const bool shared = !cfg.no_shared_backbone;
  Mlp::Grads enc_acc, head_acc;
  if (shared) {
    enc_acc = bundle.encoders[0].zero_grads();
    head_acc = bundle.heads[0].zero_grads();
  }
  for (int i = 0; i < n; ++i) {
    const int a = bundle.actor_index(i);
    Eigen::MatrixXd ga = gin.middleCols(act_base + i * kActionDims, kActionDims);
    // Chain through the output squashing.
    const Eigen::MatrixXd& act = actions[i];
    ga.leftCols(3) =
        (ga.leftCols(3).array() * (1.0 - act.leftCols(3).array().square()))
            .matrix();
    ga.col(3) = (ga.col(3).array() * act.col(3).array() *
                 (1.0 - act.col(3).array()))
                    .matrix();
    Mlp::Grads head_grads = bundle.heads[a].zero_grads();
    const Eigen::MatrixXd ghead_in =
        bundle.heads[a].backward(head_caches[i], ga, head_grads);
    Mlp::Grads enc_grads = bundle.encoders[a].zero_grads();
    bundle.encoders[a].backward(enc_caches[i],
                                ghead_in.leftCols(kEncoderFeatures), enc_grads);
    if (shared) {
      accumulate_grads(head_acc, head_grads);
      accumulate_grads(enc_acc, enc_grads);
    } else {
      if (!grads_finite(head_grads) || !grads_finite(enc_grads)) {
        throw TrainingFault("non-finite actor gradient");
      }
      bundle.head_opts[a].step(bundle.heads[a], head_grads);
      bundle.encoder_opts[a].step(bundle.encoders[a], enc_grads);
    }
  }
  if (shared) {
    scale_grads(enc_acc, 1.0 / n);
    scale_grads(head_acc, 1.0 / n);
    if (!grads_finite(enc_acc) || !grads_finite(head_acc)) {
      throw TrainingFault("non-finite actor gradient");
    }
    bundle.encoder_opts[0].step(bundle.encoders[0], enc_acc);
    bundle.head_opts[0].step(bundle.heads[0], head_acc);
  }

  for (std::size_t a = 0; a < bundle.encoders.size(); ++a) {
    nets::soft_update(bundle.target_encoders[a], bundle.encoders[a], cfg.tau);
    nets::soft_update(bundle.target_heads[a], bundle.heads[a], cfg.tau);
  }
  nets::soft_update(bundle.q1_target, bundle.q1, cfg.tau);
  nets::soft_update(bundle.q2_target, bundle.q2, cfg.tau);
}

TrainResult train(const Scenario& scenario, const RoutePlan& plan,
                  const TrainConfig& config) {
  config.validate();
  const Environment env(scenario, plan, config.flat2d);
  const int n = env.num_agents();
  std::mt19937_64 rng(config.seed);
  TrainResult result;
  result.bundle = init_policy_bundle(config, n, rng);
  PolicyBundle& bundle = result.bundle;

  replay::PerConfig pc;
  pc.capacity = config.buffer_capacity;
  pc.alpha = config.per_alpha;
  pc.epsilon = config.per_epsilon;
  pc.uniform = config.no_per;
  replay::PerBuffer<Transition> buffer(pc);

  const double total_steps =
      static_cast<double>(config.episodes) * config.steps_per_episode;
  std::normal_distribution<double> explore(0.0, std::max(config.exploration_sigma, 1e-300));
  const std::size_t min_fill = std::max<std::size_t>(
      static_cast<std::size_t>(config.batch_size),
      static_cast<std::size_t>(config.warmup_transitions));

  for (int ep = 0; ep < config.episodes; ++ep) {
    EnvState state = env.reset(rng());
    EpisodeLog log;
    log.episode = ep;
    for (int t = 0; t < config.steps_per_episode; ++t) {
      try {
        std::vector<AgentAction> actions =
            policy_actions(bundle, state.obs_matrix, state.pooled);
        if (config.exploration_sigma > 0.0) {
          for (AgentAction& a : actions) {
            for (int d = 0; d < 3; ++d) {
              a.motion_command[d] =
                  std::clamp(a.motion_command[d] + explore(rng), -1.0, 1.0);
            }
            a.gate_score = std::clamp(a.gate_score + explore(rng), 0.0, 1.0);
          }
        }
        auto [rb, next] = env.step(state, actions, config.delta_t_s);

        Transition tr;
        tr.obs = state.obs_matrix;
        tr.pooled = state.pooled;
        tr.actions.resize(n, kActionDims);
        for (int i = 0; i < n; ++i) {
          tr.actions(i, 0) = actions[i].motion_command[0];
          tr.actions(i, 1) = actions[i].motion_command[1];
          tr.actions(i, 2) = actions[i].motion_command[2];
          tr.actions(i, 3) = actions[i].gate_score;
        }
        tr.reward = rb.total;
        tr.next_obs = next.obs_matrix;
        tr.next_pooled = next.pooled;
        buffer.insert(std::move(tr));

        log.reward += rb.total;
        log.r_vol += rb.r_vol;
        log.r_net += rb.r_net;
        log.r_topo += rb.r_topo;
        ++bundle.env_steps;

        if (buffer.size() >= min_fill) {
          const double progress =
              static_cast<double>(bundle.env_steps) / total_steps;
          const double beta =
              config.per_beta_start +
              (config.per_beta_end - config.per_beta_start) *
                  std::min(1.0, progress);
          const replay::SampleInfo info =
              buffer.sample(static_cast<std::size_t>(config.batch_size), beta, rng);
          std::vector<const Transition*> batch;
          batch.reserve(info.indices.size());
          for (std::size_t idx : info.indices) batch.push_back(&buffer.at(idx));
          const std::vector<double> td =
              critic_update(bundle, batch, info.weights, rng);
          buffer.update_priorities(info.indices, td);
          if (bundle.critic_updates % config.policy_delay == 0) {
            actor_update(bundle, batch);
          }
        }
        state = std::move(next);
      } catch (const TrainingFault& e) {
        throw TrainingFault("episode " + std::to_string(ep) + ", step " +
                            std::to_string(t) + ": " + e.what());
      }
    }
    result.log.push_back(log);
  }
  return result;
}

Deployment extract_deployment(const PolicyBundle& bundle,
                              const Scenario& scenario, const RoutePlan& plan,
                              double gate_threshold) {
  const Environment env(scenario, plan, bundle.config.flat2d);
  if (env.num_agents() != bundle.n_agents) {
    throw ConfigError("extract_deployment: checkpoint was trained for " +
                      std::to_string(bundle.n_agents) +
                      " agents but the scenario allows " +
                      std::to_string(env.num_agents()));
  }
  EnvState state = env.reset(bundle.config.seed);
  for (int t = 0; t < bundle.config.steps_per_episode; ++t) {
    const std::vector<AgentAction> actions =
        policy_actions(bundle, state.obs_matrix, state.pooled);
    auto [rb, next] = env.step(state, actions, bundle.config.delta_t_s);
    (void)rb;
    state = std::move(next);
  }
  Deployment dep;
  for (int i = 0; i < bundle.n_agents; ++i) {
    if (state.gates[i] > gate_threshold) {  // strictly above
      dep.positions.push_back(state.positions[i]);
      dep.gate_scores.push_back(state.gates[i]);
    }
  }
  return dep;
}

namespace {

nlohmann::json mlps_to_json(const std::vector<Mlp>& nets) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Mlp& net : nets) arr.push_back(net.to_json());
  return arr;
}

std::vector<Mlp> mlps_from_json(const nlohmann::json& arr) {
  std::vector<Mlp> nets;
  for (const nlohmann::json& j : arr) nets.push_back(Mlp::from_json(j));
  return nets;
}

nlohmann::json adams_to_json(const std::vector<Adam>& opts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Adam& opt : opts) arr.push_back(opt.to_json());
  return arr;
}

std::vector<Adam> adams_from_json(const nlohmann::json& arr) {
  std::vector<Adam> opts;
  for (const nlohmann::json& j : arr) opts.push_back(Adam::from_json(j));
  return opts;
}

}  // namespace

std::string serialize_policy(const PolicyBundle& bundle) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "policy-checkpoint";
  j["n_agents"] = bundle.n_agents;
  j["obs_dims"] = kObsDims;
  j["pooled_features"] = kPooledFeatures;
  j["action_dims"] = kActionDims;
  j["config"] = bundle.config.to_json();
  j["env_steps"] = bundle.env_steps;
  j["critic_updates"] = bundle.critic_updates;
  j["encoders"] = mlps_to_json(bundle.encoders);
  j["heads"] = mlps_to_json(bundle.heads);
  j["target_encoders"] = mlps_to_json(bundle.target_encoders);
  j["target_heads"] = mlps_to_json(bundle.target_heads);
  j["q1"] = bundle.q1.to_json();
  j["q2"] = bundle.q2.to_json();
  j["q1_target"] = bundle.q1_target.to_json();
  j["q2_target"] = bundle.q2_target.to_json();
  j["encoder_opts"] = adams_to_json(bundle.encoder_opts);
  j["head_opts"] = adams_to_json(bundle.head_opts);
  j["q1_opt"] = bundle.q1_opt.to_json();
  j["q2_opt"] = bundle.q2_opt.to_json();
  return j.dump() + "\n";
}

PolicyBundle parse_policy(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("policy checkpoint: invalid JSON: ") +
                      e.what());
  }
  if (!j.contains("format_version") || j["format_version"].get<int>() != 1 ||
      j.value("kind", "") != "policy-checkpoint") {
    throw ConfigError("policy checkpoint: unsupported format");
  }
  if (j.at("obs_dims").get<int>() != kObsDims ||
      j.at("pooled_features").get<int>() != kPooledFeatures ||
      j.at("action_dims").get<int>() != kActionDims) {
    throw ConfigError("policy checkpoint: incompatible feature layout");
  }
  PolicyBundle b;
  try {
    b.config = TrainConfig::from_json(j.at("config"));
    b.n_agents = j.at("n_agents").get<int>();
    b.env_steps = j.at("env_steps").get<std::uint64_t>();
    b.critic_updates = j.at("critic_updates").get<std::uint64_t>();
    b.encoders = mlps_from_json(j.at("encoders"));
    b.heads = mlps_from_json(j.at("heads"));
    b.target_encoders = mlps_from_json(j.at("target_encoders"));
    b.target_heads = mlps_from_json(j.at("target_heads"));
    b.q1 = Mlp::from_json(j.at("q1"));
    b.q2 = Mlp::from_json(j.at("q2"));
    b.q1_target = Mlp::from_json(j.at("q1_target"));
    b.q2_target = Mlp::from_json(j.at("q2_target"));
    b.encoder_opts = adams_from_json(j.at("encoder_opts"));
    b.head_opts = adams_from_json(j.at("head_opts"));
    b.q1_opt = Adam::from_json(j.at("q1_opt"));
    b.q2_opt = Adam::from_json(j.at("q2_opt"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("policy checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("policy checkpoint: ") + e.what());
  }

  const std::size_t actors =
      b.config.no_shared_backbone ? static_cast<std::size_t>(b.n_agents) : 1;
  if (b.n_agents < 1 || b.encoders.size() != actors ||
      b.heads.size() != actors || b.target_encoders.size() != actors ||
      b.target_heads.size() != actors || b.encoder_opts.size() != actors ||
      b.head_opts.size() != actors) {
    throw ConfigError("policy checkpoint: actor count mismatch");
  }
  if (b.encoders[0].input_size() != kObsDims + kPooledFeatures ||
      b.q1.input_size() != b.critic_input_size()) {
    throw ConfigError("policy checkpoint: network dimensions mismatch");
  }
  return b;
}

void save_policy(const PolicyBundle& bundle, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write policy file: " + path);
  out << serialize_policy(bundle);
}

PolicyBundle load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policy file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_policy(ss.str());
}

void save_training_log(const std::vector<EpisodeLog>& log,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write training log: " + path);
  out << "episode,reward,r_vol,r_net,r_topo\n";
  for (const EpisodeLog& row : log) {
    out << row.episode << ',' << fmt9(row.reward) << ',' << fmt9(row.r_vol)
        << ',' << fmt9(row.r_net) << ',' << fmt9(row.r_topo) << '\n';
  }
}

std::vector<EpisodeLog> load_training_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open training log: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "episode,reward,r_vol,r_net,r_topo") {
    throw ConfigError("training log: unexpected header in " + path);
  }
  std::vector<EpisodeLog> log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    EpisodeLog row;
    char comma = 0;
    ss >> row.episode >> comma >> row.reward >> comma >> row.r_vol >> comma >>
        row.r_net >> comma >> row.r_topo;
    if (ss.fail()) throw ConfigError("training log: malformed row in " + path);
    log.push_back(row);
  }
  return log;
}

}  // namespace hdnf
