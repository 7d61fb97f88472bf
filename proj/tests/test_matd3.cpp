#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "hdnf/errors.hpp"
#include "hdnf/matd3.hpp"
#include "hdnf/tasking.hpp"

using namespace hdnf;

namespace {

Scenario toy_scenario() {
  return generate_scenario(
      31, 500.0, 2,
      R"({"max_bs": 3, "sampling": {"grid_k": 8, "m_v": 2, "i_t": 3}})");
}

RoutePlan toy_plan(const Scenario& s) {
  const AssignResult res = assign_tasks(s);
  REQUIRE(res.feasible);
  return res.plan;
}

TrainConfig smoke_config() {
  TrainConfig cfg;
  cfg.episodes = 2;
  cfg.steps_per_episode = 5;
  cfg.batch_size = 8;
  cfg.warmup_transitions = 8;
  cfg.buffer_capacity = 128;
  cfg.seed = 11;
  return cfg;
}

Transition random_transition(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Transition t;
  t.obs.resize(n, kObsDims);
  t.next_obs.resize(n, kObsDims);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < kObsDims; ++c) {
      t.obs(i, c) = d(rng);
      t.next_obs(i, c) = d(rng);
    }
    t.obs(i, kLayerIndicatorIndex) = u(rng) > 0.5 ? 1.0 : 0.0;
    t.next_obs(i, kLayerIndicatorIndex) = u(rng) > 0.5 ? 1.0 : 0.0;
  }
  t.pooled.resize(kPooledFeatures);
  t.next_pooled.resize(kPooledFeatures);
  for (int i = 0; i < kPooledFeatures; ++i) {
    t.pooled(i) = u(rng);
    t.next_pooled(i) = u(rng);
  }
  t.actions.resize(n, kActionDims);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) t.actions(i, c) = std::tanh(d(rng));
    t.actions(i, 3) = u(rng);
  }
  t.reward = d(rng);
  return t;
}

// Independent reconstruction of the centralized critic input layout:
// [obs agent-major | pooled | actions agent-major].
Eigen::MatrixXd assemble_critic_input(
    const std::vector<const Transition*>& batch, bool next,
    const Eigen::MatrixXd* actions_override, int n) {
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  const int obs_span = n * kObsDims;
  const int act_base = obs_span + kPooledFeatures;
  Eigen::MatrixXd x(b, act_base + n * kActionDims);
  for (Eigen::Index j = 0; j < b; ++j) {
    const Transition& t = *batch[j];
    const Eigen::MatrixXd& obs = next ? t.next_obs : t.obs;
    for (int i = 0; i < n; ++i) x.block(j, i * kObsDims, 1, kObsDims) = obs.row(i);
    x.block(j, obs_span, 1, kPooledFeatures) =
        (next ? t.next_pooled : t.pooled).transpose();
    if (actions_override == nullptr) {
      for (int i = 0; i < n; ++i) {
        x.block(j, act_base + i * kActionDims, 1, kActionDims) = t.actions.row(i);
      }
    }
  }
  if (actions_override != nullptr) {
    x.rightCols(n * kActionDims) = *actions_override;
  }
  return x;
}

// Mean Q1 of the current deterministic policy over the batch.
double mean_policy_q(const PolicyBundle& bundle,
                     const std::vector<const Transition*>& batch) {
  const int n = bundle.n_agents;
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd acts(b, n * kActionDims);
  for (Eigen::Index j = 0; j < b; ++j) {
    const std::vector<AgentAction> a =
        policy_actions(bundle, batch[j]->obs, batch[j]->pooled);
    for (int i = 0; i < n; ++i) {
      acts(j, i * kActionDims + 0) = a[i].motion_command[0];
      acts(j, i * kActionDims + 1) = a[i].motion_command[1];
      acts(j, i * kActionDims + 2) = a[i].motion_command[2];
      acts(j, i * kActionDims + 3) = a[i].gate_score;
    }
  }
  const Eigen::MatrixXd xq = assemble_critic_input(batch, false, &acts, n);
  return bundle.q1.forward(xq).col(0).mean();
}

bool mlp_equal(const nets::Mlp& a, const nets::Mlp& b) {
  if (a.layers().size() != b.layers().size()) return false;
  for (std::size_t l = 0; l < a.layers().size(); ++l) {
    if (a.layers()[l].w != b.layers()[l].w) return false;
    if (a.layers()[l].b != b.layers()[l].b) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("train config validation collects violations") {
  TrainConfig ok;
  CHECK_NOTHROW(ok.validate());

  TrainConfig bad;
  bad.episodes = 0;
  bad.gamma = 1.5;
  bad.per_beta_start = 0.9;
  bad.per_beta_end = 0.4;
  try {
    bad.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("episodes") != std::string::npos);
    CHECK(msg.find("gamma") != std::string::npos);
    CHECK(msg.find("per_beta_end") != std::string::npos);
  }

  TrainConfig bad2;
  bad2.buffer_capacity = 16;
  bad2.batch_size = 32;
  CHECK_THROWS_AS(bad2.validate(), ConfigError);
}

TEST_CASE("train config json round-trip and rejection") {
  TrainConfig cfg = smoke_config();
  cfg.no_per = true;
  cfg.flat2d = true;
  cfg.actor_lr = 3e-4;
  const TrainConfig back = TrainConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(back.episodes == cfg.episodes);
  CHECK(back.no_per == cfg.no_per);
  CHECK(back.seed == cfg.seed);

  CHECK_THROWS_AS(TrainConfig::from_json({{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(TrainConfig::from_json({{"episodes", "many"}}), ConfigError);
  CHECK_THROWS_AS(TrainConfig::from_json({{"episodes", 0}}), ConfigError);
  // Partial overrides keep defaults for everything else.
  const TrainConfig partial = TrainConfig::from_json({{"gamma", 0.9}});
  CHECK(partial.gamma == 0.9);
  CHECK(partial.batch_size == TrainConfig{}.batch_size);
}

TEST_CASE("policy bundle initialization and shapes") {
  TrainConfig cfg;
  std::mt19937_64 rng(1);
  const PolicyBundle b = init_policy_bundle(cfg, 3, rng);
  CHECK(b.n_agents == 3);
  CHECK(b.critic_input_size() == 3 * (kObsDims + kActionDims) + kPooledFeatures);
  REQUIRE(b.encoders.size() == 1);  // shared backbone
  REQUIRE(b.heads.size() == 1);
  CHECK(b.actor_index(0) == 0);
  CHECK(b.actor_index(2) == 0);

  // Encoder 320 -> 256 -> 128, head 129 -> 64 -> 4, critics in -> 256 -> 256 -> 1.
  CHECK(b.encoders[0].input_size() == kObsDims + kPooledFeatures);
  CHECK(b.encoders[0].layers()[0].w.rows() == 256);
  CHECK(b.encoders[0].output_size() == 128);
  CHECK(b.heads[0].input_size() == 129);
  CHECK(b.heads[0].layers()[0].w.rows() == 64);
  CHECK(b.heads[0].output_size() == kActionDims);
  CHECK(b.q1.input_size() == b.critic_input_size());
  CHECK(b.q1.layers().size() == 3);
  CHECK(b.q1.output_size() == 1);

  // Targets start as exact copies.
  CHECK(mlp_equal(b.encoders[0], b.target_encoders[0]));
  CHECK(mlp_equal(b.heads[0], b.target_heads[0]));
  CHECK(mlp_equal(b.q1, b.q1_target));
  CHECK(mlp_equal(b.q2, b.q2_target));
  CHECK_FALSE(mlp_equal(b.q1, b.q2));

  TrainConfig ns = cfg;
  ns.no_shared_backbone = true;
  std::mt19937_64 rng2(1);
  const PolicyBundle bn = init_policy_bundle(ns, 3, rng2);
  REQUIRE(bn.encoders.size() == 3);
  REQUIRE(bn.head_opts.size() == 3);
  CHECK(bn.actor_index(2) == 2);
  CHECK_FALSE(mlp_equal(bn.encoders[0], bn.encoders[1]));

  std::mt19937_64 rng3(1);
  CHECK_THROWS_AS(init_policy_bundle(cfg, 0, rng3), ConfigError);
}

TEST_CASE("policy actions are squashed, deterministic, and shape-checked") {
  TrainConfig cfg;
  std::mt19937_64 rng(3);
  const PolicyBundle b = init_policy_bundle(cfg, 2, rng);
  std::mt19937_64 trng(5);
  const Transition t = random_transition(2, trng);

  const std::vector<AgentAction> acts = policy_actions(b, t.obs, t.pooled);
  REQUIRE(acts.size() == 2);
  for (const AgentAction& a : acts) {
    for (double m : a.motion_command) {
      CHECK(m > -1.0);
      CHECK(m < 1.0);
    }
    CHECK(a.gate_score > 0.0);
    CHECK(a.gate_score < 1.0);
  }
  const std::vector<AgentAction> again = policy_actions(b, t.obs, t.pooled);
  for (int i = 0; i < 2; ++i) {
    CHECK(acts[i].motion_command == again[i].motion_command);
    CHECK(acts[i].gate_score == again[i].gate_score);
  }

  // Manual forward for agent 0 through encoder, head, and the squash.
  Eigen::MatrixXd x(1, kObsDims + kPooledFeatures);
  x.leftCols(kObsDims) = t.obs.row(0);
  x.rightCols(kPooledFeatures) = t.pooled.transpose();
  const Eigen::MatrixXd feats = b.encoders[0].forward(x);
  Eigen::MatrixXd head_in(1, 129);
  head_in.leftCols(128) = feats;
  head_in(0, 128) = t.obs(0, kLayerIndicatorIndex);
  const Eigen::MatrixXd raw = b.heads[0].forward(head_in);
  CHECK(acts[0].motion_command[0] == std::tanh(raw(0, 0)));
  CHECK(acts[0].motion_command[2] == std::tanh(raw(0, 2)));
  CHECK(acts[0].gate_score == 1.0 / (1.0 + std::exp(-raw(0, 3))));

  Eigen::MatrixXd wrong(3, kObsDims);
  CHECK_THROWS_AS(policy_actions(b, wrong, t.pooled), std::invalid_argument);
  Eigen::VectorXd short_pooled(10);
  CHECK_THROWS_AS(policy_actions(b, t.obs, short_pooled),
                  std::invalid_argument);
}

TEST_CASE("critic update targets use the min of the target critics") {
  TrainConfig cfg;
  cfg.target_noise_std = 0.0;  // deterministic target actions
  std::mt19937_64 rng(7);
  PolicyBundle b = init_policy_bundle(cfg, 2, rng);
  std::mt19937_64 trng(9);
  const Transition t = random_transition(2, trng);
  const std::vector<const Transition*> batch{&t};

  // Expected TD target via the public API: target actors on next_obs, then
  // min over the two target critics.
  PolicyBundle targets = b;
  targets.encoders = b.target_encoders;
  targets.heads = b.target_heads;
  const std::vector<AgentAction> an =
      policy_actions(targets, t.next_obs, t.next_pooled);
  Eigen::MatrixXd a_next(1, 2 * kActionDims);
  for (int i = 0; i < 2; ++i) {
    a_next(0, i * kActionDims + 0) = an[i].motion_command[0];
    a_next(0, i * kActionDims + 1) = an[i].motion_command[1];
    a_next(0, i * kActionDims + 2) = an[i].motion_command[2];
    a_next(0, i * kActionDims + 3) = an[i].gate_score;
  }
  const Eigen::MatrixXd xq_next = assemble_critic_input(batch, true, &a_next, 2);
  const double q1t = b.q1_target.forward(xq_next)(0, 0);
  const double q2t = b.q2_target.forward(xq_next)(0, 0);
  const double y = t.reward + cfg.gamma * std::min(q1t, q2t);

  const Eigen::MatrixXd xq = assemble_critic_input(batch, false, nullptr, 2);
  const double pred = b.q1.forward(xq)(0, 0);
  const double expected_td = std::abs(pred - y);

  const nets::Mlp q1_before = b.q1;
  const nets::Mlp q1_target_before = b.q1_target;
  std::mt19937_64 urng(13);
  const std::vector<double> td = critic_update(b, batch, {1.0}, urng);
  REQUIRE(td.size() == 1);
  CHECK(td[0] == doctest::Approx(expected_td).epsilon(1e-12));
  CHECK(b.critic_updates == 1);
  // Online critics moved; targets are untouched by the critic step.
  CHECK_FALSE(mlp_equal(b.q1, q1_before));
  CHECK(mlp_equal(b.q1_target, q1_target_before));

  std::mt19937_64 r2(1);
  CHECK_THROWS_AS(critic_update(b, {}, {}, r2), std::invalid_argument);
  CHECK_THROWS_AS(critic_update(b, batch, {1.0, 2.0}, r2),
                  std::invalid_argument);
}

TEST_CASE("target smoothing noise is seeded and actually applied") {
  TrainConfig cfg;  // default target_noise_std = 0.2
  std::mt19937_64 rng(15);
  const PolicyBundle init = init_policy_bundle(cfg, 2, rng);
  std::mt19937_64 trng(17);
  const Transition t = random_transition(2, trng);
  const std::vector<const Transition*> batch{&t};

  PolicyBundle a = init;
  PolicyBundle b = init;
  PolicyBundle c = init;
  std::mt19937_64 ra(5), rb(5), rc(6);
  const std::vector<double> td_a = critic_update(a, batch, {1.0}, ra);
  const std::vector<double> td_b = critic_update(b, batch, {1.0}, rb);
  const std::vector<double> td_c = critic_update(c, batch, {1.0}, rc);
  CHECK(td_a[0] == td_b[0]);
  CHECK(mlp_equal(a.q1, b.q1));
  // A different noise stream shifts the smoothed target.
  CHECK(td_a[0] != td_c[0]);
}

TEST_CASE("zero importance weight silences a sample's gradient") {
  TrainConfig cfg;
  cfg.target_noise_std = 0.0;
  std::mt19937_64 rng(19);
  const PolicyBundle init = init_policy_bundle(cfg, 2, rng);
  std::mt19937_64 trng(21);
  const Transition t1 = random_transition(2, trng);
  Transition t2 = random_transition(2, trng);

  PolicyBundle a = init;
  PolicyBundle b = init;
  std::mt19937_64 ra(1), rb(1);
  const std::vector<const Transition*> batch_a{&t1, &t2};
  const std::vector<double> td_a = critic_update(a, batch_a, {1.0, 0.0}, ra);
  t2.reward += 1000.0;  // only visible through the zero-weight slot
  const std::vector<const Transition*> batch_b{&t1, &t2};
  const std::vector<double> td_b = critic_update(b, batch_b, {1.0, 0.0}, rb);

  CHECK(td_a[0] == td_b[0]);
  CHECK(td_a[1] != td_b[1]);  // the TD report itself still sees the change
  CHECK(mlp_equal(a.q1, b.q1));  // but the parameters do not
  CHECK(mlp_equal(a.q2, b.q2));
}

TEST_CASE("actor update ascends the critic and moves the targets") {
  TrainConfig cfg;
  std::mt19937_64 rng(23);
  PolicyBundle b = init_policy_bundle(cfg, 2, rng);
  std::mt19937_64 trng(25);
  std::vector<Transition> storage;
  for (int i = 0; i < 16; ++i) storage.push_back(random_transition(2, trng));
  std::vector<const Transition*> batch;
  for (const Transition& t : storage) batch.push_back(&t);

  const double before = mean_policy_q(b, batch);
  const nets::Mlp q1_before = b.q1;
  const nets::Mlp enc_target_before = b.target_encoders[0];
  actor_update(b, batch);
  const double after = mean_policy_q(b, batch);
  CHECK(after > before);
  // The critic itself must not move during the actor step...
  CHECK(mlp_equal(b.q1, q1_before));
  // ...but every target net takes a soft step.
  CHECK_FALSE(mlp_equal(b.target_encoders[0], enc_target_before));

  // Soft update blends toward the online nets: after a critic step opens a
  // gap between q1 and its target, an actor step must shrink it.
  PolicyBundle c = b;
  std::mt19937_64 crng(31);
  critic_update(c, batch, std::vector<double>(batch.size(), 1.0), crng);
  const Eigen::MatrixXd gap_before =
      c.q1_target.layers()[0].w - c.q1.layers()[0].w;
  actor_update(c, batch);
  const Eigen::MatrixXd gap_after =
      c.q1_target.layers()[0].w - c.q1.layers()[0].w;
  CHECK(gap_after.norm() < gap_before.norm());
  CHECK(gap_before.norm() > 1e-8);  // the critic step actually moved q1

  CHECK_THROWS_AS(actor_update(b, {}), std::invalid_argument);
}

TEST_CASE("actor update under the per-agent ablation trains each actor") {
  TrainConfig cfg;
  cfg.no_shared_backbone = true;
  std::mt19937_64 rng(27);
  PolicyBundle b = init_policy_bundle(cfg, 2, rng);
  std::mt19937_64 trng(29);
  std::vector<Transition> storage;
  for (int i = 0; i < 8; ++i) storage.push_back(random_transition(2, trng));
  std::vector<const Transition*> batch;
  for (const Transition& t : storage) batch.push_back(&t);

  const double before = mean_policy_q(b, batch);
  const nets::Mlp e0 = b.encoders[0];
  const nets::Mlp e1 = b.encoders[1];
  actor_update(b, batch);
  CHECK(mean_policy_q(b, batch) > before);
  CHECK_FALSE(mlp_equal(b.encoders[0], e0));
  CHECK_FALSE(mlp_equal(b.encoders[1], e1));
}

TEST_CASE("train smoke run is deterministic and obeys the update schedule") {
  const Scenario s = toy_scenario();
  const RoutePlan plan = toy_plan(s);
  const TrainConfig cfg = smoke_config();

  const TrainResult a = train(s, plan, cfg);
  REQUIRE(a.log.size() == 2);
  CHECK(a.log[0].episode == 0);
  CHECK(a.log[1].episode == 1);
  for (const EpisodeLog& row : a.log) {
    CHECK(std::isfinite(row.reward));
    CHECK(row.reward ==
          doctest::Approx(row.r_vol + row.r_net + row.r_topo).epsilon(1e-9));
  }
  CHECK(a.bundle.env_steps == 10);
  // Buffer reaches the warmup size of 8 on step 8 of 10.
  CHECK(a.bundle.critic_updates == 3);

  const TrainResult b = train(s, plan, cfg);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].reward == b.log[i].reward);
    CHECK(a.log[i].r_topo == b.log[i].r_topo);
  }
  CHECK(serialize_policy(a.bundle) == serialize_policy(b.bundle));

  TrainConfig other = cfg;
  other.seed = 12;
  const TrainResult c = train(s, plan, other);
  CHECK(a.log[0].reward != c.log[0].reward);
}

TEST_CASE("policy delay gates actor updates") {
  const Scenario s = toy_scenario();
  const RoutePlan plan = toy_plan(s);
  TrainConfig cfg = smoke_config();
  cfg.policy_delay = 1000;  // no actor update within 3 critic updates

  const TrainResult r = train(s, plan, cfg);
  // Reconstruct the initial bundle: train() seeds its generator from
  // config.seed and builds the networks first.
  std::mt19937_64 rng(cfg.seed);
  const PolicyBundle init = init_policy_bundle(cfg, r.bundle.n_agents, rng);
  CHECK(mlp_equal(r.bundle.encoders[0], init.encoders[0]));
  CHECK(mlp_equal(r.bundle.heads[0], init.heads[0]));
  CHECK(mlp_equal(r.bundle.q1_target, init.q1_target));
  CHECK_FALSE(mlp_equal(r.bundle.q1, init.q1));  // critics did train

  TrainConfig eager = smoke_config();
  eager.policy_delay = 1;
  const TrainResult e = train(s, plan, eager);
  std::mt19937_64 rng2(eager.seed);
  const PolicyBundle init2 = init_policy_bundle(eager, e.bundle.n_agents, rng2);
  CHECK_FALSE(mlp_equal(e.bundle.encoders[0], init2.encoders[0]));
  CHECK_FALSE(mlp_equal(e.bundle.q1_target, init2.q1_target));
}

TEST_CASE("train ablation paths run") {
  const Scenario s = toy_scenario();
  const RoutePlan plan = toy_plan(s);

  TrainConfig uniform = smoke_config();
  uniform.no_per = true;
  const TrainResult ru = train(s, plan, uniform);
  CHECK(ru.log.size() == 2);

  TrainConfig per_agent = smoke_config();
  per_agent.no_shared_backbone = true;
  const TrainResult rp = train(s, plan, per_agent);
  CHECK(rp.bundle.encoders.size() == 3);

  TrainConfig flat = smoke_config();
  flat.flat2d = true;
  const TrainResult rf = train(s, plan, flat);
  CHECK(rf.bundle.config.flat2d);
  for (const EpisodeLog& row : rf.log) CHECK(std::isfinite(row.reward));
}

TEST_CASE("extract deployment keeps gates strictly above the threshold") {
  const Scenario s = toy_scenario();
  const RoutePlan plan = toy_plan(s);
  const TrainResult r = train(s, plan, smoke_config());

  // Sigmoid gates live strictly inside (0, 1).
  const Deployment all = extract_deployment(r.bundle, s, plan, 0.0);
  CHECK(all.positions.size() == 3);
  for (std::size_t i = 0; i < all.positions.size(); ++i) {
    CHECK(all.gate_scores[i] > 0.0);
    CHECK(all.positions[i].z >= s.bs_altitude_min_m);
    CHECK(all.positions[i].z <= s.bs_altitude_max_m);
  }
  const Deployment none = extract_deployment(r.bundle, s, plan, 1.0);
  CHECK(none.positions.empty());
  // Repeatable rollout.
  const Deployment again = extract_deployment(r.bundle, s, plan, 0.0);
  for (std::size_t i = 0; i < all.positions.size(); ++i) {
    CHECK(all.positions[i] == again.positions[i]);
  }

  // Agent-count mismatch against a different scenario.
  Scenario wide = generate_scenario(
      31, 500.0, 2,
      R"({"max_bs": 4, "sampling": {"grid_k": 8, "m_v": 2, "i_t": 3}})");
  const RoutePlan wide_plan = toy_plan(wide);
  CHECK_THROWS_AS(extract_deployment(r.bundle, wide, wide_plan, 0.5),
                  ConfigError);
}

TEST_CASE("policy checkpoint round-trips exactly") {
  const Scenario s = toy_scenario();
  const RoutePlan plan = toy_plan(s);
  const TrainResult r = train(s, plan, smoke_config());

  const std::string text = serialize_policy(r.bundle);
  const PolicyBundle back = parse_policy(text);
  CHECK(serialize_policy(back) == text);
  CHECK(back.n_agents == r.bundle.n_agents);
  CHECK(back.env_steps == r.bundle.env_steps);
  CHECK(back.critic_updates == r.bundle.critic_updates);

  std::mt19937_64 trng(33);
  const Transition probe = random_transition(3, trng);
  const std::vector<AgentAction> ra =
      policy_actions(r.bundle, probe.obs, probe.pooled);
  const std::vector<AgentAction> rb =
      policy_actions(back, probe.obs, probe.pooled);
  for (int i = 0; i < 3; ++i) {
    CHECK(ra[i].motion_command == rb[i].motion_command);
    CHECK(ra[i].gate_score == rb[i].gate_score);
  }

  const std::string path = "policy_roundtrip_tmp.json";
  save_policy(r.bundle, path);
  const PolicyBundle loaded = load_policy(path);
  CHECK(serialize_policy(loaded) == text);
  std::remove(path.c_str());

  // Optimizer state survives: one more identical critic step stays in sync.
  PolicyBundle live = r.bundle;
  PolicyBundle thawed = parse_policy(text);
  const Transition t = random_transition(3, trng);
  const std::vector<const Transition*> batch{&t};
  std::mt19937_64 r1(2), r2(2);
  critic_update(live, batch, {1.0}, r1);
  critic_update(thawed, batch, {1.0}, r2);
  CHECK(mlp_equal(live.q1, thawed.q1));
  CHECK(mlp_equal(live.q2, thawed.q2));
}

TEST_CASE("policy checkpoint rejects incompatible data") {
  const Scenario s = toy_scenario();
  const RoutePlan plan = toy_plan(s);
  TrainConfig cfg = smoke_config();
  cfg.episodes = 1;
  cfg.steps_per_episode = 2;
  cfg.warmup_transitions = 64;  // skip updates, keep the test fast
  const TrainResult r = train(s, plan, cfg);
  const std::string text = serialize_policy(r.bundle);

  CHECK_THROWS_AS(parse_policy("not json"), ConfigError);
  CHECK_THROWS_AS(parse_policy("{}"), ConfigError);

  nlohmann::json j = nlohmann::json::parse(text);
  j["obs_dims"] = 19;
  CHECK_THROWS_AS(parse_policy(j.dump()), ConfigError);

  j = nlohmann::json::parse(text);
  j["kind"] = "something-else";
  CHECK_THROWS_AS(parse_policy(j.dump()), ConfigError);

  j = nlohmann::json::parse(text);
  j["config"]["no_shared_backbone"] = true;  // promises 3 actors, file has 1
  CHECK_THROWS_AS(parse_policy(j.dump()), ConfigError);

  j = nlohmann::json::parse(text);
  j["encoders"][0]["layers"][0]["w"]["cols"] = 64;  // breaks the layout
  CHECK_THROWS_AS(parse_policy(j.dump()), ConfigError);

  CHECK_THROWS_AS(load_policy("no_such_policy_file.json"), ConfigError);
}

TEST_CASE("training log round-trips through csv") {
  std::vector<EpisodeLog> log(3);
  log[0] = {0, 1.5, 0.25, 1.0, 0.25};
  log[1] = {1, -2.25, 0.5, -2.5, -0.25};
  log[2] = {2, 0.125, 0.0, 0.0, 0.125};
  const std::string path = "training_log_tmp.csv";
  save_training_log(log, path);
  const std::vector<EpisodeLog> back = load_training_log(path);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].episode == log[i].episode);
    CHECK(back[i].reward == log[i].reward);  // exactly representable values
    CHECK(back[i].r_vol == log[i].r_vol);
    CHECK(back[i].r_net == log[i].r_net);
    CHECK(back[i].r_topo == log[i].r_topo);
  }
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_training_log("no_such_log.csv"), ConfigError);
  const std::string bad = "training_log_bad_tmp.csv";
  {
    std::FILE* f = std::fopen(bad.c_str(), "w");
    std::fputs("wrong,header\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_training_log(bad), ConfigError);
  {
    std::FILE* f = std::fopen(bad.c_str(), "w");
    std::fputs("episode,reward,r_vol,r_net,r_topo\n0,oops,1,2,3\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_training_log(bad), ConfigError);
  std::remove(bad.c_str());
}
