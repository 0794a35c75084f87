#include "acsim/rl_policy.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "acsim/features.hpp"

namespace acsim::rl {

void TransitionBook::on_decision(std::uint64_t id, std::vector<double> state, int action, double time) {
  if (last_decision_) {
    auto it = pending_.find(*last_decision_);
    if (it != pending_.end()) {
      it->second.next_state = state;
      it->second.dt = time - it->second.decision_time;
      try_complete(*last_decision_);
    }
  }
  PendingTransition p;
  p.state = std::move(state);
  p.action = action;
  p.decision_time = time;
  if (!pending_.emplace(id, std::move(p)).second) throw std::logic_error("TransitionBook: duplicate request id");
  last_decision_ = id;
}

void TransitionBook::on_reward(std::uint64_t id, double reward) {
  auto it = pending_.find(id);
  if (it == pending_.end()) throw std::logic_error("TransitionBook: reward for an unknown request");
  it->second.reward = reward;
  try_complete(id);
}

void TransitionBook::try_complete(std::uint64_t id) {
  auto it = pending_.find(id);
  const PendingTransition& p = it->second;
  if (!p.reward || !p.next_state) return;
  ready_.push_back(Transition{p.state, p.action, *p.reward, p.dt, p.next_state});
  pending_.erase(it);
}

std::size_t TransitionBook::flush() {
  std::size_t discarded = 0;
  for (auto& [id, p] : pending_) {
    if (p.reward)
      ready_.push_back(Transition{p.state, p.action, *p.reward, 0.0, std::nullopt});
    else
      ++discarded;
  }
  pending_.clear();
  last_decision_.reset();
  return discarded;
}

std::optional<Transition> TransitionBook::pop_ready() {
  if (ready_.empty()) return std::nullopt;
  std::optional<Transition> t(std::move(ready_.front()));
  ready_.pop_front();
  return t;
}

double transition_reward(const policy::Resolution& res, const sim::RewardSchedule& rewards) {
  const auto k = static_cast<std::size_t>(res.ue_type);
  switch (res.kind) {
    case policy::Resolution::Kind::Block: return rewards.block.at(k);
    case policy::Resolution::Kind::Finish: return rewards.accept_outcome(res.ue_type, false, 0.0);
    case policy::Resolution::Kind::Drop:
      return rewards.accept_outcome(res.ue_type, true, res.time - res.accept_time);
  }
  return 0.0;
}

RlPolicy::RlPolicy(Options options, Quantizer quantizer, QTable table)
    : options_(std::move(options)), kind_(LearnerKind::QLearning), quantizer_(std::move(quantizer)),
      table_(std::move(table)), rng_(stream_seed(options_.seed, streams::kPolicy)) {
  if (static_cast<int>(quantizer_.size()) != policy::feature_length(options_.feature_version, options_.num_types))
    throw std::invalid_argument("RlPolicy: quantizer does not match the feature version");
}

RlPolicy::RlPolicy(Options options, DqlAgent agent)
    : options_(std::move(options)), kind_(LearnerKind::DeepQ), agent_(std::move(agent)),
      rng_(stream_seed(options_.seed, streams::kPolicy)) {
  if (agent_->input_size() != policy::feature_length(options_.feature_version, options_.num_types))
    throw std::invalid_argument("RlPolicy: network input does not match the feature version");
}

void RlPolicy::begin_run(std::uint64_t seed) {
  book_ = TransitionBook{};
  rng_ = Rng(stream_seed(seed, streams::kPolicy));
}

policy::Decision RlPolicy::decide(const policy::DecisionContext& ctx) {
  std::vector<double> f = policy::featurize(options_.feature_version, ctx);
  const double eps = options_.training ? options_.epsilon.value(decisions_) : 0.0;
  policy::Decision d;
  if (kind_ == LearnerKind::QLearning)
    d = ql_decide(*table_, quantizer_.key(f), eps, rng_);
  else
    d = dql_decide(*agent_, f, eps, rng_);
  ++decisions_;
  if (options_.training) {
    book_.on_decision(ctx.request_id, std::move(f), sim::action_index(d), ctx.time);
    learn();
  }
  return d;
}

void RlPolicy::on_resolved(const policy::Resolution& res) {
  if (!options_.training) return;
  book_.on_reward(res.request_id, transition_reward(res, options_.rewards));
  learn();
}

void RlPolicy::on_run_end(double) {
  if (!options_.training) return;
  discarded_ += book_.flush();
  learn();
}

void RlPolicy::learn() {
  while (auto tr = book_.pop_ready()) {
    double loss;
    if (kind_ == LearnerKind::QLearning) {
      QTransition q{quantizer_.key(tr->state), tr->action, tr->reward, tr->dt, std::nullopt};
      if (tr->next) q.next = quantizer_.key(*tr->next);
      const double td = ql_update(*table_, q);
      loss = td * td;
    } else {
      loss = agent_->update(*tr);
    }
    ++updates_;
    reward_sum_ += tr->reward;
    if (log_) log_({updates_, loss, options_.epsilon.value(decisions_), reward_sum_ / static_cast<double>(updates_)});
  }
}

namespace {

constexpr int kCheckpointVersion = 1;

nlohmann::json rewards_json(const sim::RewardSchedule& r) {
  return {{"accept", r.accept}, {"block", r.block}, {"drop", r.drop}, {"gamma", r.gamma}};
}

sim::RewardSchedule rewards_from(const nlohmann::json& j) {
  sim::RewardSchedule r;
  r.accept = j.at("accept").get<std::vector<double>>();
  r.block = j.at("block").get<std::vector<double>>();
  r.drop = j.at("drop").get<std::vector<double>>();
  r.gamma = j.at("gamma").get<double>();
  return r;
}

}  // namespace

nlohmann::json RlPolicy::checkpoint() const {
  nlohmann::json j;
  j["format"] = "acsim-checkpoint";
  j["version"] = kCheckpointVersion;
  j["kind"] = name();
  j["features"] = {{"version", options_.feature_version}, {"num_types", options_.num_types}};
  j["rewards"] = rewards_json(options_.rewards);
  j["epsilon"] = {{"start", options_.epsilon.start},
                  {"end", options_.epsilon.end},
                  {"decay_steps", options_.epsilon.decay_steps}};
  j["seed"] = options_.seed;
  j["decisions"] = decisions_;
  j["updates"] = updates_;
  if (kind_ == LearnerKind::QLearning) {
    j["quantizer"] = to_json(quantizer_);
    j["table"] = to_json(*table_);
  } else {
    const auto& c = agent_->config();
    j["dql"] = {{"hidden", c.hidden},
                {"learning_rate", c.learning_rate},
                {"gamma", c.gamma},
                {"target_period", c.target_period},
                {"reward_scale", c.reward_scale},
                {"input_scale", c.input_scale},
                {"seed", c.seed},
                {"agent_updates", agent_->updates()}};
    j["prediction"] = nn::to_json(agent_->prediction());
    j["target"] = nn::to_json(agent_->target());
    j["adam"] = nn::to_json(agent_->adam());
  }
  return j;
}

std::unique_ptr<RlPolicy> RlPolicy::from_checkpoint(const nlohmann::json& j) {
  if (j.value("format", "") != "acsim-checkpoint") throw std::invalid_argument("checkpoint: unrecognized format");
  if (j.at("version").get<int>() != kCheckpointVersion)
    throw std::invalid_argument("checkpoint: unsupported version " + j.at("version").dump());
  Options o;
  o.feature_version = j.at("features").at("version").get<int>();
  o.num_types = j.at("features").at("num_types").get<int>();
  o.rewards = rewards_from(j.at("rewards"));
  o.epsilon.start = j.at("epsilon").at("start").get<double>();
  o.epsilon.end = j.at("epsilon").at("end").get<double>();
  o.epsilon.decay_steps = j.at("epsilon").at("decay_steps").get<std::int64_t>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.training = false;
  std::unique_ptr<RlPolicy> p;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "ql") {
    p = std::make_unique<RlPolicy>(o, quantizer_from_json(j.at("quantizer")), qtable_from_json(j.at("table")));
  } else if (kind == "dql") {
    const auto& d = j.at("dql");
    DqlConfig c;
    c.hidden = d.at("hidden").get<std::vector<int>>();
    c.learning_rate = d.at("learning_rate").get<double>();
    c.gamma = d.at("gamma").get<double>();
    c.target_period = d.at("target_period").get<std::int64_t>();
    c.reward_scale = d.at("reward_scale").get<double>();
    c.input_scale = d.at("input_scale").get<std::vector<double>>();
    c.seed = d.at("seed").get<std::uint64_t>();
    DqlAgent agent(nn::mlp_from_json(j.at("prediction")), nn::mlp_from_json(j.at("target")),
                   nn::adam_from_json(j.at("adam")), c, d.at("agent_updates").get<std::int64_t>());
    p = std::make_unique<RlPolicy>(o, std::move(agent));
  } else {
    throw std::invalid_argument("checkpoint: unknown learner kind '" + kind + "'");
  }
  p->decisions_ = j.at("decisions").get<std::int64_t>();
  p->updates_ = j.at("updates").get<std::int64_t>();
  return p;
}

void save_checkpoint(const RlPolicy& policy, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out << policy.checkpoint().dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

std::unique_ptr<RlPolicy> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
  return RlPolicy::from_checkpoint(nlohmann::json::parse(in));
}

}  // namespace acsim::rl
