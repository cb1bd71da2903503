#pragma once

#include <limits>
#include <optional>
#include <unordered_set>

#include "ccdr/common.hpp"
#include "ccdr/market_env.hpp"
#include "ccdr/neural.hpp"

namespace ccdr::agent {

// ---------------------------------------------------------------------------
// Replay buffer
// ---------------------------------------------------------------------------

struct Transition {
    Vec state;
    int action = 0;
    double reward = 0.0;
    Vec next_state;
    bool done = false;
};

// Fixed-capacity ring; overwrites oldest first.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity = 50000) : capacity_(capacity) {}

    void push(Transition t) {
        if (storage_.size() < capacity_) {
            storage_.push_back(std::move(t));
        } else {
            storage_[cursor_] = std::move(t);
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    std::size_t size() const {
        return storage_.size();
    }
    std::size_t capacity() const {
        return capacity_;
    }
    const Transition& at(std::size_t i) const {
        return storage_[i];
    }

    // Uniform sample without replacement (Floyd's algorithm).
    std::vector<const Transition*> sample(std::size_t k, Rng& rng) const {
        require(k <= storage_.size(), "sample larger than buffer");
        std::unordered_set<std::size_t> chosen;
        std::vector<const Transition*> out;
        out.reserve(k);
        for (std::size_t i = storage_.size() - k; i < storage_.size(); ++i) {
            std::size_t j = rng.uniform_index(i + 1);
            if (!chosen.insert(j).second) {
                chosen.insert(i);
                out.push_back(&storage_[i]);
            } else {
                out.push_back(&storage_[j]);
            }
        }
        return out;
    }

  private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> storage_;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct AgentConfig {
    double gamma = 0.99;
    double lr = 1e-4;
    int batch = 256;
    double eps_start = 1.0;
    double eps_min = 0.01;
    double eps_decay = 0.998;  // per episode
    double tau = 0.003;
    std::vector<int> hidden = {128, 64};
    int episodes = 2500;
    std::size_t buffer_capacity = 50000;
    std::size_t min_buffer = 1000;  // transitions before updates start
    int val_every = 50;
    double grad_clip = 10.0;
    double huber_delta = 1.0;

    void validate() const {
        require(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0,1]");
        require(tau > 0.0 && tau < 1.0, "tau must be in (0,1)");
        require(eps_min <= eps_start, "eps_min must not exceed eps_start");
        require(batch >= 1 && episodes >= 1, "batch and episodes must be positive");
    }
};

inline double epsilon_after(const AgentConfig& cfg, int decays) {
    return std::max(cfg.eps_min, cfg.eps_start * std::pow(cfg.eps_decay, decays));
}

// ---------------------------------------------------------------------------
// Policy primitives
// ---------------------------------------------------------------------------

inline int greedy_action(const neural::DenseNet& q_net, const Vec& state) {
    const Vec q = q_net.forward(state);
    int best = 0;
    for (std::size_t a = 1; a < q.size(); ++a)
        if (q[a] > q[best]) best = static_cast<int>(a);
    return best;
}

// Epsilon-greedy; greedy ties resolve to the lowest index. A non-positive
// epsilon never touches the rng.
inline int select_action(const neural::DenseNet& q_net, const Vec& state, double epsilon,
                         Rng& rng) {
    require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must be in [0,1]");
    if (epsilon > 0.0 && rng.uniform() < epsilon)
        return static_cast<int>(rng.uniform_index(q_net.output_dim()));
    return greedy_action(q_net, state);
}

// y_j = r_j + gamma * (1 - done_j) * Q_target(s'_j, argmax_a Q_policy(s'_j, a))
inline Vec ddqn_target(const std::vector<const Transition*>& batch, const neural::DenseNet& q_net,
                       const neural::DenseNet& target_net, double gamma) {
    require(!batch.empty(), "ddqn_target needs a nonempty batch");
    Vec y(batch.size(), 0.0);
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const Transition& t = *batch[j];
        double bootstrap = 0.0;
        if (!t.done && gamma != 0.0) {
            const int a_star = greedy_action(q_net, t.next_state);
            bootstrap = target_net.forward(t.next_state)[a_star];
        }
        y[j] = t.reward + gamma * (t.done ? 0.0 : bootstrap);
    }
    return y;
}

inline void soft_update(neural::DenseNet& target_net, const neural::DenseNet& q_net, double tau) {
    auto tp = target_net.parameter_blobs();
    auto qp = q_net.parameter_blobs();
    require(tp.size() == qp.size(), "soft_update: architecture mismatch");
    for (std::size_t b = 0; b < tp.size(); ++b) {
        if (tp[b].size() != qp[b].size()) throw ShapeError("soft_update: blob size mismatch");
        for (std::size_t i = 0; i < tp[b].size(); ++i)
            tp[b][i] = tau * qp[b][i] + (1.0 - tau) * tp[b][i];
    }
}

// Mean Huber loss of Q(s_j, a_j) against fixed targets, with gradients
// flowing only through the taken action's output.
inline std::pair<double, neural::DenseGrads> q_loss_and_grads(const neural::DenseNet& q_net,
                                                              const std::vector<const Transition*>& batch,
                                                              const Vec& targets, double delta) {
    neural::DenseGrads grads = q_net.zero_grads();
    Vec pred(batch.size(), 0.0);
    std::vector<neural::DenseCache> caches(batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j)
        pred[j] = q_net.forward(batch[j]->state, &caches[j])[batch[j]->action];
    const neural::LossResult loss = neural::huber_loss(pred, targets, delta);
    for (std::size_t j = 0; j < batch.size(); ++j) {
        Vec out_grad(q_net.output_dim(), 0.0);
        out_grad[batch[j]->action] = loss.grad[j];
        grads.add(q_net.backward(caches[j], out_grad));
    }
    return {loss.loss, std::move(grads)};
}

inline double global_grad_norm(const neural::DenseGrads& g) {
    double sq = 0.0;
    for (const auto& m : g.w)
        for (double v : m.a) sq += v * v;
    for (const auto& b : g.b)
        for (double v : b) sq += v * v;
    return std::sqrt(sq);
}

// One DDQN update: sample, compute targets, take an Adam step on the policy
// network (clipped at a global gradient norm), then soft-update the target.
// Returns the loss, or nothing when the buffer cannot fill a batch.
inline std::optional<double> train_step(neural::DenseNet& q_net, neural::DenseNet& target_net,
                                        neural::DenseAdam& optimizer, const ReplayBuffer& buffer,
                                        const AgentConfig& cfg, Rng& rng) {
    if (buffer.size() < static_cast<std::size_t>(cfg.batch)) return std::nullopt;
    const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch), rng);
    const Vec targets = ddqn_target(batch, q_net, target_net, cfg.gamma);
    auto [loss, grads] = q_loss_and_grads(q_net, batch, targets, cfg.huber_delta);
    if (!std::isfinite(loss)) throw NumericError("non-finite DDQN loss");
    const double norm = global_grad_norm(grads);
    if (cfg.grad_clip > 0.0 && norm > cfg.grad_clip) grads.scale(cfg.grad_clip / norm);
    neural::AdamParams opt;
    opt.lr = cfg.lr;
    optimizer.apply(q_net, grads, opt);
    soft_update(target_net, q_net, cfg.tau);
    return loss;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

// Everything needed to spin up one episode per day.
struct EpisodePool {
    std::vector<data::DayData> train_days;
    std::vector<data::DayData> val_days;
    std::vector<household::ApplianceTemplate> fleet;
    std::vector<std::vector<double>> betas_per_eu;
    double capacity = 0.0;
    env::EnvConfig env_cfg;

    env::Environment make_env(const data::DayData& day) const {
        return env::make_environment(day, fleet, betas_per_eu, capacity, env_cfg);
    }
};

struct EpisodeLog {
    int episode = 0;
    double train_reward = 0.0;
    double epsilon = 0.0;
    double loss_mean = 0.0;
    double val_reward = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
    neural::DenseNet q_net;
    std::vector<EpisodeLog> log;
    std::string abort_reason;  // nonempty when training stopped on a numeric failure

    bool aborted() const {
        return !abort_reason.empty();
    }
};

struct EvalResult {
    std::vector<env::StepInfo> trace;
    double total_reward = 0.0;
    Vec realized;   // post-DR hourly aggregate
    Vec preferred;  // no-DR hourly aggregate
};

// Greedy rollout; the network is untouched.
inline EvalResult evaluate(const neural::DenseNet& q_net, env::Environment& env) {
    env.reset();
    EvalResult result;
    Rng unused(0);
    while (!env.done()) {
        const int a = select_action(q_net, env.state().to_vector(), 0.0, unused);
        result.total_reward += env.step(a).reward;
    }
    result.trace = env.trace();
    result.realized = env.realized_profile();
    result.preferred = env.preferred_profile();
    return result;
}

// Full training procedure: one day-long episode per iteration, epsilon decays
// per episode, updates run once per environment step after the buffer warmup,
// periodic greedy validation. Bit-reproducible for a fixed seed.
inline TrainResult train(const EpisodePool& pool, const AgentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    require(!pool.train_days.empty(), "training day pool is empty");

    Rng rng(seed);
    env::Environment probe = pool.make_env(pool.train_days.front());
    const int state_dim = env::EnvState::dimension;
    const int n_actions = probe.num_actions();

    std::vector<int> dims;
    dims.push_back(state_dim);
    for (int h : cfg.hidden) dims.push_back(h);
    dims.push_back(n_actions);
    neural::DenseNet q_net(dims, rng);
    neural::DenseNet target_net = q_net;
    neural::DenseAdam optimizer;
    ReplayBuffer buffer(cfg.buffer_capacity);

    TrainResult result;
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        const double eps = epsilon_after(cfg, ep);
        const std::size_t day_idx = rng.uniform_index(pool.train_days.size());
        env::Environment episode_env = pool.make_env(pool.train_days[day_idx]);

        EpisodeLog log;
        log.episode = ep + 1;
        log.epsilon = eps;
        double loss_sum = 0.0;
        int loss_count = 0;

        Vec s = episode_env.state().to_vector();
        while (!episode_env.done()) {
            const int a = select_action(q_net, s, eps, rng);
            const env::StepResult r = episode_env.step(a);
            Vec s2 = r.next_state.to_vector();
            buffer.push(Transition{s, a, r.reward, s2, r.done});
            log.train_reward += r.reward;
            if (buffer.size() >= cfg.min_buffer) {
                try {
                    if (auto loss = train_step(q_net, target_net, optimizer, buffer, cfg, rng)) {
                        loss_sum += *loss;
                        ++loss_count;
                    }
                } catch (const NumericError& e) {
                    // abort but hand back the network and logs so the caller
                    // can checkpoint the state at failure
                    result.abort_reason =
                        std::string(e.what()) + " (episode " + std::to_string(ep + 1) + ")";
                    log.loss_mean = loss_count > 0 ? loss_sum / loss_count : 0.0;
                    result.log.push_back(log);
                    result.q_net = std::move(q_net);
                    return result;
                }
            }
            s = std::move(s2);
        }
        log.loss_mean = loss_count > 0 ? loss_sum / loss_count : 0.0;

        if (!pool.val_days.empty() && (ep + 1) % cfg.val_every == 0) {
            double total = 0.0;
            for (const auto& day : pool.val_days) {
                env::Environment val_env = pool.make_env(day);
                total += evaluate(q_net, val_env).total_reward;
            }
            log.val_reward = total / static_cast<double>(pool.val_days.size());
        }
        result.log.push_back(log);
    }
    result.q_net = std::move(q_net);
    return result;
}

inline void write_train_log_csv(const std::vector<EpisodeLog>& log, std::ostream& out) {
    out << "episode,train_reward,epsilon,loss_mean,val_reward\n";
    char buf[64];
    for (const auto& row : log) {
        if (std::isnan(row.val_reward)) {
            std::snprintf(buf, sizeof(buf), "%d,%.9f,%.9f,%.9f,\n", row.episode, row.train_reward,
                          row.epsilon, row.loss_mean);
        } else {
            std::snprintf(buf, sizeof(buf), "%d,%.9f,%.9f,%.9f,%.9f\n", row.episode,
                          row.train_reward, row.epsilon, row.loss_mean, row.val_reward);
        }
        out << buf;
    }
}

}  // namespace ccdr::agent
