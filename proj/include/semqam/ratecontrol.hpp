#pragma once

// Channel-adaptive payload sizing: tabular Q-learning over binned SNR with a
// reward trading task quality, compression, adaptivity, and reliability.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "semqam/common.hpp"

namespace semqam {

struct RewardConfig {
    double lambda_ber = 10.0;
    double alpha = 0.2;
    double quality_threshold = 0.85;
    double edge_penalty = 0.1;
    double adapt_coeff = 0.1;
    int k_min = 5;
    int k_max = 64;
};

struct QAgent {
    std::vector<std::vector<double>> q_values;  // bins x actions
    std::vector<int> actions;                   // K per action index
    double snr_min_db = -10.0;
    double snr_max_db = 20.0;
    double epsilon = 1.0;
    double epsilon_min = 0.01;
    double epsilon_decay = 0.995;
    double learning_rate = 0.1;
    double discount = 0.99;

    int num_bins() const { return int(q_values.size()); }
    int num_actions() const { return int(actions.size()); }
};

inline std::vector<int> action_space(int k_min, int k_max, int count) {
    if (count < 2) throw ConfigError("action_space: need at least 2 actions");
    if (k_min >= k_max) throw ConfigError("action_space: k_min must be < k_max");
    if (count > k_max - k_min + 1)
        throw ConfigError("action_space: " + std::to_string(count) +
                          " actions cannot fit in [" + std::to_string(k_min) + "," +
                          std::to_string(k_max) + "]");
    std::vector<int> ks(count);
    const double spacing = double(k_max - k_min) / double(count - 1);
    for (int i = 0; i < count; ++i) ks[i] = int(std::lround(k_min + spacing * i));
    for (int i = 1; i < count; ++i)
        if (ks[i] <= ks[i - 1]) ks[i] = ks[i - 1] + 1;
    return ks;
}

inline QAgent make_agent(int bins = 16, const std::vector<int>& actions = action_space(5, 64, 12),
                         double snr_min_db = -10.0, double snr_max_db = 20.0) {
    QAgent agent;
    agent.q_values.assign(bins, std::vector<double>(actions.size(), 0.0));
    agent.actions = actions;
    agent.snr_min_db = snr_min_db;
    agent.snr_max_db = snr_max_db;
    return agent;
}

inline double reward(double q_task, int K, int N, double ber, double snr_norm,
                     const RewardConfig& cfg) {
    if (K <= 0) throw ConfigError("reward: K must be positive");
    const double b_comp = q_task > cfg.quality_threshold ? cfg.alpha * std::log(double(N) / K) : 0.0;
    const double k_frac = double(K) / double(N);
    const double b_adapt = cfg.adapt_coeff * (snr_norm * (1.0 - k_frac) + (1.0 - snr_norm) * k_frac);
    const double penalty = (K == cfg.k_min || K == cfg.k_max) ? cfg.edge_penalty : 0.0;
    return q_task + b_comp + b_adapt - cfg.lambda_ber * ber - penalty;
}

inline int snr_bin(const QAgent& agent, double snr_norm) {
    const int b = int(std::floor(snr_norm * agent.num_bins()));
    return std::clamp(b, 0, agent.num_bins() - 1);
}

inline int greedy_action(const QAgent& agent, int bin) {
    const auto& row = agent.q_values[bin];
    int best = 0;
    for (int a = 1; a < int(row.size()); ++a)
        if (row[a] > row[best]) best = a;
    return best;
}

inline int act(const QAgent& agent, double snr_norm, Rng& rng) {
    if (rng.uniform() < agent.epsilon) return int(rng.below(agent.num_actions()));
    return greedy_action(agent, snr_bin(agent, snr_norm));
}

inline void update(QAgent& agent, int state_bin, int action, double r, int next_state_bin) {
    const auto& next_row = agent.q_values[next_state_bin];
    const double best_next = *std::max_element(next_row.begin(), next_row.end());
    double& q = agent.q_values[state_bin][action];
    q += agent.learning_rate * (r + agent.discount * best_next - q);
    agent.epsilon = std::max(agent.epsilon_min, agent.epsilon * agent.epsilon_decay);
}

// evaluator(K, snr_db, episode_seed) -> (Q_task, ber)
using RateEvaluator = std::function<std::pair<double, double>(int, double, std::uint64_t)>;

struct TrainAgentResult {
    QAgent agent;
    std::vector<double> episode_rewards;
};

inline TrainAgentResult train_agent(const RateEvaluator& evaluator, int episodes, int N,
                                    const RewardConfig& cfg, std::uint64_t seed,
                                    QAgent agent = make_agent()) {
    TrainAgentResult result{std::move(agent), {}};
    QAgent& ag = result.agent;
    Rng rng(mix_seed(seed, 0x9a9e, 0));
    const double span = ag.snr_max_db - ag.snr_min_db;
    for (int ep = 0; ep < episodes; ++ep) {
        const double snr_db = ag.snr_min_db + span * rng.uniform();
        const double snr_norm = span > 0.0 ? (snr_db - ag.snr_min_db) / span : 0.0;
        const int bin = snr_bin(ag, snr_norm);
        const int action = act(ag, snr_norm, rng);
        const int K = ag.actions[action];
        const auto [q_task, ber] = evaluator(K, snr_db, mix_seed(seed, 0xe9, std::uint64_t(ep)));
        const double r = reward(q_task, K, N, ber, snr_norm, cfg);
        const int next_bin = snr_bin(ag, rng.uniform());
        update(ag, bin, action, r, next_bin);
        result.episode_rewards.push_back(r);
    }
    return result;
}

// Mean greedy K over the bins covering the top and bottom of the SNR range.
inline double mean_selected_k(const QAgent& agent, int bin_lo, int bin_hi) {
    double acc = 0.0;
    int n = 0;
    for (int b = bin_lo; b <= bin_hi; ++b) {
        acc += agent.actions[greedy_action(agent, b)];
        ++n;
    }
    return n ? acc / n : 0.0;
}

}  // namespace semqam
