#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "semqam/ratecontrol.hpp"

using namespace semqam;

TEST_CASE("default action grid spans 5..64 in twelve steps") {
    const std::vector<int> want = {5, 10, 16, 21, 26, 32, 37, 43, 48, 53, 59, 64};
    REQUIRE(action_space(5, 64, 12) == want);
    REQUIRE(action_space(5, 64, 2) == std::vector<int>{5, 64});
}

TEST_CASE("action grids are strictly increasing within bounds") {
    for (int k_min = 1; k_min <= 6; ++k_min) {
        for (int k_max = k_min + 1; k_max <= 30; ++k_max) {
            for (int count = 2; count <= k_max - k_min + 1; ++count) {
                const auto ks = action_space(k_min, k_max, count);
                REQUIRE(int(ks.size()) == count);
                REQUIRE(ks.front() == k_min);
                REQUIRE(ks.back() == k_max);
                for (std::size_t i = 1; i < ks.size(); ++i) REQUIRE(ks[i] > ks[i - 1]);
                for (int k : ks) {
                    REQUIRE(k >= k_min);
                    REQUIRE(k <= k_max);
                }
            }
        }
    }
    REQUIRE_THROWS_AS(action_space(5, 64, 1), ConfigError);
    REQUIRE_THROWS_AS(action_space(5, 64, 61), ConfigError);
    REQUIRE_THROWS_AS(action_space(10, 10, 2), ConfigError);
}

TEST_CASE("reward components match the definition") {
    RewardConfig cfg;

    SECTION("compression bonus above the quality gate") {
        const double base = reward(0.9, 32, 64, 0.0, 0.5, cfg);
        // q + alpha ln 2 + adaptivity at the midpoint
        REQUIRE_THAT(base - 0.9 - 0.05, Catch::Matchers::WithinAbs(0.2 * std::log(2.0), 1e-9));
        REQUIRE_THAT(base - 0.9 - 0.05, Catch::Matchers::WithinAbs(0.138629, 1e-6));
    }
    SECTION("no bonus at or below the gate") {
        REQUIRE_THAT(reward(0.84, 32, 64, 0.0, 0.5, cfg) - 0.84 - 0.05,
                     Catch::Matchers::WithinAbs(0.0, 1e-12));
        REQUIRE_THAT(reward(0.85, 32, 64, 0.0, 0.5, cfg) - 0.85 - 0.05,
                     Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
    SECTION("reliability penalty slope is lambda") {
        const double clean = reward(0.5, 32, 64, 0.0, 0.3, cfg);
        const double dirty = reward(0.5, 32, 64, 0.1, 0.3, cfg);
        REQUIRE_THAT(clean - dirty, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    SECTION("edge actions pay the boundary penalty") {
        const double off_edge = reward(0.5, 32, 64, 0.0, 0.0, cfg);
        const double k_frac = 32.0 / 64.0;
        REQUIRE_THAT(off_edge, Catch::Matchers::WithinAbs(0.5 + 0.1 * k_frac, 1e-12));
        const double at_min = reward(0.5, 5, 64, 0.0, 0.0, cfg);
        REQUIRE_THAT(at_min, Catch::Matchers::WithinAbs(0.5 + 0.1 * (5.0 / 64.0) - 0.1, 1e-12));
        const double at_max = reward(0.5, 64, 64, 0.0, 1.0, cfg);
        REQUIRE_THAT(at_max, Catch::Matchers::WithinAbs(0.5 + 0.0 - 0.1, 1e-12));
    }
    SECTION("adaptivity prefers small payloads at high snr") {
        const double small_high = reward(0.5, 16, 64, 0.0, 1.0, cfg);
        const double large_high = reward(0.5, 48, 64, 0.0, 1.0, cfg);
        REQUIRE(small_high > large_high);
        const double small_low = reward(0.5, 16, 64, 0.0, 0.0, cfg);
        const double large_low = reward(0.5, 48, 64, 0.0, 0.0, cfg);
        REQUIRE(large_low > small_low);
    }
    SECTION("invalid payload size") {
        REQUIRE_THROWS_AS(reward(0.5, 0, 64, 0.0, 0.5, cfg), ConfigError);
    }
}

TEST_CASE("snr binning clamps out-of-range values") {
    const QAgent agent = make_agent(16);
    REQUIRE(snr_bin(agent, -0.5) == 0);
    REQUIRE(snr_bin(agent, 0.0) == 0);
    REQUIRE(snr_bin(agent, 0.999) == 15);
    REQUIRE(snr_bin(agent, 1.5) == 15);
    REQUIRE(snr_bin(agent, 0.5) == 8);
}

TEST_CASE("greedy action breaks ties toward the lower index") {
    QAgent agent = make_agent(2, action_space(5, 64, 4));
    agent.q_values[0] = {1.0, 1.0, 0.5, 0.2};
    REQUIRE(greedy_action(agent, 0) == 0);
    agent.q_values[1] = {0.0, 0.2, 0.2, 0.1};
    REQUIRE(greedy_action(agent, 1) == 1);
}

TEST_CASE("exploitation follows the table, exploration is uniform") {
    QAgent agent = make_agent(4, action_space(5, 64, 12));
    agent.q_values[3][7] = 5.0;

    SECTION("epsilon 0 exploits") {
        agent.epsilon = 0.0;
        Rng rng(3);
        for (int i = 0; i < 20; ++i) REQUIRE(act(agent, 0.99, rng) == 7);
    }
    SECTION("epsilon 1 explores uniformly") {
        agent.epsilon = 1.0;
        Rng rng(5);
        std::vector<int> counts(12, 0);
        const int n = 120000;
        for (int i = 0; i < n; ++i) ++counts[act(agent, 0.99, rng)];
        for (int a = 0; a < 12; ++a)
            REQUIRE_THAT(double(counts[a]) / n, Catch::Matchers::WithinAbs(1.0 / 12.0, 0.005));
    }
}

TEST_CASE("q update implements the bellman step") {
    QAgent agent = make_agent(2, action_space(5, 64, 4));

    SECTION("full learning rate with no discount copies the reward") {
        agent.learning_rate = 1.0;
        agent.discount = 0.0;
        update(agent, 0, 1, 2.0, 1);
        REQUIRE_THAT(agent.q_values[0][1], Catch::Matchers::WithinAbs(2.0, 1e-15));
    }
    SECTION("zero learning rate changes nothing") {
        agent.learning_rate = 0.0;
        update(agent, 0, 1, 2.0, 1);
        REQUIRE(agent.q_values[0][1] == 0.0);
    }
    SECTION("repeated updates converge geometrically to r/(1-discount)") {
        agent.learning_rate = 0.5;
        agent.discount = 0.5;
        double prev_gap = 2.0;
        for (int t = 0; t < 60; ++t) {
            update(agent, 0, 0, 1.0, 0);
            const double gap = std::fabs(agent.q_values[0][0] - 2.0);
            REQUIRE(gap <= prev_gap * 0.75 + 1e-12);
            prev_gap = gap;
        }
        REQUIRE_THAT(agent.q_values[0][0], Catch::Matchers::WithinAbs(2.0, 1e-6));
    }
    SECTION("epsilon decays to its floor") {
        agent.epsilon = 1.0;
        agent.epsilon_min = 0.01;
        agent.epsilon_decay = 0.5;
        for (int t = 0; t < 20; ++t) update(agent, 0, 0, 0.0, 0);
        REQUIRE(agent.epsilon == 0.01);
    }
}

TEST_CASE("training converges to snr-dependent payload sizes") {
    // quality collapses at low snr for every K; at high snr only K >= 32
    // clears the gate, so compression should win the top bins and the
    // adaptivity term should push the bottom bins toward large K. The SNR
    // draws are action-independent, so a myopic agent learns the exact
    // per-action mean rewards: argmax 32 in the gated bins, 59 below them.
    const RateEvaluator evaluator = [](int K, double snr_db, std::uint64_t) {
        const double q = snr_db < 5.0 ? 0.5 : (K >= 32 ? 0.9 : 0.5);
        return std::make_pair(q, 0.0);
    };
    auto myopic = [] {
        QAgent agent = make_agent(4);
        agent.discount = 0.0;
        agent.learning_rate = 0.25;
        agent.epsilon_decay = 0.999;
        return agent;
    };
    RewardConfig cfg;
    const TrainAgentResult res = train_agent(evaluator, 6000, 64, cfg, 17, myopic());
    REQUIRE(res.episode_rewards.size() == 6000);
    const double low_k = mean_selected_k(res.agent, 0, 1);
    const double high_k = mean_selected_k(res.agent, res.agent.num_bins() - 2,
                                          res.agent.num_bins() - 1);
    REQUIRE(high_k < low_k);
    REQUIRE(high_k == 32.0);
    REQUIRE(mean_selected_k(res.agent, 0, 0) == 59.0);
    REQUIRE(res.agent.epsilon < 0.05);

    SECTION("training is reproducible") {
        const TrainAgentResult again = train_agent(evaluator, 6000, 64, cfg, 17, myopic());
        REQUIRE(again.episode_rewards == res.episode_rewards);
        REQUIRE(again.agent.q_values == res.agent.q_values);
    }
    SECTION("zero episodes leaves the zero table") {
        const TrainAgentResult none = train_agent(evaluator, 0, 64, cfg, 17, myopic());
        for (const auto& row : none.agent.q_values)
            for (double v : row) REQUIRE(v == 0.0);
    }
}
