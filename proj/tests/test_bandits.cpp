#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "incentix/bandits.hpp"

using namespace incentix;

namespace {

Trace run(BanditAlgorithm alg, MeanVector mu, RewardModel model, int T, std::uint64_t seed) {
    return run_bandit(alg, mu, model, T, RngStream(seed));
}

}  // namespace

TEST(ConfidenceRadius, Values) {
    EXPECT_NEAR(confidence_radius(2, 1000), std::sqrt(std::log(1000.0)), 1e-12);
    EXPECT_NEAR(confidence_radius(2, 1000), 2.6283, 1e-4);
    EXPECT_NEAR(confidence_radius(16, 2981), 1.0, 1e-3);
    for (int n = 1; n < 50; ++n) EXPECT_GT(confidence_radius(n, 500), confidence_radius(n + 1, 500));
    EXPECT_THROW(confidence_radius(0, 100), Error);
    EXPECT_THROW(confidence_radius(1, 1), Error);
}

TEST(RunBandit, AlwaysArm2) {
    const Trace tr = run(BanditAlgorithm::always(Arm::Two, 10), {0.3, 0.1}, RewardModel::Bernoulli, 10, 1);
    ASSERT_EQ(tr.rounds.size(), 10u);
    for (std::size_t i = 0; i < tr.rounds.size(); ++i) {
        EXPECT_EQ(tr.rounds[i].arm, Arm::Two);
        EXPECT_EQ(tr.rounds[i].t, static_cast<int>(i) + 1);
    }
}

TEST(RunBandit, AdaptiveRaceCommitsToBetterArm) {
    const int T = 1000;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        BanditAlgorithm alg = BanditAlgorithm::adaptive_race(T);
        const Trace tr = run_bandit(alg, {1.0, 0.0}, RewardModel::Deterministic, T, RngStream(seed));
        ASSERT_EQ(alg.committed_arm(), Arm::One);
        const int tau = alg.core_as<detail::AdaptiveRaceCore>()->commit_round();
        // Recount at tau and check the separation condition.
        int n1 = 0, n2 = 0;
        for (int t = 0; t < tau; ++t) (tr.rounds[t].arm == Arm::One ? n1 : n2)++;
        ASSERT_GT(n1, 0);
        ASSERT_GT(n2, 0);
        EXPECT_GT(1.0 - confidence_radius(n1, T), 0.0 + confidence_radius(n2, T));
        // Not separated one round earlier.
        int m1 = 0, m2 = 0;
        for (int t = 0; t < tau - 1; ++t) (tr.rounds[t].arm == Arm::One ? m1 : m2)++;
        if (m1 > 0 && m2 > 0) {
            EXPECT_LE(1.0 - confidence_radius(m1, T), confidence_radius(m2, T));
        }
        for (int t = tau; t < T; ++t) ASSERT_EQ(tr.rounds[t].arm, Arm::One);
    }
}

TEST(RunBandit, AdaptiveRaceNeverCommitsOnEqualArms) {
    BanditAlgorithm alg = BanditAlgorithm::adaptive_race(500);
    const Trace tr = run_bandit(alg, {0.5, 0.5}, RewardModel::Deterministic, 500, RngStream(3));
    EXPECT_FALSE(alg.committed_arm().has_value());
    EXPECT_EQ(tr.rounds.size(), 500u);
}

TEST(RunBandit, AdaptiveRaceBalanceEnvelope) {
    // Before commitment choices are fair coins: |n1 - n2| stays within
    // 4 sigma of a simple random walk.
    const int T = 4000;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        BanditAlgorithm alg = BanditAlgorithm::adaptive_race(T);
        const Trace tr = run_bandit(alg, {0.5, 0.5}, RewardModel::Deterministic, T, RngStream(seed));
        int diff = 0;
        for (int t = 0; t < T; ++t) {
            diff += tr.rounds[t].arm == Arm::One ? 1 : -1;
            ASSERT_LE(std::abs(diff), 4.0 * std::sqrt((t + 1) * std::log(double(T))));
        }
    }
}

TEST(RunBandit, GreedyOnPriorARevealingHighArm1) {
    const auto prior = fixtures::prior_a();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        BanditAlgorithm g = BanditAlgorithm::greedy(prior, RewardModel::Deterministic, 10);
        const Trace tr = run_bandit(g, {0.8, 1.0}, RewardModel::Deterministic, 10, RngStream(seed));
        for (const auto& r : tr.rounds) EXPECT_EQ(r.arm, Arm::One);
    }
    // mu1 = 0.2 revealed: greedy switches to arm 2 in round 2.
    BanditAlgorithm g = BanditAlgorithm::greedy(prior, RewardModel::Deterministic, 10);
    const Trace tr = run_bandit(g, {0.2, 0.0}, RewardModel::Deterministic, 10, RngStream(0));
    EXPECT_EQ(tr.rounds[0].arm, Arm::One);
    EXPECT_EQ(tr.rounds[1].arm, Arm::Two);
    for (std::size_t t = 2; t < tr.rounds.size(); ++t) EXPECT_EQ(tr.rounds[t].arm, Arm::One);
}

TEST(RunBandit, GreedyMatchesPosteriorArgmax) {
    const auto prior = fixtures::prior_d();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        BanditAlgorithm g = BanditAlgorithm::greedy(prior, RewardModel::Bernoulli, 60);
        const Trace tr = run_bandit(g, {0.3, 0.75}, RewardModel::Bernoulli, 60, RngStream(seed));
        std::vector<Observation> history;
        for (const auto& r : tr.rounds) {
            const Arm expect = preferred_arm(posterior_belief(prior, RewardModel::Bernoulli, history));
            ASSERT_EQ(r.arm, expect);
            history.push_back({r.arm, r.reward});
        }
    }
}

TEST(RunBandit, ExploreFirstSchedule) {
    const Trace tr = run(BanditAlgorithm::explore_first(3, 20), {0.9, 0.1}, RewardModel::Deterministic, 20, 0);
    const Arm expect[6] = {Arm::One, Arm::Two, Arm::One, Arm::Two, Arm::One, Arm::Two};
    for (int t = 0; t < 6; ++t) EXPECT_EQ(tr.rounds[t].arm, expect[t]);
    for (int t = 6; t < 20; ++t) EXPECT_EQ(tr.rounds[t].arm, Arm::One);
}

TEST(RunBandit, RoundRobinAlternates) {
    const Trace tr = run(BanditAlgorithm::round_robin(9), {0.5, 0.5}, RewardModel::Bernoulli, 9, 0);
    for (int t = 0; t < 9; ++t) EXPECT_EQ(tr.rounds[t].arm, t % 2 == 0 ? Arm::One : Arm::Two);
}

TEST(RunBandit, Ucb1SamplesBothThenPrefersBest) {
    const Trace tr = run(BanditAlgorithm::ucb1(2000), {0.9, 0.1}, RewardModel::Bernoulli, 2000, 4);
    EXPECT_EQ(tr.rounds[0].arm, Arm::One);
    EXPECT_EQ(tr.rounds[1].arm, Arm::Two);
    int n1 = 0;
    for (const auto& r : tr.rounds) n1 += r.arm == Arm::One;
    EXPECT_GT(n1, 1800);
}

TEST(RunBandit, ThompsonRequiresBernoulli) {
    BanditAlgorithm ts = BanditAlgorithm::thompson(10);
    EXPECT_TRUE(ts.requires_bernoulli());
    EXPECT_FALSE(ts.prob_arm2().has_value());
    EXPECT_THROW(run_bandit(ts, {0.5, 0.5}, RewardModel::Deterministic, 10, RngStream(0)), Error);
    const Trace tr = run(BanditAlgorithm::thompson(3000), {0.8, 0.2}, RewardModel::Bernoulli, 3000, 2);
    int n1 = 0;
    for (const auto& r : tr.rounds) n1 += r.arm == Arm::One;
    EXPECT_GT(n1, 2800);
    EXPECT_THROW(BanditAlgorithm::thompson(10, {0.0, 1.0}), Error);
}

TEST(RunBandit, EpsilonGreedyLaw) {
    BanditAlgorithm eg = BanditAlgorithm::epsilon_greedy(100, [](int) { return 0.2; });
    eg.reset(0);
    EXPECT_NEAR(*eg.prob_arm2(), 0.1, 1e-15);  // unpulled: leader is arm 1
    eg.update(Arm::One, 0.0);
    eg.update(Arm::Two, 1.0);
    EXPECT_NEAR(*eg.prob_arm2(), 0.9, 1e-15);
}

TEST(RunBandit, DeterministicGivenSeed) {
    const Trace a = run(BanditAlgorithm::adaptive_race(300), {0.4, 0.6}, RewardModel::Bernoulli, 300, 77);
    const Trace b = run(BanditAlgorithm::adaptive_race(300), {0.4, 0.6}, RewardModel::Bernoulli, 300, 77);
    ASSERT_EQ(a.rounds.size(), b.rounds.size());
    for (std::size_t i = 0; i < a.rounds.size(); ++i) {
        EXPECT_EQ(a.rounds[i].arm, b.rounds[i].arm);
        EXPECT_EQ(a.rounds[i].reward, b.rounds[i].reward);
    }
}

TEST(BanditAlgorithm, UpdateMustMatchChoice) {
    BanditAlgorithm alg = BanditAlgorithm::always(Arm::Two, 10);
    alg.reset(0);
    EXPECT_EQ(alg.choose(), Arm::Two);
    EXPECT_THROW(alg.update(Arm::One, 1.0), Error);
    alg.update(Arm::Two, 1.0);
    EXPECT_EQ(alg.stats(Arm::Two).pulls, 1);
    EXPECT_EQ(alg.rounds_played(), 1);
}

TEST(BanditAlgorithm, CopiesAreIndependent) {
    BanditAlgorithm a = BanditAlgorithm::adaptive_race(100);
    a.reset(1);
    a.update(Arm::One, 1.0);
    BanditAlgorithm b = a;
    b.update(Arm::Two, 0.0);
    EXPECT_EQ(a.rounds_played(), 1);
    EXPECT_EQ(b.rounds_played(), 2);
}

TEST(RegretReport, Examples) {
    const MeanVector mu{0.5, 0.7};
    Trace tr;
    for (int t = 1; t <= 10; ++t) tr.rounds.push_back({t, t <= 3 ? Arm::One : Arm::Two, 0.0});
    const RegretReport rep = regret_report(tr, mu);
    EXPECT_NEAR(rep.total(), 0.6, 1e-12);
    EXPECT_NEAR(rep.gap, 0.2, 1e-12);
    double sum = 0.0;
    for (double x : rep.instantaneous) {
        sum += x;
        EXPECT_TRUE(x == 0.0 || std::abs(x - rep.gap) < 1e-15);
    }
    EXPECT_NEAR(sum, rep.total(), 1e-12);

    Trace best;
    for (int t = 1; t <= 5; ++t) best.rounds.push_back({t, Arm::Two, 1.0});
    EXPECT_EQ(regret_report(best, mu).total(), 0.0);
}

TEST(BayesianRegret, AlwaysArm1OnPriorA) {
    const auto prior = fixtures::prior_a();
    const auto est = bayesian_regret(BanditAlgorithm::always(Arm::One, 100), prior, RewardModel::Deterministic, 100,
                                     20000, 5);
    // 100 * E[(mu2 - mu1)^+] over the four atoms.
    double oracle = 0.0;
    for (const auto& a : prior.atoms()) oracle += a.weight * std::max(0.0, a.mean.mu2 - a.mean.mu1);
    oracle *= 100.0;
    EXPECT_NEAR(oracle, 20.0, 1e-9);
    EXPECT_NEAR(est.mean, oracle, std::max(est.half_width * 1.5, 1e-9));
}

TEST(BayesianRegret, PointMassTie) {
    const auto prior = make_discrete_prior({{{0.6, 0.6}, 1.0}});
    const auto est = bayesian_regret(BanditAlgorithm::round_robin(50), prior, RewardModel::Bernoulli, 50, 100, 0);
    EXPECT_EQ(est.mean, 0.0);
    EXPECT_EQ(est.half_width, 0.0);
}

TEST(BayesianRegret, Reproducible) {
    const auto prior = fixtures::prior_d();
    const auto a = bayesian_regret(BanditAlgorithm::ucb1(200), prior, RewardModel::Bernoulli, 200, 600, 9);
    const auto b = bayesian_regret(BanditAlgorithm::ucb1(200), prior, RewardModel::Bernoulli, 200, 600, 9);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.half_width, b.half_width);
    EXPECT_THROW(bayesian_regret(BanditAlgorithm::ucb1(10), prior, RewardModel::Bernoulli, 10, 1, 0), Error);
}

TEST(RegretCurve, FixedInstanceEnvelopes) {
    // Looser, cheaper cousins of the acceptance envelopes.
    const MeanVector mu{0.5, 0.7};
    const int T = 1000;
    auto fixed = [mu](RngStream&) { return mu; };
    const double logT = std::log(double(T));
    const auto ar = regret_curve(BanditAlgorithm::adaptive_race(T), fixed, RewardModel::Bernoulli, T, 300, 1);
    EXPECT_LE(ar.cum_regret_mean.back(), 20.0 * std::sqrt(T * logT));
    const auto eg = regret_curve(BanditAlgorithm::epsilon_greedy(T), fixed, RewardModel::Bernoulli, T, 300, 1);
    EXPECT_LE(eg.cum_regret_mean.back(), 20.0 * std::pow(T, 2.0 / 3.0) * std::sqrt(logT));
    for (std::size_t t = 0; t < ar.arm1_freq.size(); ++t) {
        EXPECT_NEAR(ar.arm1_freq[t] + ar.arm2_freq[t], 1.0, 1e-12);
        if (t) {
            EXPECT_GE(ar.cum_regret_mean[t], ar.cum_regret_mean[t - 1]);
        }
    }
}

TEST(AlgorithmSpec, Parse) {
    const auto prior = fixtures::prior_d();
    const AlgorithmContext ctx{100, &prior, RewardModel::Bernoulli};
    EXPECT_EQ(parse_algorithm_spec("adaptive-race", ctx).name(), "adaptive-race");
    EXPECT_EQ(parse_algorithm_spec("explore-first:7", ctx).name(), "explore-first:7");
    EXPECT_EQ(parse_algorithm_spec("explore-first", ctx).name(), "explore-first:22");
    EXPECT_EQ(parse_algorithm_spec("eps-greedy", ctx).name(), "eps-greedy");
    EXPECT_EQ(parse_algorithm_spec("ucb1", ctx).name(), "ucb1");
    EXPECT_EQ(parse_algorithm_spec("thompson", ctx).name(), "thompson");
    EXPECT_EQ(parse_algorithm_spec("greedy", ctx).name(), "greedy");
    EXPECT_EQ(parse_algorithm_spec("always:2", ctx).name(), "always:2");
    EXPECT_EQ(parse_algorithm_spec("round-robin", ctx).name(), "round-robin");
    for (const char* bad : {"always:3", "explore-first:x", "explore-first:-1", "ucb1:4", "softmax", ""}) {
        try {
            parse_algorithm_spec(bad, ctx);
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::ParseError) << bad;
        }
    }
    const AlgorithmContext no_prior{100, nullptr, RewardModel::Bernoulli};
    EXPECT_THROW(parse_algorithm_spec("greedy", no_prior), Error);
}
