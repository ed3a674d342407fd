#pragma once

// Principal/agent game simulation and BIC verification.
//
// A recommendation policy is either RepeatedHP or a bandit algorithm whose
// choices are recommended directly (Greedy in that role is the
// full-revelation baseline: with the whole history revealed, agents pick
// exactly what Greedy recommends).

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "incentix/bandits.hpp"
#include "incentix/bayes_core.hpp"
#include "incentix/error.hpp"
#include "incentix/incentivized.hpp"
#include "incentix/parallel.hpp"
#include "incentix/rng.hpp"

namespace incentix {

class RecommendationPolicy {
public:
    RecommendationPolicy(RepeatedHP hp) : impl_(std::move(hp)) {}           // NOLINT
    RecommendationPolicy(BanditAlgorithm alg) : impl_(std::move(alg)) {}    // NOLINT

    void reset(std::uint64_t seed) {
        if (auto* hp = std::get_if<RepeatedHP>(&impl_)) {
            hp->reset(seed);
        } else {
            std::get<BanditAlgorithm>(impl_).reset(derive_seed(seed, "direct"));
        }
    }

    Recommendation recommend(RngStream& coins) {
        if (auto* hp = std::get_if<RepeatedHP>(&impl_)) return hp->recommend(coins);
        return {std::get<BanditAlgorithm>(impl_).choose(), Branch::Direct};
    }

    void update(const Recommendation& rec, Arm pulled, double reward) {
        if (auto* hp = std::get_if<RepeatedHP>(&impl_)) return hp->update(rec, pulled, reward);
        auto& alg = std::get<BanditAlgorithm>(impl_);
        if (pulled != rec.arm) alg.discard_pending();
        alg.update(pulled, reward);
    }

    std::vector<WeightedRecommendation> recommendation_law() const {
        if (const auto* hp = std::get_if<RepeatedHP>(&impl_)) return hp->recommendation_law();
        const auto& alg = std::get<BanditAlgorithm>(impl_);
        const auto q = alg.prob_arm2();
        if (!q) throw Error(ErrorKind::NonEnumerablePolicy, alg.name() + " has no exact choice law");
        std::vector<WeightedRecommendation> law;
        if (*q < 1.0) law.push_back({1.0 - *q, {Arm::One, Branch::Direct}});
        if (*q > 0.0) law.push_back({*q, {Arm::Two, Branch::Direct}});
        return law;
    }

    void apply(const Recommendation& rec, Arm pulled, double reward) {
        if (auto* hp = std::get_if<RepeatedHP>(&impl_)) return hp->apply(rec, pulled, reward);
        std::get<BanditAlgorithm>(impl_).update(pulled, reward);
    }

    void append_key(std::string& out) const {
        std::visit([&](const auto& p) { p.append_key(out); }, impl_);
    }

    bool requires_bernoulli() const {
        if (const auto* hp = std::get_if<RepeatedHP>(&impl_)) return hp->inner().requires_bernoulli();
        return std::get<BanditAlgorithm>(impl_).requires_bernoulli();
    }

    const RepeatedHP* repeated_hp() const { return std::get_if<RepeatedHP>(&impl_); }
    const BanditAlgorithm* direct() const { return std::get_if<BanditAlgorithm>(&impl_); }

private:
    std::variant<RepeatedHP, BanditAlgorithm> impl_;
};

enum class AgentMode { Compliant, RationalExact };
enum class VerificationMode { Exact, MonteCarlo };

inline std::string_view to_string(VerificationMode m) { return m == VerificationMode::Exact ? "exact" : "mc"; }

/// Pass criterion slack: arm-1 slack must be >= -tol, arm-2 slack > tol.
inline constexpr double kSlackTolerance = 1e-12;
inline constexpr int kDefaultExactCap = 8;

struct BicRound {
    int t = 0;
    std::array<std::optional<double>, 2> slack;  ///< E[mu_rec - mu_other | rec], by rec slot
    std::array<double, 2> rec_prob{0.0, 0.0};     ///< Pr[rec] (exact) or frequency (MC)
    std::array<double, 2> half_width{0.0, 0.0};  ///< zero in exact mode
};

struct BicReport {
    VerificationMode mode = VerificationMode::Exact;
    std::vector<BicRound> rounds;

    /// Exact: arm-2 slacks strictly positive, arm-1 slacks nonnegative.
    /// Monte Carlo: no defined slack is below zero by more than its half-width.
    bool passes() const {
        for (const auto& r : rounds) {
            for (Arm a : {Arm::One, Arm::Two}) {
                const auto& s = r.slack[slot(a)];
                if (!s) continue;
                if (mode == VerificationMode::MonteCarlo) {
                    if (*s + r.half_width[slot(a)] < 0.0) return false;
                } else if (a == Arm::Two ? !(*s > kSlackTolerance) : !(*s >= -kSlackTolerance)) {
                    return false;
                }
            }
        }
        return true;
    }
};

namespace detail {

struct RoundLaw {
    std::array<double, 2> mass{0.0, 0.0};
    std::array<double, 2> gap_mass{0.0, 0.0};  ///< sum of weight * (mu2 - mu1)
};

struct ReportedOutcome {
    double probability;
    double reward;
};

inline void reward_outcomes(RewardModel model, double mean, std::vector<ReportedOutcome>& out) {
    out.clear();
    if (model == RewardModel::Deterministic) {
        out.push_back({1.0, mean});
        return;
    }
    if (mean > 0.0) out.push_back({mean, 1.0});
    if (mean < 1.0) out.push_back({1.0 - mean, 0.0});
}

// Forward enumeration over (atom x recommendation coins x rewards). Paths
// with equal (atom, policy state) are merged. `choose(t, rec, law)` gives the
// arm the agent pulls given the round-t joint law of (mu, rec).
template <class AgentRule>
std::vector<RoundLaw> enumerate_game(const RecommendationPolicy& policy, const DiscretePrior& prior,
                                     RewardModel model, int horizon, int cap, AgentRule choose) {
    if (horizon > cap) {
        throw Error(ErrorKind::ExactCapExceeded,
                    "T=" + std::to_string(horizon) + " exceeds exact cap " + std::to_string(cap));
    }
    if (policy.requires_bernoulli() && model != RewardModel::Bernoulli) {
        throw Error(ErrorKind::DomainError, "policy requires the Bernoulli reward model");
    }
    struct Path {
        std::size_t atom;
        RecommendationPolicy policy;
        double weight;
    };
    std::vector<Path> paths;
    for (std::size_t i = 0; i < prior.size(); ++i) {
        RecommendationPolicy p = policy;
        p.reset(0);
        paths.push_back({i, std::move(p), prior.atoms()[i].weight});
    }
    std::vector<RoundLaw> laws;
    std::vector<ReportedOutcome> outcomes;
    std::string key;
    for (int t = 1; t <= horizon; ++t) {
        RoundLaw law;
        std::vector<std::vector<WeightedRecommendation>> path_laws;
        path_laws.reserve(paths.size());
        for (const auto& path : paths) {
            const MeanVector& mu = prior.atoms()[path.atom].mean;
            path_laws.push_back(path.policy.recommendation_law());
            for (const auto& wr : path_laws.back()) {
                const double w = path.weight * wr.probability;
                law.mass[slot(wr.rec.arm)] += w;
                law.gap_mass[slot(wr.rec.arm)] += w * (mu.mu2 - mu.mu1);
            }
        }
        laws.push_back(law);
        if (t == horizon) break;
        const std::array<Arm, 2> pulled_for{choose(t, Arm::One, law), choose(t, Arm::Two, law)};

        std::vector<Path> next;
        std::unordered_map<std::string, std::size_t> index;
        for (std::size_t k = 0; k < paths.size(); ++k) {
            const auto& path = paths[k];
            const MeanVector& mu = prior.atoms()[path.atom].mean;
            for (const auto& wr : path_laws[k]) {
                const Arm pulled = pulled_for[slot(wr.rec.arm)];
                reward_outcomes(model, mu[pulled], outcomes);
                for (const auto& o : outcomes) {
                    RecommendationPolicy child = path.policy;
                    child.apply(wr.rec, pulled, o.reward);
                    const double w = path.weight * wr.probability * o.probability;
                    key = std::to_string(path.atom);
                    key += '#';
                    child.append_key(key);
                    auto [it, inserted] = index.try_emplace(key, next.size());
                    if (inserted) {
                        next.push_back({path.atom, std::move(child), w});
                    } else {
                        next[it->second].weight += w;
                    }
                }
            }
        }
        paths = std::move(next);
    }
    return laws;
}

inline Arm rational_choice(const RoundLaw& law, Arm rec) {
    const double m = law.mass[slot(rec)];
    if (m <= 0.0) return rec;  // never issued; the choice is irrelevant
    return strictly_positive_gap(law.gap_mass[slot(rec)] / m) ? Arm::Two : Arm::One;
}

}  // namespace detail

/// Exact BIC check under compliance: enumerates the joint law of (mu, rec_t)
/// for every round t <= T.
inline BicReport bic_verify_exact(const RecommendationPolicy& policy, const DiscretePrior& prior, RewardModel model,
                                  int horizon, int cap = kDefaultExactCap) {
    const auto laws = detail::enumerate_game(policy, prior, model, horizon, cap,
                                             [](int, Arm rec, const detail::RoundLaw&) { return rec; });
    BicReport report;
    report.mode = VerificationMode::Exact;
    for (std::size_t i = 0; i < laws.size(); ++i) {
        const auto& law = laws[i];
        BicRound r;
        r.t = static_cast<int>(i) + 1;
        for (Arm a : {Arm::One, Arm::Two}) {
            const double m = law.mass[slot(a)];
            r.rec_prob[slot(a)] = m;
            if (m > 0.0) {
                const double gap = law.gap_mass[slot(a)] / m;  // E[mu2 - mu1 | rec = a]
                r.slack[slot(a)] = a == Arm::Two ? gap : -gap;
            }
        }
        report.rounds.push_back(r);
    }
    return report;
}

/// Arm chosen by a Bayesian-rational agent for each (round, recommendation),
/// assuming every earlier agent used the same rule.
using DecisionTable = std::vector<std::array<Arm, 2>>;

inline DecisionTable rational_decision_table(const RecommendationPolicy& policy, const DiscretePrior& prior,
                                             RewardModel model, int horizon, int cap = kDefaultExactCap) {
    const auto laws = detail::enumerate_game(policy, prior, model, horizon, cap,
                                             [](int, Arm rec, const detail::RoundLaw& law) {
                                                 return detail::rational_choice(law, rec);
                                             });
    DecisionTable table;
    for (const auto& law : laws) {
        table.push_back({detail::rational_choice(law, Arm::One), detail::rational_choice(law, Arm::Two)});
    }
    return table;
}

struct GameConfig {
    RecommendationPolicy policy;
    DiscretePrior prior;
    RewardModel model = RewardModel::Bernoulli;
    int horizon = 0;
    AgentMode agent_mode = AgentMode::Compliant;
    std::size_t replicates = 1;
    std::uint64_t seed = 0;
    int exact_cap = kDefaultExactCap;
};

struct GameStats {
    int horizon = 0;
    std::size_t replicates = 0;
    std::vector<double> arm1_freq;  ///< per round, fraction of replicates pulling arm 1
    std::vector<double> arm2_freq;
    std::vector<double> cum_regret_mean;  ///< cumulative pseudo-regret per round
    std::vector<double> cum_regret_ci;
    double mean_reward = 0.0;           ///< realized total reward
    double mean_expected_reward = 0.0;  ///< total of mu_{a_t}
    double mean_best = 0.0;             ///< T * max(mu1, mu2)
    MeanEstimate regret;                ///< pseudo-regret R(T) with 95% half-width
    double never_arm2_fraction = 0.0;
    std::size_t deviations = 0;  ///< rounds where the agent ignored the recommendation
    std::vector<int> arm2_pulls;      ///< per replicate
    std::vector<int> arm2_recs;       ///< per replicate
    std::vector<int> explore_rounds;  ///< per replicate
    std::vector<std::uint64_t> action_digest;  ///< per replicate hash of the pulled-arm sequence
};

namespace detail {

struct GameAcc {
    std::vector<double> arm2;
    std::vector<Moments> regret;
    double reward = 0.0;
    double expected = 0.0;
    double best = 0.0;
    double never = 0.0;
    std::size_t deviations = 0;
    std::vector<int> arm2_pulls;
    std::vector<int> arm2_recs;
    std::vector<int> explore_rounds;
    std::vector<std::uint64_t> digest;

    explicit GameAcc(int horizon = 0) : arm2(horizon, 0.0), regret(horizon) {}

    void merge(GameAcc&& o) {
        for (std::size_t t = 0; t < arm2.size(); ++t) {
            arm2[t] += o.arm2[t];
            regret[t].merge(o.regret[t]);
        }
        reward += o.reward;
        expected += o.expected;
        best += o.best;
        never += o.never;
        deviations += o.deviations;
        arm2_pulls.insert(arm2_pulls.end(), o.arm2_pulls.begin(), o.arm2_pulls.end());
        arm2_recs.insert(arm2_recs.end(), o.arm2_recs.begin(), o.arm2_recs.end());
        explore_rounds.insert(explore_rounds.end(), o.explore_rounds.begin(), o.explore_rounds.end());
        digest.insert(digest.end(), o.digest.begin(), o.digest.end());
    }
};

struct ReplicateStreams {
    RngStream prior;
    RngStream coins;
    RngStream reward;
    std::uint64_t policy_seed;

    ReplicateStreams(std::uint64_t seed, std::size_t r)
        : prior(RngStream(derive_seed(seed, "replicate", r)).child("prior")),
          coins(RngStream(derive_seed(seed, "replicate", r)).child("coins")),
          reward(RngStream(derive_seed(seed, "replicate", r)).child("reward")),
          policy_seed(RngStream(derive_seed(seed, "replicate", r)).child("policy").seed()) {}
};

}  // namespace detail

/// Monte Carlo play of the game. Replicate r draws mu from the prior, then
/// plays T rounds; Compliant agents follow every recommendation,
/// RationalExact agents use the exact decision table.
inline GameStats simulate_game(const GameConfig& config) {
    const int T = config.horizon;
    if (config.policy.requires_bernoulli() && config.model != RewardModel::Bernoulli) {
        throw Error(ErrorKind::DomainError, "policy requires the Bernoulli reward model");
    }
    std::optional<DecisionTable> table;
    if (config.agent_mode == AgentMode::RationalExact) {
        table = rational_decision_table(config.policy, config.prior, config.model, T, config.exact_cap);
    }
    auto block = [&](std::size_t begin, std::size_t end) {
        detail::GameAcc acc(T);
        for (std::size_t r = begin; r < end; ++r) {
            detail::ReplicateStreams streams(config.seed, r);
            const MeanVector mu = config.prior.sample(streams.prior);
            RecommendationPolicy policy = config.policy;
            policy.reset(streams.policy_seed);
            double regret = 0.0;
            int arm2_pulls = 0;
            int arm2_recs = 0;
            int explores = 0;
            std::uint64_t digest = 0xcbf29ce484222325ULL;
            for (int t = 1; t <= T; ++t) {
                const Recommendation rec = policy.recommend(streams.coins);
                const Arm pulled = table ? (*table)[t - 1][slot(rec.arm)] : rec.arm;
                const double reward = sample_reward(config.model, mu[pulled], streams.reward);
                policy.update(rec, pulled, reward);
                if (pulled != rec.arm) ++acc.deviations;
                if (rec.arm == Arm::Two) ++arm2_recs;
                if (rec.branch == Branch::Explore) ++explores;
                if (pulled == Arm::Two) {
                    ++arm2_pulls;
                    acc.arm2[t - 1] += 1.0;
                }
                digest = (digest ^ static_cast<std::uint64_t>(to_int(pulled))) * 0x100000001b3ULL;
                regret += mu.best() - mu[pulled];
                acc.regret[t - 1].add(regret);
                acc.reward += reward;
                acc.expected += mu[pulled];
            }
            acc.best += T * mu.best();
            if (arm2_pulls == 0) acc.never += 1.0;
            acc.arm2_pulls.push_back(arm2_pulls);
            acc.arm2_recs.push_back(arm2_recs);
            acc.explore_rounds.push_back(explores);
            acc.digest.push_back(digest);
        }
        return acc;
    };
    auto acc = reduce_replicates(config.replicates, detail::GameAcc(T), block,
                                 [](detail::GameAcc& a, detail::GameAcc&& b) { a.merge(std::move(b)); });
    GameStats stats;
    const double n = static_cast<double>(config.replicates);
    stats.horizon = T;
    stats.replicates = config.replicates;
    for (int t = 0; t < T; ++t) {
        const double f2 = n > 0 ? acc.arm2[t] / n : 0.0;
        stats.arm2_freq.push_back(f2);
        stats.arm1_freq.push_back(1.0 - f2);
        stats.cum_regret_mean.push_back(acc.regret[t].mean());
        stats.cum_regret_ci.push_back(acc.regret[t].half_width());
    }
    if (n > 0) {
        stats.mean_reward = acc.reward / n;
        stats.mean_expected_reward = acc.expected / n;
        stats.mean_best = acc.best / n;
        stats.never_arm2_fraction = acc.never / n;
    }
    if (T > 0) stats.regret = acc.regret[T - 1].estimate();
    stats.deviations = acc.deviations;
    stats.arm2_pulls = std::move(acc.arm2_pulls);
    stats.arm2_recs = std::move(acc.arm2_recs);
    stats.explore_rounds = std::move(acc.explore_rounds);
    stats.action_digest = std::move(acc.digest);
    return stats;
}

namespace detail {

struct BicAcc {
    // [round][rec slot]
    std::vector<std::array<Moments, 2>> slack;

    explicit BicAcc(int horizon = 0) : slack(horizon) {}
    void merge(const BicAcc& o) {
        for (std::size_t t = 0; t < slack.size(); ++t) {
            slack[t][0].merge(o.slack[t][0]);
            slack[t][1].merge(o.slack[t][1]);
        }
    }
};

}  // namespace detail

/// Monte Carlo estimate of the compliance slacks with 95% half-widths.
/// Recommendations never observed leave the slack undefined.
inline BicReport bic_verify_mc(const RecommendationPolicy& policy, const DiscretePrior& prior, RewardModel model,
                               int horizon, std::size_t replicates, std::uint64_t seed) {
    if (replicates < 100) throw Error(ErrorKind::DomainError, "bic_verify_mc needs at least 100 replicates");
    if (policy.requires_bernoulli() && model != RewardModel::Bernoulli) {
        throw Error(ErrorKind::DomainError, "policy requires the Bernoulli reward model");
    }
    auto block = [&](std::size_t begin, std::size_t end) {
        detail::BicAcc acc(horizon);
        for (std::size_t r = begin; r < end; ++r) {
            detail::ReplicateStreams streams(seed, r);
            const MeanVector mu = prior.sample(streams.prior);
            RecommendationPolicy local = policy;
            local.reset(streams.policy_seed);
            for (int t = 1; t <= horizon; ++t) {
                const Recommendation rec = local.recommend(streams.coins);
                const double reward = sample_reward(model, mu[rec.arm], streams.reward);
                local.update(rec, rec.arm, reward);
                acc.slack[t - 1][slot(rec.arm)].add(mu[rec.arm] - mu[other(rec.arm)]);
            }
        }
        return acc;
    };
    auto acc = reduce_replicates(replicates, detail::BicAcc(horizon), block,
                                 [](detail::BicAcc& a, detail::BicAcc&& b) { a.merge(b); });
    BicReport report;
    report.mode = VerificationMode::MonteCarlo;
    for (int t = 0; t < horizon; ++t) {
        BicRound r;
        r.t = t + 1;
        for (std::size_t s = 0; s < 2; ++s) {
            const auto& m = acc.slack[t][s];
            r.rec_prob[s] = m.n / static_cast<double>(replicates);
            if (m.n > 0) {
                r.slack[s] = m.mean();
                r.half_width[s] = m.half_width();
            }
        }
        report.rounds.push_back(r);
    }
    return report;
}

struct GreedyFailure {
    double estimate = 0.0;
    double half_width = 0.0;
    double bound = 0.0;           ///< mu1 prior mean - mu2 prior mean
    std::optional<double> exact;  ///< Deterministic model only
};

/// Exact Pr[Greedy never pulls arm 2] under deterministic rewards: round 1
/// reveals mu1 = v, and arm 2 is never tried iff E[mu2 | mu1 = v] <= v.
inline double greedy_failure_exact_deterministic(const DiscretePrior& prior, int horizon) {
    if (horizon <= 1) return 1.0;
    std::map<double, std::pair<double, double>> groups;  // v -> (mass, mass * mu2)
    for (const auto& a : prior.atoms()) {
        auto& g = groups[a.mean.mu1];
        g.first += a.weight;
        g.second += a.weight * a.mean.mu2;
    }
    double fail = 0.0;
    for (const auto& [v, g] : groups) {
        if (!strictly_positive_gap(g.second / g.first - v)) fail += g.first;
    }
    return fail;
}

inline GreedyFailure greedy_failure_prob(const DiscretePrior& prior, RewardModel model, int horizon,
                                         std::size_t replicates, std::uint64_t seed) {
    if (replicates < 1000) throw Error(ErrorKind::DomainError, "greedy_failure_prob needs at least 1000 replicates");
    GameConfig cfg{BanditAlgorithm::greedy(prior, model, horizon), prior, model, horizon,
                   AgentMode::Compliant, replicates, seed};
    const GameStats stats = simulate_game(cfg);
    GreedyFailure out;
    out.estimate = stats.never_arm2_fraction;
    out.half_width = 1.96 * std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(replicates));
    out.bound = prior.prior_mean(Arm::One) - prior.prior_mean(Arm::Two);
    if (model == RewardModel::Deterministic) out.exact = greedy_failure_exact_deterministic(prior, horizon);
    return out;
}

// ---------------------------------------------------------------------------
// Policy spec strings

struct PolicyContext {
    const DiscretePrior* prior = nullptr;
    RewardModel model = RewardModel::Bernoulli;
    int horizon = 0;
    int n_max = kDefaultEnumerationCap;
};

struct ParsedPolicy {
    RecommendationPolicy policy;
    std::string canonical;  ///< spec with auto parameters resolved
};

/// Accepts any algorithm spec (recommended directly), `full-revelation`
/// (alias of greedy) and
/// `repeated-hp:inner=<alg>,n0=auto|<int>,eps=auto|<real>,safety=<real>`.
inline ParsedPolicy parse_policy_spec(std::string_view spec, const PolicyContext& ctx) {
    if (!ctx.prior) throw Error(ErrorKind::ParseError, "policy spec needs a prior");
    const AlgorithmContext alg_ctx{ctx.horizon, ctx.prior, ctx.model};
    constexpr std::string_view hp_prefix = "repeated-hp:";
    if (spec == "full-revelation") spec = "greedy";
    if (!spec.starts_with(hp_prefix)) {
        BanditAlgorithm alg = parse_algorithm_spec(spec, alg_ctx);
        return {RecommendationPolicy(std::move(alg)), std::string(spec)};
    }
    auto bad = [&](const std::string& why) {
        return Error(ErrorKind::ParseError, "policy spec '" + std::string(spec) + "': " + why);
    };
    std::string inner_spec;
    std::string n0_text = "auto";
    std::string eps_text = "auto";
    double safety = 0.9;
    std::string_view rest = spec.substr(hp_prefix.size());
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) throw bad("expected key=value, got '" + std::string(item) + "'");
        const std::string key(item.substr(0, eq));
        const std::string value(item.substr(eq + 1));
        if (key == "inner") {
            inner_spec = value;
        } else if (key == "n0") {
            n0_text = value;
        } else if (key == "eps") {
            eps_text = value;
        } else if (key == "safety") {
            try {
                safety = std::stod(value);
            } catch (const std::logic_error&) {
                throw bad("safety must be a real number");
            }
        } else {
            throw bad("unknown key '" + key + "'");
        }
    }
    if (inner_spec.empty()) throw bad("missing inner=<alg-spec>");
    BanditAlgorithm inner = parse_algorithm_spec(inner_spec, alg_ctx);

    int n0 = 0;
    if (n0_text == "auto") {
        const auto params = choose_params(*ctx.prior, ctx.model, ctx.n_max, safety);
        if (!params) throw bad("prior is not explorable within n=" + std::to_string(ctx.n_max));
        n0 = params->n0;
    } else {
        try {
            n0 = std::stoi(n0_text);
        } catch (const std::logic_error&) {
            throw bad("n0 must be an integer or auto");
        }
    }
    double eps = 0.0;
    if (eps_text == "auto") {
        if (!(safety > 0.0 && safety < 1.0)) throw bad("safety must lie in (0,1)");
        const double threshold = hp_bic_threshold(arm1_gap_distribution(*ctx.prior, ctx.model, n0));
        if (!(threshold > 0.0)) throw bad("no positive BIC threshold at n0=" + std::to_string(n0));
        eps = safety * threshold;
    } else {
        try {
            eps = std::stod(eps_text);
        } catch (const std::logic_error&) {
            throw bad("eps must be a real number or auto");
        }
    }
    RepeatedHP hp(RepeatedHPConfig{n0, eps, std::move(inner), *ctx.prior, ctx.model});
    char eps_buf[64];
    std::snprintf(eps_buf, sizeof eps_buf, "%.17g", eps);
    std::string canonical = "repeated-hp:inner=" + inner_spec + ",n0=" + std::to_string(n0) + ",eps=" + eps_buf;
    return {RecommendationPolicy(std::move(hp)), canonical};
}

}  // namespace incentix
