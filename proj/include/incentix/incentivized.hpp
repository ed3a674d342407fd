#pragma once

// RepeatedHP: hidden persuasion repeated over rounds, with an arbitrary
// bandit algorithm driving the persuasion branch. Also BIC parameter
// selection and explorability of a prior.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "incentix/bandits.hpp"
#include "incentix/bayes_core.hpp"
#include "incentix/error.hpp"
#include "incentix/persuasion.hpp"
#include "incentix/rng.hpp"

namespace incentix {

enum class Branch { Initial, Explore, Exploit, Direct };

inline std::string_view to_string(Branch b) {
    switch (b) {
        case Branch::Initial: return "initial";
        case Branch::Explore: return "explore";
        case Branch::Exploit: return "exploit";
        case Branch::Direct: return "direct";
    }
    return "?";
}

struct Recommendation {
    Arm arm = Arm::One;
    Branch branch = Branch::Direct;

    friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

struct WeightedRecommendation {
    double probability = 0.0;
    Recommendation rec;
};

struct HpParams {
    int n0 = 0;
    double epsilon = 0.0;
    double threshold = 0.0;  ///< E[G * 1{G > 0}] / 3 at n0
};

/// Sequence E[G_{1,n} * 1{G_{1,n} > 0}] for n = 0..n_max.
inline std::vector<double> gap_monotonicity_series(const DiscretePrior& prior, RewardModel model, int n_max,
                                                   int cap = kDefaultEnumerationCap) {
    std::vector<double> series;
    for (int n = 0; n <= n_max; ++n) {
        series.push_back(gap_positive_stats(arm1_gap_distribution(prior, model, n, cap)).positive_mass);
    }
    return series;
}

/// Smallest n in [1, n_max] with Pr[G_{1,n} > 0] > 0.
inline std::optional<int> explorability(const DiscretePrior& prior, RewardModel model, int n_max,
                                        int cap = kDefaultEnumerationCap) {
    if (n_max < 1) throw Error(ErrorKind::DomainError, "n_max must be at least 1");
    for (int n = 1; n <= n_max; ++n) {
        if (gap_positive_stats(arm1_gap_distribution(prior, model, n, cap)).prob_positive > 0.0) return n;
    }
    return std::nullopt;
}

/// Independent-prior shortcut: Pr[mu1 < mu2 prior mean] > 0.
inline bool independent_prior_explorable(const DiscretePrior& prior) {
    const double mu2 = prior.prior_mean(Arm::Two);
    for (const auto& a : prior.atoms()) {
        if (a.mean.mu1 < mu2) return true;
    }
    return false;
}

/// Smallest explorable n0 <= n_max and epsilon = safety * threshold(n0);
/// nullopt when the prior is not explorable within n_max.
inline std::optional<HpParams> choose_params(const DiscretePrior& prior, RewardModel model, int n_max,
                                             double safety = 0.9, int cap = kDefaultEnumerationCap) {
    if (n_max < 1) throw Error(ErrorKind::DomainError, "n_max must be at least 1");
    if (!(safety > 0.0 && safety < 1.0)) throw Error(ErrorKind::DomainError, "safety must lie in (0,1)");
    for (int n = 0; n <= n_max; ++n) {
        const GapSummary gs = arm1_gap_distribution(prior, model, n, cap);
        if (gap_positive_stats(gs).prob_positive > 0.0) {
            const double threshold = hp_bic_threshold(gs);
            return HpParams{n, safety * threshold, threshold};
        }
    }
    return std::nullopt;
}

struct RepeatedHPConfig {
    int n0 = 0;
    double epsilon = 0.0;
    BanditAlgorithm inner;
    DiscretePrior prior;
    RewardModel model = RewardModel::Bernoulli;
};

/// Policy state of RepeatedHP. The exploitation branch conditions on the
/// exploration log only: observations from exploit rounds never enter the
/// belief.
class RepeatedHP {
public:
    explicit RepeatedHP(RepeatedHPConfig config)
        : config_(std::move(config)), evidence_(config_.model), exploit_(Arm::One) {
        if (config_.n0 < 0) throw Error(ErrorKind::DomainError, "n0 must be nonnegative");
        if (!(config_.epsilon >= 0.0 && config_.epsilon <= 1.0)) {
            throw Error(ErrorKind::DomainError, "epsilon must lie in [0,1]");
        }
        if (config_.inner.requires_bernoulli() && config_.model != RewardModel::Bernoulli) {
            throw Error(ErrorKind::DomainError, config_.inner.name() + " requires the Bernoulli reward model");
        }
        reset(0);
    }

    void reset(std::uint64_t seed) {
        config_.inner.reset(derive_seed(seed, "inner"));
        round_ = 1;
        log_.clear();
        evidence_ = Evidence(config_.model);
        exploit_ = preferred_arm(prior_belief(config_.prior));
        pending_.reset();
    }

    /// Rounds 1..n0 recommend arm 1; afterwards one uniform from `coins`
    /// selects the persuasion branch with probability epsilon.
    Recommendation recommend(RngStream& coins) {
        Recommendation rec;
        if (round_ <= config_.n0) {
            rec = {Arm::One, Branch::Initial};
        } else if (coins.uniform() < config_.epsilon) {
            rec = {config_.inner.choose(), Branch::Explore};
        } else {
            rec = {exploit_, Branch::Exploit};
        }
        pending_ = rec;
        return rec;
    }

    /// Exact law of the next recommendation.
    std::vector<WeightedRecommendation> recommendation_law() const {
        if (round_ <= config_.n0) return {{1.0, {Arm::One, Branch::Initial}}};
        std::vector<WeightedRecommendation> law;
        const double eps = config_.epsilon;
        if (eps > 0.0) {
            const auto q = config_.inner.prob_arm2();
            if (!q) {
                throw Error(ErrorKind::NonEnumerablePolicy,
                            "inner algorithm " + config_.inner.name() + " has no exact choice law");
            }
            if (*q < 1.0) law.push_back({eps * (1.0 - *q), {Arm::One, Branch::Explore}});
            if (*q > 0.0) law.push_back({eps * *q, {Arm::Two, Branch::Explore}});
        }
        if (eps < 1.0) law.push_back({1.0 - eps, {exploit_, Branch::Exploit}});
        return law;
    }

    /// Feeds back the outcome of the preceding recommend().
    void update(const Recommendation& rec, Arm pulled, double reward) {
        if (!pending_ || !(*pending_ == rec)) {
            throw Error(ErrorKind::BranchMismatch, "update does not match the preceding recommendation");
        }
        apply(rec, pulled, reward);
    }

    void update(const Recommendation& rec, double reward) { update(rec, rec.arm, reward); }

    /// Applies an outcome without a preceding recommend(); used by exact
    /// enumeration, which draws `rec` from recommendation_law().
    void apply(const Recommendation& rec, Arm pulled, double reward) {
        pending_.reset();
        switch (rec.branch) {
            case Branch::Initial:
                record(pulled, reward);
                break;
            case Branch::Explore:
                // An agent who ignored the recommendation did not execute the
                // inner algorithm's choice; it is withdrawn, the data is kept.
                if (pulled == rec.arm) {
                    config_.inner.update(pulled, reward);
                } else {
                    config_.inner.discard_pending();
                }
                record(pulled, reward);
                break;
            case Branch::Exploit:
                break;
            case Branch::Direct:
                throw Error(ErrorKind::BranchMismatch, "RepeatedHP never issues direct recommendations");
        }
        ++round_;
    }

    int round() const { return round_; }
    const RepeatedHPConfig& config() const { return config_; }
    const std::vector<TraceRound>& exploration_log() const { return log_; }
    const Evidence& evidence() const { return evidence_; }
    Arm exploit_choice() const { return exploit_; }
    const BanditAlgorithm& inner() const { return config_.inner; }

    void append_key(std::string& out) const {
        out += std::to_string(round_);
        out += '|';
        evidence_.append_key(out);
        out += '|';
        config_.inner.append_key(out);
    }

private:
    void record(Arm arm, double reward) {
        log_.push_back({round_, arm, reward});
        evidence_.add({arm, reward});
        exploit_ = preferred_arm(posterior_belief(config_.prior, evidence_));
    }

    RepeatedHPConfig config_;
    int round_ = 1;
    std::vector<TraceRound> log_;
    Evidence evidence_;
    Arm exploit_;
    std::optional<Recommendation> pending_;
};

}  // namespace incentix
