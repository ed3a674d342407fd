#pragma once

// Single-round persuasion: the optimum for a two-point arm-1 prior with
// full knowledge of mu1, and hidden persuasion over an arbitrary finite
// signal with its sufficient BIC threshold.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "incentix/bayes_core.hpp"
#include "incentix/error.hpp"
#include "incentix/rng.hpp"

namespace incentix {

/// mu1 in {v_low, v_high} with Pr[mu1 = v_high] = p_high; mu2 known only
/// through its mean.
struct TwoPointPrior {
    double v_low = 0.0;
    double v_high = 1.0;
    double p_high = 0.5;
    double mu2_mean = 0.0;

    double mu1_mean() const { return p_high * v_high + (1.0 - p_high) * v_low; }
    double atom_prob(std::size_t atom) const { return atom == 0 ? 1.0 - p_high : p_high; }
    double mean_of_belief(double b) const { return b * v_high + (1.0 - b) * v_low; }
};

/// Validates v_low < v_high, p_high in [0,1] and v_low <= mu2 <= mu1 mean <= v_high.
inline TwoPointPrior make_two_point_prior(double v_low, double v_high, double p_high, double mu2_mean) {
    TwoPointPrior p{v_low, v_high, p_high, mu2_mean};
    constexpr double tol = 1e-12;
    if (!(0.0 <= v_low && v_low < v_high && v_high <= 1.0)) {
        throw Error(ErrorKind::DomainError, "two-point prior needs 0 <= v_low < v_high <= 1");
    }
    if (!(0.0 <= p_high && p_high <= 1.0)) throw Error(ErrorKind::DomainError, "p_high must lie in [0,1]");
    if (!(v_low <= mu2_mean + tol && mu2_mean <= p.mu1_mean() + tol && p.mu1_mean() <= v_high + tol)) {
        throw Error(ErrorKind::DomainError, "two-point prior needs v_low <= mu2 <= mu1 mean <= v_high");
    }
    return p;
}

/// Two scalar beliefs Pr[mu1 = v_high | message] with their probabilities.
struct BeliefPair {
    double b_low = 0.0;
    double b_high = 0.0;
    double p_low = 0.0;
    double p_high_msg = 0.0;
};

/// rows[atom][message] = Pr[message | mu1 = atom value]; atom 0 is v_low.
struct MessagingPolicy {
    std::vector<std::string> messages;
    std::vector<std::vector<double>> rows;
};

/// Supremum of Pr[agent picks arm 2] over messaging policies.
inline double bp_optimal_value(const TwoPointPrior& prior) {
    if (prior.v_high == prior.mu2_mean) return 0.0;
    return (prior.v_high - prior.mu1_mean()) / (prior.v_high - prior.mu2_mean);
}

/// Pr[mu1 < mu2 mean] = value of revealing mu1 outright.
inline double bp_full_revelation_value(const TwoPointPrior& prior) {
    return prior.v_low < prior.mu2_mean ? 1.0 - prior.p_high : 0.0;
}

inline MessagingPolicy bp_full_revelation_policy() { return {{"low", "high"}, {{1.0, 0.0}, {0.0, 1.0}}}; }

inline MessagingPolicy bp_babbling_policy() { return {{"only"}, {{1.0}, {1.0}}}; }

/// Pr[message j | mu1 = v] = b_j(v) * Pr[belief j] / Pr[mu1 = v].
inline MessagingPolicy bp_policy_from_beliefs(const TwoPointPrior& prior, const BeliefPair& beliefs) {
    if (prior.p_high <= 0.0 || prior.p_high >= 1.0) {
        throw Error(ErrorKind::DegenerateAtom, "both arm-1 values need positive prior probability");
    }
    constexpr double tol = 1e-9;
    const auto& b = beliefs;
    const bool in_range = b.b_low >= 0.0 && b.b_high <= 1.0 && b.b_low <= b.b_high && b.p_low >= 0.0 &&
                          b.p_high_msg >= 0.0;
    if (!in_range || std::abs(b.p_low + b.p_high_msg - 1.0) > tol ||
        std::abs(b.p_low * b.b_low + b.p_high_msg * b.b_high - prior.p_high) > tol) {
        throw Error(ErrorKind::NotPlausible, "belief pair is not Bayes-plausible for this prior");
    }
    MessagingPolicy policy{{"low", "high"}, {}};
    const double probs[2] = {b.p_low, b.p_high_msg};
    const double highs[2] = {b.b_low, b.b_high};
    for (std::size_t atom = 0; atom < 2; ++atom) {
        std::vector<double> row(2);
        double total = 0.0;
        for (std::size_t j = 0; j < 2; ++j) {
            const double belief_of_atom = atom == 1 ? highs[j] : 1.0 - highs[j];
            row[j] = belief_of_atom * probs[j] / prior.atom_prob(atom);
            total += row[j];
        }
        // Rows sum to 1 up to the plausibility tolerance; remove the residue.
        for (auto& x : row) x /= total;
        policy.rows.push_back(std::move(row));
    }
    return policy;
}

/// Policy with mean(b_low) = mu2 - delta and mean(b_high) = v_high.
inline MessagingPolicy bp_near_optimal_policy(const TwoPointPrior& prior, double delta) {
    if (!(delta > 0.0 && delta < prior.mu2_mean - prior.v_low)) {
        throw Error(ErrorKind::DomainError, "delta must lie in (0, mu2 - v_low)");
    }
    const double b_low = (prior.mu2_mean - delta - prior.v_low) / (prior.v_high - prior.v_low);
    const double p_low = (1.0 - prior.p_high) / (1.0 - b_low);
    return bp_policy_from_beliefs(prior, {b_low, 1.0, p_low, 1.0 - p_low});
}

/// Posterior Pr[mu1 = v_high | message] for every message with positive
/// probability (nullopt otherwise), and the message marginals.
struct PolicyPosteriors {
    std::vector<double> message_prob;
    std::vector<std::optional<double>> belief_high;
};

inline PolicyPosteriors bp_policy_posteriors(const MessagingPolicy& policy, const TwoPointPrior& prior) {
    if (policy.rows.size() != 2) throw Error(ErrorKind::DomainError, "policy needs one row per arm-1 value");
    const std::size_t m = policy.rows[0].size();
    PolicyPosteriors out;
    for (std::size_t j = 0; j < m; ++j) {
        const double from_low = prior.atom_prob(0) * policy.rows[0].at(j);
        const double from_high = prior.atom_prob(1) * policy.rows[1].at(j);
        const double prob = from_low + from_high;
        out.message_prob.push_back(prob);
        out.belief_high.push_back(prob > 0.0 ? std::optional<double>(from_high / prob) : std::nullopt);
    }
    return out;
}

/// Exact Pr[agent picks arm 2]: arm 2 iff E[mu1 | message] < mu2 (strict).
inline double bp_eval_policy(const MessagingPolicy& policy, const TwoPointPrior& prior) {
    for (const auto& row : policy.rows) {
        double s = 0.0;
        for (double x : row) {
            if (x < 0.0 || x > 1.0) throw Error(ErrorKind::DomainError, "policy entries must lie in [0,1]");
            s += x;
        }
        if (std::abs(s - 1.0) > 1e-9) throw Error(ErrorKind::DomainError, "policy rows must sum to 1");
    }
    const auto post = bp_policy_posteriors(policy, prior);
    double arm2 = 0.0;
    for (std::size_t j = 0; j < post.message_prob.size(); ++j) {
        if (!post.belief_high[j]) continue;
        if (prior.mean_of_belief(*post.belief_high[j]) < prior.mu2_mean) arm2 += post.message_prob[j];
    }
    return arm2;
}

// ---------------------------------------------------------------------------
// Hidden persuasion

struct HPSignal {
    int id = 0;
    double probability = 0.0;
    double gap = 0.0;            ///< E[mu2 - mu1 | signal]
    double target_prob_arm2 = 1.0;  ///< Pr[target(signal) = 2]
};

/// Hidden persuasion over a finite signal with its exact law.
struct HPConfig {
    double epsilon = 0.0;
    std::vector<HPSignal> signals;

    /// Tie-broken argmax of the conditional means.
    static Arm exploit_choice(const HPSignal& s) { return strictly_positive_gap(s.gap) ? Arm::Two : Arm::One; }

    const HPSignal& signal(int id) const {
        for (const auto& s : signals) {
            if (s.id == id) return s;
        }
        throw Error(ErrorKind::UnknownSignal, "signal " + std::to_string(id) + " is not in the support");
    }
};

/// Config over the statistic of a gap summary; `target_prob_arm2` maps a
/// statistic to Pr[target = 2].
template <class TargetFn>
HPConfig make_hp_config(const GapSummary& gs, double epsilon, TargetFn target_prob_arm2) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::DomainError, "epsilon must lie in [0,1]");
    HPConfig cfg{epsilon, {}};
    for (const auto& e : gs.entries) {
        const double q = target_prob_arm2(e.statistic);
        if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::DomainError, "target probability must lie in [0,1]");
        cfg.signals.push_back({e.statistic, e.probability, e.gap, q});
    }
    return cfg;
}

inline HPConfig make_hp_config(const GapSummary& gs, double epsilon, Arm target) {
    const double q = target == Arm::Two ? 1.0 : 0.0;
    return make_hp_config(gs, epsilon, [q](int) { return q; });
}

/// Largest sufficient persuasion probability: E[G * 1{G > 0}] / 3.
inline double hp_bic_threshold(const GapSummary& gs) { return gap_positive_stats(gs).positive_mass / 3.0; }

/// One uniform for the branch coin, plus one for a randomized target.
inline Arm hp_recommend(const HPConfig& config, int signal_id, RngStream& stream) {
    const HPSignal& s = config.signal(signal_id);
    if (stream.uniform() < config.epsilon) {
        if (s.target_prob_arm2 >= 1.0) return Arm::Two;
        if (s.target_prob_arm2 <= 0.0) return Arm::One;
        return stream.uniform() < s.target_prob_arm2 ? Arm::Two : Arm::One;
    }
    return HPConfig::exploit_choice(s);
}

struct HPBicResult {
    std::optional<double> slack_arm2;  ///< E[mu2 - mu1 | rec = 2]
    std::optional<double> slack_arm1;  ///< E[mu1 - mu2 | rec = 1]
    double prob_arm2 = 0.0;

    bool bic() const { return (!slack_arm2 || *slack_arm2 > 0.0) && (!slack_arm1 || *slack_arm1 >= 0.0); }
};

/// Exact conditional gaps by enumerating signal x branch x target coin.
inline HPBicResult hp_verify_bic(const HPConfig& config) {
    double mass[2] = {0.0, 0.0};
    double gap_mass[2] = {0.0, 0.0};
    for (const auto& s : config.signals) {
        const double explore2 = config.epsilon * s.target_prob_arm2;
        const double exploit2 = HPConfig::exploit_choice(s) == Arm::Two ? 1.0 - config.epsilon : 0.0;
        const double p2 = explore2 + exploit2;
        const double p1 = 1.0 - p2;
        mass[1] += s.probability * p2;
        gap_mass[1] += s.probability * p2 * s.gap;
        mass[0] += s.probability * p1;
        gap_mass[0] += s.probability * p1 * s.gap;
    }
    HPBicResult r;
    r.prob_arm2 = mass[1];
    if (mass[1] > 0.0) r.slack_arm2 = gap_mass[1] / mass[1];
    if (mass[0] > 0.0) r.slack_arm1 = -gap_mass[0] / mass[0];
    return r;
}

}  // namespace incentix
