#pragma once

// Finite-support Bayesian engine: priors over mean-reward pairs, reward
// models, exact posteriors and the law of the posterior gap after n arm-1
// samples.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "incentix/error.hpp"
#include "incentix/rng.hpp"

namespace incentix {

enum class Arm : int { One = 1, Two = 2 };

constexpr Arm other(Arm a) { return a == Arm::One ? Arm::Two : Arm::One; }
constexpr std::size_t slot(Arm a) { return a == Arm::One ? 0 : 1; }
constexpr int to_int(Arm a) { return static_cast<int>(a); }

inline Arm arm_from_int(int value) {
    if (value == 1) return Arm::One;
    if (value == 2) return Arm::Two;
    throw Error(ErrorKind::DomainError, "arm index must be 1 or 2, got " + std::to_string(value));
}

struct MeanVector {
    double mu1 = 0.0;
    double mu2 = 0.0;

    constexpr double operator[](Arm a) const { return a == Arm::One ? mu1 : mu2; }
    constexpr double best() const { return mu1 > mu2 ? mu1 : mu2; }
    friend constexpr bool operator==(const MeanVector&, const MeanVector&) = default;
};

struct Atom {
    MeanVector mean;
    double weight = 0.0;
};

enum class RewardModel { Deterministic, Bernoulli };

inline std::string_view to_string(RewardModel m) {
    return m == RewardModel::Deterministic ? "deterministic" : "bernoulli";
}

inline RewardModel parse_reward_model(std::string_view name) {
    if (name == "deterministic") return RewardModel::Deterministic;
    if (name == "bernoulli") return RewardModel::Bernoulli;
    throw Error(ErrorKind::ParseError, "unknown reward model '" + std::string(name) + "'");
}

struct Observation {
    Arm arm = Arm::One;
    double reward = 0.0;
};

/// Slack for floating comparisons between prior means.
inline constexpr double kWeightTolerance = 1e-12;
inline constexpr int kDefaultEnumerationCap = 64;

/// Posterior gaps within this distance of zero count as ties (rounding in
/// the log-space posterior would otherwise break exact ties at random).
inline constexpr double kTieTolerance = 1e-12;

inline bool strictly_positive_gap(double gap) { return gap > kTieTolerance; }

namespace detail {

inline bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

// k * log(x) with the 0 * log(0) = 0 convention.
inline double xlogy(int k, double log_x) { return k == 0 ? 0.0 : k * log_x; }

}  // namespace detail

/// Finite-support joint prior over (mu1, mu2). Immutable after construction;
/// construct through make_discrete_prior or make_independent_prior.
class DiscretePrior {
public:
    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double prior_mean(Arm a) const { return a == Arm::One ? mean1_ : mean2_; }
    bool independent() const { return independent_; }

    // Cached logs of atom coordinates, used by likelihood evaluation.
    double log_mean(std::size_t atom, Arm a) const { return log_mu_[atom][slot(a)]; }
    double log_complement(std::size_t atom, Arm a) const { return log_1m_mu_[atom][slot(a)]; }

    /// Index of an atom drawn with the prior weights; one uniform draw.
    std::size_t sample_index(RngStream& stream) const {
        double u = stream.uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            acc += atoms_[i].weight;
            if (u < acc) return i;
        }
        return atoms_.size() - 1;
    }

    MeanVector sample(RngStream& stream) const { return atoms_[sample_index(stream)].mean; }

private:
    friend DiscretePrior make_discrete_prior(std::vector<Atom> atoms);
    friend DiscretePrior make_independent_prior(const std::vector<std::pair<double, double>>&,
                                                const std::vector<std::pair<double, double>>&);

    DiscretePrior() = default;

    std::vector<Atom> atoms_;
    std::vector<std::array<double, 2>> log_mu_;
    std::vector<std::array<double, 2>> log_1m_mu_;
    double mean1_ = 0.0;
    double mean2_ = 0.0;
    bool independent_ = false;
};

inline DiscretePrior make_discrete_prior(std::vector<Atom> atoms) {
    if (atoms.empty()) throw Error(ErrorKind::EmptySupport, "prior has no atoms");
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!(a.weight > 0.0)) {
            throw Error(ErrorKind::NegativeWeight,
                        "atom weight must be positive, got " + std::to_string(a.weight));
        }
        if (!detail::in_unit_interval(a.mean.mu1) || !detail::in_unit_interval(a.mean.mu2)) {
            throw Error(ErrorKind::DomainError, "atom coordinates must lie in [0,1]");
        }
        total += a.weight;
    }
    DiscretePrior prior;
    for (auto& a : atoms) a.weight /= total;
    double m1 = 0.0;
    double m2 = 0.0;
    for (const auto& a : atoms) {
        m1 += a.weight * a.mean.mu1;
        m2 += a.weight * a.mean.mu2;
    }
    // Tolerance absorbs summation-order rounding when the two means coincide.
    if (m1 < m2 - kWeightTolerance) {
        std::ostringstream msg;
        msg << "prior mean of arm 1 (" << m1 << ") is below prior mean of arm 2 (" << m2 << ")";
        throw Error(ErrorKind::PreferenceViolation, msg.str());
    }
    prior.atoms_ = std::move(atoms);
    prior.mean1_ = m1;
    prior.mean2_ = m2;
    for (const auto& a : prior.atoms_) {
        prior.log_mu_.push_back({std::log(a.mean.mu1), std::log(a.mean.mu2)});
        prior.log_1m_mu_.push_back({std::log1p(-a.mean.mu1), std::log1p(-a.mean.mu2)});
    }
    return prior;
}

/// Product prior; atom weight is the product of marginal weights.
inline DiscretePrior make_independent_prior(const std::vector<std::pair<double, double>>& marginal1,
                                            const std::vector<std::pair<double, double>>& marginal2) {
    if (marginal1.empty() || marginal2.empty()) {
        throw Error(ErrorKind::EmptySupport, "independent prior needs nonempty marginals");
    }
    auto normalized = [](const std::vector<std::pair<double, double>>& m) {
        double total = 0.0;
        for (const auto& [v, w] : m) {
            if (!(w > 0.0)) {
                throw Error(ErrorKind::NegativeWeight,
                            "marginal weight must be positive, got " + std::to_string(w));
            }
            total += w;
        }
        std::vector<std::pair<double, double>> out;
        for (const auto& [v, w] : m) out.emplace_back(v, w / total);
        return out;
    };
    const auto m1 = normalized(marginal1);
    const auto m2 = normalized(marginal2);
    std::vector<Atom> atoms;
    atoms.reserve(m1.size() * m2.size());
    for (const auto& [v1, w1] : m1) {
        for (const auto& [v2, w2] : m2) atoms.push_back({{v1, v2}, w1 * w2});
    }
    DiscretePrior prior = make_discrete_prior(std::move(atoms));
    prior.independent_ = true;
    return prior;
}

inline std::pair<double, double> prior_means(const DiscretePrior& prior) {
    return {prior.prior_mean(Arm::One), prior.prior_mean(Arm::Two)};
}

/// Posterior over the prior's atoms. Atoms keep the prior's order; atoms
/// ruled out by the data carry weight zero.
struct Belief {
    std::vector<Atom> atoms;
};

inline double posterior_mean(const Belief& belief, Arm a) {
    double m = 0.0;
    for (const auto& atom : belief.atoms) m += atom.weight * atom.mean[a];
    return m;
}

/// E[mu2 - mu1] under the belief.
inline double posterior_gap(const Belief& belief) {
    double g = 0.0;
    for (const auto& atom : belief.atoms) g += atom.weight * (atom.mean.mu2 - atom.mean.mu1);
    return g;
}

/// Tie-broken argmax of the posterior means: arm 2 only on a strictly positive gap.
inline Arm preferred_arm(const Belief& belief) {
    return strictly_positive_gap(posterior_gap(belief)) ? Arm::Two : Arm::One;
}

inline Belief prior_belief(const DiscretePrior& prior) { return Belief{prior.atoms()}; }

/// Sufficient statistics of a set of observations. Bernoulli keeps per-arm
/// pull and success counts; Deterministic keeps the pull count and the
/// distinct observed values (repeats carry no information).
class Evidence {
public:
    explicit Evidence(RewardModel model) : model_(model) {}

    RewardModel model() const { return model_; }

    void add(const Observation& obs) {
        const std::size_t s = slot(obs.arm);
        if (model_ == RewardModel::Bernoulli) {
            if (obs.reward != 0.0 && obs.reward != 1.0) {
                throw Error(ErrorKind::DomainError, "Bernoulli reward must be 0 or 1");
            }
            if (obs.reward == 1.0) ++successes_[s];
        } else {
            if (!detail::in_unit_interval(obs.reward)) {
                throw Error(ErrorKind::DomainError, "reward must lie in [0,1]");
            }
            auto& vals = values_[s];
            auto it = std::lower_bound(vals.begin(), vals.end(), obs.reward);
            if (it == vals.end() || *it != obs.reward) vals.insert(it, obs.reward);
        }
        ++counts_[s];
    }

    int count(Arm a) const { return counts_[slot(a)]; }
    int successes(Arm a) const { return successes_[slot(a)]; }
    const std::vector<double>& values(Arm a) const { return values_[slot(a)]; }
    int total() const { return counts_[0] + counts_[1]; }

    /// Compact identity of the belief-relevant content (counts included).
    void append_key(std::string& out) const {
        for (std::size_t s = 0; s < 2; ++s) {
            out += std::to_string(counts_[s]);
            out += '/';
            out += std::to_string(successes_[s]);
            for (double v : values_[s]) {
                out += ':';
                append_hex(out, v);
            }
            out += ';';
        }
    }

    friend bool operator==(const Evidence&, const Evidence&) = default;

private:
    static void append_hex(std::string& out, double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%a", v);
        out += buf;
    }

    RewardModel model_;
    std::array<int, 2> counts_{0, 0};
    std::array<int, 2> successes_{0, 0};
    std::array<std::vector<double>, 2> values_;
};

/// Posterior from sufficient statistics. Likelihoods are evaluated in log
/// space so long Bernoulli histories do not underflow.
inline Belief posterior_belief(const DiscretePrior& prior, const Evidence& evidence) {
    const auto& atoms = prior.atoms();
    std::vector<double> log_w(atoms.size(), -std::numeric_limits<double>::infinity());
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        double lw = std::log(atoms[i].weight);
        for (Arm a : {Arm::One, Arm::Two}) {
            if (evidence.model() == RewardModel::Bernoulli) {
                const int k = evidence.successes(a);
                const int f = evidence.count(a) - k;
                lw += detail::xlogy(k, prior.log_mean(i, a)) + detail::xlogy(f, prior.log_complement(i, a));
            } else {
                // Exact equality: rewards come from the same engine as the atoms.
                for (double v : evidence.values(a)) {
                    if (v != atoms[i].mean[a]) lw = -std::numeric_limits<double>::infinity();
                }
            }
        }
        log_w[i] = lw;
        max_log = std::max(max_log, lw);
    }
    if (!std::isfinite(max_log)) {
        throw Error(ErrorKind::ZeroLikelihood, "no prior atom is consistent with the observations");
    }
    Belief belief{atoms};
    double total = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const double w = std::isfinite(log_w[i]) ? std::exp(log_w[i] - max_log) : 0.0;
        belief.atoms[i].weight = w;
        total += w;
    }
    for (auto& a : belief.atoms) a.weight /= total;
    return belief;
}

inline Belief posterior_belief(const DiscretePrior& prior, RewardModel model,
                               std::span<const Observation> observations) {
    Evidence evidence(model);
    for (const auto& obs : observations) evidence.add(obs);
    return posterior_belief(prior, evidence);
}

struct GapEntry {
    int statistic = 0;
    double probability = 0.0;
    double gap = 0.0;
};

/// Law of G = E[mu2 - mu1 | n arm-1 samples], indexed by the sufficient statistic.
struct GapSummary {
    std::vector<GapEntry> entries;
    int n_samples = 0;
};

inline double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline GapSummary arm1_gap_distribution(const DiscretePrior& prior, RewardModel model, int n,
                                        int cap = kDefaultEnumerationCap) {
    if (n < 0) throw Error(ErrorKind::DomainError, "sample count must be nonnegative");
    if (n > cap) {
        throw Error(ErrorKind::CapExceeded,
                    "n=" + std::to_string(n) + " exceeds enumeration cap " + std::to_string(cap));
    }
    GapSummary summary;
    summary.n_samples = n;
    const auto& atoms = prior.atoms();
    if (n == 0) {
        summary.entries.push_back({0, 1.0, prior.prior_mean(Arm::Two) - prior.prior_mean(Arm::One)});
        return summary;
    }
    if (model == RewardModel::Deterministic) {
        // One entry per distinct mu1 value; statistic is its rank.
        std::map<double, std::pair<double, double>> groups;  // v -> (mass, mass * mu2)
        for (const auto& a : atoms) {
            auto& g = groups[a.mean.mu1];
            g.first += a.weight;
            g.second += a.weight * a.mean.mu2;
        }
        int rank = 0;
        for (const auto& [v, g] : groups) {
            summary.entries.push_back({rank++, g.first, g.second / g.first - v});
        }
        return summary;
    }
    std::vector<double> log_terms(atoms.size());
    for (int k = 0; k <= n; ++k) {
        double max_log = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            log_terms[i] = std::log(atoms[i].weight) + detail::xlogy(k, prior.log_mean(i, Arm::One)) +
                           detail::xlogy(n - k, prior.log_complement(i, Arm::One));
            max_log = std::max(max_log, log_terms[i]);
        }
        if (!std::isfinite(max_log)) continue;  // count k impossible under every atom
        double mass = 0.0;
        double gap_mass = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const double w = std::exp(log_terms[i] - max_log);
            mass += w;
            gap_mass += w * (atoms[i].mean.mu2 - atoms[i].mean.mu1);
        }
        const double prob = std::exp(max_log + log_binomial(n, k)) * mass;
        summary.entries.push_back({k, prob, gap_mass / mass});
    }
    return summary;
}

struct GapPositiveStats {
    double prob_positive = 0.0;
    double positive_mass = 0.0;
};

/// Pr[G > 0] and E[G * 1{G > 0}]; ties count as non-positive.
inline GapPositiveStats gap_positive_stats(const GapSummary& gs) {
    GapPositiveStats out;
    for (const auto& e : gs.entries) {
        if (strictly_positive_gap(e.gap)) {
            out.prob_positive += e.probability;
            out.positive_mass += e.probability * e.gap;
        }
    }
    return out;
}

/// Consumes one draw under Bernoulli, none under Deterministic.
inline double sample_reward(RewardModel model, double mean, RngStream& stream) {
    if (!detail::in_unit_interval(mean)) throw Error(ErrorKind::DomainError, "mean must lie in [0,1]");
    if (model == RewardModel::Deterministic) return mean;
    return stream.uniform() < mean ? 1.0 : 0.0;
}

}  // namespace incentix
