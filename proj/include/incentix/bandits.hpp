#pragma once

// Two-armed bandit algorithms, run loop and regret accounting.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "incentix/bayes_core.hpp"
#include "incentix/error.hpp"
#include "incentix/parallel.hpp"
#include "incentix/rng.hpp"

namespace incentix {

/// Hoeffding radius sqrt(2 ln T / n), natural log.
inline double confidence_radius(int n, int horizon) {
    if (n < 1) throw Error(ErrorKind::DomainError, "confidence radius needs n >= 1");
    if (horizon < 2) throw Error(ErrorKind::DomainError, "confidence radius needs T >= 2");
    return std::sqrt(2.0 * std::log(static_cast<double>(horizon)) / n);
}

struct ArmStats {
    int pulls = 0;
    double reward_sum = 0.0;

    double mean() const { return pulls == 0 ? 0.0 : reward_sum / pulls; }
};

struct BetaParams {
    double alpha = 1.0;
    double beta = 1.0;
};

namespace detail {

struct BanditState {
    int horizon = 0;
    int rounds = 0;
    std::array<ArmStats, 2> stats{};

    const ArmStats& of(Arm a) const { return stats[slot(a)]; }
};

// Larger empirical mean, unpulled arms first, ties to arm 1.
inline Arm empirical_leader(const BanditState& s) {
    if (s.of(Arm::One).pulls == 0) return Arm::One;
    if (s.of(Arm::Two).pulls == 0) return Arm::Two;
    return s.of(Arm::Two).mean() > s.of(Arm::One).mean() ? Arm::Two : Arm::One;
}

class AlgorithmCore {
public:
    virtual ~AlgorithmCore() = default;
    virtual std::unique_ptr<AlgorithmCore> clone() const = 0;
    virtual std::string name() const = 0;
    virtual void reset() {}
    virtual Arm choose(const BanditState& s, RngStream& rng) = 0;
    // Exact Pr[next choose() returns arm 2]; nullopt if not enumerable.
    virtual std::optional<double> prob_arm2(const BanditState& s) const = 0;
    virtual void observe(const BanditState& s, Arm arm, double reward) = 0;
    virtual bool requires_bernoulli() const { return false; }
    virtual std::optional<Arm> committed() const { return std::nullopt; }
    virtual void append_key(std::string&) const {}
};

inline double as_prob(Arm a) { return a == Arm::Two ? 1.0 : 0.0; }

class AdaptiveRaceCore final : public AlgorithmCore {
public:
    std::unique_ptr<AlgorithmCore> clone() const override { return std::make_unique<AdaptiveRaceCore>(*this); }
    std::string name() const override { return "adaptive-race"; }
    void reset() override {
        committed_.reset();
        commit_round_ = 0;
    }
    Arm choose(const BanditState&, RngStream& rng) override {
        if (committed_) return *committed_;
        return rng.uniform() < 0.5 ? Arm::One : Arm::Two;
    }
    std::optional<double> prob_arm2(const BanditState&) const override {
        return committed_ ? as_prob(*committed_) : 0.5;
    }
    void observe(const BanditState& s, Arm, double) override {
        if (committed_ || s.horizon < 2) return;
        const auto& a1 = s.of(Arm::One);
        const auto& a2 = s.of(Arm::Two);
        if (a1.pulls == 0 || a2.pulls == 0) return;
        const double r1 = confidence_radius(a1.pulls, s.horizon);
        const double r2 = confidence_radius(a2.pulls, s.horizon);
        if (a1.mean() - r1 > a2.mean() + r2) {
            committed_ = Arm::One;
        } else if (a2.mean() - r2 > a1.mean() + r1) {
            committed_ = Arm::Two;
        }
        if (committed_) commit_round_ = s.rounds;
    }
    std::optional<Arm> committed() const override { return committed_; }
    int commit_round() const { return commit_round_; }
    void append_key(std::string& out) const override {
        out += committed_ ? char('0' + to_int(*committed_)) : '-';
    }

private:
    std::optional<Arm> committed_;
    int commit_round_ = 0;
};

class ExploreFirstCore final : public AlgorithmCore {
public:
    explicit ExploreFirstCore(int per_arm) : per_arm_(per_arm) {}
    std::unique_ptr<AlgorithmCore> clone() const override { return std::make_unique<ExploreFirstCore>(*this); }
    std::string name() const override { return "explore-first:" + std::to_string(per_arm_); }
    Arm choose(const BanditState& s, RngStream&) override { return next(s); }
    std::optional<double> prob_arm2(const BanditState& s) const override { return as_prob(next(s)); }
    void observe(const BanditState&, Arm, double) override {}

private:
    Arm next(const BanditState& s) const {
        const int n1 = s.of(Arm::One).pulls;
        const int n2 = s.of(Arm::Two).pulls;
        if (n1 < per_arm_ && n1 <= n2) return Arm::One;
        if (n2 < per_arm_) return Arm::Two;
        if (n1 < per_arm_) return Arm::One;
        return empirical_leader(s);
    }
    int per_arm_;
};

class EpsilonGreedyCore final : public AlgorithmCore {
public:
    explicit EpsilonGreedyCore(std::function<double(int)> schedule) : schedule_(std::move(schedule)) {}
    std::unique_ptr<AlgorithmCore> clone() const override { return std::make_unique<EpsilonGreedyCore>(*this); }
    std::string name() const override { return "eps-greedy"; }
    Arm choose(const BanditState& s, RngStream& rng) override {
        if (rng.uniform() < epsilon(s)) return rng.uniform() < 0.5 ? Arm::One : Arm::Two;
        return empirical_leader(s);
    }
    std::optional<double> prob_arm2(const BanditState& s) const override {
        const double e = epsilon(s);
        return 0.5 * e + (1.0 - e) * as_prob(empirical_leader(s));
    }
    void observe(const BanditState&, Arm, double) override {}

private:
    double epsilon(const BanditState& s) const { return std::clamp(schedule_(s.rounds + 1), 0.0, 1.0); }
    std::function<double(int)> schedule_;
};

class Ucb1Core final : public AlgorithmCore {
public:
    std::unique_ptr<AlgorithmCore> clone() const override { return std::make_unique<Ucb1Core>(*this); }
    std::string name() const override { return "ucb1"; }
    Arm choose(const BanditState& s, RngStream&) override { return next(s); }
    std::optional<double> prob_arm2(const BanditState& s) const override { return as_prob(next(s)); }
    void observe(const BanditState&, Arm, double) override {}

private:
    static Arm next(const BanditState& s) {
        if (s.of(Arm::One).pulls == 0) return Arm::One;
        if (s.of(Arm::Two).pulls == 0) return Arm::Two;
        const int horizon = std::max(s.horizon, 2);
        const double u1 = s.of(Arm::One).mean() + confidence_radius(s.of(Arm::One).pulls, horizon);
        const double u2 = s.of(Arm::Two).mean() + confidence_radius(s.of(Arm::Two).pulls, horizon);
        return u2 > u1 ? Arm::Two : Arm::One;
    }
};

class ThompsonCore final : public AlgorithmCore {
public:
    ThompsonCore(BetaParams arm1, BetaParams arm2) : prior_{arm1, arm2} {}
    std::unique_ptr<AlgorithmCore> clone() const override { return std::make_unique<ThompsonCore>(*this); }
    std::string name() const override { return "thompson"; }
    Arm choose(const BanditState& s, RngStream& rng) override {
        const double t1 = draw(s, Arm::One, rng);
        const double t2 = draw(s, Arm::Two, rng);
        return t2 > t1 ? Arm::Two : Arm::One;
    }
    std::optional<double> prob_arm2(const BanditState&) const override { return std::nullopt; }
    void observe(const BanditState&, Arm, double reward) override {
        if (reward != 0.0 && reward != 1.0) {
            throw Error(ErrorKind::DomainError, "thompson sampling requires Bernoulli rewards");
        }
    }
    bool requires_bernoulli() const override { return true; }

private:
    double draw(const BanditState& s, Arm a, RngStream& rng) const {
        const auto& st = s.of(a);
        const auto& p = prior_[slot(a)];
        const double alpha = p.alpha + st.reward_sum;
        const double beta = p.beta + (st.pulls - st.reward_sum);
        const double x = std::gamma_distribution<double>(alpha, 1.0)(rng.engine());
        const double y = std::gamma_distribution<double>(beta, 1.0)(rng.engine());
        return x / (x + y);
    }
    std::array<BetaParams, 2> prior_;
};

class GreedyCore final : public AlgorithmCore {
public:
    GreedyCore(DiscretePrior prior, RewardModel model)
        : prior_(std::move(prior)), evidence_(model), choice_(preferred_arm(prior_belief(prior_))) {}
    std::unique_ptr<AlgorithmCore> clone() const override { return std::make_unique<GreedyCore>(*this); }
    std::string name() const override { return "greedy"; }
    void reset() override {
        evidence_ = Evidence(evidence_.model());
        choice_ = preferred_arm(prior_belief(prior_));
    }
    Arm choose(const BanditState&, RngStream&) override { return choice_; }
    std::optional<double> prob_arm2(const BanditState&) const override { return as_prob(choice_); }
    void observe(const BanditState&, Arm arm, double reward) override {
        evidence_.add({arm, reward});
        choice_ = preferred_arm(posterior_belief(prior_, evidence_));
    }
    void append_key(std::string& out) const override { evidence_.append_key(out); }
    const Evidence& evidence() const { return evidence_; }
    const DiscretePrior& prior() const { return prior_; }

private:
    DiscretePrior prior_;
    Evidence evidence_;
    Arm choice_;
};

class AlwaysCore final : public AlgorithmCore {
public:
    explicit AlwaysCore(Arm arm) : arm_(arm) {}
    std::unique_ptr<AlgorithmCore> clone() const override { return std::make_unique<AlwaysCore>(*this); }
    std::string name() const override { return "always:" + std::to_string(to_int(arm_)); }
    Arm choose(const BanditState&, RngStream&) override { return arm_; }
    std::optional<double> prob_arm2(const BanditState&) const override { return as_prob(arm_); }
    void observe(const BanditState&, Arm, double) override {}

private:
    Arm arm_;
};

class RoundRobinCore final : public AlgorithmCore {
public:
    std::unique_ptr<AlgorithmCore> clone() const override { return std::make_unique<RoundRobinCore>(*this); }
    std::string name() const override { return "round-robin"; }
    Arm choose(const BanditState& s, RngStream&) override { return next(s); }
    std::optional<double> prob_arm2(const BanditState& s) const override { return as_prob(next(s)); }
    void observe(const BanditState&, Arm, double) override {}

private:
    static Arm next(const BanditState& s) { return s.rounds % 2 == 0 ? Arm::One : Arm::Two; }
};

}  // namespace detail

/// A two-armed bandit algorithm with value semantics. Protocol:
/// reset(seed), then alternate choose() and update(arm, reward) with the
/// arm that choose() returned. update() may also be called without a
/// preceding choose() when an outside driver (an exact enumerator) picks
/// the arm from prob_arm2().
class BanditAlgorithm {
public:
    static BanditAlgorithm adaptive_race(int horizon) {
        return {std::make_unique<detail::AdaptiveRaceCore>(), horizon};
    }
    static BanditAlgorithm explore_first(int per_arm, int horizon) {
        if (per_arm < 0) throw Error(ErrorKind::DomainError, "explore-first needs N >= 0");
        return {std::make_unique<detail::ExploreFirstCore>(per_arm), horizon};
    }
    /// Default schedule eps_t = t^(-1/3).
    static BanditAlgorithm epsilon_greedy(int horizon, std::function<double(int)> schedule = {}) {
        if (!schedule) schedule = [](int t) { return std::pow(static_cast<double>(t), -1.0 / 3.0); };
        return {std::make_unique<detail::EpsilonGreedyCore>(std::move(schedule)), horizon};
    }
    static BanditAlgorithm ucb1(int horizon) { return {std::make_unique<detail::Ucb1Core>(), horizon}; }
    static BanditAlgorithm thompson(int horizon, BetaParams arm1 = {}, BetaParams arm2 = {}) {
        if (!(arm1.alpha > 0 && arm1.beta > 0 && arm2.alpha > 0 && arm2.beta > 0)) {
            throw Error(ErrorKind::DomainError, "Beta parameters must be positive");
        }
        return {std::make_unique<detail::ThompsonCore>(arm1, arm2), horizon};
    }
    static BanditAlgorithm greedy(DiscretePrior prior, RewardModel model, int horizon) {
        return {std::make_unique<detail::GreedyCore>(std::move(prior), model), horizon};
    }
    static BanditAlgorithm always(Arm arm, int horizon) {
        return {std::make_unique<detail::AlwaysCore>(arm), horizon};
    }
    static BanditAlgorithm round_robin(int horizon) {
        return {std::make_unique<detail::RoundRobinCore>(), horizon};
    }

    BanditAlgorithm(const BanditAlgorithm& o)
        : core_(o.core_->clone()), state_(o.state_), rng_(o.rng_), pending_(o.pending_) {}
    BanditAlgorithm& operator=(const BanditAlgorithm& o) {
        if (this != &o) *this = BanditAlgorithm(o);
        return *this;
    }
    BanditAlgorithm(BanditAlgorithm&&) noexcept = default;
    BanditAlgorithm& operator=(BanditAlgorithm&&) noexcept = default;

    void reset(std::uint64_t seed) {
        state_.rounds = 0;
        state_.stats = {};
        rng_ = RngStream(seed);
        pending_.reset();
        core_->reset();
    }

    Arm choose() {
        const Arm a = core_->choose(state_, rng_);
        pending_ = a;
        return a;
    }

    void update(Arm arm, double reward) {
        if (pending_ && *pending_ != arm) {
            throw Error(ErrorKind::BranchMismatch, "update() arm differs from the preceding choose()");
        }
        pending_.reset();
        auto& st = state_.stats[slot(arm)];
        ++st.pulls;
        st.reward_sum += reward;
        ++state_.rounds;
        core_->observe(state_, arm, reward);
    }

    /// Drops a choice that was not executed (the agent pulled the other arm).
    void discard_pending() { pending_.reset(); }

    std::optional<double> prob_arm2() const { return core_->prob_arm2(state_); }
    bool requires_bernoulli() const { return core_->requires_bernoulli(); }
    std::optional<Arm> committed_arm() const { return core_->committed(); }

    const ArmStats& stats(Arm a) const { return state_.of(a); }
    int rounds_played() const { return state_.rounds; }
    int horizon() const { return state_.horizon; }
    std::string name() const { return core_->name(); }

    /// Identity of the decision-relevant state, for merging enumeration paths.
    void append_key(std::string& out) const {
        for (const auto& st : state_.stats) {
            out += std::to_string(st.pulls);
            out += ',';
            char buf[32];
            std::snprintf(buf, sizeof buf, "%a", st.reward_sum);
            out += buf;
            out += ';';
        }
        core_->append_key(out);
    }

    template <class Core>
    const Core* core_as() const {
        return dynamic_cast<const Core*>(core_.get());
    }

private:
    BanditAlgorithm(std::unique_ptr<detail::AlgorithmCore> core, int horizon)
        : core_(std::move(core)), rng_(0) {
        state_.horizon = horizon;
    }

    std::unique_ptr<detail::AlgorithmCore> core_;
    detail::BanditState state_;
    RngStream rng_;
    std::optional<Arm> pending_;
};

struct TraceRound {
    int t = 0;
    Arm arm = Arm::One;
    double reward = 0.0;
};

struct Trace {
    std::vector<TraceRound> rounds;
    int horizon = 0;
};

/// Runs T rounds. The algorithm's coins and the reward draws come from
/// separate children of `stream`.
inline Trace run_bandit(BanditAlgorithm& alg, const MeanVector& mu, RewardModel model, int horizon,
                        const RngStream& stream) {
    if (alg.requires_bernoulli() && model != RewardModel::Bernoulli) {
        throw Error(ErrorKind::DomainError, alg.name() + " requires the Bernoulli reward model");
    }
    alg.reset(stream.child("alg").seed());
    RngStream rewards = stream.child("reward");
    Trace trace;
    trace.horizon = horizon;
    trace.rounds.reserve(static_cast<std::size_t>(std::max(horizon, 0)));
    for (int t = 1; t <= horizon; ++t) {
        const Arm a = alg.choose();
        const double r = sample_reward(model, mu[a], rewards);
        alg.update(a, r);
        trace.rounds.push_back({t, a, r});
    }
    return trace;
}

struct RegretReport {
    std::vector<double> cumulative;
    std::vector<double> instantaneous;
    double gap = 0.0;

    double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

/// Realized pseudo-regret: per-round mu* - mu_{a_t} and its running sum.
inline RegretReport regret_report(const Trace& trace, const MeanVector& mu) {
    RegretReport rep;
    rep.gap = std::abs(mu.mu1 - mu.mu2);
    const double best = mu.best();
    double acc = 0.0;
    for (const auto& r : trace.rounds) {
        const double inst = best - mu[r.arm];
        acc += inst;
        rep.instantaneous.push_back(inst);
        rep.cumulative.push_back(acc);
    }
    return rep;
}

struct MeanEstimate {
    double mean = 0.0;
    double half_width = 0.0;
};

namespace detail {

struct Moments {
    double n = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) {
        n += 1.0;
        sum += x;
        sum_sq += x * x;
    }
    void merge(const Moments& o) {
        n += o.n;
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
    double mean() const { return n > 0 ? sum / n : 0.0; }
    double sample_variance() const {
        if (n < 2) return 0.0;
        return std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    }
    /// 95% normal half-width of the mean.
    double half_width() const { return n < 2 ? 0.0 : 1.96 * std::sqrt(sample_variance() / n); }
    MeanEstimate estimate() const { return {mean(), half_width()}; }
};

}  // namespace detail

/// Replicate r uses the stream derived from (seed, "replicate", r): its
/// "prior" child draws mu and its "bandit" child drives run_bandit.
inline MeanEstimate bayesian_regret(const BanditAlgorithm& alg, const DiscretePrior& prior, RewardModel model,
                                    int horizon, std::size_t replicates, std::uint64_t seed) {
    if (replicates < 2) throw Error(ErrorKind::DomainError, "bayesian_regret needs at least 2 replicates");
    auto block = [&](std::size_t begin, std::size_t end) {
        detail::Moments m;
        BanditAlgorithm local = alg;
        for (std::size_t r = begin; r < end; ++r) {
            const RngStream rep(derive_seed(seed, "replicate", r));
            RngStream prior_stream = rep.child("prior");
            const MeanVector mu = prior.sample(prior_stream);
            const Trace trace = run_bandit(local, mu, model, horizon, rep.child("bandit"));
            m.add(regret_report(trace, mu).total());
        }
        return m;
    };
    return reduce_replicates(replicates, detail::Moments{}, block,
                             [](detail::Moments& a, detail::Moments&& b) { a.merge(b); })
        .estimate();
}

/// Per-round aggregates of repeated bandit runs.
struct RegretCurve {
    std::vector<double> arm1_freq;
    std::vector<double> arm2_freq;
    std::vector<double> cum_regret_mean;
    std::vector<double> cum_regret_ci;
    std::size_t replicates = 0;
};

namespace detail {

struct CurveAcc {
    std::vector<double> arm2;
    std::vector<Moments> regret;

    explicit CurveAcc(int horizon = 0) : arm2(horizon, 0.0), regret(horizon) {}
    void merge(const CurveAcc& o) {
        for (std::size_t t = 0; t < arm2.size(); ++t) {
            arm2[t] += o.arm2[t];
            regret[t].merge(o.regret[t]);
        }
    }
};

}  // namespace detail

/// Regret curve with mu drawn per replicate by `draw_instance` from the
/// replicate's "prior" child stream.
inline RegretCurve regret_curve(const BanditAlgorithm& alg, const std::function<MeanVector(RngStream&)>& draw_instance,
                                RewardModel model, int horizon, std::size_t replicates, std::uint64_t seed) {
    auto block = [&](std::size_t begin, std::size_t end) {
        detail::CurveAcc acc(horizon);
        BanditAlgorithm local = alg;
        for (std::size_t r = begin; r < end; ++r) {
            const RngStream rep(derive_seed(seed, "replicate", r));
            RngStream prior_stream = rep.child("prior");
            const MeanVector mu = draw_instance(prior_stream);
            const Trace trace = run_bandit(local, mu, model, horizon, rep.child("bandit"));
            const RegretReport rr = regret_report(trace, mu);
            for (int t = 0; t < horizon; ++t) {
                if (trace.rounds[t].arm == Arm::Two) acc.arm2[t] += 1.0;
                acc.regret[t].add(rr.cumulative[t]);
            }
        }
        return acc;
    };
    auto acc = reduce_replicates(replicates, detail::CurveAcc(horizon), block,
                                 [](detail::CurveAcc& a, detail::CurveAcc&& b) { a.merge(b); });
    RegretCurve curve;
    curve.replicates = replicates;
    for (int t = 0; t < horizon; ++t) {
        const double f2 = replicates ? acc.arm2[t] / static_cast<double>(replicates) : 0.0;
        curve.arm2_freq.push_back(f2);
        curve.arm1_freq.push_back(1.0 - f2);
        curve.cum_regret_mean.push_back(acc.regret[t].mean());
        curve.cum_regret_ci.push_back(acc.regret[t].half_width());
    }
    return curve;
}

/// Context needed to instantiate algorithm spec strings.
struct AlgorithmContext {
    int horizon = 0;
    const DiscretePrior* prior = nullptr;
    RewardModel model = RewardModel::Bernoulli;
};

/// ExploreFirst's default per-arm budget round(T^(2/3)).
inline int default_explore_budget(int horizon) {
    return static_cast<int>(std::llround(std::pow(static_cast<double>(std::max(horizon, 1)), 2.0 / 3.0)));
}

/// Parses `adaptive-race`, `explore-first[:N]`, `eps-greedy`, `ucb1`,
/// `thompson`, `greedy`, `always:1|2`, `round-robin`.
inline BanditAlgorithm parse_algorithm_spec(std::string_view spec, const AlgorithmContext& ctx) {
    const auto colon = spec.find(':');
    const std::string_view head = spec.substr(0, colon);
    const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
    auto bad = [&](const std::string& why) {
        return Error(ErrorKind::ParseError, "algorithm spec '" + std::string(spec) + "': " + why);
    };
    auto no_arg = [&] {
        if (colon != std::string_view::npos) throw bad("takes no argument");
    };
    if (head == "adaptive-race") return no_arg(), BanditAlgorithm::adaptive_race(ctx.horizon);
    if (head == "ucb1") return no_arg(), BanditAlgorithm::ucb1(ctx.horizon);
    if (head == "thompson") return no_arg(), BanditAlgorithm::thompson(ctx.horizon);
    if (head == "round-robin") return no_arg(), BanditAlgorithm::round_robin(ctx.horizon);
    if (head == "eps-greedy") return no_arg(), BanditAlgorithm::epsilon_greedy(ctx.horizon);
    if (head == "greedy") {
        no_arg();
        if (!ctx.prior) throw bad("greedy needs a prior");
        return BanditAlgorithm::greedy(*ctx.prior, ctx.model, ctx.horizon);
    }
    if (head == "always") {
        if (arg == "1") return BanditAlgorithm::always(Arm::One, ctx.horizon);
        if (arg == "2") return BanditAlgorithm::always(Arm::Two, ctx.horizon);
        throw bad("expected always:1 or always:2");
    }
    if (head == "explore-first") {
        if (arg.empty()) return BanditAlgorithm::explore_first(default_explore_budget(ctx.horizon), ctx.horizon);
        try {
            std::size_t used = 0;
            const int n = std::stoi(std::string(arg), &used);
            if (used != arg.size() || n < 0) throw bad("N must be a nonnegative integer");
            return BanditAlgorithm::explore_first(n, ctx.horizon);
        } catch (const std::logic_error&) {
            throw bad("N must be a nonnegative integer");
        }
    }
    throw bad("unknown algorithm");
}

}  // namespace incentix
