#pragma once

// Command-line driver. Every subcommand is turned into a request object,
// executed into a results document, then rendered as CSV or JSON. The
// `replay` subcommand re-executes a document's request and compares.
//
// Requires CLI11 and nlohmann/json.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "incentix/bandits.hpp"
#include "incentix/bayes_core.hpp"
#include "incentix/error.hpp"
#include "incentix/harness.hpp"
#include "incentix/incentivized.hpp"
#include "incentix/persuasion.hpp"
#include "incentix/prior_io.hpp"

namespace incentix::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kUsageError = 2 };

struct Result {
    json document;
    int exit_code = kOk;
};

namespace detail {

inline json opt_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

inline json table(std::vector<std::string> columns) { return {{"columns", std::move(columns)}, {"rows", json::array()}}; }

inline ParsedPrior request_prior(const json& req) {
    if (!req.contains("prior")) throw Error(ErrorKind::ParseError, "request is missing a prior");
    return parse_prior(req.at("prior"));
}

inline void add_round_table(json& doc, const std::vector<double>& f1, const std::vector<double>& f2,
                            const std::vector<double>& regret, const std::vector<double>& ci) {
    json t = table({"round", "arm1_freq", "arm2_freq", "cum_regret_mean", "cum_regret_ci"});
    for (std::size_t i = 0; i < f1.size(); ++i) t["rows"].push_back({i + 1, f1[i], f2[i], regret[i], ci[i]});
    doc["table"] = std::move(t);
}

inline json policy_json(const MessagingPolicy& p) { return {{"messages", p.messages}, {"rows", p.rows}}; }

inline Result exec_simulate(const json& req, std::vector<std::string>& warnings) {
    const ParsedPrior pp = request_prior(req);
    warnings.insert(warnings.end(), pp.warnings.begin(), pp.warnings.end());
    const int T = req.at("T").get<int>();
    const PolicyContext ctx{&pp.prior, pp.model, T};
    ParsedPolicy parsed = parse_policy_spec(req.at("policy").get<std::string>(), ctx);
    const std::string agent = req.at("agent").get<std::string>();
    if (agent != "compliant" && agent != "rational") {
        throw Error(ErrorKind::ParseError, "agent must be 'compliant' or 'rational'");
    }
    GameConfig cfg{parsed.policy,
                   pp.prior,
                   pp.model,
                   T,
                   agent == "rational" ? AgentMode::RationalExact : AgentMode::Compliant,
                   req.at("replicates").get<std::size_t>(),
                   req.at("seed").get<std::uint64_t>(),
                   req.at("cap").get<int>()};
    const GameStats s = simulate_game(cfg);
    double arm2 = 0.0;
    double explores = 0.0;
    for (std::size_t r = 0; r < s.replicates; ++r) {
        arm2 += s.arm2_pulls[r];
        explores += s.explore_rounds[r];
    }
    const double n = s.replicates ? static_cast<double>(s.replicates) : 1.0;
    json doc;
    doc["summary"] = {{"policy", parsed.canonical},
                      {"replicates", s.replicates},
                      {"horizon", s.horizon},
                      {"mean_reward", s.mean_reward},
                      {"mean_expected_reward", s.mean_expected_reward},
                      {"mean_best", s.mean_best},
                      {"regret", s.regret.mean},
                      {"regret_ci", s.regret.half_width},
                      {"never_arm2_fraction", s.never_arm2_fraction},
                      {"mean_arm2_pulls", arm2 / n},
                      {"mean_explore_rounds", explores / n},
                      {"deviations", s.deviations}};
    add_round_table(doc, s.arm1_freq, s.arm2_freq, s.cum_regret_mean, s.cum_regret_ci);
    return {std::move(doc), kOk};
}

inline Result exec_bic_check(const json& req, std::vector<std::string>& warnings) {
    const ParsedPrior pp = request_prior(req);
    warnings.insert(warnings.end(), pp.warnings.begin(), pp.warnings.end());
    const int T = req.at("T").get<int>();
    const PolicyContext ctx{&pp.prior, pp.model, T};
    ParsedPolicy parsed = parse_policy_spec(req.at("policy").get<std::string>(), ctx);
    const std::string mode = req.at("mode").get<std::string>();
    BicReport report;
    if (mode == "exact") {
        report = bic_verify_exact(parsed.policy, pp.prior, pp.model, T, req.at("cap").get<int>());
    } else if (mode == "mc") {
        report = bic_verify_mc(parsed.policy, pp.prior, pp.model, T, req.at("replicates").get<std::size_t>(),
                               req.at("seed").get<std::uint64_t>());
    } else {
        throw Error(ErrorKind::ParseError, "mode must be 'exact' or 'mc'");
    }
    json t = table({"round", "rec", "slack", "ci_half_width", "mode"});
    std::optional<double> min_slack[2];
    for (const auto& r : report.rounds) {
        for (Arm a : {Arm::One, Arm::Two}) {
            const auto& s = r.slack[slot(a)];
            json hw = s ? json(r.half_width[slot(a)]) : json(nullptr);
            t["rows"].push_back({r.t, to_int(a), opt_number(s), hw, std::string(to_string(report.mode))});
            if (s && (!min_slack[slot(a)] || *s < *min_slack[slot(a)])) min_slack[slot(a)] = *s;
        }
    }
    const bool pass = report.passes();
    json doc;
    doc["summary"] = {{"policy", parsed.canonical},
                      {"mode", std::string(to_string(report.mode))},
                      {"pass", pass},
                      {"min_slack_arm1", opt_number(min_slack[0])},
                      {"min_slack_arm2", opt_number(min_slack[1])}};
    doc["table"] = std::move(t);
    return {std::move(doc), pass ? kOk : kVerificationFailed};
}

inline Result exec_persuasion_opt(const json& req, std::vector<std::string>&) {
    const TwoPointPrior prior = make_two_point_prior(req.at("vlow").get<double>(), req.at("vhigh").get<double>(),
                                                     req.at("p").get<double>(), req.at("mu2").get<double>());
    json doc;
    json summary = {{"optimal_value", bp_optimal_value(prior)},
                    {"full_revelation_value", bp_full_revelation_value(prior)}};
    json policies;
    std::vector<std::pair<std::string, MessagingPolicy>> listed{{"full_revelation", bp_full_revelation_policy()}};
    if (req.contains("delta") && !req["delta"].is_null()) {
        const MessagingPolicy near = bp_near_optimal_policy(prior, req["delta"].get<double>());
        summary["near_optimal_value"] = bp_eval_policy(near, prior);
        listed.emplace_back("near_optimal", near);
    }
    json t = table({"policy", "atom", "message", "probability"});
    for (const auto& [name, pol] : listed) {
        policies[name] = policy_json(pol);
        for (std::size_t atom = 0; atom < pol.rows.size(); ++atom) {
            for (std::size_t m = 0; m < pol.messages.size(); ++m) {
                t["rows"].push_back({name, atom == 0 ? "low" : "high", pol.messages[m], pol.rows[atom][m]});
            }
        }
    }
    doc["summary"] = std::move(summary);
    doc["policies"] = std::move(policies);
    doc["table"] = std::move(t);
    return {std::move(doc), kOk};
}

inline Result exec_explorability(const json& req, std::vector<std::string>& warnings) {
    const ParsedPrior pp = request_prior(req);
    warnings.insert(warnings.end(), pp.warnings.begin(), pp.warnings.end());
    const int n_max = req.at("nmax").get<int>();
    const double safety = req.at("safety").get<double>();
    const int cap = std::max(n_max, kDefaultEnumerationCap);
    json t = table({"n", "prob_positive", "positive_mass", "threshold"});
    for (int n = 0; n <= n_max; ++n) {
        const auto stats = gap_positive_stats(arm1_gap_distribution(pp.prior, pp.model, n, cap));
        t["rows"].push_back({n, stats.prob_positive, stats.positive_mass, stats.positive_mass / 3.0});
    }
    const auto n = explorability(pp.prior, pp.model, n_max, cap);
    json summary = {{"explorable", n.has_value()}, {"n_max", n_max}, {"n", n ? json(*n) : json(nullptr)}};
    if (const auto params = choose_params(pp.prior, pp.model, n_max, safety, cap)) {
        summary["n0"] = params->n0;
        summary["threshold"] = params->threshold;
        summary["epsilon"] = params->epsilon;
    }
    if (pp.prior.independent()) summary["independent_criterion"] = independent_prior_explorable(pp.prior);
    json doc;
    doc["summary"] = std::move(summary);
    doc["table"] = std::move(t);
    return {std::move(doc), kOk};
}

inline Result exec_greedy_failure(const json& req, std::vector<std::string>& warnings) {
    const ParsedPrior pp = request_prior(req);
    warnings.insert(warnings.end(), pp.warnings.begin(), pp.warnings.end());
    const GreedyFailure g = greedy_failure_prob(pp.prior, pp.model, req.at("T").get<int>(),
                                                req.at("replicates").get<std::size_t>(),
                                                req.at("seed").get<std::uint64_t>());
    json doc;
    doc["summary"] = {{"estimate", g.estimate},
                      {"half_width", g.half_width},
                      {"bound", g.bound},
                      {"exact", opt_number(g.exact)}};
    return {std::move(doc), kOk};
}

inline Result exec_regret_curve(const json& req, std::vector<std::string>& warnings) {
    const int T = req.at("T").get<int>();
    std::optional<ParsedPrior> pp;
    RewardModel model;
    std::function<MeanVector(RngStream&)> draw;
    if (req.contains("prior")) {
        pp = request_prior(req);
        warnings.insert(warnings.end(), pp->warnings.begin(), pp->warnings.end());
        model = pp->model;
        const DiscretePrior prior = pp->prior;
        draw = [prior](RngStream& s) { return prior.sample(s); };
    } else if (req.contains("mu")) {
        const MeanVector mu{req["mu"].at(0).get<double>(), req["mu"].at(1).get<double>()};
        if (!incentix::detail::in_unit_interval(mu.mu1) || !incentix::detail::in_unit_interval(mu.mu2)) {
            throw Error(ErrorKind::DomainError, "--mu1/--mu2 must lie in [0,1]");
        }
        model = parse_reward_model(req.at("model").get<std::string>());
        draw = [mu](RngStream&) { return mu; };
    } else {
        throw Error(ErrorKind::ParseError, "regret-curve needs --prior or --mu1/--mu2");
    }
    const AlgorithmContext ctx{T, pp ? &pp->prior : nullptr, model};
    const BanditAlgorithm alg = parse_algorithm_spec(req.at("alg").get<std::string>(), ctx);
    const RegretCurve c = regret_curve(alg, draw, model, T, req.at("replicates").get<std::size_t>(),
                                       req.at("seed").get<std::uint64_t>());
    json doc;
    doc["summary"] = {{"algorithm", alg.name()},
                      {"replicates", c.replicates},
                      {"regret", c.cum_regret_mean.empty() ? 0.0 : c.cum_regret_mean.back()},
                      {"regret_ci", c.cum_regret_ci.empty() ? 0.0 : c.cum_regret_ci.back()}};
    add_round_table(doc, c.arm1_freq, c.arm2_freq, c.cum_regret_mean, c.cum_regret_ci);
    return {std::move(doc), kOk};
}

}  // namespace detail

/// Executes a request {"command": ..., parameters...}. The returned
/// document carries the request, a summary and, for most commands, a table.
inline Result execute(const json& request, std::vector<std::string>& warnings) {
    const std::string cmd = request.at("command").get<std::string>();
    Result r;
    if (cmd == "simulate") {
        r = detail::exec_simulate(request, warnings);
    } else if (cmd == "bic-check") {
        r = detail::exec_bic_check(request, warnings);
    } else if (cmd == "persuasion-opt") {
        r = detail::exec_persuasion_opt(request, warnings);
    } else if (cmd == "explorability") {
        r = detail::exec_explorability(request, warnings);
    } else if (cmd == "greedy-failure") {
        r = detail::exec_greedy_failure(request, warnings);
    } else if (cmd == "regret-curve") {
        r = detail::exec_regret_curve(request, warnings);
    } else {
        throw Error(ErrorKind::ParseError, "unknown command '" + cmd + "'");
    }
    r.document["request"] = request;
    return r;
}

inline std::string csv_cell(const json& v) {
    if (v.is_null()) return "NA";
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

inline std::string render_csv(const json& tbl) {
    std::string out;
    const auto& cols = tbl.at("columns");
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out += ',';
        out += cols[i].get<std::string>();
    }
    out += '\n';
    for (const auto& row : tbl.at("rows")) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_cell(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline std::string summary_value(const json& v) {
    if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
        return buf;
    }
    return csv_cell(v);
}

inline std::string render_summary(const std::string& command, const json& s) {
    std::ostringstream out;
    if (command == "explorability") {
        if (s.at("explorable").get<bool>()) {
            out << "explorable at n=" << s.at("n").get<int>() << '\n';
        } else {
            out << "not explorable up to n=" << s.at("n_max").get<int>() << '\n';
        }
    }
    for (const auto& [k, v] : s.items()) out << k << ' ' << summary_value(v) << '\n';
    return out.str();
}

namespace detail {

inline bool write_text(const std::string& path, const std::string& text, std::ostream& err) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        err << "error: cannot write '" << path << "'\n";
        return false;
    }
    f << text;
    return static_cast<bool>(f);
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
}

}  // namespace detail

/// Runs the CLI on `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Incentivized exploration toolkit: bandits, persuasion and BIC verification"};
    app.require_subcommand(1);

    std::string prior_path, policy, alg, agent = "compliant", mode = "exact", output, format = "csv", model = "bernoulli";
    std::string input;
    int T = 100, cap = kDefaultExactCap, nmax = 50;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    double safety = 0.9;
    double vlow = 0, vhigh = 1, p = 0.5, mu2_mean = 0;
    std::optional<double> delta, mu1_fixed, mu2_fixed;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--output,-o", output, "write results here instead of stdout");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    };
    auto with_prior = [&](CLI::App* sub, bool required) {
        auto* o = sub->add_option("--prior", prior_path, "prior document (.json optional)");
        if (required) o->required();
    };

    auto* sim = app.add_subcommand("simulate", "play the principal/agent game");
    with_prior(sim, true);
    sim->add_option("--policy", policy, "policy spec")->required();
    sim->add_option("--T", T, "horizon")->check(CLI::PositiveNumber);
    sim->add_option("--replicates", replicates, "replicates (default 1000)");
    sim->add_option("--seed", seed, "global seed");
    sim->add_option("--agent", agent, "compliant or rational")->check(CLI::IsMember({"compliant", "rational"}));
    sim->add_option("--cap", cap, "exact enumeration cap for rational agents");
    common(sim);

    auto* bic = app.add_subcommand("bic-check", "verify Bayesian incentive compatibility");
    with_prior(bic, true);
    bic->add_option("--policy", policy, "policy spec")->required();
    bic->add_option("--T", T, "horizon")->check(CLI::PositiveNumber);
    bic->add_option("--mode", mode, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
    bic->add_option("--replicates", replicates, "replicates for mc (default 100000)");
    bic->add_option("--seed", seed, "global seed");
    bic->add_option("--cap", cap, "exact enumeration cap");
    common(bic);

    auto* bp = app.add_subcommand("persuasion-opt", "single-round persuasion optimum for a two-point prior");
    bp->add_option("--vlow", vlow, "low arm-1 value")->required();
    bp->add_option("--vhigh", vhigh, "high arm-1 value")->required();
    bp->add_option("--p", p, "probability of the high value")->required();
    bp->add_option("--mu2", mu2_mean, "arm-2 prior mean")->required();
    bp->add_option("--delta", delta, "margin for the near-optimal policy");
    common(bp);

    auto* ex = app.add_subcommand("explorability", "explorability and BIC parameters of a prior");
    with_prior(ex, true);
    ex->add_option("--nmax", nmax, "largest sample count")->check(CLI::PositiveNumber);
    ex->add_option("--safety", safety, "epsilon as a fraction of the threshold");
    common(ex);

    auto* gf = app.add_subcommand("greedy-failure", "probability that greedy never tries arm 2");
    with_prior(gf, true);
    gf->add_option("--T", T, "horizon")->check(CLI::PositiveNumber);
    gf->add_option("--replicates", replicates, "replicates (default 20000)");
    gf->add_option("--seed", seed, "global seed");
    common(gf);

    auto* rc = app.add_subcommand("regret-curve", "regret curve of a bandit algorithm");
    with_prior(rc, false);
    rc->add_option("--alg", alg, "algorithm spec")->required();
    rc->add_option("--mu1", mu1_fixed, "fixed arm-1 mean");
    rc->add_option("--mu2", mu2_fixed, "fixed arm-2 mean");
    rc->add_option("--model", model, "reward model for a fixed instance")
        ->check(CLI::IsMember({"bernoulli", "deterministic"}));
    rc->add_option("--T", T, "horizon")->check(CLI::PositiveNumber);
    rc->add_option("--replicates", replicates, "replicates (default 1000)");
    rc->add_option("--seed", seed, "global seed");
    common(rc);

    auto* rp = app.add_subcommand("replay", "re-run a JSON results document and compare");
    rp->add_option("--input", input, "results document")->required();

    std::vector<std::string> argv_store{"incentix"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (rp->parsed()) {
            const json doc = detail::read_json_file(input);
            if (!doc.contains("request")) throw Error(ErrorKind::ParseError, input + ": no request object");
            std::vector<std::string> warnings;
            const Result again = execute(doc.at("request"), warnings);
            const bool same = again.document == doc;
            out << (same ? "replay identical\n" : "replay differs\n");
            return same ? kOk : kVerificationFailed;
        }

        json req;
        auto load_prior = [&] { req["prior"] = load_prior_file(prior_path).document; };
        auto fallback = [&](std::size_t def) { return replicates ? replicates : def; };
        if (sim->parsed()) {
            load_prior();
            req.update({{"command", "simulate"}, {"policy", policy}, {"T", T}, {"replicates", fallback(1000)},
                        {"seed", seed}, {"agent", agent}, {"cap", cap}});
        } else if (bic->parsed()) {
            load_prior();
            req.update({{"command", "bic-check"}, {"policy", policy}, {"T", T}, {"mode", mode},
                        {"replicates", fallback(100000)}, {"seed", seed}, {"cap", cap}});
        } else if (bp->parsed()) {
            req = {{"command", "persuasion-opt"}, {"vlow", vlow}, {"vhigh", vhigh}, {"p", p}, {"mu2", mu2_mean}};
            if (delta) req["delta"] = *delta;
        } else if (ex->parsed()) {
            load_prior();
            req.update({{"command", "explorability"}, {"nmax", nmax}, {"safety", safety}});
        } else if (gf->parsed()) {
            load_prior();
            req.update({{"command", "greedy-failure"}, {"T", T}, {"replicates", fallback(20000)}, {"seed", seed}});
        } else {
            if (!prior_path.empty()) {
                load_prior();
            } else if (mu1_fixed && mu2_fixed) {
                req["mu"] = {*mu1_fixed, *mu2_fixed};
                req["model"] = model;
            } else {
                throw Error(ErrorKind::ParseError, "regret-curve needs --prior or both --mu1 and --mu2");
            }
            req.update({{"command", "regret-curve"}, {"alg", alg}, {"T", T}, {"replicates", fallback(1000)},
                        {"seed", seed}});
        }

        std::vector<std::string> warnings;
        const Result result = execute(req, warnings);
        for (const auto& w : warnings) err << "warning: " << w << '\n';
        const json& doc = result.document;
        const std::string command = req.at("command").get<std::string>();

        if (format == "json") {
            const std::string text = doc.dump(2) + "\n";
            if (!output.empty()) {
                if (!detail::write_text(output, text, err)) return kUsageError;
            } else {
                out << text;
            }
            return result.exit_code;
        }
        // CSV: table-first commands put the table on stdout and the summary on
        // the diagnostic stream unless --output is given.
        const bool table_first = command == "simulate" || command == "bic-check" || command == "regret-curve";
        const std::string summary = render_summary(command, doc.at("summary"));
        const std::string tbl = doc.contains("table") ? render_csv(doc.at("table")) : std::string{};
        if (!output.empty()) {
            if (!detail::write_text(output, tbl, err)) return kUsageError;
            out << summary;
        } else if (table_first) {
            out << tbl;
            err << summary;
        } else {
            out << summary;
        }
        return result.exit_code;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const json::exception& e) {
        err << "error: malformed request: " << e.what() << '\n';
        return kUsageError;
    }
}

}  // namespace incentix::cli
