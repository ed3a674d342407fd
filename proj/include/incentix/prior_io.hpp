#pragma once

// Prior documents (JSON):
//
//   {"model": "bernoulli", "atoms": [[mu1, mu2, weight], ...]}
//   {"model": "deterministic",
//    "independent": {"arm1": [[v, w], ...], "arm2": [[v, w], ...]}}
//
// Requires nlohmann/json.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "incentix/bayes_core.hpp"
#include "incentix/error.hpp"

namespace incentix {

/// Weight totals within this distance of 1 are renormalized with a warning.
inline constexpr double kWeightSumSlack = 0.05;

struct ParsedPrior {
    DiscretePrior prior;
    RewardModel model;
    nlohmann::json document;
    std::vector<std::string> warnings;
};

namespace detail {

inline Error schema_error(const std::string& path, const std::string& what) {
    return Error(ErrorKind::ParseError, "prior document: " + path + ": " + what);
}

inline double number_at(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw schema_error(path, "expected a number");
    return j.get<double>();
}

inline const nlohmann::json& array_at(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array()) throw schema_error(path, "expected an array");
    if (j.empty()) throw schema_error(path, "must not be empty");
    return j;
}

inline void check_weight_sum(double total, const std::string& path, std::vector<std::string>& warnings) {
    const double off = std::abs(total - 1.0);
    if (off > kWeightSumSlack) {
        std::ostringstream msg;
        msg << "weights sum to " << total << ", more than " << kWeightSumSlack << " from 1";
        throw schema_error(path, msg.str());
    }
    if (off > 1e-9) {
        std::ostringstream msg;
        msg << path << ": weights sum to " << total << "; normalized";
        warnings.push_back(msg.str());
    }
}

inline std::vector<std::pair<double, double>> parse_marginal(const nlohmann::json& j, const std::string& path,
                                                             std::vector<std::string>& warnings) {
    std::vector<std::pair<double, double>> out;
    double total = 0.0;
    const auto& arr = array_at(j, path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        if (!arr[i].is_array() || arr[i].size() != 2) throw schema_error(p, "expected [value, weight]");
        const double v = number_at(arr[i][0], p + "[0]");
        const double w = number_at(arr[i][1], p + "[1]");
        out.emplace_back(v, w);
        total += w;
    }
    check_weight_sum(total, path, warnings);
    return out;
}

}  // namespace detail

inline ParsedPrior parse_prior(const nlohmann::json& doc) {
    using detail::schema_error;
    if (!doc.is_object()) throw schema_error("$", "expected an object");
    if (!doc.contains("model")) throw schema_error("$.model", "missing required field");
    if (!doc["model"].is_string()) throw schema_error("$.model", "expected a string");
    RewardModel model;
    try {
        model = parse_reward_model(doc["model"].get<std::string>());
    } catch (const Error& e) {
        throw schema_error("$.model", e.what());
    }
    const bool has_atoms = doc.contains("atoms");
    const bool has_indep = doc.contains("independent");
    if (has_atoms == has_indep) throw schema_error("$", "exactly one of 'atoms' or 'independent' is required");

    std::vector<std::string> warnings;
    auto build = [&]() -> DiscretePrior {
        try {
            if (has_atoms) {
                const auto& arr = detail::array_at(doc["atoms"], "$.atoms");
                std::vector<Atom> atoms;
                double total = 0.0;
                for (std::size_t i = 0; i < arr.size(); ++i) {
                    const std::string p = "$.atoms[" + std::to_string(i) + "]";
                    if (!arr[i].is_array() || arr[i].size() != 3) throw schema_error(p, "expected [mu1, mu2, weight]");
                    Atom a{{detail::number_at(arr[i][0], p + "[0]"), detail::number_at(arr[i][1], p + "[1]")},
                           detail::number_at(arr[i][2], p + "[2]")};
                    total += a.weight;
                    atoms.push_back(a);
                }
                detail::check_weight_sum(total, "$.atoms", warnings);
                return make_discrete_prior(std::move(atoms));
            }
            const auto& ind = doc["independent"];
            if (!ind.is_object()) throw schema_error("$.independent", "expected an object");
            for (const char* key : {"arm1", "arm2"}) {
                if (!ind.contains(key)) throw schema_error(std::string("$.independent.") + key, "missing required field");
            }
            const auto m1 = detail::parse_marginal(ind["arm1"], "$.independent.arm1", warnings);
            const auto m2 = detail::parse_marginal(ind["arm2"], "$.independent.arm2", warnings);
            return make_independent_prior(m1, m2);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::ParseError) throw;
            throw schema_error(has_atoms ? "$.atoms" : "$.independent", e.what());
        }
    };
    DiscretePrior prior = build();
    return {std::move(prior), model, doc, std::move(warnings)};
}

inline ParsedPrior parse_prior_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError, std::string("prior document: ") + e.what());
    }
    return parse_prior(doc);
}

/// Loads `path`, falling back to `path.json` when `path` does not exist.
inline ParsedPrior load_prior_file(const std::string& path) {
    std::filesystem::path p(path);
    if (!std::filesystem::exists(p) && std::filesystem::exists(path + ".json")) p = path + ".json";
    std::ifstream in(p);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open prior file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_prior_text(buf.str());
}

}  // namespace incentix
