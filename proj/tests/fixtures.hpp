#pragma once

#include "incentix/bayes_core.hpp"

namespace fixtures {

inline incentix::DiscretePrior prior_a() {
    return incentix::make_independent_prior({{0.2, 0.5}, {0.8, 0.5}}, {{0.0, 0.6}, {1.0, 0.4}});
}

inline incentix::DiscretePrior prior_b() {
    return incentix::make_independent_prior({{0.0, 0.5}, {1.0, 0.5}}, {{0.4, 1.0}});
}

inline incentix::DiscretePrior prior_c() {
    return incentix::make_discrete_prior({{{0.3, 0.2}, 0.5}, {{0.9, 0.8}, 0.5}});
}

inline incentix::DiscretePrior prior_d() {
    return incentix::make_independent_prior({{0.3, 0.5}, {0.9, 0.5}}, {{0.25, 0.5}, {0.75, 0.5}});
}

}  // namespace fixtures
