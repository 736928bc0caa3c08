#pragma once

#include "entstop/market.hpp"

namespace entstop {

struct BinomialConfig {
    int steps = 400;
    MarketConfig market;
    PayoffSpec payoff;
    bool american = true;
    // 0: exercise allowed at every node. Otherwise exercise only at the
    // `exercise_dates` equally spaced dates (steps must be a multiple).
    int exercise_dates = 0;

    void validate() const;
};

// Recombining-tree price for d = 1 (CRR, up factor e^{sigma sqrt(dt)}) and
// d = 2 (product of two independent CRR trees, four branches per node).
// Risk-neutral drift r - delta per asset, discounting at r per step.
// Throws ConfigError for d > 2.
double binomial_price(const BinomialConfig& cfg);

}  // namespace entstop
