#include "entstop/binomial.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "entstop/errors.hpp"

namespace entstop {

namespace {

struct Lattice {
    double up = 1.0;
    double down = 1.0;
    double prob_up = 1.0;
    double disc = 1.0;
};

Lattice make_lattice(const MarketConfig& m, int steps) {
    const double dt = m.T / steps;
    const double growth = std::exp((m.r - m.delta) * dt);
    Lattice lat;
    lat.disc = std::exp(-m.r * dt);
    if (m.sigma == 0.0) {
        // Deterministic limit: every branch follows the forward.
        lat.up = lat.down = growth;
        lat.prob_up = 1.0;
        return lat;
    }
    lat.up = std::exp(m.sigma * std::sqrt(dt));
    lat.down = 1.0 / lat.up;
    lat.prob_up = (growth - lat.down) / (lat.up - lat.down);
    if (!(lat.prob_up >= 0.0 && lat.prob_up <= 1.0)) {
        throw ConfigError("binomial_price: risk-neutral probability outside [0, 1]; increase steps");
    }
    return lat;
}

// Prices s0 * up^i * down^(t-i) for i = 0..t.
void level_prices(double s0, const Lattice& lat, int t, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(t) + 1);
    double s = s0 * std::pow(lat.down, t);
    const double ratio = lat.up / lat.down;
    for (int i = 0; i <= t; ++i) {
        out[static_cast<std::size_t>(i)] = s;
        s *= ratio;
    }
}

bool exercisable(const BinomialConfig& cfg, int t) {
    if (!cfg.american) {
        return false;
    }
    if (cfg.exercise_dates == 0) {
        return true;
    }
    return t % (cfg.steps / cfg.exercise_dates) == 0;
}

double price_1d(const BinomialConfig& cfg, const Lattice& lat) {
    const int steps = cfg.steps;
    std::vector<double> s;
    std::vector<double> v;
    level_prices(cfg.market.s0[0], lat, steps, s);
    v.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double state[1] = {s[i]};
        v[i] = payoff(cfg.payoff, state);
    }
    const double pu = lat.prob_up * lat.disc;
    const double pd = (1.0 - lat.prob_up) * lat.disc;
    for (int t = steps - 1; t >= 0; --t) {
        const bool ex = exercisable(cfg, t);
        if (ex) {
            level_prices(cfg.market.s0[0], lat, t, s);
        }
        for (int i = 0; i <= t; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            double cont = pu * v[ui + 1] + pd * v[ui];
            if (ex) {
                const double state[1] = {s[ui]};
                cont = std::max(cont, payoff(cfg.payoff, state));
            }
            v[ui] = cont;
        }
    }
    return v[0];
}

double price_2d(const BinomialConfig& cfg, const Lattice& lat) {
    const int steps = cfg.steps;
    const auto width = static_cast<std::size_t>(steps) + 1;
    std::vector<double> s1;
    std::vector<double> s2;
    std::vector<double> v(width * width);

    level_prices(cfg.market.s0[0], lat, steps, s1);
    level_prices(cfg.market.s0[1], lat, steps, s2);
    for (std::size_t i = 0; i < width; ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            const double state[2] = {s1[i], s2[j]};
            v[i * width + j] = payoff(cfg.payoff, state);
        }
    }

    const double q = lat.prob_up;
    const double w_uu = q * q * lat.disc;
    const double w_ud = q * (1.0 - q) * lat.disc;
    const double w_dd = (1.0 - q) * (1.0 - q) * lat.disc;

    for (int t = steps - 1; t >= 0; --t) {
        const bool ex = exercisable(cfg, t);
        if (ex) {
            level_prices(cfg.market.s0[0], lat, t, s1);
            level_prices(cfg.market.s0[1], lat, t, s2);
        }
        const auto level = static_cast<std::size_t>(t);
        for (std::size_t i = 0; i <= level; ++i) {
            for (std::size_t j = 0; j <= level; ++j) {
                const double* lo = &v[i * width + j];
                const double* hi = &v[(i + 1) * width + j];
                double cont = w_uu * hi[1] + w_ud * (hi[0] + lo[1]) + w_dd * lo[0];
                if (ex) {
                    const double state[2] = {s1[i], s2[j]};
                    cont = std::max(cont, payoff(cfg.payoff, state));
                }
                v[i * width + j] = cont;
            }
        }
    }
    return v[0];
}

}  // namespace

void BinomialConfig::validate() const {
    if (steps < 1) {
        throw ConfigError("BinomialConfig: steps must be >= 1");
    }
    market.validate();
    payoff.validate();
    if (market.dim() > 2) {
        throw ConfigError("binomial_price: unsupported dimension " +
                          std::to_string(market.dim()) + " (trees are built for d <= 2)");
    }
    if (exercise_dates < 0 || (exercise_dates > 0 && steps % exercise_dates != 0)) {
        throw ConfigError("BinomialConfig: steps must be a multiple of exercise_dates");
    }
}

double binomial_price(const BinomialConfig& cfg) {
    cfg.validate();
    const Lattice lat = make_lattice(cfg.market, cfg.steps);
    return cfg.market.dim() == 1 ? price_1d(cfg, lat) : price_2d(cfg, lat);
}

}  // namespace entstop
