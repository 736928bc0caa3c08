#include "entstop/market.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "entstop/errors.hpp"
#include "entstop/rng.hpp"

namespace entstop {

void MarketConfig::validate() const {
    if (s0.empty()) {
        throw ConfigError("MarketConfig: at least one asset is required");
    }
    for (double s : s0) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw ConfigError("MarketConfig: initial prices must be positive and finite");
        }
    }
    if (!std::isfinite(r) || !std::isfinite(delta)) {
        throw ConfigError("MarketConfig: r and delta must be finite");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ConfigError("MarketConfig: sigma must be non-negative");
    }
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw ConfigError("MarketConfig: horizon T must be positive");
    }
}

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
    if (steps < 1) {
        throw ConfigError("TimeGrid: need at least one step");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw ConfigError("TimeGrid: horizon must be positive");
    }
    dt_ = horizon / steps;
}

PathGrid::PathGrid(MarketConfig config, TimeGrid grid, std::size_t n_paths, std::uint64_t seed)
    : config_(std::move(config)),
      grid_(grid),
      n_paths_(n_paths),
      seed_(seed),
      values_(n_paths * static_cast<std::size_t>(grid.steps() + 1) * config_.dim()) {}

PathGrid simulate_paths(const MarketConfig& config, const TimeGrid& grid, std::size_t n_paths,
                        std::uint64_t seed) {
    config.validate();
    if (n_paths < 1) {
        throw ConfigError("simulate_paths: n_paths must be >= 1");
    }
    if (std::abs(grid.horizon() - config.T) > 1e-12 * std::max(1.0, config.T)) {
        throw ConfigError("simulate_paths: time grid horizon does not match market T");
    }

    PathGrid out(config, grid, n_paths, seed);
    const StreamRng rng(seed, StreamRng::Purpose::brownian);
    const std::size_t d = config.dim();
    const int steps = grid.steps();
    const double drift = config.r - config.delta - 0.5 * config.sigma * config.sigma;
    const double vol_sqrt_dt = config.sigma * std::sqrt(grid.dt());
    const auto total = static_cast<std::int64_t>(n_paths);

#pragma omp parallel for schedule(static)
    for (std::int64_t ip = 0; ip < total; ++ip) {
        const auto p = static_cast<std::size_t>(ip);
        for (std::size_t i = 0; i < d; ++i) {
            double brownian = 0.0;
            out.values_[out.index(p, 0, i)] = config.s0[i];
            for (int k = 1; k <= steps; ++k) {
                if (vol_sqrt_dt != 0.0) {
                    brownian += rng.normal(p, static_cast<std::uint32_t>(k - 1),
                                           static_cast<std::uint32_t>(i));
                }
                const double log_growth = drift * grid.time(k) + vol_sqrt_dt * brownian;
                out.values_[out.index(p, k, i)] = config.s0[i] * std::exp(log_growth);
            }
        }
    }
    return out;
}

void write_paths_csv(const PathGrid& paths, std::ostream& out) {
    const auto old_precision = out.precision(17);
    out << "path,step,asset,price\n";
    for (std::size_t p = 0; p < paths.n_paths(); ++p) {
        for (int k = 0; k <= paths.steps(); ++k) {
            for (std::size_t i = 0; i < paths.dim(); ++i) {
                out << p << ',' << k << ',' << i << ',' << paths.at(p, k, i) << '\n';
            }
        }
    }
    out.precision(old_precision);
}

void PayoffSpec::validate() const {
    if (!(strike > 0.0) || !std::isfinite(strike)) {
        throw ConfigError("PayoffSpec: strike must be positive");
    }
}

double payoff(const PayoffSpec& spec, std::span<const double> state) noexcept {
    const double best = *std::max_element(state.begin(), state.end());
    return std::max(best - spec.strike, 0.0);
}

}  // namespace entstop
