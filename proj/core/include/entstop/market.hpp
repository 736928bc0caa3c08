#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace entstop {

// Independent-asset Black-Scholes market with continuous dividend yield.
struct MarketConfig {
    std::vector<double> s0{100.0, 100.0};
    double r = 0.05;
    double delta = 0.1;
    double sigma = 0.2;
    double T = 3.0;

    std::size_t dim() const noexcept { return s0.size(); }

    // Throws ConfigError. sigma == 0 is accepted (deterministic limit).
    void validate() const;
};

class TimeGrid {
public:
    TimeGrid(double horizon, int steps);

    int steps() const noexcept { return steps_; }
    double dt() const noexcept { return dt_; }
    double horizon() const noexcept { return horizon_; }
    double time(int k) const noexcept { return k == steps_ ? horizon_ : k * dt_; }

private:
    double horizon_;
    int steps_;
    double dt_;
};

// Simulated prices, laid out path-major: values[(p * (N+1) + k) * d + i].
class PathGrid {
public:
    PathGrid(MarketConfig config, TimeGrid grid, std::size_t n_paths, std::uint64_t seed);

    std::size_t n_paths() const noexcept { return n_paths_; }
    std::size_t dim() const noexcept { return config_.dim(); }
    int steps() const noexcept { return grid_.steps(); }
    const MarketConfig& config() const noexcept { return config_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::span<const double> state(std::size_t path, int step) const noexcept {
        return {values_.data() + index(path, step, 0), dim()};
    }
    double at(std::size_t path, int step, std::size_t asset) const noexcept {
        return values_[index(path, step, asset)];
    }
    const std::vector<double>& raw() const noexcept { return values_; }

private:
    friend PathGrid simulate_paths(const MarketConfig&, const TimeGrid&, std::size_t,
                                   std::uint64_t);

    std::size_t index(std::size_t path, int step, std::size_t asset) const noexcept {
        return (path * static_cast<std::size_t>(grid_.steps() + 1) +
                static_cast<std::size_t>(step)) * dim() + asset;
    }

    MarketConfig config_;
    TimeGrid grid_;
    std::size_t n_paths_;
    std::uint64_t seed_;
    std::vector<double> values_;
};

// Exact log-space sampling of S^i_t = S^i_0 exp((r - delta - sigma^2/2) t + sigma W^i_t).
// The normal increment for (path, step, asset) is drawn from a counter-based
// stream, so the result is independent of thread count and evaluation order.
PathGrid simulate_paths(const MarketConfig& config, const TimeGrid& grid, std::size_t n_paths,
                        std::uint64_t seed);

// CSV with header path,step,asset,price.
void write_paths_csv(const PathGrid& paths, std::ostream& out);

enum class PayoffKind { max_call };

struct PayoffSpec {
    PayoffKind kind = PayoffKind::max_call;
    double strike = 100.0;

    void validate() const;
};

// (max_i state_i - K)^+
double payoff(const PayoffSpec& spec, std::span<const double> state) noexcept;

}  // namespace entstop
