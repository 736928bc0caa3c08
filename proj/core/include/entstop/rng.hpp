#pragma once

#include <array>
#include <cstdint>

namespace entstop {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Each draw is a
// pure function of (key, counter), so a stream can be addressed by
// (seed, path, step, ...) and generated in any order or thread layout.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key);
};

// Random-variate streams keyed on (seed, path, step, slot).
//
// Slot layout: each Philox call yields two 53-bit uniforms, so slots 2j and
// 2j+1 share a counter. Distinct `Purpose` values never collide.
class StreamRng {
public:
    enum class Purpose : std::uint32_t { brownian = 0, default_clock = 1, generic = 2 };

    explicit StreamRng(std::uint64_t seed, Purpose purpose = Purpose::brownian)
        : seed_(seed), purpose_(purpose) {}

    // Uniform on the open interval (0, 1).
    double uniform(std::uint64_t path, std::uint32_t step, std::uint32_t slot) const;

    // Standard normal by inverse-CDF transform of uniform().
    double normal(std::uint64_t path, std::uint32_t step, std::uint32_t slot) const;

    // Standard exponential, -ln(U).
    double exponential(std::uint64_t path, std::uint32_t step, std::uint32_t slot) const;

private:
    std::uint64_t seed_;
    Purpose purpose_;
};

// Inverse of the standard normal CDF on (0, 1).
double normal_quantile(double u);

}  // namespace entstop
