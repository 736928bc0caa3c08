#include "entstop/rng.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>

#include "entstop/errors.hpp"

namespace entstop {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

double StreamRng::uniform(std::uint64_t path, std::uint32_t step, std::uint32_t slot) const {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(path),
                                  static_cast<std::uint32_t>(path >> 32), step,
                                  (static_cast<std::uint32_t>(purpose_) << 24) | (slot >> 1)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed_),
                              static_cast<std::uint32_t>(seed_ >> 32)};
    const auto out = Philox4x32::generate(ctr, key);
    return (slot & 1u) == 0 ? to_open_unit(out[0], out[1]) : to_open_unit(out[2], out[3]);
}

double StreamRng::normal(std::uint64_t path, std::uint32_t step, std::uint32_t slot) const {
    return normal_quantile(uniform(path, step, slot));
}

double StreamRng::exponential(std::uint64_t path, std::uint32_t step, std::uint32_t slot) const {
    return -std::log(uniform(path, step, slot));
}

double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("normal_quantile: probability outside (0, 1)");
    }
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

}  // namespace entstop
