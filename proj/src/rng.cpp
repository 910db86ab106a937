#include "shelab/rng.hpp"

#include <cmath>
#include <numbers>

namespace shelab {

namespace {
constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}
}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter c, Key k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

double uniform53(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t stream, std::uint32_t row,
                                  std::uint32_t slot) {
  const Philox4x32::Counter ctr{slot, row, static_cast<std::uint32_t>(stream),
                                static_cast<std::uint32_t>(stream >> 32)};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto r = Philox4x32::generate(ctr, key);
  const double u1 = uniform53((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
  const double u2 = uniform53((static_cast<std::uint64_t>(r[2]) << 32) | r[3]);
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

}  // namespace shelab
