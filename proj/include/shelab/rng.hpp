#pragma once

#include <array>
#include <cstdint>

namespace shelab {

/// Philox4x32-10 (Salmon et al. 2011), counter-based: the output is a pure
/// function of (counter, key).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

/// Two independent N(0,1) draws addressed by (seed, stream, row, slot).
/// Uses the 128 output bits as two 53-bit uniforms fed to Box-Muller.
std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t stream, std::uint32_t row,
                                  std::uint32_t slot);

/// Uniform in (0, 1] from the top 53 bits.
double uniform53(std::uint64_t bits);

}  // namespace shelab
