#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ldplab {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11): a bijection of the
/// 128-bit counter under a 64-bit key.
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Uniform random bit generator reading the Philox output stream for one
/// (seed, path, step, tag) tuple. Any stream can be generated in isolation,
/// which makes results independent of scheduling.
class PhiloxStream {
 public:
  using result_type = std::uint64_t;

  PhiloxStream(std::uint64_t seed, std::uint32_t path, std::uint32_t step, std::uint32_t tag = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

 private:
  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter block_{};
  int used_ = 4;
};

}  // namespace ldplab
