#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

namespace nescape::rng {

// The keyed bijection underlying Stream: splitmix64's output function applied
// at position ctr of the sequence keyed by key. Exposed for tests.
inline std::uint64_t mix(std::uint64_t key, std::uint64_t ctr) {
  std::uint64_t z = key + 0x9e3779b97f4a7c15ull * (ctr + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace detail {

// 256-layer ziggurat tables for the standard normal: x[i] are the layer
// widths (decreasing, x[256] = 0), y[i] = exp(-x[i]^2/2), r = x[1] the tail
// threshold. Layer areas are all equal by construction.
struct ZigTable {
  double x[257];
  double y[257];
  double r;
  double inv_r;
};

const ZigTable& zig_table();

} // namespace detail

// Counter-based stream: every output is a pure function of (seed, stream,
// counter), so trajectory i draws an identical sequence no matter which
// worker runs it or in what order. That is what makes ensemble results
// bit-for-bit independent of the worker count.
class Stream {
public:
  Stream(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(mix(seed, 0), stream)), ctr_(0), zt_(&detail::zig_table()) {}

  std::uint64_t next_u64() { return mix(key_, ctr_++); }

  // Uniform on (0,1); endpoints are excluded.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the ziggurat; ~1.02 uniform draws per sample, with
  // exact wedge and tail handling so the distribution is unbiased. The rare
  // paths live in a cold out-of-line function: a libm call in the body would
  // force spills into the 97%-accept fast path.
  double gaussian() {
    const detail::ZigTable& t = *zt_;
    const std::uint64_t u = next_u64();
    const int i = static_cast<int>(u & 255);
    const double f = (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
    const double x = f * t.x[i];
    if (x < t.x[i + 1]) {
      // x >= 0 here, so OR-ing bit 8 into the sign position applies a random
      // sign without a 50/50 branch the predictor cannot learn.
      const std::uint64_t sign = (u & 256u) << 55;
      return std::bit_cast<double>(std::bit_cast<std::uint64_t>(x) | sign);
    }
    return gaussian_rare(u);
  }

private:
#if defined(__GNUC__)
  [[gnu::noinline, gnu::cold]]
#endif
  double gaussian_rare(std::uint64_t u) {
    const detail::ZigTable& t = *zt_;
    for (;;) {
      const int i = static_cast<int>(u & 255);
      const bool neg = (u >> 8) & 1;
      const double f = (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
      const double x = f * t.x[i];
      if (x < t.x[i + 1]) return neg ? -x : x;
      if (i == 0) {
        // Tail beyond r: Marsaglia's exponential rejection.
        double xx, yy;
        do {
          xx = -std::log(uniform()) * t.inv_r;
          yy = -std::log(uniform());
        } while (yy + yy < xx * xx);
        const double v = t.r + xx;
        return neg ? -v : v;
      }
      const double y = t.y[i] + (t.y[i + 1] - t.y[i]) * uniform();
      if (y < std::exp(-0.5 * x * x)) return neg ? -x : x;
      u = next_u64();
    }
  }

  std::uint64_t key_;
  std::uint64_t ctr_;
  const detail::ZigTable* zt_;
};

} // namespace nescape::rng
