#include "nescape/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace nescape::rng::detail {

namespace {

ZigTable build_table() {
  ZigTable t;
  // r chosen so that 256 equal-area layers exactly tile the half-density;
  // v is the common layer area: base strip plus the tail mass beyond r.
  const double r = 3.6541528853610087963519472518;
  const double f_r = std::exp(-0.5 * r * r);
  const double v = r * f_r + std::sqrt(std::acos(-1.0) / 2.0) * std::erfc(r / std::sqrt(2.0));
  t.r = r;
  t.inv_r = 1.0 / r;
  t.x[0] = v / f_r;
  t.x[1] = r;
  for (int i = 1; i < 255; ++i) {
    double arg = v / t.x[i] + std::exp(-0.5 * t.x[i] * t.x[i]);
    t.x[i + 1] = std::sqrt(-2.0 * std::log(arg));
  }
  // Closure: f(x[255]) + v/x[255] = 1, i.e. the top layer reaches the mode.
  // x[256] = 0 keeps correctness regardless (layer 255 then always takes the
  // wedge test), so the check is a sanity guard, not load-bearing.
  t.x[256] = 0.0;
  double arg_top = v / t.x[255] + std::exp(-0.5 * t.x[255] * t.x[255]);
  if (!(arg_top > 0.99 && arg_top < 1.01))
    throw std::logic_error("ziggurat table failed to close");
  for (int i = 0; i <= 256; ++i) t.y[i] = std::exp(-0.5 * t.x[i] * t.x[i]);
  for (int i = 0; i < 256; ++i)
    if (!(t.x[i] > t.x[i + 1])) throw std::logic_error("ziggurat table not monotone");
  return t;
}

} // namespace

const ZigTable& zig_table() {
  static const ZigTable t = build_table();
  return t;
}

} // namespace nescape::rng::detail
