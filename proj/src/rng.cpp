#include "relvar/rng.h"

#include <cmath>

namespace relvar {
namespace {

// Marsaglia-Tsang normal ziggurat, 128 layers.  x[j] is the right edge of
// layer j (x[0] is the virtual base-strip width v/f(r)), f[j] = exp(-x[j]^2/2).
// The recursion closes to f(x[127]) + v/x[127] = 1 within 5e-11.
struct ZigTable {
  double x[129];
  double f[129];

  ZigTable() {
    constexpr double r = 3.442619855899;
    constexpr double v = 9.91256303526217e-3;
    x[1] = r;
    x[0] = v * std::exp(0.5 * r * r);
    for (int j = 1; j < 127; ++j) {
      const double fj = std::exp(-0.5 * x[j] * x[j]);
      x[j + 1] = std::sqrt(-2.0 * std::log(fj + v / x[j]));
    }
    x[128] = 0.0;
    for (int j = 0; j <= 128; ++j) f[j] = std::exp(-0.5 * x[j] * x[j]);
  }
};

const ZigTable zig;

}  // namespace

double RngStream::next_normal() {
  for (;;) {
    const std::uint64_t bits = next_u64();
    const int j = int(bits & 127);
    // 53-bit uniform on [-1,1); low 7 bits (the layer index) are not reused
    const double u = double(bits >> 11) * 0x1.0p-52 - 1.0;
    const double x = u * zig.x[j];
    if (std::abs(x) < zig.x[j + 1]) return x;
    if (j == 0) return normal_tail(u < 0.0);
    const double y = zig.f[j] + next_unit() * (zig.f[j + 1] - zig.f[j]);
    if (y < std::exp(-0.5 * x * x)) return x;
  }
}

double RngStream::normal_tail(bool negative) {
  constexpr double r = 3.442619855899;
  double xx, yy;
  do {
    xx = -std::log(next_unit_pos()) / r;
    yy = -std::log(next_unit_pos());
  } while (yy + yy < xx * xx);
  return negative ? -(r + xx) : r + xx;
}

double RngStream::next_normal_bm() {
  const double u1 = next_unit_pos();
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace relvar
