#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "abow/common.hpp"

namespace abow {

namespace resample_detail {

inline double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = 3.14159265358979323846 * x;
  return std::sin(px) / px;
}

// Blackman window on [-1, 1].
inline double blackman(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double pi = 3.14159265358979323846;
  return 0.42 + 0.5 * std::cos(pi * u) + 0.08 * std::cos(2.0 * pi * u);
}

}  // namespace resample_detail

/// Windowed-sinc rate conversion (polyphase evaluation on the exact rational
/// grid out/in). Pass-through when the rates already match, so resampling a
/// 16 kHz signal to 16 kHz changes nothing.
inline std::vector<float> resample_sinc(const std::vector<float>& in, int in_rate,
                                        int out_rate) {
  require(in_rate > 0 && out_rate > 0, "sample rates must be positive");
  require(!in.empty(), "cannot resample empty signal");
  if (in_rate == out_rate) return in;

  const std::int64_t g = std::gcd(in_rate, out_rate);
  const std::int64_t up = out_rate / g;    // L
  const std::int64_t down = in_rate / g;   // M

  // Anti-alias cutoff in cycles per input sample; 0.475 leaves a transition
  // band below Nyquist. 16 kernel zero crossings at the cutoff.
  const double ratio = static_cast<double>(out_rate) / in_rate;
  const double fc = 0.475 * std::min(1.0, ratio);
  const double half_width = 16.0 / (2.0 * fc);

  const auto n_in = static_cast<std::int64_t>(in.size());
  const std::int64_t n_out = n_in * up / down;
  std::vector<float> out(static_cast<std::size_t>(std::max<std::int64_t>(n_out, 1)));

  for (std::int64_t j = 0; j < static_cast<std::int64_t>(out.size()); ++j) {
    const double t = static_cast<double>(j * down) / static_cast<double>(up);
    const auto k0 = static_cast<std::int64_t>(std::ceil(t - half_width));
    const auto k1 = static_cast<std::int64_t>(std::floor(t + half_width));
    double acc = 0.0, wsum = 0.0;
    for (std::int64_t k = k0; k <= k1; ++k) {
      const double x = t - static_cast<double>(k);
      const double w = resample_detail::sinc(2.0 * fc * x) *
                       resample_detail::blackman(x / half_width);
      wsum += w;
      if (k >= 0 && k < n_in) acc += w * static_cast<double>(in[static_cast<std::size_t>(k)]);
    }
    out[static_cast<std::size_t>(j)] = static_cast<float>(acc / wsum);
  }
  return out;
}

}  // namespace abow
