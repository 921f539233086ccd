#pragma once

// Univariate slice sampler with stepping out and shrinkage (Neal 2003).

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hpyc/random.hpp"

namespace hpyc {

struct SliceResult {
  double value;        // accepted point
  double log_density;  // log f(value)
  double log_level;    // log height of the slice that produced it
  unsigned evaluations;
};

/// Draws one point from the density proportional to exp(log_density) on the
/// open interval (lower, upper), starting from x0 (which must lie inside).
template <class LogDensity>
SliceResult slice_sample(const LogDensity& log_density, double x0, double width, double lower, double upper, Rng& rng,
                         unsigned max_step_outs = 100) {
  if (!(x0 > lower && x0 < upper)) throw std::invalid_argument("slice_sample: start point outside support");
  if (!(width > 0.0)) throw std::invalid_argument("slice_sample: width must be positive");
  unsigned evaluations = 0;
  auto f = [&](double x) {
    if (!(x > lower && x < upper)) return -std::numeric_limits<double>::infinity();
    ++evaluations;
    return static_cast<double>(log_density(x));
  };

  const double f0 = f(x0);
  if (!std::isfinite(f0)) throw std::domain_error("slice_sample: log density not finite at start point");
  const double level = f0 - rng.exponential();

  double left = x0 - width * rng.uniform01();
  double right = left + width;
  auto steps_left = static_cast<unsigned>(std::floor(max_step_outs * rng.uniform01()));
  unsigned steps_right = max_step_outs - 1 - steps_left;
  while (steps_left > 0 && left > lower && f(left) > level) {
    left -= width;
    --steps_left;
  }
  while (steps_right > 0 && right < upper && f(right) > level) {
    right += width;
    --steps_right;
  }
  if (left < lower) left = lower;
  if (right > upper) right = upper;

  for (;;) {
    const double x1 = left + rng.uniform01() * (right - left);
    const double f1 = f(x1);
    if (f1 > level) return SliceResult{x1, f1, level, evaluations};
    if (x1 < x0)
      left = x1;
    else
      right = x1;
    if (!(right - left > 0.0)) return SliceResult{x0, f0, level, evaluations};
  }
}

}  // namespace hpyc
