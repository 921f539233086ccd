#pragma once

#include <cmath>
#include <limits>

#include "hpyc/crp.hpp"
#include "hpyc/random.hpp"
#include "hpyc/slice_sampler.hpp"

namespace hpyc {

/// Priors over PYP hyperparameters: discount ~ Beta(alpha, beta) and
/// strength ~ Gamma(shape, scale). The default Gamma(10, 0.1) is read as
/// shape/scale, i.e. mean 1.
struct HyperPriors {
  double discount_alpha = 1.0;
  double discount_beta = 1.0;
  double strength_shape = 10.0;
  double strength_scale = 0.1;
  double discount_width = 0.1;
  double strength_width = 1.0;
  unsigned max_step_outs = 100;

  double log_discount_prior(double a) const {
    double lp = 0.0;
    if (discount_alpha != 1.0) lp += (discount_alpha - 1.0) * std::log(a);
    if (discount_beta != 1.0) lp += (discount_beta - 1.0) * std::log1p(-a);
    return lp;
  }
  double log_strength_prior(double b) const { return (strength_shape - 1.0) * std::log(b) - b / strength_scale; }
};

/// One slice-sampling update of the discount, then of the strength, given the
/// seating likelihood of every restaurant that shares these parameters.
inline void resample_pyp_params(const SeatingStats& stats, PypParams& params, Rng& rng, const HyperPriors& priors) {
  const double strength = params.strength;
  auto discount_density = [&](double a) {
    return priors.log_discount_prior(a) + stats.log_likelihood(PypParams{a, strength});
  };
  double a0 = params.discount > 0.0 ? params.discount : 1e-6;
  params.discount =
      slice_sample(discount_density, a0, priors.discount_width, 0.0, 1.0, rng, priors.max_step_outs).value;

  const double discount = params.discount;
  auto strength_density = [&](double b) {
    return priors.log_strength_prior(b) + stats.log_likelihood(PypParams{discount, b});
  };
  double b0 = params.strength > 0.0 ? params.strength : 1e-6;
  params.strength =
      slice_sample(strength_density, b0, priors.strength_width, 0.0, std::numeric_limits<double>::infinity(), rng,
                   priors.max_step_outs)
          .value;
}

}  // namespace hpyc
