#pragma once

#include <span>
#include <vector>

namespace robustssd {

// Probabilities are carried as plain doubles in [0, 1]; the helpers below
// clip where a finite logit is required.
inline constexpr double kLogitClip = 1e-15;

// Standard normal CDF. Built on std::erfc, which is accurate to a few ulp,
// so the absolute error is well below 1e-15 everywhere. Saturates to 0/1.
double std_normal_cdf(double z);

// Upper tail 1 - Phi(z), evaluated without cancellation.
double std_normal_sf(double z);

double std_normal_pdf(double z);

// log Phi(z), finite for all finite z. Uses a continued fraction for the
// Mills ratio once the lower tail underflows.
double log_std_normal_cdf(double z);

// logit(Phi(z)) = log Phi(z) - log Phi(-z), finite for all finite z.
double logit_std_normal_cdf(double z);

// Inverse of the standard normal CDF. Wichura's AS241 rational
// approximation followed by one Halley correction step.
// Throws std::domain_error for p outside (0, 1).
double std_normal_quantile(double p);

double clip_probability(double p, double eps = kLogitClip);

// log(p) - log(1 - p) after clipping p to [eps, 1 - eps].
double logit(double p);
double inv_logit(double l);

double median(std::vector<double> values);
double median_sorted(std::span<const double> sorted);

}  // namespace robustssd
