#include "robustssd/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace robustssd {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// Mills ratio R(x) = (1 - Phi(x)) / phi(x) for x > 0 by the continued
// fraction 1 / (x + 1 / (x + 2 / (x + 3 / (x + ...)))), modified Lentz.
double mills_ratio(double x) {
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = x + k * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = x + k / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

}  // namespace

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double std_normal_sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }

double log_std_normal_cdf(double z) {
  if (z > 0.0) return std::log1p(-std_normal_sf(z));
  if (z > -5.0) return std::log(std_normal_cdf(z));
  const double x = -z;
  return -0.5 * x * x - kLogSqrt2Pi + std::log(mills_ratio(x));
}

double logit_std_normal_cdf(double z) {
  return log_std_normal_cdf(z) - log_std_normal_cdf(-z);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("std_normal_quantile: probability must lie in (0, 1), got " +
                            std::to_string(p));
  }

  // AS241 (PPND16).
  const double q = p - 0.5;
  double x;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    x = q *
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
  } else {
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    if (r <= 5.0) {
      r -= 1.6;
      x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
    } else {
      r -= 5.0;
      x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
    }
    if (q < 0.0) x = -x;
  }

  // One Halley step against the erfc-based CDF. The residual is taken on
  // the tail nearer to p so it keeps relative precision.
  const double density = std_normal_pdf(x);
  if (density > 0.0) {
    const double residual = p < 0.5 ? std_normal_cdf(x) - p : (1.0 - p) - std_normal_sf(x);
    const double u = residual / density;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double clip_probability(double p, double eps) { return std::clamp(p, eps, 1.0 - eps); }

double logit(double p) {
  // 1 - p is exact for p >= 0.5, which keeps logit(1 - p) == -logit(p)
  if (p > 0.5) return -logit(1.0 - p);
  const double c = std::max(p, kLogitClip);
  return std::log(c) - std::log1p(-c);
}

double inv_logit(double l) {
  if (l >= 0.0) return 1.0 / (1.0 + std::exp(-l));
  const double e = std::exp(l);
  return e / (1.0 + e);
}

double median_sorted(std::span<const double> sorted) {
  if (sorted.empty()) throw std::invalid_argument("median of an empty collection");
  const std::size_t m = sorted.size() / 2;
  return sorted.size() % 2 == 1 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return median_sorted(values);
}

}  // namespace robustssd
