#pragma once

#include <string_view>

#include "robustssd/estimators.hpp"
#include "robustssd/numeric.hpp"

namespace robustssd {

enum class HypothesisKind {
  one_sided_lower,  // H0: theta <= theta0
  one_sided_upper,  // H0: theta >= theta0
  two_sided,        // H0: theta == theta0
  equivalence,      // H0: theta <= theta0_lower or theta >= theta0_upper
};

std::string_view to_string(HypothesisKind kind);
HypothesisKind hypothesis_kind_from_string(std::string_view name);

struct HypothesisSpec {
  HypothesisKind kind = HypothesisKind::one_sided_lower;
  double theta0 = 0.0;
  double theta0_lower = 0.0;
  double theta0_upper = 0.0;
  double alpha = 0.05;

  static HypothesisSpec one_sided_lower(double theta0, double alpha);
  static HypothesisSpec one_sided_upper(double theta0, double alpha);
  static HypothesisSpec two_sided(double theta0, double alpha);
  static HypothesisSpec equivalence(double lower, double upper, double alpha);

  // Throws std::invalid_argument on alpha outside (0, 1) or an empty
  // equivalence interval.
  void validate() const;

  bool operator==(const HypothesisSpec&) const = default;
};

// The two one-sided p-values that make up an equivalence test.
struct EquivalenceTails {
  double lower = 1.0;  // H0: theta <= theta0_lower
  double upper = 1.0;  // H0: theta >= theta0_upper
};

// Wald p-value with a standard normal reference. Throws
// std::invalid_argument when the estimate is not usable.
double p_value(const EstimateResult& est, const HypothesisSpec& h);

// Requires h.kind == equivalence.
EquivalenceTails equivalence_tails(const EstimateResult& est, const HypothesisSpec& h);

// One-sided p-values from a z statistic.
inline double p_lower_from_z(double z) { return std_normal_sf(z); }
inline double p_upper_from_z(double z) { return std_normal_cdf(z); }

}  // namespace robustssd
