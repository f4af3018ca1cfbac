#include "robustssd/pvalue.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace robustssd {

std::string_view to_string(HypothesisKind kind) {
  switch (kind) {
    case HypothesisKind::one_sided_lower: return "one_sided_lower";
    case HypothesisKind::one_sided_upper: return "one_sided_upper";
    case HypothesisKind::two_sided: return "two_sided";
    case HypothesisKind::equivalence: return "equivalence";
  }
  return "unknown";
}

HypothesisKind hypothesis_kind_from_string(std::string_view name) {
  for (auto k : {HypothesisKind::one_sided_lower, HypothesisKind::one_sided_upper,
                 HypothesisKind::two_sided, HypothesisKind::equivalence}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown hypothesis kind '" + std::string(name) + "'");
}

HypothesisSpec HypothesisSpec::one_sided_lower(double theta0, double alpha) {
  HypothesisSpec h;
  h.kind = HypothesisKind::one_sided_lower;
  h.theta0 = theta0;
  h.alpha = alpha;
  h.validate();
  return h;
}

HypothesisSpec HypothesisSpec::one_sided_upper(double theta0, double alpha) {
  HypothesisSpec h = one_sided_lower(theta0, alpha);
  h.kind = HypothesisKind::one_sided_upper;
  return h;
}

HypothesisSpec HypothesisSpec::two_sided(double theta0, double alpha) {
  HypothesisSpec h = one_sided_lower(theta0, alpha);
  h.kind = HypothesisKind::two_sided;
  return h;
}

HypothesisSpec HypothesisSpec::equivalence(double lower, double upper, double alpha) {
  HypothesisSpec h;
  h.kind = HypothesisKind::equivalence;
  h.theta0_lower = lower;
  h.theta0_upper = upper;
  h.alpha = alpha;
  h.validate();
  return h;
}

void HypothesisSpec::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  if (kind == HypothesisKind::equivalence) {
    if (!(theta0_lower < theta0_upper)) {
      throw std::invalid_argument("equivalence bounds require theta0_lower < theta0_upper");
    }
  } else if (!std::isfinite(theta0)) {
    throw std::invalid_argument("theta0 must be finite");
  }
}

namespace {

void require_usable(const EstimateResult& est) {
  if (!est.usable()) {
    throw std::invalid_argument("p_value: estimate is not usable (status " +
                                std::string(to_string(est.status)) + ")");
  }
}

}  // namespace

EquivalenceTails equivalence_tails(const EstimateResult& est, const HypothesisSpec& h) {
  if (h.kind != HypothesisKind::equivalence) {
    throw std::invalid_argument("equivalence_tails: hypothesis is not an equivalence test");
  }
  require_usable(est);
  return {p_lower_from_z((est.theta_hat - h.theta0_lower) / est.se),
          p_upper_from_z((est.theta_hat - h.theta0_upper) / est.se)};
}

double p_value(const EstimateResult& est, const HypothesisSpec& h) {
  require_usable(est);
  switch (h.kind) {
    case HypothesisKind::one_sided_lower:
      return p_lower_from_z((est.theta_hat - h.theta0) / est.se);
    case HypothesisKind::one_sided_upper:
      return p_upper_from_z((est.theta_hat - h.theta0) / est.se);
    case HypothesisKind::two_sided:
      return 2.0 * std_normal_sf(std::fabs(est.theta_hat - h.theta0) / est.se);
    case HypothesisKind::equivalence: {
      const auto tails = equivalence_tails(est, h);
      return std::max(tails.lower, tails.upper);
    }
  }
  throw std::logic_error("p_value: unhandled hypothesis kind");
}

}  // namespace robustssd
