#include "robustssd/logit_lines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robustssd/numeric.hpp"

namespace robustssd {

LogitLine LogitLine::through(double n0, double l0, double n1, double l1) {
  if (n0 == n1) throw std::invalid_argument("LogitLine::through: the two sample sizes must differ");
  const double slope = (l1 - l0) / (n1 - n0);
  return {l0 - slope * n0, slope};
}

LogitLine LogitLine::anchored(double n0, double l0, double slope) { return {l0 - slope * n0, slope}; }

std::vector<double> LogitLineFamily::p_values_at(double n) const {
  std::vector<double> p(lines.size());
  switch (kind) {
    case HypothesisKind::one_sided_lower:
    case HypothesisKind::one_sided_upper:
      for (std::size_t r = 0; r < lines.size(); ++r) p[r] = inv_logit(lines[r].at(n));
      break;
    case HypothesisKind::two_sided:
      for (std::size_t r = 0; r < lines.size(); ++r) p[r] = std::min(1.0, 2.0 * inv_logit(lines[r].at(n)));
      break;
    case HypothesisKind::equivalence:
      for (std::size_t r = 0; r < lines.size(); ++r) {
        p[r] = std::max(inv_logit(lines[r].at(n)), inv_logit(upper[r].at(n)));
      }
      break;
  }
  return p;
}

RankLogits rank_logits(const PValueSample& sample) {
  RankLogits out;
  switch (sample.kind) {
    case HypothesisKind::one_sided_lower:
    case HypothesisKind::one_sided_upper:
      out.primary = sample.logits;
      break;
    case HypothesisKind::two_sided:
      out.primary.resize(sample.size());
      std::transform(sample.p_sorted.begin(), sample.p_sorted.end(), out.primary.begin(),
                     [](double p) { return logit(0.5 * p); });
      break;
    case HypothesisKind::equivalence: {
      // The tails move in opposite directions with theta_hat, so the
      // smallest lower-tail p-value belongs with the largest upper-tail one.
      out.primary.resize(sample.size());
      out.upper.resize(sample.size());
      std::transform(sample.lower_tail_sorted.begin(), sample.lower_tail_sorted.end(), out.primary.begin(),
                     [](double p) { return logit(p); });
      std::transform(sample.upper_tail_sorted.rbegin(), sample.upper_tail_sorted.rend(), out.upper.begin(),
                     [](double p) { return logit(p); });
      break;
    }
  }
  return out;
}

LogitLineFamily fit_logit_lines(const PValueSample& sample0, const PValueSample& sample1) {
  if (sample0.n == sample1.n) throw std::invalid_argument("fit_logit_lines: n0 and n1 must differ");
  if (sample0.size() != sample1.size()) {
    throw std::invalid_argument("fit_logit_lines: samples must have the same number of repetitions");
  }
  if (sample0.kind != sample1.kind) throw std::invalid_argument("fit_logit_lines: hypothesis kinds differ");

  const RankLogits l0 = rank_logits(sample0);
  const RankLogits l1 = rank_logits(sample1);
  const double n0 = sample0.n;
  const double n1 = sample1.n;

  LogitLineFamily family;
  family.kind = sample0.kind;
  family.n0 = n0;
  family.n1 = n1;
  family.lines.resize(l0.primary.size());
  for (std::size_t r = 0; r < l0.primary.size(); ++r) {
    family.lines[r] = LogitLine::through(n0, l0.primary[r], n1, l1.primary[r]);
  }
  family.upper.resize(l0.upper.size());
  for (std::size_t r = 0; r < l0.upper.size(); ++r) {
    family.upper[r] = LogitLine::through(n0, l0.upper[r], n1, l1.upper[r]);
  }
  return family;
}

LogitLineFamily lines_with_slope(const PValueSample& sample0, double slope, double upper_slope) {
  const RankLogits l0 = rank_logits(sample0);
  LogitLineFamily family;
  family.kind = sample0.kind;
  family.n0 = family.n1 = sample0.n;
  family.lines.resize(l0.primary.size());
  for (std::size_t r = 0; r < l0.primary.size(); ++r) {
    family.lines[r] = LogitLine::anchored(sample0.n, l0.primary[r], slope);
  }
  family.upper.resize(l0.upper.size());
  for (std::size_t r = 0; r < l0.upper.size(); ++r) {
    family.upper[r] = LogitLine::anchored(sample0.n, l0.upper[r], upper_slope);
  }
  return family;
}

double predict_power(const LogitLineFamily& family, double n, double alpha) {
  return estimate_power(family.p_values_at(n), alpha);
}

int find_min_n(const PowerCurve& power, double target_power, SearchRange range) {
  if (range.lo < 1 || range.hi < range.lo) {
    throw std::invalid_argument("find_min_n: invalid search range [" + std::to_string(range.lo) + ", " +
                                std::to_string(range.hi) + "]");
  }
  const double p_lo = power(range.lo);
  if (meets_target(p_lo, target_power)) return range.lo;
  const double p_hi = power(range.hi);
  if (!meets_target(p_hi, target_power)) {
    throw TargetUnattainable("target power " + std::to_string(target_power) + " unattainable in [" +
                                 std::to_string(range.lo) + ", " + std::to_string(range.hi) +
                                 "]: power " + std::to_string(p_lo) + " at lo, " + std::to_string(p_hi) +
                                 " at hi",
                             p_lo, p_hi);
  }

  // Invariant: power(lo) misses, power(hi) meets.
  int lo = range.lo;
  int hi = range.hi;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (meets_target(power(mid), target_power)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  for (int n = std::max(range.lo, hi - 3); n < hi; ++n) {
    if (meets_target(power(n), target_power)) return n;
  }
  return hi;
}

int find_min_n(const LogitLineFamily& family, double alpha, double beta, SearchRange range) {
  return find_min_n([&](int n) { return predict_power(family, n, alpha); }, 1.0 - beta, range);
}

void validate_weights(std::span<const double> weights, std::size_t expected) {
  if (weights.size() != expected) {
    throw std::invalid_argument("weights: expected " + std::to_string(expected) + " entries, got " +
                                std::to_string(weights.size()));
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be non-negative");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::fabs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("weights must sum to 1, got " + std::to_string(total));
  }
}

double weighted_power(std::span<const LogitLineFamily> families, std::span<const double> weights, double n,
                      double alpha) {
  validate_weights(weights, families.size());
  double total = 0.0;
  for (std::size_t k = 0; k < families.size(); ++k) {
    if (weights[k] > 0.0) total += weights[k] * predict_power(families[k], n, alpha);
  }
  return total;
}

}  // namespace robustssd
