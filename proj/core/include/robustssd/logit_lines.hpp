#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustssd/pvalue.hpp"
#include "robustssd/sampling.hpp"

namespace robustssd {

struct LogitLine {
  double intercept = 0.0;
  double slope = 0.0;

  double at(double n) const { return intercept + slope * n; }

  // Line through (n0, l0) and (n1, l1); n0 != n1.
  static LogitLine through(double n0, double l0, double n1, double l1);
  // Line through (n0, l0) with a fixed slope.
  static LogitLine anchored(double n0, double l0, double slope);
};

// One line per order-statistic rank, modelling the logit of the rank-r
// p-value as a linear function of n.
//
//  - one-sided: `lines` model logit(p).
//  - two-sided: `lines` model logit(p / 2); predictions are doubled and
//    capped at 1.
//  - equivalence: `lines` model the lower-tail p-values (ascending ranks)
//    and `upper` the upper-tail p-values in descending rank order, so that
//    lines[r] and upper[r] describe the same repetition; the prediction is
//    the larger of the two.
struct LogitLineFamily {
  HypothesisKind kind = HypothesisKind::one_sided_lower;
  double n0 = 0.0;
  double n1 = 0.0;
  std::vector<LogitLine> lines;
  std::vector<LogitLine> upper;

  std::size_t size() const { return lines.size(); }

  // Back-transformed p-values for every rank at sample size n.
  std::vector<double> p_values_at(double n) const;
};

// The per-rank logits a line family is fitted to: logit(p) for one-sided,
// logit(p / 2) for two-sided, and for equivalence the lower tail ascending
// followed by the upper tail in descending order.
struct RankLogits {
  std::vector<double> primary;
  std::vector<double> upper;
};
RankLogits rank_logits(const PValueSample& sample);

// Joins the r-th order statistics of the two samples' logits with a line.
LogitLineFamily fit_logit_lines(const PValueSample& sample0, const PValueSample& sample1);

// Lines through the n0 sample's rank logits with prescribed slopes
// (`upper_slope` is used for the upper equivalence tail).
LogitLineFamily lines_with_slope(const PValueSample& sample0, double slope, double upper_slope);

double predict_power(const LogitLineFamily& family, double n, double alpha);

struct SearchRange {
  int lo = 1;
  int hi = 1;

  bool operator==(const SearchRange&) const = default;
};

class TargetUnattainable : public std::runtime_error {
 public:
  TargetUnattainable(const std::string& what, double power_lo, double power_hi)
      : std::runtime_error(what), power_lo_(power_lo), power_hi_(power_hi) {}
  double power_at_lo() const { return power_lo_; }
  double power_at_hi() const { return power_hi_; }

 private:
  double power_lo_;
  double power_hi_;
};

using PowerCurve = std::function<double(int)>;

// Smallest n in range with power(n) >= target_power: integer bisection
// assuming monotonicity, then a scan of the three integers below the
// bisection result to certify minimality. Throws TargetUnattainable when
// power(range.hi) misses the target.
int find_min_n(const PowerCurve& power, double target_power, SearchRange range);
int find_min_n(const LogitLineFamily& family, double alpha, double beta, SearchRange range);

// sum_k weights[k] * predict_power(families[k], n, alpha). Weights must be
// non-negative and sum to one.
double weighted_power(std::span<const LogitLineFamily> families, std::span<const double> weights, double n,
                      double alpha);
void validate_weights(std::span<const double> weights, std::size_t expected);

}  // namespace robustssd
