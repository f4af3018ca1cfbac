#pragma once

#include <optional>
#include <span>
#include <vector>

#include "robustssd/pvalue.hpp"

namespace robustssd {

// Large-sample stand-in for the sampling distribution of theta_hat:
// theta_hat ~ N(theta1, lambda1^2 / n) under the design process and
// N(theta0, lambda0^2 / n) at the null boundary. lambda is in units of
// theta * sqrt(n).
struct ProxyConfig {
  double theta1 = 0.0;
  double theta0 = 0.0;
  double theta0_lower = 0.0;  // equivalence only
  double theta0_upper = 0.0;  // equivalence only
  double lambda0 = 1.0;
  double lambda1 = 1.0;

  // (theta1 - null) / lambda0
  double a1() const { return a1_at(theta0); }
  double a1_at(double null_value) const { return (theta1 - null_value) / lambda0; }
  // Phi^-1(u) * lambda1 / lambda0
  double b1(double u) const;

  void validate() const;
};

// theta1 + Phi^-1(u) * lambda1 / sqrt(n)
double proxy_theta_hat(const ProxyConfig& cfg, double n, double u);

// Proxy p-value at sample size n for the quantile point u.
double proxy_p(const ProxyConfig& cfg, double n, double u, HypothesisKind kind);

// logit(proxy p), or logit(0.5 * proxy p) for two-sided tests; evaluated in
// log space so it stays finite when the p-value itself underflows.
double proxy_logit(const ProxyConfig& cfg, double n, double u, HypothesisKind kind);

struct SlopeRow {
  double n = 0.0;
  double logit = 0.0;
  double slope = 0.0;  // central finite difference of the logit in n
};

struct SlopeCheck {
  std::vector<SlopeRow> rows;
  double limit = 0.0;           // -a1^2 / 2
  double last_slope = 0.0;
  double error = 0.0;           // relative to |limit|, absolute when limit == 0
};

// Finite-difference slopes of the proxy logit over `n_grid` (increasing,
// at least 3 points), compared against the limiting slope -a1^2/2.
// Defined for the one-sided and two-sided kinds.
SlopeCheck verify_theorem1_slope(const ProxyConfig& cfg, double u, HypothesisKind kind,
                                 std::span<const double> n_grid);

}  // namespace robustssd
