#include "robustssd/proxy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "robustssd/numeric.hpp"

namespace robustssd {

double ProxyConfig::b1(double u) const { return std_normal_quantile(u) * lambda1 / lambda0; }

void ProxyConfig::validate() const {
  if (!(lambda0 > 0.0) || !(lambda1 > 0.0)) {
    throw std::invalid_argument("proxy: lambda0 and lambda1 must be positive");
  }
}

double proxy_theta_hat(const ProxyConfig& cfg, double n, double u) {
  return cfg.theta1 + std_normal_quantile(u) * cfg.lambda1 / std::sqrt(n);
}

namespace {

double argument(const ProxyConfig& cfg, double null_value, double n, double u) {
  return cfg.a1_at(null_value) * std::sqrt(n) + cfg.b1(u);
}

}  // namespace

double proxy_p(const ProxyConfig& cfg, double n, double u, HypothesisKind kind) {
  cfg.validate();
  switch (kind) {
    case HypothesisKind::one_sided_lower:
      return std_normal_sf(argument(cfg, cfg.theta0, n, u));
    case HypothesisKind::one_sided_upper:
      return std_normal_cdf(argument(cfg, cfg.theta0, n, u));
    case HypothesisKind::two_sided:
      return 2.0 * std_normal_cdf(-std::fabs(argument(cfg, cfg.theta0, n, u)));
    case HypothesisKind::equivalence:
      return std::max(std_normal_sf(argument(cfg, cfg.theta0_lower, n, u)),
                      std_normal_cdf(argument(cfg, cfg.theta0_upper, n, u)));
  }
  throw std::logic_error("proxy_p: unhandled hypothesis kind");
}

double proxy_logit(const ProxyConfig& cfg, double n, double u, HypothesisKind kind) {
  cfg.validate();
  switch (kind) {
    case HypothesisKind::one_sided_lower:
      return logit_std_normal_cdf(-argument(cfg, cfg.theta0, n, u));
    case HypothesisKind::one_sided_upper:
      return logit_std_normal_cdf(argument(cfg, cfg.theta0, n, u));
    case HypothesisKind::two_sided:
      return logit_std_normal_cdf(-std::fabs(argument(cfg, cfg.theta0, n, u)));
    case HypothesisKind::equivalence:
      return std::max(logit_std_normal_cdf(-argument(cfg, cfg.theta0_lower, n, u)),
                      logit_std_normal_cdf(argument(cfg, cfg.theta0_upper, n, u)));
  }
  throw std::logic_error("proxy_logit: unhandled hypothesis kind");
}

SlopeCheck verify_theorem1_slope(const ProxyConfig& cfg, double u, HypothesisKind kind,
                                 std::span<const double> n_grid) {
  if (kind == HypothesisKind::equivalence) {
    throw std::invalid_argument("verify_theorem1_slope: use the one-sided tails of an equivalence test");
  }
  if (n_grid.size() < 3) throw std::invalid_argument("verify_theorem1_slope: need at least 3 grid points");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (!(n_grid[i] > n_grid[i - 1])) {
      throw std::invalid_argument("verify_theorem1_slope: n_grid must be strictly increasing");
    }
  }
  if (!(n_grid.front() > 1.0)) throw std::invalid_argument("verify_theorem1_slope: n must exceed 1");

  SlopeCheck out;
  out.limit = -0.5 * cfg.a1() * cfg.a1();
  out.rows.reserve(n_grid.size());
  for (double n : n_grid) {
    const double h = std::max(0.5, 1e-3 * n);
    SlopeRow row;
    row.n = n;
    row.logit = proxy_logit(cfg, n, u, kind);
    row.slope = (proxy_logit(cfg, n + h, u, kind) - proxy_logit(cfg, n - h, u, kind)) / (2.0 * h);
    out.rows.push_back(row);
  }
  out.last_slope = out.rows.back().slope;
  const double gap = std::fabs(out.last_slope - out.limit);
  out.error = out.limit != 0.0 ? gap / std::fabs(out.limit) : gap;
  return out;
}

}  // namespace robustssd
