#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "robustssd/numeric.hpp"
#include "robustssd/proxy.hpp"
#include "support.hpp"

using namespace robustssd;

namespace {

ProxyConfig config(double a1, double ratio = 1.0) {
  ProxyConfig c;
  c.theta0 = 0.0;
  c.lambda0 = 1.0;
  c.lambda1 = ratio;
  c.theta1 = a1;
  return c;
}

}  // namespace

TEST_SUITE("proxy") {
  TEST_CASE("theta-hat quantile map") {
    ProxyConfig c = config(0.4, 1.5);
    for (double n : {1.0, 10.0, 1e4}) CHECK(proxy_theta_hat(c, n, 0.5) == 0.4);
    ProxyConfig unit;
    unit.theta1 = 0.0;
    unit.lambda1 = 1.0;
    CHECK(proxy_theta_hat(unit, 4.0, std_normal_cdf(1.0)) == doctest::Approx(0.5).epsilon(1e-12));
    const double d100 = proxy_theta_hat(c, 100.0, 0.8) - 0.4;
    const double d400 = proxy_theta_hat(c, 400.0, 0.8) - 0.4;
    CHECK(d400 == doctest::Approx(d100 / 2.0).epsilon(1e-12));
  }

  TEST_CASE("proxy p-values") {
    const ProxyConfig null = config(0.0);
    CHECK(proxy_p(null, 50.0, 0.5, HypothesisKind::one_sided_lower) == 0.5);
    CHECK(proxy_p(null, 50.0, 0.5, HypothesisKind::one_sided_upper) == 0.5);
    CHECK(proxy_p(null, 50.0, 0.5, HypothesisKind::two_sided) == 1.0);
    CHECK(proxy_p(config(0.5), 16.0, 0.5, HypothesisKind::one_sided_lower) ==
          doctest::Approx(0.0227501319481792072).epsilon(1e-12));
  }

  TEST_CASE("proxy p agrees with a Monte Carlo null tail") {
    const ProxyConfig c = config(0.3);
    const double n = 50.0;
    const double u = 0.8;
    const double observed = (proxy_theta_hat(c, n, u) - c.theta0) / (c.lambda0 / std::sqrt(n));
    auto s = testing::stream(1, 6);
    const int draws = 1000000;
    int exceed = 0;
    for (int i = 0; i < draws; ++i) exceed += s.normal() >= observed ? 1 : 0;
    const double mc = static_cast<double>(exceed) / draws;
    const double p = proxy_p(c, n, u, HypothesisKind::one_sided_lower);
    CHECK(std::fabs(mc - p) <= 3.0 * std::sqrt(p * (1 - p) / draws));
  }

  TEST_CASE("one-sided proxy p decreases in n") {
    const ProxyConfig c = config(0.4, 1.3);
    for (double u : {0.1, 0.5, 0.9}) {
      double prev = 1.0;
      for (double n = 2.0; n < 2000.0; n *= 1.3) {
        const double p = proxy_p(c, n, u, HypothesisKind::one_sided_lower);
        CHECK(p < prev);
        prev = p;
      }
    }
  }

  TEST_CASE("equivalence proxy is the larger tail") {
    ProxyConfig c;
    c.theta1 = 0.1;
    c.theta0_lower = -0.3;
    c.theta0_upper = 0.4;
    c.lambda0 = 1.2;
    c.lambda1 = 0.9;
    for (double u : {0.05, 0.5, 0.95}) {
      for (double n : {20.0, 200.0}) {
        ProxyConfig lo = c;
        lo.theta0 = c.theta0_lower;
        ProxyConfig up = c;
        up.theta0 = c.theta0_upper;
        const double expected = std::max(proxy_p(lo, n, u, HypothesisKind::one_sided_lower),
                                         proxy_p(up, n, u, HypothesisKind::one_sided_upper));
        CHECK(proxy_p(c, n, u, HypothesisKind::equivalence) == expected);
      }
    }
  }

  TEST_CASE("proxy logit agrees with logit of proxy p where p is representable") {
    const ProxyConfig c = config(0.5, 0.8);
    for (double n : {10.0, 100.0}) {
      CHECK(proxy_logit(c, n, 0.3, HypothesisKind::one_sided_lower) ==
            doctest::Approx(logit(proxy_p(c, n, 0.3, HypothesisKind::one_sided_lower))).epsilon(1e-9));
      CHECK(proxy_logit(c, n, 0.3, HypothesisKind::two_sided) ==
            doctest::Approx(logit(0.5 * proxy_p(c, n, 0.3, HypothesisKind::two_sided))).epsilon(1e-9));
    }
    CHECK(std::isfinite(proxy_logit(c, 1e5, 0.3, HypothesisKind::one_sided_lower)));
  }

  TEST_CASE("limiting slope") {
    const std::vector<double> grid{1e2, 1e3, 1e4, 1e5};
    const SlopeCheck check = verify_theorem1_slope(config(0.5), 0.5, HypothesisKind::one_sided_lower, grid);
    CHECK(check.limit == -0.125);
    CHECK(check.error < 0.01);
    CHECK(check.rows.size() == grid.size());
    // errors shrink along the grid from n = 1e3 on
    double prev = 1e9;
    for (const auto& row : check.rows) {
      if (row.n < 1e3) continue;
      const double err = std::fabs(row.slope - check.limit);
      CHECK(err < prev);
      prev = err;
    }
    const SlopeCheck flat = verify_theorem1_slope(config(0.0), 0.7, HypothesisKind::one_sided_lower, grid);
    CHECK(flat.limit == 0.0);
    CHECK(std::fabs(flat.last_slope) < 1e-9);
  }

  TEST_CASE("slope check input validation") {
    const std::vector<double> short_grid{10.0, 20.0};
    const std::vector<double> unordered{10.0, 30.0, 20.0};
    CHECK_THROWS_AS(verify_theorem1_slope(config(0.5), 0.5, HypothesisKind::one_sided_lower, short_grid),
                    std::invalid_argument);
    CHECK_THROWS_AS(verify_theorem1_slope(config(0.5), 0.5, HypothesisKind::one_sided_lower, unordered),
                    std::invalid_argument);
    CHECK_THROWS_AS(verify_theorem1_slope(config(0.5), 0.5, HypothesisKind::equivalence,
                                          std::vector<double>{10, 20, 30}),
                    std::invalid_argument);
    ProxyConfig bad = config(0.5);
    bad.lambda0 = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}
