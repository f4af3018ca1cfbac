#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "robustssd/dgp.hpp"
#include "robustssd/numeric.hpp"
#include "robustssd/pvalue.hpp"
#include "robustssd/sampling.hpp"
#include "support.hpp"

using namespace robustssd;

namespace {

EstimateResult fit(double theta_hat, double se) {
  EstimateResult e;
  e.theta_hat = theta_hat;
  e.se = se;
  e.converged = true;
  e.status = FitStatus::ok;
  return e;
}

}  // namespace

TEST_SUITE("pvalue") {
  TEST_CASE("z = 0") {
    CHECK(p_value(fit(1.0, 0.3), HypothesisSpec::two_sided(1.0, 0.05)) == 1.0);
    CHECK(p_value(fit(1.0, 0.3), HypothesisSpec::one_sided_lower(1.0, 0.05)) == 0.5);
    CHECK(p_value(fit(1.0, 0.3), HypothesisSpec::one_sided_upper(1.0, 0.05)) == 0.5);
  }

  TEST_CASE("two-sided at the 0.975 quantile") {
    CHECK(p_value(fit(1.959963985, 1.0), HypothesisSpec::two_sided(0.0, 0.05)) ==
          doctest::Approx(0.05).epsilon(1e-8));
  }

  TEST_CASE("equivalence symmetric case") {
    const auto h = HypothesisSpec::equivalence(-1.0, 1.0, 0.05);
    CHECK(p_value(fit(0.0, 0.5), h) == doctest::Approx(0.0227501319481792072).epsilon(1e-12));
    const auto tails = equivalence_tails(fit(0.0, 0.5), h);
    CHECK(tails.lower == doctest::Approx(tails.upper).epsilon(1e-14));
  }

  TEST_CASE("direction of the one-sided tests") {
    CHECK(p_value(fit(2.0, 1.0), HypothesisSpec::one_sided_lower(0.0, 0.05)) < 0.05);
    CHECK(p_value(fit(-2.0, 1.0), HypothesisSpec::one_sided_upper(0.0, 0.05)) < 0.05);
    CHECK(p_value(fit(-2.0, 1.0), HypothesisSpec::one_sided_lower(0.0, 0.05)) > 0.95);
  }

  TEST_CASE("two-sided is twice the smaller one-sided p") {
    auto s = testing::stream(1, 5);
    for (int i = 0; i < 500; ++i) {
      const double th = s.normal(0.0, 3.0);
      const double se = 0.1 + s.uniform();
      const double t0 = s.normal(0.0, 1.0);
      const double lo = p_value(fit(th, se), HypothesisSpec::one_sided_lower(t0, 0.05));
      const double up = p_value(fit(th, se), HypothesisSpec::one_sided_upper(t0, 0.05));
      CHECK(p_value(fit(th, se), HypothesisSpec::two_sided(t0, 0.05)) == 2.0 * std::min(lo, up));
    }
  }

  TEST_CASE("equivalence is the larger of its one-sided constituents") {
    auto s = testing::stream(2, 5);
    for (int i = 0; i < 500; ++i) {
      const double th = s.normal(0.0, 1.0);
      const double se = 0.05 + s.uniform();
      const double lo = p_value(fit(th, se), HypothesisSpec::one_sided_lower(-0.5, 0.05));
      const double up = p_value(fit(th, se), HypothesisSpec::one_sided_upper(0.7, 0.05));
      const auto h = HypothesisSpec::equivalence(-0.5, 0.7, 0.05);
      CHECK(p_value(fit(th, se), h) == std::max(lo, up));
      const auto tails = equivalence_tails(fit(th, se), h);
      CHECK(tails.lower == lo);
      CHECK(tails.upper == up);
    }
  }

  TEST_CASE("unusable estimates and bad specs are rejected") {
    EstimateResult bad = fit(0.0, 1.0);
    bad.converged = false;
    bad.status = FitStatus::not_converged;
    CHECK_THROWS_AS(p_value(bad, HypothesisSpec::two_sided(0.0, 0.05)), std::invalid_argument);
    CHECK_THROWS_AS(p_value(fit(0.0, 0.0), HypothesisSpec::two_sided(0.0, 0.05)), std::invalid_argument);
    CHECK_THROWS_AS(HypothesisSpec::two_sided(0.0, 1.5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(HypothesisSpec::equivalence(1.0, 1.0, 0.05).validate(), std::invalid_argument);
    CHECK_THROWS_AS(HypothesisSpec::equivalence(2.0, 1.0, 0.05).validate(), std::invalid_argument);
  }

  TEST_CASE("null p-values are uniform for the mean-difference recipe") {
    const Scenario null("null", TwoArmNormalParams{0.0, 0.0, 1.0, 0.5});
    const auto h = HypothesisSpec::one_sided_lower(0.0, 0.05);
    SimulationSettings settings;
    settings.master_seed = 2024;
    settings.workers = 4;
    const PValueSample sample = run_algorithm1(null, h, 10000, 10000, settings);
    double ks = 0.0;
    const double R = static_cast<double>(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const double p = sample.p_sorted[i];
      ks = std::max({ks, std::fabs((i + 1) / R - p), std::fabs(i / R - p)});
    }
    CHECK(ks <= 0.02);
    CHECK(std::fabs(estimate_power(sample, 0.05) - 0.05) <= 0.008);
  }

  TEST_CASE("hypothesis names round trip") {
    for (auto k : {HypothesisKind::one_sided_lower, HypothesisKind::one_sided_upper, HypothesisKind::two_sided,
                   HypothesisKind::equivalence}) {
      CHECK(hypothesis_kind_from_string(to_string(k)) == k);
    }
  }
}
