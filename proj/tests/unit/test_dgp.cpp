#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "robustssd/dgp.hpp"
#include "robustssd/numeric.hpp"
#include "support.hpp"

using namespace robustssd;

namespace {

bool same_dataset(const Dataset& a, const Dataset& b) {
  return a.columns == b.columns && a.design == b.design && a.response == b.response && a.offset == b.offset &&
         a.observed == b.observed && a.unit_begin == b.unit_begin;
}

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mid;
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) { return pearson(ranks(a), ranks(b)); }

std::vector<Scenario> one_of_each() {
  ClusteredGaussianParams cg;
  cg.theta = 0.4;
  cg.dropout.intercept = -1.0;
  cg.dropout.previous_response = 0.2;
  PoissonCopulaParams pc;
  pc.log_rate = 0.5;
  pc.theta = 0.1;
  pc.frailty_variance = 0.3;
  pc.copula = {CopulaKind::ar1, 0.5, {}};
  return {Scenario("normal", TwoArmNormalParams{0.5, 1.0, 2.0, 0.5}),
          Scenario("binary", TwoArmBinaryParams{-0.3, 0.4, 0.4}), Scenario("clustered", cg),
          Scenario("poisson", pc)};
}

}  // namespace

TEST_SUITE("dgp") {
  TEST_CASE("every family is deterministic per stream path and satisfies dataset invariants") {
    for (const auto& s : one_of_each()) {
      CAPTURE(s.label());
      auto a = testing::stream(11);
      auto b = testing::stream(11);
      auto c = testing::stream(12);
      const Dataset da = s.generate(57, a);
      const Dataset db = s.generate(57, b);
      const Dataset dc = s.generate(57, c);
      CHECK(da.units() == 57);
      CHECK_NOTHROW(da.check_invariants(true));
      CHECK(same_dataset(da, db));
      CHECK_FALSE(same_dataset(da, dc));
    }
  }

  TEST_CASE("two-arm normal") {
    SUBCASE("near-degenerate sigma pins responses to the arm means") {
      const TwoArmNormalParams p{0.7, 2.0, 1e-12, 0.5};
      auto s = testing::stream(1);
      const Dataset d = gen_two_arm_normal(p, 200, s);
      for (Eigen::Index i = 0; i < d.design.rows(); ++i) {
        const double expected = d.design(i, 1) == 1.0 ? 2.7 : 2.0;
        CHECK(std::fabs(d.response(i) - expected) <= 1e-9);
      }
    }
    SUBCASE("allocation") {
      auto s = testing::stream(2);
      const Dataset d = gen_two_arm_normal({0.0, 0.0, 1.0, 0.5}, 10000, s);
      CHECK(std::fabs(d.design.col(1).mean() - 0.5) <= 0.015);
    }
    SUBCASE("validation") {
      CHECK_THROWS_AS(Scenario("bad", TwoArmNormalParams{0.1, 0.0, 0.0, 0.5}), std::invalid_argument);
      CHECK_THROWS_AS(Scenario("bad", TwoArmNormalParams{0.1, 0.0, 1.0, 1.0}), std::invalid_argument);
    }
  }

  TEST_CASE("two-arm binary") {
    auto s = testing::stream(3);
    const Dataset balanced = gen_two_arm_binary({0.0, 0.0, 0.5}, 10000, s);
    CHECK(std::fabs(balanced.response.mean() - 0.5) <= 0.015);
    const Dataset saturated = gen_two_arm_binary({-30.0, 0.0, 0.5}, 1000, s);
    CHECK(saturated.response.sum() == 0.0);
    CHECK(Scenario("b", TwoArmBinaryParams{-1.0, 0.4, 0.5}).true_theta() == 0.4);
  }

  TEST_CASE("clustered gaussian with dropout") {
    SUBCASE("no dropout at a very negative intercept") {
      ClusteredGaussianParams p;
      p.dropout.intercept = -30.0;
      auto s = testing::stream(4);
      const Dataset d = gen_clustered_gaussian_dropout(p, 500, s);
      CHECK(std::all_of(d.observed.begin(), d.observed.end(), [](auto m) { return m == 1; }));
      CHECK(d.rows() == 500u * static_cast<std::size_t>(p.visits));
    }
    SUBCASE("degenerate variances leave the fixed-effect surface") {
      ClusteredGaussianParams p;
      p.intercept = 1.0;
      p.baseline_coef = 0.5;
      p.theta = 0.8;
      p.time_slope = -0.3;
      p.sigma_intercept = 0.0;
      p.sigma_slope = 0.0;
      p.sigma_residual = 1e-9;
      auto s = testing::stream(5);
      const Dataset d = gen_clustered_gaussian_dropout(p, 100, s);
      for (Eigen::Index r = 0; r < d.design.rows(); ++r) {
        const double surface = 1.0 + 0.5 * d.design(r, 1) + 0.8 * d.design(r, 2) - 0.3 * d.design(r, 3);
        CHECK(std::fabs(d.response(r) - surface) <= 1e-6);
      }
    }
    SUBCASE("coin-flip hazard continues half the time") {
      ClusteredGaussianParams p;
      p.dropout = DropoutModel{0.0, 0.0, 0.0, 0.0, 0.0};
      auto s = testing::stream(6);
      const Dataset d = gen_clustered_gaussian_dropout(p, 5000, s);
      CHECK_NOTHROW(d.check_invariants(true));
      double at_risk = 0.0;
      double continued = 0.0;
      for (std::size_t u = 0; u < d.units(); ++u) {
        const std::size_t b = d.unit_begin[u];
        CHECK(d.observed[b] == 1);  // first visit always seen
        for (std::size_t j = 1; j < d.unit_rows(u); ++j) {
          if (d.observed[b + j - 1]) {
            at_risk += 1.0;
            continued += d.observed[b + j];
          }
        }
      }
      CHECK(std::fabs(continued / at_risk - 0.5) <= 0.02);
    }
    SUBCASE("response-driven dropout thins high responders") {
      ClusteredGaussianParams p;
      p.dropout = DropoutModel{-1.5, 1.0, 0.0, 0.0, 0.0};
      auto s = testing::stream(7);
      const Dataset d = gen_clustered_gaussian_dropout(p, 4000, s);
      double drop_prev = 0.0, n_drop = 0.0, stay_prev = 0.0, n_stay = 0.0;
      for (std::size_t u = 0; u < d.units(); ++u) {
        const std::size_t b = d.unit_begin[u];
        for (std::size_t j = 1; j < d.unit_rows(u); ++j) {
          if (!d.observed[b + j - 1]) break;
          const double prev = d.response(static_cast<Eigen::Index>(b + j - 1));
          if (d.observed[b + j]) {
            stay_prev += prev;
            n_stay += 1;
          } else {
            drop_prev += prev;
            n_drop += 1;
          }
        }
      }
      CHECK(drop_prev / n_drop > stay_prev / n_stay + 0.3);
    }
    SUBCASE("validation") {
      ClusteredGaussianParams p;
      p.visits = 1;
      CHECK_THROWS_AS(Scenario("bad", p), std::invalid_argument);
      p.visits = 3;
      p.sigma_residual = 0.0;
      CHECK_THROWS_AS(Scenario("bad", p), std::invalid_argument);
    }
  }

  TEST_CASE("poisson copula") {
    SUBCASE("independent margins match model means") {
      PoissonCopulaParams p;
      p.log_rate = 0.7;
      p.post_effect = -0.2;
      p.arm_pre_effect = 0.1;
      p.theta = 0.3;
      p.post_periods = 4;
      p.pre_length = 4.0;
      p.post_length = 1.0;
      p.allocation = 0.5;
      const Scenario s("pc", p);
      auto st = testing::stream(8);
      const Dataset d = s.generate(10000, st);
      // period j, arm a: sum and count
      double sum[5][2] = {}, cnt[5][2] = {};
      for (std::size_t u = 0; u < d.units(); ++u) {
        const std::size_t b = d.unit_begin[u];
        const int arm = d.design(static_cast<Eigen::Index>(b + 1), 3) == 1.0 ? 1 : 0;
        for (std::size_t j = 0; j < 5; ++j) {
          sum[j][arm] += d.response(static_cast<Eigen::Index>(b + j));
          cnt[j][arm] += 1;
        }
      }
      for (int j = 0; j < 5; ++j) {
        for (int a = 0; a < 2; ++a) {
          const double post = j == 0 ? 0.0 : 1.0;
          const double length = j == 0 ? 4.0 : 1.0;
          const double mean = length * std::exp(0.7 - 0.2 * post + 0.1 * a * (1 - post) + 0.3 * a * post);
          const double mc_se = std::sqrt(mean / cnt[j][a]);
          CAPTURE(j);
          CAPTURE(a);
          CHECK(std::fabs(sum[j][a] / cnt[j][a] - mean) <= 3.0 * mc_se);
        }
      }
    }
    SUBCASE("exchangeable with zero correlation equals independent") {
      PoissonCopulaParams a;
      a.log_rate = 1.0;
      PoissonCopulaParams b = a;
      b.copula = {CopulaKind::exchangeable, 0.0, {}};
      auto s1 = testing::stream(9);
      auto s2 = testing::stream(9);
      CHECK(same_dataset(Scenario("a", a).generate(300, s1), Scenario("b", b).generate(300, s2)));
    }
    SUBCASE("ar1 dependence decays with lag") {
      PoissonCopulaParams p;
      p.log_rate = 1.5;
      p.post_periods = 4;
      p.copula = {CopulaKind::ar1, 0.9, {}};
      auto st = testing::stream(10);
      const Dataset d = Scenario("ar", p).generate(10000, st);
      std::vector<double> y1, y2, y4;
      for (std::size_t u = 0; u < d.units(); ++u) {
        const auto b = static_cast<Eigen::Index>(d.unit_begin[u]);
        y1.push_back(d.response(b + 1));
        y2.push_back(d.response(b + 2));
        y4.push_back(d.response(b + 4));
      }
      const double adjacent = spearman(y1, y2);
      const double lag3 = spearman(y1, y4);
      CHECK(adjacent > lag3);
      CHECK(adjacent > 0.6);
    }
    SUBCASE("frailty inflates the variance") {
      PoissonCopulaParams p;
      p.log_rate = std::log(5.0);
      p.post_periods = 1;
      p.pre_length = 1.0;
      p.frailty_variance = 0.5;
      auto st = testing::stream(13);
      const Dataset d = Scenario("fr", p).generate(20000, st);
      std::vector<double> pre;
      for (std::size_t u = 0; u < d.units(); ++u) pre.push_back(d.response(static_cast<Eigen::Index>(d.unit_begin[u])));
      const double m = std::accumulate(pre.begin(), pre.end(), 0.0) / pre.size();
      double v = 0.0;
      for (double y : pre) v += (y - m) * (y - m);
      v /= pre.size() - 1;
      CHECK(m == doctest::Approx(5.0).epsilon(0.03));
      CHECK(v == doctest::Approx(5.0 + 0.5 * 25.0).epsilon(0.08));
    }
    SUBCASE("non positive definite unstructured matrix is rejected") {
      PoissonCopulaParams p;
      p.post_periods = 2;
      p.copula.kind = CopulaKind::unstructured;
      p.copula.matrix.resize(3, 3);
      p.copula.matrix << 1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0;
      CHECK_THROWS_AS(Scenario("np", p), std::invalid_argument);
      p.copula.matrix = Eigen::MatrixXd::Identity(2, 2);
      CHECK_THROWS_AS(Scenario("np", p), std::invalid_argument);
    }
  }

  TEST_CASE("scenario contract") {
    CHECK_NOTHROW(Scenario("ok", TwoArmNormalParams{0.5, 0.0, 1.0, 0.5}, std::nullopt, 0.5));
    CHECK_THROWS_AS(Scenario("bad", TwoArmNormalParams{0.5, 0.0, 1.0, 0.5}, std::nullopt, 0.5000001),
                    std::invalid_argument);
    CHECK_THROWS_AS(Scenario("bad", TwoArmBinaryParams{}, AnalysisRecipe{RecipeKind::gee_log, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(Scenario("bad", TwoArmNormalParams{}, AnalysisRecipe{RecipeKind::mean_diff, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(Scenario("", TwoArmNormalParams{}), std::invalid_argument);

    const Scenario s = Scenario("s", TwoArmNormalParams{0.5, 0.0, 1.0, 0.5}).set_stream_id(9);
    const Scenario null = s.with_theta(0.0);
    CHECK(null.true_theta() == 0.0);
    CHECK(null.stream_id() == std::optional<std::uint64_t>(9));
    CHECK(s.analytic_lambda().value() == doctest::Approx(2.0));
  }

  TEST_CASE("copula correlation shapes") {
    const Eigen::MatrixXd ex = copula_correlation({CopulaKind::exchangeable, 0.3, {}}, 4);
    CHECK(ex(0, 3) == 0.3);
    CHECK(ex(2, 2) == 1.0);
    const Eigen::MatrixXd ar = copula_correlation({CopulaKind::ar1, 0.5, {}}, 4);
    CHECK(ar(0, 3) == doctest::Approx(0.125));
    CHECK(ar(1, 2) == 0.5);
  }

  TEST_CASE("family names round trip") {
    for (Family f : {Family::two_arm_normal, Family::two_arm_binary, Family::clustered_gaussian_dropout,
                     Family::longitudinal_poisson_copula}) {
      CHECK(family_from_string(to_string(f)) == f);
    }
    CHECK_THROWS_AS(family_from_string("weibull"), std::invalid_argument);
  }
}
