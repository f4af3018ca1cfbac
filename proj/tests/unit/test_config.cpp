#include <doctest.h>

#include <algorithm>
#include <string>

#include "robustssd/config.hpp"
#include "support.hpp"

using namespace robustssd;

namespace {

const char* kMinimal = R"({
  "hypothesis": {"kind": "one_sided_lower", "theta0": 0.0},
  "alpha": 0.025,
  "beta": 0.1,
  "n0": 100,
  "n1_strategy": {"kind": "user_fixed", "n1": 250},
  "scenarios": [
    {"label": "normal", "family": "two_arm_normal", "eta": {"theta": 0.5, "sigma": 1.0}}
  ]
})";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool has_default(const RunConfig& cfg, const std::string& prefix) {
  return std::any_of(cfg.applied_defaults.begin(), cfg.applied_defaults.end(),
                     [&](const std::string& s) { return s.rfind(prefix, 0) == 0; });
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("minimal config applies and reports defaults") {
    const RunConfig cfg = parse_config_text(kMinimal);
    CHECK(cfg.design.replications == 10000);
    CHECK(cfg.design.hypothesis.alpha == 0.025);
    CHECK(cfg.design.strategy.n1 == 250);
    CHECK(cfg.scenarios.size() == 1);
    CHECK(cfg.scenarios[0].analysis().kind == RecipeKind::mean_diff);
    CHECK(has_default(cfg, "replications = 10000"));
    CHECK(has_default(cfg, "seed = "));
    CHECK(has_default(cfg, "scenarios[0].rho.allocation = 0.5"));
    CHECK(has_default(cfg, "scenarios[0].analysis = "));
  }

  TEST_CASE("round trip through serialization") {
    const RunConfig first = parse_config_text(kMinimal);
    const std::string text = serialize_config(first);
    const RunConfig second = parse_config_text(text);
    CHECK(serialize_config(second) == text);
    CHECK(second.design.hypothesis == first.design.hypothesis);
    CHECK(second.design.strategy == first.design.strategy);
    CHECK(second.scenarios[0].params() == first.scenarios[0].params());
    CHECK(second.applied_defaults.empty());
  }

  TEST_CASE("round trip of every family") {
    const std::string text = R"({
      "hypothesis": {"kind": "equivalence", "theta0_lower": -0.3, "theta0_upper": 0.3},
      "alpha": 0.05, "target_power": 0.8, "replications": 500, "n0": 40,
      "n1_strategy": {"kind": "theorem_slope", "lambda0": 1.2},
      "seed": 9, "workers": 3, "sweep_grid": {"from": 30, "to": 50, "step": 10},
      "weights": [0.25, 0.25, 0.25, 0.25],
      "scenarios": [
        {"label": "n", "family": "two_arm_normal", "eta": {"theta": 0.0, "sigma": 1.0}},
        {"label": "b", "family": "two_arm_binary", "eta": {"beta0": 0.0, "beta_treatment": 0.0},
         "analysis": {"recipe": "logistic", "bootstrap_resamples": 50}},
        {"label": "c", "family": "clustered_gaussian_dropout", "eta": {"theta": 0.0},
         "rho": {"visits": 4, "dropout": {"intercept": -1.0, "previous_response": 0.5}}, "stream_id": 7},
        {"label": "p", "family": "longitudinal_poisson_copula", "eta": {"log_rate": 1.0, "theta": 0.0},
         "rho": {"post_periods": 2, "copula": {"kind": "unstructured",
                 "matrix": [[1, 0.2, 0.2], [0.2, 1, 0.5], [0.2, 0.5, 1]]}}}
      ]
    })";
    const RunConfig cfg = parse_config_text(text);
    CHECK(cfg.sweep_grid == std::vector<int>{30, 40, 50});
    CHECK(cfg.design.beta == doctest::Approx(0.2));
    CHECK(cfg.scenarios[1].analysis().bootstrap_resamples == 50);
    CHECK(cfg.scenarios[2].stream_id() == std::optional<std::uint64_t>(7));
    const RunConfig again = parse_config_text(serialize_config(cfg));
    for (std::size_t k = 0; k < cfg.scenarios.size(); ++k) {
      CHECK(again.scenarios[k].params() == cfg.scenarios[k].params());
      CHECK(again.scenarios[k].analysis() == cfg.scenarios[k].analysis());
    }
    CHECK(serialize_config(again) == serialize_config(cfg));
  }

  TEST_CASE("invalid alpha names the field") {
    const std::string msg = error_of(replace(kMinimal, "\"alpha\": 0.025", "\"alpha\": 1.5"));
    CHECK(msg.rfind("alpha:", 0) == 0);
  }

  TEST_CASE("empty equivalence interval is rejected") {
    const std::string msg = error_of(replace(kMinimal, R"({"kind": "one_sided_lower", "theta0": 0.0})",
                                             R"({"kind": "equivalence", "theta0_lower": 0.5, "theta0_upper": 0.5})"));
    CHECK(msg.find("hypothesis.theta0_lower") != std::string::npos);
  }

  TEST_CASE("path-qualified errors") {
    CHECK(error_of(replace(kMinimal, "\"n0\": 100,", "\"n0\": 100, \"bogus\": 1,")).rfind("bogus:", 0) == 0);
    CHECK(error_of(replace(kMinimal, "\"sigma\": 1.0", "\"sigma\": -1.0")).rfind("scenarios[0]:", 0) == 0);
    CHECK(error_of(replace(kMinimal, "\"sigma\": 1.0", "\"sigma\": \"wide\"")).rfind("scenarios[0].eta.sigma:", 0) ==
          0);
    CHECK(error_of(replace(kMinimal, "\"n0\": 100,", "")).rfind("n0:", 0) == 0);
    CHECK(error_of(replace(kMinimal, "\"beta\": 0.1", "\"beta\": 0.1, \"target_power\": 0.9"))
              .rfind("target_power:", 0) == 0);
    CHECK(error_of(replace(kMinimal, "two_arm_normal", "weibull")).rfind("scenarios[0].family:", 0) == 0);
    CHECK(error_of(replace(kMinimal, "\"n1\": 250", "\"n1\": 100")).rfind("n1:", 0) == 0);
    CHECK(error_of("{not json").find("malformed JSON") != std::string::npos);
  }

  TEST_CASE("dropout may only reference generated covariates") {
    const std::string text = R"({
      "hypothesis": {"kind": "two_sided", "theta0": 0.0}, "alpha": 0.05, "beta": 0.2, "n0": 50,
      "n1_strategy": {"kind": "geometric_step"},
      "scenarios": [{"label": "c", "family": "clustered_gaussian_dropout", "eta": {"theta": 0.3},
                     "rho": {"dropout": {"intercept": -1.0, "quality_of_life": 0.2}}}]
    })";
    CHECK(error_of(text).rfind("scenarios[0].rho.dropout.quality_of_life:", 0) == 0);
  }

  TEST_CASE("duplicate labels and weight mismatches") {
    std::string text = kMinimal;
    text = replace(text, R"({"label": "normal", "family": "two_arm_normal", "eta": {"theta": 0.5, "sigma": 1.0}})",
                   R"({"label": "normal", "family": "two_arm_normal", "eta": {"theta": 0.5, "sigma": 1.0}},
                      {"label": "normal", "family": "two_arm_normal", "eta": {"theta": 0.5, "sigma": 2.0}})");
    CHECK(error_of(text).rfind("scenarios[1].label:", 0) == 0);
    CHECK(error_of(replace(kMinimal, "\"n0\": 100,", "\"n0\": 100, \"weights\": [0.5, 0.5],")).rfind("weights:", 0) ==
          0);
  }

  TEST_CASE("missing file") {
    CHECK_THROWS_AS(parse_config("/nonexistent/config.json"), ConfigError);
  }

  TEST_CASE("shipped example configurations parse") {
    for (const char* name : {"normal_one_sided.json", "poisson_equivalence.json", "poisson_four_copulas.json",
                             "clustered_dropout.json", "binary_bootstrap.json"}) {
      CAPTURE(name);
      CHECK_NOTHROW(parse_config(std::string(ROBUSTSSD_TEST_DATA) + "/../../configs/" + name));
    }
  }

  TEST_CASE("shipped dropout scenario loses about three quarters of units before the last visit") {
    const RunConfig cfg = parse_config(std::string(ROBUSTSSD_TEST_DATA) + "/../../configs/clustered_dropout.json");
    const Scenario& s = cfg.scenarios.at(1);
    RngStream stream = testing::stream(0, 0, 31);
    const int n = 20000;
    const Dataset d = s.generate(n, stream);
    const std::size_t visits = d.observed.size() / n;
    int dropped = 0;
    for (int i = 0; i < n; ++i) dropped += d.observed[static_cast<std::size_t>(i) * visits + visits - 1] == 0;
    CHECK(static_cast<double>(dropped) / n == doctest::Approx(0.75).epsilon(0.04));
  }
}
