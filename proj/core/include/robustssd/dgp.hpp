#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

#include "robustssd/dataset.hpp"
#include "robustssd/estimators.hpp"
#include "robustssd/rng.hpp"

namespace robustssd {

enum class Family {
  two_arm_normal,
  two_arm_binary,
  clustered_gaussian_dropout,
  longitudinal_poisson_copula,
};

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

// One row per unit: arm ~ Bernoulli(allocation),
// response ~ N(mu_control + arm * theta, sigma^2). Columns: intercept, arm.
struct TwoArmNormalParams {
  double theta = 0.0;
  double mu_control = 0.0;
  double sigma = 1.0;
  double allocation = 0.5;

  bool operator==(const TwoArmNormalParams&) const = default;
};

// One row per unit: response ~ Bernoulli(inv_logit(beta0 + arm * beta_treatment)).
struct TwoArmBinaryParams {
  double beta0 = 0.0;
  double beta_treatment = 0.0;
  double allocation = 0.5;

  bool operator==(const TwoArmBinaryParams&) const = default;
};

// Logistic hazard of dropping out at visit j >= 2 given the unit was seen
// at visit j - 1:
//   logit h = intercept + previous_response * y_{j-1} + time * t_j
//             + arm * arm + baseline * baseline_score.
// The first post-baseline visit is always observed.
struct DropoutModel {
  double intercept = -30.0;
  double previous_response = 0.0;
  double time = 0.0;
  double arm = 0.0;
  double baseline = 0.0;

  bool operator==(const DropoutModel&) const = default;
};

// Longitudinal continuous outcome with random intercepts and slopes:
//   y_ij = intercept + baseline_coef * b_i + theta * arm_i + time_slope * t_j
//          + u0_i + u1_i * t_j + e_ij,   t_j = j * visit_spacing, j = 1..visits.
// Columns: intercept, baseline, arm, time.
struct ClusteredGaussianParams {
  double intercept = 0.0;
  double baseline_coef = 0.5;
  double theta = 0.0;
  double time_slope = 0.0;
  double sigma_intercept = 1.0;
  double sigma_slope = 0.1;
  double sigma_residual = 1.0;
  int visits = 6;
  double visit_spacing = 1.0;
  double baseline_mean = 0.0;
  double baseline_sd = 1.0;
  double allocation = 0.5;
  DropoutModel dropout;

  bool operator==(const ClusteredGaussianParams&) const = default;
};

enum class CopulaKind { independent, exchangeable, ar1, unstructured };

std::string_view to_string(CopulaKind kind);
CopulaKind copula_kind_from_string(std::string_view name);

struct CopulaSpec {
  CopulaKind kind = CopulaKind::independent;
  double rho = 0.0;
  Eigen::MatrixXd matrix;  // unstructured only, (1 + post_periods) square

  bool operator==(const CopulaSpec& other) const;
};

// Counts over one pre-baseline period and `post_periods` post-baseline
// periods. The period mean is
//   length_j * frailty_i * exp(log_rate + post_effect * post_j
//                              + arm_pre_effect * arm_i * (1 - post_j)
//                              + theta * arm_i * post_j),
// frailty_i ~ Gamma(mean 1, variance frailty_variance) (1 when zero), and
// the counts are coupled through a Gaussian copula on the latent scale.
// Columns: intercept, post, arm_pre, arm_post; offsets log(length_j).
struct PoissonCopulaParams {
  double log_rate = 0.0;
  double post_effect = 0.0;
  double arm_pre_effect = 0.0;
  double theta = 0.0;
  int post_periods = 4;
  double pre_length = 4.0;
  double post_length = 1.0;
  double frailty_variance = 0.0;
  double allocation = 0.5;
  CopulaSpec copula;

  bool operator==(const PoissonCopulaParams&) const = default;
};

using ScenarioParams = std::variant<TwoArmNormalParams, TwoArmBinaryParams,
                                    ClusteredGaussianParams, PoissonCopulaParams>;

AnalysisRecipe default_recipe(Family family);

// A fully specified data-generating process. Immutable after construction,
// so one instance can be shared by concurrent repetitions.
class Scenario {
 public:
  // Throws std::invalid_argument (naming `label`) when parameters violate
  // their invariants, when `declared_theta` disagrees with the estimand
  // implied by `params`, or when the recipe does not fit the family.
  Scenario(std::string label, ScenarioParams params,
           std::optional<AnalysisRecipe> analysis = std::nullopt,
           std::optional<double> declared_theta = std::nullopt);

  const std::string& label() const { return label_; }
  Family family() const;
  const ScenarioParams& params() const { return params_; }
  const AnalysisRecipe& analysis() const { return analysis_; }
  double true_theta() const;

  // Key used in stream paths; defaults to the scenario's position in the
  // study. Equal keys reproduce equal simulations.
  std::optional<std::uint64_t> stream_id() const { return stream_id_; }
  Scenario& set_stream_id(std::uint64_t id) {
    stream_id_ = id;
    return *this;
  }

  // The same process with the estimand moved to `theta` (used for null
  // and boundary confirmation runs).
  Scenario with_theta(double theta) const;
  Scenario with_label(std::string label) const;

  // Closed-form large-n sd of theta_hat * sqrt(n), where one is known.
  std::optional<double> analytic_lambda() const;

  Dataset generate(int n, RngStream& stream) const;

 private:
  std::string label_;
  ScenarioParams params_;
  AnalysisRecipe analysis_;
  std::optional<std::uint64_t> stream_id_;
  std::shared_ptr<const CorrelationFactor> copula_factor_;
};

Dataset gen_two_arm_normal(const TwoArmNormalParams& p, int n, RngStream& stream);
Dataset gen_two_arm_binary(const TwoArmBinaryParams& p, int n, RngStream& stream);
Dataset gen_clustered_gaussian_dropout(const ClusteredGaussianParams& p, int n, RngStream& stream);
Dataset gen_longitudinal_poisson_copula(const PoissonCopulaParams& p, const CorrelationFactor& factor,
                                        int n, RngStream& stream);

// Latent correlation over the 1 + post_periods periods.
Eigen::MatrixXd copula_correlation(const CopulaSpec& copula, int periods);

}  // namespace robustssd
