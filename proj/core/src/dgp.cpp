#include "robustssd/dgp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "robustssd/numeric.hpp"

namespace robustssd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void reject(const std::string& label, const std::string& what) {
  throw std::invalid_argument("scenario '" + label + "': " + what);
}

void require(bool ok, const std::string& label, const std::string& what) {
  if (!ok) reject(label, what);
}

bool finite(double x) { return std::isfinite(x); }

void validate(const TwoArmNormalParams& p, const std::string& label) {
  require(finite(p.theta) && finite(p.mu_control), label, "theta and mu_control must be finite");
  require(p.sigma > 0.0 && finite(p.sigma), label, "sigma must be positive");
  require(p.allocation > 0.0 && p.allocation < 1.0, label, "allocation must lie in (0, 1)");
}

void validate(const TwoArmBinaryParams& p, const std::string& label) {
  require(finite(p.beta0) && finite(p.beta_treatment), label, "coefficients must be finite");
  require(p.allocation > 0.0 && p.allocation < 1.0, label, "allocation must lie in (0, 1)");
}

void validate(const ClusteredGaussianParams& p, const std::string& label) {
  require(p.visits >= 2, label, "visits must be at least 2");
  require(p.visit_spacing > 0.0, label, "visit_spacing must be positive");
  require(p.sigma_intercept >= 0.0 && p.sigma_slope >= 0.0, label,
          "random-effect standard deviations must be non-negative");
  require(p.sigma_residual > 0.0, label, "sigma_residual must be positive");
  require(p.baseline_sd >= 0.0, label, "baseline_sd must be non-negative");
  require(p.allocation > 0.0 && p.allocation < 1.0, label, "allocation must lie in (0, 1)");
  require(finite(p.intercept) && finite(p.baseline_coef) && finite(p.theta) &&
              finite(p.time_slope) && finite(p.baseline_mean),
          label, "fixed effects must be finite");
  const auto& d = p.dropout;
  require(finite(d.intercept) && finite(d.previous_response) && finite(d.time) &&
              finite(d.arm) && finite(d.baseline),
          label, "dropout coefficients must be finite");
}

void validate(const PoissonCopulaParams& p, const std::string& label) {
  require(p.post_periods >= 1, label, "post_periods must be at least 1");
  require(p.pre_length > 0.0 && p.post_length > 0.0, label, "period lengths must be positive");
  require(p.frailty_variance >= 0.0, label, "frailty_variance must be non-negative");
  require(p.allocation > 0.0 && p.allocation < 1.0, label, "allocation must lie in (0, 1)");
  require(finite(p.log_rate) && finite(p.post_effect) && finite(p.arm_pre_effect) &&
              finite(p.theta),
          label, "log-linear coefficients must be finite");
  if (p.copula.kind == CopulaKind::exchangeable || p.copula.kind == CopulaKind::ar1) {
    require(p.copula.rho > -1.0 && p.copula.rho < 1.0, label, "copula rho must lie in (-1, 1)");
  }
  if (p.copula.kind == CopulaKind::unstructured) {
    require(p.copula.matrix.rows() == p.post_periods + 1 && p.copula.matrix.cols() == p.post_periods + 1,
            label, "unstructured copula matrix must be (1 + post_periods) square");
  }
}

bool recipe_fits(Family family, RecipeKind kind) {
  switch (family) {
    case Family::two_arm_normal:
      return kind == RecipeKind::mean_diff || kind == RecipeKind::gee_identity;
    case Family::two_arm_binary:
      return kind == RecipeKind::logistic;
    case Family::clustered_gaussian_dropout:
      return kind == RecipeKind::gee_identity;
    case Family::longitudinal_poisson_copula:
      return kind == RecipeKind::gee_log;
  }
  return false;
}

Dataset empty_dataset(std::vector<std::string> columns, std::size_t theta_column, int n,
                      std::size_t rows_per_unit) {
  Dataset d;
  d.columns = std::move(columns);
  d.theta_column = theta_column;
  const auto rows = static_cast<Eigen::Index>(n * rows_per_unit);
  d.design.resize(rows, static_cast<Eigen::Index>(d.columns.size()));
  d.response.resize(rows);
  d.offset = Eigen::VectorXd::Zero(rows);
  d.observed.assign(static_cast<std::size_t>(rows), 1);
  d.unit_begin.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) d.unit_begin[i] = static_cast<std::size_t>(i) * rows_per_unit;
  return d;
}

void require_n(int n) {
  if (n < 1) throw std::invalid_argument("sample size must be at least 1, got " + std::to_string(n));
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::two_arm_normal: return "two_arm_normal";
    case Family::two_arm_binary: return "two_arm_binary";
    case Family::clustered_gaussian_dropout: return "clustered_gaussian_dropout";
    case Family::longitudinal_poisson_copula: return "longitudinal_poisson_copula";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (auto f : {Family::two_arm_normal, Family::two_arm_binary,
                 Family::clustered_gaussian_dropout, Family::longitudinal_poisson_copula}) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown scenario family '" + std::string(name) + "'");
}

std::string_view to_string(CopulaKind kind) {
  switch (kind) {
    case CopulaKind::independent: return "independent";
    case CopulaKind::exchangeable: return "exchangeable";
    case CopulaKind::ar1: return "ar1";
    case CopulaKind::unstructured: return "unstructured";
  }
  return "unknown";
}

CopulaKind copula_kind_from_string(std::string_view name) {
  for (auto k : {CopulaKind::independent, CopulaKind::exchangeable, CopulaKind::ar1,
                 CopulaKind::unstructured}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown copula kind '" + std::string(name) + "'");
}

bool CopulaSpec::operator==(const CopulaSpec& other) const {
  if (kind != other.kind || rho != other.rho) return false;
  if (matrix.rows() != other.matrix.rows() || matrix.cols() != other.matrix.cols()) return false;
  return matrix.size() == 0 || matrix == other.matrix;
}

Eigen::MatrixXd copula_correlation(const CopulaSpec& copula, int periods) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(periods, periods);
  switch (copula.kind) {
    case CopulaKind::independent:
      break;
    case CopulaKind::exchangeable:
      for (int i = 0; i < periods; ++i)
        for (int j = 0; j < periods; ++j)
          if (i != j) r(i, j) = copula.rho;
      break;
    case CopulaKind::ar1:
      for (int i = 0; i < periods; ++i)
        for (int j = 0; j < periods; ++j) r(i, j) = std::pow(copula.rho, std::abs(i - j));
      break;
    case CopulaKind::unstructured:
      r = copula.matrix;
      break;
  }
  return r;
}

AnalysisRecipe default_recipe(Family family) {
  switch (family) {
    case Family::two_arm_normal: return {RecipeKind::mean_diff, 0};
    case Family::two_arm_binary: return {RecipeKind::logistic, 0};
    case Family::clustered_gaussian_dropout: return {RecipeKind::gee_identity, 0};
    case Family::longitudinal_poisson_copula: return {RecipeKind::gee_log, 0};
  }
  return {};
}

Dataset gen_two_arm_normal(const TwoArmNormalParams& p, int n, RngStream& stream) {
  require_n(n);
  Dataset d = empty_dataset({"intercept", "arm"}, 1, n, 1);
  for (int i = 0; i < n; ++i) {
    const double arm = stream.bernoulli(p.allocation) ? 1.0 : 0.0;
    d.design(i, 0) = 1.0;
    d.design(i, 1) = arm;
    d.response(i) = stream.normal(p.mu_control + arm * p.theta, p.sigma);
  }
  return d;
}

Dataset gen_two_arm_binary(const TwoArmBinaryParams& p, int n, RngStream& stream) {
  require_n(n);
  Dataset d = empty_dataset({"intercept", "arm"}, 1, n, 1);
  for (int i = 0; i < n; ++i) {
    const double arm = stream.bernoulli(p.allocation) ? 1.0 : 0.0;
    d.design(i, 0) = 1.0;
    d.design(i, 1) = arm;
    d.response(i) = stream.bernoulli(inv_logit(p.beta0 + arm * p.beta_treatment)) ? 1.0 : 0.0;
  }
  return d;
}

Dataset gen_clustered_gaussian_dropout(const ClusteredGaussianParams& p, int n, RngStream& stream) {
  require_n(n);
  const auto visits = static_cast<std::size_t>(p.visits);
  Dataset d = empty_dataset({"intercept", "baseline", "arm", "time"}, 2, n, visits);
  for (int i = 0; i < n; ++i) {
    const double arm = stream.bernoulli(p.allocation) ? 1.0 : 0.0;
    const double baseline = stream.normal(p.baseline_mean, p.baseline_sd);
    const double u0 = stream.normal(0.0, p.sigma_intercept);
    const double u1 = stream.normal(0.0, p.sigma_slope);
    bool present = true;
    double previous = baseline;
    for (std::size_t j = 0; j < visits; ++j) {
      const auto row = static_cast<Eigen::Index>(static_cast<std::size_t>(i) * visits + j);
      const double t = static_cast<double>(j + 1) * p.visit_spacing;
      const double mean = p.intercept + p.baseline_coef * baseline + p.theta * arm + p.time_slope * t;
      const double y = mean + u0 + u1 * t + stream.normal(0.0, p.sigma_residual);
      // Always consume the dropout draw so the stream layout does not
      // depend on earlier outcomes.
      const double gate = stream.uniform();
      if (j > 0 && present) {
        const auto& m = p.dropout;
        const double hazard = inv_logit(m.intercept + m.previous_response * previous + m.time * t +
                                        m.arm * arm + m.baseline * baseline);
        if (gate < hazard) present = false;
      }
      d.design(row, 0) = 1.0;
      d.design(row, 1) = baseline;
      d.design(row, 2) = arm;
      d.design(row, 3) = t;
      d.response(row) = y;
      d.observed[static_cast<std::size_t>(row)] = present ? 1 : 0;
      previous = y;
    }
  }
  return d;
}

Dataset gen_longitudinal_poisson_copula(const PoissonCopulaParams& p, const CorrelationFactor& factor,
                                        int n, RngStream& stream) {
  require_n(n);
  const auto periods = static_cast<std::size_t>(p.post_periods) + 1;
  if (factor.dimension() != static_cast<Eigen::Index>(periods)) {
    throw std::invalid_argument("copula factor dimension does not match the number of periods");
  }
  Dataset d = empty_dataset({"intercept", "post", "arm_pre", "arm_post"}, 3, n, periods);
  const double shape = p.frailty_variance > 0.0 ? 1.0 / p.frailty_variance : 0.0;
  for (int i = 0; i < n; ++i) {
    const double arm = stream.bernoulli(p.allocation) ? 1.0 : 0.0;
    const double frailty = p.frailty_variance > 0.0 ? stream.gamma(shape, p.frailty_variance) : 1.0;
    const Eigen::VectorXd latent = factor.draw(stream);
    for (std::size_t j = 0; j < periods; ++j) {
      const auto row = static_cast<Eigen::Index>(static_cast<std::size_t>(i) * periods + j);
      const double post = j == 0 ? 0.0 : 1.0;
      const double length = j == 0 ? p.pre_length : p.post_length;
      const double eta = p.log_rate + p.post_effect * post + p.arm_pre_effect * arm * (1.0 - post) +
                         p.theta * arm * post;
      const double mean = length * frailty * std::exp(eta);
      d.design(row, 0) = 1.0;
      d.design(row, 1) = post;
      d.design(row, 2) = arm * (1.0 - post);
      d.design(row, 3) = arm * post;
      d.offset(row) = std::log(length);
      d.response(row) = poisson_quantile(std_normal_cdf(latent(static_cast<Eigen::Index>(j))), mean);
    }
  }
  return d;
}

Scenario::Scenario(std::string label, ScenarioParams params, std::optional<AnalysisRecipe> analysis,
                   std::optional<double> declared_theta)
    : label_(std::move(label)), params_(std::move(params)) {
  if (label_.empty()) throw std::invalid_argument("scenario label must not be empty");
  std::visit([this](const auto& p) { validate(p, label_); }, params_);
  analysis_ = analysis.value_or(default_recipe(family()));
  require(recipe_fits(family(), analysis_.kind), label_,
          "analysis recipe '" + std::string(to_string(analysis_.kind)) +
              "' does not apply to family '" + std::string(to_string(family())) + "'");
  require(analysis_.bootstrap_resamples == 0 || analysis_.bootstrap_resamples >= 2, label_,
          "bootstrap_resamples must be 0 (analytic) or at least 2");
  if (declared_theta && *declared_theta != true_theta()) {
    reject(label_, "true_theta " + std::to_string(*declared_theta) +
                       " is inconsistent with the model parameters (implied " +
                       std::to_string(true_theta()) + ")");
  }
  if (const auto* pc = std::get_if<PoissonCopulaParams>(&params_)) {
    copula_factor_ = std::make_shared<const CorrelationFactor>(
        copula_correlation(pc->copula, pc->post_periods + 1), "scenario '" + label_ + "'");
  }
}

Family Scenario::family() const {
  return std::visit(overloaded{
                        [](const TwoArmNormalParams&) { return Family::two_arm_normal; },
                        [](const TwoArmBinaryParams&) { return Family::two_arm_binary; },
                        [](const ClusteredGaussianParams&) { return Family::clustered_gaussian_dropout; },
                        [](const PoissonCopulaParams&) { return Family::longitudinal_poisson_copula; },
                    },
                    params_);
}

double Scenario::true_theta() const {
  return std::visit(overloaded{
                        [](const TwoArmNormalParams& p) { return p.theta; },
                        [](const TwoArmBinaryParams& p) { return p.beta_treatment; },
                        [](const ClusteredGaussianParams& p) { return p.theta; },
                        [](const PoissonCopulaParams& p) { return p.theta; },
                    },
                    params_);
}

Scenario Scenario::with_theta(double theta) const {
  ScenarioParams moved = params_;
  std::visit(overloaded{
                 [theta](TwoArmNormalParams& p) { p.theta = theta; },
                 [theta](TwoArmBinaryParams& p) { p.beta_treatment = theta; },
                 [theta](ClusteredGaussianParams& p) { p.theta = theta; },
                 [theta](PoissonCopulaParams& p) { p.theta = theta; },
             },
             moved);
  Scenario out(label_, std::move(moved), analysis_);
  out.stream_id_ = stream_id_;
  return out;
}

Scenario Scenario::with_label(std::string label) const {
  Scenario out = *this;
  out.label_ = std::move(label);
  return out;
}

std::optional<double> Scenario::analytic_lambda() const {
  if (analysis_.kind == RecipeKind::mean_diff || analysis_.kind == RecipeKind::gee_identity) {
    if (const auto* p = std::get_if<TwoArmNormalParams>(&params_)) {
      return p->sigma * std::sqrt(1.0 / p->allocation + 1.0 / (1.0 - p->allocation));
    }
  }
  if (const auto* p = std::get_if<TwoArmBinaryParams>(&params_)) {
    const double p1 = inv_logit(p->beta0 + p->beta_treatment);
    const double p0 = inv_logit(p->beta0);
    return std::sqrt(1.0 / (p->allocation * p1 * (1.0 - p1)) +
                     1.0 / ((1.0 - p->allocation) * p0 * (1.0 - p0)));
  }
  return std::nullopt;
}

Dataset Scenario::generate(int n, RngStream& stream) const {
  return std::visit(
      overloaded{
          [&](const TwoArmNormalParams& p) { return gen_two_arm_normal(p, n, stream); },
          [&](const TwoArmBinaryParams& p) { return gen_two_arm_binary(p, n, stream); },
          [&](const ClusteredGaussianParams& p) { return gen_clustered_gaussian_dropout(p, n, stream); },
          [&](const PoissonCopulaParams& p) {
            return gen_longitudinal_poisson_copula(p, *copula_factor_, n, stream);
          },
      },
      params_);
}

}  // namespace robustssd
