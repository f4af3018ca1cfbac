#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "robustssd/dataset.hpp"
#include "robustssd/rng.hpp"

namespace robustssd {

enum class FitStatus {
  ok,
  not_converged,
  separation,
  degenerate_se,
  insufficient_data,
};

std::string_view to_string(FitStatus status);

struct EstimateResult {
  double theta_hat = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  // Inverse-information standard error where one exists (GEE, logistic).
  double model_se = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  int iterations = 0;
  FitStatus status = FitStatus::not_converged;

  // A result may feed a p-value only when this holds.
  bool usable() const;
};

enum class RecipeKind { mean_diff, logistic, gee_identity, gee_log };
enum class Link { identity, log };

std::string_view to_string(RecipeKind kind);
RecipeKind recipe_kind_from_string(std::string_view name);

// How a simulated dataset is analysed. With bootstrap_resamples > 0 the
// point estimate still comes from `kind`, but the standard error is the
// cluster-bootstrap MAD estimate.
struct AnalysisRecipe {
  RecipeKind kind = RecipeKind::mean_diff;
  int bootstrap_resamples = 0;

  bool operator==(const AnalysisRecipe&) const = default;
};

// Difference in means between arm == 1 and arm == 0 for single-row units,
// arm read from the dataset's theta column. Welch-type standard error.
EstimateResult estimate_mean_diff(const Dataset& data);

// Bernoulli regression on all observed rows; Newton-Raphson with step
// halving. Standard error from the inverse observed information.
EstimateResult estimate_logistic(const Dataset& data, std::size_t coef_index);

// Independence-working-correlation GEE (Gaussian/identity or
// Poisson/log) solved by IRLS, with the cluster-robust sandwich
// A^-1 B A^-1 standard error.
EstimateResult estimate_gee(const Dataset& data, Link link, std::size_t coef_index);

inline constexpr double kMadConsistency = 0.6744897501960817;  // Phi^-1(0.75)

// Nonparametric cluster bootstrap over explicit resample plans. The
// standard error is median_b |theta*_b - median(theta*)| / Phi^-1(0.75).
EstimateResult bootstrap_se(const Dataset& data, RecipeKind inner,
                            std::span<const std::vector<std::size_t>> plans);

// Draws `resamples` plans of data.units() ISUs with replacement.
EstimateResult bootstrap_se(const Dataset& data, RecipeKind inner, int resamples,
                            RngStream& stream);

EstimateResult estimate_point(const Dataset& data, RecipeKind kind);

// Full recipe, bootstrap included. `stream` is only consumed by the
// bootstrap.
EstimateResult estimate(const Dataset& data, const AnalysisRecipe& recipe, RngStream& stream);

}  // namespace robustssd
