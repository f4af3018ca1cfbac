#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robustssd/dgp.hpp"
#include "robustssd/logit_lines.hpp"
#include "robustssd/pvalue.hpp"
#include "robustssd/sampling.hpp"

namespace robustssd {

enum class N1StrategyKind { user_fixed, theorem_slope, geometric_step };

std::string_view to_string(N1StrategyKind kind);
N1StrategyKind n1_strategy_from_string(std::string_view name);

struct N1Strategy {
  N1StrategyKind kind = N1StrategyKind::user_fixed;
  int n1 = 0;            // user_fixed
  double factor = 2.0;   // geometric_step, > 1; applied upward or downward
  std::optional<double> lambda0;  // theorem_slope; estimated by pilot when empty

  bool operator==(const N1Strategy&) const = default;
};

// Inputs for the limiting-slope strategy: a1 = (theta1 - null) / lambda0.
struct SlopeInputs {
  double theta1 = 0.0;
  double lambda0 = 0.0;
  double lambda0_upper = 0.0;  // equivalence upper boundary; 0 = same as lambda0
};

struct N1Choice {
  int n1 = 0;
  N1StrategyKind used = N1StrategyKind::user_fixed;
  std::string notice;  // non-empty when a fallback was taken
};

// Picks the second sample size on the side required by the n0 power:
// below n0 when the target is already met, above it otherwise.
// Throws std::invalid_argument when a user-fixed n1 is on the wrong side.
N1Choice choose_n1(const PValueSample& sample0, const HypothesisSpec& h, double beta, const N1Strategy& strategy,
                   const std::optional<SlopeInputs>& slope_inputs);

// [max(20, min(n0, n1) / 4), 10 * max(n0, n1)]
SearchRange default_search_range(int n0, int n1);

// lambda estimate median(se) * sqrt(n) from a pilot sample.
double lambda_from_sample(const PValueSample& sample);

struct StudyDesign {
  HypothesisSpec hypothesis;
  double beta = 0.2;
  int replications = 10000;
  int n0 = 100;
  N1Strategy strategy;
  std::uint64_t master_seed = 0;
  int workers = 1;
  std::optional<SearchRange> search_range;
  std::vector<double> weights;  // empty: no weighted recommendation
  int pilot_replications = 1000;
};

struct ScenarioRecommendation {
  std::string label;
  int n0 = 0;
  int n1 = 0;
  int n2 = 0;
  double power_n0 = 0.0;
  double power_n1 = 0.0;
  double power_at_n2 = 0.0;
  int nonconverged_n0 = 0;
  int nonconverged_n1 = 0;
  N1StrategyKind strategy_used = N1StrategyKind::user_fixed;
  std::string notice;
  SearchRange range;
  std::uint64_t stream_id = 0;
  LogitLineFamily lines;
};

struct Recommendation {
  std::vector<ScenarioRecommendation> scenarios;
  int robust_n = 0;
  std::optional<int> weighted_n;
  double weighted_power_at_n = 0.0;
  SearchRange weighted_range;
};

class ScenarioFailure : public std::runtime_error {
 public:
  ScenarioFailure(const std::string& label, const std::string& what)
      : std::runtime_error("scenario '" + label + "': " + what), label_(label) {}
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

// Per-scenario steps of the robust procedure (two Algorithm-1 runs, line
// fit, minimal n).
ScenarioRecommendation recommend_for_scenario(const Scenario& scenario, std::uint64_t stream_id,
                                              const StudyDesign& design);

// The full robust procedure over K scenarios; the recommendation is the
// largest per-scenario n. Any scenario failure aborts the run with a
// ScenarioFailure naming it.
Recommendation robust_ssd(std::span<const Scenario> scenarios, const StudyDesign& design);

struct CurvePoint {
  int n = 0;
  double power = 0.0;
  int nonconverged = 0;
};

// Simulated power at every grid point, on naive-sweep streams.
std::vector<CurvePoint> naive_sweep(const Scenario& scenario, const HypothesisSpec& h, std::span<const int> grid,
                                    int replications, const SimulationSettings& settings);

// Null-boundary versions of a scenario for type I error checks: theta0 for
// one- and two-sided tests, both equivalence bounds otherwise.
std::vector<Scenario> null_scenarios(const Scenario& scenario, const HypothesisSpec& h);

struct DesignCheck {
  double power = 0.0;
  double type1_error = 0.0;  // worst case over the null boundaries
};

DesignCheck confirm_design(const Scenario& scenario, const HypothesisSpec& h, int n, int replications,
                           const SimulationSettings& settings);

}  // namespace robustssd
