#include "robustssd/robust_ssd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace robustssd {

std::string_view to_string(N1StrategyKind kind) {
  switch (kind) {
    case N1StrategyKind::user_fixed: return "user_fixed";
    case N1StrategyKind::theorem_slope: return "theorem_slope";
    case N1StrategyKind::geometric_step: return "geometric_step";
  }
  return "unknown";
}

N1StrategyKind n1_strategy_from_string(std::string_view name) {
  for (auto k : {N1StrategyKind::user_fixed, N1StrategyKind::theorem_slope, N1StrategyKind::geometric_step}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown n1 strategy '" + std::string(name) + "'");
}

SearchRange default_search_range(int n0, int n1) {
  const int lo = std::max(20, std::min(n0, n1) / 4);
  const int hi = std::max(lo, 10 * std::max(n0, n1));
  return {lo, hi};
}

double lambda_from_sample(const PValueSample& sample) { return sample.median_se * std::sqrt(sample.n); }

namespace {

int geometric_n1(int n0, double factor, bool downward) {
  if (!(factor > 1.0)) throw std::invalid_argument("geometric_step factor must exceed 1");
  int n1 = downward ? static_cast<int>(std::floor(n0 / factor)) : static_cast<int>(std::ceil(n0 * factor));
  if (downward) n1 = std::clamp(n1, 1, n0 - 1);
  else n1 = std::max(n1, n0 + 1);
  return n1;
}

}  // namespace

N1Choice choose_n1(const PValueSample& sample0, const HypothesisSpec& h, double beta, const N1Strategy& strategy,
                   const std::optional<SlopeInputs>& slope_inputs) {
  const int n0 = sample0.n;
  const bool downward = power_attained(sample0.p_sorted, h.alpha, beta);
  if (downward && n0 <= 1) {
    throw std::invalid_argument("choose_n1: target power already met at n0 = 1; nothing smaller to try");
  }

  N1Choice choice;
  choice.used = strategy.kind;
  switch (strategy.kind) {
    case N1StrategyKind::user_fixed: {
      const int n1 = strategy.n1;
      if (n1 < 1 || n1 == n0) throw std::invalid_argument("choose_n1: n1 must be positive and differ from n0");
      if (downward && n1 > n0) {
        throw std::invalid_argument("choose_n1: power at n0 = " + std::to_string(n0) +
                                    " already meets the target, so n1 must be below n0 (got " +
                                    std::to_string(n1) + ")");
      }
      if (!downward && n1 < n0) {
        throw std::invalid_argument("choose_n1: power at n0 = " + std::to_string(n0) +
                                    " misses the target, so n1 must exceed n0 (got " + std::to_string(n1) + ")");
      }
      choice.n1 = n1;
      return choice;
    }
    case N1StrategyKind::geometric_step:
      choice.n1 = geometric_n1(n0, strategy.factor, downward);
      return choice;
    case N1StrategyKind::theorem_slope:
      break;
  }

  auto fallback = [&](const std::string& why) {
    choice.used = N1StrategyKind::geometric_step;
    choice.notice = "theorem_slope unavailable (" + why + "); fell back to geometric_step(2)";
    choice.n1 = geometric_n1(n0, 2.0, downward);
    return choice;
  };
  if (!slope_inputs || !(slope_inputs->lambda0 > 0.0)) return fallback("no lambda0 estimate");

  const double lambda_upper = slope_inputs->lambda0_upper > 0.0 ? slope_inputs->lambda0_upper : slope_inputs->lambda0;
  double slope = 0.0;
  double upper_slope = 0.0;
  if (h.kind == HypothesisKind::equivalence) {
    const double a_lower = (slope_inputs->theta1 - h.theta0_lower) / slope_inputs->lambda0;
    const double a_upper = (slope_inputs->theta1 - h.theta0_upper) / lambda_upper;
    slope = -0.5 * a_lower * a_lower;
    upper_slope = -0.5 * a_upper * a_upper;
  } else {
    const double a1 = (slope_inputs->theta1 - h.theta0) / slope_inputs->lambda0;
    slope = upper_slope = -0.5 * a1 * a1;
  }
  if (slope == 0.0 || upper_slope == 0.0) return fallback("limiting slope is zero");

  const LogitLineFamily guess = lines_with_slope(sample0, slope, upper_slope);
  const SearchRange clamp{std::max(20, n0 / 4), std::max(std::max(20, n0 / 4), 10 * n0)};
  int n1 = clamp.hi;
  try {
    n1 = find_min_n(guess, h.alpha, beta, clamp);
  } catch (const TargetUnattainable&) {
    n1 = clamp.hi;
  }
  n1 = downward ? std::clamp(n1, 1, n0 - 1) : std::max(n1, n0 + 1);
  choice.n1 = n1;
  return choice;
}

std::vector<Scenario> null_scenarios(const Scenario& scenario, const HypothesisSpec& h) {
  std::vector<Scenario> out;
  auto at = [&](double theta) {
    std::ostringstream label;
    label << scenario.label() << "@theta=" << theta;
    out.push_back(scenario.with_theta(theta).with_label(label.str()));
  };
  if (h.kind == HypothesisKind::equivalence) {
    at(h.theta0_lower);
    at(h.theta0_upper);
  } else {
    at(h.theta0);
  }
  return out;
}

namespace {

std::optional<SlopeInputs> slope_inputs_for(const Scenario& scenario, std::uint64_t stream_id,
                                            const StudyDesign& design) {
  SlopeInputs in;
  in.theta1 = scenario.true_theta();
  if (design.strategy.lambda0) {
    in.lambda0 = *design.strategy.lambda0;
    return in;
  }
  const SimulationSettings pilot{design.master_seed, stream_id, StreamPurpose::pilot, design.workers};
  const int reps = std::max(2, design.pilot_replications);
  try {
    const auto nulls = null_scenarios(scenario, design.hypothesis);
    in.lambda0 = lambda_from_sample(run_algorithm1(nulls[0], design.hypothesis, design.n0, reps, pilot));
    if (nulls.size() > 1) {
      in.lambda0_upper = lambda_from_sample(run_algorithm1(nulls[1], design.hypothesis, design.n0, reps, pilot));
    }
  } catch (const SimulationAborted&) {
    return std::nullopt;
  }
  if (!(in.lambda0 > 0.0)) return std::nullopt;
  return in;
}

}  // namespace

ScenarioRecommendation recommend_for_scenario(const Scenario& scenario, std::uint64_t stream_id,
                                              const StudyDesign& design) {
  const HypothesisSpec& h = design.hypothesis;
  const SimulationSettings settings{design.master_seed, stream_id, StreamPurpose::replicate, design.workers};

  ScenarioRecommendation rec;
  rec.label = scenario.label();
  rec.n0 = design.n0;
  rec.stream_id = stream_id;
  try {
    const PValueSample s0 = run_algorithm1(scenario, h, design.n0, design.replications, settings);
    rec.power_n0 = estimate_power(s0, h.alpha);
    rec.nonconverged_n0 = s0.nonconverged;

    std::optional<SlopeInputs> slope;
    if (design.strategy.kind == N1StrategyKind::theorem_slope) slope = slope_inputs_for(scenario, stream_id, design);
    const N1Choice choice = choose_n1(s0, h, design.beta, design.strategy, slope);
    rec.n1 = choice.n1;
    rec.strategy_used = choice.used;
    rec.notice = choice.notice;

    const PValueSample s1 = run_algorithm1(scenario, h, rec.n1, design.replications, settings);
    rec.power_n1 = estimate_power(s1, h.alpha);
    rec.nonconverged_n1 = s1.nonconverged;

    rec.lines = fit_logit_lines(s0, s1);
    rec.range = design.search_range.value_or(default_search_range(rec.n0, rec.n1));
    rec.n2 = find_min_n(rec.lines, h.alpha, design.beta, rec.range);
    rec.power_at_n2 = predict_power(rec.lines, rec.n2, h.alpha);
  } catch (const ScenarioFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioFailure(scenario.label(), e.what());
  }
  return rec;
}

Recommendation robust_ssd(std::span<const Scenario> scenarios, const StudyDesign& design) {
  if (scenarios.empty()) throw std::invalid_argument("robust_ssd: need at least one scenario");
  design.hypothesis.validate();
  if (!(design.beta > 0.0 && design.beta < 1.0)) throw std::invalid_argument("robust_ssd: beta must lie in (0, 1)");
  if (!design.weights.empty()) validate_weights(design.weights, scenarios.size());

  Recommendation out;
  out.scenarios.reserve(scenarios.size());
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    const std::uint64_t stream_id = scenarios[k].stream_id().value_or(k);
    out.scenarios.push_back(recommend_for_scenario(scenarios[k], stream_id, design));
  }
  out.robust_n = std::max_element(out.scenarios.begin(), out.scenarios.end(), [](const auto& a, const auto& b) {
                   return a.n2 < b.n2;
                 })->n2;

  if (!design.weights.empty()) {
    std::vector<LogitLineFamily> families;
    families.reserve(out.scenarios.size());
    SearchRange range = out.scenarios.front().range;
    for (const auto& s : out.scenarios) {
      families.push_back(s.lines);
      range.lo = std::min(range.lo, s.range.lo);
      range.hi = std::max(range.hi, s.range.hi);
    }
    auto curve = [&](int n) { return weighted_power(families, design.weights, n, design.hypothesis.alpha); };
    try {
      out.weighted_n = find_min_n(curve, 1.0 - design.beta, range);
    } catch (const TargetUnattainable& e) {
      throw ScenarioFailure("weighted combination", e.what());
    }
    out.weighted_power_at_n = curve(*out.weighted_n);
    out.weighted_range = range;
  }
  return out;
}

std::vector<CurvePoint> naive_sweep(const Scenario& scenario, const HypothesisSpec& h, std::span<const int> grid,
                                    int replications, const SimulationSettings& settings) {
  if (grid.empty()) throw std::invalid_argument("naive_sweep: empty grid");
  SimulationSettings sweep = settings;
  sweep.purpose = StreamPurpose::naive_sweep;
  std::vector<CurvePoint> curve;
  curve.reserve(grid.size());
  for (int n : grid) {
    const PValueSample s = run_algorithm1(scenario, h, n, replications, sweep);
    curve.push_back({n, estimate_power(s, h.alpha), s.nonconverged});
  }
  return curve;
}

DesignCheck confirm_design(const Scenario& scenario, const HypothesisSpec& h, int n, int replications,
                           const SimulationSettings& settings) {
  SimulationSettings confirm = settings;
  confirm.purpose = StreamPurpose::confirmation;
  DesignCheck check;
  check.power = estimate_power(run_algorithm1(scenario, h, n, replications, confirm), h.alpha);
  for (const auto& null : null_scenarios(scenario, h)) {
    const double size = estimate_power(run_algorithm1(null, h, n, replications, confirm), h.alpha);
    check.type1_error = std::max(check.type1_error, size);
  }
  return check;
}

}  // namespace robustssd
