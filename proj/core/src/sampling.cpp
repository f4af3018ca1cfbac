#include "robustssd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robustssd/numeric.hpp"
#include "robustssd/parallel.hpp"

namespace robustssd {

namespace {
constexpr double kTargetTolerance = 1e-12;
}

double order_stat(std::size_t a, std::span<const double> values) {
  if (a < 1 || a > values.size()) {
    throw std::out_of_range("order_stat: rank " + std::to_string(a) + " outside [1, " +
                            std::to_string(values.size()) + "]");
  }
  std::vector<double> copy(values.begin(), values.end());
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(a - 1), copy.end());
  return copy[a - 1];
}

PValueSample PValueSample::from_raw(std::string scenario, int n, HypothesisKind kind, std::vector<double> p,
                                    std::vector<double> lower, std::vector<double> upper) {
  PValueSample s;
  s.scenario = std::move(scenario);
  s.n = n;
  s.kind = kind;
  std::sort(p.begin(), p.end());
  s.p_sorted = std::move(p);
  s.logits.resize(s.p_sorted.size());
  std::transform(s.p_sorted.begin(), s.p_sorted.end(), s.logits.begin(), [](double v) { return logit(v); });
  if (kind == HypothesisKind::equivalence) {
    if (lower.size() != s.p_sorted.size() || upper.size() != s.p_sorted.size()) {
      throw std::invalid_argument("PValueSample: equivalence tails must match the sample size");
    }
    std::sort(lower.begin(), lower.end());
    std::sort(upper.begin(), upper.end());
    s.lower_tail_sorted = std::move(lower);
    s.upper_tail_sorted = std::move(upper);
  }
  return s;
}

std::size_t required_rejections(double beta, std::size_t replications) {
  const double r = static_cast<double>(replications);
  const double need = std::ceil((1.0 - beta) * r - kTargetTolerance * r);
  return static_cast<std::size_t>(std::max(0.0, need));
}

double estimate_power(std::span<const double> p_values, double alpha) {
  if (p_values.empty()) throw std::invalid_argument("estimate_power: empty sample");
  const auto hits = std::count_if(p_values.begin(), p_values.end(), [alpha](double p) { return p <= alpha; });
  return static_cast<double>(hits) / static_cast<double>(p_values.size());
}

double estimate_power(const PValueSample& sample, double alpha) { return estimate_power(sample.p_sorted, alpha); }

bool power_attained(std::span<const double> p_sorted, double alpha, double beta) {
  const std::size_t need = required_rejections(beta, p_sorted.size());
  if (need == 0) return true;
  return p_sorted[need - 1] <= alpha;
}

bool meets_target(double power, double target_power) { return power >= target_power - kTargetTolerance; }

RepetitionResult run_repetition(const Scenario& scenario, const HypothesisSpec& h, int n,
                                std::uint64_t repetition, const SimulationSettings& settings) {
  RepetitionResult out;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    RngStream stream(StreamPath{settings.master_seed, settings.stream_id, static_cast<std::uint64_t>(n),
                                repetition, settings.purpose, static_cast<std::uint64_t>(attempt)});
    RngStream analysis_stream = stream.substream(static_cast<std::uint64_t>(StreamPurpose::bootstrap));
    const Dataset data = scenario.generate(n, stream);
    const EstimateResult est = estimate(data, scenario.analysis(), analysis_stream);
    out.attempts = attempt + 1;
    if (!est.usable()) continue;
    out.converged = true;
    out.se = est.se;
    if (h.kind == HypothesisKind::equivalence) {
      out.tails = equivalence_tails(est, h);
      out.p = std::max(out.tails.lower, out.tails.upper);
    } else {
      out.p = p_value(est, h);
    }
    return out;
  }
  out.p = 1.0;
  out.tails = {1.0, 1.0};
  return out;
}

PValueSample run_algorithm1(const Scenario& scenario, const HypothesisSpec& h, int n, int replications,
                            const SimulationSettings& settings) {
  if (replications < 2) throw std::invalid_argument("run_algorithm1: need at least 2 repetitions");
  if (n < 1) throw std::invalid_argument("run_algorithm1: n must be positive");
  h.validate();

  const auto count = static_cast<std::size_t>(replications);
  std::vector<RepetitionResult> results(count);
  parallel_for(count, settings.workers, [&](std::size_t r) {
    results[r] = run_repetition(scenario, h, n, static_cast<std::uint64_t>(r), settings);
  });

  std::vector<double> p(count);
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> se;
  se.reserve(count);
  const bool equivalence = h.kind == HypothesisKind::equivalence;
  if (equivalence) {
    lower.resize(count);
    upper.resize(count);
  }
  int failed = 0;
  int redraws = 0;
  for (std::size_t r = 0; r < count; ++r) {
    p[r] = results[r].p;
    if (equivalence) {
      lower[r] = results[r].tails.lower;
      upper[r] = results[r].tails.upper;
    }
    if (results[r].converged) {
      se.push_back(results[r].se);
    } else {
      ++failed;
    }
    redraws += results[r].attempts - 1;
  }

  if (static_cast<double>(failed) > kMaxNonconvergedShare * static_cast<double>(count)) {
    throw SimulationAborted("scenario '" + scenario.label() + "' at n = " + std::to_string(n) + ": " +
                            std::to_string(failed) + " of " + std::to_string(count) +
                            " repetitions failed to produce a usable estimate");
  }

  PValueSample sample = PValueSample::from_raw(scenario.label(), n, h.kind, std::move(p), std::move(lower),
                                               std::move(upper));
  sample.median_se = se.empty() ? 0.0 : median(std::move(se));
  sample.nonconverged = failed;
  sample.redraws = redraws;
  return sample;
}

}  // namespace robustssd
