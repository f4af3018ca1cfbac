#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustssd/dgp.hpp"
#include "robustssd/pvalue.hpp"
#include "robustssd/rng.hpp"

namespace robustssd {

// a-th smallest element (1-based) of `values`. Throws std::out_of_range
// unless 1 <= a <= values.size().
double order_stat(std::size_t a, std::span<const double> values);

// Estimated sampling distribution of p-values for one scenario at one n.
struct PValueSample {
  std::string scenario;
  int n = 0;
  HypothesisKind kind = HypothesisKind::one_sided_lower;
  std::vector<double> p_sorted;  // ascending
  std::vector<double> logits;    // logit(clip(p_sorted)), aligned

  // Equivalence tests: the one-sided constituents, each ascending.
  std::vector<double> lower_tail_sorted;
  std::vector<double> upper_tail_sorted;

  double median_se = 0.0;
  int nonconverged = 0;  // repetitions that exhausted their redraws
  int redraws = 0;       // extra attempts spent on failed fits

  std::size_t size() const { return p_sorted.size(); }

  // Sorts the raw per-repetition values and fills the derived fields.
  static PValueSample from_raw(std::string scenario, int n, HypothesisKind kind, std::vector<double> p,
                               std::vector<double> lower = {}, std::vector<double> upper = {});
};

// Smallest count of rejections that meets the target, ceil((1 - beta) R)
// computed with a small tolerance against representation error.
std::size_t required_rejections(double beta, std::size_t replications);

// Share of p-values at or below alpha.
double estimate_power(std::span<const double> p_values, double alpha);
double estimate_power(const PValueSample& sample, double alpha);

// True when estimated power reaches 1 - beta, decided through the order
// statistic xi(ceil((1 - beta) R), p) <= alpha.
bool power_attained(std::span<const double> p_sorted, double alpha, double beta);
bool meets_target(double power, double target_power);

struct SimulationSettings {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
  StreamPurpose purpose = StreamPurpose::replicate;
  int workers = 1;
};

inline constexpr int kMaxAttempts = 5;
inline constexpr double kMaxNonconvergedShare = 0.05;

class SimulationAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One repetition of Algorithm 1: generate, analyse, test. A failed fit is
// redrawn on a fresh attempt stream up to kMaxAttempts times, then scored
// as p = 1.
struct RepetitionResult {
  double p = 1.0;
  EquivalenceTails tails;
  double se = 0.0;
  int attempts = 0;
  bool converged = false;
};

RepetitionResult run_repetition(const Scenario& scenario, const HypothesisSpec& h, int n,
                                std::uint64_t repetition, const SimulationSettings& settings);

// Algorithm 1. Throws SimulationAborted (naming the scenario) when more
// than 5% of repetitions end without a usable fit.
PValueSample run_algorithm1(const Scenario& scenario, const HypothesisSpec& h, int n, int replications,
                            const SimulationSettings& settings);

}  // namespace robustssd
