#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include "robustssd/config.hpp"
#include "robustssd/report.hpp"

namespace robustssd {

// Prints every default the parser filled in.
void log_applied_defaults(const RunConfig& config, std::ostream& log);

struct StudyOutput {
  Recommendation recommendation;
  std::vector<CurveRow> curves;
  std::vector<std::filesystem::path> files;
};

// Robust sample size over all scenarios, plus predicted power curves (and
// naive curves when the configuration carries a sweep grid). Files are
// written only after every scenario has finished; nothing is written when
// `write` is false.
StudyOutput run_study(const RunConfig& config, std::ostream& log, bool write = true);

struct SweepOutput {
  std::vector<CurveRow> curves;
  std::vector<std::filesystem::path> files;
};

// Naive power at every point of the configured sweep grid.
SweepOutput run_sweep(const RunConfig& config, std::ostream& log, bool write = true);

struct ProxyGrid {
  std::vector<HypothesisKind> kinds{HypothesisKind::one_sided_lower, HypothesisKind::one_sided_upper,
                                    HypothesisKind::two_sided};
  std::vector<double> a1{0.5, 1.0, 2.0};
  std::vector<double> u{0.25, 0.5, 0.75};
  std::vector<double> lambda_ratio{0.5, 1.0, 2.0};
  std::vector<double> n_grid{1e2, 1e3, 1e4, 1e5};
};

// Limiting-slope check of the proxy logit for every grid combination, with
// theta0 = 0 and lambda0 = 1; theta1 sits a1 null-sds on the alternative
// side of the null.
std::vector<SlopeCase> run_proxy_verify(const ProxyGrid& grid);

}  // namespace robustssd
