#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "robustssd/config.hpp"
#include "robustssd/proxy.hpp"
#include "robustssd/robust_ssd.hpp"

namespace robustssd {

// Shortest text that parses back to the same double (at most 17 digits).
std::string format_double(double value);

// UTC, ISO 8601, second resolution.
std::string utc_timestamp();

// The recommendation document. `generated_at` is the only field that may
// differ between reruns with the same configuration; omit it to get a
// fully reproducible document.
std::string recommendation_json(const Recommendation& rec, const RunConfig& config,
                                std::optional<std::string> generated_at);

struct CurveRow {
  std::string scenario;
  int n = 0;
  std::string method;  // "algorithm2" or "naive"
  double power = 0.0;
};

std::vector<CurveRow> algorithm2_curve(const ScenarioRecommendation& rec, double alpha, std::span<const int> grid);
std::vector<CurveRow> naive_curve(const std::string& scenario, std::span<const CurvePoint> points);

// Grid used for plotting when the configuration gives none.
std::vector<int> default_curve_grid(const Recommendation& rec, int points = 40);

std::string power_curves_csv(std::span<const CurveRow> rows);

// Power against n, one colour per scenario, algorithm2 solid and naive as
// markers, with a dotted horizontal line at the target power.
std::string power_curves_svg(std::span<const CurveRow> rows, double target_power, std::string_view title);

struct SlopeCase {
  HypothesisKind kind = HypothesisKind::one_sided_lower;
  double a1 = 0.0;
  double u = 0.5;
  double lambda_ratio = 1.0;  // lambda1 / lambda0
  SlopeCheck check;
};

std::string slope_table_csv(std::span<const SlopeCase> cases);

// Writes every (file name, content) pair into `dir`. Content goes to
// temporaries first; on any failure everything written so far is removed
// and the error is rethrown.
std::vector<std::filesystem::path> write_artifacts(
    const std::filesystem::path& dir, std::span<const std::pair<std::string, std::string>> files);

}  // namespace robustssd
