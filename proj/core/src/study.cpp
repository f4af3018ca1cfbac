#include "robustssd/study.hpp"

#include <stdexcept>

namespace robustssd {

void log_applied_defaults(const RunConfig& config, std::ostream& log) {
  for (const auto& line : config.applied_defaults) log << "default: " << line << "\n";
}

StudyOutput run_study(const RunConfig& config, std::ostream& log, bool write) {
  const StudyDesign& design = config.design;
  StudyOutput out;
  out.recommendation = robust_ssd(config.scenarios, design);
  const Recommendation& rec = out.recommendation;

  for (const auto& s : rec.scenarios) {
    log << "scenario '" << s.label << "': n0=" << s.n0 << " (power " << format_double(s.power_n0) << "), n1=" << s.n1
        << " (power " << format_double(s.power_n1) << "), n2=" << s.n2 << "\n";
    if (!s.notice.empty()) log << "scenario '" << s.label << "': " << s.notice << "\n";
  }
  log << "robust n = " << rec.robust_n << "\n";
  if (rec.weighted_n) log << "weighted n = " << *rec.weighted_n << "\n";

  const std::vector<int> grid = config.sweep_grid.empty() ? default_curve_grid(rec) : config.sweep_grid;
  for (std::size_t k = 0; k < rec.scenarios.size(); ++k) {
    auto rows = algorithm2_curve(rec.scenarios[k], design.hypothesis.alpha, grid);
    out.curves.insert(out.curves.end(), rows.begin(), rows.end());
  }
  if (!config.sweep_grid.empty()) {
    auto naive = run_sweep(config, log, false);
    out.curves.insert(out.curves.end(), naive.curves.begin(), naive.curves.end());
  }

  if (write) {
    std::vector<std::pair<std::string, std::string>> files{
        {"recommendation.json", recommendation_json(rec, config, utc_timestamp())},
        {"power_curves.csv", power_curves_csv(out.curves)}};
    if (config.write_svg) {
      files.emplace_back("power_curves.svg", power_curves_svg(out.curves, 1.0 - design.beta, "Predicted power"));
    }
    out.files = write_artifacts(config.output_dir, files);
  }
  return out;
}

SweepOutput run_sweep(const RunConfig& config, std::ostream& log, bool write) {
  if (config.sweep_grid.empty()) throw ConfigError("sweep_grid", "required for a naive sweep");
  const StudyDesign& design = config.design;
  SweepOutput out;
  for (std::size_t k = 0; k < config.scenarios.size(); ++k) {
    const Scenario& scenario = config.scenarios[k];
    SimulationSettings settings;
    settings.master_seed = design.master_seed;
    settings.stream_id = scenario.stream_id().value_or(k);
    settings.purpose = StreamPurpose::naive_sweep;
    settings.workers = design.workers;
    std::vector<CurvePoint> points;
    try {
      points = naive_sweep(scenario, design.hypothesis, config.sweep_grid, config.sweep_replications, settings);
    } catch (const ScenarioFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw ScenarioFailure(scenario.label(), e.what());
    }
    for (const auto& p : points) {
      log << "scenario '" << scenario.label() << "': naive n=" << p.n << " power " << format_double(p.power) << "\n";
    }
    auto rows = naive_curve(scenario.label(), points);
    out.curves.insert(out.curves.end(), rows.begin(), rows.end());
  }
  if (write) {
    std::vector<std::pair<std::string, std::string>> files{{"sweep_curves.csv", power_curves_csv(out.curves)}};
    if (config.write_svg) {
      files.emplace_back("sweep_curves.svg", power_curves_svg(out.curves, 1.0 - design.beta, "Simulated power"));
    }
    out.files = write_artifacts(config.output_dir, files);
  }
  return out;
}

std::vector<SlopeCase> run_proxy_verify(const ProxyGrid& grid) {
  std::vector<SlopeCase> cases;
  for (HypothesisKind kind : grid.kinds) {
    if (kind == HypothesisKind::equivalence) throw std::invalid_argument("slope check is not defined for equivalence");
    for (double a1 : grid.a1) {
      for (double u : grid.u) {
        for (double ratio : grid.lambda_ratio) {
          ProxyConfig cfg;
          cfg.theta0 = 0.0;
          cfg.lambda0 = 1.0;
          cfg.lambda1 = ratio;
          cfg.theta1 = kind == HypothesisKind::one_sided_upper ? -a1 : a1;
          cases.push_back({kind, a1, u, ratio, verify_theorem1_slope(cfg, u, kind, grid.n_grid)});
        }
      }
    }
  }
  return cases;
}

}  // namespace robustssd
