#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "robustssd/config.hpp"
#include "robustssd/report.hpp"
#include "robustssd/study.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kBadConfig = 2, kAborted = 3 };

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("-c,--config", flags.config, "study configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "override the master seed");
  cmd->add_option("-j,--workers", flags.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("-o,--out", flags.out, "output directory");
}

robustssd::RunConfig load(const CommonFlags& flags) {
  robustssd::RunConfig cfg = robustssd::parse_config(flags.config);
  if (flags.seed) cfg.design.master_seed = *flags.seed;
  if (flags.workers) cfg.design.workers = *flags.workers;
  if (flags.out) cfg.output_dir = *flags.out;
  return cfg;
}

void report_files(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust simulation-based sample size determination"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  auto* run = app.add_subcommand("run", "robust sample size over all scenarios");
  add_common(run, run_flags);

  CommonFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "simulated power over the configured grid");
  add_common(sweep, sweep_flags);

  CommonFlags validate_flags;
  auto* validate = app.add_subcommand("validate", "check a configuration without simulating");
  validate->add_option("-c,--config", validate_flags.config, "study configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  bool print_canonical = false;
  validate->add_flag("--print", print_canonical, "print the configuration with all defaults");

  robustssd::ProxyGrid grid;
  std::vector<std::string> kind_names;
  std::optional<std::string> proxy_out;
  auto* proxy = app.add_subcommand("proxy-verify", "limiting-slope table for the normal proxy");
  proxy->add_option("--a1", grid.a1, "standardized effects");
  proxy->add_option("--u", grid.u, "quantile points in (0, 1)");
  proxy->add_option("--ratio", grid.lambda_ratio, "lambda1 / lambda0 ratios");
  proxy->add_option("--n", grid.n_grid, "increasing sample-size grid");
  proxy->add_option("--kind", kind_names, "one_sided_lower, one_sided_upper, two_sided");
  proxy->add_option("-o,--out", proxy_out, "directory for proxy_slopes.csv (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto cfg = load(run_flags);
      robustssd::log_applied_defaults(cfg, std::cerr);
      report_files(robustssd::run_study(cfg, std::cerr).files);
    } else if (sweep->parsed()) {
      const auto cfg = load(sweep_flags);
      robustssd::log_applied_defaults(cfg, std::cerr);
      report_files(robustssd::run_sweep(cfg, std::cerr).files);
    } else if (validate->parsed()) {
      const auto cfg = robustssd::parse_config(validate_flags.config);
      robustssd::log_applied_defaults(cfg, std::cerr);
      if (print_canonical) std::cout << robustssd::serialize_config(cfg) << "\n";
      std::cerr << "configuration ok: " << cfg.scenarios.size() << " scenario(s)\n";
    } else if (proxy->parsed()) {
      if (!kind_names.empty()) {
        grid.kinds.clear();
        for (const auto& name : kind_names) grid.kinds.push_back(robustssd::hypothesis_kind_from_string(name));
      }
      const auto cases = robustssd::run_proxy_verify(grid);
      const std::string table = robustssd::slope_table_csv(cases);
      if (proxy_out) {
        const std::vector<std::pair<std::string, std::string>> files{{"proxy_slopes.csv", table}};
        report_files(robustssd::write_artifacts(*proxy_out, files));
      } else {
        std::cout << table;
      }
    }
  } catch (const robustssd::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "aborted: " << e.what() << "\n";
    return kAborted;
  }
  return kOk;
}
