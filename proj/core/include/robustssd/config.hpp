#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "robustssd/dgp.hpp"
#include "robustssd/robust_ssd.hpp"

namespace robustssd {

// Raised for malformed or invalid configuration. The message starts with
// the JSON path of the offending field, e.g. "scenarios[1].eta.sigma: ...".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Everything one robust sample-size study needs. Validated in full before
// any simulation runs.
struct RunConfig {
  StudyDesign design;
  std::vector<Scenario> scenarios;
  std::filesystem::path output_dir = "robustssd_out";
  std::vector<int> sweep_grid;
  int sweep_replications = 0;
  bool write_svg = true;

  // "key = value" for every default filled in by the parser.
  std::vector<std::string> applied_defaults;
};

RunConfig parse_config_text(std::string_view text, std::string_view source = "<config>");
RunConfig parse_config(const std::filesystem::path& path);

// Canonical JSON with every default written out; parses back to an
// equivalent RunConfig.
std::string serialize_config(const RunConfig& config);

}  // namespace robustssd
