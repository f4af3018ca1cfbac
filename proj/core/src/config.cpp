#include "robustssd/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace robustssd {

using nlohmann::json;

namespace {

std::string show(const json& v) { return v.dump(); }

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Reader {
 public:
  Reader(const json& obj, std::string path, std::vector<std::string>& defaults)
      : obj_(obj), path_(std::move(path)), defaults_(defaults) {
    if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string path_of(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  bool has(std::string_view key) const { return obj_.contains(std::string(key)); }

  const json& child(std::string_view key) {
    const std::string k(key);
    if (!obj_.contains(k)) throw ConfigError(path_of(key), "missing required key");
    used_.push_back(k);
    return obj_.at(k);
  }

  template <class T>
  T required(std::string_view key) {
    return convert<T>(child(key), path_of(key));
  }

  template <class T>
  T optional(std::string_view key, T fallback) {
    if (has(key)) return required<T>(key);
    std::ostringstream note;
    note << path_of(key) << " = " << show(json(fallback));
    defaults_.push_back(note.str());
    return fallback;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(used_.begin(), used_.end(), it.key()) == used_.end()) {
        throw ConfigError(path_of(it.key()), "unknown key");
      }
    }
  }

  template <class T>
  static T convert(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(path, "expected a boolean, got " + show(v));
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (v.is_number_integer()) return v.get<T>();
      if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d && std::fabs(d) < 9e15) return static_cast<T>(d);
      }
      throw ConfigError(path, "expected an integer, got " + show(v));
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(path, "expected a number, got " + show(v));
      return v.get<T>();
    } else {
      if (!v.is_string()) throw ConfigError(path, "expected a string, got " + show(v));
      return v.get<std::string>();
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& defaults_;
  std::vector<std::string> used_;
};

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

HypothesisSpec read_hypothesis(Reader& top, std::vector<std::string>& defaults) {
  Reader r(top.child("hypothesis"), top.path_of("hypothesis"), defaults);
  HypothesisSpec h;
  const std::string kind = r.required<std::string>("kind");
  try {
    h.kind = hypothesis_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.path_of("kind"), e.what());
  }
  if (h.kind == HypothesisKind::equivalence) {
    h.theta0_lower = r.required<double>("theta0_lower");
    h.theta0_upper = r.required<double>("theta0_upper");
    check(h.theta0_lower < h.theta0_upper, r.path_of("theta0_lower"),
          "equivalence bounds require theta0_lower < theta0_upper");
  } else {
    h.theta0 = r.required<double>("theta0");
  }
  r.finish();
  return h;
}

N1Strategy read_strategy(Reader& top, std::vector<std::string>& defaults) {
  N1Strategy s;
  if (!top.has("n1_strategy")) {
    s.kind = N1StrategyKind::user_fixed;
    defaults.push_back(top.path_of("n1_strategy") + " = {\"kind\":\"user_fixed\"}");
  } else {
    Reader r(top.child("n1_strategy"), top.path_of("n1_strategy"), defaults);
    try {
      s.kind = n1_strategy_from_string(r.required<std::string>("kind"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(r.path_of("kind"), e.what());
    }
    switch (s.kind) {
      case N1StrategyKind::user_fixed:
        if (r.has("n1")) s.n1 = r.required<int>("n1");
        break;
      case N1StrategyKind::geometric_step:
        s.factor = r.optional<double>("factor", 2.0);
        check(s.factor > 1.0, r.path_of("factor"), "must exceed 1");
        break;
      case N1StrategyKind::theorem_slope:
        if (r.has("lambda0")) {
          s.lambda0 = r.required<double>("lambda0");
          check(*s.lambda0 > 0.0, r.path_of("lambda0"), "must be positive");
        }
        break;
    }
    r.finish();
  }
  if (s.kind == N1StrategyKind::user_fixed) {
    if (top.has("n1")) s.n1 = top.required<int>("n1");
    check(s.n1 >= 1, top.path_of("n1"), "user_fixed strategy requires a positive n1");
  }
  return s;
}

AnalysisRecipe read_analysis(Reader& sr, Family family, std::vector<std::string>& defaults) {
  AnalysisRecipe recipe = default_recipe(family);
  if (!sr.has("analysis")) {
    defaults.push_back(sr.path_of("analysis") + " = {\"recipe\":\"" + std::string(to_string(recipe.kind)) + "\"}");
    return recipe;
  }
  Reader r(sr.child("analysis"), sr.path_of("analysis"), defaults);
  const std::string name = r.optional<std::string>("recipe", std::string(to_string(recipe.kind)));
  try {
    recipe.kind = recipe_kind_from_string(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.path_of("recipe"), e.what());
  }
  recipe.bootstrap_resamples = r.optional<int>("bootstrap_resamples", 0);
  check(recipe.bootstrap_resamples == 0 || recipe.bootstrap_resamples >= 2, r.path_of("bootstrap_resamples"),
        "must be 0 (analytic standard error) or at least 2");
  r.finish();
  return recipe;
}

Eigen::MatrixXd read_matrix(const json& v, const std::string& path) {
  check(v.is_array() && !v.empty(), path, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd m(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    check(row.is_array() && static_cast<Eigen::Index>(row.size()) == rows, rp, "expected a square matrix");
    for (Eigen::Index j = 0; j < rows; ++j) {
      m(i, j) = Reader::convert<double>(row[static_cast<std::size_t>(j)], rp + "[" + std::to_string(j) + "]");
    }
  }
  return m;
}

ScenarioParams read_params(Reader& sr, Family family, std::vector<std::string>& defaults) {
  Reader eta(sr.child("eta"), sr.path_of("eta"), defaults);
  json empty_rho = json::object();
  const bool has_rho = sr.has("rho");
  Reader rho(has_rho ? sr.child("rho") : empty_rho, sr.path_of("rho"), defaults);

  ScenarioParams params;
  switch (family) {
    case Family::two_arm_normal: {
      TwoArmNormalParams p;
      p.theta = eta.required<double>("theta");
      p.mu_control = eta.optional<double>("mu_control", p.mu_control);
      p.sigma = eta.required<double>("sigma");
      p.allocation = rho.optional<double>("allocation", p.allocation);
      params = p;
      break;
    }
    case Family::two_arm_binary: {
      TwoArmBinaryParams p;
      p.beta0 = eta.required<double>("beta0");
      p.beta_treatment = eta.required<double>("beta_treatment");
      p.allocation = rho.optional<double>("allocation", p.allocation);
      params = p;
      break;
    }
    case Family::clustered_gaussian_dropout: {
      ClusteredGaussianParams p;
      p.intercept = eta.optional<double>("intercept", p.intercept);
      p.baseline_coef = eta.optional<double>("baseline_coef", p.baseline_coef);
      p.theta = eta.required<double>("theta");
      p.time_slope = eta.optional<double>("time_slope", p.time_slope);
      p.sigma_intercept = eta.optional<double>("sigma_intercept", p.sigma_intercept);
      p.sigma_slope = eta.optional<double>("sigma_slope", p.sigma_slope);
      p.sigma_residual = eta.optional<double>("sigma_residual", p.sigma_residual);
      p.visits = rho.optional<int>("visits", p.visits);
      p.visit_spacing = rho.optional<double>("visit_spacing", p.visit_spacing);
      p.baseline_mean = rho.optional<double>("baseline_mean", p.baseline_mean);
      p.baseline_sd = rho.optional<double>("baseline_sd", p.baseline_sd);
      p.allocation = rho.optional<double>("allocation", p.allocation);
      if (rho.has("dropout")) {
        // Only covariates the generator actually produces may drive dropout.
        Reader d(rho.child("dropout"), rho.path_of("dropout"), defaults);
        p.dropout.intercept = d.optional<double>("intercept", p.dropout.intercept);
        p.dropout.previous_response = d.optional<double>("previous_response", 0.0);
        p.dropout.time = d.optional<double>("time", 0.0);
        p.dropout.arm = d.optional<double>("arm", 0.0);
        p.dropout.baseline = d.optional<double>("baseline", 0.0);
        d.finish();
      } else {
        defaults.push_back(rho.path_of("dropout") + " = none");
      }
      params = p;
      break;
    }
    case Family::longitudinal_poisson_copula: {
      PoissonCopulaParams p;
      p.log_rate = eta.required<double>("log_rate");
      p.post_effect = eta.optional<double>("post_effect", p.post_effect);
      p.arm_pre_effect = eta.optional<double>("arm_pre_effect", p.arm_pre_effect);
      p.theta = eta.required<double>("theta");
      p.post_periods = rho.optional<int>("post_periods", p.post_periods);
      p.pre_length = rho.optional<double>("pre_length", p.pre_length);
      p.post_length = rho.optional<double>("post_length", p.post_length);
      p.frailty_variance = rho.optional<double>("frailty_variance", p.frailty_variance);
      p.allocation = rho.optional<double>("allocation", p.allocation);
      if (rho.has("copula")) {
        Reader c(rho.child("copula"), rho.path_of("copula"), defaults);
        try {
          p.copula.kind = copula_kind_from_string(c.required<std::string>("kind"));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(c.path_of("kind"), e.what());
        }
        if (p.copula.kind == CopulaKind::exchangeable || p.copula.kind == CopulaKind::ar1) {
          p.copula.rho = c.required<double>("rho");
        } else if (p.copula.kind == CopulaKind::unstructured) {
          p.copula.matrix = read_matrix(c.child("matrix"), c.path_of("matrix"));
        }
        c.finish();
      } else {
        defaults.push_back(rho.path_of("copula") + " = {\"kind\":\"independent\"}");
      }
      params = p;
      break;
    }
  }
  eta.finish();
  rho.finish();
  return params;
}

Scenario read_scenario(const json& v, const std::string& path, std::vector<std::string>& defaults) {
  Reader r(v, path, defaults);
  const std::string label = r.required<std::string>("label");
  check(!label.empty(), r.path_of("label"), "must not be empty");
  Family family;
  try {
    family = family_from_string(r.required<std::string>("family"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.path_of("family"), e.what());
  }
  ScenarioParams params = read_params(r, family, defaults);
  const AnalysisRecipe recipe = read_analysis(r, family, defaults);
  std::optional<double> declared;
  if (r.has("true_theta")) declared = r.required<double>("true_theta");
  std::optional<std::uint64_t> stream_id;
  if (r.has("stream_id")) stream_id = r.required<std::uint64_t>("stream_id");
  r.finish();

  try {
    Scenario s(label, std::move(params), recipe, declared);
    if (stream_id) s.set_stream_id(*stream_id);
    return s;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

std::vector<int> read_grid(const json& v, const std::string& path, std::vector<std::string>& defaults) {
  std::vector<int> grid;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      grid.push_back(Reader::convert<int>(v[i], path + "[" + std::to_string(i) + "]"));
    }
  } else {
    Reader r(v, path, defaults);
    const int from = r.required<int>("from");
    const int to = r.required<int>("to");
    const int step = r.required<int>("step");
    r.finish();
    check(step > 0 && from >= 1 && to >= from, path, "need 1 <= from <= to and step > 0");
    for (int n = from; n <= to; n += step) grid.push_back(n);
  }
  check(!grid.empty(), path, "grid must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    check(grid[i] >= 1, path + "[" + std::to_string(i) + "]", "sample sizes must be positive");
    check(i == 0 || grid[i] > grid[i - 1], path, "grid must be strictly increasing");
  }
  return grid;
}

RunConfig read_config(const json& root) {
  RunConfig cfg;
  auto& defaults = cfg.applied_defaults;
  Reader r(root, "", defaults);

  StudyDesign& d = cfg.design;
  d.hypothesis = read_hypothesis(r, defaults);
  d.hypothesis.alpha = r.required<double>("alpha");
  check(d.hypothesis.alpha > 0.0 && d.hypothesis.alpha < 1.0, "alpha", "must lie in (0, 1)");

  if (r.has("beta") && r.has("target_power")) throw ConfigError("target_power", "give either beta or target_power");
  if (r.has("target_power")) {
    const double target = r.required<double>("target_power");
    check(target > 0.0 && target < 1.0, "target_power", "must lie in (0, 1)");
    d.beta = 1.0 - target;
  } else {
    d.beta = r.required<double>("beta");
    check(d.beta > 0.0 && d.beta < 1.0, "beta", "must lie in (0, 1)");
  }

  d.replications = r.optional<int>("replications", 10000);
  check(d.replications >= 2, "replications", "must be at least 2");
  d.n0 = r.required<int>("n0");
  check(d.n0 >= 2, "n0", "must be at least 2");
  d.strategy = read_strategy(r, defaults);
  if (d.strategy.kind == N1StrategyKind::user_fixed) check(d.strategy.n1 != d.n0, "n1", "must differ from n0");
  d.master_seed = r.optional<std::uint64_t>("seed", 1);
  d.workers = r.optional<int>("workers", static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  check(d.workers >= 1, "workers", "must be at least 1");
  d.pilot_replications = r.optional<int>("pilot_replications", 1000);
  check(d.pilot_replications >= 2, "pilot_replications", "must be at least 2");

  if (r.has("search_range")) {
    const json& v = r.child("search_range");
    check(v.is_array() && v.size() == 2, "search_range", "expected [lo, hi]");
    SearchRange range{Reader::convert<int>(v[0], "search_range[0]"), Reader::convert<int>(v[1], "search_range[1]")};
    check(range.lo >= 1 && range.hi >= range.lo, "search_range", "need 1 <= lo <= hi");
    d.search_range = range;
  }

  cfg.output_dir = r.optional<std::string>("output_dir", "robustssd_out");
  cfg.write_svg = r.optional<bool>("svg", true);
  if (r.has("sweep_grid")) cfg.sweep_grid = read_grid(r.child("sweep_grid"), "sweep_grid", defaults);
  cfg.sweep_replications = r.optional<int>("sweep_replications", d.replications);
  check(cfg.sweep_replications >= 2, "sweep_replications", "must be at least 2");

  const json& list = r.child("scenarios");
  check(list.is_array() && !list.empty(), "scenarios", "expected a non-empty array");
  for (std::size_t k = 0; k < list.size(); ++k) {
    cfg.scenarios.push_back(read_scenario(list[k], "scenarios[" + std::to_string(k) + "]", defaults));
  }
  for (std::size_t a = 0; a < cfg.scenarios.size(); ++a) {
    for (std::size_t b = a + 1; b < cfg.scenarios.size(); ++b) {
      check(cfg.scenarios[a].label() != cfg.scenarios[b].label(), "scenarios[" + std::to_string(b) + "].label",
            "duplicate label '" + cfg.scenarios[b].label() + "'");
    }
  }

  if (r.has("weights")) {
    const json& w = r.child("weights");
    check(w.is_array(), "weights", "expected an array");
    for (std::size_t i = 0; i < w.size(); ++i) {
      d.weights.push_back(Reader::convert<double>(w[i], "weights[" + std::to_string(i) + "]"));
    }
    try {
      validate_weights(d.weights, cfg.scenarios.size());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("weights", e.what());
    }
  }
  r.finish();
  return cfg;
}

json params_json(const ScenarioParams& params, json& rho) {
  json eta;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TwoArmNormalParams>) {
          eta = {{"theta", p.theta}, {"mu_control", p.mu_control}, {"sigma", p.sigma}};
          rho = {{"allocation", p.allocation}};
        } else if constexpr (std::is_same_v<T, TwoArmBinaryParams>) {
          eta = {{"beta0", p.beta0}, {"beta_treatment", p.beta_treatment}};
          rho = {{"allocation", p.allocation}};
        } else if constexpr (std::is_same_v<T, ClusteredGaussianParams>) {
          eta = {{"intercept", p.intercept},         {"baseline_coef", p.baseline_coef},
                 {"theta", p.theta},                 {"time_slope", p.time_slope},
                 {"sigma_intercept", p.sigma_intercept}, {"sigma_slope", p.sigma_slope},
                 {"sigma_residual", p.sigma_residual}};
          rho = {{"visits", p.visits},
                 {"visit_spacing", p.visit_spacing},
                 {"baseline_mean", p.baseline_mean},
                 {"baseline_sd", p.baseline_sd},
                 {"allocation", p.allocation},
                 {"dropout",
                  {{"intercept", p.dropout.intercept},
                   {"previous_response", p.dropout.previous_response},
                   {"time", p.dropout.time},
                   {"arm", p.dropout.arm},
                   {"baseline", p.dropout.baseline}}}};
        } else {
          eta = {{"log_rate", p.log_rate},
                 {"post_effect", p.post_effect},
                 {"arm_pre_effect", p.arm_pre_effect},
                 {"theta", p.theta}};
          json copula = {{"kind", std::string(to_string(p.copula.kind))}};
          if (p.copula.kind == CopulaKind::exchangeable || p.copula.kind == CopulaKind::ar1) {
            copula["rho"] = p.copula.rho;
          } else if (p.copula.kind == CopulaKind::unstructured) {
            json m = json::array();
            for (Eigen::Index i = 0; i < p.copula.matrix.rows(); ++i) {
              json row = json::array();
              for (Eigen::Index j = 0; j < p.copula.matrix.cols(); ++j) row.push_back(p.copula.matrix(i, j));
              m.push_back(row);
            }
            copula["matrix"] = m;
          }
          rho = {{"post_periods", p.post_periods},
                 {"pre_length", p.pre_length},
                 {"post_length", p.post_length},
                 {"frailty_variance", p.frailty_variance},
                 {"allocation", p.allocation},
                 {"copula", copula}};
        }
      },
      params);
  return eta;
}

}  // namespace

RunConfig parse_config_text(std::string_view text, std::string_view source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(source), std::string("malformed JSON: ") + e.what());
  }
  return read_config(root);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open configuration file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

std::string serialize_config(const RunConfig& config) {
  const StudyDesign& d = config.design;
  json root;
  json h = {{"kind", std::string(to_string(d.hypothesis.kind))}};
  if (d.hypothesis.kind == HypothesisKind::equivalence) {
    h["theta0_lower"] = d.hypothesis.theta0_lower;
    h["theta0_upper"] = d.hypothesis.theta0_upper;
  } else {
    h["theta0"] = d.hypothesis.theta0;
  }
  root["hypothesis"] = h;
  root["alpha"] = d.hypothesis.alpha;
  root["beta"] = d.beta;
  root["replications"] = d.replications;
  root["n0"] = d.n0;

  json strategy = {{"kind", std::string(to_string(d.strategy.kind))}};
  switch (d.strategy.kind) {
    case N1StrategyKind::user_fixed: strategy["n1"] = d.strategy.n1; break;
    case N1StrategyKind::geometric_step: strategy["factor"] = d.strategy.factor; break;
    case N1StrategyKind::theorem_slope:
      if (d.strategy.lambda0) strategy["lambda0"] = *d.strategy.lambda0;
      break;
  }
  root["n1_strategy"] = strategy;
  root["seed"] = d.master_seed;
  root["workers"] = d.workers;
  root["pilot_replications"] = d.pilot_replications;
  if (d.search_range) root["search_range"] = {d.search_range->lo, d.search_range->hi};
  if (!d.weights.empty()) root["weights"] = d.weights;
  root["output_dir"] = config.output_dir.string();
  root["svg"] = config.write_svg;
  if (!config.sweep_grid.empty()) root["sweep_grid"] = config.sweep_grid;
  root["sweep_replications"] = config.sweep_replications;

  json scenarios = json::array();
  for (const auto& s : config.scenarios) {
    json rho;
    json eta = params_json(s.params(), rho);
    json entry = {{"label", s.label()},
                  {"family", std::string(to_string(s.family()))},
                  {"eta", eta},
                  {"rho", rho},
                  {"true_theta", s.true_theta()},
                  {"analysis",
                   {{"recipe", std::string(to_string(s.analysis().kind))},
                    {"bootstrap_resamples", s.analysis().bootstrap_resamples}}}};
    if (s.stream_id()) entry["stream_id"] = *s.stream_id();
    scenarios.push_back(entry);
  }
  root["scenarios"] = scenarios;
  return root.dump(2);
}

}  // namespace robustssd
