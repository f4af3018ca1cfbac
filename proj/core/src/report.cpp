#include "robustssd/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace robustssd {

using nlohmann::ordered_json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

ordered_json hypothesis_json(const HypothesisSpec& h) {
  ordered_json j;
  j["kind"] = std::string(to_string(h.kind));
  if (h.kind == HypothesisKind::equivalence) {
    j["theta0_lower"] = h.theta0_lower;
    j["theta0_upper"] = h.theta0_upper;
  } else {
    j["theta0"] = h.theta0;
  }
  return j;
}

const Scenario* find_scenario(const RunConfig& config, const std::string& label) {
  for (const auto& s : config.scenarios) {
    if (s.label() == label) return &s;
  }
  return nullptr;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string recommendation_json(const Recommendation& rec, const RunConfig& config,
                                std::optional<std::string> generated_at) {
  const StudyDesign& d = config.design;
  ordered_json root;
  root["schema"] = "robustssd.recommendation/1";
  if (generated_at) root["generated_at"] = *generated_at;
  root["hypothesis"] = hypothesis_json(d.hypothesis);
  root["alpha"] = d.hypothesis.alpha;
  root["beta"] = d.beta;
  root["target_power"] = 1.0 - d.beta;
  root["replications"] = d.replications;
  root["n0"] = d.n0;
  root["seed"] = d.master_seed;
  root["n1_strategy"] = std::string(to_string(d.strategy.kind));
  root["robust_n"] = rec.robust_n;

  ordered_json list = ordered_json::array();
  for (const auto& s : rec.scenarios) {
    ordered_json j;
    j["label"] = s.label;
    if (const Scenario* scenario = find_scenario(config, s.label)) {
      j["family"] = std::string(to_string(scenario->family()));
      j["recipe"] = std::string(to_string(scenario->analysis().kind));
      j["bootstrap_resamples"] = scenario->analysis().bootstrap_resamples;
      j["true_theta"] = scenario->true_theta();
    }
    j["stream_id"] = s.stream_id;
    j["n0"] = s.n0;
    j["n1"] = s.n1;
    j["n2"] = s.n2;
    j["power_n0"] = s.power_n0;
    j["power_n1"] = s.power_n1;
    j["predicted_power_n2"] = s.power_at_n2;
    j["nonconverged_n0"] = s.nonconverged_n0;
    j["nonconverged_n1"] = s.nonconverged_n1;
    j["n1_strategy_used"] = std::string(to_string(s.strategy_used));
    if (!s.notice.empty()) j["notice"] = s.notice;
    j["search_range"] = {s.range.lo, s.range.hi};
    list.push_back(j);
  }
  root["scenarios"] = list;

  if (rec.weighted_n) {
    ordered_json w;
    w["weights"] = d.weights;
    w["n"] = *rec.weighted_n;
    w["predicted_power"] = rec.weighted_power_at_n;
    w["search_range"] = {rec.weighted_range.lo, rec.weighted_range.hi};
    root["weighted"] = w;
  }
  return root.dump(2) + "\n";
}

std::vector<CurveRow> algorithm2_curve(const ScenarioRecommendation& rec, double alpha, std::span<const int> grid) {
  std::vector<CurveRow> rows;
  rows.reserve(grid.size());
  for (int n : grid) rows.push_back({rec.label, n, "algorithm2", predict_power(rec.lines, n, alpha)});
  return rows;
}

std::vector<CurveRow> naive_curve(const std::string& scenario, std::span<const CurvePoint> points) {
  std::vector<CurveRow> rows;
  rows.reserve(points.size());
  for (const auto& p : points) rows.push_back({scenario, p.n, "naive", p.power});
  return rows;
}

std::vector<int> default_curve_grid(const Recommendation& rec, int points) {
  int lo = 0;
  int hi = 0;
  for (const auto& s : rec.scenarios) {
    const int a = std::min({s.n0, s.n1, s.n2});
    const int b = std::max({s.n0, s.n1, s.n2});
    lo = lo == 0 ? a : std::min(lo, a);
    hi = std::max(hi, b);
  }
  lo = std::max(2, lo / 2);
  hi = std::max(lo + 1, hi + hi / 4);
  std::vector<int> grid;
  for (int i = 0; i < points; ++i) {
    const int n = lo + static_cast<int>(std::lround(static_cast<double>(hi - lo) * i / (points - 1)));
    if (grid.empty() || n > grid.back()) grid.push_back(n);
  }
  return grid;
}

std::string power_curves_csv(std::span<const CurveRow> rows) {
  std::string out = "scenario,n,method,power\n";
  for (const auto& r : rows) {
    out += csv_field(r.scenario) + "," + std::to_string(r.n) + "," + r.method + "," + format_double(r.power) + "\n";
  }
  return out;
}

std::string power_curves_svg(std::span<const CurveRow> rows, double target_power, std::string_view title) {
  constexpr double width = 720;
  constexpr double height = 440;
  constexpr double left = 60;
  constexpr double right = 180;
  constexpr double top = 40;
  constexpr double bottom = 50;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

  int n_min = rows.empty() ? 0 : rows.front().n;
  int n_max = rows.empty() ? 1 : rows.front().n;
  std::vector<std::string> labels;
  for (const auto& r : rows) {
    n_min = std::min(n_min, r.n);
    n_max = std::max(n_max, r.n);
    if (std::find(labels.begin(), labels.end(), r.scenario) == labels.end()) labels.push_back(r.scenario);
  }
  if (n_max == n_min) ++n_max;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto x = [&](double n) { return left + plot_w * (n - n_min) / (n_max - n_min); };
  auto y = [&](double p) { return top + plot_h * (1.0 - p); };

  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double p = i / 5.0;
    svg << "<text x=\"" << left - 8 << "\" y=\"" << y(p) + 4 << "\" text-anchor=\"end\">" << p << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double n = n_min + (n_max - n_min) * i / 5.0;
    svg << "<text x=\"" << x(n) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">"
        << std::lround(n) << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">n</text>\n";
  svg << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 16 " << top + plot_h / 2
      << ")\" text-anchor=\"middle\">power</text>\n";
  svg << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << y(target_power) << "\" y2=\""
      << y(target_power) << "\" stroke=\"black\" stroke-dasharray=\"2,4\"/>\n";

  for (std::size_t k = 0; k < labels.size(); ++k) {
    const char* colour = palette[k % std::size(palette)];
    std::string path;
    for (const auto& r : rows) {
      if (r.scenario != labels[k]) continue;
      std::ostringstream pt;
      pt.precision(6);
      pt << x(r.n) << "," << y(std::clamp(r.power, 0.0, 1.0));
      if (r.method == "algorithm2") {
        path += (path.empty() ? "M" : " L") + pt.str();
      } else {
        svg << "<circle cx=\"" << x(r.n) << "\" cy=\"" << y(std::clamp(r.power, 0.0, 1.0)) << "\" r=\"3\" fill=\""
            << colour << "\"/>\n";
      }
    }
    if (!path.empty()) svg << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << colour << "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(k);
    svg << "<line x1=\"" << left + plot_w + 12 << "\" x2=\"" << left + plot_w + 32 << "\" y1=\"" << ly - 4
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour << "\"/>\n";
    svg << "<text x=\"" << left + plot_w + 38 << "\" y=\"" << ly << "\">" << xml_escape(labels[k]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string slope_table_csv(std::span<const SlopeCase> cases) {
  std::string out = "kind,a1,u,lambda_ratio,n,logit,slope,limit,relative_error\n";
  for (const auto& c : cases) {
    for (const auto& row : c.check.rows) {
      out += std::string(to_string(c.kind)) + "," + format_double(c.a1) + "," + format_double(c.u) + "," +
             format_double(c.lambda_ratio) + "," + format_double(row.n) + "," + format_double(row.logit) + "," +
             format_double(row.slope) + "," + format_double(c.check.limit) + "," +
             format_double(c.check.limit == 0.0 ? std::fabs(row.slope)
                                                 : std::fabs(row.slope - c.check.limit) / std::fabs(c.check.limit)) +
             "\n";
    }
  }
  return out;
}

std::vector<std::filesystem::path> write_artifacts(
    const std::filesystem::path& dir, std::span<const std::pair<std::string, std::string>> files) {
  namespace fs = std::filesystem;
  std::vector<fs::path> temps;
  std::vector<fs::path> finals;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& p : temps) fs::remove(p, ec);
    for (const auto& p : finals) fs::remove(p, ec);
  };
  try {
    fs::create_directories(dir);
    for (const auto& [name, content] : files) {
      const fs::path tmp = dir / (name + ".partial");
      temps.push_back(tmp);
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      out.close();
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
      const fs::path target = dir / files[i].first;
      fs::rename(temps[i], target);
      finals.push_back(target);
    }
  } catch (...) {
    cleanup();
    throw;
  }
  return finals;
}

}  // namespace robustssd
