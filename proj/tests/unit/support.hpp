#pragma once

#include <cstdint>
#include <vector>

#include "robustssd/dataset.hpp"
#include "robustssd/rng.hpp"

namespace testing {

inline robustssd::RngStream stream(std::uint64_t rep = 0, std::uint64_t scenario = 0, std::uint64_t seed = 12345) {
  robustssd::StreamPath path;
  path.master_seed = seed;
  path.scenario = scenario;
  path.repetition = rep;
  path.purpose = robustssd::StreamPurpose::test;
  return robustssd::RngStream(path);
}

// Single-row units with columns intercept, arm.
inline robustssd::Dataset two_arm(const std::vector<double>& treated, const std::vector<double>& control) {
  robustssd::Dataset d;
  d.columns = {"intercept", "arm"};
  d.theta_column = 1;
  const auto n = static_cast<Eigen::Index>(treated.size() + control.size());
  d.design.resize(n, 2);
  d.response.resize(n);
  d.offset = Eigen::VectorXd::Zero(n);
  Eigen::Index row = 0;
  for (double y : treated) {
    d.design.row(row) << 1.0, 1.0;
    d.response(row++) = y;
  }
  for (double y : control) {
    d.design.row(row) << 1.0, 0.0;
    d.response(row++) = y;
  }
  d.observed.assign(static_cast<std::size_t>(n), 1);
  d.unit_begin.clear();
  for (Eigen::Index i = 0; i <= n; ++i) d.unit_begin.push_back(static_cast<std::size_t>(i));
  return d;
}

// Intercept-only single-row units.
inline robustssd::Dataset intercept_only(const std::vector<double>& y) {
  robustssd::Dataset d;
  d.columns = {"intercept"};
  d.theta_column = 0;
  const auto n = static_cast<Eigen::Index>(y.size());
  d.design = Eigen::MatrixXd::Ones(n, 1);
  d.response = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  d.offset = Eigen::VectorXd::Zero(n);
  d.observed.assign(y.size(), 1);
  d.unit_begin.clear();
  for (Eigen::Index i = 0; i <= n; ++i) d.unit_begin.push_back(static_cast<std::size_t>(i));
  return d;
}

}  // namespace testing
