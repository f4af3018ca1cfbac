#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace robustssd {

// n independent sampling units (ISUs) stored row-wise. Unit i owns rows
// [unit_begin[i], unit_begin[i + 1]). Rows with observed == 0 were lost to
// dropout and are ignored by every estimator.
struct Dataset {
  std::vector<std::string> columns;
  std::size_t theta_column = 0;

  Eigen::MatrixXd design;
  Eigen::VectorXd response;
  Eigen::VectorXd offset;
  std::vector<std::uint8_t> observed;
  std::vector<std::size_t> unit_begin{0};

  std::size_t units() const { return unit_begin.size() - 1; }
  std::size_t rows() const { return static_cast<std::size_t>(response.size()); }
  std::size_t unit_rows(std::size_t unit) const {
    return unit_begin[unit + 1] - unit_begin[unit];
  }

  // Copy of the units listed in `picks` (repeats allowed), in that order.
  Dataset resample(std::span<const std::size_t> picks) const;

  // Throws std::logic_error if the unit layout or masks are malformed;
  // with `monotone_mask`, each unit's mask must be 1...1 0...0.
  void check_invariants(bool monotone_mask) const;
};

}  // namespace robustssd
