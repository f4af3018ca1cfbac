#include "robustssd/dataset.hpp"

#include <stdexcept>
#include <string>

namespace robustssd {

Dataset Dataset::resample(std::span<const std::size_t> picks) const {
  std::size_t total = 0;
  for (auto u : picks) {
    if (u >= units()) throw std::out_of_range("resample: unit index out of range");
    total += unit_rows(u);
  }

  Dataset out;
  out.columns = columns;
  out.theta_column = theta_column;
  const auto rows = static_cast<Eigen::Index>(total);
  out.design.resize(rows, design.cols());
  out.response.resize(rows);
  out.offset.resize(rows);
  out.observed.resize(total);
  out.unit_begin.clear();
  out.unit_begin.reserve(picks.size() + 1);
  out.unit_begin.push_back(0);

  Eigen::Index dst = 0;
  for (auto u : picks) {
    const auto begin = static_cast<Eigen::Index>(unit_begin[u]);
    const auto count = static_cast<Eigen::Index>(unit_rows(u));
    out.design.middleRows(dst, count) = design.middleRows(begin, count);
    out.response.segment(dst, count) = response.segment(begin, count);
    out.offset.segment(dst, count) = offset.segment(begin, count);
    for (Eigen::Index k = 0; k < count; ++k) {
      out.observed[static_cast<std::size_t>(dst + k)] = observed[static_cast<std::size_t>(begin + k)];
    }
    dst += count;
    out.unit_begin.push_back(static_cast<std::size_t>(dst));
  }
  return out;
}

void Dataset::check_invariants(bool monotone_mask) const {
  const auto n_rows = rows();
  if (unit_begin.empty() || unit_begin.front() != 0 || unit_begin.back() != n_rows) {
    throw std::logic_error("dataset: unit offsets do not cover the rows");
  }
  if (static_cast<std::size_t>(design.rows()) != n_rows || static_cast<std::size_t>(offset.size()) != n_rows ||
      observed.size() != n_rows) {
    throw std::logic_error("dataset: row counts of design, response, offset and mask differ");
  }
  if (static_cast<std::size_t>(design.cols()) != columns.size() || theta_column >= columns.size()) {
    throw std::logic_error("dataset: column metadata does not match the design");
  }
  for (std::size_t i = 0; i < units(); ++i) {
    if (unit_begin[i + 1] <= unit_begin[i]) {
      throw std::logic_error("dataset: unit " + std::to_string(i) + " has no rows");
    }
    if (!monotone_mask) continue;
    bool seen_gap = false;
    for (std::size_t r = unit_begin[i]; r < unit_begin[i + 1]; ++r) {
      if (observed[r] == 0) {
        seen_gap = true;
      } else if (seen_gap) {
        throw std::logic_error("dataset: unit " + std::to_string(i) + " has a non-monotone mask");
      }
    }
  }
}

}  // namespace robustssd
