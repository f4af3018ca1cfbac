#include "robustssd/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "robustssd/numeric.hpp"

namespace robustssd {

namespace {

// Observed rows only, with the owning unit of every row.
struct ObservedRows {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd offset;
  std::vector<std::size_t> unit;
  std::size_t units = 0;
};

ObservedRows collect(const Dataset& data) {
  std::size_t count = 0;
  for (auto o : data.observed) count += o != 0;
  ObservedRows out;
  const auto rows = static_cast<Eigen::Index>(count);
  out.x.resize(rows, data.design.cols());
  out.y.resize(rows);
  out.offset.resize(rows);
  out.unit.reserve(count);
  Eigen::Index dst = 0;
  for (std::size_t u = 0; u < data.units(); ++u) {
    bool any = false;
    for (std::size_t r = data.unit_begin[u]; r < data.unit_begin[u + 1]; ++r) {
      if (!data.observed[r]) continue;
      const auto src = static_cast<Eigen::Index>(r);
      out.x.row(dst) = data.design.row(src);
      out.y(dst) = data.response(src);
      out.offset(dst) = data.offset(src);
      out.unit.push_back(out.units);
      ++dst;
      any = true;
    }
    if (any) ++out.units;
  }
  return out;
}

EstimateResult failure(FitStatus status, int iterations = 0) {
  EstimateResult r;
  r.status = status;
  r.iterations = iterations;
  return r;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

bool full_rank(const Eigen::MatrixXd& x) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  return qr.rank() == x.cols();
}

double bernoulli_nll(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  double nll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // log(1 + e^eta) - y * eta, evaluated stably
    const double e = eta(i);
    const double softplus = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    nll += softplus - y(i) * e;
  }
  return nll;
}

// Negative Poisson quasi-likelihood (up to constants) or half the RSS.
double gee_objective(const ObservedRows& d, Link link, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = d.x * beta + d.offset;
  if (link == Link::identity) return 0.5 * (d.y - eta).squaredNorm();
  double q = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) q += std::exp(eta(i)) - d.y(i) * eta(i);
  return q;
}

}  // namespace

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::ok: return "ok";
    case FitStatus::not_converged: return "not_converged";
    case FitStatus::separation: return "separation";
    case FitStatus::degenerate_se: return "degenerate_se";
    case FitStatus::insufficient_data: return "insufficient_data";
  }
  return "unknown";
}

bool EstimateResult::usable() const {
  return converged && status == FitStatus::ok && std::isfinite(theta_hat) && std::isfinite(se) && se > 0.0;
}

std::string_view to_string(RecipeKind kind) {
  switch (kind) {
    case RecipeKind::mean_diff: return "mean_diff";
    case RecipeKind::logistic: return "logistic";
    case RecipeKind::gee_identity: return "gee_identity";
    case RecipeKind::gee_log: return "gee_log";
  }
  return "unknown";
}

RecipeKind recipe_kind_from_string(std::string_view name) {
  for (auto k : {RecipeKind::mean_diff, RecipeKind::logistic, RecipeKind::gee_identity, RecipeKind::gee_log}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown analysis recipe '" + std::string(name) + "'");
}

EstimateResult estimate_mean_diff(const Dataset& data) {
  const auto arm_col = static_cast<Eigen::Index>(data.theta_column);
  double sum[2] = {0.0, 0.0};
  double count[2] = {0.0, 0.0};
  for (std::size_t u = 0; u < data.units(); ++u) {
    if (data.unit_rows(u) != 1) {
      throw std::invalid_argument("estimate_mean_diff: every unit must hold exactly one row");
    }
    const auto r = data.unit_begin[u];
    if (!data.observed[r]) continue;
    const int arm = data.design(static_cast<Eigen::Index>(r), arm_col) != 0.0 ? 1 : 0;
    sum[arm] += data.response(static_cast<Eigen::Index>(r));
    count[arm] += 1.0;
  }
  if (count[0] < 2.0 || count[1] < 2.0) return failure(FitStatus::insufficient_data);

  const double mean[2] = {sum[0] / count[0], sum[1] / count[1]};
  double ss[2] = {0.0, 0.0};
  for (std::size_t u = 0; u < data.units(); ++u) {
    const auto r = data.unit_begin[u];
    if (!data.observed[r]) continue;
    const int arm = data.design(static_cast<Eigen::Index>(r), arm_col) != 0.0 ? 1 : 0;
    const double dev = data.response(static_cast<Eigen::Index>(r)) - mean[arm];
    ss[arm] += dev * dev;
  }

  EstimateResult out;
  out.theta_hat = mean[1] - mean[0];
  out.se = std::sqrt(ss[1] / (count[1] - 1.0) / count[1] + ss[0] / (count[0] - 1.0) / count[0]);
  out.model_se = out.se;
  out.iterations = 1;
  out.converged = true;
  out.status = out.se > 0.0 ? FitStatus::ok : FitStatus::degenerate_se;
  if (out.status != FitStatus::ok) out.converged = false;
  return out;
}

EstimateResult estimate_logistic(const Dataset& data, std::size_t coef_index) {
  constexpr int kMaxIter = 50;
  constexpr double kScoreTol = 1e-8;
  constexpr double kDivergence = 30.0;

  const ObservedRows d = collect(data);
  const Eigen::Index p = d.x.cols();
  if (static_cast<Eigen::Index>(coef_index) >= p) {
    throw std::out_of_range("estimate_logistic: coefficient index out of range");
  }
  if (d.x.rows() <= p || !full_rank(d.x)) return failure(FitStatus::insufficient_data);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd info(p, p);
  Eigen::LDLT<Eigen::MatrixXd> solver;
  double nll = bernoulli_nll(d.x, d.y, beta);

  for (int iter = 1; iter <= kMaxIter; ++iter) {
    const Eigen::VectorXd eta = d.x * beta;
    Eigen::VectorXd mu(eta.size());
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      mu(i) = inv_logit(eta(i));
      w(i) = mu(i) * (1.0 - mu(i));
    }
    const Eigen::VectorXd score = d.x.transpose() * (d.y - mu);
    info.noalias() = d.x.transpose() * w.asDiagonal() * d.x;
    solver.compute(info);
    if (solver.info() != Eigen::Success) return failure(FitStatus::separation, iter);
    Eigen::VectorXd step = solver.solve(score);
    if (!step.allFinite()) return failure(FitStatus::separation, iter);

    // Converged only when the score vanishes and Newton has stopped moving;
    // under separation the score decays while the step stays near one.
    if (max_abs(score) < kScoreTol && max_abs(step) < 1e-6) {
      const Eigen::MatrixXd cov = solver.solve(Eigen::MatrixXd::Identity(p, p));
      EstimateResult out;
      out.theta_hat = beta(static_cast<Eigen::Index>(coef_index));
      out.se = std::sqrt(cov(static_cast<Eigen::Index>(coef_index), static_cast<Eigen::Index>(coef_index)));
      out.model_se = out.se;
      out.iterations = iter;
      out.converged = std::isfinite(out.se) && out.se > 0.0;
      out.status = out.converged ? FitStatus::ok : FitStatus::degenerate_se;
      return out;
    }

    Eigen::VectorXd candidate = beta + step;
    double cand_nll = bernoulli_nll(d.x, d.y, candidate);
    for (int h = 0; h < 10 && !(cand_nll <= nll + 1e-12 * (1.0 + std::fabs(nll))); ++h) {
      step *= 0.5;
      candidate = beta + step;
      cand_nll = bernoulli_nll(d.x, d.y, candidate);
    }
    beta = candidate;
    nll = cand_nll;
    if (max_abs(beta) > kDivergence) return failure(FitStatus::separation, iter);
  }
  return failure(FitStatus::not_converged, kMaxIter);
}

EstimateResult estimate_gee(const Dataset& data, Link link, std::size_t coef_index) {
  constexpr int kMaxIter = 100;
  constexpr double kDivergence = 30.0;

  const ObservedRows d = collect(data);
  const Eigen::Index p = d.x.cols();
  if (static_cast<Eigen::Index>(coef_index) >= p) {
    throw std::out_of_range("estimate_gee: coefficient index out of range");
  }
  if (d.units < 2 || d.x.rows() < p || !full_rank(d.x)) return failure(FitStatus::insufficient_data);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (link == Link::log && (d.x.col(0).array() == 1.0).all()) {
    const double total = d.y.sum();
    const double exposure = d.offset.array().exp().sum();
    if (total > 0.0) beta(0) = std::log(total / exposure);
  }

  Eigen::MatrixXd a(p, p);
  Eigen::VectorXd mu(d.y.size());
  Eigen::LDLT<Eigen::MatrixXd> solver;
  auto refresh = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = d.x * b + d.offset;
    if (link == Link::identity) {
      mu = eta;
      a.noalias() = d.x.transpose() * d.x;
    } else {
      mu = eta.array().exp().matrix();
      a.noalias() = d.x.transpose() * mu.asDiagonal() * d.x;
    }
    solver.compute(a);
  };

  double objective = gee_objective(d, link, beta);
  bool converged = false;
  int iter = 0;
  for (iter = 1; iter <= kMaxIter; ++iter) {
    refresh(beta);
    if (solver.info() != Eigen::Success) return failure(FitStatus::not_converged, iter);
    Eigen::VectorXd step = solver.solve(d.x.transpose() * (d.y - mu));
    if (!step.allFinite()) return failure(FitStatus::not_converged, iter);

    Eigen::VectorXd candidate = beta + step;
    double cand = gee_objective(d, link, candidate);
    for (int h = 0; h < 10 && !(cand <= objective + 1e-12 * (1.0 + std::fabs(objective))); ++h) {
      step *= 0.5;
      candidate = beta + step;
      cand = gee_objective(d, link, candidate);
    }
    beta = candidate;
    objective = cand;
    if (link == Link::log && max_abs(beta) > kDivergence) return failure(FitStatus::separation, iter);
    if (max_abs(step) <= 1e-10 * (1.0 + max_abs(beta))) {
      converged = true;
      break;
    }
  }
  if (!converged) return failure(FitStatus::not_converged, kMaxIter);

  refresh(beta);
  if (solver.info() != Eigen::Success) return failure(FitStatus::not_converged, iter);
  const Eigen::MatrixXd a_inv = solver.solve(Eigen::MatrixXd::Identity(p, p));

  // Empirical score outer products, summed within each unit.
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.units), p);
  for (Eigen::Index i = 0; i < d.y.size(); ++i) {
    scores.row(static_cast<Eigen::Index>(d.unit[static_cast<std::size_t>(i)])) += (d.y(i) - mu(i)) * d.x.row(i);
  }
  const Eigen::MatrixXd meat = scores.transpose() * scores;
  const Eigen::MatrixXd sandwich = a_inv * meat * a_inv;

  const auto c = static_cast<Eigen::Index>(coef_index);
  EstimateResult out;
  out.theta_hat = beta(c);
  out.se = std::sqrt(sandwich(c, c));
  if (link == Link::identity) {
    const double dof = static_cast<double>(d.y.size() - p);
    const double sigma2 = dof > 0 ? (d.y - mu).squaredNorm() / dof : std::numeric_limits<double>::quiet_NaN();
    out.model_se = std::sqrt(a_inv(c, c) * sigma2);
  } else {
    out.model_se = std::sqrt(a_inv(c, c));
  }
  out.iterations = iter;
  out.converged = std::isfinite(out.se) && out.se > 0.0;
  out.status = out.converged ? FitStatus::ok : FitStatus::degenerate_se;
  return out;
}

EstimateResult estimate_point(const Dataset& data, RecipeKind kind) {
  switch (kind) {
    case RecipeKind::mean_diff: return estimate_mean_diff(data);
    case RecipeKind::logistic: return estimate_logistic(data, data.theta_column);
    case RecipeKind::gee_identity: return estimate_gee(data, Link::identity, data.theta_column);
    case RecipeKind::gee_log: return estimate_gee(data, Link::log, data.theta_column);
  }
  throw std::logic_error("estimate_point: unhandled recipe");
}

EstimateResult bootstrap_se(const Dataset& data, RecipeKind inner,
                            std::span<const std::vector<std::size_t>> plans) {
  if (plans.size() < 2) throw std::invalid_argument("bootstrap_se: need at least 2 resamples");

  EstimateResult out = estimate_point(data, inner);
  if (!out.converged) return out;

  std::vector<double> replicates;
  replicates.reserve(plans.size());
  for (const auto& plan : plans) {
    const EstimateResult r = estimate_point(data.resample(plan), inner);
    if (r.converged && std::isfinite(r.theta_hat)) replicates.push_back(r.theta_hat);
  }
  const auto failed = plans.size() - replicates.size();
  out.iterations = static_cast<int>(plans.size());
  if (static_cast<double>(failed) > 0.2 * static_cast<double>(plans.size()) || replicates.size() < 2) {
    out.converged = false;
    out.status = FitStatus::not_converged;
    out.se = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  const double center = median(replicates);
  for (auto& v : replicates) v = std::fabs(v - center);
  out.se = median(std::move(replicates)) / kMadConsistency;
  if (!(out.se > 0.0) || !std::isfinite(out.se)) {
    out.converged = false;
    out.status = FitStatus::degenerate_se;
  }
  return out;
}

EstimateResult bootstrap_se(const Dataset& data, RecipeKind inner, int resamples, RngStream& stream) {
  if (resamples < 2) throw std::invalid_argument("bootstrap_se: need at least 2 resamples");
  const std::size_t n = data.units();
  std::vector<std::vector<std::size_t>> plans(static_cast<std::size_t>(resamples));
  for (auto& plan : plans) {
    plan.resize(n);
    for (auto& pick : plan) pick = stream.index(n);
  }
  return bootstrap_se(data, inner, plans);
}

EstimateResult estimate(const Dataset& data, const AnalysisRecipe& recipe, RngStream& stream) {
  if (recipe.bootstrap_resamples > 0) {
    return bootstrap_se(data, recipe.kind, recipe.bootstrap_resamples, stream);
  }
  return estimate_point(data, recipe.kind);
}

}  // namespace robustssd
