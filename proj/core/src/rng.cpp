#include "robustssd/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace robustssd {

namespace {

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  return mix(h ^ (mix(v + 0x9e3779b97f4a7c15ULL) + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2)));
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  return mix(state);
}

std::uint64_t hash_path(const StreamPath& path) {
  std::uint64_t h = mix(path.master_seed ^ 0x5851f42d4c957f2dULL);
  h = combine(h, path.scenario);
  h = combine(h, path.sample_size);
  h = combine(h, path.repetition);
  h = combine(h, static_cast<std::uint64_t>(path.purpose));
  h = combine(h, path.attempt);
  return h;
}

Xoshiro256::Xoshiro256(std::uint64_t key) {
  std::uint64_t sm = key;
  for (auto& word : s_) word = splitmix64(sm);
}

Xoshiro256::result_type Xoshiro256::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

RngStream::RngStream(const StreamPath& path) : RngStream(hash_path(path), 0) {}

RngStream::RngStream(std::uint64_t key, int) : key_(key), engine_(key) {}

RngStream RngStream::from_key(std::uint64_t key) { return RngStream(key, 0); }

RngStream RngStream::substream(std::uint64_t tag) const {
  return RngStream(combine(key_ ^ 0xd1b54a32d192ed03ULL, tag), 0);
}

double RngStream::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal(double mean, double sd) {
  if (sd == 0.0) return mean;
  return mean + sd * std_normal_(engine_);
}

bool RngStream::bernoulli(double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return uniform() < p;
}

int RngStream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<int> dist(mean);
  return dist(engine_);
}

double RngStream::gamma(double shape, double scale) {
  std::gamma_distribution<double> dist(shape, scale);
  return dist(engine_);
}

std::size_t RngStream::index(std::size_t size) {
  std::uniform_int_distribution<std::size_t> dist(0, size - 1);
  return dist(engine_);
}

CorrelationFactor::CorrelationFactor(const Eigen::MatrixXd& corr, std::string_view owner) {
  const std::string who(owner);
  if (corr.rows() != corr.cols() || corr.rows() == 0) {
    throw std::invalid_argument(who + ": correlation matrix must be square and non-empty");
  }
  if (!corr.isApprox(corr.transpose(), 1e-12)) {
    throw std::invalid_argument(who + ": correlation matrix is not symmetric");
  }
  for (Eigen::Index i = 0; i < corr.rows(); ++i) {
    if (std::fabs(corr(i, i) - 1.0) > 1e-12) {
      throw std::invalid_argument(who + ": correlation matrix must have a unit diagonal");
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(who + ": correlation matrix is not positive definite");
  }
  lower_ = llt.matrixL();
  if ((lower_.diagonal().array() <= 1e-10).any()) {
    throw std::invalid_argument(who + ": correlation matrix is not positive definite");
  }
}

Eigen::VectorXd CorrelationFactor::draw(RngStream& stream) const {
  Eigen::VectorXd e(lower_.rows());
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = stream.normal();
  return lower_.triangularView<Eigen::Lower>() * e;
}

int poisson_quantile(double u, double mean) {
  if (mean <= 0.0) return 0;
  if (mean > 700.0) {
    throw std::invalid_argument("poisson_quantile: mean " + std::to_string(mean) +
                                " is outside the supported range (0, 700]");
  }
  const int cap = static_cast<int>(std::ceil(mean + 20.0 * std::sqrt(mean))) + 20;
  double pmf = std::exp(-mean);
  double cdf = pmf;
  int k = 0;
  while (cdf < u && k < cap) {
    ++k;
    pmf *= mean / k;
    cdf += pmf;
  }
  return k;
}

}  // namespace robustssd
