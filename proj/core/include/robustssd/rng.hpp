#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace robustssd {

enum class StreamPurpose : std::uint64_t {
  replicate = 1,
  bootstrap = 2,
  pilot = 3,
  naive_sweep = 4,
  confirmation = 5,
  test = 99,
};

// Full identity of a random substream. Every simulated dataset is keyed by
// (seed, scenario, n, repetition, purpose, attempt), so results never depend
// on which thread produced them or in what order.
struct StreamPath {
  std::uint64_t master_seed = 0;
  std::uint64_t scenario = 0;
  std::uint64_t sample_size = 0;
  std::uint64_t repetition = 0;
  StreamPurpose purpose = StreamPurpose::replicate;
  std::uint64_t attempt = 0;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t hash_path(const StreamPath& path);

// xoshiro256** seeded from a 64-bit key through splitmix64. Satisfies
// UniformRandomBitGenerator so the <random> distributions work on it.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t s_[4];
};

class RngStream {
 public:
  explicit RngStream(const StreamPath& path);
  static RngStream from_key(std::uint64_t key);

  std::uint64_t key() const { return key_; }

  // Independent child stream derived from this stream's key and a tag; the
  // parent's position is irrelevant.
  RngStream substream(std::uint64_t tag) const;

  std::uint64_t next_u64() { return engine_(); }
  double uniform();              // (0, 1), never exactly 0 or 1
  double normal(double mean = 0.0, double sd = 1.0);
  bool bernoulli(double p);
  int poisson(double mean);
  double gamma(double shape, double scale);
  std::size_t index(std::size_t size);  // uniform on [0, size)

  Xoshiro256& engine() { return engine_; }

 private:
  explicit RngStream(std::uint64_t key, int);

  std::uint64_t key_;
  Xoshiro256 engine_;
  std::normal_distribution<double> std_normal_{0.0, 1.0};
};

// Lower Cholesky factor of a correlation matrix, used to draw correlated
// standard normals for Gaussian copulas.
class CorrelationFactor {
 public:
  // Throws std::invalid_argument (message prefixed with `owner`) unless
  // `corr` is symmetric, unit-diagonal and positive definite.
  CorrelationFactor(const Eigen::MatrixXd& corr, std::string_view owner);

  Eigen::Index dimension() const { return lower_.rows(); }
  const Eigen::MatrixXd& lower() const { return lower_; }
  Eigen::VectorXd draw(RngStream& stream) const;

 private:
  Eigen::MatrixXd lower_;
};

// Smallest k with P(X <= k) >= u for X ~ Poisson(mean), by summing the pmf.
// Capped at ceil(mean + 20 sqrt(mean)) + 20.
int poisson_quantile(double u, double mean);

}  // namespace robustssd
