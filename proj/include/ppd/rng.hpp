#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ppd {

/// Reproducible random stream. The pair (seed, stream_id) fully determines
/// the draw sequence, so independent workers and simulated trials each get
/// their own stream_id and results never depend on scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id & 0xffffffffu),
                      static_cast<std::uint32_t>(stream_id >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// U(0,1), open at both ends.
  double uniform() {
    double u;
    do {
      u = std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    } while (u <= 0.0 || u >= 1.0);
    return u;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }

  double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

  /// Gamma(shape, rate).  Shapes below 0.1 route through the boosted-shape
  /// identity G(a) = G(a+1) * U^(1/a) to keep log-scale accuracy.
  double gamma(double shape, double rate = 1.0) {
    return std::exp(log_gamma_draw(shape)) / rate;
  }

  /// log of a Gamma(shape, 1) draw; safe for very small shapes where the
  /// draw itself would underflow.
  double log_gamma_draw(double shape) {
    if (shape < 0.1) {
      double g = std::gamma_distribution<double>(shape + 1.0, 1.0)(engine_);
      return std::log(g) + std::log(uniform()) / shape;
    }
    return std::log(std::gamma_distribution<double>(shape, 1.0)(engine_));
  }

  /// Beta(a, b) via two gamma draws combined in log space.
  double beta(double a, double b) {
    double lx = log_gamma_draw(a);
    double ly = log_gamma_draw(b);
    return 1.0 / (1.0 + std::exp(ly - lx));
  }

  double chi_squared(double df) { return gamma(0.5 * df, 0.5); }

  long binomial(long n, double p) {
    if (n <= 0) return 0;
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    return std::binomial_distribution<long>(n, p)(engine_);
  }

  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<long>(mean)(engine_);
  }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

}  // namespace ppd
