#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace unl {

/// Counter-based random stream built on Philox4x32-10.
///
/// The 128-bit counter is split into a 64-bit block index (low half) and the
/// 64-bit stream id (high half); the 64-bit seed is the Philox key. Two
/// streams with equal (seed, stream_id) produce identical sequences, and
/// distinct stream ids never share a counter value. All variate generators
/// below are implemented here so that draws are bit-reproducible across
/// standard library implementations.
///
/// A stream is not thread-safe; give each concurrent task its own stream.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal (Marsaglia polar method).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Exponential with rate 1.
  double exponential();
  /// Gamma(shape, rate) by Marsaglia-Tsang; shape < 1 uses the U^(1/shape) boost.
  double gamma(double shape, double rate);
  double beta(double a, double b);
  /// Inverse-gamma with density proportional to x^(-shape-1) exp(-scale/x).
  double inv_gamma(double shape, double scale);
  /// Index drawn with probability proportional to exp(log_weights[k]).
  std::size_t categorical_log(std::span<const double> log_weights);

  /// Raw Philox4x32-10 block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                             std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace unl
