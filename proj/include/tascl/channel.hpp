#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace tascl {

using Llr = double;

/// Named substreams so that message bits, channel noise and abstract
/// Bernoulli draws never share random numbers.
enum class Stream : std::uint64_t { message = 1, noise = 2, bernoulli = 3 };

/// Generator for one (seed, frame_index, stream) triple. Results depend
/// only on the triple, never on which worker draws them or in what order.
std::mt19937_64 frame_rng(std::uint64_t seed, std::uint64_t frame_index, Stream stream);

struct ChannelConfig {
  double ebn0_db = 0.0;
  double rate = 0.5;
  std::uint64_t seed = 1;
  std::uint64_t frame_index = 0;
  /// Transmit without noise; LLR magnitudes still use the configured sigma.
  bool noiseless = false;

  void validate() const;
};

/// Noise variance for BPSK at Eb/N0 `ebn0_db` and code rate `rate`.
double noise_variance(double ebn0_db, double rate);

/// BPSK (0 -> +1, 1 -> -1) over AWGN; returns channel LLRs 2y/sigma^2.
std::vector<Llr> transmit(std::span<const std::uint8_t> codeword, const ChannelConfig& cfg);

/// Two's-complement fixed point with `fraction_bits` of the `total_bits`
/// after the binary point. Saturation is symmetric, +-(2^(Q-1) - 1) LSBs.
struct QuantSpec {
  int total_bits = 6;
  int fraction_bits = 1;
  bool saturating = true;

  void validate() const;
  double step() const;
  /// Largest representable magnitude for signed values.
  double max_signed() const;
  /// Largest representable value when the word is read as unsigned.
  double max_unsigned() const;
};

/// Rounds half away from zero onto the grid, then saturates (or wraps when
/// `saturating` is false).
double quantize_value(double value, const QuantSpec& q);
std::vector<Llr> quantize(std::span<const Llr> llr, const QuantSpec& q);

/// Fixed-point setup for a decoder: channel/internal LLRs and path metrics.
struct FixedPoint {
  QuantSpec llr{6, 1, true};
  QuantSpec pm{8, 1, true};
};

} // namespace tascl
