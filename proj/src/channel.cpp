#include "tascl/channel.hpp"

#include <algorithm>
#include <cmath>

#include "tascl/errors.hpp"

namespace tascl {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

} // namespace

std::mt19937_64 frame_rng(std::uint64_t seed, std::uint64_t frame_index, Stream stream) {
  const auto key = splitmix64(splitmix64(seed) ^ splitmix64(frame_index + 0x632BE59BD9B4E019ULL) ^
                              (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(frame_index), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

void ChannelConfig::validate() const {
  if (!std::isfinite(ebn0_db))
    throw ParameterError("Eb/N0 must be finite");
  if (!(rate > 0.0 && rate <= 1.0))
    throw ParameterError("code rate must lie in (0, 1]");
}

double noise_variance(double ebn0_db, double rate) {
  return 1.0 / (2.0 * rate * std::pow(10.0, ebn0_db / 10.0));
}

std::vector<Llr> transmit(std::span<const std::uint8_t> codeword, const ChannelConfig& cfg) {
  cfg.validate();
  const double var = noise_variance(cfg.ebn0_db, cfg.rate);
  const double sigma = std::sqrt(var);
  const double scale = 2.0 / var;
  std::vector<Llr> llr(codeword.size());
  if (cfg.noiseless) {
    for (std::size_t i = 0; i < codeword.size(); ++i)
      llr[i] = codeword[i] ? -scale : scale;
    return llr;
  }
  auto rng = frame_rng(cfg.seed, cfg.frame_index, Stream::noise);
  std::normal_distribution<double> noise(0.0, sigma);
  for (std::size_t i = 0; i < codeword.size(); ++i) {
    const double y = (codeword[i] ? -1.0 : 1.0) + noise(rng);
    llr[i] = scale * y;
  }
  return llr;
}

void QuantSpec::validate() const {
  if (total_bits < 2 || total_bits > 30)
    throw ParameterError("quantizer width must be in [2, 30]");
  if (fraction_bits < 0 || fraction_bits >= total_bits)
    throw ParameterError("need 0 <= fraction_bits < total_bits");
}

double QuantSpec::step() const { return std::ldexp(1.0, -fraction_bits); }

double QuantSpec::max_signed() const { return static_cast<double>((1L << (total_bits - 1)) - 1) * step(); }

double QuantSpec::max_unsigned() const { return static_cast<double>((1L << total_bits) - 1) * step(); }

double quantize_value(double value, const QuantSpec& q) {
  const double lsb = q.step();
  const long limit = (1L << (q.total_bits - 1)) - 1;
  double level = std::round(value / lsb);
  if (q.saturating) {
    level = std::clamp(level, -static_cast<double>(limit), static_cast<double>(limit));
  } else {
    const long modulus = 1L << q.total_bits;
    long code = static_cast<long>(level) % modulus;
    if (code < 0)
      code += modulus;
    if (code > limit)
      code -= modulus;
    level = static_cast<double>(code);
  }
  return level * lsb;
}

std::vector<Llr> quantize(std::span<const Llr> llr, const QuantSpec& q) {
  q.validate();
  std::vector<Llr> out(llr.size());
  for (std::size_t i = 0; i < llr.size(); ++i)
    out[i] = quantize_value(llr[i], q);
  return out;
}

} // namespace tascl
