#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tascl {

using Bits = std::vector<std::uint8_t>;

/// Cyclic redundancy check over a bit stream, MSB-first, no output xor.
/// `polynomial` includes the leading x^width term (0x1864CFB for the
/// default 24-bit code).
struct CrcSpec {
  int width = 24;
  std::uint64_t polynomial = 0x1864CFB;
  std::uint64_t init = 0;

  /// Throws ParameterError unless the polynomial degree equals `width`.
  void validate() const;

  /// Remainder bits, most significant first.
  Bits checksum(std::span<const std::uint8_t> message) const;

  static CrcSpec none() { return CrcSpec{0, 0, 0}; }
  /// Default polynomial for a width: 24 -> 0x1864CFB, 16 -> CCITT,
  /// 11 and 6 -> the 5G NR codes, 8 -> crc8(), 0 -> none.
  static CrcSpec for_width(int width);
  static CrcSpec crc24() { return CrcSpec{}; }
  /// x^8 + x^2 + x + 1
  static CrcSpec crc8() { return CrcSpec{8, 0x107, 0}; }
};

enum class Construction { bhattacharyya, gaussian_approx };

std::string to_string(Construction method);
Construction parse_construction(const std::string& name);

/// Static definition of an (N, K, r) polar code: information set and CRC.
/// K counts the r checksum bits, which occupy the last r information
/// positions in index order. Immutable after construction.
class PolarCode {
public:
  PolarCode(int n, std::vector<std::size_t> info_set, int crc_bits, CrcSpec crc = CrcSpec::crc24(),
            double design_snr_db = 0.0, Construction method = Construction::bhattacharyya);

  int n() const { return n_; }
  std::size_t N() const { return std::size_t{1} << n_; }
  std::size_t K() const { return info_set_.size(); }
  int r() const { return r_; }
  double rate() const { return static_cast<double>(K() - static_cast<std::size_t>(r_)) / static_cast<double>(N()); }

  const std::vector<std::size_t>& info_set() const { return info_set_; }
  bool is_frozen(std::size_t i) const { return frozen_[i] != 0; }
  const Bits& frozen_mask() const { return frozen_; }
  const CrcSpec& crc() const { return crc_; }
  double design_snr_db() const { return design_snr_; }
  Construction method() const { return method_; }

  friend bool operator==(const PolarCode& a, const PolarCode& b) {
    return a.n_ == b.n_ && a.r_ == b.r_ && a.info_set_ == b.info_set_ && a.crc_.width == b.crc_.width &&
           a.crc_.polynomial == b.crc_.polynomial && a.crc_.init == b.crc_.init;
  }

private:
  int n_;
  int r_;
  std::vector<std::size_t> info_set_;
  Bits frozen_;
  CrcSpec crc_;
  double design_snr_;
  Construction method_;
};

/// ln of the Bhattacharyya parameter of every synthetic channel, starting
/// from a channel with parameter z0. Index order matches x = u * F^{(x)n}.
std::vector<double> bhattacharyya_log(int n, double z0);

/// Mean LLR of every synthetic channel under the Gaussian approximation,
/// starting from channel mean LLR `mean0`.
std::vector<double> gaussian_approx_means(int n, double mean0);

/// Indices of the K best scores, returned sorted. Ties prefer the higher
/// index so that the selection is a fixed total order.
std::vector<std::size_t> select_most_reliable(std::span<const double> scores, std::size_t K, bool lower_is_better);

/// Builds a code from a reliability ranking evaluated at `design_snr_db`
/// (Eb/N0, with the rate (K - r) / N).
PolarCode construct_code(int n, std::size_t K, int r, double design_snr_db,
                         Construction method = Construction::bhattacharyya,
                         std::optional<CrcSpec> crc = std::nullopt);

/// In-place x <- x * F^{(x)log2|x|} over GF(2); |x| must be a power of two.
void polar_transform(std::span<std::uint8_t> x);

/// x = u * F^{(x)n}; throws PreconditionError if a frozen bit of u is set.
Bits encode(const PolarCode& code, std::span<const std::uint8_t> u);

/// Source word with `message` followed by its checksum on the information set.
Bits attach_crc(const PolarCode& code, std::span<const std::uint8_t> message);

/// The K bits on the information set, in index order.
Bits extract_info(const PolarCode& code, std::span<const std::uint8_t> u);

/// True iff the last r bits equal the checksum of the first K - r bits.
bool check_crc(const PolarCode& code, std::span<const std::uint8_t> info);

/// Flat key = value serialization; the information set is stored
/// explicitly so a run never depends on re-deriving the construction.
void save_code(std::ostream& os, const PolarCode& code);
PolarCode load_code(std::istream& is);
PolarCode load_code_file(const std::string& path);
void save_code_file(const std::string& path, const PolarCode& code);

} // namespace tascl
