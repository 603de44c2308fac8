#include "tascl/codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tascl/errors.hpp"

namespace tascl {

void CrcSpec::validate() const {
  if (width < 0 || width > 62)
    throw ParameterError("CRC width must be in [0, 62]");
  if (width == 0)
    return;
  if ((polynomial >> width) != 1)
    throw ParameterError("CRC polynomial degree must equal its width");
  if ((init >> width) != 0)
    throw ParameterError("CRC init value wider than the register");
}

Bits CrcSpec::checksum(std::span<const std::uint8_t> message) const {
  if (width == 0)
    return {};
  const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
  const std::uint64_t top = std::uint64_t{1} << (width - 1);
  std::uint64_t reg = init & mask;
  for (auto bit : message) {
    const bool feedback = ((reg & top) != 0) != (bit != 0);
    reg = (reg << 1) & mask;
    if (feedback)
      reg ^= polynomial & mask;
  }
  Bits out(static_cast<std::size_t>(width));
  for (int i = 0; i < width; ++i)
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((reg >> (width - 1 - i)) & 1);
  return out;
}

std::string to_string(Construction method) {
  return method == Construction::bhattacharyya ? "bhattacharyya" : "gaussian_approx";
}

Construction parse_construction(const std::string& name) {
  if (name == "bhattacharyya")
    return Construction::bhattacharyya;
  if (name == "gaussian_approx" || name == "ga")
    return Construction::gaussian_approx;
  throw ParameterError("unknown construction method: " + name);
}

PolarCode::PolarCode(int n, std::vector<std::size_t> info_set, int crc_bits, CrcSpec crc, double design_snr_db,
                     Construction method)
    : n_(n), r_(crc_bits), info_set_(std::move(info_set)), crc_(crc), design_snr_(design_snr_db), method_(method) {
  if (n_ < 0 || n_ > 24)
    throw ParameterError("code exponent n must be in [0, 24]");
  if (crc_.width != r_)
    throw ParameterError("CRC width must equal r");
  crc_.validate();
  const std::size_t length = N();
  if (info_set_.empty() || info_set_.size() > length)
    throw ParameterError("information set size must be in (0, N]");
  if (r_ < 0 || static_cast<std::size_t>(r_) >= info_set_.size())
    throw ParameterError("need 0 <= r < K");
  std::sort(info_set_.begin(), info_set_.end());
  if (std::adjacent_find(info_set_.begin(), info_set_.end()) != info_set_.end())
    throw ParameterError("information set has duplicate indices");
  if (info_set_.back() >= length)
    throw ParameterError("information index out of range");
  frozen_.assign(length, 1);
  for (auto i : info_set_)
    frozen_[i] = 0;
}

std::vector<double> bhattacharyya_log(int n, double z0) {
  if (!(z0 > 0.0 && z0 <= 1.0))
    throw ParameterError("Bhattacharyya seed must lie in (0, 1]");
  std::vector<double> cur{std::log(z0)};
  for (int level = 0; level < n; ++level) {
    std::vector<double> next(cur.size() * 2);
    for (std::size_t j = 0; j < cur.size(); ++j) {
      const double lz = cur[j];
      // 2z - z^2 and z^2, kept in the log domain to avoid underflow
      next[2 * j] = lz + std::log(2.0 - std::exp(lz));
      next[2 * j + 1] = 2.0 * lz;
    }
    cur = std::move(next);
  }
  return cur;
}

namespace {

// ln of the Chung-Richardson-Urbanke phi approximation.
double log_phi(double x) {
  if (x <= 0.0)
    return 0.0;
  if (x < 10.0)
    return std::min(0.0, -0.4527 * std::pow(x, 0.86) + 0.0218);
  return 0.5 * std::log(std::numbers::pi / x) - x / 4.0 + std::log1p(-10.0 / (7.0 * x));
}

double inverse_log_phi(double target) {
  if (target >= 0.0)
    return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (log_phi(hi) > target)
    hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_phi(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace

std::vector<double> gaussian_approx_means(int n, double mean0) {
  if (!(mean0 > 0.0))
    throw ParameterError("Gaussian-approximation seed mean must be positive");
  std::vector<double> cur{mean0};
  for (int level = 0; level < n; ++level) {
    std::vector<double> next(cur.size() * 2);
    for (std::size_t j = 0; j < cur.size(); ++j) {
      const double lp = log_phi(cur[j]);
      const double p = std::exp(lp);
      // check node: phi(m') = 1 - (1 - phi(m))^2
      next[2 * j] = inverse_log_phi(lp + std::log(2.0 - p));
      next[2 * j + 1] = 2.0 * cur[j];
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<std::size_t> select_most_reliable(std::span<const double> scores, std::size_t K, bool lower_is_better) {
  if (K > scores.size())
    throw ParameterError("cannot select more indices than available");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b])
      return lower_is_better ? scores[a] < scores[b] : scores[a] > scores[b];
    return a > b;
  });
  order.resize(K);
  std::sort(order.begin(), order.end());
  return order;
}

CrcSpec CrcSpec::for_width(int width) {
  switch (width) {
  case 0:
    return none();
  case 6:
    return CrcSpec{6, 0x61, 0};
  case 8:
    return crc8();
  case 11:
    return CrcSpec{11, 0xE21, 0};
  case 16:
    return CrcSpec{16, 0x11021, 0};
  case 24:
    return crc24();
  default:
    throw ParameterError("no default CRC polynomial for width " + std::to_string(width));
  }
}

PolarCode construct_code(int n, std::size_t K, int r, double design_snr_db, Construction method,
                         std::optional<CrcSpec> crc_spec) {
  if (n < 0 || n > 24)
    throw ParameterError("code exponent n must be in [0, 24]");
  const std::size_t length = std::size_t{1} << n;
  if (K == 0 || K > length)
    throw ParameterError("need 0 < K <= 2^n");
  if (r < 0 || static_cast<std::size_t>(r) >= K)
    throw ParameterError("need 0 <= r < K");
  const CrcSpec crc = crc_spec ? *crc_spec : CrcSpec::for_width(r);
  if (!std::isfinite(design_snr_db))
    throw ParameterError("design SNR must be finite");
  const double rate = static_cast<double>(K - static_cast<std::size_t>(r)) / static_cast<double>(length);
  const double es_n0 = rate * std::pow(10.0, design_snr_db / 10.0);
  std::vector<std::size_t> info;
  if (method == Construction::bhattacharyya) {
    const auto z = bhattacharyya_log(n, std::exp(-es_n0));
    info = select_most_reliable(z, K, true);
  } else {
    const auto m = gaussian_approx_means(n, 4.0 * es_n0);
    info = select_most_reliable(m, K, false);
  }
  return PolarCode(n, std::move(info), r, crc, design_snr_db, method);
}

void polar_transform(std::span<std::uint8_t> x) {
  const std::size_t length = x.size();
  if (length == 0 || (length & (length - 1)) != 0)
    throw ParameterError("polar transform length must be a power of two");
  for (std::size_t half = 1; half < length; half *= 2)
    for (std::size_t base = 0; base < length; base += 2 * half)
      for (std::size_t j = base; j < base + half; ++j)
        x[j] ^= x[j + half];
}

Bits encode(const PolarCode& code, std::span<const std::uint8_t> u) {
  if (u.size() != code.N())
    throw ParameterError("source word length must equal N");
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] != 0 && code.is_frozen(i))
      throw PreconditionError("frozen bit " + std::to_string(i) + " is set");
  Bits x(u.begin(), u.end());
  polar_transform(x);
  return x;
}

Bits attach_crc(const PolarCode& code, std::span<const std::uint8_t> message) {
  const std::size_t payload = code.K() - static_cast<std::size_t>(code.r());
  if (message.size() != payload)
    throw ParameterError("message length must equal K - r");
  const Bits parity = code.crc().checksum(message);
  Bits u(code.N(), 0);
  const auto& info = code.info_set();
  for (std::size_t j = 0; j < payload; ++j)
    u[info[j]] = message[j] & 1;
  for (std::size_t j = 0; j < parity.size(); ++j)
    u[info[payload + j]] = parity[j];
  return u;
}

Bits extract_info(const PolarCode& code, std::span<const std::uint8_t> u) {
  if (u.size() != code.N())
    throw ParameterError("source word length must equal N");
  Bits info;
  info.reserve(code.K());
  for (auto i : code.info_set())
    info.push_back(u[i]);
  return info;
}

bool check_crc(const PolarCode& code, std::span<const std::uint8_t> info) {
  if (info.size() != code.K())
    throw ParameterError("decoded information length must equal K");
  const std::size_t payload = code.K() - static_cast<std::size_t>(code.r());
  const Bits parity = code.crc().checksum(info.first(payload));
  return std::equal(parity.begin(), parity.end(), info.begin() + static_cast<std::ptrdiff_t>(payload));
}

void save_code(std::ostream& os, const PolarCode& code) {
  std::ostringstream info;
  for (std::size_t j = 0; j < code.info_set().size(); ++j)
    info << (j ? "," : "") << code.info_set()[j];
  std::ostringstream poly;
  poly << "0x" << std::hex << code.crc().polynomial;
  std::ostringstream init;
  init << "0x" << std::hex << code.crc().init;
  std::ostringstream snr;
  snr.precision(17);
  snr << code.design_snr_db();

  boost::property_tree::ptree pt;
  pt.put("n", code.n());
  pt.put("K", code.K());
  pt.put("r", code.r());
  pt.put("design_snr", snr.str());
  pt.put("method", to_string(code.method()));
  pt.put("crc_poly", poly.str());
  pt.put("crc_init", init.str());
  pt.put("info_set", info.str());
  boost::property_tree::write_ini(os, pt);
}

PolarCode load_code(std::istream& is) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(is, pt);
    const int n = pt.get<int>("n");
    const auto K = pt.get<std::size_t>("K");
    const int r = pt.get<int>("r");
    const double snr = pt.get<double>("design_snr", 0.0);
    const auto method = parse_construction(pt.get<std::string>("method", "bhattacharyya"));
    CrcSpec crc{r, std::stoull(pt.get<std::string>("crc_poly", r == 0 ? "0" : "0x1864cfb"), nullptr, 0),
                std::stoull(pt.get<std::string>("crc_init", "0"), nullptr, 0)};
    std::vector<std::size_t> info;
    std::stringstream list(pt.get<std::string>("info_set"));
    for (std::string item; std::getline(list, item, ',');)
      if (!item.empty())
        info.push_back(std::stoull(item));
    if (info.size() != K)
      throw ParameterError("info_set length does not match K");
    return PolarCode(n, std::move(info), r, crc, snr, method);
  } catch (const boost::property_tree::ptree_error& e) {
    throw ParameterError(std::string("malformed code file: ") + e.what());
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ParameterError*>(&e))
      throw;
    throw ParameterError(std::string("malformed code file: ") + e.what());
  }
}

PolarCode load_code_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ParameterError("cannot open code file " + path);
  return load_code(in);
}

void save_code_file(const std::string& path, const PolarCode& code) {
  std::ofstream out(path);
  if (!out)
    throw ParameterError("cannot write code file " + path);
  save_code(out, code);
}

} // namespace tascl
