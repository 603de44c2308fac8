#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "tascl/channel.hpp"
#include "tascl/latency.hpp"

namespace tascl {

/// Flat `key = value` settings with `[section]` headers; section keys are
/// addressed as `section.key`.
class Config {
public:
  Config() = default;
  static Config from_file(const std::string& path);
  static Config from_stream(std::istream& is);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated numbers, or `start:step:stop` (inclusive).
  std::vector<double> get_grid(const std::string& key, const std::vector<double>& fallback) const;

  /// Fixed-point setup from quant.llr_bits, quant.pm_bits and
  /// quant.frac_bits; nothing unless quant.enabled is true or any of
  /// those keys is present.
  std::optional<FixedPoint> fixed_point() const;

  const boost::property_tree::ptree& tree() const { return tree_; }

private:
  template <typename T>
  T get(const std::string& key, T fallback) const;

  boost::property_tree::ptree tree_;
};

std::vector<double> parse_grid(const std::string& text);

/// Code presets in the same INI form as data/presets.ini.
std::vector<CodePreset> load_code_presets(std::istream& is);
std::vector<CodePreset> load_code_presets_file(const std::string& path);

} // namespace tascl
