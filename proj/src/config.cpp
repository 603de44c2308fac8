#include "tascl/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "tascl/errors.hpp"

namespace tascl {

namespace pt = boost::property_tree;

Config Config::from_stream(std::istream& is) {
  Config c;
  try {
    pt::read_ini(is, c.tree_);
  } catch (const pt::ptree_error& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ParameterError("cannot open config file '" + path + "'");
  return from_stream(in);
}

bool Config::has(const std::string& key) const { return tree_.get_child_optional(key).has_value(); }

template <typename T>
T Config::get(const std::string& key, T fallback) const {
  // The defaulted ptree getter also falls back on unparsable values.
  if (!tree_.get_optional<std::string>(key))
    return fallback;
  try {
    return tree_.get<T>(key);
  } catch (const pt::ptree_error& e) {
    throw ParameterError("config key '" + key + "': " + e.what());
  }
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return get<std::string>(key, fallback);
}
double Config::get_double(const std::string& key, double fallback) const { return get<double>(key, fallback); }
std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  return get<std::int64_t>(key, fallback);
}
bool Config::get_bool(const std::string& key, bool fallback) const { return get<bool>(key, fallback); }

std::vector<double> parse_grid(const std::string& text) {
  const auto num = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size())
        throw ParameterError("");
      return v;
    } catch (const std::exception&) {
      throw ParameterError("bad number '" + s + "' in grid '" + text + "'");
    }
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, sep);) {
    const auto b = p.find_first_not_of(" \t");
    const auto e = p.find_last_not_of(" \t");
    parts.push_back(b == std::string::npos ? "" : p.substr(b, e - b + 1));
  }
  std::vector<double> grid;
  if (sep == ':') {
    if (parts.size() != 3)
      throw ParameterError("range grid must be start:step:stop");
    const double start = num(parts[0]);
    const double step = num(parts[1]);
    const double stop = num(parts[2]);
    if (!(step > 0.0) || stop < start)
      throw ParameterError("range grid needs step > 0 and stop >= start");
    const auto n = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9));
    for (std::int64_t i = 0; i <= n; ++i)
      grid.push_back(start + static_cast<double>(i) * step);
  } else {
    for (const auto& p : parts)
      grid.push_back(num(p));
  }
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw ParameterError("grid '" + text + "' must be strictly increasing");
  return grid;
}

std::vector<double> Config::get_grid(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key))
    return fallback;
  return parse_grid(get_string(key, ""));
}

std::optional<FixedPoint> Config::fixed_point() const {
  const bool any = has("quant.llr_bits") || has("quant.pm_bits") || has("quant.frac_bits");
  if (!get_bool("quant.enabled", any))
    return std::nullopt;
  FixedPoint fp;
  const int frac = static_cast<int>(get_int("quant.frac_bits", fp.llr.fraction_bits));
  fp.llr.total_bits = static_cast<int>(get_int("quant.llr_bits", fp.llr.total_bits));
  fp.pm.total_bits = static_cast<int>(get_int("quant.pm_bits", fp.pm.total_bits));
  fp.llr.fraction_bits = frac;
  fp.pm.fraction_bits = frac;
  fp.llr.validate();
  fp.pm.validate();
  return fp;
}

std::vector<CodePreset> load_code_presets(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ptree_error& e) {
    throw ParameterError(std::string("presets: ") + e.what());
  }
  std::vector<CodePreset> out;
  try {
    for (const auto& [name, sec] : tree) {
      CodePreset p;
      p.name = name;
      p.N = sec.get<std::int64_t>("N");
      p.K = sec.get<std::int64_t>("K");
      p.r = sec.get<int>("r");
      p.reliable_bits = sec.get<std::int64_t>("reliable_bits", 0);
      p.groups = GroupCounts{{sec.get<std::int64_t>("groups_one_cycle"), sec.get<std::int64_t>("groups_two_cycle"),
                              sec.get<std::int64_t>("groups_three_cycle"), sec.get<std::int64_t>("groups_four_cycle")}};
      p.P = sec.get<std::int64_t>("P", 64);
      p.dl.lm = sec.get<std::int64_t>("dl_lm");
      p.dl.scd = sec.get<std::int64_t>("dl_scd");
      p.dl.fine = sec.get<std::int64_t>("dl_fine");
      p.dl.zero = sec.get<std::int64_t>("dl_zero");
      p.dl.list_size = sec.get<int>("dl_list", 32);
      p.dl.merge_length = sec.get<int>("dl_merge", 4);
      p.dl.P = p.P;
      out.push_back(p);
    }
  } catch (const pt::ptree_error& e) {
    throw ParameterError(std::string("presets: ") + e.what());
  }
  return out;
}

std::vector<CodePreset> load_code_presets_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ParameterError("cannot open presets file '" + path + "'");
  return load_code_presets(in);
}

} // namespace tascl
