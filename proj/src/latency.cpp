#include "tascl/latency.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <map>
#include <mutex>

#include "tascl/errors.hpp"

namespace tascl {

Rational parse_rational(const std::string& text) {
  const auto bad = [&] { return ParameterError("not a rational number: '" + text + "'"); };
  const auto to_int = [&](std::string_view s) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
      throw bad();
    return v;
  };
  const std::string_view s(text);
  if (const auto slash = s.find('/'); slash != std::string_view::npos)
    return Rational(to_int(s.substr(0, slash)), to_int(s.substr(slash + 1)));
  if (const auto dot = s.find('.'); dot != std::string_view::npos) {
    const auto frac = s.substr(dot + 1);
    if (frac.empty() || frac.size() > 15 || frac.front() == '-' || frac.front() == '+')
      throw bad();
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i)
      scale *= 10;
    const auto whole_part = s.substr(0, dot);
    const bool negative = !whole_part.empty() && whole_part.front() == '-';
    const std::int64_t whole = whole_part.empty() || whole_part == "-" ? 0 : to_int(whole_part);
    const std::int64_t part = to_int(frac);
    const std::int64_t mag = (whole < 0 ? -whole : whole) * scale + part;
    return Rational(negative ? -mag : mag, scale);
  }
  return Rational(to_int(s));
}

std::string to_string(SpecialNode kind) {
  switch (kind) {
  case SpecialNode::rate0: return "rate0";
  case SpecialNode::rate1: return "rate1";
  case SpecialNode::rep: return "rep";
  case SpecialNode::spc: return "spc";
  case SpecialNode::rep2: return "rep2";
  case SpecialNode::spc2: return "spc2";
  }
  return "?";
}

std::string to_string(CycleGroup group) {
  switch (group) {
  case CycleGroup::one_cycle: return "one_cycle";
  case CycleGroup::two_cycle: return "two_cycle";
  case CycleGroup::three_cycle: return "three_cycle";
  case CycleGroup::four_cycle: return "four_cycle";
  }
  return "?";
}

namespace {

bool match_node(std::span<const std::uint8_t> m, bool is_whole, bool allow_double, SpecialNode& kind) {
  const std::size_t t = m.size();
  const auto frozen = static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
  const auto leading = [&](std::size_t k) {
    for (std::size_t j = 0; j < t; ++j)
      if (m[j] != (j < k ? 1 : 0))
        return false;
    return true;
  };
  if (frozen == t) {
    kind = SpecialNode::rate0;
  } else if (frozen == 0) {
    kind = SpecialNode::rate1;
  } else if (leading(t - 1)) {
    kind = SpecialNode::rep;
  } else if (leading(1)) {
    kind = SpecialNode::spc;
  } else if (allow_double && is_whole && t >= 4 && leading(t - 2)) {
    kind = SpecialNode::rep2;
  } else if (allow_double && is_whole && t >= 4 && leading(2)) {
    kind = SpecialNode::spc2;
  } else {
    return false;
  }
  return true;
}

void decompose(std::span<const std::uint8_t> m, std::size_t offset, bool is_whole, bool allow_double,
               std::vector<NodeSpan>& out) {
  SpecialNode kind{};
  if (match_node(m, is_whole, allow_double, kind)) {
    out.push_back({kind, offset, m.size()});
    return;
  }
  const std::size_t half = m.size() / 2;
  decompose(m.first(half), offset, false, allow_double, out);
  decompose(m.subspan(half), offset + half, false, allow_double, out);
}

void require_merge_length(int merge_length) {
  if (merge_length != kMergeLength)
    throw ParameterError("only a merge length of 16 has a defined special-node table");
}

void require_frozen(int frozen, int merge_length) {
  if (frozen < 0 || frozen > merge_length)
    throw ParameterError("frozen count outside [0, merge length]");
}

} // namespace

std::vector<NodeSpan> decompose_special_nodes(std::span<const std::uint8_t> frozen_mask, bool allow_double) {
  if (frozen_mask.empty() || !std::has_single_bit(frozen_mask.size()))
    throw ParameterError("mask length must be a power of two");
  std::vector<NodeSpan> out;
  decompose(frozen_mask, 0, true, allow_double, out);
  return out;
}

int m_sn(int frozen, int merge_length) {
  require_merge_length(merge_length);
  require_frozen(frozen, merge_length);
  switch (frozen) {
  case 0: case 1: case 2: case 14: case 15: case 16: return 1;
  case 7: case 8: case 9: return 2;
  default: return 3;
  }
}

int c_sort(int frozen, int list_size, int merge_length) {
  require_frozen(frozen, merge_length);
  if (list_size == 1)
    return 0;
  if (list_size != 2)
    throw ParameterError("the fast decoder supports list sizes 1 and 2");
  return frozen == 0 || frozen == merge_length ? 0 : 1;
}

CycleGroup cycle_group(int frozen, int merge_length) {
  return static_cast<CycleGroup>(m_sn(frozen, merge_length) + c_sort(frozen, 2, merge_length) - 1);
}

int group_cycles(CycleGroup group, int list_size) {
  if (list_size != 1 && list_size != 2)
    throw ParameterError("the fast decoder supports list sizes 1 and 2");
  switch (group) {
  case CycleGroup::one_cycle: return 1;
  case CycleGroup::two_cycle: return list_size == 2 ? 2 : 1;
  case CycleGroup::three_cycle: return list_size == 2 ? 3 : 2;
  case CycleGroup::four_cycle: return list_size == 2 ? 4 : 3;
  }
  return 0;
}

SubcodePattern classify_subcode(int frozen, int merge_length) {
  require_merge_length(merge_length);
  require_frozen(frozen, merge_length);
  static std::mutex lock;
  static std::map<int, SubcodePattern> cache;
  std::lock_guard guard(lock);
  if (auto it = cache.find(frozen); it != cache.end())
    return it->second;

  const auto M = static_cast<std::size_t>(merge_length);
  SubcodePattern best;
  best.merge_length = merge_length;
  best.frozen = frozen;
  best.group = cycle_group(frozen, merge_length);
  Bits mask(M);
  bool found = false;
  for (std::uint32_t bits = 0; bits < (1U << M); ++bits) {
    if (std::popcount(bits) != frozen)
      continue;
    for (std::size_t j = 0; j < M; ++j)
      mask[j] = static_cast<std::uint8_t>((bits >> (M - 1 - j)) & 1U);
    auto nodes = decompose_special_nodes(mask);
    // Iterating upward visits left-heavy masks last, so `<=` keeps them.
    if (!found || nodes.size() <= best.special_nodes.size()) {
      best.mask = mask;
      best.special_nodes = std::move(nodes);
      found = true;
    }
  }
  cache.emplace(frozen, best);
  return best;
}

std::vector<int> subcode_frozen_counts(const PolarCode& code, int merge_length) {
  const auto M = static_cast<std::size_t>(merge_length);
  if (M == 0 || code.N() % M != 0)
    throw ParameterError("code length must be a multiple of the merge length");
  std::vector<int> counts(code.N() / M, 0);
  for (std::size_t i = 0; i < code.N(); ++i)
    counts[i / M] += code.is_frozen(i) ? 1 : 0;
  return counts;
}

GroupCounts group_counts(const PolarCode& code, int merge_length) {
  GroupCounts g;
  for (int f : subcode_frozen_counts(code, merge_length))
    ++g[cycle_group(f, merge_length)];
  return g;
}

DsLatency ds_latency(const GroupCounts& groups, std::int64_t N, std::int64_t P, int list_size, int merge_length) {
  require_merge_length(merge_length);
  if (N <= 0 || P <= 0 || N % merge_length != 0 || N % (2 * P) != 0)
    throw ParameterError("N must be divisible by the merge length and by 2P");
  if (groups.total() != N / merge_length)
    throw ParameterError("group counts must cover N / merge length sub-codes");
  DsLatency d;
  for (int g = 0; g < 4; ++g)
    d.mbd += groups.count[static_cast<std::size_t>(g)] * group_cycles(static_cast<CycleGroup>(g), list_size);
  d.scd = N / merge_length - 1;
  d.rw = N / (2 * P);
  d.total = d.mbd + d.scd + d.rw;
  return d;
}

DsLatency ds_latency(const PolarCode& code, std::int64_t P, int list_size, int merge_length) {
  return ds_latency(group_counts(code, merge_length), static_cast<std::int64_t>(code.N()), P, list_size,
                    merge_length);
}

std::int64_t dl_latency(const DlLatency& d) { return d.lm + d.scd + d.fine + d.zero; }

Rational speed_gain(std::int64_t c_l, std::int64_t c_s, std::int64_t max_denominator) {
  if (c_l <= 0 || c_s <= 0)
    throw ParameterError("cycle counts must be positive");
  if (max_denominator < 1)
    throw ParameterError("maximum denominator must be at least 1");
  const Rational exact(c_l, c_s);
  if (exact.den() <= max_denominator)
    return exact;
  Rational best;
  bool found = false;
  for (std::int64_t d = 1; d <= max_denominator; ++d) {
    const std::int64_t n = (c_l * d + c_s - 1) / c_s;
    const Rational cand(n, d);
    if (!found || cand < best) {
      best = cand;
      found = true;
    }
  }
  return best;
}

MemoryEstimate memory_estimate(std::int64_t N, std::int64_t Q, std::int64_t list_s, std::int64_t list_l,
                               std::int64_t P, const Rational& beta, std::int64_t zeta) {
  if (N <= 0 || Q <= 0 || list_s < 0 || list_l <= 0 || P <= 0 || zeta < 0 || beta <= Rational(0))
    throw ParameterError("memory estimate arguments out of range");
  MemoryEstimate m;
  const Rational dl = Rational((list_l + 1) * N + 3 * list_l * P) * Q + Rational(list_l * 3 * N, 2);
  const Rational other = (Rational(zeta + list_s) + Rational(5, 2)) * N * Q +
                         (Rational(output_buffer_frames(beta, zeta)) + Rational(3 * list_s, 2)) * N;
  if (!dl.is_integer() || !other.is_integer())
    throw ParameterError("memory estimate is not a whole number of bits; use an even N");
  m.dl_bits = dl.num();
  m.other_bits = other.num();
  m.overhead_ratio = static_cast<double>(m.other_bits) / static_cast<double>(m.dl_bits);
  return m;
}

Rational system_latency(std::int64_t c_s, std::int64_t c_rw, const Rational& beta, std::int64_t zeta) {
  return Rational(c_s) + Rational(c_s) * (beta * zeta + beta) + Rational(c_rw);
}

std::int64_t output_buffer_frames(const Rational& beta, std::int64_t zeta) {
  return (beta * zeta + beta + Rational(1)).floor();
}

namespace {

std::vector<CodePreset> builtin_presets() {
  const auto preset = [](std::string name, std::int64_t N, std::int64_t K, int r, std::int64_t reliable,
                         GroupCounts g, DlLatency dl) {
    CodePreset p;
    p.name = std::move(name);
    p.N = N;
    p.K = K;
    p.r = r;
    p.reliable_bits = reliable;
    p.groups = g;
    p.P = 64;
    p.dl = dl;
    return p;
  };
  return {
      preset("p1", 1024, 512, 24, 360, GroupCounts{{32, 13, 2, 17}}, DlLatency{520, 296, -128, -41, 32, 4, 64}),
      preset("p2", 1024, 768, 24, 622, GroupCounts{{38, 12, 2, 12}}, DlLatency{501, 296, -128, -18, 32, 4, 64}),
      preset("p3", 256, 128, 8, 78, GroupCounts{{6, 4, 2, 4}}, DlLatency{152, 66, -32, -18, 32, 4, 64}),
  };
}

} // namespace

const CodePreset& code_preset(const std::string& name) {
  static const std::vector<CodePreset> presets = builtin_presets();
  for (const auto& p : presets)
    if (p.name == name)
      return p;
  throw ParameterError("unknown code preset '" + name + "' (expected p1, p2 or p3)");
}

std::vector<std::string> code_preset_names() { return {"p1", "p2", "p3"}; }

const std::vector<DecoderDesign>& decoder_designs() {
  static const std::vector<DecoderDesign> designs{
      {"d1", "p1", 2, 32, 2}, {"d2", "p2", 2, 32, 2}, {"d3", "p3", 2, 32, 2},
      {"d4", "p1", 1, 32, 6}, {"d5", "p1", 2, 8, 2},
  };
  return designs;
}

} // namespace tascl
