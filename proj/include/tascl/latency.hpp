#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tascl/codec.hpp"
#include "tascl/rational.hpp"

namespace tascl {

// Merge length of the multi-bit stage in the fast decoder; the only one
// with a known special-node cycle table.
inline constexpr int kMergeLength = 16;

enum class SpecialNode { rate0, rate1, rep, spc, rep2, spc2 };
std::string to_string(SpecialNode kind);

struct NodeSpan {
  SpecialNode kind;
  std::size_t offset;
  std::size_t length;

  friend bool operator==(const NodeSpan&, const NodeSpan&) = default;
};

/// Fewest aligned special nodes covering a frozen mask (1 = frozen).
/// Rep2/SPC2 are only admitted when `allow_double` and the span is the
/// whole mask.
std::vector<NodeSpan> decompose_special_nodes(std::span<const std::uint8_t> frozen_mask, bool allow_double = true);

/// Groups named by their cycle cost with a two-path list.
enum class CycleGroup { one_cycle = 0, two_cycle = 1, three_cycle = 2, four_cycle = 3 };
std::string to_string(CycleGroup group);

struct SubcodePattern {
  int merge_length = kMergeLength;
  int frozen = 0;
  CycleGroup group = CycleGroup::one_cycle;
  Bits mask;
  std::vector<NodeSpan> special_nodes;
};

/// Special-node count per sub-code for a given frozen count.
int m_sn(int frozen, int merge_length = kMergeLength);
/// Extra pruning cycle of a sub-code.
int c_sort(int frozen, int list_size, int merge_length = kMergeLength);
CycleGroup cycle_group(int frozen, int merge_length = kMergeLength);
/// Decoding cycles of a sub-code in `group` for list size 1 or 2.
int group_cycles(CycleGroup group, int list_size);

/// The pattern with `frozen` frozen bits that needs the fewest special
/// nodes; ties prefer frozen bits further left.
SubcodePattern classify_subcode(int frozen, int merge_length = kMergeLength);

struct GroupCounts {
  std::array<std::int64_t, 4> count{};

  std::int64_t& operator[](CycleGroup g) { return count[static_cast<std::size_t>(g)]; }
  std::int64_t operator[](CycleGroup g) const { return count[static_cast<std::size_t>(g)]; }
  std::int64_t total() const { return count[0] + count[1] + count[2] + count[3]; }
  friend bool operator==(const GroupCounts&, const GroupCounts&) = default;
};

std::vector<int> subcode_frozen_counts(const PolarCode& code, int merge_length = kMergeLength);
GroupCounts group_counts(const PolarCode& code, int merge_length = kMergeLength);

struct DsLatency {
  std::int64_t mbd = 0;
  std::int64_t scd = 0;
  std::int64_t rw = 0;
  std::int64_t total = 0;

  friend bool operator==(const DsLatency&, const DsLatency&) = default;
};

DsLatency ds_latency(const GroupCounts& groups, std::int64_t N, std::int64_t P, int list_size,
                     int merge_length = kMergeLength);
DsLatency ds_latency(const PolarCode& code, std::int64_t P, int list_size, int merge_length = kMergeLength);

/// Cycle components of the large-list decoder; taken as given.
struct DlLatency {
  std::int64_t lm = 0;
  std::int64_t scd = 0;
  std::int64_t fine = 0;
  std::int64_t zero = 0;
  int list_size = 32;
  int merge_length = 4;
  std::int64_t P = 64;
};

std::int64_t dl_latency(const DlLatency& d);

/// C_l / C_s in lowest terms, or the smallest fraction above it whose
/// denominator does not exceed `max_denominator`.
Rational speed_gain(std::int64_t c_l, std::int64_t c_s, std::int64_t max_denominator);

struct MemoryEstimate {
  std::int64_t dl_bits = 0;
  std::int64_t other_bits = 0;
  double overhead_ratio = 0.0;
};

MemoryEstimate memory_estimate(std::int64_t N, std::int64_t Q, std::int64_t list_s, std::int64_t list_l,
                               std::int64_t P, const Rational& beta, std::int64_t zeta);

/// Cycles from a frame's arrival to its release from the output buffer.
Rational system_latency(std::int64_t c_s, std::int64_t c_rw, const Rational& beta, std::int64_t zeta);
std::int64_t output_buffer_frames(const Rational& beta, std::int64_t zeta);

struct CodePreset {
  std::string name;
  std::int64_t N = 0;
  std::int64_t K = 0;
  int r = 0;
  std::int64_t reliable_bits = 0;
  GroupCounts groups;
  std::int64_t P = 64;
  DlLatency dl;
};

const CodePreset& code_preset(const std::string& name);
std::vector<std::string> code_preset_names();

/// A full two-decoder configuration built on one of the code presets.
struct DecoderDesign {
  std::string name;
  std::string code;
  int list_s = 2;
  int list_l = 32;
  std::int64_t zeta = 2;
};

const std::vector<DecoderDesign>& decoder_designs();

} // namespace tascl
