#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tascl/channel.hpp"
#include "tascl/codec.hpp"

namespace tascl {

// Min-sum check node.
inline Llr f_node(Llr a, Llr b) {
  const Llr m = std::min(a < 0 ? -a : a, b < 0 ? -b : b);
  return ((a < 0) != (b < 0)) ? -m : m;
}

// Variable node given the partial sum of the left sibling.
inline Llr g_node(Llr a, Llr b, std::uint8_t ps) { return (ps ? -a : a) + b; }

// Θ(Λ): 1 unless Λ is strictly positive.
inline std::uint8_t theta(Llr llr) { return llr > 0 ? 0 : 1; }

inline std::uint8_t hard_decision(Llr llr, std::size_t i, const PolarCode& code) {
  return code.is_frozen(i) ? 0 : theta(llr);
}

/// Partial sums handed to the G-nodes of a stage-s subtree: the last 2^s
/// decoded bits re-encoded by F^{(x)s}.
Bits update_partial_sums(std::span<const std::uint8_t> u_block);

/// Successive cancellation with min-sum updates. With `quant`, channel LLRs
/// are quantized first and every G-node output saturates to the same range.
Bits sc_decode(std::span<const Llr> llr, const PolarCode& code, const std::optional<QuantSpec>& quant = std::nullopt);

struct ListCandidate {
  Bits u;
  double metric = 0.0;
  bool crc_pass = false;
};

struct SclDecodeResult {
  /// Ascending metric; equal metrics keep path order.
  std::vector<ListCandidate> candidates;
  std::size_t selected = 0;
  bool passed_crc = false;
  /// Number of path-metric additions clipped by the fixed-point range.
  std::uint64_t pm_saturations = 0;

  const Bits& output() const { return candidates[selected].u; }
};

/// Called after each prune with the 2L expanded metrics (candidate 2l keeps
/// path l's hard decision, 2l+1 flips it) and the kept candidate indices.
using PruneObserver = std::function<void(std::span<const double> expanded, std::span<const std::size_t> kept)>;

struct SclOptions {
  std::optional<FixedPoint> fixed_point;
  PruneObserver on_prune;
};

/// List decoding with lazily copied per-stage buffers.
SclDecodeResult scl_decode(std::span<const Llr> llr, const PolarCode& code, std::size_t list_size,
                           const SclOptions& options = {});

enum class AsclVariant { original, simplified };

struct AsclResult {
  SclDecodeResult result;
  std::vector<std::size_t> attempted;

  std::size_t list_size_sum() const;
  std::size_t terminal_list_size() const { return attempted.back(); }
};

/// Adaptive list decoding: retry with a larger list while CRC fails.
/// The original variant doubles from 1 to `max_list`; the simplified one
/// tries 1 and then `max_list`.
AsclResult ascl_decode(std::span<const Llr> llr, const PolarCode& code, std::size_t max_list, AsclVariant variant,
                       const SclOptions& options = {});

} // namespace tascl
