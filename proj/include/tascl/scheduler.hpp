#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tascl/codec.hpp"
#include "tascl/markov.hpp"
#include "tascl/rational.hpp"

namespace tascl {

/// Per-frame outcome of both decoders, known before scheduling.
struct FrameOutcome {
  bool ds_crc_pass = true;
  bool ds_correct = true;
  bool dl_correct = true;
};

enum class SlotEvent { pass, fail_start, fail_queued, overflow };
std::string to_string(SlotEvent e);

struct SchedulerConfig {
  TasclParams params;
  /// Fast-decoder cycles per frame and LLR load cycles; only used to
  /// express emission latency in clock cycles. Zero disables it.
  std::int64_t c_s = 0;
  std::int64_t c_rw = 0;
  /// Slots excluded from statistics; defaults to ⌈βζ+β⌉ + 1.
  std::optional<std::int64_t> warmup;
};

struct SchedulerStats {
  std::uint64_t frames = 0;
  std::uint64_t ds_failures = 0;
  std::uint64_t overflows = 0;
  std::uint64_t dl_completions = 0;
  std::uint64_t frame_errors = 0;
  std::uint64_t emitted = 0;
  /// Counters restricted to slots after the warm-up.
  std::uint64_t counted_slots = 0;
  std::uint64_t counted_failures = 0;
  std::uint64_t counted_overflows = 0;
  /// Slot-start visits per Markov state index, after the warm-up.
  std::vector<std::uint64_t> state_occupancy;
  std::size_t max_llr_buffer = 0;
  std::size_t max_output_buffer = 0;
  std::optional<Rational> min_latency_cycles;
  std::optional<Rational> max_latency_cycles;

  std::vector<double> occupancy_frequencies() const;
};

struct TraceRow {
  std::int64_t slot;
  Rational x;
  std::size_t buffer_occ;
  std::int64_t dl_remaining;
  SlotEvent event;
};

/// Slot-by-slot model of the fast decoder, the LLR buffer, the slow
/// decoder and the reordering output buffer. Time runs in sub-slots: a
/// slot is beta_d sub-slots and a slow decode takes beta_n.
class Scheduler {
public:
  explicit Scheduler(const SchedulerConfig& cfg);

  /// Processes the next input frame and returns what happened to it.
  SlotEvent step(const FrameOutcome& frame);
  /// Emits every frame still held; call once after the last step.
  void drain();

  std::int64_t slot() const { return slot_; }
  /// Remaining slow-decoder work in sub-slots.
  std::int64_t work() const;
  std::size_t llr_buffer_size() const { return queue_.size(); }
  std::int64_t dl_remaining() const { return busy_ ? remaining_ : 0; }
  std::size_t output_buffer_size() const { return output_.size(); }
  const SchedulerStats& stats() const { return stats_; }
  const SchedulerConfig& config() const { return cfg_; }

private:
  struct OutputEntry {
    std::int64_t frame;
    bool pending;
    bool correct;
    std::int64_t settled_at;
  };

  std::int64_t emit_time(std::int64_t frame) const;
  void advance_dl(std::int64_t until);
  void emit_until(std::int64_t t, bool inclusive);
  OutputEntry& entry(std::int64_t frame);

  SchedulerConfig cfg_;
  std::int64_t warmup_;
  std::int64_t slot_ = 0;
  std::int64_t now_ = 0;
  bool busy_ = false;
  std::int64_t current_ = -1;
  bool current_correct_ = true;
  std::int64_t remaining_ = 0;
  // Buffered frames with the correctness of their eventual slow decode.
  std::deque<std::pair<std::int64_t, bool>> queue_;
  std::deque<OutputEntry> output_;
  SchedulerStats stats_;
};

/// Bernoulli-driven run: the fast decoder fails with probability eps_s and
/// a slow decode is wrong with probability eps_l. `trace` gets one CSV
/// row per slot when set.
SchedulerStats simulate_bernoulli(const SchedulerConfig& cfg, std::uint64_t n_slots, std::uint64_t seed,
                                  std::ostream* trace = nullptr);

/// Runs a fixed outcome sequence through the scheduler.
SchedulerStats simulate_outcomes(const SchedulerConfig& cfg, const std::vector<FrameOutcome>& outcomes,
                                 std::ostream* trace = nullptr, std::vector<SlotEvent>* events = nullptr);

void write_trace_header(std::ostream& os);
void write_trace_row(std::ostream& os, const TraceRow& row);

} // namespace tascl
