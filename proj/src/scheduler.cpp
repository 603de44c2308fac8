#include "tascl/scheduler.hpp"

#include <limits>
#include <ostream>
#include <tuple>

#include "tascl/channel.hpp"
#include "tascl/errors.hpp"

namespace tascl {

std::string to_string(SlotEvent e) {
  switch (e) {
  case SlotEvent::pass: return "pass";
  case SlotEvent::fail_start: return "fail_start";
  case SlotEvent::fail_queued: return "fail_queued";
  case SlotEvent::overflow: return "overflow";
  }
  return "?";
}

std::vector<double> SchedulerStats::occupancy_frequencies() const {
  std::vector<double> f(state_occupancy.size(), 0.0);
  if (counted_slots == 0)
    return f;
  for (std::size_t k = 0; k < f.size(); ++k)
    f[k] = static_cast<double>(state_occupancy[k]) / static_cast<double>(counted_slots);
  return f;
}

Scheduler::Scheduler(const SchedulerConfig& cfg) : cfg_(cfg) {
  cfg_.params.validate();
  const auto& p = cfg_.params;
  const Rational beta = p.beta();
  warmup_ = cfg_.warmup ? *cfg_.warmup : (beta * p.zeta + beta).ceil() + 1;
  if (warmup_ < 0)
    throw ParameterError("warm-up must be non-negative");
  if (cfg_.c_s < 0 || cfg_.c_rw < 0)
    throw ParameterError("cycle counts must be non-negative");
  stats_.state_occupancy.assign(static_cast<std::size_t>(p.beta_n * p.zeta + p.beta_n + 1), 0);
}

std::int64_t Scheduler::work() const {
  return busy_ ? remaining_ + cfg_.params.beta_n * static_cast<std::int64_t>(queue_.size()) : 0;
}

std::int64_t Scheduler::emit_time(std::int64_t frame) const {
  const auto& p = cfg_.params;
  return (frame + 1) * p.beta_d + p.beta_n * (p.zeta + 1);
}

Scheduler::OutputEntry& Scheduler::entry(std::int64_t frame) {
  if (output_.empty() || frame < output_.front().frame || frame > output_.back().frame)
    throw InvariantViolation("frame " + std::to_string(frame) + " is not in the output buffer");
  return output_[static_cast<std::size_t>(frame - output_.front().frame)];
}

void Scheduler::advance_dl(std::int64_t until) {
  while (busy_ && now_ + remaining_ <= until) {
    now_ += remaining_;
    auto& e = entry(current_);
    e.pending = false;
    e.correct = current_correct_;
    e.settled_at = now_;
    ++stats_.dl_completions;
    if (queue_.empty()) {
      busy_ = false;
    } else {
      std::tie(current_, current_correct_) = queue_.front();
      queue_.pop_front();
      remaining_ = cfg_.params.beta_n;
    }
  }
  if (busy_)
    remaining_ -= until - now_;
  now_ = until;
}

void Scheduler::emit_until(std::int64_t t, bool inclusive) {
  while (!output_.empty()) {
    const auto& e = output_.front();
    const auto at = emit_time(e.frame);
    if (at > t || (at == t && !inclusive))
      break;
    if (e.pending || e.settled_at > at)
      throw InvariantViolation("frame " + std::to_string(e.frame) + " emitted before its result settled");
    ++stats_.emitted;
    if (!e.correct)
      ++stats_.frame_errors;
    if (cfg_.c_s > 0) {
      const Rational lat =
          Rational(at - e.frame * cfg_.params.beta_d) * Rational(cfg_.c_s, cfg_.params.beta_d) + Rational(cfg_.c_rw);
      if (!stats_.min_latency_cycles || lat < *stats_.min_latency_cycles)
        stats_.min_latency_cycles = lat;
      if (!stats_.max_latency_cycles || lat > *stats_.max_latency_cycles)
        stats_.max_latency_cycles = lat;
    }
    output_.pop_front();
  }
}

SlotEvent Scheduler::step(const FrameOutcome& frame) {
  const auto& p = cfg_.params;
  const std::int64_t t = slot_;
  const std::int64_t end = (t + 1) * p.beta_d;
  const bool counted = t >= warmup_;

  const auto k = work();
  if (k < 0 || static_cast<std::size_t>(k) >= stats_.state_occupancy.size())
    throw InvariantViolation("slow-decoder backlog outside the state space");
  if (counted) {
    ++stats_.counted_slots;
    ++stats_.state_occupancy[static_cast<std::size_t>(k)];
  }

  advance_dl(end);
  emit_until(end, false);

  ++stats_.frames;
  SlotEvent event = SlotEvent::pass;
  if (frame.ds_crc_pass) {
    output_.push_back({t, false, frame.ds_correct, end});
  } else {
    ++stats_.ds_failures;
    if (counted)
      ++stats_.counted_failures;
    if (busy_ && static_cast<std::int64_t>(queue_.size()) >= p.zeta) {
      event = SlotEvent::overflow;
      ++stats_.overflows;
      if (counted)
        ++stats_.counted_overflows;
      output_.push_back({t, false, frame.ds_correct, end});
    } else {
      output_.push_back({t, true, false, -1});
      if (busy_) {
        queue_.emplace_back(t, frame.dl_correct);
        event = SlotEvent::fail_queued;
      } else {
        busy_ = true;
        current_ = t;
        current_correct_ = frame.dl_correct;
        remaining_ = p.beta_n;
        event = SlotEvent::fail_start;
      }
    }
  }
  if (static_cast<std::int64_t>(queue_.size()) > p.zeta)
    throw InvariantViolation("LLR buffer exceeded its capacity");
  stats_.max_llr_buffer = std::max(stats_.max_llr_buffer, queue_.size());
  stats_.max_output_buffer = std::max(stats_.max_output_buffer, output_.size());
  emit_until(end, true);
  ++slot_;
  return event;
}

void Scheduler::drain() {
  advance_dl(std::numeric_limits<std::int64_t>::max() / 4);
  emit_until(std::numeric_limits<std::int64_t>::max(), true);
}

void write_trace_header(std::ostream& os) { os << "slot,X,buffer_occ,dl_remaining,event\n"; }

void write_trace_row(std::ostream& os, const TraceRow& row) {
  os << row.slot << ',' << row.x << ',' << row.buffer_occ << ',' << row.dl_remaining << ',' << to_string(row.event)
     << '\n';
}

namespace {

template <typename Next>
SchedulerStats run(const SchedulerConfig& cfg, std::uint64_t n_slots, Next&& next, std::ostream* trace,
                   std::vector<SlotEvent>* events) {
  Scheduler s(cfg);
  if (trace)
    write_trace_header(*trace);
  for (std::uint64_t i = 0; i < n_slots; ++i) {
    const TraceRow before{s.slot(), Rational(s.work(), cfg.params.beta_d), s.llr_buffer_size(), s.dl_remaining(),
                          SlotEvent::pass};
    const auto ev = s.step(next(i));
    if (events)
      events->push_back(ev);
    if (trace) {
      auto row = before;
      row.event = ev;
      write_trace_row(*trace, row);
    }
  }
  s.drain();
  return s.stats();
}

} // namespace

SchedulerStats simulate_bernoulli(const SchedulerConfig& cfg, std::uint64_t n_slots, std::uint64_t seed,
                                  std::ostream* trace) {
  cfg.params.validate();
  auto rng = frame_rng(seed, 0, Stream::bernoulli);
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double eps_s = cfg.params.eps_s;
  const double eps_l = cfg.params.eps_l;
  return run(
      cfg, n_slots,
      [&](std::uint64_t) {
        const bool fail = uniform() < eps_s;
        const bool dl_wrong = uniform() < eps_l;
        return FrameOutcome{!fail, !fail, !dl_wrong};
      },
      trace, nullptr);
}

SchedulerStats simulate_outcomes(const SchedulerConfig& cfg, const std::vector<FrameOutcome>& outcomes,
                                 std::ostream* trace, std::vector<SlotEvent>* events) {
  return run(
      cfg, outcomes.size(), [&](std::uint64_t i) { return outcomes[i]; }, trace, events);
}

} // namespace tascl
