#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tascl/errors.hpp"
#include "tascl/latency.hpp"
#include "tascl/scheduler.hpp"

using namespace tascl;

namespace {

constexpr FrameOutcome kPass{true, true, true};
constexpr FrameOutcome kFail{false, false, true};

SchedulerConfig config(std::int64_t bn, std::int64_t bd, std::int64_t zeta, double eps_s = 0.0) {
  SchedulerConfig c;
  c.params = TasclParams{bn, bd, zeta, eps_s, 0.0};
  return c;
}

} // namespace

TEST_CASE("all frames pass: nothing is buffered") {
  Scheduler s(config(3, 1, 2));
  for (int i = 0; i < 100; ++i) {
    CHECK(s.step(kPass) == SlotEvent::pass);
    CHECK(s.work() == 0);
    CHECK(s.llr_buffer_size() == 0);
  }
  s.drain();
  CHECK(s.stats().overflows == 0);
  CHECK(s.stats().dl_completions == 0);
  CHECK(s.stats().emitted == 100);
  CHECK(s.stats().frame_errors == 0);
}

TEST_CASE("beta=3, zeta=1: third consecutive failure overflows") {
  // Slot 0 starts a slow decode (3 slots). Slot 1 queues behind it.
  // Slot 2 finds the decoder busy and the single buffer slot full.
  std::vector<SlotEvent> events;
  simulate_outcomes(config(3, 1, 1), {kFail, kFail, kFail}, nullptr, &events);
  CHECK(events == std::vector<SlotEvent>{SlotEvent::fail_start, SlotEvent::fail_queued, SlotEvent::overflow});
}

TEST_CASE("D_TA(5/2,1) schedule traced by hand") {
  // Two sub-slots per slot, five per slow decode. Frame 0 decodes over
  // sub-slots [2, 7), frame 2 over [7, 12), frame 3 from 12. Frame 4
  // meets backlog 9 > 5 + 2 and overflows.
  Scheduler s(config(5, 2, 1));
  const std::vector<FrameOutcome> in{kFail, kPass, kFail, kFail, kFail, kPass, kPass, kPass, kPass};
  const std::vector<std::int64_t> backlog{0, 5, 3, 6, 9, 7, 5, 3, 1};
  const std::vector<SlotEvent> ev{SlotEvent::fail_start, SlotEvent::pass,     SlotEvent::fail_queued,
                                  SlotEvent::fail_queued, SlotEvent::overflow, SlotEvent::pass,
                                  SlotEvent::pass,         SlotEvent::pass,     SlotEvent::pass};
  const std::vector<std::uint64_t> completions{0, 0, 0, 0, 1, 1, 2, 2, 2};
  for (std::size_t i = 0; i < in.size(); ++i) {
    CHECK(s.work() == backlog[i]);
    CHECK(s.stats().dl_completions == completions[i]);
    CHECK(s.step(in[i]) == ev[i]);
  }
  s.drain();
  CHECK(s.stats().dl_completions == 3);
  CHECK(s.stats().overflows == 1);
}

TEST_CASE("backlog follows the hand transition rule on random inputs") {
  std::mt19937_64 rng(8);
  for (auto [bn, bd, zeta] : {std::tuple{3, 1, 1}, std::tuple{5, 2, 1}, std::tuple{13, 4, 3}, std::tuple{7, 3, 2},
                              std::tuple{2, 1, 4}}) {
    Scheduler s(config(bn, bd, zeta));
    std::int64_t k = 0;
    std::bernoulli_distribution fail(0.4);
    for (int i = 0; i < 20'000; ++i) {
      REQUIRE(s.work() == k);
      const bool f = fail(rng);
      const auto ev = s.step(f ? kFail : kPass);
      const auto next = oracle::next_state(k, f, bn, bd, zeta);
      // Overflow happens exactly when the failure leaves the backlog
      // unchanged by the new frame, i.e. from hazard states.
      CHECK((ev == SlotEvent::overflow) == (f && next == std::max<std::int64_t>(k - bd, 0)));
      k = next;
    }
  }
}

TEST_CASE("buffers stay within their sizing and latency is constant") {
  for (auto [bn, bd, zeta] : {std::tuple{3, 1, 1}, std::tuple{5, 2, 1}, std::tuple{647, 203, 2}, std::tuple{13, 4, 3}}) {
    auto cfg = config(bn, bd, zeta, 0.45);
    cfg.c_s = 203;
    cfg.c_rw = 8;
    const auto stats = simulate_bernoulli(cfg, 50'000, 3);
    const Rational beta(bn, bd);
    CHECK(stats.max_llr_buffer <= static_cast<std::size_t>(zeta));
    CHECK(stats.max_output_buffer <= static_cast<std::size_t>(output_buffer_frames(beta, zeta)));
    CHECK(stats.emitted == stats.frames);
    CHECK(stats.overflows <= stats.ds_failures);
    CHECK(stats.overflows > 0);
    REQUIRE(stats.min_latency_cycles);
    CHECK(*stats.min_latency_cycles == *stats.max_latency_cycles);
    CHECK(*stats.min_latency_cycles == system_latency(203, 8, beta, zeta));
  }
}

TEST_CASE("frame errors: overflowed wrong frames and wrong slow decodes") {
  const FrameOutcome wrong_dl{false, false, false};
  const auto stats = simulate_outcomes(config(3, 1, 1), {kFail, wrong_dl, kFail, kPass, kPass, kPass, kPass, kPass});
  // frame 0 fixed by the slow decoder, frame 1 re-decoded wrongly,
  // frame 2 overflows with its wrong fast result.
  CHECK(stats.overflows == 1);
  CHECK(stats.frame_errors == 2);
  CHECK(stats.emitted == 8);
}

TEST_CASE("failure rate zero never overflows") {
  const auto stats = simulate_bernoulli(config(13, 4, 1, 0.0), 100'000, 1);
  CHECK(stats.overflows == 0);
  CHECK(stats.state_occupancy[0] == stats.counted_slots);
}

TEST_CASE("Bernoulli runs are deterministic per seed") {
  const auto a = simulate_bernoulli(config(5, 2, 2, 0.3), 20'000, 42);
  const auto b = simulate_bernoulli(config(5, 2, 2, 0.3), 20'000, 42);
  const auto c = simulate_bernoulli(config(5, 2, 2, 0.3), 20'000, 43);
  CHECK(a.state_occupancy == b.state_occupancy);
  CHECK(a.overflows == b.overflows);
  CHECK(a.state_occupancy != c.state_occupancy);
}

TEST_CASE("warm-up excludes the first slots") {
  auto cfg = config(3, 1, 2, 0.3);
  const auto stats = simulate_bernoulli(cfg, 1000, 5);
  // ceil(3*2 + 3) + 1 = 10
  CHECK(stats.counted_slots == 990);
  cfg.warmup = 0;
  CHECK(simulate_bernoulli(cfg, 1000, 5).counted_slots == 1000);
}

TEST_CASE("trace CSV") {
  std::ostringstream os;
  simulate_outcomes(config(5, 2, 1), {kFail, kPass, kFail}, &os);
  CHECK(os.str() ==
        "slot,X,buffer_occ,dl_remaining,event\n"
        "0,0,0,0,fail_start\n"
        "1,5/2,0,5,pass\n"
        "2,3/2,0,3,fail_queued\n");
}

TEST_CASE("scheduler rejects a non-reduced speed gain") {
  CHECK_THROWS_AS(Scheduler(config(6, 2, 1)), ParameterError);
}
