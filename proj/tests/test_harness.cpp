#include <doctest.h>

#include <atomic>
#include <cmath>
#include <sstream>

#include "tascl/errors.hpp"
#include "tascl/harness.hpp"
#include "tascl/latency.hpp"

using namespace tascl;

namespace {

BlerConfig small_config(const std::string& decoder, std::vector<double> snr) {
  BlerConfig c{construct_code(6, 32, 6, 2.0), std::move(snr), parse_decoder_spec(decoder), std::nullopt, {}, 7, 1,
               false};
  c.stop.min_frames = 2000;
  c.stop.min_errors = 30;
  c.stop.max_frames = 20'000;
  c.stop.batch = 250;
  return c;
}

std::string csv(const std::vector<BlerPoint>& pts) {
  std::ostringstream os;
  write_bler_csv(os, pts);
  return os.str();
}

} // namespace

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits)
    CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(100, 3,
                               [](std::size_t i) {
                                 if (i == 42)
                                   throw ParameterError("boom");
                               }),
                  ParameterError);
}

TEST_CASE("Wilson interval") {
  const auto a = wilson_interval(0, 100);
  CHECK(a.lo == 0.0);
  CHECK(a.hi == doctest::Approx(0.0370).epsilon(0.01));
  // 50/100: centre 0.5, half-width z*sqrt(.25/100 + z^2/40000)/(1+z^2/100)
  const auto b = wilson_interval(50, 100);
  CHECK(b.lo == doctest::Approx(0.4038).epsilon(0.001));
  CHECK(b.hi == doctest::Approx(0.5962).epsilon(0.001));
  const auto c = wilson_interval(0, 0);
  CHECK(c.lo == 0.0);
  CHECK(c.hi == 1.0);
}

TEST_CASE("decoder spec parsing") {
  CHECK(parse_decoder_spec("sc").kind == DecoderKind::sc);
  const auto s = parse_decoder_spec("scl:8");
  CHECK(s.kind == DecoderKind::scl);
  CHECK(s.list_size == 8);
  const auto a = parse_decoder_spec("ascl:32:simplified");
  CHECK(a.kind == DecoderKind::ascl);
  CHECK(a.variant == AsclVariant::simplified);
  CHECK(parse_decoder_spec("ascl:16").variant == AsclVariant::original);
  CHECK(a.str() == "ascl:32:simplified");
  for (const char* bad : {"", "scl", "scl:0", "scl:x", "ascl:4:fast", "tree"})
    CHECK_THROWS_AS(parse_decoder_spec(bad), ParameterError);
}

TEST_CASE("noiseless channel gives zero BLER") {
  auto cfg = small_config("scl:4", {-2.0, 0.0, 2.0});
  cfg.noiseless = true;
  cfg.stop.min_errors = 1;
  cfg.stop.max_frames = 2000;
  for (const auto& p : run_bler(cfg)) {
    CHECK(p.errors == 0);
    CHECK(p.bler == 0.0);
    CHECK(p.frames == 2000);
    CHECK(p.truncated);
  }
}

TEST_CASE("BLER runs are identical for any worker count") {
  auto one = small_config("scl:4", {1.0, 2.0});
  auto four = one;
  four.workers = 4;
  CHECK(csv(run_bler(one)) == csv(run_bler(four)));
  auto other = one;
  other.seed = 8;
  CHECK(csv(run_bler(one)) != csv(run_bler(other)));
}

TEST_CASE("stopping rule") {
  const auto pts = run_bler(small_config("sc", {0.0}));
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].frames >= 2000);
  CHECK(pts[0].errors >= 30);
  CHECK(pts[0].frames % 250 == 0);
  CHECK_FALSE(pts[0].truncated);
  CHECK(pts[0].ci.lo <= pts[0].bler);
  CHECK(pts[0].bler <= pts[0].ci.hi);
}

TEST_CASE("list decoding beats SC on the desk-scale code") {
  BlerConfig sc{construct_code(8, 128, 8, 2.0), {1.0, 1.5, 2.0}, parse_decoder_spec("sc"), std::nullopt, {}, 3, 1,
                false};
  sc.stop = StoppingRule{1000, 1'000'000, 1000, 250};
  auto scl = sc;
  scl.decoder = parse_decoder_spec("scl:32");
  const auto a = run_bler(sc);
  const auto b = run_bler(scl);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].frames == b[i].frames);
    CHECK(b[i].errors < a[i].errors);
    CHECK(b[i].ci.hi < a[i].ci.lo);
  }
}

TEST_CASE("adaptive decoding statistics") {
  auto cfg = small_config("ascl:16:original", {1.0, 3.0});
  cfg.stop = StoppingRule{2000, 1, 2000, 500};
  const auto orig = run_bler(cfg);
  cfg.decoder = parse_decoder_spec("ascl:16:simplified");
  const auto simp = run_bler(cfg);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(orig[i].mean_list_sum >= 1.0);
    CHECK(orig[i].mean_list_terminal <= orig[i].mean_list_sum);
    CHECK(simp[i].mean_list_sum > orig[i].mean_list_sum);
  }
  CHECK(orig[1].mean_list_sum < orig[0].mean_list_sum);
  CHECK(simp[1].mean_list_sum < simp[0].mean_list_sum);
}

TEST_CASE("BLER CSV round trip") {
  const auto pts = run_bler(small_config("scl:2", {0.5, 1.5}));
  std::istringstream is(csv(pts));
  const auto back = read_bler_csv(is);
  REQUIRE(back.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(back[i].snr_db == pts[i].snr_db);
    CHECK(back[i].frames == pts[i].frames);
    CHECK(back[i].errors == pts[i].errors);
    CHECK(back[i].bler == doctest::Approx(pts[i].bler).epsilon(1e-9));
  }
  std::istringstream bad("a,b\n1,2\n");
  CHECK_THROWS_AS(read_bler_csv(bad), ParameterError);
}

TEST_CASE("log-linear BLER curve") {
  const BlerCurve c({1.0, 2.0, 3.0}, {1e-1, 1e-2, 1e-4});
  CHECK(c.at(1.0) == doctest::Approx(1e-1));
  CHECK(c.at(1.5) == doctest::Approx(std::sqrt(1e-1 * 1e-2)));
  CHECK(c.at(2.5) == doctest::Approx(1e-3));
  CHECK(c.at(4.0) == doctest::Approx(1e-6));
  CHECK(c.snr_at(1e-2) == doctest::Approx(2.0));
  CHECK(c.snr_at(1e-3) == doctest::Approx(2.5));
  CHECK_THROWS_AS(c.snr_at(1e-6), ParameterError);
  CHECK_THROWS_AS(BlerCurve({2.0, 1.0}, {0.1, 0.2}), ParameterError);
}

TEST_CASE("design search") {
  const BlerCurve el({0.0, 4.0}, {1e-1, 1e-3});

  SUBCASE("no fast-decoder failures: smallest buffer, no padding") {
    const BlerCurve es({0.0, 4.0}, {0.0, 0.0});
    const auto r = design_search(203, 647, es, el, DesignTarget{});
    CHECK(r.feasible);
    CHECK(r.zeta == 1);
    CHECK(r.idle_padding == 0);
    CHECK(r.beta == Rational(647, 203));
    CHECK(r.delta == 0.0);
  }

  SUBCASE("result re-checks through the model") {
    const BlerCurve es({0.0, 4.0}, {0.5, 0.005});
    const auto r = design_search(203, 647, es, el, DesignTarget{0.3, 1e-2, 8});
    REQUIRE(r.feasible);
    CHECK(r.snr_db == doctest::Approx(2.0));
    CHECK(r.eps_s == doctest::Approx(0.05));
    CHECK(model_delta(r.beta, r.zeta, r.eps_s, r.eps_l) <= 0.3);
    if (r.zeta > 1)
      CHECK(model_delta(r.beta, r.zeta - 1, r.eps_s, r.eps_l) > 0.3);
  }

  SUBCASE("one-frame buffer too small: pads the fast decoder") {
    const BlerCurve es({0.0, 4.0}, {0.9, 0.1});
    const DesignTarget t{0.3, 1e-2, 1};
    CHECK(model_delta(Rational(647, 203), 1, 0.3, 1e-2) > 0.3);
    const auto r = design_search(203, 647, es, el, t);
    REQUIRE(r.feasible);
    CHECK(r.idle_padding > 0);
    CHECK(r.zeta == 1);
    CHECK(r.beta == speed_gain(647, 203 + r.idle_padding, 1000));
    CHECK(model_delta(r.beta, 1, r.eps_s, r.eps_l) <= 0.3);
    // One cycle less padding no longer meets the target.
    CHECK(model_delta(speed_gain(647, 203 + r.idle_padding - 1, 1000), 1, r.eps_s, r.eps_l) > 0.3);
  }

  CHECK_THROWS_AS(design_search(0, 647, el, el, DesignTarget{}), ParameterError);
  CHECK_THROWS_AS(design_search(203, 647, el, el, DesignTarget{0.3, 1e-6, 8}), ParameterError);
}

TEST_CASE("model and chain simulation agree when nothing fails") {
  const auto r = compare_model_vs_sim(TasclParams{3, 1, 2, 0.0, 0.0}, 10'000, 1);
  CHECK(r.linf_gap == 0.0);
  CHECK(r.sim_overflow == 0.0);
  CHECK(r.z_score == 0.0);
}

TEST_CASE("model and chain simulation agree at moderate length") {
  const auto r = compare_model_vs_sim(TasclParams{5, 2, 2, 0.3, 0.0}, 1'000'000, 9);
  CHECK(r.linf_gap < 5e-3);
  CHECK(std::abs(r.z_score) < 4.0);
}

TEST_CASE("full pipeline: equal lists add nothing; ordering of error rates") {
  FullConfig cfg{construct_code(7, 64, 8, 2.0), TasclParams{3, 1, 2, 0.0, 0.0}, 2, 2, std::nullopt, std::nullopt,
                 1.5, 4, 1, 0, 0};
  const StoppingRule stop{3000, 1, 3000, 500};
  const auto same = simulate_full(cfg, stop);
  CHECK(same.frames == 3000);
  CHECK(same.ta_errors == same.ds_errors);
  CHECK(same.eps_ta() == same.ds_bler());

  cfg.list_l = 16;
  const auto r = simulate_full(cfg, stop);
  CHECK(r.ds_crc_failures == same.ds_crc_failures);
  CHECK(r.stats.overflows <= r.stats.ds_failures);
  CHECK(r.eps_ta() <= r.ds_bler());
  CHECK(r.eps_l() <= r.ds_bler());
  CHECK(r.stats.emitted == r.frames);
}

TEST_CASE("preset designs") {
  const auto& d = decoder_designs();
  CHECK(d[0].name == "d1");
  CHECK(d[3].list_s == 1);
  CHECK(d[4].list_l == 8);
}

TEST_CASE("6-bit fixed point stays close to floating point") {
  BlerConfig fl{construct_code(8, 128, 8, 2.0), {1.5, 2.0}, parse_decoder_spec("scl:8"), std::nullopt, {}, 21, 1,
                false};
  fl.stop = StoppingRule{3000, 1'000'000, 3000, 500};
  auto fx = fl;
  fx.fixed_point = FixedPoint{};
  const auto a = run_bler(fl);
  const auto b = run_bler(fx);
  for (std::size_t i = 0; i < a.size(); ++i) {
    // Same frames; quantization costs little but never helps much.
    CHECK(b[i].ci.lo <= a[i].ci.hi);
    CHECK(b[i].bler <= 1.5 * a[i].bler + 0.005);
    CHECK(b[i].bler >= 0.7 * a[i].bler);
  }
}
