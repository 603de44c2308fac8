#include "tascl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "tascl/errors.hpp"
#include "tascl/latency.hpp"

namespace tascl {

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i)
      body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_lock;
  const auto work = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= count)
        return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard guard(error_lock);
        if (!error)
          error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w)
    pool.emplace_back(work);
  work();
  for (auto& t : pool)
    t.join();
  if (error)
    std::rethrow_exception(error);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0)
    return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half), successes == trials ? 1.0 : std::min(1.0, centre + half)};
}

Frame make_frame(const PolarCode& code, const ChannelConfig& channel) {
  Frame f;
  auto rng = frame_rng(channel.seed, channel.frame_index, Stream::message);
  f.message.resize(code.K() - static_cast<std::size_t>(code.r()));
  for (auto& b : f.message)
    b = static_cast<std::uint8_t>(rng() >> 63);
  f.u = attach_crc(code, f.message);
  f.x = encode(code, f.u);
  f.llr = transmit(f.x, channel);
  return f;
}

std::string DecoderSpec::str() const {
  switch (kind) {
  case DecoderKind::sc: return "sc";
  case DecoderKind::scl: return "scl:" + std::to_string(list_size);
  case DecoderKind::ascl:
    return "ascl:" + std::to_string(list_size) + (variant == AsclVariant::original ? ":original" : ":simplified");
  }
  return "?";
}

DecoderSpec parse_decoder_spec(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');)
    parts.push_back(p);
  const auto bad = [&] { return ParameterError("bad decoder spec '" + text + "'"); };
  const auto size = [&](const std::string& s) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &pos);
    } catch (const std::exception&) {
      throw bad();
    }
    if (pos != s.size() || v == 0)
      throw bad();
    return static_cast<std::size_t>(v);
  };
  DecoderSpec d;
  if (parts.size() == 1 && parts[0] == "sc") {
    d.kind = DecoderKind::sc;
  } else if (parts.size() == 2 && parts[0] == "scl") {
    d.kind = DecoderKind::scl;
    d.list_size = size(parts[1]);
  } else if ((parts.size() == 2 || parts.size() == 3) && parts[0] == "ascl") {
    d.kind = DecoderKind::ascl;
    d.list_size = size(parts[1]);
    if (parts.size() == 3) {
      if (parts[2] == "original")
        d.variant = AsclVariant::original;
      else if (parts[2] == "simplified")
        d.variant = AsclVariant::simplified;
      else
        throw bad();
    }
  } else {
    throw bad();
  }
  return d;
}

void StoppingRule::validate() const {
  if (batch == 0)
    throw ParameterError("batch size must be positive");
  if (max_frames == 0 || min_frames > max_frames)
    throw ParameterError("need 0 < min_frames <= max_frames");
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t point) {
  return seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(point) + 1);
}

namespace {

struct FrameResult {
  bool error = false;
  bool crc_fail = false;
  std::size_t list_sum = 0;
  std::size_t list_terminal = 0;
};

FrameResult decode_one(const BlerConfig& cfg, const Frame& frame) {
  FrameResult r;
  SclOptions options;
  options.fixed_point = cfg.fixed_point;
  Bits out;
  switch (cfg.decoder.kind) {
  case DecoderKind::sc:
    out = sc_decode(frame.llr, cfg.code, cfg.fixed_point ? std::optional(cfg.fixed_point->llr) : std::nullopt);
    r.crc_fail = !check_crc(cfg.code, extract_info(cfg.code, out));
    r.list_sum = r.list_terminal = 1;
    break;
  case DecoderKind::scl: {
    auto res = scl_decode(frame.llr, cfg.code, cfg.decoder.list_size, options);
    r.crc_fail = !res.passed_crc;
    out = res.output();
    r.list_sum = r.list_terminal = cfg.decoder.list_size;
    break;
  }
  case DecoderKind::ascl: {
    auto res = ascl_decode(frame.llr, cfg.code, cfg.decoder.list_size, cfg.decoder.variant, options);
    r.crc_fail = !res.result.passed_crc;
    out = res.result.output();
    r.list_sum = res.list_size_sum();
    r.list_terminal = res.terminal_list_size();
    break;
  }
  }
  r.error = out != frame.u;
  return r;
}

bool should_continue(const StoppingRule& stop, std::uint64_t frames, std::uint64_t errors) {
  if (frames >= stop.max_frames)
    return false;
  return frames < stop.min_frames || errors < stop.min_errors;
}

} // namespace

std::vector<BlerPoint> run_bler(const BlerConfig& cfg) {
  cfg.stop.validate();
  std::vector<BlerPoint> curve;
  for (std::size_t p = 0; p < cfg.snr_db.size(); ++p) {
    BlerPoint pt;
    pt.snr_db = cfg.snr_db[p];
    ChannelConfig ch;
    ch.ebn0_db = pt.snr_db;
    ch.rate = cfg.code.rate();
    ch.seed = point_seed(cfg.seed, p);
    ch.noiseless = cfg.noiseless;
    ch.validate();
    double list_sum = 0.0;
    double list_terminal = 0.0;
    std::vector<FrameResult> batch;
    while (should_continue(cfg.stop, pt.frames, pt.errors)) {
      const auto n = static_cast<std::size_t>(std::min(cfg.stop.batch, cfg.stop.max_frames - pt.frames));
      batch.assign(n, FrameResult{});
      const auto base = pt.frames;
      parallel_for(n, cfg.workers, [&](std::size_t i) {
        auto c = ch;
        c.frame_index = base + i;
        batch[i] = decode_one(cfg, make_frame(cfg.code, c));
      });
      for (const auto& r : batch) {
        ++pt.frames;
        pt.errors += r.error ? 1 : 0;
        pt.crc_failures += r.crc_fail ? 1 : 0;
        list_sum += static_cast<double>(r.list_sum);
        list_terminal += static_cast<double>(r.list_terminal);
      }
    }
    pt.truncated = pt.errors < cfg.stop.min_errors;
    pt.bler = pt.frames ? static_cast<double>(pt.errors) / static_cast<double>(pt.frames) : 0.0;
    pt.ci = wilson_interval(pt.errors, pt.frames);
    pt.mean_list_sum = pt.frames ? list_sum / static_cast<double>(pt.frames) : 0.0;
    pt.mean_list_terminal = pt.frames ? list_terminal / static_cast<double>(pt.frames) : 0.0;
    curve.push_back(pt);
  }
  return curve;
}

void write_bler_csv(std::ostream& os, const std::vector<BlerPoint>& curve) {
  os << "snr_db,frames,errors,bler,ci_lo,ci_hi,crc_failures,truncated,mean_list_sum,mean_list_terminal\n";
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(10);
  for (const auto& p : curve)
    os << p.snr_db << ',' << p.frames << ',' << p.errors << ',' << p.bler << ',' << p.ci.lo << ',' << p.ci.hi << ','
       << p.crc_failures << ',' << (p.truncated ? 1 : 0) << ',' << p.mean_list_sum << ',' << p.mean_list_terminal
       << '\n';
  os.flags(flags);
  os.precision(prec);
}

std::vector<BlerPoint> read_bler_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw ParameterError("empty BLER file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string h; std::getline(ss, h, ',');)
      header.push_back(h);
  }
  const auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto snr_col = column("snr_db");
  const auto bler_col = column("bler");
  if (!snr_col || !bler_col)
    throw ParameterError("BLER file needs snr_db and bler columns");
  const auto frames_col = column("frames");
  const auto errors_col = column("errors");
  std::vector<BlerPoint> out;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');)
      cells.push_back(c);
    if (cells.size() < header.size())
      throw ParameterError("short row in BLER file: " + line);
    try {
      BlerPoint p;
      p.snr_db = std::stod(cells[*snr_col]);
      p.bler = std::stod(cells[*bler_col]);
      if (frames_col)
        p.frames = std::stoull(cells[*frames_col]);
      if (errors_col)
        p.errors = std::stoull(cells[*errors_col]);
      out.push_back(p);
    } catch (const std::logic_error&) {
      throw ParameterError("unparsable row in BLER file: " + line);
    }
  }
  return out;
}

namespace {

constexpr double kLogFloor = 1e-300;

double log_bler(double b) { return std::log(std::max(b, kLogFloor)); }

} // namespace

BlerCurve::BlerCurve(std::vector<double> snr_db, std::vector<double> bler) : snr_(std::move(snr_db)), bler_(std::move(bler)) {
  if (snr_.size() != bler_.size() || snr_.empty())
    throw ParameterError("BLER curve needs matching, non-empty SNR and BLER lists");
  if (!std::is_sorted(snr_.begin(), snr_.end()) || std::adjacent_find(snr_.begin(), snr_.end()) != snr_.end())
    throw ParameterError("BLER curve SNR grid must be strictly increasing");
  for (double b : bler_)
    if (!(b >= 0.0 && b <= 1.0))
      throw ParameterError("BLER values must lie in [0, 1]");
}

BlerCurve BlerCurve::from_points(const std::vector<BlerPoint>& points) {
  std::vector<double> s;
  std::vector<double> b;
  for (const auto& p : points) {
    s.push_back(p.snr_db);
    b.push_back(p.bler);
  }
  return {std::move(s), std::move(b)};
}

double BlerCurve::at(double snr_db) const {
  if (snr_.size() == 1)
    return bler_[0];
  std::size_t j = static_cast<std::size_t>(std::upper_bound(snr_.begin(), snr_.end(), snr_db) - snr_.begin());
  j = std::clamp<std::size_t>(j, 1, snr_.size() - 1);
  const double t = (snr_db - snr_[j - 1]) / (snr_[j] - snr_[j - 1]);
  const double v = std::exp(log_bler(bler_[j - 1]) + t * (log_bler(bler_[j]) - log_bler(bler_[j - 1])));
  return std::clamp(v, 0.0, 1.0);
}

double BlerCurve::snr_at(double bler) const {
  if (!(bler > 0.0 && bler < 1.0))
    throw ParameterError("target BLER must lie in (0, 1)");
  const double y = std::log(bler);
  for (std::size_t j = 1; j < snr_.size(); ++j) {
    const double a = log_bler(bler_[j - 1]);
    const double b = log_bler(bler_[j]);
    if ((a - y) * (b - y) <= 0.0 && a != b)
      return snr_[j - 1] + (y - a) / (b - a) * (snr_[j] - snr_[j - 1]);
    if (a == y)
      return snr_[j - 1];
  }
  if (log_bler(bler_.back()) == y)
    return snr_.back();
  throw ParameterError("BLER curve does not bracket the target " + std::to_string(bler));
}

void DesignTarget::validate() const {
  if (!(delta_max > 0.0))
    throw ParameterError("delta_max must be positive");
  if (!(target_bler > 0.0 && target_bler < 1.0))
    throw ParameterError("target BLER must lie in (0, 1)");
  if (zeta_max < 1)
    throw ParameterError("zeta_max must be at least 1");
}

double model_delta(const Rational& beta, std::int64_t zeta, double eps_s, double eps_l) {
  TasclParams p;
  p.beta_n = beta.num();
  p.beta_d = beta.den();
  p.zeta = zeta;
  p.eps_s = eps_s;
  p.eps_l = eps_l;
  return stationary(build_model(p)).delta_loss;
}

DesignResult design_search(std::int64_t c_s, std::int64_t c_l, const BlerCurve& es_curve, const BlerCurve& el_curve,
                           const DesignTarget& target, std::int64_t max_denominator) {
  target.validate();
  if (c_s <= 0 || c_l <= 0)
    throw ParameterError("cycle counts must be positive");
  DesignResult r;
  r.snr_db = el_curve.snr_at(target.target_bler);
  r.eps_l = target.target_bler;
  r.eps_s = std::clamp(es_curve.at(r.snr_db), 0.0, 1.0);

  const auto smallest_zeta = [&](std::int64_t pad, double& delta) -> std::optional<std::int64_t> {
    const Rational beta = speed_gain(c_l, c_s + pad, max_denominator);
    for (std::int64_t z = 1; z <= target.zeta_max; ++z) {
      delta = model_delta(beta, z, r.eps_s, r.eps_l);
      if (delta <= target.delta_max)
        return z;
    }
    return std::nullopt;
  };

  double delta = 0.0;
  std::int64_t pad = 0;
  auto zeta = smallest_zeta(0, delta);
  if (!zeta) {
    // β reaches 1 at this padding, where no overflow can occur.
    std::int64_t hi = std::max<std::int64_t>(c_l - c_s, 1);
    if (!smallest_zeta(hi, delta)) {
      r.note = "no padding up to beta = 1 meets the target";
      return r;
    }
    std::int64_t lo = 0;
    while (hi - lo > 1) {
      const auto mid = lo + (hi - lo) / 2;
      double d = 0.0;
      if (smallest_zeta(mid, d))
        hi = mid;
      else
        lo = mid;
    }
    pad = hi;
    zeta = smallest_zeta(pad, delta);
  }
  r.feasible = true;
  r.idle_padding = pad;
  r.zeta = *zeta;
  r.beta = speed_gain(c_l, c_s + pad, max_denominator);
  r.delta = delta;
  return r;
}

CompareReport compare_model_vs_sim(const TasclParams& params, std::uint64_t n_slots, std::uint64_t seed) {
  const auto model = build_model(params);
  const auto st = stationary(model);
  SchedulerConfig cfg;
  cfg.params = params;
  const auto sim = simulate_bernoulli(cfg, n_slots, seed);
  CompareReport rep;
  rep.model_pi = st.pi;
  rep.sim_freq = sim.occupancy_frequencies();
  rep.slots = sim.counted_slots;
  for (std::size_t k = 0; k < rep.model_pi.size(); ++k)
    rep.linf_gap = std::max(rep.linf_gap, std::abs(rep.model_pi[k] - rep.sim_freq[k]));
  rep.model_overflow = st.pr_overflow;
  rep.sim_overflow =
      rep.slots ? static_cast<double>(sim.counted_overflows) / static_cast<double>(rep.slots) : 0.0;
  const double var = rep.model_overflow * (1.0 - rep.model_overflow) / std::max<double>(1.0, static_cast<double>(rep.slots));
  if (var > 0.0)
    rep.z_score = (rep.sim_overflow - rep.model_overflow) / std::sqrt(var);
  else
    rep.z_score = rep.sim_overflow == rep.model_overflow ? 0.0 : std::numeric_limits<double>::infinity();
  return rep;
}

FullResult simulate_full(const FullConfig& cfg, const StoppingRule& stop) {
  stop.validate();
  if (cfg.list_s == 0 || cfg.list_l == 0)
    throw ParameterError("list sizes must be positive");
  SchedulerConfig sc;
  sc.params = cfg.params;
  sc.c_s = cfg.c_s;
  sc.c_rw = cfg.c_rw;
  Scheduler sched(sc);

  ChannelConfig ch;
  ch.ebn0_db = cfg.ebn0_db;
  ch.rate = cfg.code.rate();
  ch.seed = cfg.seed;
  ch.validate();

  SclOptions opt_s;
  opt_s.fixed_point = cfg.fixed_point_s;
  SclOptions opt_l;
  opt_l.fixed_point = cfg.fixed_point_l;
  const bool same = cfg.list_s == cfg.list_l && !cfg.fixed_point_s && !cfg.fixed_point_l;

  FullResult out;
  std::vector<FrameOutcome> batch;
  while (should_continue(stop, out.frames, sched.stats().frame_errors)) {
    const auto n = static_cast<std::size_t>(std::min(stop.batch, stop.max_frames - out.frames));
    batch.assign(n, FrameOutcome{});
    const auto base = out.frames;
    parallel_for(n, cfg.workers, [&](std::size_t i) {
      auto c = ch;
      c.frame_index = base + i;
      const auto frame = make_frame(cfg.code, c);
      const auto ds = scl_decode(frame.llr, cfg.code, cfg.list_s, opt_s);
      auto& o = batch[i];
      o.ds_crc_pass = ds.passed_crc;
      o.ds_correct = ds.output() == frame.u;
      o.dl_correct = same ? o.ds_correct : scl_decode(frame.llr, cfg.code, cfg.list_l, opt_l).output() == frame.u;
    });
    for (const auto& o : batch) {
      sched.step(o);
      ++out.frames;
      out.ds_crc_failures += o.ds_crc_pass ? 0 : 1;
      out.ds_errors += o.ds_correct ? 0 : 1;
      out.dl_errors += o.dl_correct ? 0 : 1;
    }
  }
  sched.drain();
  out.stats = sched.stats();
  out.ta_errors = out.stats.frame_errors;
  return out;
}

} // namespace tascl
