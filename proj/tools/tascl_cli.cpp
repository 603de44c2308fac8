#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include "tascl/config.hpp"
#include "tascl/errors.hpp"
#include "tascl/harness.hpp"
#include "tascl/latency.hpp"
#include "tascl/markov.hpp"
#include "tascl/scheduler.hpp"

using namespace tascl;

namespace {

constexpr int kInfeasible = 2;

struct Global {
  std::uint64_t seed = 1;
  std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
  std::string out;
};

// Writes to --out when given, stdout otherwise.
class Sink {
public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_)
        throw ParameterError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

struct CodeArgs {
  std::string file;
  int n = 8;
  std::size_t K = 128;
  int r = 8;
  double design_snr = 2.0;
  std::string method = "bhattacharyya";

  void add(CLI::App* app) {
    app->add_option("--code", file, "Code file written by 'construct'");
    app->add_option("-n,--log-length", n, "log2 of the code length");
    app->add_option("-K,--info", K, "Information bits including CRC");
    app->add_option("-r,--crc", r, "CRC length (0, 6, 8, 11, 16 or 24)");
    app->add_option("--design-snr", design_snr, "Construction Eb/N0 in dB");
    app->add_option("--method", method, "bhattacharyya | ga");
  }
  PolarCode code() const {
    if (!file.empty())
      return load_code_file(file);
    return construct_code(n, K, r, design_snr, parse_construction(method));
  }
};

struct BetaArgs {
  std::string beta = "3";
  std::int64_t zeta = 1;

  void add(CLI::App* app) {
    app->add_option("--beta", beta, "Speed gain as a/b, integer or decimal");
    app->add_option("--zeta", zeta, "LLR buffer size in frames");
  }
  TasclParams params(double eps_s, double eps_l) const {
    const Rational b = parse_rational(beta);
    return TasclParams{b.num(), b.den(), zeta, eps_s, eps_l};
  }
};

Bits parse_bits(const std::string& s) {
  Bits b;
  for (char c : s) {
    if (c != '0' && c != '1')
      throw ParameterError("bit strings may only contain 0 and 1");
    b.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return b;
}

std::string bits_str(const Bits& b) {
  std::string s;
  for (auto v : b)
    s.push_back(static_cast<char>('0' + v));
  return s;
}

GroupCounts parse_groups(const std::vector<std::int64_t>& v) {
  if (v.size() != 4)
    throw ParameterError("--groups takes four counts");
  GroupCounts g;
  for (std::size_t i = 0; i < 4; ++i)
    g.count[i] = v[i];
  return g;
}

std::vector<BlerPoint> read_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ParameterError("cannot open BLER file '" + path + "'");
  return read_bler_csv(in);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage adaptive list decoding of polar codes: simulation, latency and buffer models"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI file; [section] per subcommand, key = option name");
  Global g;
  app.add_option("--seed", g.seed, "Run seed")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads")->capture_default_str();
  app.add_option("--out", g.out, "Output file (default stdout)");

  // construct
  auto* construct = app.add_subcommand("construct", "Build a code and write it as a code file");
  CodeArgs construct_args;
  construct_args.add(construct);
  construct->callback([&] {
    Sink s(g.out);
    save_code(s.os(), construct_args.code());
  });

  // encode
  auto* enc = app.add_subcommand("encode", "Attach CRC, encode and optionally transmit one message");
  CodeArgs enc_code;
  enc_code.add(enc);
  std::string enc_msg;
  double enc_snr = NAN;
  enc->add_option("--message", enc_msg, "Payload bits (K - r of them); random when omitted");
  enc->add_option("--snr", enc_snr, "Also print channel LLRs at this Eb/N0 (dB)");
  enc->callback([&] {
    const auto code = enc_code.code();
    Bits msg = parse_bits(enc_msg);
    if (enc_msg.empty()) {
      auto rng = frame_rng(g.seed, 0, Stream::message);
      msg.resize(code.K() - static_cast<std::size_t>(code.r()));
      for (auto& b : msg)
        b = static_cast<std::uint8_t>(rng() >> 63);
    }
    const auto u = attach_crc(code, msg);
    const auto x = encode(code, u);
    Sink s(g.out);
    s.os() << "message," << bits_str(msg) << "\nu," << bits_str(u) << "\nx," << bits_str(x) << '\n';
    if (!std::isnan(enc_snr)) {
      const auto llr = transmit(x, ChannelConfig{enc_snr, code.rate(), g.seed, 0, false});
      s.os() << "llr";
      for (double v : llr)
        s.os() << ',' << v;
      s.os() << '\n';
    }
  });

  // bler
  auto* bler = app.add_subcommand("bler", "Monte Carlo BLER curve, CSV output");
  CodeArgs bler_code;
  bler_code.add(bler);
  std::string bler_snr = "1:0.5:3";
  std::string bler_decoder = "scl:8";
  StoppingRule bler_stop;
  bool bler_quant = false;
  int llr_bits = 6;
  int pm_bits = 8;
  int frac_bits = 1;
  bool bler_noiseless = false;
  bler->add_option("--snr", bler_snr, "Grid: a,b,c or start:step:stop (dB)")->capture_default_str();
  bler->add_option("--decoder", bler_decoder, "sc | scl:L | ascl:Lmax[:original|simplified]")->capture_default_str();
  bler->add_option("--min-frames", bler_stop.min_frames)->capture_default_str();
  bler->add_option("--min-errors", bler_stop.min_errors)->capture_default_str();
  bler->add_option("--max-frames", bler_stop.max_frames)->capture_default_str();
  bler->add_option("--batch", bler_stop.batch)->capture_default_str();
  bler->add_flag("--quant", bler_quant, "Fixed-point decoding");
  bler->add_option("--llr-bits", llr_bits)->capture_default_str();
  bler->add_option("--pm-bits", pm_bits)->capture_default_str();
  bler->add_option("--frac-bits", frac_bits)->capture_default_str();
  bler->add_flag("--noiseless", bler_noiseless, "Noise-free channel (sanity runs)");
  bler->callback([&] {
    BlerConfig cfg{bler_code.code(), parse_grid(bler_snr), parse_decoder_spec(bler_decoder), std::nullopt, bler_stop,
                   g.seed, g.workers, bler_noiseless};
    if (bler_quant)
      cfg.fixed_point = FixedPoint{{llr_bits, frac_bits, true}, {pm_bits, frac_bits, true}};
    const auto curve = run_bler(cfg);
    Sink s(g.out);
    write_bler_csv(s.os(), curve);
  });

  // markov
  auto* markov = app.add_subcommand("markov", "Overflow probability and BLER bound from the buffer model");
  BetaArgs markov_beta;
  markov_beta.add(markov);
  std::string markov_eps = "0.01,0.05,0.1,0.2";
  double markov_eps_l = 1e-2;
  bool markov_pi = false;
  markov->add_option("--eps-s", markov_eps, "Fast-decoder failure rates (grid)")->capture_default_str();
  markov->add_option("--eps-l", markov_eps_l, "Slow-decoder BLER")->capture_default_str();
  markov->add_flag("--pi", markov_pi, "Print the stationary distribution instead");
  markov->callback([&] {
    Sink s(g.out);
    auto& os = s.os();
    os << std::setprecision(10);
    if (markov_pi) {
      const auto m = build_model(markov_beta.params(parse_grid(markov_eps).front(), markov_eps_l));
      const auto st = stationary(m);
      os << "state,X,class,pi\n";
      for (std::size_t k = 0; k < m.size(); ++k)
        os << k << ',' << m.value(k) << ',' << to_string(m.state_class(k)) << ',' << st.pi[k] << '\n';
      return;
    }
    const auto grid = parse_grid(markov_eps);
    std::vector<TasclParams> params;
    for (double e : grid)
      params.push_back(markov_beta.params(e, markov_eps_l));
    os << "eps_s,eps_l,beta,zeta,pr_hazard,pr_overflow,bler_upper,delta\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& p = params[i];
      const auto st = stationary(build_model(p));
      os << grid[i] << ',' << markov_eps_l << ',' << p.beta() << ',' << p.zeta << ',' << st.pr_hazard << ','
         << st.pr_overflow << ',' << st.bler_upper << ',' << st.delta_loss << '\n';
    }
  });

  // latency
  auto* latency = app.add_subcommand("latency", "Cycle counts of both decoders and the system");
  std::string lat_preset = "p1";
  std::string lat_presets_file;
  std::vector<std::int64_t> lat_groups;
  std::int64_t lat_N = 1024;
  std::int64_t lat_P = 64;
  int lat_list = 2;
  std::int64_t lat_zeta = 2;
  std::int64_t lat_max_den = 1000;
  CodeArgs lat_code;
  bool lat_from_code = false;
  latency->add_option("--preset", lat_preset, "p1 | p2 | p3")->capture_default_str();
  latency->add_option("--presets-file", lat_presets_file, "INI file with custom presets");
  latency->add_option("--groups", lat_groups, "Override: one/two/three/four-cycle sub-code counts")->expected(4);
  latency->add_option("--N", lat_N, "Code length for --groups")->capture_default_str();
  latency->add_option("--P", lat_P, "Parallelism")->capture_default_str();
  latency->add_option("--list-s", lat_list, "Fast-decoder list size (1 or 2)")->capture_default_str();
  latency->add_option("--zeta", lat_zeta, "Buffer size for system latency")->capture_default_str();
  latency->add_option("--max-den", lat_max_den, "Largest speed-gain denominator")->capture_default_str();
  latency->add_flag("--from-code", lat_from_code, "Derive sub-code groups from a constructed code");
  lat_code.add(latency);
  latency->callback([&] {
    CodePreset preset = code_preset(lat_preset);
    if (!lat_presets_file.empty()) {
      bool found = false;
      for (const auto& p : load_code_presets_file(lat_presets_file))
        if (p.name == lat_preset) {
          preset = p;
          found = true;
        }
      if (!found)
        throw ParameterError("preset '" + lat_preset + "' not in " + lat_presets_file);
    }
    DsLatency ds;
    if (lat_from_code) {
      ds = ds_latency(lat_code.code(), lat_P, lat_list);
    } else if (!lat_groups.empty()) {
      ds = ds_latency(parse_groups(lat_groups), lat_N, lat_P, lat_list);
    } else {
      ds = ds_latency(preset.groups, preset.N, preset.P, lat_list);
    }
    const auto c_l = dl_latency(preset.dl);
    const auto beta = speed_gain(c_l, ds.total, lat_max_den);
    Sink s(g.out);
    s.os() << "c_mbd,c_scd,c_rw,c_s,c_l,beta,beta_decimal,zeta,system_latency,output_buffer_frames\n"
           << ds.mbd << ',' << ds.scd << ',' << ds.rw << ',' << ds.total << ',' << c_l << ',' << beta << ','
           << beta.to_double() << ',' << lat_zeta << ',' << system_latency(ds.total, ds.rw, beta, lat_zeta) << ','
           << output_buffer_frames(beta, lat_zeta) << '\n';
  });

  // memory
  auto* memory = app.add_subcommand("memory", "Memory of the slow decoder and of the added buffers");
  std::int64_t mem_N = 1024, mem_Q = 6, mem_Ls = 2, mem_Ll = 32, mem_P = 64, mem_zeta = 3;
  std::string mem_beta = "3";
  memory->add_option("--N", mem_N)->capture_default_str();
  memory->add_option("--Q", mem_Q, "LLR word length")->capture_default_str();
  memory->add_option("--list-s", mem_Ls)->capture_default_str();
  memory->add_option("--list-l", mem_Ll)->capture_default_str();
  memory->add_option("--P", mem_P)->capture_default_str();
  memory->add_option("--beta", mem_beta)->capture_default_str();
  memory->add_option("--zeta", mem_zeta)->capture_default_str();
  memory->callback([&] {
    const auto m = memory_estimate(mem_N, mem_Q, mem_Ls, mem_Ll, mem_P, parse_rational(mem_beta), mem_zeta);
    Sink s(g.out);
    s.os() << "dl_bits,other_bits,overhead_ratio\n" << m.dl_bits << ',' << m.other_bits << ',' << m.overhead_ratio << '\n';
  });

  // sched
  auto* sched = app.add_subcommand("sched", "Slot-level scheduler driven by Bernoulli failures");
  BetaArgs sched_beta;
  sched_beta.add(sched);
  double sched_es = 0.2, sched_el = 0.0;
  std::uint64_t sched_slots = 1'000'000;
  std::string sched_trace;
  std::int64_t sched_cs = 0, sched_crw = 0;
  sched->add_option("--eps-s", sched_es)->capture_default_str();
  sched->add_option("--eps-l", sched_el)->capture_default_str();
  sched->add_option("--slots", sched_slots)->capture_default_str();
  sched->add_option("--trace", sched_trace, "Per-slot CSV trace file");
  sched->add_option("--c-s", sched_cs, "Fast-decoder cycles, for latency in cycles");
  sched->add_option("--c-rw", sched_crw, "LLR load cycles");
  sched->callback([&] {
    SchedulerConfig cfg;
    cfg.params = sched_beta.params(sched_es, sched_el);
    cfg.c_s = sched_cs;
    cfg.c_rw = sched_crw;
    std::unique_ptr<std::ofstream> trace;
    if (!sched_trace.empty()) {
      trace = std::make_unique<std::ofstream>(sched_trace);
      if (!*trace)
        throw ParameterError("cannot open trace file '" + sched_trace + "'");
    }
    const auto st = simulate_bernoulli(cfg, sched_slots, g.seed, trace.get());
    Sink s(g.out);
    auto& os = s.os();
    os << "frames,ds_failures,overflows,dl_completions,frame_errors,counted_slots,overflow_rate,max_llr_buffer,"
          "max_output_buffer,latency_cycles\n"
       << st.frames << ',' << st.ds_failures << ',' << st.overflows << ',' << st.dl_completions << ','
       << st.frame_errors << ',' << st.counted_slots << ','
       << (st.counted_slots ? static_cast<double>(st.counted_overflows) / static_cast<double>(st.counted_slots) : 0.0)
       << ',' << st.max_llr_buffer << ',' << st.max_output_buffer << ','
       << (st.max_latency_cycles ? st.max_latency_cycles->str() : std::string("")) << '\n';
  });

  // design
  auto* design = app.add_subcommand("design", "Pick buffer size and padding for a loss target");
  std::string des_preset = "p1";
  int des_list = 2;
  std::string des_es, des_el;
  DesignTarget des_target;
  std::int64_t des_max_den = 1000;
  design->add_option("--preset", des_preset)->capture_default_str();
  design->add_option("--list-s", des_list)->capture_default_str();
  design->add_option("--es", des_es, "BLER CSV of the fast decoder (its crc_failures/frames is used)")->required();
  design->add_option("--el", des_el, "BLER CSV of the slow decoder")->required();
  design->add_option("--delta-max", des_target.delta_max)->capture_default_str();
  design->add_option("--target-bler", des_target.target_bler)->capture_default_str();
  design->add_option("--zeta-max", des_target.zeta_max)->capture_default_str();
  design->add_option("--max-den", des_max_den)->capture_default_str();
  int design_exit = 0;
  design->callback([&] {
    const auto& p = code_preset(des_preset);
    const auto ds = ds_latency(p.groups, p.N, p.P, des_list);
    const auto es = BlerCurve::from_points(read_curve(des_es));
    const auto el_pts = read_curve(des_el);
    const auto el = BlerCurve::from_points(el_pts);
    des_target.validate();
    DesignResult r;
    const bool reachable = std::any_of(el_pts.begin(), el_pts.end(),
                                       [&](const BlerPoint& q) { return q.bler <= des_target.target_bler; });
    if (reachable)
      r = design_search(ds.total, dl_latency(p.dl), es, el, des_target, des_max_den);
    else
      r.note = "slow decoder never reaches the target BLER on the given SNR grid";
    Sink s(g.out);
    s.os() << "feasible,beta,zeta,idle_padding,snr_db,eps_s,eps_l,delta,note\n"
           << (r.feasible ? 1 : 0) << ',' << r.beta << ',' << r.zeta << ',' << r.idle_padding << ',' << r.snr_db
           << ',' << r.eps_s << ',' << r.eps_l << ',' << r.delta << ',' << r.note << '\n';
    design_exit = r.feasible ? 0 : kInfeasible;
  });

  // compare
  auto* compare = app.add_subcommand("compare", "Buffer model against the slot simulation");
  BetaArgs cmp_beta;
  cmp_beta.add(compare);
  double cmp_es = 0.2;
  std::uint64_t cmp_slots = 10'000'000;
  compare->add_option("--eps-s", cmp_es)->capture_default_str();
  compare->add_option("--slots", cmp_slots)->capture_default_str();
  compare->callback([&] {
    const auto r = compare_model_vs_sim(cmp_beta.params(cmp_es, 0.0), cmp_slots, g.seed);
    Sink s(g.out);
    auto& os = s.os();
    os << std::setprecision(10) << "# linf_gap=" << r.linf_gap << " model_overflow=" << r.model_overflow
       << " sim_overflow=" << r.sim_overflow << " z=" << r.z_score << " slots=" << r.slots << '\n'
       << "state,model_pi,sim_freq\n";
    for (std::size_t k = 0; k < r.model_pi.size(); ++k)
      os << k << ',' << r.model_pi[k] << ',' << r.sim_freq[k] << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return design_exit;
}
