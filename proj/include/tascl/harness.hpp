#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tascl/channel.hpp"
#include "tascl/codec.hpp"
#include "tascl/decoders.hpp"
#include "tascl/markov.hpp"
#include "tascl/rational.hpp"
#include "tascl/scheduler.hpp"

namespace tascl {

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work is
/// handed out through a shared counter; the first exception is rethrown.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

/// One transmitted frame: payload, source word, codeword and channel LLRs.
struct Frame {
  Bits message;
  Bits u;
  Bits x;
  std::vector<Llr> llr;
};

Frame make_frame(const PolarCode& code, const ChannelConfig& channel);

enum class DecoderKind { sc, scl, ascl };

struct DecoderSpec {
  DecoderKind kind = DecoderKind::scl;
  std::size_t list_size = 1;
  AsclVariant variant = AsclVariant::original;

  std::string str() const;
};

/// "sc", "scl:<L>", or "ascl:<Lmax>[:original|simplified]".
DecoderSpec parse_decoder_spec(const std::string& text);

struct StoppingRule {
  std::uint64_t min_frames = 10'000;
  std::uint64_t min_errors = 100;
  std::uint64_t max_frames = 10'000'000;
  /// Frames per batch; the rule is only checked between batches so the
  /// outcome does not depend on the number of workers.
  std::uint64_t batch = 500;

  void validate() const;
};

struct BlerConfig {
  PolarCode code;
  std::vector<double> snr_db;
  DecoderSpec decoder;
  std::optional<FixedPoint> fixed_point;
  StoppingRule stop;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  bool noiseless = false;
};

struct BlerPoint {
  double snr_db = 0.0;
  std::uint64_t frames = 0;
  std::uint64_t errors = 0;
  std::uint64_t crc_failures = 0;
  double bler = 0.0;
  Interval ci;
  /// Stopped on max_frames before reaching min_errors.
  bool truncated = false;
  /// Adaptive decoding only: per-frame means of the summed and of the
  /// final list size.
  double mean_list_sum = 0.0;
  double mean_list_terminal = 0.0;
};

/// Seed for SNR point `point` derived from the run seed.
std::uint64_t point_seed(std::uint64_t seed, std::size_t point);

std::vector<BlerPoint> run_bler(const BlerConfig& cfg);
void write_bler_csv(std::ostream& os, const std::vector<BlerPoint>& curve);
std::vector<BlerPoint> read_bler_csv(std::istream& is);

/// Piecewise log-linear BLER curve over SNR in dB.
class BlerCurve {
public:
  BlerCurve(std::vector<double> snr_db, std::vector<double> bler);
  static BlerCurve from_points(const std::vector<BlerPoint>& points);

  double at(double snr_db) const;
  /// SNR where the curve crosses `bler`; throws ParameterError when the
  /// curve does not bracket it.
  double snr_at(double bler) const;
  const std::vector<double>& snr() const { return snr_; }
  const std::vector<double>& bler() const { return bler_; }

private:
  std::vector<double> snr_;
  std::vector<double> bler_;
};

struct DesignTarget {
  double delta_max = 0.30;
  double target_bler = 1e-2;
  std::int64_t zeta_max = 8;

  void validate() const;
};

struct DesignResult {
  bool feasible = false;
  Rational beta;
  std::int64_t zeta = 0;
  std::int64_t idle_padding = 0;
  double snr_db = 0.0;
  double eps_s = 0.0;
  double eps_l = 0.0;
  double delta = 0.0;
  std::string note;
};

/// Smallest buffer meeting the loss target at the SNR where the slow
/// decoder reaches the target BLER, padding the fast decoder's cycle count
/// when no buffer up to zeta_max suffices.
DesignResult design_search(std::int64_t c_s, std::int64_t c_l, const BlerCurve& es_curve, const BlerCurve& el_curve,
                           const DesignTarget& target, std::int64_t max_denominator = 1000);

/// Loss δ of the model at one operating point.
double model_delta(const Rational& beta, std::int64_t zeta, double eps_s, double eps_l);

struct CompareReport {
  std::vector<double> model_pi;
  std::vector<double> sim_freq;
  double linf_gap = 0.0;
  double model_overflow = 0.0;
  double sim_overflow = 0.0;
  double z_score = 0.0;
  std::uint64_t slots = 0;
};

CompareReport compare_model_vs_sim(const TasclParams& params, std::uint64_t n_slots, std::uint64_t seed);

struct FullConfig {
  PolarCode code;
  TasclParams params;
  std::size_t list_s = 2;
  std::size_t list_l = 32;
  std::optional<FixedPoint> fixed_point_s;
  std::optional<FixedPoint> fixed_point_l;
  double ebn0_db = 1.5;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::int64_t c_s = 0;
  std::int64_t c_rw = 0;
};

struct FullResult {
  SchedulerStats stats;
  std::uint64_t frames = 0;
  std::uint64_t ds_crc_failures = 0;
  std::uint64_t ds_errors = 0;
  std::uint64_t dl_errors = 0;
  std::uint64_t ta_errors = 0;

  double eps_s() const { return ratio(ds_crc_failures); }
  double ds_bler() const { return ratio(ds_errors); }
  double eps_l() const { return ratio(dl_errors); }
  double eps_ta() const { return ratio(ta_errors); }

private:
  double ratio(std::uint64_t n) const { return frames ? static_cast<double>(n) / static_cast<double>(frames) : 0.0; }
};

/// Real frames through both decoders and the scheduler. Both decoders
/// run on every frame so ε_s and ε_l come from the same realizations;
/// stops once `stop` is met on the composite error count.
FullResult simulate_full(const FullConfig& cfg, const StoppingRule& stop);

} // namespace tascl
