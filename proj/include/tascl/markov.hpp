#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tascl/rational.hpp"

namespace tascl {

/// Two-decoder system parameters: speed gain β = beta_n / beta_d, LLR
/// buffer depth ζ (frames), fast-decoder failure rate ε_s and slow-decoder
/// block error rate ε_l.
struct TasclParams {
  std::int64_t beta_n = 3;
  std::int64_t beta_d = 1;
  std::int64_t zeta = 1;
  double eps_s = 0.0;
  double eps_l = 0.0;

  Rational beta() const { return Rational(beta_n, beta_d); }
  /// Throws ParameterError on bad ranges, and on a common factor in β
  /// unless `allow_common_factor`.
  void validate(bool allow_common_factor = false) const;
};

enum class StateClass { idle, safe, hazard };
std::string to_string(StateClass c);

struct Transition {
  std::size_t to;
  double p;
};

/// Remaining slow-decoder work after each input slot, in units of
/// 1/beta_d slots. State k stands for X = k / beta_d.
class MarkovModel {
public:
  explicit MarkovModel(const TasclParams& params);

  const TasclParams& params() const { return params_; }
  std::size_t size() const { return rows_.size(); }
  Rational value(std::size_t k) const { return Rational(static_cast<std::int64_t>(k), params_.beta_d); }
  StateClass state_class(std::size_t k) const { return classes_[k]; }
  std::span<const Transition> row(std::size_t k) const { return rows_[k]; }
  std::size_t count(StateClass c) const;
  std::vector<std::vector<double>> dense() const;

private:
  TasclParams params_;
  std::vector<StateClass> classes_;
  std::vector<std::vector<Transition>> rows_;
};

StateClass classify_state(std::int64_t k, const TasclParams& params);

/// Builds the chain; β must be in lowest terms (see reduce_states).
MarkovModel build_model(const TasclParams& params);
/// Same chain without the lowest-terms requirement.
MarkovModel build_model_unreduced(const TasclParams& params);

struct StationaryResult {
  std::vector<double> pi;
  double pr_hazard = 0.0;
  double pr_overflow = 0.0;
  double bler_upper = 0.0;
  double delta_loss = 0.0;
  std::size_t iterations = 0;
};

/// Power iteration until successive iterates agree within `tol` (max
/// norm). Starts from state 0 unless `initial` is given. Throws
/// ConvergenceError after `max_iterations`.
StationaryResult stationary(const MarkovModel& model, double tol = 1e-12,
                            const std::optional<std::vector<double>>& initial = std::nullopt,
                            std::size_t max_iterations = 50'000'000);

double pr_hazard(const MarkovModel& model, std::span<const double> pi);
double pr_overflow(const MarkovModel& model, std::span<const double> pi);

struct BlerBound {
  double lower = 0.0;
  double upper = 0.0;
  double delta = 0.0;
};

BlerBound bler_bound(double eps_l, double pr_overflow);

struct StructureCheck {
  bool irreducible = false;
  bool aperiodic = false;
};

StructureCheck check_irreducible_aperiodic(const MarkovModel& model);

/// Divides out the common factor of the raw speed-gain pair.
TasclParams reduce_states(std::int64_t beta_n_raw, std::int64_t beta_d_raw, std::int64_t zeta);

} // namespace tascl
