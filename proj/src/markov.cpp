#include "tascl/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "tascl/errors.hpp"

namespace tascl {

void TasclParams::validate(bool allow_common_factor) const {
  if (beta_n < 1 || beta_d < 1)
    throw ParameterError("speed gain numerator and denominator must be positive");
  if (zeta < 1)
    throw ParameterError("buffer size must be at least 1");
  if (!(eps_s >= 0.0 && eps_s <= 1.0) || !(eps_l >= 0.0 && eps_l <= 1.0))
    throw ParameterError("error rates must lie in [0, 1]");
  if (!allow_common_factor && std::gcd(beta_n, beta_d) != 1)
    throw ParameterError("speed gain " + std::to_string(beta_n) + "/" + std::to_string(beta_d) +
                         " is not in lowest terms; call reduce_states first");
  if (beta_n > 1'000'000 || zeta > 1'000'000 || beta_n * (zeta + 1) > 10'000'000)
    throw ParameterError("state space too large");
}

std::string to_string(StateClass c) {
  switch (c) {
  case StateClass::idle: return "idle";
  case StateClass::safe: return "safe";
  case StateClass::hazard: return "hazard";
  }
  return "?";
}

StateClass classify_state(std::int64_t k, const TasclParams& p) {
  if (k <= p.beta_d)
    return StateClass::idle;
  if (k > p.beta_n * p.zeta + p.beta_d)
    return StateClass::hazard;
  return StateClass::safe;
}

MarkovModel::MarkovModel(const TasclParams& params) : params_(params) {
  const auto S = static_cast<std::size_t>(params.beta_n * params.zeta + params.beta_n + 1);
  const double fail = params.eps_s;
  const double pass = 1.0 - params.eps_s;
  const auto bn = static_cast<std::size_t>(params.beta_n);
  const auto bd = static_cast<std::size_t>(params.beta_d);
  classes_.resize(S);
  rows_.resize(S);
  const auto add = [&](std::size_t from, std::size_t to, double p) {
    if (p == 0.0)
      return;
    auto& r = rows_[from];
    for (auto& t : r)
      if (t.to == to) {
        t.p += p;
        return;
      }
    r.push_back({to, p});
  };
  for (std::size_t k = 0; k < S; ++k) {
    classes_[k] = classify_state(static_cast<std::int64_t>(k), params);
    switch (classes_[k]) {
    case StateClass::idle:
      add(k, 0, pass);
      add(k, bn, fail);
      break;
    case StateClass::safe:
      add(k, k - bd, pass);
      add(k, k + bn - bd, fail);
      break;
    case StateClass::hazard:
      add(k, k - bd, 1.0);
      break;
    }
    std::sort(rows_[k].begin(), rows_[k].end(), [](const Transition& a, const Transition& b) { return a.to < b.to; });
  }
}

std::size_t MarkovModel::count(StateClass c) const {
  return static_cast<std::size_t>(std::count(classes_.begin(), classes_.end(), c));
}

std::vector<std::vector<double>> MarkovModel::dense() const {
  std::vector<std::vector<double>> P(size(), std::vector<double>(size(), 0.0));
  for (std::size_t k = 0; k < size(); ++k)
    for (const auto& t : rows_[k])
      P[k][t.to] += t.p;
  return P;
}

MarkovModel build_model(const TasclParams& params) {
  params.validate();
  return MarkovModel(params);
}

MarkovModel build_model_unreduced(const TasclParams& params) {
  params.validate(true);
  return MarkovModel(params);
}

double pr_hazard(const MarkovModel& model, std::span<const double> pi) {
  double h = 0.0;
  for (std::size_t k = 0; k < model.size(); ++k)
    if (model.state_class(k) == StateClass::hazard)
      h += pi[k];
  return h;
}

double pr_overflow(const MarkovModel& model, std::span<const double> pi) {
  return model.params().eps_s * pr_hazard(model, pi);
}

BlerBound bler_bound(double eps_l, double overflow) {
  BlerBound b;
  b.lower = eps_l;
  b.upper = eps_l + overflow;
  if (overflow == 0.0)
    b.delta = 0.0;
  else if (eps_l == 0.0)
    b.delta = std::numeric_limits<double>::infinity();
  else
    b.delta = overflow / eps_l;
  return b;
}

StationaryResult stationary(const MarkovModel& model, double tol, const std::optional<std::vector<double>>& initial,
                            std::size_t max_iterations) {
  const std::size_t S = model.size();
  std::vector<double> pi(S, 0.0);
  if (initial) {
    if (initial->size() != S)
      throw ParameterError("initial distribution has the wrong length");
    const double sum = std::accumulate(initial->begin(), initial->end(), 0.0);
    if (sum <= 0.0 || std::any_of(initial->begin(), initial->end(), [](double v) { return !(v >= 0.0); }))
      throw ParameterError("initial distribution must be non-negative with positive mass");
    for (std::size_t k = 0; k < S; ++k)
      pi[k] = (*initial)[k] / sum;
  } else {
    pi[0] = 1.0;
  }

  StationaryResult res;
  std::vector<double> next(S);
  for (std::size_t it = 1;; ++it) {
    // Lazy step (P + I) / 2: same fixed point, no periodic oscillation
    // when the chain rarely returns to state 0.
    for (std::size_t k = 0; k < S; ++k)
      next[k] = 0.5 * pi[k];
    for (std::size_t k = 0; k < S; ++k)
      if (pi[k] != 0.0)
        for (const auto& t : model.row(k))
          next[t.to] += 0.5 * pi[k] * t.p;
    double diff = 0.0;
    for (std::size_t k = 0; k < S; ++k)
      diff = std::max(diff, std::abs(next[k] - pi[k]));
    pi.swap(next);
    if (diff < tol) {
      res.iterations = it;
      break;
    }
    if (it >= max_iterations)
      throw ConvergenceError("stationary distribution did not converge within " + std::to_string(max_iterations) +
                             " iterations");
  }
  const double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (auto& v : pi)
    v /= sum;

  res.pi = std::move(pi);
  res.pr_hazard = pr_hazard(model, res.pi);
  res.pr_overflow = model.params().eps_s * res.pr_hazard;
  const auto bound = bler_bound(model.params().eps_l, res.pr_overflow);
  res.bler_upper = bound.upper;
  res.delta_loss = bound.delta;
  return res;
}

StructureCheck check_irreducible_aperiodic(const MarkovModel& model) {
  const std::size_t S = model.size();
  constexpr auto unseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::vector<std::size_t>> back(S);
  for (std::size_t k = 0; k < S; ++k)
    for (const auto& t : model.row(k))
      if (t.p > 0.0)
        back[t.to].push_back(k);

  // Forward BFS levels from state 0, then backward reachability.
  std::vector<std::size_t> level(S, unseen);
  std::queue<std::size_t> q;
  level[0] = 0;
  q.push(0);
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (const auto& t : model.row(u))
      if (t.p > 0.0 && level[t.to] == unseen) {
        level[t.to] = level[u] + 1;
        q.push(t.to);
      }
  }
  std::vector<bool> reaches(S, false);
  reaches[0] = true;
  q.push(0);
  while (!q.empty()) {
    const auto v = q.front();
    q.pop();
    for (auto u : back[v])
      if (!reaches[u]) {
        reaches[u] = true;
        q.push(u);
      }
  }

  StructureCheck out;
  out.irreducible = std::all_of(level.begin(), level.end(), [&](std::size_t l) { return l != unseen; }) &&
                    std::all_of(reaches.begin(), reaches.end(), [](bool b) { return b; });

  std::int64_t period = 0;
  for (std::size_t u = 0; u < S; ++u) {
    if (level[u] == unseen)
      continue;
    for (const auto& t : model.row(u))
      if (t.p > 0.0 && level[t.to] != unseen)
        period = std::gcd(period, static_cast<std::int64_t>(level[u] + 1) - static_cast<std::int64_t>(level[t.to]));
  }
  out.aperiodic = out.irreducible && std::abs(period) == 1;
  return out;
}

TasclParams reduce_states(std::int64_t beta_n_raw, std::int64_t beta_d_raw, std::int64_t zeta) {
  if (beta_n_raw < 1 || beta_d_raw < 1)
    throw ParameterError("speed gain numerator and denominator must be positive");
  const auto g = std::gcd(beta_n_raw, beta_d_raw);
  TasclParams p;
  p.beta_n = beta_n_raw / g;
  p.beta_d = beta_d_raw / g;
  p.zeta = zeta;
  p.validate();
  return p;
}

} // namespace tascl
