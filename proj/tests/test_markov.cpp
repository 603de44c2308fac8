#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "tascl/errors.hpp"
#include "tascl/markov.hpp"

using namespace tascl;

namespace {

// Dense chain built from the hand transition rule, one state per
// remaining-work count.
oracle::Matrix oracle_matrix(const TasclParams& p) {
  const auto S = static_cast<std::size_t>(p.beta_n * (p.zeta + 1) + 1);
  oracle::Matrix m(S, std::vector<double>(S, 0.0));
  for (std::size_t k = 0; k < S; ++k) {
    const auto k64 = static_cast<std::int64_t>(k);
    m[k][static_cast<std::size_t>(oracle::next_state(k64, false, p.beta_n, p.beta_d, p.zeta))] += 1.0 - p.eps_s;
    m[k][static_cast<std::size_t>(oracle::next_state(k64, true, p.beta_n, p.beta_d, p.zeta))] += p.eps_s;
  }
  return m;
}

double overflow(const TasclParams& p) { return stationary(build_model(p)).pr_overflow; }

} // namespace

TEST_CASE("D_TA(3,1) transition matrix") {
  const double e = 0.3;
  const double c = 1.0 - e;
  const auto m = build_model(TasclParams{3, 1, 1, e, 0.0});
  REQUIRE(m.size() == 7);
  const std::vector<std::vector<double>> expected{
      {c, 0, 0, e, 0, 0, 0}, {c, 0, 0, e, 0, 0, 0}, {0, c, 0, 0, e, 0, 0}, {0, 0, c, 0, 0, e, 0},
      {0, 0, 0, c, 0, 0, e}, {0, 0, 0, 0, 1, 0, 0}, {0, 0, 0, 0, 0, 1, 0},
  };
  CHECK(m.dense() == expected);
  CHECK(m.state_class(1) == StateClass::idle);
  CHECK(m.state_class(4) == StateClass::safe);
  CHECK(m.state_class(5) == StateClass::hazard);
}

TEST_CASE("D_TA(5/2,1) has 11 states with 3 idle, 5 safe and 3 hazard") {
  const auto m = build_model(TasclParams{5, 2, 1, 0.2, 0.0});
  CHECK(m.size() == 11);
  CHECK(m.count(StateClass::idle) == 3);
  CHECK(m.count(StateClass::safe) == 5);
  CHECK(m.count(StateClass::hazard) == 3);
  CHECK(m.value(3) == Rational(3, 2));
}

TEST_CASE("chain equals the hand transition rule across a sweep") {
  for (std::int64_t bn = 1; bn <= 12; ++bn)
    for (std::int64_t bd = 1; bd <= 5; ++bd) {
      if (std::gcd(bn, bd) != 1)
        continue;
      for (std::int64_t zeta = 1; zeta <= 6; ++zeta) {
        const TasclParams p{bn, bd, zeta, 0.37, 0.0};
        const auto m = build_model(p);
        REQUIRE(m.size() == static_cast<std::size_t>(bn * zeta + bn + 1));
        CHECK(m.dense() == oracle_matrix(p));
        if (bn >= bd) {
          CHECK(m.count(StateClass::idle) == static_cast<std::size_t>(bd + 1));
          CHECK(m.count(StateClass::safe) == static_cast<std::size_t>(bn * zeta));
          CHECK(m.count(StateClass::hazard) == static_cast<std::size_t>(bn - bd));
        }
        for (std::size_t k = 0; k < m.size(); ++k) {
          double sum = 0.0;
          for (const auto& t : m.row(k))
            sum += t.p;
          CHECK(std::abs(sum - 1.0) < 1e-12);
          const auto x = m.value(k);
          const auto expect = x <= Rational(1)                     ? StateClass::idle
                              : Rational(1) + p.beta() * Rational(zeta) < x ? StateClass::hazard
                                                                    : StateClass::safe;
          CHECK(m.state_class(k) == expect);
        }
      }
    }
}

TEST_CASE("no failures: state 0 absorbs everything") {
  const auto m = build_model(TasclParams{3, 1, 2, 0.0, 0.01});
  const auto r = stationary(m);
  CHECK(r.pi[0] == doctest::Approx(1.0));
  CHECK(r.pr_overflow == 0.0);
  CHECK(r.delta_loss == 0.0);
  const auto s = check_irreducible_aperiodic(m);
  CHECK_FALSE(s.irreducible);
}

TEST_CASE("stationary distribution matches dense repeated squaring") {
  for (const auto& p : {TasclParams{3, 1, 1, 0.3, 0.0}, TasclParams{5, 2, 2, 0.2, 0.0}, TasclParams{13, 4, 3, 0.5, 0.0},
                        TasclParams{7, 3, 1, 0.05, 0.0}}) {
    const auto m = build_model(p);
    const auto r = stationary(m);
    const auto ref = oracle::squared_limit(oracle_matrix(p));
    double sum = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      CHECK(r.pi[k] >= 0.0);
      CHECK(std::abs(r.pi[k] - ref[k]) < 1e-9);
      sum += r.pi[k];
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    // residual of pi P - pi
    const auto d = m.dense();
    for (std::size_t j = 0; j < m.size(); ++j) {
      double v = 0.0;
      for (std::size_t i = 0; i < m.size(); ++i)
        v += r.pi[i] * d[i][j];
      CHECK(std::abs(v - r.pi[j]) < 1e-10);
    }
    double hazard = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k)
      if (m.state_class(k) == StateClass::hazard)
        hazard += ref[k];
    CHECK(r.pr_hazard == doctest::Approx(hazard));
    CHECK(r.pr_overflow == doctest::Approx(p.eps_s * hazard));
  }
}

TEST_CASE("stationary distribution does not depend on the start") {
  std::mt19937_64 rng(3);
  for (const auto& p : {TasclParams{3, 1, 2, 0.3, 0.0}, TasclParams{5, 2, 3, 0.45, 0.0}}) {
    const auto m = build_model(p);
    const auto a = stationary(m);
    std::vector<double> start(m.size());
    std::exponential_distribution<double> ex(1.0);
    double s = 0.0;
    for (auto& v : start) {
      v = ex(rng);
      s += v;
    }
    for (auto& v : start)
      v /= s;
    const auto b = stationary(m, 1e-13, start);
    for (std::size_t k = 0; k < m.size(); ++k)
      CHECK(std::abs(a.pi[k] - b.pi[k]) < 1e-9);
  }
}

TEST_CASE("stationary entries vary smoothly with the failure rate") {
  // Entries are rational functions of eps with no poles in (0, 1);
  // second differences on a fine grid stay small.
  const double h = 1e-3;
  for (double e = 0.1; e < 0.9; e += 0.1) {
    const auto a = stationary(build_model(TasclParams{3, 1, 1, e - h, 0.0})).pi;
    const auto b = stationary(build_model(TasclParams{3, 1, 1, e, 0.0})).pi;
    const auto c = stationary(build_model(TasclParams{3, 1, 1, e + h, 0.0})).pi;
    for (std::size_t k = 0; k < a.size(); ++k)
      CHECK(std::abs(a[k] - 2 * b[k] + c[k]) < 1e-4);
  }
}

TEST_CASE("overflow monotone in buffer size and speed gain") {
  for (double e : {0.05, 0.2, 0.5}) {
    for (std::int64_t bn : {2, 3, 5, 8}) {
      double prev = 1.0;
      for (std::int64_t zeta = 1; zeta <= 8; ++zeta) {
        const double o = overflow(TasclParams{bn, 1, zeta, e, 0.0});
        CHECK(o <= prev + 1e-12);
        CHECK(o <= e);
        prev = o;
      }
    }
    for (std::int64_t zeta = 1; zeta <= 4; ++zeta) {
      double prev = 0.0;
      for (std::int64_t bn = 1; bn <= 10; ++bn) {
        const double o = overflow(TasclParams{bn, 1, zeta, e, 0.0});
        CHECK(o >= prev - 1e-12);
        prev = o;
      }
    }
  }
}

TEST_CASE("overflow vanishes with the failure rate") {
  double prev = 1.0;
  for (double e : {0.5, 0.1, 0.01, 1e-3, 1e-4, 0.0}) {
    const double o = overflow(TasclParams{13, 4, 2, e, 0.0});
    CHECK(o <= prev);
    CHECK(o <= e);
    prev = o;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("irreducible and aperiodic for valid parameters") {
  for (std::int64_t bn = 2; bn <= 12; ++bn)
    for (std::int64_t bd = 1; bd < bn && bd <= 5; ++bd) {
      if (std::gcd(bn, bd) != 1)
        continue;
      for (std::int64_t zeta = 1; zeta <= 5; ++zeta) {
        const auto s = check_irreducible_aperiodic(build_model(TasclParams{bn, bd, zeta, 0.3, 0.0}));
        CHECK(s.irreducible);
        CHECK(s.aperiodic);
      }
    }
}

TEST_CASE("reduction of a common factor") {
  const auto r = reduce_states(6, 2, 2);
  CHECK(r.beta_n == 3);
  CHECK(r.beta_d == 1);
  CHECK(r.zeta == 2);
  const auto same = reduce_states(5, 2, 1);
  CHECK(same.beta_n == 5);
  CHECK(same.beta_d == 2);
  CHECK_THROWS_AS(build_model(TasclParams{6, 2, 2, 0.3, 0.0}), ParameterError);

  // The raw chain only ever visits even sub-slot counts; there it matches
  // the reduced chain.
  const auto raw = stationary(build_model_unreduced(TasclParams{6, 2, 2, 0.3, 0.0}));
  const auto red = stationary(build_model(TasclParams{3, 1, 2, 0.3, 0.0}));
  REQUIRE(raw.pi.size() == 2 * red.pi.size() - 1);
  for (std::size_t k = 0; k < raw.pi.size(); ++k) {
    if (k % 2 == 1)
      CHECK(raw.pi[k] == doctest::Approx(0.0));
    else
      CHECK(raw.pi[k] == doctest::Approx(red.pi[k / 2]).epsilon(1e-8));
  }
  CHECK(raw.pr_overflow == doctest::Approx(red.pr_overflow));
}

TEST_CASE("BLER bound arithmetic") {
  const auto a = bler_bound(1e-2, 0.0);
  CHECK(a.lower == 1e-2);
  CHECK(a.upper == 1e-2);
  CHECK(a.delta == 0.0);
  const auto b = bler_bound(1e-2, 3e-3);
  CHECK(b.upper == doctest::Approx(1.3e-2));
  CHECK(b.delta == doctest::Approx(0.3));
  CHECK(std::isinf(bler_bound(0.0, 1e-3).delta));
  CHECK(bler_bound(0.0, 0.0).delta == 0.0);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(build_model(TasclParams{3, 1, 0, 0.1, 0.0}), ParameterError);
  CHECK_THROWS_AS(build_model(TasclParams{3, 1, 1, 1.5, 0.0}), ParameterError);
  CHECK_THROWS_AS(build_model(TasclParams{0, 1, 1, 0.1, 0.0}), ParameterError);
  CHECK_THROWS_AS(build_model(TasclParams{3, 1, 1, 0.1, -0.1}), ParameterError);
}
