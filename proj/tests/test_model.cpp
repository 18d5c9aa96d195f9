#include <doctest.h>

#include <cmath>
#include <random>

#include "blight/errors.hpp"
#include "blight/model.hpp"

using namespace blight;

TEST_CASE("hill: reference values") {
  CHECK(hill(0.0, 1.0, 1e6, 2.0) == 0.0);
  CHECK(hill(1e6, 1.0, 1e6, 2.0) == 0.5);
  // (3e6/1e6)^2 = 9, 9 / 10
  CHECK(hill(3e6, 1.0, 1e6, 2.0) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(hill(2.0, 3.0, 2.0, 3.7) == 1.5);
}

TEST_CASE("hill: rejects bad arguments") {
  CHECK_THROWS_AS(hill(-1.0, 1.0, 1.0, 2.0), DomainError);
  CHECK_THROWS_AS(hill(1.0, 0.0, 1.0, 2.0), DomainError);
  CHECK_THROWS_AS(hill(1.0, 1.0, 0.0, 2.0), DomainError);
  CHECK_THROWS_AS(hill(1.0, 1.0, -2.0, 2.0), DomainError);
}

TEST_CASE("hill: monotone and below M on random triples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const double M = 0.1 + 2.0 * u(rng);
    const double A = std::pow(10.0, 6.0 * u(rng));
    const double n = 1.0 + 4.0 * u(rng);
    double x1 = A * 10.0 * u(rng);
    double x2 = A * 10.0 * u(rng);
    if (x1 > x2) std::swap(x1, x2);
    const double h1 = hill(x1, M, A, n);
    const double h2 = hill(x2, M, A, n);
    CHECK(h1 <= h2);
    CHECK(h2 < M);
  }
  CHECK(hill(1e300, 1.0, 1.0, 5.0) <= 1.0);
}

TEST_CASE("hill_eval: slope matches a central difference") {
  for (double n : {1.0, 2.0, 2.5, 3.0, 4.0, 4.6}) {
    const double x = 1.3e6, A = 1e6, h = 1e-3;
    const double fd = (hill_eval(x + h, 1.0, A, n).value - hill_eval(x - h, 1.0, A, n).value) / (2 * h);
    CHECK(hill_eval(x, 1.0, A, n).slope == doctest::Approx(fd).epsilon(1e-6));
    CHECK(hill_eval(x, 1.0, A, n).value == doctest::Approx(hill(x, 1.0, A, n)).epsilon(1e-14));
  }
}

TEST_CASE("reaction_rhs: disease-free point is stationary") {
  ModelParams p;
  const PointRates d = reaction_rhs({0, 0, p.N, 0, 0}, p);
  CHECK(d.dB == 0.0);
  CHECK(d.dO == 0.0);
  CHECK(d.dS == 0.0);
  CHECK(d.dI == 0.0);
  CHECK(d.dR == 0.0);
}

TEST_CASE("reaction_rhs: ooze transfer example") {
  ModelParams p = sensitivity_baseline();
  p.mu = 0.5;
  const PointRates d = reaction_rhs({0, 1e8, 3, 0, 0}, p);
  CHECK(d.dB == doctest::Approx(1.5e8));
  CHECK(d.dO == doctest::Approx(-1.5e8 - p.gamma * 1e8));
  CHECK(d.dS == 0.0);
  CHECK(d.dI == 0.0);
  CHECK(d.dR == 0.0);
}

TEST_CASE("reaction_rhs: flower compartments are conserved") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModelParams p;
  for (int k = 0; k < 500; ++k) {
    const double S = p.N * u(rng);
    const double I = (p.N - S) * u(rng);
    const double R = p.N - S - I;
    const PointRates d = reaction_rhs({1e7 * u(rng), 1e9 * u(rng), S, I, R}, p);
    const double scale = std::abs(d.dS) + std::abs(d.dI) + std::abs(d.dR) + 1e-300;
    CHECK(std::abs(d.dS + d.dI + d.dR) <= 4e-16 * scale);
  }
}

TEST_CASE("reaction_rhs: rejects invalid points") {
  ModelParams p;
  CHECK_THROWS_AS(reaction_rhs({-1, 0, p.N, 0, 0}, p), DomainError);
  CHECK_THROWS_AS(reaction_rhs({0, 0, p.N, 0.5, 0}, p), DomainError);
}

TEST_CASE("a_priori_bounds: ooze bound") {
  ModelParams p = sensitivity_baseline();
  const BoundConstants c = a_priori_bounds(p, 1e6, 0.0);
  CHECK(c.o_max == doctest::Approx(3e8 / 0.0027));
  CHECK(c.o_max == doctest::Approx(1.1111e11).epsilon(1e-4));
  CHECK(c.compartment_max == 3.0);
  CHECK(a_priori_bounds(p, 1e6, 5e11).o_max == 5e11);
}

TEST_CASE("a_priori_bounds: pathogen bound by hand") {
  ModelParams p = sensitivity_baseline();
  // K N + eps = 3000010; 4 mu o_max / (r cap) = 4 * 0.5 * 1.1111e11 / (0.5 * 3000010)
  const double cap = 3000010.0;
  const double o_max = 1e8 * 3.0 / 0.0027;
  const double ratio = 4.0 * 0.5 * o_max / (0.5 * cap);
  const double expected = cap / 2.0 * (1.0 + std::sqrt(1.0 + ratio));
  const BoundConstants c = a_priori_bounds(p, 1e6, 0.0);
  CHECK(c.b_max == doctest::Approx(expected).epsilon(1e-14));
  CHECK(c.b_max == doctest::Approx(5.78853185e8).epsilon(1e-8));
  CHECK(a_priori_bounds(p, 1e12, 0.0).b_max == 1e12);
}

TEST_CASE("a_priori_bounds: monotone in o0_max") {
  ModelParams p = sensitivity_baseline();
  BoundConstants prev = a_priori_bounds(p, 1e6, 0.0);
  for (double o0 = 1e9; o0 < 1e14; o0 *= 3.0) {
    const BoundConstants c = a_priori_bounds(p, 1e6, o0);
    CHECK(c.o_max >= prev.o_max);
    CHECK(c.b_max >= prev.b_max);
    prev = c;
  }
}

TEST_CASE("constraints: baseline parameters fail") {
  const ConstraintReport rep = check_theorem_constraints(sensitivity_baseline());
  CHECK_FALSE(rep.exponent_link);
  CHECK_FALSE(rep.all_satisfied);
  CHECK(rep.d2_le_d1);
}

TEST_CASE("constraints: constructed instance passes") {
  ModelParams p = sensitivity_baseline();
  p.n1 = 3.0;
  p.n2 = 2.0;
  p.D2 = 10.0;
  p.M1 = 0.5;  // g(3) = 0.9
  p.alpha = 1e-3;
  // alpha^3 M1 N (A2^2 + N^2) = 1e-9 * 0.5 * 3 * 10 = 1.5e-8
  // A1^3 M2 gamma^3 = 1e18 * 1.97e-8 ~ 2e10
  const ConstraintReport rep = check_theorem_constraints(p);
  CHECK(rep.d2_le_d1);
  CHECK(rep.exponent_link);
  CHECK(rep.m1_le_gN);
  CHECK(rep.ooze_inequality);
  CHECK(rep.all_satisfied);

  p.D2 = 60.0;
  CHECK_FALSE(check_theorem_constraints(p).d2_le_d1);
}

TEST_CASE("min_wave_speed") {
  ModelParams p = sensitivity_baseline();
  CHECK(min_wave_speed(p) == doctest::Approx(20.0).epsilon(1e-15));
  p.D1 = 0.0;
  CHECK(min_wave_speed(p) == 0.0);
  p = sensitivity_baseline();
  p.r = 0.0;
  p.mu = 0.0;
  CHECK(min_wave_speed(p) == 0.0);
}

TEST_CASE("min_wave_speed: increasing in each argument") {
  const ModelParams base = sensitivity_baseline();
  for (const char* name : {"D1", "r", "mu", "N"}) {
    ModelParams p = base;
    double prev = min_wave_speed(p);
    for (int k = 0; k < 10; ++k) {
      param_ref(p, name) *= 1.3;
      const double c = min_wave_speed(p);
      CHECK(c > prev);
      prev = c;
    }
  }
}

TEST_CASE("validate_ranges") {
  CHECK_NOTHROW(validate_ranges({{"r", 0.05, 1.0}, {"N", 1.0, 5.0}}));
  CHECK_THROWS_AS(validate_ranges({{"q", 0.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(validate_ranges({{"r", 0.0, 1.0}, {"r", 0.0, 2.0}}), DomainError);
  CHECK_THROWS_AS(validate_ranges({{"r", 2.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(validate_ranges({{"r", 0.0, INFINITY}}), DomainError);
}
