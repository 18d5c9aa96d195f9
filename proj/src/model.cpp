#include "blight/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "blight/errors.hpp"

namespace blight {

namespace {

constexpr std::array<const char*, kParamCount> kNames = {
    "N", "D1", "D2", "K", "eps", "r", "mu", "gamma",
    "alpha", "M1", "M2", "A1", "A2", "n1", "n2"};

std::array<double ModelParams::*, kParamCount> member_table() {
  return {&ModelParams::N,     &ModelParams::D1,    &ModelParams::D2, &ModelParams::K,
          &ModelParams::eps,   &ModelParams::r,     &ModelParams::mu, &ModelParams::gamma,
          &ModelParams::alpha, &ModelParams::M1,    &ModelParams::M2, &ModelParams::A1,
          &ModelParams::A2,    &ModelParams::n1,    &ModelParams::n2};
}

std::size_t param_slot(std::string_view name) {
  for (std::size_t k = 0; k < kParamCount; ++k) {
    if (name == kNames[k]) return k;
  }
  throw DomainError("unknown model parameter '" + std::string(name) + "'");
}

}  // namespace

void ModelParams::validate() const {
  for (std::size_t k = 0; k < kParamCount; ++k) {
    const double v = this->*member_table()[k];
    const std::string name = kNames[k];
    if (!std::isfinite(v)) throw DomainError("parameter " + name + " is not finite");
    if (name == "D2") {
      if (v < 0.0) throw DomainError("parameter D2 must be >= 0");
    } else if (v <= 0.0) {
      throw DomainError("parameter " + name + " must be > 0");
    }
  }
  if (n1 < 1.0) throw DomainError("parameter n1 must be >= 1");
  if (n2 < 1.0) throw DomainError("parameter n2 must be >= 1");
}

ModelParams sensitivity_baseline() {
  ModelParams p;
  p.D1 = 50.0;
  p.K = 1e6;
  p.eps = 10.0;
  p.gamma = 0.0027;
  p.M1 = 1.0;
  p.M2 = 1.0;
  p.alpha = 1e8;
  p.A1 = 1e6;
  p.A2 = 1.0;
  p.n1 = 2.0;
  p.n2 = 2.0;
  p.r = 0.5;
  p.mu = 0.5;
  p.N = 3.0;
  p.D2 = 10.0;
  return p;
}

const std::array<const char*, kParamCount>& param_names() { return kNames; }

double& param_ref(ModelParams& p, std::string_view name) {
  return p.*member_table()[param_slot(name)];
}

double param_value(const ModelParams& p, std::string_view name) {
  return p.*member_table()[param_slot(name)];
}

void validate_ranges(const std::vector<ParamRange>& ranges) {
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    const ParamRange& pr = ranges[k];
    param_slot(pr.name);
    for (std::size_t m = 0; m < k; ++m) {
      if (ranges[m].name == pr.name) throw DomainError("range for '" + pr.name + "' given twice");
    }
    if (!std::isfinite(pr.lo) || !std::isfinite(pr.hi) || pr.lo > pr.hi) {
      throw DomainError("range for '" + pr.name + "' must satisfy lo <= hi");
    }
  }
}

double hill(double x, double M, double A, double n) {
  if (!(x >= 0.0)) throw DomainError("hill: argument must be >= 0");
  if (!(M > 0.0)) throw DomainError("hill: maximum rate must be > 0");
  if (!(A > 0.0)) throw DomainError("hill: threshold must be > 0");
  if (!(n >= 1.0)) throw DomainError("hill: exponent must be >= 1");
  return hill_eval(x, M, A, n).value;
}

HillEval hill_eval(double x, double M, double A, double n) noexcept {
  if (x <= 0.0) {
    // d/dx at 0 is M/A for n == 1 and 0 for n > 1.
    return {0.0, n == 1.0 ? M / A : 0.0};
  }
  const double t = x / A;
  // Small integer exponents are common; skip pow for them.
  double lower;
  if (n == 1.0) {
    lower = 1.0;
  } else if (n == 2.0) {
    lower = t;
  } else if (n == 3.0) {
    lower = t * t;
  } else if (n == 4.0) {
    lower = t * t * t;
  } else {
    lower = std::pow(t, n - 1.0);
  }
  const double q = lower * t;
  if (std::isinf(q)) return {M, 0.0};
  const double denom = 1.0 + q;
  return {M * q / denom, M * n / A * lower / (denom * denom)};
}

PointRates reaction_rates(const PointState& p, const ModelParams& k) noexcept {
  const double f = hill_eval(p.B, k.M1, k.A1, k.n1).value;
  const double g = hill_eval(p.I, k.M2, k.A2, k.n2).value;
  const double capacity = k.K * (p.S + p.I) + k.eps;
  const double transfer = k.mu * p.S * p.O;
  const double infection = f * p.S;
  const double death = g * p.I;

  PointRates d;
  d.dB = k.r * p.B * (1.0 - p.B / capacity) + transfer;
  d.dO = k.alpha * p.I - transfer - k.gamma * p.O;
  d.dS = -infection;
  d.dI = infection - death;
  d.dR = death;
  return d;
}

PointRates reaction_rhs(const PointState& p, const ModelParams& params) {
  params.validate();
  if (p.B < 0.0 || p.O < 0.0 || p.S < 0.0 || p.I < 0.0 || p.R < 0.0) {
    throw DomainError("reaction_rhs: compartments must be non-negative");
  }
  if (std::abs(p.S + p.I + p.R - params.N) > 1e-6 * params.N) {
    throw DomainError("reaction_rhs: S + I + R differs from N");
  }
  return reaction_rates(p, params);
}

BoundConstants a_priori_bounds(const ModelParams& params, double b0_max, double o0_max) {
  params.validate();
  if (!(b0_max >= 0.0) || !(o0_max >= 0.0)) {
    throw DomainError("a_priori_bounds: initial maxima must be >= 0");
  }
  BoundConstants c;
  c.o_max = std::max(o0_max, params.alpha * params.N / params.gamma);
  const double cap = params.K * params.N + params.eps;
  const double fixed_point =
      0.5 * cap * (1.0 + std::sqrt(1.0 + 4.0 * params.mu * c.o_max / (params.r * cap)));
  c.b_max = std::max(b0_max, fixed_point);
  c.compartment_max = params.N;
  return c;
}

ConstraintReport check_theorem_constraints(const ModelParams& p) {
  ConstraintReport rep;
  rep.d2_le_d1 = p.D2 <= p.D1;

  const bool integral = p.n1 == std::round(p.n1) && p.n2 == std::round(p.n2);
  rep.exponent_link = integral ? p.n1 == p.n2 + 1.0 : std::abs(p.n1 - (p.n2 + 1.0)) <= 1e-12;

  rep.m1_le_gN = p.M1 <= hill_eval(p.N, p.M2, p.A2, p.n2).value;

  // Compare in log space; alpha^n1 overflows quickly.
  const double lhs = p.n1 * std::log(p.alpha) + std::log(p.M1) + std::log(p.N) +
                     std::log(std::pow(p.A2, p.n2) + std::pow(p.N, p.n2));
  const double rhs = p.n1 * std::log(p.A1) + std::log(p.M2) + p.n1 * std::log(p.gamma);
  rep.ooze_inequality = lhs <= rhs;

  rep.all_satisfied = rep.d2_le_d1 && rep.exponent_link && rep.m1_le_gN && rep.ooze_inequality;
  rep.c_min = min_wave_speed(p);
  return rep;
}

double min_wave_speed(const ModelParams& p) {
  const double growth = p.D1 * (p.r + p.mu * p.N);
  if (growth < 0.0) throw DomainError("min_wave_speed: D1 (r + mu N) must be >= 0");
  return 2.0 * std::sqrt(growth);
}

}  // namespace blight
