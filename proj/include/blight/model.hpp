#pragma once

// Pointwise kinetics of the blossom-blight model: Hill rate laws, the
// five-compartment reaction terms, a-priori bound constants and the
// travelling-wave parameter constraints. Nothing here knows about space.

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace blight {

/// Model parameters. Units follow the usual convention: metres, days,
/// CFU for pathogen, flowers for host compartments.
struct ModelParams {
  double N = 3.0;        ///< flowers per cluster
  double D1 = 50.0;      ///< bee-transport diffusivity [m^2/day]
  double D2 = 10.0;      ///< ooze-vector diffusivity [m^2/day], may be 0
  double K = 1e6;        ///< per-flower carrying capacity [CFU/flower]
  double eps = 10.0;     ///< carrying capacity of a dead cluster [CFU]
  double r = 0.5;        ///< epiphytic growth rate [1/day]
  double mu = 0.5;       ///< ooze-vector visitation rate [1/(day flower)]
  double gamma = 0.0027; ///< ooze decay rate [1/day]
  double alpha = 1e8;    ///< ooze secretion rate [CFU/(day flower)]
  double M1 = 1.0;       ///< max infection rate [1/day]
  double M2 = 1.0;       ///< max death rate [1/day]
  double A1 = 1e6;       ///< invasion threshold [CFU]
  double A2 = 1.0;       ///< death threshold [flower]
  double n1 = 2.0;       ///< invasion Hill exponent
  double n2 = 2.0;       ///< death Hill exponent

  /// Throws DomainError naming the first offending field.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

/// The fixed parameter set used for the sensitivity study, with the four
/// sampled factors set to the baseline comparison run (r = mu = 0.5,
/// N = 3, D2 = 10).
ModelParams sensitivity_baseline();

/// Number of scalar parameters exposed by name (excluding nothing: N is
/// included).
inline constexpr std::size_t kParamCount = 15;

/// Parameter names in canonical order; `param_ref` maps a name to its slot.
const std::array<const char*, kParamCount>& param_names();
double& param_ref(ModelParams& p, std::string_view name);
double param_value(const ModelParams& p, std::string_view name);

/// Closed sampling interval for one named parameter.
struct ParamRange {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const ParamRange&) const = default;
};

/// Throws DomainError for unknown names, duplicates, non-finite bounds or
/// lo > hi.
void validate_ranges(const std::vector<ParamRange>& ranges);

/// Compartment values at one location.
struct PointState {
  double B = 0.0;
  double O = 0.0;
  double S = 0.0;
  double I = 0.0;
  double R = 0.0;
};

/// Time derivatives of a PointState.
struct PointRates {
  double dB = 0.0;
  double dO = 0.0;
  double dS = 0.0;
  double dI = 0.0;
  double dR = 0.0;
};

/// Hill rate law M (x/A)^n / (1 + (x/A)^n).
/// Throws DomainError for x < 0, M <= 0, A <= 0 or n < 1.
double hill(double x, double M, double A, double n);

/// Unchecked Hill value and derivative; negative x is treated as 0.
/// Used inside the integrators where tiny undershoots are expected.
struct HillEval {
  double value;
  double slope;
};
HillEval hill_eval(double x, double M, double A, double n) noexcept;

/// Reaction part of the model at one point (no diffusion).
/// Throws DomainError if the point has negative entries or violates
/// S + I + R = N beyond 1e-6 N.
PointRates reaction_rhs(const PointState& p, const ModelParams& params);

/// Same formulas without input validation.
PointRates reaction_rates(const PointState& p, const ModelParams& params) noexcept;

/// Upper bounds on B and O that hold for all time.
struct BoundConstants {
  double b_max = 0.0;
  double o_max = 0.0;
  double compartment_max = 0.0;
};

BoundConstants a_priori_bounds(const ModelParams& params, double b0_max, double o0_max);

struct ConstraintReport {
  bool d2_le_d1 = false;
  bool exponent_link = false;  ///< n1 == n2 + 1
  bool m1_le_gN = false;       ///< M1 <= g(N)
  bool ooze_inequality = false;
  bool all_satisfied = false;
  double c_min = 0.0;
};

/// Evaluates the sufficient conditions under which travelling waves are
/// known to exist, plus the corresponding minimum speed.
ConstraintReport check_theorem_constraints(const ModelParams& params);

/// 2 sqrt(D1 (r + mu N)).
double min_wave_speed(const ModelParams& params);

}  // namespace blight
