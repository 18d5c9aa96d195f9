#pragma once

#include <functional>
#include <string_view>

#include "blight/grid.hpp"

namespace blight {

/// Fixed-step time integrators for the semi-discrete system.
///
///  - sdirk2:   2-stage, L-stable, second-order singly diagonally implicit
///              Runge-Kutta (Alexander). Simplified Newton with a
///              block-tridiagonal Jacobian. Handles the diffusion and the
///              dead-cluster logistic collapse at dt = 0.1 on fine grids.
///              Default: its weights are positive, so fronts rarely
///              undershoot.
///  - sdirk3:   3-stage, L-stable, third-order SDIRK on the same machinery.
///              More accurate per step, but its negative weight produces
///              small undershoots behind fronts that force step halving.
///  - adams_pc: explicit Adams-Bashforth-Moulton 4 predictor-corrector,
///              RK4 bootstrap. Only stable for non-stiff configurations.
///  - rk4:      classical explicit Runge-Kutta.
enum class Method { sdirk2, sdirk3, adams_pc, rk4 };

std::string_view method_name(Method m);
/// Throws DomainError for an unknown name.
Method parse_method(std::string_view name);

struct IntegratorOptions {
  double t_end = 30.0;
  double dt = 0.1;
  double record_every = 0.1;  ///< must be an integer multiple of dt
  Method method = Method::sdirk2;
  /// Maximum number of step halvings an implicit step may take when Newton
  /// fails or the step produces an out-of-tolerance undershoot.
  int max_halvings = 12;
  /// Halvings after which an implicit substep switches to backward Euler.
  int high_order_halvings = 3;
  /// Pathogen (B, O) undershoots smaller than this fraction of the field
  /// maximum are clipped to zero after a step; larger ones reject it.
  double pathogen_clip = 1e-6;
  StateTolerances tolerances;
  /// Whether recorded snapshots are also checked against a_priori_bounds.
  bool check_bounds = true;
};

/// Counts of accepted implicit substeps, for diagnostics.
struct IntegratorStats {
  long high_order_steps = 0;
  long fallback_steps = 0;
};

/// Called with every recorded (checked, undershoot-clamped) snapshot.
using SnapshotObserver = std::function<void(const FieldState&)>;

/// Advances state0 to t_end and hands each snapshot at
/// state0.t + k * record_every (k >= 1) to `observer`.
/// Throws DomainError on bad options, BlowUpError / InstabilityError when
/// the solution leaves the admissible region.
IntegratorStats integrate_observed(const FieldState& state0, const ModelParams& params, const Grid& grid,
                        const IntegratorOptions& opts, const SnapshotObserver& observer);

/// Convenience wrapper storing every snapshot.
Trajectory integrate(const FieldState& state0, const ModelParams& params, const Grid& grid,
                     const IntegratorOptions& opts);

/// Keeps only the snapshots at `times`, each of which must lie on the
/// recording grid state0.t + k * record_every within (state0.t, t_end].
Trajectory integrate_at(const FieldState& state0, const ModelParams& params, const Grid& grid,
                        const IntegratorOptions& opts, const std::vector<double>& times);

}  // namespace blight
