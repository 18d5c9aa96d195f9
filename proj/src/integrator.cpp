#include "blight/integrator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <string>

#include "blight/errors.hpp"

namespace blight {

namespace {

constexpr std::size_t kVars = 5;  // B, O, S, I, R interleaved per cell

using Block = Eigen::Matrix<double, 5, 5>;
using Vec5 = Eigen::Matrix<double, 5, 1>;

// Absolute tolerances per variable for Newton and corrector norms.
constexpr std::array<double, kVars> kAtol = {1e-6, 1e-6, 1e-10, 1e-10, 1e-10};
constexpr double kNewtonRtol = 1e-7;
constexpr int kNewtonMaxIter = 15;

std::vector<double> flatten(const FieldState& s) {
  const std::size_t n = s.size();
  std::vector<double> y(kVars * n);
  for (std::size_t j = 0; j < n; ++j) {
    y[kVars * j + 0] = s.b[j];
    y[kVars * j + 1] = s.o[j];
    y[kVars * j + 2] = s.s[j];
    y[kVars * j + 3] = s.i[j];
    y[kVars * j + 4] = s.r[j];
  }
  return y;
}

FieldState unflatten(const std::vector<double>& y, double t) {
  const std::size_t n = y.size() / kVars;
  FieldState s(t, n);
  for (std::size_t j = 0; j < n; ++j) {
    s.b[j] = y[kVars * j + 0];
    s.o[j] = y[kVars * j + 1];
    s.s[j] = y[kVars * j + 2];
    s.i[j] = y[kVars * j + 3];
    s.r[j] = y[kVars * j + 4];
  }
  return s;
}

double weighted_max(const std::vector<double>& delta, const std::vector<double>& y, double rtol) {
  double worst = 0.0;
  for (std::size_t k = 0; k < delta.size(); ++k) {
    const double w = kAtol[k % kVars] + rtol * std::abs(y[k]);
    worst = std::max(worst, std::abs(delta[k]) / w);
  }
  return worst;
}

bool all_finite(const std::vector<double>& y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

// The semi-discrete system y' = f(y) on the interleaved layout.
class SemiDiscrete {
public:
  SemiDiscrete(const ModelParams& p, const Grid& g)
      : p_(p), n_(g.n_cells), inv_dx2_(1.0 / (g.dx() * g.dx())) {}

  std::size_t cells() const { return n_; }

  void rhs(const std::vector<double>& y, std::vector<double>& out) const {
    out.resize(y.size());
    for (std::size_t j = 0; j < n_; ++j) {
      const double* c = &y[kVars * j];
      const PointRates d = reaction_rates({c[0], c[1], c[2], c[3], c[4]}, p_);
      double* o = &out[kVars * j];
      o[0] = d.dB + p_.D1 * lap(y, j, 0);
      o[1] = d.dO + p_.D2 * lap(y, j, 1);
      o[2] = d.dS;
      o[3] = d.dI;
      o[4] = d.dR;
    }
  }

  // Forces the next solve to refactor the iteration matrix.
  void invalidate() { factored_ = false; }

  // Solves y - h_beta * f(y) = c by a simplified Newton iteration starting
  // from y. The iteration matrix is reused across calls with the same
  // h_beta and refreshed when convergence stalls. Returns false when the
  // iteration fails or goes non-finite.
  bool solve_implicit(const std::vector<double>& c, double h_beta, std::vector<double>& y) {
    const std::size_t m = y.size();
    residual_.resize(m);
    delta_.resize(m);
    if (!factored_ || h_beta != factored_h_beta_) factor(y, h_beta);
    bool fresh = true;
    int refreshes = 0;
    double previous = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
      rhs(y, f_);
      for (std::size_t k = 0; k < m; ++k) residual_[k] = c[k] - y[k] + h_beta * f_[k];
      if (!all_finite(residual_)) return false;
      back_solve();
      for (std::size_t k = 0; k < m; ++k) y[k] += delta_[k];
      const double norm = weighted_max(delta_, y, kNewtonRtol);
      if (!std::isfinite(norm)) return false;
      if (norm <= 1.0) return true;
      if (iter > 0 && norm > 0.5 * previous) {
        if (fresh || refreshes >= 3) {
          if (norm > previous) return false;
        } else {
          factor(y, h_beta);
          fresh = true;
          ++refreshes;
          previous = std::numeric_limits<double>::infinity();
          continue;
        }
      }
      fresh = false;
      previous = norm;
    }
    return false;
  }

private:
  double lap(const std::vector<double>& y, std::size_t j, std::size_t v) const {
    const double mid = y[kVars * j + v];
    const double left = j == 0 ? mid : y[kVars * (j - 1) + v];
    const double right = j + 1 == n_ ? mid : y[kVars * (j + 1) + v];
    return (left - 2.0 * mid + right) * inv_dx2_;
  }

  Block reaction_jacobian(const double* c) const {
    const double B = c[0], O = c[1], S = c[2], I = c[3];
    const HillEval f = hill_eval(B, p_.M1, p_.A1, p_.n1);
    const HillEval g = hill_eval(I, p_.M2, p_.A2, p_.n2);
    const double cap = p_.K * (S + I) + p_.eps;
    const double crowd = p_.r * B * B * p_.K / (cap * cap);
    const double death_slope = g.value + g.slope * std::max(I, 0.0);

    Block J = Block::Zero();
    J(0, 0) = p_.r * (1.0 - 2.0 * B / cap);
    J(0, 1) = p_.mu * S;
    J(0, 2) = crowd + p_.mu * O;
    J(0, 3) = crowd;
    J(1, 1) = -p_.mu * S - p_.gamma;
    J(1, 2) = -p_.mu * O;
    J(1, 3) = p_.alpha;
    J(2, 0) = -f.slope * S;
    J(2, 2) = -f.value;
    J(3, 0) = f.slope * S;
    J(3, 2) = f.value;
    J(3, 3) = -death_slope;
    J(4, 3) = death_slope;
    return J;
  }

  // Block LU of the iteration matrix I - h_beta * J. Off-diagonal blocks
  // are diagonal with nonzeros only for B and O, so each elimination
  // multiplier block has two nonzero columns.
  void factor(const std::vector<double>& y, double h_beta) {
    off_b_ = -h_beta * p_.D1 * inv_dx2_;
    off_o_ = -h_beta * p_.D2 * inv_dx2_;
    pivots_.resize(n_);
    gain_.resize(n_);
    partial_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      const double neighbours = (j == 0 || j + 1 == n_) ? 1.0 : 2.0;
      Block A = -h_beta * reaction_jacobian(&y[kVars * j]);
      A.diagonal() += Vec5::Ones();
      A(0, 0) -= neighbours * off_b_;
      A(1, 1) -= neighbours * off_o_;
      if (j > 0) {
        A.block<1, 2>(0, 0) -= off_b_ * gain_[j - 1].row(0);
        A.block<1, 2>(1, 0) -= off_o_ * gain_[j - 1].row(1);
      }
      pivots_[j].compute(A);
      Vec5 unit = Vec5::Zero();
      unit(0) = off_b_;
      const Vec5 col_b = pivots_[j].solve(unit);
      unit(0) = 0.0;
      unit(1) = off_o_;
      const Vec5 col_o = pivots_[j].solve(unit);
      gain_[j].col(0) = col_b;
      gain_[j].col(1) = col_o;
    }
    factored_ = true;
    factored_h_beta_ = h_beta;
  }

  void back_solve() {
    for (std::size_t j = 0; j < n_; ++j) {
      Vec5 d = Eigen::Map<const Vec5>(&residual_[kVars * j]);
      if (j > 0) {
        d(0) -= off_b_ * partial_[j - 1](0);
        d(1) -= off_o_ * partial_[j - 1](1);
      }
      partial_[j] = pivots_[j].solve(d);
    }
    Vec5 next = partial_[n_ - 1];
    Eigen::Map<Vec5>{&delta_[kVars * (n_ - 1)]} = next;
    for (std::size_t j = n_ - 1; j-- > 0;) {
      next = partial_[j] - gain_[j].col(0) * next(0) - gain_[j].col(1) * next(1);
      Eigen::Map<Vec5>{&delta_[kVars * j]} = next;
    }
  }

  ModelParams p_;
  std::size_t n_;
  double inv_dx2_;
  std::vector<double> f_, residual_, delta_;
  bool factored_ = false;
  double factored_h_beta_ = 0.0;
  double off_b_ = 0.0;
  double off_o_ = 0.0;
  std::vector<Eigen::PartialPivLU<Block>> pivots_;
  std::vector<Eigen::Matrix<double, 5, 2>> gain_;
  std::vector<Vec5> partial_;
};

// Butcher tableau of an SDIRK method with a common diagonal entry.
struct SdirkTableau {
  double diag;
  std::vector<std::vector<double>> a;  // strictly lower part, row i has i entries
  std::vector<double> b;
};

SdirkTableau alexander3() {
  // Alexander (1977), 3 stages, order 3, L-stable; stiffly accurate.
  const double g = 0.43586652150845899942;
  const double b1 = -(6.0 * g * g - 16.0 * g + 1.0) / 4.0;
  const double b2 = (6.0 * g * g - 20.0 * g + 5.0) / 4.0;
  return {g, {{}, {(1.0 - g) / 2.0}, {b1, b2}}, {b1, b2, g}};
}

SdirkTableau alexander2() {
  // Alexander (1977), 2 stages, order 2, L-stable; stiffly accurate.
  const double g = 1.0 - std::sqrt(2.0) / 2.0;
  return {g, {{}, {1.0 - g}}, {1.0 - g, g}};
}

class Stepper {
public:
  Stepper(SemiDiscrete& sys, const IntegratorOptions& opts) : sys_(sys), opts_(opts) {
    switch (opts.method) {
      case Method::sdirk3: tableau_ = alexander3(); break;
      case Method::sdirk2: tableau_ = alexander2(); break;
      default: break;
    }
  }

  // Advances y by one nominal step of size h.
  void step(std::vector<double>& y, double t, double h) {
    switch (opts_.method) {
      case Method::sdirk3:
      case Method::sdirk2:
        implicit_step(y, t, h, 0);
        break;
      case Method::rk4:
        rk4(y, h);
        break;
      case Method::adams_pc:
        adams(y, h);
        break;
    }
    if (!all_finite(y)) {
      std::ostringstream msg;
      msg << "blow-up: non-finite value during step starting at t=" << t;
      throw BlowUpError(msg.str());
    }
  }

  const IntegratorStats& stats() const { return stats_; }

private:
  bool try_sdirk(const SdirkTableau& tab, const std::vector<double>& y0, double h,
                 std::vector<double>& y1) {
    const std::size_t stages = tab.b.size();
    stage_rates_.resize(stages);
    std::vector<double> c(y0.size());
    std::vector<double> z = y0;
    sys_.invalidate();
    for (std::size_t i = 0; i < stages; ++i) {
      c = y0;
      for (std::size_t l = 0; l < i; ++l) {
        const double w = h * tab.a[i][l];
        const auto& k = stage_rates_[l];
        for (std::size_t m = 0; m < c.size(); ++m) c[m] += w * k[m];
      }
      if (!sys_.solve_implicit(c, h * tab.diag, z)) return false;
      // k_i = (z - c) / (h * diag), exact for the converged stage.
      auto& k = stage_rates_[i];
      k.resize(z.size());
      const double inv = 1.0 / (h * tab.diag);
      for (std::size_t m = 0; m < z.size(); ++m) k[m] = (z[m] - c[m]) * inv;
    }
    // Stiffly accurate: the last stage is the step result.
    y1 = std::move(z);
    return admissible(y1);
  }

  // Flower compartments must not undershoot beyond the state tolerance.
  // Pathogen undershoots up to pathogen_clip relative to the field maximum
  // are clipped to zero; anything larger rejects the step.
  bool admissible(std::vector<double>& y) const {
    const double floor = -opts_.tolerances.negative;
    std::array<double, 2> scale{0.0, 0.0};
    for (std::size_t k = 0; k < y.size(); ++k) {
      const std::size_t v = k % kVars;
      if (v < 2) {
        scale[v] = std::max(scale[v], std::abs(y[k]));
      } else if (y[k] < floor) {
        return false;
      }
    }
    for (std::size_t k = 0; k < y.size(); ++k) {
      const std::size_t v = k % kVars;
      if (v < 2 && y[k] < 0.0) {
        if (y[k] < -opts_.pathogen_clip * scale[v] && y[k] < floor) return false;
        y[k] = 0.0;
      }
    }
    return true;
  }

  // Takes the high-order step when it stays admissible; after
  // high_order_halvings failed halvings the remaining substeps fall back to
  // backward Euler, which keeps the solution non-negative.
  void implicit_step(std::vector<double>& y, double t, double h, int depth) {
    const bool fallback = depth >= opts_.high_order_halvings;
    std::vector<double> out;
    if (try_sdirk(fallback ? backward_euler_ : tableau_, y, h, out)) {
      y = std::move(out);
      ++(fallback ? stats_.fallback_steps : stats_.high_order_steps);
      return;
    }
    if (depth >= opts_.max_halvings) {
      std::ostringstream msg;
      msg << "blow-up: implicit step at t=" << t << " failed after " << depth
          << " halvings (h=" << h << ")";
      throw BlowUpError(msg.str());
    }
    implicit_step(y, t, 0.5 * h, depth + 1);
    implicit_step(y, t + 0.5 * h, 0.5 * h, depth + 1);
  }

  void rk4(std::vector<double>& y, double h) {
    const std::size_t m = y.size();
    std::vector<double> k1, k2, k3, k4, tmp(m);
    sys_.rhs(y, k1);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    sys_.rhs(tmp, k2);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    sys_.rhs(tmp, k3);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + h * k3[i];
    sys_.rhs(tmp, k4);
    for (std::size_t i = 0; i < m; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }

  // history_ holds f at the last up-to-four accepted points, newest first.
  void adams(std::vector<double>& y, double h) {
    const std::size_t m = y.size();
    std::vector<double> fn;
    sys_.rhs(y, fn);
    history_.push_front(std::move(fn));
    if (history_.size() > 4) history_.pop_back();
    if (history_.size() < 4) {
      rk4(y, h);
      return;
    }
    const auto& f0 = history_[0];
    const auto& f1 = history_[1];
    const auto& f2 = history_[2];
    const auto& f3 = history_[3];
    std::vector<double> pred(m), corr(m), fp;
    for (std::size_t i = 0; i < m; ++i) {
      pred[i] = y[i] + h / 24.0 * (55.0 * f0[i] - 59.0 * f1[i] + 37.0 * f2[i] - 9.0 * f3[i]);
    }
    sys_.rhs(pred, fp);
    for (std::size_t i = 0; i < m; ++i) {
      corr[i] = y[i] + h / 24.0 * (9.0 * fp[i] + 19.0 * f0[i] - 5.0 * f1[i] + f2[i]);
    }
    std::vector<double> change(m);
    for (std::size_t i = 0; i < m; ++i) change[i] = corr[i] - pred[i];
    if (weighted_max(change, corr, 1.0) > 1e-8) {
      sys_.rhs(corr, fp);
      for (std::size_t i = 0; i < m; ++i) {
        corr[i] = y[i] + h / 24.0 * (9.0 * fp[i] + 19.0 * f0[i] - 5.0 * f1[i] + f2[i]);
      }
    }
    y = std::move(corr);
  }

  SemiDiscrete& sys_;
  const IntegratorOptions& opts_;
  SdirkTableau tableau_{};
  SdirkTableau backward_euler_{1.0, {{}}, {1.0}};
  IntegratorStats stats_;
  std::vector<std::vector<double>> stage_rates_;
  std::deque<std::vector<double>> history_;
};

long whole_multiple(double total, double unit, const char* what) {
  const double ratio = total / unit;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw DomainError(std::string("integrate: ") + what + " must be a positive integer multiple of dt");
  }
  return static_cast<long>(rounded);
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::sdirk3: return "sdirk3";
    case Method::sdirk2: return "sdirk2";
    case Method::adams_pc: return "adams_pc";
    case Method::rk4: return "rk4";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::sdirk3, Method::sdirk2, Method::adams_pc, Method::rk4}) {
    if (name == method_name(m)) return m;
  }
  throw DomainError("unknown integration method '" + std::string(name) + "'");
}

IntegratorStats integrate_observed(const FieldState& state0, const ModelParams& params, const Grid& grid,
                        const IntegratorOptions& opts, const SnapshotObserver& observer) {
  params.validate();
  if (state0.size() != grid.n_cells) throw DomainError("integrate: state size does not match grid");
  if (!(opts.dt > 0.0)) throw DomainError("integrate: dt must be > 0");
  if (!(opts.t_end > state0.t)) throw DomainError("integrate: t_end must exceed the initial time");
  if (!(opts.record_every >= opts.dt * (1.0 - 1e-12))) {
    throw DomainError("integrate: record_every must be >= dt");
  }
  const long steps = whole_multiple(opts.t_end - state0.t, opts.dt, "t_end - t0");
  const long stride = whole_multiple(opts.record_every, opts.dt, "record_every");

  const auto b0 = std::max_element(state0.b.begin(), state0.b.end());
  const auto o0 = std::max_element(state0.o.begin(), state0.o.end());
  const BoundConstants bounds = a_priori_bounds(params, std::max(*b0, 0.0), std::max(*o0, 0.0));
  const BoundConstants* bound_ptr = opts.check_bounds ? &bounds : nullptr;

  SemiDiscrete sys(params, grid);
  Stepper stepper(sys, opts);
  std::vector<double> y = flatten(state0);
  for (long k = 1; k <= steps; ++k) {
    const double t_prev = state0.t + static_cast<double>(k - 1) * opts.dt;
    stepper.step(y, t_prev, opts.dt);
    if (k % stride == 0) {
      FieldState snap = unflatten(y, state0.t + static_cast<double>(k) * opts.dt);
      check_state(snap, params, bound_ptr, opts.tolerances);
      clamp_undershoots(snap, opts.tolerances.negative);
      observer(snap);
    }
  }
  return stepper.stats();
}

Trajectory integrate(const FieldState& state0, const ModelParams& params, const Grid& grid,
                     const IntegratorOptions& opts) {
  Trajectory traj;
  traj.grid = grid;
  traj.params = params;
  traj.dt_record = opts.record_every;
  integrate_observed(state0, params, grid, opts,
                     [&traj](const FieldState& s) { traj.snapshots.push_back(s); });
  return traj;
}

Trajectory integrate_at(const FieldState& state0, const ModelParams& params, const Grid& grid,
                        const IntegratorOptions& opts, const std::vector<double>& times) {
  if (!(opts.record_every > 0.0)) throw DomainError("integrate: record_every must be > 0");
  std::vector<long> wanted;
  for (double t : times) {
    const double k = std::round((t - state0.t) / opts.record_every);
    const double on_grid = state0.t + k * opts.record_every;
    if (k < 1.0 || on_grid > opts.t_end * (1.0 + 1e-12) ||
        std::abs(t - on_grid) > 1e-9 * std::max(1.0, std::abs(t))) {
      std::ostringstream msg;
      msg << "integrate: requested time " << t << " is not a recorded time in (" << state0.t << ", "
          << opts.t_end << "]";
      throw DomainError(msg.str());
    }
    wanted.push_back(static_cast<long>(k));
  }
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

  Trajectory traj;
  traj.grid = grid;
  traj.params = params;
  traj.dt_record = opts.record_every;
  long seen = 0;
  std::size_t cursor = 0;
  integrate_observed(state0, params, grid, opts, [&](const FieldState& s) {
    ++seen;
    if (cursor < wanted.size() && wanted[cursor] == seen) {
      traj.snapshots.push_back(s);
      ++cursor;
    }
  });
  return traj;
}

}  // namespace blight
