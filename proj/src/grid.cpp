#include "blight/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "blight/errors.hpp"

namespace blight {

Grid::Grid(double length_, std::size_t n_cells_) : length(length_), n_cells(n_cells_) {
  if (n_cells < 3) throw DomainError("grid needs at least 3 cells");
  if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("grid length must be > 0");
}

std::string_view compartment_name(Compartment c) {
  switch (c) {
    case Compartment::B: return "B";
    case Compartment::O: return "O";
    case Compartment::S: return "S";
    case Compartment::I: return "I";
    case Compartment::R: return "R";
  }
  return "?";
}

FieldState::FieldState(double t_, std::size_t n)
    : t(t_), b(n, 0.0), o(n, 0.0), s(n, 0.0), i(n, 0.0), r(n, 0.0) {}

std::vector<double>& FieldState::field(Compartment c) {
  switch (c) {
    case Compartment::B: return b;
    case Compartment::O: return o;
    case Compartment::S: return s;
    case Compartment::I: return i;
    case Compartment::R: break;
  }
  return r;
}

const std::vector<double>& FieldState::field(Compartment c) const {
  return const_cast<FieldState*>(this)->field(c);
}

const FieldState& Trajectory::nearest(double t) const {
  if (snapshots.empty()) throw DomainError("trajectory has no snapshots");
  auto best = snapshots.begin();
  for (auto it = snapshots.begin(); it != snapshots.end(); ++it) {
    if (std::abs(it->t - t) < std::abs(best->t - t)) best = it;
  }
  return *best;
}

std::vector<double> laplacian_neumann(std::span<const double> f, double dx) {
  const std::size_t n = f.size();
  if (n < 3) throw DomainError("laplacian_neumann: need at least 3 cells");
  if (!(dx > 0.0)) throw DomainError("laplacian_neumann: dx must be > 0");
  const double inv = 1.0 / (dx * dx);
  std::vector<double> out(n);
  // Ghost cells mirror the adjacent interior value.
  out[0] = (f[1] - f[0]) * inv;
  for (std::size_t j = 1; j + 1 < n; ++j) out[j] = (f[j - 1] - 2.0 * f[j] + f[j + 1]) * inv;
  out[n - 1] = (f[n - 2] - f[n - 1]) * inv;
  return out;
}

FieldState full_rhs(const FieldState& state, const ModelParams& params, const Grid& grid) {
  if (state.size() != grid.n_cells) throw DomainError("full_rhs: state size does not match grid");
  const std::size_t n = grid.n_cells;
  FieldState d(state.t, n);
  for (std::size_t j = 0; j < n; ++j) {
    const PointRates rates = reaction_rhs(state.at(j), params);
    d.b[j] = rates.dB;
    d.o[j] = rates.dO;
    d.s[j] = rates.dS;
    d.i[j] = rates.dI;
    d.r[j] = rates.dR;
  }
  const auto lb = laplacian_neumann(state.b, grid.dx());
  const auto lo = laplacian_neumann(state.o, grid.dx());
  for (std::size_t j = 0; j < n; ++j) {
    d.b[j] += params.D1 * lb[j];
    d.o[j] += params.D2 * lo[j];
  }
  return d;
}

FieldState standard_initial_condition(const Grid& grid, const ModelParams& params, double b_seed) {
  if (!(b_seed >= 0.0)) throw DomainError("standard_initial_condition: b_seed must be >= 0");
  FieldState s(0.0, grid.n_cells);
  std::fill(s.s.begin(), s.s.end(), params.N);
  s.b[0] = b_seed;
  return s;
}

namespace {

[[noreturn]] void report(const char* kind, const FieldState& st, std::size_t j, Compartment c,
                         double value) {
  std::ostringstream msg;
  msg.precision(10);
  msg << kind << " at t=" << st.t << ", cell " << j << ", compartment " << compartment_name(c)
      << " (value " << value << ")";
  if (std::string_view(kind) == "blow-up") throw BlowUpError(msg.str());
  throw InstabilityError("instability: " + msg.str());
}

}  // namespace

void check_state(const FieldState& st, const ModelParams& params, const BoundConstants* bounds,
                 const StateTolerances& tol) {
  const std::size_t n = st.size();
  for (Compartment c : kCompartments) {
    const auto& f = st.field(c);
    if (f.size() != n) throw DomainError("check_state: ragged state");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(f[j])) report("blow-up", st, j, c, f[j]);
    }
  }
  for (Compartment c : kCompartments) {
    const auto& f = st.field(c);
    for (std::size_t j = 0; j < n; ++j) {
      if (f[j] < -tol.negative) report("negative value", st, j, c, f[j]);
    }
  }
  const double cons_tol = tol.conservation * params.N;
  for (std::size_t j = 0; j < n; ++j) {
    const double total = st.s[j] + st.i[j] + st.r[j];
    if (std::abs(total - params.N) > cons_tol) {
      report("S+I+R drift", st, j, Compartment::S, total);
    }
  }
  if (bounds != nullptr) {
    const double b_cap = bounds->b_max * (1.0 + tol.bound);
    const double o_cap = bounds->o_max * (1.0 + tol.bound);
    for (std::size_t j = 0; j < n; ++j) {
      if (st.b[j] > b_cap) report("bound exceeded", st, j, Compartment::B, st.b[j]);
      if (st.o[j] > o_cap) report("bound exceeded", st, j, Compartment::O, st.o[j]);
    }
  }
}

void clamp_undershoots(FieldState& st, double tol) {
  for (Compartment c : kCompartments) {
    for (double& v : st.field(c)) {
      if (v < 0.0 && v >= -tol) v = 0.0;
    }
  }
}

}  // namespace blight
