#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "blight/model.hpp"

namespace blight {

/// Uniform 1D cell-centred grid on [0, length].
struct Grid {
  double length = 1000.0;
  std::size_t n_cells = 10000;

  Grid() = default;
  /// Throws DomainError unless n_cells >= 3 and length > 0.
  Grid(double length, std::size_t n_cells);

  double dx() const { return length / static_cast<double>(n_cells); }
  double center(std::size_t j) const { return (static_cast<double>(j) + 0.5) * length / static_cast<double>(n_cells); }

  bool operator==(const Grid&) const = default;
};

enum class Compartment { B, O, S, I, R };

inline constexpr std::array<Compartment, 5> kCompartments = {
    Compartment::B, Compartment::O, Compartment::S, Compartment::I, Compartment::R};

std::string_view compartment_name(Compartment c);

/// The five fields at one instant. Also used to hold time derivatives.
struct FieldState {
  double t = 0.0;
  std::vector<double> b, o, s, i, r;

  FieldState() = default;
  FieldState(double t, std::size_t n_cells);

  std::size_t size() const { return b.size(); }
  std::vector<double>& field(Compartment c);
  const std::vector<double>& field(Compartment c) const;
  PointState at(std::size_t j) const { return {b[j], o[j], s[j], i[j], r[j]}; }
};

/// Time-ordered snapshots of one run.
struct Trajectory {
  Grid grid;
  ModelParams params;
  std::vector<FieldState> snapshots;
  double dt_record = 0.0;

  /// Snapshot whose time is closest to t (earliest on ties).
  /// Throws DomainError when empty.
  const FieldState& nearest(double t) const;
};

/// Second-order Laplacian with zero-flux (reflecting ghost cell) ends.
std::vector<double> laplacian_neumann(std::span<const double> field, double dx);

/// Semi-discrete right-hand side: reaction terms everywhere plus diffusion
/// of B (D1) and O (D2). S, I and R do not diffuse.
FieldState full_rhs(const FieldState& state, const ModelParams& params, const Grid& grid);

/// b_seed CFU in cell 0, S = N everywhere, all else 0.
FieldState standard_initial_condition(const Grid& grid, const ModelParams& params, double b_seed);

/// Tolerances used when checking recorded states.
struct StateTolerances {
  double negative = 1e-9;      ///< absolute undershoot allowed below 0
  double conservation = 1e-6;  ///< relative to N
  double bound = 1e-6;         ///< relative to the a-priori bounds
};

/// Throws BlowUpError on a non-finite entry and InstabilityError on any
/// other violation, naming the first offending cell, compartment and time.
/// `bounds` may be null to skip the a-priori bound check.
void check_state(const FieldState& state, const ModelParams& params,
                 const BoundConstants* bounds, const StateTolerances& tol = {});

/// Undershoots within tolerance are set to 0.
void clamp_undershoots(FieldState& state, double tol = 1e-9);

}  // namespace blight
