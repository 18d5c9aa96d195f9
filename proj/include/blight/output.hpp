#pragma once

// CSV and SVG writers. CSV files start with '#' metadata lines (seed and
// config hash), then one header row. Numbers use the shortest text that
// round-trips, so equal inputs give byte-identical files.

#include <cstdint>
#include <ostream>
#include <string>

#include "blight/grid.hpp"
#include "blight/sensitivity.hpp"
#include "blight/wave.hpp"

namespace blight {

struct OutputMeta {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// Columns: t,x,B,O,S,I,R; one row per cell per snapshot.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const OutputMeta& meta);

/// Two stacked panels: flowers (S, I, R) on a linear axis and pathogen
/// (B, O) on a log10 axis, both over x.
void write_snapshot_svg(std::ostream& out, const FieldState& snap, const Grid& grid, double n_flowers,
                        const OutputMeta& meta);

/// Columns: sample,seed,<14 params>,N,t_cmp,c_min,pearson,l2_shape_diff,
/// neighborhood_cells,neighborhood_truncated,speed,speed_minus_cmin,
/// regression_r2,status,error.
void write_wave_samples_csv(std::ostream& out, const WaveExperimentResult& res, const OutputMeta& meta);

/// Columns: statistic,sample_min,sample_max,sample_mean,std_dev; one row per
/// statistic (pearson, local_l2, speed_difference).
void write_wave_summary_csv(std::ostream& out, const WaveExperimentResult& res, const OutputMeta& meta);

/// Columns: factor,S,S_ci_low,S_ci_high,T,T_ci_low,T_ci_high,S_se,T_se,
/// T_minus_S_se.
void write_sobol_csv(std::ostream& out, const SobolResult& res, const OutputMeta& meta);

/// Grouped bars: S_i and T_i per factor with bootstrap interval whiskers.
void write_sobol_svg(std::ostream& out, const SobolResult& res, const OutputMeta& meta);

/// Columns: quantity,value.
void write_check_csv(std::ostream& out, const ModelParams& params, const ConstraintReport& rep,
                     const BoundConstants& bounds, const OutputMeta& meta);

}  // namespace blight
