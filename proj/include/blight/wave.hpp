#pragma once

// Travelling-wave diagnostics: peak tracking, Pearson linearity of the peak
// path, a local L2 shape comparison and the regression speed. The
// experiment driver samples parameters, integrates and summarises.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blight/grid.hpp"
#include "blight/integrator.hpp"

namespace blight {

struct Peak {
  std::size_t index = 0;
  double location = 0.0;  ///< cell centre [m]
  bool degenerate = false;  ///< field is flat; index is 0
};

/// Largest entry, first one on ties.
Peak peak_location(std::span<const double> field, const Grid& grid);

/// Sample Pearson correlation; nullopt when either input has zero variance.
/// Throws DomainError on length mismatch or fewer than 2 points.
std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys);

struct PeakSeries {
  std::vector<double> times;
  std::vector<double> locations;
  std::vector<std::size_t> indices;
  bool any_degenerate = false;  ///< some profile was flat (location = cell 0)
};

/// Maps a snapshot to the profile whose maximum is tracked.
using ProfileSelector = std::function<std::vector<double>(const FieldState&)>;

/// I(x): the infected pulse. Default selector.
std::vector<double> infected_profile(const FieldState& s);

/// -(B[j+1] - B[j]) padded with 0 in the last cell: peaks at the steepest
/// point of a decreasing B front. Used for pure pathogen runs where I = 0.
std::vector<double> front_gradient_profile(const FieldState& s);

/// Peak positions at the snapshots nearest to n_points equally spaced
/// times in [t_start, t_end]. Throws DomainError when the window is not
/// covered by the trajectory or too coarsely sampled for n_points.
PeakSeries track_peaks(const Trajectory& traj, double t_start, double t_end, std::size_t n_points,
                       const ProfileSelector& select = infected_profile);

struct ShapeDiff {
  double l2 = 0.0;
  std::size_t neighborhood_cells = 0;  ///< half-width of the window
  bool truncated = false;
};

/// Aligns `cmp` on `ref` by an integer shift that makes the peaks coincide,
/// then sqrt(sum over the window of (ref - cmp)^2 dx). The half-width is the
/// smallest distance from either peak to its nearer boundary, capped at
/// max_halfwidth.
ShapeDiff shape_diff_profiles(std::span<const double> ref, std::span<const double> cmp, double dx,
                              std::size_t max_halfwidth = 1000);

/// shape_diff_profiles on the I fields at t_ref and t_cmp.
ShapeDiff shape_diff_local_l2(const Trajectory& traj, double t_ref, double t_cmp,
                              std::size_t max_halfwidth = 1000);

struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;  ///< 1 when locations are constant
};

/// Least-squares line of location on time. Throws DomainError with fewer
/// than 2 points or when all times coincide.
Regression wave_speed_regression(const PeakSeries& series);

struct WaveStats {
  double pearson = 0.0;
  double l2_shape_diff = 0.0;
  std::size_t neighborhood_cells = 0;
  bool neighborhood_truncated = false;
  double speed = 0.0;
  double speed_minus_cmin = 0.0;
  double regression_r2 = 0.0;
};

/// Sampling box used by the wave experiment (14 parameters, N excluded).
std::vector<ParamRange> default_wave_ranges();

struct WaveConfig {
  Grid grid{1000.0, 10000};
  IntegratorOptions integrator{};  // t_end 30, dt 0.1
  ModelParams base{};              // values for parameters without a range
  double n_flowers = 5.0;
  double b_seed = 1e6;
  std::vector<ParamRange> ranges = default_wave_ranges();
  double track_start = 10.0;
  double track_end = 30.0;
  std::size_t track_points = 41;
  double t_ref = 20.0;
  double t_cmp_lo = 20.1;
  double t_cmp_hi = 25.0;
  std::size_t max_halfwidth = 1000;

  /// Throws DomainError on inconsistent settings.
  void validate() const;
};

struct WaveSample {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  ModelParams params{};
  double t_cmp = 0.0;
  double c_min = 0.0;
  bool ok = false;
  std::string error;  ///< diagnostics when !ok
  WaveStats stats{};
};

struct StatSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;  ///< n - 1 denominator; 0 for a single value
};

/// Throws DomainError on empty input.
StatSummary summarize(std::span<const double> values);

struct WaveExperimentResult {
  std::vector<WaveSample> samples;  ///< in sample order
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  /// Empty when no sample succeeded.
  std::optional<StatSummary> pearson, l2_shape_diff, speed_minus_cmin;
};

/// Parameters, t_cmp and seed of sample `index`; cheap and deterministic.
WaveSample draw_wave_sample(const WaveConfig& cfg, std::uint64_t master_seed, std::size_t index);

/// Integrates one drawn sample and fills its statistics. Failures are
/// recorded in the sample, not thrown.
void evaluate_wave_sample(const WaveConfig& cfg, WaveSample& sample);

/// Statistics of an already integrated trajectory.
WaveStats analyze_wave(const Trajectory& traj, const WaveConfig& cfg, double t_cmp);

/// Runs n_samples independent samples on `threads` workers (0 = all cores).
/// `progress`, if set, is called after each sample from the worker thread.
WaveExperimentResult wave_experiment(std::size_t n_samples, std::uint64_t seed, const WaveConfig& cfg,
                                     unsigned threads = 0,
                                     const std::function<void(const WaveSample&)>& progress = {});

}  // namespace blight
