#pragma once

// Run configuration: an INI file with fixed sections. Every key is
// optional (defaults below) but unknown sections or keys are errors.
//
//   [run]         experiment, seed
//   [model]       the 14 rate parameters (N lives under [initial])
//   [grid]        length, n_cells
//   [integrator]  method, dt, t_end, record_every
//   [initial]     b_seed, N
//   [simulate]    snapshots (comma separated times)
//   [wave]        n_samples, track_start, track_end, track_points, t_ref,
//                 t_cmp_lo, t_cmp_hi, max_halfwidth
//   [wave_ranges] <param> = lo, hi   (replaces the default box when present)
//   [sobol]       n_base, t_q, sampler, bootstrap
//   [sobol_factors] <param> = lo, hi

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "blight/integrator.hpp"
#include "blight/sensitivity.hpp"
#include "blight/wave.hpp"

namespace blight {

enum class Experiment { simulate, wave, sobol, check };

std::string_view experiment_name(Experiment e);
Experiment parse_experiment(std::string_view name);

struct RunConfig {
  Experiment experiment = Experiment::simulate;
  std::uint64_t seed = 42;

  ModelParams model{};  ///< N is taken from n_flowers
  Grid grid{1000.0, 10000};
  IntegratorOptions integrator{};

  double b_seed = 1e6;
  double n_flowers = 5.0;

  std::vector<double> snapshots{4.0, 4.5, 5.0, 5.5};

  std::size_t wave_samples = 20;
  double track_start = 10.0, track_end = 30.0;
  std::size_t track_points = 41;
  double t_ref = 20.0, t_cmp_lo = 20.1, t_cmp_hi = 25.0;
  std::size_t max_halfwidth = 1000;
  std::vector<ParamRange> wave_ranges = default_wave_ranges();

  std::size_t sobol_n_base = 300;
  double t_q = 7.0;
  Sampler sampler = Sampler::low_discrepancy;
  std::size_t bootstrap = 1000;
  std::vector<ParamRange> sobol_factors = default_sobol_factors();

  /// model with N filled in.
  ModelParams params() const;
  WaveConfig wave_config() const;
  SensitivityConfig sensitivity_config() const;

  /// Throws DomainError when any value is out of range.
  void validate() const;
};

/// Parses INI text. Throws DomainError naming the offending key or line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Canonical text: every key in a fixed order, shortest round-trip
/// numbers. write_config(parse_config(write_config(c))) == write_config(c).
std::string write_config(const RunConfig& cfg);

/// FNV-1a 64 of write_config(cfg), as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace blight
