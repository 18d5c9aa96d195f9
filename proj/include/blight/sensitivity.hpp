#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blight/grid.hpp"
#include "blight/integrator.hpp"

namespace blight {

/// Unscrambled base-2 digital sequence with Joe-Kuo direction numbers.
/// The leading all-zero point is skipped, so next() starts at index 1.
class SobolSequence {
public:
  static constexpr std::size_t kMaxDim = 21;

  /// Throws DomainError for dim == 0 or dim > kMaxDim.
  explicit SobolSequence(std::size_t dim);

  std::size_t dim() const { return dim_; }
  /// Fills `out` (size dim) with the next point in [0, 1).
  void next(std::span<double> out);

private:
  std::size_t dim_;
  std::uint64_t count_ = 0;
  std::vector<std::array<std::uint32_t, 32>> v_;
  std::vector<std::uint32_t> x_;
};

enum class Sampler { low_discrepancy, pseudo_random };

std::string_view sampler_name(Sampler s);
Sampler parse_sampler(std::string_view name);

/// Saltelli A / B / AB(i) design on the unit cube.
struct SobolDesign {
  std::size_t n_base = 0;
  std::size_t k = 0;
  Eigen::MatrixXd matrix_a;  ///< n_base x k
  Eigen::MatrixXd matrix_b;
  std::vector<Eigen::MatrixXd> ab_matrices;  ///< A with column i from B

  std::size_t total_runs() const { return n_base * (k + 2); }
};

/// low_discrepancy: the first n_base points of a 2k-dimensional sequence,
/// first k coordinates to A and the rest to B (seed unused).
/// pseudo_random: A then B filled row-wise from mt19937_64(seed).
SobolDesign sobol_design(std::size_t n_base, std::size_t k, Sampler sampler, std::uint64_t seed);

/// Population variance of y_a and y_b pooled.
double pooled_variance(std::span<const double> y_a, std::span<const double> y_b);

/// mean((y_b - m) (y_ab_i - y_a)) / V with m and V the mean and variance of
/// the pooled (y_a, y_b) sample; nullopt if V = 0. The centring makes the
/// estimate invariant under a constant shift of the outputs.
std::optional<double> first_order_saltelli(std::span<const double> y_a, std::span<const double> y_b,
                                           std::span<const double> y_ab_i);

/// mean((y_a - y_ab_i)^2) / (2 V); nullopt if V = 0.
std::optional<double> total_order_jansen(std::span<const double> y_a, std::span<const double> y_ab_i,
                                         double variance);
/// Same with V = variance of y_a.
std::optional<double> total_order_jansen(std::span<const double> y_a, std::span<const double> y_ab_i);

/// Model outputs arranged like the design.
struct DesignOutputs {
  std::vector<double> y_a, y_b;
  std::vector<std::vector<double>> y_ab;
};

struct SobolResult {
  std::vector<std::string> factors;
  std::vector<double> first_order, total_order;
  /// Bootstrap standard errors and 95% percentile intervals.
  std::vector<double> first_se, total_se, first_lo, first_hi, total_lo, total_hi;
  /// Bootstrap standard error of T_i - S_i.
  std::vector<double> gap_se;
  double variance = 0.0;
  bool degenerate = false;  ///< zero output variance; indices left at 0
  std::size_t n_base = 0, k = 0, bootstrap_replicates = 0;
  std::uint64_t seed = 0;
  Sampler sampler = Sampler::low_discrepancy;
  std::size_t degenerate_qoi = 0;  ///< evaluations mapped to the fallback value

  std::size_t total_runs() const { return n_base * (k + 2); }
};

/// Both estimators plus a row bootstrap (replicates = 0 skips it).
SobolResult sobol_indices(const DesignOutputs& y, std::size_t replicates, std::uint64_t seed);

/// Evaluates f on the design scaled to `ranges` and estimates the indices.
/// f receives the scaled point in range order and must be thread-safe.
SobolResult sobol_analyze(const std::function<double(std::span<const double>)>& f,
                          const std::vector<ParamRange>& ranges, std::size_t n_base, Sampler sampler,
                          std::uint64_t seed, std::size_t replicates = 1000, unsigned threads = 1);

std::vector<ParamRange> default_sobol_factors();

struct SensitivityConfig {
  Grid grid{1000.0, 10000};
  IntegratorOptions integrator{};  ///< t_end is replaced by t_q
  ModelParams base = sensitivity_baseline();
  std::vector<ParamRange> factors = default_sobol_factors();
  double b_seed = 1e6;
  double t_q = 7.0;
  Sampler sampler = Sampler::low_discrepancy;
  std::size_t bootstrap_replicates = 1000;

  void validate() const;
};

struct QoiValue {
  double location = 0.0;  ///< centre of cell 0 when degenerate
  bool degenerate = false;
};

/// Peak location of I at t_q from the standard initial condition.
/// Propagates integrator errors.
QoiValue qoi_peak_at_day(const ModelParams& params, const SensitivityConfig& cfg, double t_q);

/// Full experiment. Degenerate peaks are counted in degenerate_qoi; any
/// integration failure throws ExperimentAborted naming the design row.
SobolResult run_sensitivity(const SensitivityConfig& cfg, std::size_t n_base, std::uint64_t seed,
                            unsigned threads = 0, const std::function<void(std::size_t done)>& progress = {});

}  // namespace blight
