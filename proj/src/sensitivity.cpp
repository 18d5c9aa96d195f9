#include "blight/sensitivity.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

#include "blight/errors.hpp"
#include "blight/parallel.hpp"
#include "blight/random.hpp"
#include "blight/wave.hpp"

namespace blight {

namespace {

// Joe & Kuo (2008) direction numbers, dimensions 2..21: s, a, m_1..m_s.
struct DirectionEntry {
  unsigned s;
  unsigned a;
  std::array<std::uint32_t, 7> m;
};

constexpr std::array<DirectionEntry, SobolSequence::kMaxDim - 1> kDirections = {{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
}};

constexpr int kBits = 32;

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b || a == 0) throw DomainError(std::string(what) + ": inputs must be non-empty and equally long");
}

// Percentile with linear interpolation between order statistics.
double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct RawIndices {
  std::vector<double> s, t;
  double variance = 0.0;
};

// Estimators on an arbitrary row selection; rows may repeat.
RawIndices estimate(const DesignOutputs& y, const std::vector<std::size_t>& rows) {
  const std::size_t n = rows.size();
  const std::size_t k = y.y_ab.size();
  double mean = 0.0;
  for (std::size_t r : rows) mean += y.y_a[r] + y.y_b[r];
  mean /= static_cast<double>(2 * n);
  double var = 0.0;
  for (std::size_t r : rows) {
    var += (y.y_a[r] - mean) * (y.y_a[r] - mean) + (y.y_b[r] - mean) * (y.y_b[r] - mean);
  }
  var /= static_cast<double>(2 * n);

  RawIndices out;
  out.variance = var;
  out.s.assign(k, 0.0);
  out.t.assign(k, 0.0);
  if (var == 0.0) return out;
  for (std::size_t i = 0; i < k; ++i) {
    double fs = 0.0, ft = 0.0;
    for (std::size_t r : rows) {
      const double d = y.y_ab[i][r] - y.y_a[r];
      fs += (y.y_b[r] - mean) * d;
      ft += d * d;
    }
    out.s[i] = fs / static_cast<double>(n) / var;
    out.t[i] = ft / static_cast<double>(n) / (2.0 * var);
  }
  return out;
}

}  // namespace

SobolSequence::SobolSequence(std::size_t dim) : dim_(dim), v_(dim), x_(dim, 0) {
  if (dim == 0 || dim > kMaxDim) {
    throw DomainError("SobolSequence: dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  for (int b = 0; b < kBits; ++b) v_[0][b] = 1u << (kBits - 1 - b);
  for (std::size_t d = 1; d < dim; ++d) {
    const DirectionEntry& e = kDirections[d - 1];
    auto& v = v_[d];
    for (unsigned b = 0; b < e.s; ++b) v[b] = e.m[b] << (kBits - 1 - b);
    for (unsigned b = e.s; b < kBits; ++b) {
      std::uint32_t val = v[b - e.s] ^ (v[b - e.s] >> e.s);
      for (unsigned j = 1; j < e.s; ++j) {
        if ((e.a >> (e.s - 1 - j)) & 1u) val ^= v[b - j];
      }
      v[b] = val;
    }
  }
}

void SobolSequence::next(std::span<double> out) {
  if (out.size() != dim_) throw DomainError("SobolSequence::next: wrong output size");
  // Gray-code update from point count_ to count_ + 1.
  std::uint64_t c = 0;
  for (std::uint64_t i = count_; i & 1u; i >>= 1) ++c;
  if (c >= kBits) throw DomainError("SobolSequence: sequence exhausted");
  ++count_;
  for (std::size_t d = 0; d < dim_; ++d) {
    x_[d] ^= v_[d][c];
    out[d] = static_cast<double>(x_[d]) * 0x1.0p-32;
  }
}

std::string_view sampler_name(Sampler s) {
  return s == Sampler::low_discrepancy ? "low_discrepancy" : "pseudo_random";
}

Sampler parse_sampler(std::string_view name) {
  if (name == "low_discrepancy") return Sampler::low_discrepancy;
  if (name == "pseudo_random") return Sampler::pseudo_random;
  throw DomainError("unknown sampler '" + std::string(name) + "'");
}

SobolDesign sobol_design(std::size_t n_base, std::size_t k, Sampler sampler, std::uint64_t seed) {
  if (n_base < 2) throw DomainError("sobol_design: n_base must be >= 2");
  if (k < 1) throw DomainError("sobol_design: k must be >= 1");
  SobolDesign d;
  d.n_base = n_base;
  d.k = k;
  d.matrix_a.resize(static_cast<Eigen::Index>(n_base), static_cast<Eigen::Index>(k));
  d.matrix_b.resizeLike(d.matrix_a);

  if (sampler == Sampler::low_discrepancy) {
    SobolSequence seq(2 * k);
    std::vector<double> point(2 * k);
    for (std::size_t r = 0; r < n_base; ++r) {
      seq.next(point);
      for (std::size_t c = 0; c < k; ++c) {
        d.matrix_a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = point[c];
        d.matrix_b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = point[k + c];
      }
    }
  } else {
    std::mt19937_64 rng(seed);
    for (Eigen::MatrixXd* m : {&d.matrix_a, &d.matrix_b}) {
      for (Eigen::Index r = 0; r < m->rows(); ++r) {
        for (Eigen::Index c = 0; c < m->cols(); ++c) (*m)(r, c) = unit_uniform(rng);
      }
    }
  }

  d.ab_matrices.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    Eigen::MatrixXd ab = d.matrix_a;
    ab.col(static_cast<Eigen::Index>(i)) = d.matrix_b.col(static_cast<Eigen::Index>(i));
    d.ab_matrices.push_back(std::move(ab));
  }
  return d;
}

double pooled_variance(std::span<const double> y_a, std::span<const double> y_b) {
  require_same_length(y_a.size(), y_b.size(), "pooled_variance");
  const double m = 0.5 * (mean_of(y_a) + mean_of(y_b));
  double ss = 0.0;
  for (double v : y_a) ss += (v - m) * (v - m);
  for (double v : y_b) ss += (v - m) * (v - m);
  return ss / static_cast<double>(y_a.size() + y_b.size());
}

std::optional<double> first_order_saltelli(std::span<const double> y_a, std::span<const double> y_b,
                                           std::span<const double> y_ab_i) {
  require_same_length(y_a.size(), y_b.size(), "first_order_saltelli");
  require_same_length(y_a.size(), y_ab_i.size(), "first_order_saltelli");
  const double var = pooled_variance(y_a, y_b);
  if (var == 0.0) return std::nullopt;
  // Centring y_b leaves the expectation unchanged (E[y_ab_i - y_a] = 0) and
  // removes a noise term proportional to the output mean.
  const double mean = 0.5 * (mean_of(y_a) + mean_of(y_b));
  double acc = 0.0;
  for (std::size_t r = 0; r < y_a.size(); ++r) acc += (y_b[r] - mean) * (y_ab_i[r] - y_a[r]);
  return acc / static_cast<double>(y_a.size()) / var;
}

std::optional<double> total_order_jansen(std::span<const double> y_a, std::span<const double> y_ab_i,
                                         double variance) {
  require_same_length(y_a.size(), y_ab_i.size(), "total_order_jansen");
  if (!(variance > 0.0)) return std::nullopt;
  double acc = 0.0;
  for (std::size_t r = 0; r < y_a.size(); ++r) acc += (y_a[r] - y_ab_i[r]) * (y_a[r] - y_ab_i[r]);
  return acc / static_cast<double>(y_a.size()) / (2.0 * variance);
}

std::optional<double> total_order_jansen(std::span<const double> y_a, std::span<const double> y_ab_i) {
  require_same_length(y_a.size(), y_ab_i.size(), "total_order_jansen");
  const double m = mean_of(y_a);
  double ss = 0.0;
  for (double v : y_a) ss += (v - m) * (v - m);
  return total_order_jansen(y_a, y_ab_i, ss / static_cast<double>(y_a.size()));
}

SobolResult sobol_indices(const DesignOutputs& y, std::size_t replicates, std::uint64_t seed) {
  const std::size_t n = y.y_a.size();
  const std::size_t k = y.y_ab.size();
  require_same_length(n, y.y_b.size(), "sobol_indices");
  if (k == 0) throw DomainError("sobol_indices: no factors");
  for (const auto& col : y.y_ab) require_same_length(n, col.size(), "sobol_indices");

  SobolResult res;
  res.n_base = n;
  res.k = k;
  res.seed = seed;
  res.bootstrap_replicates = replicates;

  std::vector<std::size_t> rows(n);
  for (std::size_t r = 0; r < n; ++r) rows[r] = r;
  const RawIndices point = estimate(y, rows);
  res.variance = point.variance;
  res.degenerate = point.variance == 0.0;
  res.first_order = point.s;
  res.total_order = point.t;
  for (auto* v : {&res.first_se, &res.total_se, &res.gap_se}) v->assign(k, 0.0);
  res.first_lo = res.first_hi = res.first_order;
  res.total_lo = res.total_hi = res.total_order;
  if (res.degenerate || replicates == 0) return res;

  std::mt19937_64 rng(derive_seed(seed, 0xb0075712ULL));
  std::vector<std::vector<double>> bs_s(k), bs_t(k), bs_gap(k);
  for (std::size_t b = 0; b < replicates; ++b) {
    for (auto& r : rows) r = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n));
    const RawIndices est = estimate(y, rows);
    for (std::size_t i = 0; i < k; ++i) {
      bs_s[i].push_back(est.s[i]);
      bs_t[i].push_back(est.t[i]);
      bs_gap[i].push_back(est.t[i] - est.s[i]);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    res.first_se[i] = sample_sd(bs_s[i]);
    res.total_se[i] = sample_sd(bs_t[i]);
    res.gap_se[i] = sample_sd(bs_gap[i]);
    res.first_lo[i] = percentile(bs_s[i], 0.025);
    res.first_hi[i] = percentile(bs_s[i], 0.975);
    res.total_lo[i] = percentile(bs_t[i], 0.025);
    res.total_hi[i] = percentile(bs_t[i], 0.975);
  }
  return res;
}

namespace {

// Row r of the stacked design [A; B; AB_0; ...; AB_{k-1}], scaled to ranges.
std::vector<double> design_point(const SobolDesign& d, const std::vector<ParamRange>& ranges, std::size_t run) {
  const std::size_t block = run / d.n_base;
  const auto row = static_cast<Eigen::Index>(run % d.n_base);
  const Eigen::MatrixXd& m = block == 0 ? d.matrix_a : block == 1 ? d.matrix_b : d.ab_matrices[block - 2];
  std::vector<double> x(d.k);
  for (std::size_t c = 0; c < d.k; ++c) {
    x[c] = ranges[c].lo + (ranges[c].hi - ranges[c].lo) * m(row, static_cast<Eigen::Index>(c));
  }
  return x;
}

DesignOutputs split_outputs(const std::vector<double>& flat, std::size_t n, std::size_t k) {
  DesignOutputs y;
  y.y_a.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(n));
  y.y_b.assign(flat.begin() + static_cast<std::ptrdiff_t>(n), flat.begin() + static_cast<std::ptrdiff_t>(2 * n));
  for (std::size_t i = 0; i < k; ++i) {
    const auto first = flat.begin() + static_cast<std::ptrdiff_t>((2 + i) * n);
    y.y_ab.emplace_back(first, first + static_cast<std::ptrdiff_t>(n));
  }
  return y;
}

std::string describe_run(std::size_t run, std::size_t n) {
  const std::size_t block = run / n;
  std::ostringstream s;
  s << "run " << run << " (";
  if (block == 0) s << "A";
  else if (block == 1) s << "B";
  else s << "AB" << (block - 2);
  s << " row " << run % n << ")";
  return s.str();
}

}  // namespace

SobolResult sobol_analyze(const std::function<double(std::span<const double>)>& f,
                          const std::vector<ParamRange>& ranges, std::size_t n_base, Sampler sampler,
                          std::uint64_t seed, std::size_t replicates, unsigned threads) {
  for (const ParamRange& pr : ranges) {
    if (!(pr.lo <= pr.hi) || !std::isfinite(pr.lo) || !std::isfinite(pr.hi)) {
      throw DomainError("sobol_analyze: invalid range for '" + pr.name + "'");
    }
  }
  const SobolDesign d = sobol_design(n_base, ranges.size(), sampler, seed);
  std::vector<double> flat(d.total_runs());
  parallel_for(flat.size(), threads, [&](std::size_t run) { flat[run] = f(design_point(d, ranges, run)); });
  SobolResult res = sobol_indices(split_outputs(flat, n_base, d.k), replicates, seed);
  res.sampler = sampler;
  for (const ParamRange& pr : ranges) res.factors.push_back(pr.name);
  return res;
}

std::vector<ParamRange> default_sobol_factors() {
  return {{"D2", 0.0, 50.0}, {"mu", 0.05, 1.0}, {"N", 1.0, 5.0}, {"r", 0.05, 1.0}};
}

void SensitivityConfig::validate() const {
  validate_ranges(factors);
  if (factors.empty()) throw DomainError("sensitivity: no factors");
  if (!(b_seed >= 0.0)) throw DomainError("sensitivity: b_seed must be >= 0");
  if (!(t_q > 0.0)) throw DomainError("sensitivity: t_q must be > 0");
  base.validate();
}

QoiValue qoi_peak_at_day(const ModelParams& params, const SensitivityConfig& cfg, double t_q) {
  IntegratorOptions opts = cfg.integrator;
  opts.t_end = t_q;
  const FieldState state0 = standard_initial_condition(cfg.grid, params, cfg.b_seed);
  const Trajectory traj = integrate_at(state0, params, cfg.grid, opts, {t_q});
  const Peak p = peak_location(traj.snapshots.back().i, cfg.grid);
  return {p.location, p.degenerate};
}

SobolResult run_sensitivity(const SensitivityConfig& cfg, std::size_t n_base, std::uint64_t seed,
                            unsigned threads, const std::function<void(std::size_t done)>& progress) {
  cfg.validate();
  const SobolDesign d = sobol_design(n_base, cfg.factors.size(), cfg.sampler, seed);
  std::vector<double> flat(d.total_runs());
  std::vector<char> degenerate(d.total_runs(), 0);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  parallel_for(flat.size(), threads, [&](std::size_t run) {
    ModelParams p = cfg.base;
    const std::vector<double> x = design_point(d, cfg.factors, run);
    for (std::size_t c = 0; c < x.size(); ++c) param_ref(p, cfg.factors[c].name) = x[c];
    try {
      const QoiValue q = qoi_peak_at_day(p, cfg, cfg.t_q);
      flat[run] = q.location;
      degenerate[run] = q.degenerate;
    } catch (const std::exception& e) {
      throw ExperimentAborted("sensitivity: " + describe_run(run, n_base) + " failed: " + e.what());
    }
    const std::size_t finished = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(finished);
    }
  });

  SobolResult res = sobol_indices(split_outputs(flat, n_base, d.k), cfg.bootstrap_replicates, seed);
  res.sampler = cfg.sampler;
  for (const ParamRange& pr : cfg.factors) res.factors.push_back(pr.name);
  res.degenerate_qoi = static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));
  return res;
}

}  // namespace blight
