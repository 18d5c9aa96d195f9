#include "blight/wave.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

#include "blight/errors.hpp"
#include "blight/parallel.hpp"
#include "blight/random.hpp"

namespace blight {

namespace {

bool close_in_time(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

std::vector<double> equally_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return out;
}

// Index range [first, last] of recording-grid times inside [lo, hi].
std::pair<long, long> record_grid_span(double lo, double hi, double every) {
  const long first = static_cast<long>(std::ceil(lo / every - 1e-9));
  const long last = static_cast<long>(std::floor(hi / every + 1e-9));
  return {first, last};
}

double snap_to_grid(double t, double every) { return std::round(t / every) * every; }

}  // namespace

Peak peak_location(std::span<const double> field, const Grid& grid) {
  if (field.size() != grid.n_cells) throw DomainError("peak_location: field size does not match grid");
  const auto it = std::max_element(field.begin(), field.end());
  const auto lowest = std::min_element(field.begin(), field.end());
  Peak p;
  if (*it == *lowest) {
    p.degenerate = true;
    p.location = grid.center(0);
    return p;
  }
  p.index = static_cast<std::size_t>(it - field.begin());
  p.location = grid.center(p.index);
  return p;
}

std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("pearson: inputs differ in length");
  if (xs.size() < 2) throw DomainError("pearson: need at least 2 points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = xs[k] - mx;
    const double dy = ys[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  // The centred sums of a constant series can come out as rounding noise,
  // so test for constancy directly.
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(xs) || constant(ys) || sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> infected_profile(const FieldState& s) { return s.i; }

std::vector<double> front_gradient_profile(const FieldState& s) {
  std::vector<double> g(s.size(), 0.0);
  for (std::size_t j = 0; j + 1 < s.size(); ++j) g[j] = s.b[j] - s.b[j + 1];
  return g;
}

PeakSeries track_peaks(const Trajectory& traj, double t_start, double t_end, std::size_t n_points,
                       const ProfileSelector& select) {
  if (n_points < 2) throw DomainError("track_peaks: need at least 2 points");
  if (!(t_end > t_start)) throw DomainError("track_peaks: t_end must exceed t_start");
  if (traj.snapshots.empty()) throw DomainError("track_peaks: empty trajectory");
  const double first = traj.snapshots.front().t;
  const double last = traj.snapshots.back().t;
  if ((t_start < first && !close_in_time(t_start, first)) || (t_end > last && !close_in_time(t_end, last))) {
    std::ostringstream msg;
    msg << "track_peaks: window [" << t_start << ", " << t_end << "] outside trajectory [" << first << ", "
        << last << "]";
    throw DomainError(msg.str());
  }

  PeakSeries series;
  for (double target : equally_spaced(t_start, t_end, n_points)) {
    const FieldState& snap = traj.nearest(target);
    if (!series.times.empty() && !(snap.t > series.times.back())) {
      throw DomainError("track_peaks: trajectory too coarse for the requested number of points");
    }
    const std::vector<double> profile = select(snap);
    const Peak p = peak_location(profile, traj.grid);
    series.any_degenerate = series.any_degenerate || p.degenerate;
    series.times.push_back(snap.t);
    series.locations.push_back(p.location);
    series.indices.push_back(p.index);
  }
  return series;
}

ShapeDiff shape_diff_profiles(std::span<const double> ref, std::span<const double> cmp, double dx,
                              std::size_t max_halfwidth) {
  if (ref.size() != cmp.size() || ref.empty()) throw DomainError("shape_diff: profiles differ in length");
  if (!(dx > 0.0)) throw DomainError("shape_diff: dx must be > 0");
  const std::size_t n = ref.size();
  auto peak_of = [&](std::span<const double> f) {
    const auto hi = std::max_element(f.begin(), f.end());
    if (*hi == *std::min_element(f.begin(), f.end())) {
      throw DomainError("shape_diff: degenerate (flat) profile");
    }
    return static_cast<std::size_t>(hi - f.begin());
  };
  const std::size_t p = peak_of(ref);
  const std::size_t q = peak_of(cmp);
  const std::size_t half = std::min({p, n - 1 - p, q, n - 1 - q, max_halfwidth});

  double sum = 0.0;
  for (std::size_t k = 0; k <= 2 * half; ++k) {
    const double d = ref[p - half + k] - cmp[q - half + k];
    sum += d * d;
  }
  return {std::sqrt(sum * dx), half, half < max_halfwidth};
}

ShapeDiff shape_diff_local_l2(const Trajectory& traj, double t_ref, double t_cmp, std::size_t max_halfwidth) {
  const FieldState& a = traj.nearest(t_ref);
  const FieldState& b = traj.nearest(t_cmp);
  if (!close_in_time(a.t, t_ref) || !close_in_time(b.t, t_cmp)) {
    throw DomainError("shape_diff_local_l2: requested time not recorded");
  }
  return shape_diff_profiles(a.i, b.i, traj.grid.dx(), max_halfwidth);
}

Regression wave_speed_regression(const PeakSeries& series) {
  const auto& t = series.times;
  const auto& x = series.locations;
  if (t.size() != x.size()) throw DomainError("wave_speed_regression: inconsistent series");
  if (t.size() < 2) throw DomainError("wave_speed_regression: need at least 2 points");
  const double n = static_cast<double>(t.size());
  double mt = 0.0, mx = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    mt += t[k];
    mx += x[k];
  }
  mt /= n;
  mx /= n;
  double stt = 0.0, stx = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    stt += (t[k] - mt) * (t[k] - mt);
    stx += (t[k] - mt) * (x[k] - mx);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  if (stt == 0.0) throw DomainError("wave_speed_regression: all times coincide");
  Regression reg;
  reg.slope = stx / stt;
  reg.intercept = mx - reg.slope * mt;
  reg.r2 = sxx == 0.0 ? 1.0 : (stx * stx) / (stt * sxx);
  return reg;
}

std::vector<ParamRange> default_wave_ranges() {
  return {{"D1", 20.0, 50.0},   {"D2", 0.0, 20.0},      {"K", 1e6, 1e7},     {"eps", 5.0, 2000.0},
          {"r", 0.05, 0.95},    {"mu", 0.05, 0.95},     {"gamma", 0.001, 0.95}, {"M1", 0.1, 1.0},
          {"M2", 0.1, 1.0},     {"alpha", 1e7, 1e8},    {"A1", 2e5, 8e5},    {"A2", 0.05, 0.5},
          {"n1", 1.0, 5.0},     {"n2", 1.0, 5.0}};
}

void WaveConfig::validate() const {
  validate_ranges(ranges);
  for (const ParamRange& pr : ranges) {
    if (pr.name == "N") throw DomainError("wave: N is set by n_flowers, not sampled");
  }
  if (!(n_flowers > 0.0)) throw DomainError("wave: n_flowers must be > 0");
  if (!(b_seed >= 0.0)) throw DomainError("wave: b_seed must be >= 0");
  if (track_points < 2) throw DomainError("wave: track_points must be >= 2");
  if (!(track_start > 0.0 && track_end > track_start && track_end <= integrator.t_end + 1e-9)) {
    throw DomainError("wave: tracking window must satisfy 0 < start < end <= t_end");
  }
  if (!(t_ref > 0.0 && t_ref <= integrator.t_end + 1e-9)) throw DomainError("wave: t_ref outside (0, t_end]");
  if (!(t_cmp_lo <= t_cmp_hi && t_cmp_lo > 0.0 && t_cmp_hi <= integrator.t_end + 1e-9)) {
    throw DomainError("wave: t_cmp interval must lie in (0, t_end]");
  }
  if (!(integrator.record_every > 0.0)) throw DomainError("wave: record_every must be > 0");
  const auto [first, last] = record_grid_span(t_cmp_lo, t_cmp_hi, integrator.record_every);
  if (first > last) throw DomainError("wave: no recorded time in the t_cmp interval");
}

StatSummary summarize(std::span<const double> values) {
  if (values.empty()) throw DomainError("summarize: no values");
  StatSummary s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

WaveSample draw_wave_sample(const WaveConfig& cfg, std::uint64_t master_seed, std::size_t index) {
  WaveSample s;
  s.index = index;
  s.seed = derive_seed(master_seed, index);
  std::mt19937_64 rng(s.seed);
  s.params = cfg.base;
  s.params.N = cfg.n_flowers;
  for (const ParamRange& pr : cfg.ranges) param_ref(s.params, pr.name) = uniform_in(rng, pr.lo, pr.hi);

  const auto [first, last] = record_grid_span(cfg.t_cmp_lo, cfg.t_cmp_hi, cfg.integrator.record_every);
  const long count = last - first + 1;
  const long pick = std::min(count - 1, static_cast<long>(unit_uniform(rng) * static_cast<double>(count)));
  s.t_cmp = static_cast<double>(first + pick) * cfg.integrator.record_every;
  s.c_min = min_wave_speed(s.params);
  return s;
}

WaveStats analyze_wave(const Trajectory& traj, const WaveConfig& cfg, double t_cmp) {
  const PeakSeries series = track_peaks(traj, cfg.track_start, cfg.track_end, cfg.track_points);
  if (series.any_degenerate) throw DomainError("no infected peak inside the tracking window");
  const std::optional<double> p = pearson(series.times, series.locations);
  if (!p) throw DomainError("Pearson coefficient undefined: the peak did not move");
  const Regression reg = wave_speed_regression(series);
  const ShapeDiff shape = shape_diff_local_l2(traj, cfg.t_ref, t_cmp, cfg.max_halfwidth);

  WaveStats st;
  st.pearson = *p;
  st.l2_shape_diff = shape.l2;
  st.neighborhood_cells = shape.neighborhood_cells;
  st.neighborhood_truncated = shape.truncated;
  st.speed = reg.slope;
  st.speed_minus_cmin = reg.slope - min_wave_speed(traj.params);
  st.regression_r2 = reg.r2;
  return st;
}

void evaluate_wave_sample(const WaveConfig& cfg, WaveSample& sample) {
  const double every = cfg.integrator.record_every;
  std::vector<double> times;
  for (double t : equally_spaced(cfg.track_start, cfg.track_end, cfg.track_points)) {
    times.push_back(snap_to_grid(t, every));
  }
  times.push_back(snap_to_grid(cfg.t_ref, every));
  times.push_back(sample.t_cmp);
  try {
    const FieldState state0 = standard_initial_condition(cfg.grid, sample.params, cfg.b_seed);
    const Trajectory traj = integrate_at(state0, sample.params, cfg.grid, cfg.integrator, times);
    sample.stats = analyze_wave(traj, cfg, sample.t_cmp);
    sample.ok = true;
    sample.error.clear();
  } catch (const std::exception& e) {
    sample.ok = false;
    sample.error = e.what();
  }
}

WaveExperimentResult wave_experiment(std::size_t n_samples, std::uint64_t seed, const WaveConfig& cfg,
                                     unsigned threads, const std::function<void(const WaveSample&)>& progress) {
  cfg.validate();
  WaveExperimentResult res;
  res.samples.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) res.samples.push_back(draw_wave_sample(cfg, seed, k));

  std::mutex progress_mutex;
  parallel_for(n_samples, threads, [&](std::size_t k) {
    evaluate_wave_sample(cfg, res.samples[k]);
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(res.samples[k]);
    }
  });

  std::vector<double> ps, ls, ds;
  for (const WaveSample& s : res.samples) {
    if (!s.ok) {
      ++res.n_failed;
      continue;
    }
    ++res.n_ok;
    ps.push_back(s.stats.pearson);
    ls.push_back(s.stats.l2_shape_diff);
    ds.push_back(s.stats.speed_minus_cmin);
  }
  if (res.n_ok > 0) {
    res.pearson = summarize(ps);
    res.l2_shape_diff = summarize(ls);
    res.speed_minus_cmin = summarize(ds);
  }
  return res;
}

}  // namespace blight
