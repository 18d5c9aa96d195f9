#include "blight/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string_view>
#include <vector>

#include "blight/config.hpp"

namespace blight {

namespace {

void csv_meta(std::ostream& out, const OutputMeta& meta) {
  out << "# blight " << meta.command << "\n";
  out << "# seed=" << meta.seed << " config_hash=" << meta.config_hash << "\n";
}

std::string num(double v) { return format_double(v); }

// Fixed two-decimal coordinates keep SVG text stable and compact.
std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Quotes a CSV field when it contains separators or quotes.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void svg_open(std::ostream& out, int w, int h, const OutputMeta& meta) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<!-- blight " << xml_escape(meta.command) << " seed=" << meta.seed << " config_hash=" << meta.config_hash
      << " -->\n";
  out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
}

struct Panel {
  double x0, y0, w, h;
  double xmin, xmax, ymin, ymax;

  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const {
    const double f = std::clamp((y - ymin) / (ymax - ymin), 0.0, 1.0);
    return y0 + h - f * h;
  }
};

void draw_axes(std::ostream& out, const Panel& p, const std::string& ylabel,
               const std::vector<std::pair<double, std::string>>& yticks, bool xlabels) {
  out << "<rect x=\"" << coord(p.x0) << "\" y=\"" << coord(p.y0) << "\" width=\"" << coord(p.w) << "\" height=\""
      << coord(p.h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& [v, label] : yticks) {
    const double y = p.py(v);
    out << "<line x1=\"" << coord(p.x0 - 4) << "\" y1=\"" << coord(y) << "\" x2=\"" << coord(p.x0) << "\" y2=\""
        << coord(y) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << coord(p.x0 - 6) << "\" y=\"" << coord(y + 4) << "\" text-anchor=\"end\">" << label
        << "</text>\n";
  }
  for (int k = 0; k <= 5; ++k) {
    const double xv = p.xmin + (p.xmax - p.xmin) * k / 5.0;
    const double x = p.px(xv);
    out << "<line x1=\"" << coord(x) << "\" y1=\"" << coord(p.y0 + p.h) << "\" x2=\"" << coord(x) << "\" y2=\""
        << coord(p.y0 + p.h + 4) << "\" stroke=\"black\"/>\n";
    if (xlabels) {
      out << "<text x=\"" << coord(x) << "\" y=\"" << coord(p.y0 + p.h + 18) << "\" text-anchor=\"middle\">"
          << num(xv) << "</text>\n";
    }
  }
  out << "<text x=\"" << coord(p.x0 - 48) << "\" y=\"" << coord(p.y0 + p.h / 2) << "\" transform=\"rotate(-90 "
      << coord(p.x0 - 48) << " " << coord(p.y0 + p.h / 2) << ")\" text-anchor=\"middle\">" << ylabel
      << "</text>\n";
}

void polyline(std::ostream& out, const Panel& p, const Grid& grid, const std::vector<double>& v,
              const std::string& colour, bool log_scale) {
  const std::size_t stride = std::max<std::size_t>(1, v.size() / 2000);
  out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t j = 0; j < v.size(); j += stride) {
    const double y = log_scale ? std::log10(std::max(v[j], 1.0)) : v[j];
    if (j) out << ' ';
    out << coord(p.px(grid.center(j))) << ',' << coord(p.py(y));
  }
  out << "\"/>\n";
}

void legend(std::ostream& out, double x, double y, const std::vector<std::pair<std::string, std::string>>& items) {
  for (std::size_t k = 0; k < items.size(); ++k) {
    const double yy = y + 16.0 * static_cast<double>(k);
    out << "<line x1=\"" << coord(x) << "\" y1=\"" << coord(yy) << "\" x2=\"" << coord(x + 20) << "\" y2=\""
        << coord(yy) << "\" stroke=\"" << items[k].second << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << coord(x + 26) << "\" y=\"" << coord(yy + 4) << "\">" << items[k].first << "</text>\n";
  }
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const OutputMeta& meta) {
  csv_meta(out, meta);
  out << "t,x,B,O,S,I,R\n";
  for (const FieldState& s : traj.snapshots) {
    const std::string t = num(s.t);
    for (std::size_t j = 0; j < s.size(); ++j) {
      out << t << ',' << num(traj.grid.center(j)) << ',' << num(s.b[j]) << ',' << num(s.o[j]) << ','
          << num(s.s[j]) << ',' << num(s.i[j]) << ',' << num(s.r[j]) << '\n';
    }
  }
}

void write_snapshot_svg(std::ostream& out, const FieldState& snap, const Grid& grid, double n_flowers,
                        const OutputMeta& meta) {
  constexpr int kW = 820, kH = 620;
  svg_open(out, kW, kH, meta);
  out << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">t = " << num(snap.t)
      << " days</text>\n";

  const double top = std::max(n_flowers, 1e-12);
  const Panel flowers{90, 40, 600, 230, 0.0, grid.length, 0.0, top * 1.05};
  std::vector<std::pair<double, std::string>> fticks;
  for (int k = 0; k <= 5; ++k) fticks.emplace_back(top * k / 5.0, num(std::round(top * k / 5.0 * 100) / 100));
  draw_axes(out, flowers, "flowers", fticks, false);
  polyline(out, flowers, grid, snap.s, "#1f77b4", false);
  polyline(out, flowers, grid, snap.i, "#d62728", false);
  polyline(out, flowers, grid, snap.r, "#7f7f7f", false);
  legend(out, 705, 60, {{"S", "#1f77b4"}, {"I", "#d62728"}, {"R", "#7f7f7f"}});

  double peak = 1.0;
  for (double v : snap.b) peak = std::max(peak, v);
  for (double v : snap.o) peak = std::max(peak, v);
  const double decades = std::max(1.0, std::ceil(std::log10(peak)));
  const Panel pathogen{90, 320, 600, 230, 0.0, grid.length, 0.0, decades};
  std::vector<std::pair<double, std::string>> pticks;
  const int step = std::max(1, static_cast<int>(decades) / 6);
  for (int k = 0; k <= static_cast<int>(decades); k += step) pticks.emplace_back(k, "1e" + std::to_string(k));
  draw_axes(out, pathogen, "CFU (log10)", pticks, true);
  polyline(out, pathogen, grid, snap.b, "#2ca02c", true);
  polyline(out, pathogen, grid, snap.o, "#9467bd", true);
  legend(out, 705, 340, {{"B", "#2ca02c"}, {"O", "#9467bd"}});
  out << "<text x=\"390\" y=\"600\" text-anchor=\"middle\">x (m)</text>\n";
  out << "</svg>\n";
}

void write_wave_samples_csv(std::ostream& out, const WaveExperimentResult& res, const OutputMeta& meta) {
  csv_meta(out, meta);
  out << "# samples=" << res.samples.size() << " ok=" << res.n_ok << " failed=" << res.n_failed << "\n";
  std::vector<std::string> names;
  for (const char* n : param_names()) {
    if (std::string_view(n) != "N") names.emplace_back(n);
  }
  out << "sample,seed";
  for (const auto& n : names) out << ',' << n;
  out << ",N,t_cmp,c_min,pearson,l2_shape_diff,neighborhood_cells,neighborhood_truncated,speed,"
         "speed_minus_cmin,regression_r2,status,error\n";
  for (const WaveSample& s : res.samples) {
    out << s.index << ',' << s.seed;
    for (const auto& n : names) out << ',' << num(param_value(s.params, n));
    out << ',' << num(s.params.N) << ',' << num(s.t_cmp) << ',' << num(s.c_min);
    if (s.ok) {
      out << ',' << num(s.stats.pearson) << ',' << num(s.stats.l2_shape_diff) << ',' << s.stats.neighborhood_cells
          << ',' << (s.stats.neighborhood_truncated ? "true" : "false") << ',' << num(s.stats.speed) << ','
          << num(s.stats.speed_minus_cmin) << ',' << num(s.stats.regression_r2) << ",ok,";
    } else {
      out << ",,,,,,,,failed," << csv_field(s.error);
    }
    out << '\n';
  }
}

void write_wave_summary_csv(std::ostream& out, const WaveExperimentResult& res, const OutputMeta& meta) {
  csv_meta(out, meta);
  out << "# samples=" << res.samples.size() << " ok=" << res.n_ok << " failed=" << res.n_failed << "\n";
  out << "statistic,sample_min,sample_max,sample_mean,std_dev\n";
  auto row = [&out](const char* name, const std::optional<StatSummary>& s) {
    out << name;
    if (s) {
      out << ',' << num(s->min) << ',' << num(s->max) << ',' << num(s->mean) << ',' << num(s->std_dev);
    } else {
      out << ",,,,";
    }
    out << '\n';
  };
  row("pearson", res.pearson);
  row("local_l2", res.l2_shape_diff);
  row("speed_difference", res.speed_minus_cmin);
}

void write_sobol_csv(std::ostream& out, const SobolResult& res, const OutputMeta& meta) {
  csv_meta(out, meta);
  out << "# " << res.total_runs() << " model runs; n_base=" << res.n_base << " k=" << res.k
      << " sampler=" << sampler_name(res.sampler) << " bootstrap=" << res.bootstrap_replicates
      << " variance=" << num(res.variance) << " degenerate_qoi=" << res.degenerate_qoi
      << (res.degenerate ? " degenerate=true" : "") << "\n";
  out << "factor,S,S_ci_low,S_ci_high,T,T_ci_low,T_ci_high,S_se,T_se,T_minus_S_se\n";
  for (std::size_t i = 0; i < res.k; ++i) {
    out << res.factors[i] << ',' << num(res.first_order[i]) << ',' << num(res.first_lo[i]) << ','
        << num(res.first_hi[i]) << ',' << num(res.total_order[i]) << ',' << num(res.total_lo[i]) << ','
        << num(res.total_hi[i]) << ',' << num(res.first_se[i]) << ',' << num(res.total_se[i]) << ','
        << num(res.gap_se[i]) << '\n';
  }
}

void write_sobol_svg(std::ostream& out, const SobolResult& res, const OutputMeta& meta) {
  constexpr int kW = 640, kH = 420;
  svg_open(out, kW, kH, meta);
  double hi = 1.0, lo = 0.0;
  for (std::size_t i = 0; i < res.k; ++i) {
    hi = std::max({hi, res.first_hi[i], res.total_hi[i]});
    lo = std::min({lo, res.first_lo[i], res.total_lo[i]});
  }
  hi = std::ceil(hi * 10.0) / 10.0;
  lo = std::floor(lo * 10.0) / 10.0;
  const Panel p{80, 40, 460, 320, 0.0, static_cast<double>(std::max<std::size_t>(res.k, 1)), lo, hi};
  std::vector<std::pair<double, std::string>> ticks;
  for (double v = lo; v <= hi + 1e-9; v += 0.2) ticks.emplace_back(v, num(std::round(v * 10) / 10));
  out << "<rect x=\"" << coord(p.x0) << "\" y=\"" << coord(p.y0) << "\" width=\"" << coord(p.w) << "\" height=\""
      << coord(p.h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& [v, label] : ticks) {
    out << "<text x=\"" << coord(p.x0 - 6) << "\" y=\"" << coord(p.py(v) + 4) << "\" text-anchor=\"end\">" << label
        << "</text>\n";
  }
  out << "<line x1=\"" << coord(p.x0) << "\" y1=\"" << coord(p.py(0)) << "\" x2=\"" << coord(p.x0 + p.w)
      << "\" y2=\"" << coord(p.py(0)) << "\" stroke=\"black\"/>\n";

  const double slot = p.w / static_cast<double>(std::max<std::size_t>(res.k, 1));
  const double bar = slot * 0.3;
  auto draw_bar = [&](double x, double v, double ci_lo, double ci_hi, const char* colour) {
    const double y_top = p.py(std::max(v, 0.0));
    const double y_bot = p.py(std::min(v, 0.0));
    out << "<rect x=\"" << coord(x) << "\" y=\"" << coord(y_top) << "\" width=\"" << coord(bar)
        << "\" height=\"" << coord(y_bot - y_top) << "\" fill=\"" << colour << "\"/>\n";
    const double cx = x + bar / 2;
    out << "<line x1=\"" << coord(cx) << "\" y1=\"" << coord(p.py(ci_lo)) << "\" x2=\"" << coord(cx)
        << "\" y2=\"" << coord(p.py(ci_hi)) << "\" stroke=\"black\"/>\n";
  };
  for (std::size_t i = 0; i < res.k; ++i) {
    const double left = p.x0 + slot * static_cast<double>(i) + slot * 0.18;
    draw_bar(left, res.first_order[i], res.first_lo[i], res.first_hi[i], "#4c72b0");
    draw_bar(left + bar + slot * 0.04, res.total_order[i], res.total_lo[i], res.total_hi[i], "#dd8452");
    out << "<text x=\"" << coord(p.x0 + slot * (static_cast<double>(i) + 0.5)) << "\" y=\""
        << coord(p.y0 + p.h + 20) << "\" text-anchor=\"middle\">" << xml_escape(res.factors[i]) << "</text>\n";
  }
  legend(out, p.x0 + p.w + 12, p.y0 + 20, {{"S_i", "#4c72b0"}, {"T_i", "#dd8452"}});
  out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 14 << "\" text-anchor=\"middle\">" << res.total_runs()
      << " model runs</text>\n";
  out << "</svg>\n";
}

void write_check_csv(std::ostream& out, const ModelParams& params, const ConstraintReport& rep,
                     const BoundConstants& bounds, const OutputMeta& meta) {
  csv_meta(out, meta);
  out << "quantity,value\n";
  for (const char* n : param_names()) out << n << ',' << num(param_value(params, n)) << '\n';
  auto flag = [](bool b) { return b ? "true" : "false"; };
  out << "d2_le_d1," << flag(rep.d2_le_d1) << '\n';
  out << "exponent_link," << flag(rep.exponent_link) << '\n';
  out << "m1_le_gN," << flag(rep.m1_le_gN) << '\n';
  out << "ooze_inequality," << flag(rep.ooze_inequality) << '\n';
  out << "all_satisfied," << flag(rep.all_satisfied) << '\n';
  out << "c_min," << num(rep.c_min) << '\n';
  out << "b_max," << num(bounds.b_max) << '\n';
  out << "o_max," << num(bounds.o_max) << '\n';
  out << "compartment_max," << num(bounds.compartment_max) << '\n';
}

}  // namespace blight
