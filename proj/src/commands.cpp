#include "blight/commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

#include "blight/errors.hpp"
#include "blight/output.hpp"

namespace blight {

namespace fs = std::filesystem;

namespace {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

// Writes to a temporary name first so a failed run never leaves a
// half-written file under the final name.
void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  const fs::path tmp = path.string() + ".part";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    body(f);
    f.flush();
    if (!f) throw IoError("write failed for '" + path.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "'");
}

OutputMeta meta_for(const RunConfig& cfg, const char* command) {
  return {command, cfg.seed, config_hash(cfg)};
}

// Shared error mapping for all commands.
int guarded(std::ostream& err, const char* name, const std::function<int()>& body) {
  try {
    return body();
  } catch (const DomainError& e) {
    err << name << ": invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << name << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    // ExperimentAborted, InstabilityError, BlowUpError and anything else.
    err << name << ": aborted: " << e.what() << "\n";
    return kExitAborted;
  }
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, "simulate", [&] {
    cfg.validate();
    const ModelParams params = cfg.params();
    const Grid grid(cfg.grid.length, cfg.grid.n_cells);
    const FieldState state0 = standard_initial_condition(grid, params, cfg.b_seed);
    const Trajectory traj = integrate(state0, params, grid, cfg.integrator);

    // Resolve snapshot times before writing anything.
    std::vector<const FieldState*> picks;
    for (double t : cfg.snapshots) {
      const FieldState& s = traj.nearest(t);
      if (std::abs(s.t - t) > 1e-9 * std::max(1.0, t)) {
        throw DomainError("snapshot time " + format_double(t) + " is not a multiple of record_every");
      }
      picks.push_back(&s);
    }

    const fs::path dir = prepare_dir(opt.out_dir);
    const OutputMeta meta = meta_for(cfg, "simulate");
    write_file(dir / "trajectory.csv", [&](std::ostream& f) { write_trajectory_csv(f, traj, meta); });
    out << "wrote " << (dir / "trajectory.csv").string() << " (" << traj.snapshots.size() << " snapshots)\n";
    for (const FieldState* s : picks) {
      const fs::path file = dir / ("snapshot_t" + format_double(s->t) + ".svg");
      write_file(file, [&](std::ostream& f) { write_snapshot_svg(f, *s, grid, params.N, meta); });
      const Peak p = peak_location(s->i, grid);
      out << "t=" << format_double(s->t) << " I peak at x=" << format_double(p.location) << " m"
          << (p.degenerate ? " (flat field)" : "") << " -> " << file.string() << "\n";
    }
    return kExitOk;
  });
}

int cmd_wave(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, "wave", [&] {
    cfg.validate();
    const WaveConfig wc = cfg.wave_config();
    wc.validate();
    const fs::path dir = prepare_dir(opt.out_dir);

    std::function<void(const WaveSample&)> progress;
    if (opt.progress) {
      progress = [&err](const WaveSample& s) {
        err << "sample " << s.index << (s.ok ? " ok" : " failed") << "\n";
      };
    }
    const WaveExperimentResult res = wave_experiment(cfg.wave_samples, cfg.seed, wc, opt.threads, progress);

    const OutputMeta meta = meta_for(cfg, "wave");
    write_file(dir / "wave_samples.csv", [&](std::ostream& f) { write_wave_samples_csv(f, res, meta); });
    write_file(dir / "wave_summary.csv", [&](std::ostream& f) { write_wave_summary_csv(f, res, meta); });

    for (const WaveSample& s : res.samples) {
      if (!s.ok) err << "warning: sample " << s.index << " failed: " << s.error << "\n";
    }
    out << res.n_ok << " of " << res.samples.size() << " samples succeeded\n";
    if (res.pearson) {
      out << "pearson      min " << format_double(res.pearson->min) << "  mean " << format_double(res.pearson->mean)
          << "\n";
      out << "local L2     max " << format_double(res.l2_shape_diff->max) << "  mean "
          << format_double(res.l2_shape_diff->mean) << "\n";
      out << "speed - cmin min " << format_double(res.speed_minus_cmin->min) << "  max "
          << format_double(res.speed_minus_cmin->max) << "  mean " << format_double(res.speed_minus_cmin->mean)
          << "\n";
    }
    return kExitOk;
  });
}

int cmd_sobol(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, "sobol", [&] {
    cfg.validate();
    const SensitivityConfig sc = cfg.sensitivity_config();
    sc.validate();
    const fs::path dir = prepare_dir(opt.out_dir);

    std::function<void(std::size_t)> progress;
    const std::size_t total = cfg.sobol_n_base * (sc.factors.size() + 2);
    if (opt.progress) {
      progress = [&err, total](std::size_t done) {
        if (done % 50 == 0 || done == total) err << done << "/" << total << " runs\n";
      };
    }
    const SobolResult res = run_sensitivity(sc, cfg.sobol_n_base, cfg.seed, opt.threads, progress);

    const OutputMeta meta = meta_for(cfg, "sobol");
    write_file(dir / "sobol_indices.csv", [&](std::ostream& f) { write_sobol_csv(f, res, meta); });
    write_file(dir / "sobol_indices.svg", [&](std::ostream& f) { write_sobol_svg(f, res, meta); });

    if (res.degenerate_qoi > 0) {
      err << "warning: " << res.degenerate_qoi << " runs had no infected peak; QoI set to the centre of cell 0\n";
    }
    if (res.degenerate) err << "warning: QoI variance is zero; indices are undefined\n";
    out << res.total_runs() << " model runs\n";
    double sum = 0.0;
    for (std::size_t i = 0; i < res.k; ++i) {
      out << res.factors[i] << "  S=" << format_double(res.first_order[i])
          << "  T=" << format_double(res.total_order[i]) << "\n";
      sum += res.first_order[i];
    }
    out << "sum S=" << format_double(sum) << "\n";
    return kExitOk;
  });
}

int cmd_check(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, "check", [&] {
    cfg.validate();
    const ModelParams p = cfg.params();
    const ConstraintReport rep = check_theorem_constraints(p);
    // Bounds for the standard initial condition: max B0 = b_seed, O0 = 0.
    const BoundConstants bounds = a_priori_bounds(p, cfg.b_seed, 0.0);

    auto yes = [](bool b) { return b ? "yes" : "no"; };
    out << "D2 <= D1                     " << yes(rep.d2_le_d1) << "\n";
    out << "n1 = n2 + 1                  " << yes(rep.exponent_link) << "\n";
    out << "M1 <= g(N)                   " << yes(rep.m1_le_gN) << "\n";
    out << "ooze inequality              " << yes(rep.ooze_inequality) << "\n";
    out << "all satisfied                " << yes(rep.all_satisfied) << "\n";
    out << "minimum wave speed [m/day]   " << format_double(rep.c_min) << "\n";
    out << "B bound [CFU]                " << format_double(bounds.b_max) << "\n";
    out << "O bound [CFU]                " << format_double(bounds.o_max) << "\n";
    out << "S, I, R bound [flowers]      " << format_double(bounds.compartment_max) << "\n";

    const fs::path dir = prepare_dir(opt.out_dir);
    const OutputMeta meta = meta_for(cfg, "check");
    write_file(dir / "check.csv", [&](std::ostream& f) { write_check_csv(f, p, rep, bounds, meta); });
    return kExitOk;
  });
}

int run_command(Experiment which, const RunConfig& cfg, const CommandOptions& opt, std::ostream& out,
                std::ostream& err) {
  switch (which) {
    case Experiment::simulate: return cmd_simulate(cfg, opt, out, err);
    case Experiment::wave: return cmd_wave(cfg, opt, out, err);
    case Experiment::sobol: return cmd_sobol(cfg, opt, out, err);
    case Experiment::check: return cmd_check(cfg, opt, out, err);
  }
  return kExitConfig;
}

}  // namespace blight
