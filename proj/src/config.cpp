#include "blight/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "blight/errors.hpp"

namespace blight {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(const std::string& where, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw DomainError("config: " + where + ": '" + text + "' is not a finite number");
  }
  return v;
}

std::uint64_t to_u64(const std::string& where, const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw DomainError("config: " + where + ": '" + text + "' is not a non-negative integer");
  }
  return v;
}

// Reads one section, rejecting keys not in `known`.
class Section {
public:
  Section(const pt::ptree* tree, std::string name, std::set<std::string> known)
      : tree_(tree), name_(std::move(name)) {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!child.empty()) throw DomainError("config: nested key '" + key + "' in [" + name_ + "]");
      if (!known.count(key)) throw DomainError("config: unknown key '" + key + "' in [" + name_ + "]");
    }
  }

  const std::string* raw(const std::string& key) const {
    if (!tree_) return nullptr;
    const auto it = tree_->find(key);
    if (it == tree_->not_found()) return nullptr;
    value_ = trim(it->second.data());
    return &value_;
  }

  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  void get(const std::string& key, double& out) const {
    if (const std::string* s = raw(key)) out = to_double(where(key), *s);
  }
  template <class Unsigned>
    requires std::is_unsigned_v<Unsigned>
  void get(const std::string& key, Unsigned& out) const {
    if (const std::string* s = raw(key)) out = static_cast<Unsigned>(to_u64(where(key), *s));
  }

private:
  const pt::ptree* tree_;
  std::string name_;
  mutable std::string value_;
};

std::vector<ParamRange> read_ranges(const pt::ptree& tree, const std::string& section) {
  std::vector<ParamRange> out;
  for (const auto& [key, child] : tree) {
    if (!child.empty()) throw DomainError("config: nested key '" + key + "' in [" + section + "]");
    const auto parts = split_commas(child.data());
    const std::string where = "[" + section + "] " + key;
    if (parts.size() != 2) throw DomainError("config: " + where + " must be 'lo, hi'");
    out.push_back({key, to_double(where, parts[0]), to_double(where, parts[1])});
  }
  return out;
}

const std::set<std::string> kSections = {"run",   "model",       "grid",  "integrator",   "initial",
                                         "simulate", "wave", "wave_ranges", "sobol", "sobol_factors"};

std::set<std::string> model_keys() {
  std::set<std::string> keys;
  for (const char* name : param_names()) {
    if (std::string_view(name) != "N") keys.insert(name);
  }
  return keys;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ", ";
    s += format_double(v[k]);
  }
  return s;
}

}  // namespace

std::string_view experiment_name(Experiment e) {
  switch (e) {
    case Experiment::simulate: return "simulate";
    case Experiment::wave: return "wave";
    case Experiment::sobol: return "sobol";
    case Experiment::check: return "check";
  }
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  for (Experiment e : {Experiment::simulate, Experiment::wave, Experiment::sobol, Experiment::check}) {
    if (name == experiment_name(e)) return e;
  }
  throw DomainError("unknown experiment '" + std::string(name) + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw DomainError("format_double: conversion failed");
  return std::string(buf, ptr);
}

ModelParams RunConfig::params() const {
  ModelParams p = model;
  p.N = n_flowers;
  return p;
}

WaveConfig RunConfig::wave_config() const {
  WaveConfig w;
  w.grid = grid;
  w.integrator = integrator;
  w.base = params();
  w.n_flowers = n_flowers;
  w.b_seed = b_seed;
  w.ranges = wave_ranges;
  w.track_start = track_start;
  w.track_end = track_end;
  w.track_points = track_points;
  w.t_ref = t_ref;
  w.t_cmp_lo = t_cmp_lo;
  w.t_cmp_hi = t_cmp_hi;
  w.max_halfwidth = max_halfwidth;
  return w;
}

SensitivityConfig RunConfig::sensitivity_config() const {
  SensitivityConfig s;
  s.grid = grid;
  s.integrator = integrator;
  s.base = params();
  s.factors = sobol_factors;
  s.b_seed = b_seed;
  s.t_q = t_q;
  s.sampler = sampler;
  s.bootstrap_replicates = bootstrap;
  return s;
}

void RunConfig::validate() const {
  params().validate();
  (void)Grid(grid.length, grid.n_cells);  // throws on a bad grid
  if (!(integrator.dt > 0.0)) throw DomainError("config: [integrator] dt must be > 0");
  if (!(integrator.t_end > 0.0)) throw DomainError("config: [integrator] t_end must be > 0");
  if (!(integrator.record_every >= integrator.dt)) {
    throw DomainError("config: [integrator] record_every must be >= dt");
  }
  if (!(b_seed >= 0.0)) throw DomainError("config: [initial] b_seed must be >= 0");
  if (experiment == Experiment::simulate) {
    for (double t : snapshots) {
      if (!(t > 0.0 && t <= integrator.t_end)) {
        throw DomainError("config: [simulate] snapshot time " + format_double(t) + " outside (0, t_end]");
      }
    }
  }
  if (wave_samples < 1) throw DomainError("config: [wave] n_samples must be >= 1");
  if (sobol_n_base < 2) throw DomainError("config: [sobol] n_base must be >= 2");
  if (experiment == Experiment::wave) wave_config().validate();
  if (experiment == Experiment::sobol) sensitivity_config().validate();
}

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw DomainError(std::string("config: ") + e.what());
  }

  for (const auto& [name, child] : tree) {
    if (child.empty() && !child.data().empty()) throw DomainError("config: key '" + name + "' outside a section");
    if (!kSections.count(name)) throw DomainError("config: unknown section [" + name + "]");
  }
  auto section = [&](const std::string& name) -> const pt::ptree* {
    const auto it = tree.find(name);
    return it == tree.not_found() ? nullptr : &it->second;
  };

  RunConfig c;
  {
    const Section s(section("run"), "run", {"experiment", "seed"});
    if (const std::string* v = s.raw("experiment")) c.experiment = parse_experiment(*v);
    s.get("seed", c.seed);
  }
  {
    const Section s(section("model"), "model", model_keys());
    for (const std::string& key : model_keys()) s.get(key, param_ref(c.model, key));
  }
  {
    const Section s(section("grid"), "grid", {"length", "n_cells"});
    s.get("length", c.grid.length);
    s.get("n_cells", c.grid.n_cells);
  }
  {
    const Section s(section("integrator"), "integrator", {"method", "dt", "t_end", "record_every"});
    if (const std::string* v = s.raw("method")) c.integrator.method = parse_method(*v);
    s.get("dt", c.integrator.dt);
    s.get("t_end", c.integrator.t_end);
    s.get("record_every", c.integrator.record_every);
  }
  {
    const Section s(section("initial"), "initial", {"b_seed", "N"});
    s.get("b_seed", c.b_seed);
    s.get("N", c.n_flowers);
  }
  {
    const Section s(section("simulate"), "simulate", {"snapshots"});
    if (const std::string* v = s.raw("snapshots")) {
      c.snapshots.clear();
      if (!v->empty()) {
        for (const std::string& part : split_commas(*v)) c.snapshots.push_back(to_double(s.where("snapshots"), part));
      }
    }
  }
  {
    const Section s(section("wave"), "wave",
                    {"n_samples", "track_start", "track_end", "track_points", "t_ref", "t_cmp_lo", "t_cmp_hi",
                     "max_halfwidth"});
    s.get("n_samples", c.wave_samples);
    s.get("track_start", c.track_start);
    s.get("track_end", c.track_end);
    s.get("track_points", c.track_points);
    s.get("t_ref", c.t_ref);
    s.get("t_cmp_lo", c.t_cmp_lo);
    s.get("t_cmp_hi", c.t_cmp_hi);
    s.get("max_halfwidth", c.max_halfwidth);
  }
  if (const pt::ptree* r = section("wave_ranges")) c.wave_ranges = read_ranges(*r, "wave_ranges");
  {
    const Section s(section("sobol"), "sobol", {"n_base", "t_q", "sampler", "bootstrap"});
    s.get("n_base", c.sobol_n_base);
    s.get("t_q", c.t_q);
    if (const std::string* v = s.raw("sampler")) c.sampler = parse_sampler(*v);
    s.get("bootstrap", c.bootstrap);
  }
  if (const pt::ptree* r = section("sobol_factors")) c.sobol_factors = read_ranges(*r, "sobol_factors");
  validate_ranges(c.wave_ranges);
  validate_ranges(c.sobol_factors);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("config: cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string write_config(const RunConfig& c) {
  std::ostringstream o;
  auto kv = [&o](const std::string& k, const std::string& v) { o << k << " = " << v << "\n"; };
  auto ranges = [&](const std::vector<ParamRange>& rs) {
    for (const ParamRange& r : rs) kv(r.name, format_double(r.lo) + ", " + format_double(r.hi));
  };

  o << "[run]\n";
  kv("experiment", std::string(experiment_name(c.experiment)));
  kv("seed", std::to_string(c.seed));
  o << "\n[model]\n";
  for (const char* name : param_names()) {
    if (std::string_view(name) != "N") kv(name, format_double(param_value(c.model, name)));
  }
  o << "\n[grid]\n";
  kv("length", format_double(c.grid.length));
  kv("n_cells", std::to_string(c.grid.n_cells));
  o << "\n[integrator]\n";
  kv("method", std::string(method_name(c.integrator.method)));
  kv("dt", format_double(c.integrator.dt));
  kv("t_end", format_double(c.integrator.t_end));
  kv("record_every", format_double(c.integrator.record_every));
  o << "\n[initial]\n";
  kv("b_seed", format_double(c.b_seed));
  kv("N", format_double(c.n_flowers));
  o << "\n[simulate]\n";
  kv("snapshots", join(c.snapshots));
  o << "\n[wave]\n";
  kv("n_samples", std::to_string(c.wave_samples));
  kv("track_start", format_double(c.track_start));
  kv("track_end", format_double(c.track_end));
  kv("track_points", std::to_string(c.track_points));
  kv("t_ref", format_double(c.t_ref));
  kv("t_cmp_lo", format_double(c.t_cmp_lo));
  kv("t_cmp_hi", format_double(c.t_cmp_hi));
  kv("max_halfwidth", std::to_string(c.max_halfwidth));
  o << "\n[wave_ranges]\n";
  ranges(c.wave_ranges);
  o << "\n[sobol]\n";
  kv("n_base", std::to_string(c.sobol_n_base));
  kv("t_q", format_double(c.t_q));
  kv("sampler", std::string(sampler_name(c.sampler)));
  kv("bootstrap", std::to_string(c.bootstrap));
  o << "\n[sobol_factors]\n";
  ranges(c.sobol_factors);
  return o.str();
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : write_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace blight
