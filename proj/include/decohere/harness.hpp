#pragma once

// Scenario configuration, trajectory persistence, decay-shape fitting and the
// analytic validation battery behind the command-line tool.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "decohere/core.hpp"
#include "decohere/dynamics.hpp"
#include "decohere/measures.hpp"
#include "decohere/qspace.hpp"
#include "decohere/states.hpp"

namespace decohere::harness {

using dynamics::TrajectoryRecord;

// ---------------------------------------------------------------------------
// configuration

// Environment level list: an evenly spaced range over env_dim levels, or explicit values.
struct EnvSpectrum {
  bool is_range = true;
  double lo = 190.0;
  double hi = 410.0;
  std::vector<double> values;

  std::vector<double> resolve(std::size_t n) const {
    if (is_range) return dynamics::linspace(lo, hi, n);
    if (values.size() != n)
      throw ValidationError("env_energies lists " + std::to_string(values.size()) + " levels but env_dim is " +
                            std::to_string(n));
    return values;
  }
  bool operator==(const EnvSpectrum&) const = default;
};

struct ScenarioConfig {
  std::string scenario = "custom";
  std::size_t system_dim = 2;
  std::vector<std::size_t> sector_dims{7, 8};
  std::size_t env_dim = 60;
  std::vector<double> h_s{0.5e-6, 0.5e-6, 0.5e-6, 0.5e-6};  // row-major, real symmetric
  std::vector<double> sector_energies{200.0, 400.0};
  EnvSpectrum env_energies;
  std::string coupling = "random";  // random | nondemolition
  double lambda = 0.005;
  std::vector<double> amplitudes{0.70710678118654757, 0.70710678118654757};
  std::vector<double> amplitude_phases{0.0, 0.0};
  std::string weights = "uniform";  // uniform | ramp | geometric:<ratio> | explicit
  std::vector<std::vector<double>> explicit_weights;  // weights_<k> keys
  double dt = 5.0;
  std::size_t steps = 500;
  std::size_t record_every = 5;
  std::string bath = "finite";  // finite | renewed
  std::size_t renew_every = 1;
  double stop_below = 0.01;
  std::uint64_t seed = 1;
  std::uint64_t env_seed = 2;
  std::string out = "trajectory.csv";

  bool operator==(const ScenarioConfig&) const = default;
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig1", "fig2", "fig3", "fig4a", "fig4b", "fig5", "custom"};
  return names;
}

inline ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  c.scenario = name;
  c.out = name + ".csv";
  if (name == "fig1" || name == "custom") return c;
  if (name == "fig2") {
    c.bath = "renewed";
    c.dt = 400.0;
    c.steps = 150;
    c.record_every = 1;
    return c;
  }
  if (name == "fig3" || name == "fig4a") {
    c.weights = "ramp";
    c.steps = 2000;
    c.record_every = 20;
    c.stop_below = 0.0;
    return c;
  }
  if (name == "fig4b") {
    c.coupling = "nondemolition";
    c.lambda = 1e-4;
    c.weights = "geometric:0.3";
    c.steps = 4000;
    c.record_every = 40;
    c.stop_below = 0.0;
    return c;
  }
  if (name == "fig5") {
    c.steps = 4000;
    c.record_every = 20;
    c.stop_below = 0.0;
    return c;
  }
  throw ValidationError("unknown scenario '" + name + "'");
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline double to_double(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != s.size() || s.empty()) throw ValidationError(key + ": '" + s + "' is not a number");
  return v;
}

inline std::uint64_t to_uint(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != s.size() || s.empty()) throw ValidationError(key + ": '" + s + "' is not a non-negative integer");
  return v;
}

inline std::vector<double> to_doubles(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(to_double(key, item));
  return out;
}

inline std::vector<std::size_t> to_sizes(const std::string& key, const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& item : split(s, ',')) out.push_back(static_cast<std::size_t>(to_uint(key, item)));
  return out;
}

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>)
      s += fmt(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace detail

inline void set_key(ScenarioConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "scenario") c.scenario = value;
  else if (key == "system_dim") c.system_dim = to_uint(key, value);
  else if (key == "sector_dims") c.sector_dims = to_sizes(key, value);
  else if (key == "env_dim") c.env_dim = to_uint(key, value);
  else if (key == "h_s") c.h_s = to_doubles(key, value);
  else if (key == "sector_energies") c.sector_energies = to_doubles(key, value);
  else if (key == "env_energies") {
    if (value.rfind("linspace:", 0) == 0) {
      const auto parts = split(value.substr(9), ':');
      if (parts.size() != 2) throw ValidationError("env_energies: expected linspace:<lo>:<hi>");
      c.env_energies = {true, to_double(key, parts[0]), to_double(key, parts[1]), {}};
    } else {
      c.env_energies = {false, 0.0, 0.0, to_doubles(key, value)};
    }
  } else if (key == "coupling") {
    if (value != "random" && value != "nondemolition")
      throw ValidationError("coupling must be 'random' or 'nondemolition'");
    c.coupling = value;
  } else if (key == "lambda") c.lambda = to_double(key, value);
  else if (key == "amplitudes") c.amplitudes = to_doubles(key, value);
  else if (key == "amplitude_phases") c.amplitude_phases = to_doubles(key, value);
  else if (key == "weights") c.weights = value;
  else if (key.rfind("weights_", 0) == 0) {
    const auto k = static_cast<std::size_t>(to_uint(key, key.substr(8)));
    if (c.explicit_weights.size() <= k) c.explicit_weights.resize(k + 1);
    c.explicit_weights[k] = to_doubles(key, value);
  } else if (key == "dt") c.dt = to_double(key, value);
  else if (key == "steps") c.steps = to_uint(key, value);
  else if (key == "record_every") c.record_every = to_uint(key, value);
  else if (key == "bath") {
    if (value != "finite" && value != "renewed") throw ValidationError("bath must be 'finite' or 'renewed'");
    c.bath = value;
  } else if (key == "renew_every") c.renew_every = to_uint(key, value);
  else if (key == "stop_below") c.stop_below = to_double(key, value);
  else if (key == "seed") c.seed = to_uint(key, value);
  else if (key == "env_seed") c.env_seed = to_uint(key, value);
  else if (key == "out") c.out = value;
  else throw ValidationError("unknown config key '" + key + "'");
}

// Applies `key = value` lines (with '#' comments) on top of `base`.
inline ScenarioConfig parse_config(const std::string& text, ScenarioConfig base = {}) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    set_key(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return base;
}

inline ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

inline std::string serialize_config(const ScenarioConfig& c) {
  using detail::fmt;
  using detail::join;
  std::ostringstream o;
  o << "scenario = " << c.scenario << "\n"
    << "system_dim = " << c.system_dim << "\n"
    << "sector_dims = " << join(c.sector_dims) << "\n"
    << "env_dim = " << c.env_dim << "\n"
    << "h_s = " << join(c.h_s) << "\n"
    << "sector_energies = " << join(c.sector_energies) << "\n";
  if (c.env_energies.is_range)
    o << "env_energies = linspace:" << fmt(c.env_energies.lo) << ":" << fmt(c.env_energies.hi) << "\n";
  else
    o << "env_energies = " << join(c.env_energies.values) << "\n";
  o << "coupling = " << c.coupling << "\n"
    << "lambda = " << fmt(c.lambda) << "\n"
    << "amplitudes = " << join(c.amplitudes) << "\n"
    << "amplitude_phases = " << join(c.amplitude_phases) << "\n"
    << "weights = " << c.weights << "\n";
  for (std::size_t k = 0; k < c.explicit_weights.size(); ++k)
    o << "weights_" << k << " = " << join(c.explicit_weights[k]) << "\n";
  o << "dt = " << fmt(c.dt) << "\n"
    << "steps = " << c.steps << "\n"
    << "record_every = " << c.record_every << "\n"
    << "bath = " << c.bath << "\n"
    << "renew_every = " << c.renew_every << "\n"
    << "stop_below = " << fmt(c.stop_below) << "\n"
    << "seed = " << c.seed << "\n"
    << "env_seed = " << c.env_seed << "\n"
    << "out = " << c.out << "\n";
  return o.str();
}

inline states::WeightVector sector_weights(const ScenarioConfig& c, std::size_t k) {
  const std::size_t n = c.sector_dims.at(k);
  if (c.weights == "uniform") return states::uniform_weights(n);
  if (c.weights == "ramp") return states::ramp_weights(n);
  if (c.weights.rfind("geometric:", 0) == 0)
    return states::geometric_weights(n, detail::to_double("weights", c.weights.substr(10)));
  if (c.weights == "explicit") {
    if (k >= c.explicit_weights.size() || c.explicit_weights[k].size() != n)
      throw ValidationError("weights_" + std::to_string(k) + " must list " + std::to_string(n) + " values");
    return states::WeightVector(c.explicit_weights[k]);
  }
  throw ValidationError("unknown weight profile '" + c.weights + "'");
}

inline states::PureMixedParams make_params(const ScenarioConfig& c) {
  if (c.sector_dims.size() != c.system_dim)
    throw ValidationError("sector_dims must list one dimension per system level");
  if (c.amplitudes.size() != c.system_dim || c.amplitude_phases.size() != c.system_dim)
    throw ValidationError("amplitudes and amplitude_phases need one entry per system level");
  std::vector<Complex> amps;
  std::vector<states::WeightVector> ws;
  for (std::size_t k = 0; k < c.system_dim; ++k) {
    amps.push_back(std::polar(c.amplitudes[k], c.amplitude_phases[k]));
    ws.push_back(sector_weights(c, k));
  }
  return {std::move(amps), std::move(ws)};
}

inline dynamics::HamiltonianSpec make_spec(const ScenarioConfig& c) {
  const auto ds = static_cast<Index>(c.system_dim);
  if (c.h_s.size() != c.system_dim * c.system_dim)
    throw ValidationError("h_s must list system_dim^2 entries");
  dynamics::HamiltonianSpec spec;
  spec.h_s = CMatrix(ds, ds);
  for (Index i = 0; i < ds; ++i)
    for (Index j = 0; j < ds; ++j) spec.h_s(i, j) = c.h_s[static_cast<std::size_t>(i * ds + j)];
  spec.sector_energies = c.sector_energies;
  spec.env_energies = c.env_energies.resolve(c.env_dim);
  spec.coupling = c.coupling == "nondemolition" ? dynamics::Coupling::NonDemolition : dynamics::Coupling::RandomHermitian;
  spec.lambda = c.lambda;
  spec.seed = c.seed;
  return spec;
}

inline dynamics::EvolveOptions make_options(const ScenarioConfig& c) {
  dynamics::EvolveOptions o;
  o.dt = c.dt;
  o.n_steps = c.steps;
  o.record_every = c.record_every;
  if (c.bath == "renewed")
    o.bath = dynamics::RenewedBath{c.renew_every};
  else
    o.bath = dynamics::FiniteBath{};
  o.env_seed = c.env_seed;
  o.stop_below = c.stop_below;
  if (c.env_dim < 1) throw ValidationError("env_dim must be at least 1");
  if (!(c.stop_below >= 0.0 && c.stop_below < 1.0)) throw ValidationError("stop_below must lie in [0, 1)");
  return o;
}

// ---------------------------------------------------------------------------
// trajectory files

inline constexpr const char* kCsvHeader =
    "t,q_d,q_r,s_rel_star,s_rel_zero,bures_star,bures_zero,min_pt_eig,neg_count,trace_err,herm_err";

inline std::string format_csv(const std::vector<TrajectoryRecord>& records) {
  using detail::fmt;
  std::string s = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) {
    s += fmt(r.t) + ',' + fmt(r.q_d) + ',' + fmt(r.q_r) + ',' + fmt(r.s_rel_star) + ',' + fmt(r.s_rel_zero) + ',' +
         fmt(r.bures_star) + ',' + fmt(r.bures_zero) + ',' + fmt(r.min_pt_eig) + ',' + std::to_string(r.neg_count) +
         ',' + fmt(r.trace_err) + ',' + fmt(r.herm_err) + '\n';
  }
  return s;
}

inline std::vector<TrajectoryRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kCsvHeader)
    throw ValidationError("trajectory CSV header does not match the schema");
  std::vector<TrajectoryRecord> out;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 11) throw ValidationError("trajectory CSV row has " + std::to_string(f.size()) + " fields");
    auto d = [&](std::size_t i) { return detail::to_double("csv", f[i]); };
    TrajectoryRecord r;
    r.t = d(0);
    r.q_d = d(1);
    r.q_r = d(2);
    r.s_rel_star = d(3);
    r.s_rel_zero = d(4);
    r.bures_star = d(5);
    r.bures_zero = d(6);
    r.min_pt_eig = d(7);
    r.neg_count = static_cast<std::size_t>(detail::to_uint("csv", f[8]));
    r.trace_err = d(9);
    r.herm_err = d(10);
    out.push_back(r);
  }
  return out;
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
    if (!o) throw ValidationError("cannot write " + tmp.string());
    o << content;
    if (!o.flush()) throw ValidationError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<TrajectoryRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

// ---------------------------------------------------------------------------
// decay fits

enum class Verdict { Exponential, Gaussian, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Exponential: return "Exponential";
    case Verdict::Gaussian: return "Gaussian";
    default: return "Inconclusive";
  }
}

struct DecayFit {
  double exp_rate = 0.0;    // value ~ exp(-exp_rate t)
  double exp_r2 = 0.0;
  double gauss_rate = 0.0;  // value ~ exp(-gauss_rate t^2)
  double gauss_r2 = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::size_t points = 0;
  std::string diagnostics;
};

inline constexpr std::size_t kMinFitPoints = 10;
inline constexpr double kVerdictGap = 0.02;

namespace detail {
struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  if (sxx <= 0.0) return f;
  f.slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (my + f.slope * (x[i] - mx));
    ss_res += e * e;
  }
  f.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 0.0;
  return f;
}
}  // namespace detail

// Fits ln(value) against t and t^2 over the window that ends where the series
// first drops below 1% of its initial value.
inline DecayFit fit_decay(const std::vector<std::pair<double, double>>& series) {
  DecayFit fit;
  if (series.empty()) {
    fit.diagnostics = "empty series";
    return fit;
  }
  const double v0 = series.front().second;
  std::vector<double> t, t2, y;
  for (const auto& [ti, vi] : series) {
    if (vi < 0.01 * v0) break;
    if (!(vi > 0.0)) {
      fit.diagnostics = "non-positive value at t=" + detail::fmt(ti);
      return fit;
    }
    t.push_back(ti);
    t2.push_back(ti * ti);
    y.push_back(std::log(vi));
  }
  fit.points = t.size();
  if (t.size() < kMinFitPoints) {
    fit.diagnostics = "only " + std::to_string(t.size()) + " points in the fit window";
    return fit;
  }
  const auto e = detail::least_squares(t, y);
  const auto g = detail::least_squares(t2, y);
  fit.exp_rate = -e.slope;
  fit.exp_r2 = e.r2;
  fit.gauss_rate = -g.slope;
  fit.gauss_r2 = g.r2;
  if (fit.exp_r2 - fit.gauss_r2 > kVerdictGap)
    fit.verdict = Verdict::Exponential;
  else if (fit.gauss_r2 - fit.exp_r2 > kVerdictGap)
    fit.verdict = Verdict::Gaussian;
  else
    fit.diagnostics = "r^2 gap below " + detail::fmt(kVerdictGap);
  return fit;
}

inline std::vector<std::pair<double, double>> q_d_series(const std::vector<TrajectoryRecord>& records) {
  std::vector<std::pair<double, double>> s;
  for (const auto& r : records) s.emplace_back(r.t, r.q_d);
  return s;
}

// ---------------------------------------------------------------------------
// scenario runs

inline nlohmann::json to_json(const TrajectoryRecord& r) {
  return {{"t", r.t},
          {"q_d", r.q_d},
          {"q_r", r.q_r},
          {"s_rel_star", r.s_rel_star},
          {"s_rel_zero", r.s_rel_zero},
          {"bures_star", r.bures_star},
          {"bures_zero", r.bures_zero},
          {"min_pt_eig", r.min_pt_eig},
          {"neg_count", r.neg_count},
          {"trace_err", r.trace_err},
          {"herm_err", r.herm_err}};
}

inline nlohmann::json to_json(const DecayFit& f) {
  return {{"exp_rate", f.exp_rate}, {"exp_r2", f.exp_r2},         {"gauss_rate", f.gauss_rate},
          {"gauss_r2", f.gauss_r2}, {"verdict", to_string(f.verdict)}, {"points", f.points},
          {"diagnostics", f.diagnostics}};
}

struct RunResult {
  dynamics::Trajectory trajectory;
  DecayFit fit;
  double wall_seconds = 0.0;
  nlohmann::json summary;
};

inline std::filesystem::path summary_path(const std::filesystem::path& csv) {
  auto p = csv;
  return p.replace_extension(".json");
}

// Runs the scenario; writes <out> and its .json summary unless `out` is empty.
inline RunResult run_scenario(const ScenarioConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const auto params = make_params(c);
  const auto spec = make_spec(c);
  const auto opts = make_options(c);

  RunResult res;
  res.trajectory = dynamics::evolve(params, spec, opts);
  res.fit = fit_decay(q_d_series(res.trajectory.records));
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto& layout = params.layout();
  const auto initial_rho = states::build_pure_mixed(params);
  const qspace::DensityMatrix final_rho(res.trajectory.final_state,
                                        {.hermiticity = 1e-6, .trace = 1e-6, .positivity = 1e-10});
  nlohmann::json cfg;
  for (const auto& line : detail::split(serialize_config(c), '\n')) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    cfg[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  res.summary = {
      {"scenario", c.scenario},
      {"config", cfg},
      {"seeds", {{"matrix", c.seed}, {"environment", c.env_seed}}},
      {"initial", to_json(res.trajectory.records.front())},
      {"final", to_json(res.trajectory.records.back())},
      {"q_r_weighted",
       {{"initial", measures::q_relaxation_weighted(initial_rho, layout, params.amplitudes())},
        {"final", measures::q_relaxation_weighted(final_rho, layout, params.amplitudes())}}},
      {"q_d_fit", to_json(res.fit)},
      {"ensemble_rank", res.trajectory.initial_rank},
      {"records", res.trajectory.records.size()},
      {"wall_seconds", res.wall_seconds},
  };

  if (!c.out.empty()) {
    const std::filesystem::path out(c.out);
    write_atomic(out, format_csv(res.trajectory.records));
    write_atomic(summary_path(out), res.summary.dump(2) + "\n");
  }
  return res;
}

// ---------------------------------------------------------------------------
// analytic validation battery

// Weights i.i.d. uniform(0.05, 1) then normalized; |c_1|^2 in [0.05, 0.95] for
// two sectors (Dirichlet-like otherwise); random phases.
template <class Engine>
states::PureMixedParams random_params(Engine& eng, std::size_t sectors, std::size_t max_dim, bool uniform,
                                      bool equal_amplitudes = false) {
  std::uniform_int_distribution<std::size_t> dim(1, max_dim);
  std::uniform_real_distribution<double> w(0.05, 1.0), phase(0.0, 2.0 * std::numbers::pi);
  std::vector<states::WeightVector> ws;
  for (std::size_t k = 0; k < sectors; ++k) {
    const std::size_t n = dim(eng);
    if (uniform) {
      ws.push_back(states::uniform_weights(n));
      continue;
    }
    std::vector<double> v(n);
    double sum = 0.0;
    for (double& x : v) sum += (x = w(eng));
    for (double& x : v) x /= sum;
    ws.emplace_back(std::move(v));
  }
  std::vector<double> probs(sectors);
  if (equal_amplitudes) {
    probs.assign(sectors, 1.0 / static_cast<double>(sectors));
  } else if (sectors == 2) {
    probs[0] = std::uniform_real_distribution<double>(0.05, 0.95)(eng);
    probs[1] = 1.0 - probs[0];
  } else {
    double sum = 0.0;
    for (double& p : probs) sum += (p = w(eng));
    for (double& p : probs) p /= sum;
  }
  std::vector<Complex> amps;
  for (double p : probs) amps.push_back(std::polar(std::sqrt(p), equal_amplitudes ? 0.0 : phase(eng)));
  return {std::move(amps), std::move(ws)};
}

template <class Engine>
CVector random_unit(std::size_t n, Engine& eng) {
  return dynamics::haar_state(n, eng);
}

// s(rho|rho*) for uniform weights and two sectors.
inline double solvable_relative_entropy(double a, std::size_t n1, std::size_t n2) {
  const double b = 1.0 - a, d1 = static_cast<double>(n1), d2 = static_cast<double>(n2);
  return (a / d1) * std::log(1.0 + b * d1 / (a * d2)) + (b / d2) * std::log(1.0 + a * d2 / (b * d1));
}

inline double classical_part(const std::vector<Complex>& amps) {
  double s = 0.0;
  for (const auto& c : amps)
    if (std::norm(c) > 0.0) s -= std::norm(c) * std::log(std::norm(c));
  return s;
}

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return !checks.empty();
  }
  std::string table() const {
    std::string s;
    for (const auto& c : checks) s += std::string(c.passed ? "PASS  " : "FAIL  ") + c.name + "  " + c.detail + "\n";
    return s;
  }
};

struct ValidateOptions {
  std::uint64_t seed = 0;
  std::size_t samples = 20;
  double inject_perturbation = 0.0;  // added to one system-off-diagonal entry of rho*
};

inline ValidationReport validate_suite(const ValidateOptions& opt = {}) {
  ValidationReport report;
  std::mt19937_64 eng(opt.seed);
  auto add = [&](std::string name, double worst, double tol) {
    report.checks.push_back({std::move(name), worst <= tol, "worst " + detail::fmt(worst) + " (tol " + detail::fmt(tol) + ")"});
  };

  {  // rank N1 + N2 - 1 and the uniform closed form
    double bad_rank = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < opt.samples; ++i) {
      const auto p = random_params(eng, 2, 12, i % 2 == 0);
      const RVector ev = qspace::eigvalsh(states::build_pure_mixed(p).matrix());
      const auto an = states::analytic_spectrum(p);
      if (static_cast<std::size_t>((ev.array() > 1e-10).count()) != an.nonzero_count) bad_rank += 1.0;
      if (an.closed_form())
        for (Index j = 0; j < ev.size(); ++j) worst = std::max(worst, std::abs(ev(j) - an.values[static_cast<std::size_t>(j)]));
    }
    add("spectrum_rank", bad_rank, 0.0);
    add("spectrum_uniform_closed_form", worst, 1e-10);
  }

  {  // PT spectra, two and three sectors
    for (std::size_t K : {2u, 3u}) {
      double worst = 0.0, bad_count = 0.0;
      for (std::size_t i = 0; i < opt.samples; ++i) {
        const auto p = random_params(eng, K, K == 2 ? 12 : 6, false);
        const auto rho = states::build_pure_mixed(p);
        const RVector ev = qspace::eigvalsh(qspace::partial_transpose(rho, p.layout()));
        const auto an = states::analytic_pt_spectrum(p);
        for (Index j = 0; j < ev.size(); ++j) worst = std::max(worst, std::abs(ev(j) - an[static_cast<std::size_t>(j)]));
        const std::size_t expected = K * (K - 1) / 2;
        if (static_cast<std::size_t>((ev.array() < -1e-10).count()) != expected) bad_count += 1.0;
      }
      add("pt_spectrum_k" + std::to_string(K), worst, 1e-10);
      add("pt_negative_count_k" + std::to_string(K), bad_count, 0.0);
    }
  }

  {  // rho* carries no system coherence
    double worst = 0.0;
    for (std::size_t i = 0; i < opt.samples; ++i) {
      const auto p = random_params(eng, 2, 12, false);
      CMatrix star = states::build_nearest_separable(p).matrix();
      if (opt.inject_perturbation != 0.0) {
        const auto j0 = static_cast<Index>(p.layout().sa_index(1, 1, 0));
        star(0, j0) += opt.inject_perturbation;
        star(j0, 0) += opt.inject_perturbation;
      }
      const qspace::DensityMatrix s(star, {.hermiticity = 1e-10, .trace = 1e-10, .positivity = 1.0});
      worst = std::max(worst, measures::q_decoherence(s, p.layout()));
    }
    add("nearest_separable_q_d", worst, 1e-20);
  }

  {  // purification reduces to rho
    double worst = 0.0;
    for (std::size_t i = 0; i < opt.samples; ++i) {
      const auto p = random_params(eng, 2, 6, false);
      const CVector psi = states::purify(p);
      const CMatrix red = qspace::reduce_trailing(psi, p.layout().sa_dim(), p.weights(0).size() * p.weights(1).size());
      worst = std::max(worst, (red - states::build_pure_mixed(p).matrix()).cwiseAbs().maxCoeff());
    }
    add("purification_reduces_to_rho", worst, 1e-12);
  }

  {  // solvable relative entropy and classical part
    double worst_rel = 0.0, worst_cls = 0.0;
    const double h = std::sqrt(0.5);
    std::vector<std::pair<std::size_t, std::size_t>> dims;
    for (std::size_t n : {1u, 2u, 4u, 8u, 16u}) dims.emplace_back(n, n);
    dims.emplace_back(7, 8);
    for (const auto& [n1, n2] : dims) {
      const states::PureMixedParams p({Complex(h), Complex(h)}, {states::uniform_weights(n1), states::uniform_weights(n2)});
      const auto rho = states::build_pure_mixed(p);
      const auto split = measures::correlation_split(rho, p.layout());
      worst_rel = std::max(worst_rel, std::abs(split.quantum - solvable_relative_entropy(0.5, n1, n2)));
      worst_cls = std::max(worst_cls, std::abs(split.classical - classical_part(p.amplitudes())));
    }
    add("solvable_relative_entropy", worst_rel, 1e-9);
    add("classical_correlation_part", worst_cls, 1e-9);
  }

  {  // nearest-separable certificate: directional derivative non-negative
    double worst = 0.0;
    for (std::size_t i = 0; i < std::max<std::size_t>(opt.samples / 4, 2); ++i) {
      const auto p = random_params(eng, 2, 6, i % 3 == 0, i % 2 == 0);
      for (int j = 0; j < 10; ++j) {
        const measures::ProductState sigma{random_unit(2, eng), random_unit(p.layout().apparatus_dim(), eng)};
        worst = std::max(worst, -measures::nearest_separable_derivative(p, sigma));
      }
    }
    add("nearest_separable_derivative", worst, 1e-6);
  }
  return report;
}

}  // namespace decohere::harness
