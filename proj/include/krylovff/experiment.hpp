#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "krylovff/correlations.hpp"
#include "krylovff/error.hpp"
#include "krylovff/exact.hpp"
#include "krylovff/io.hpp"
#include "krylovff/krylov.hpp"
#include "krylovff/observables.hpp"
#include "krylovff/pauli.hpp"
#include "krylovff/selection.hpp"
#include "krylovff/spectrum.hpp"

namespace krylovff {

inline constexpr std::string_view kGroundDipoleSpec = "ground+dipole";

struct NoiseSweepPoint {
  double sigma = 0.0;
  double svd_threshold = kDefaultSvdThreshold;
};

/// Everything needed for one CLI invocation.
struct RunConfig {
  std::filesystem::path hamiltonian_path;
  std::string initial_state;
  KrylovConfig krylov;

  std::size_t shots = 1000;
  bool exact_sampling = false;
  std::size_t max_references = 1;
  std::size_t refs_per_round = 1;
  SelectionMode mode = SelectionMode::bitstring;
  double t_max = 20.0;
  double eps_stop = 1e-4;
  std::size_t grid_points = 201;

  std::optional<std::filesystem::path> observable_path;
  std::array<std::optional<std::filesystem::path>, 3> dipole_paths;
  double gamma = kDefaultGamma;
  std::optional<double> omega_min;
  std::optional<double> omega_max;
  std::size_t omega_points = 2001;
  double spectrum_dt = 0.1;

  std::vector<NoiseSweepPoint> noise_sweep;
  bool dump_matrices = false;
  std::optional<std::filesystem::path> eig_cache;
  bool timing = false;

  bool oracle = true;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "krylovff_out";

  bool dipole_requested() const {
    return dipole_paths[0] || dipole_paths[1] || dipole_paths[2];
  }

  SelectionConfig selection() const {
    SelectionConfig sel;
    sel.shots = shots;
    sel.exact_sampling = exact_sampling;
    sel.max_references = max_references;
    sel.references_per_round = refs_per_round;
    sel.mode = mode;
    sel.seed = seed;
    sel.t_max = t_max;
    sel.eps_stop = eps_stop;
    sel.eval_grid = TimeGrid(0.0, t_max, grid_points);
    return sel;
  }

  void validate() const {
    detail::require(!hamiltonian_path.empty(), ErrorKind::invalid_argument, "no Hamiltonian file given");
    detail::require(!initial_state.empty(), ErrorKind::invalid_argument, "no initial state given");
    detail::require(initial_state != kGroundDipoleSpec || dipole_requested(), ErrorKind::invalid_argument,
                    "initial state 'ground+dipole' needs at least one dipole file");
    detail::require(std::isfinite(spectrum_dt) && spectrum_dt > 0.0, ErrorKind::invalid_argument,
                    "spectrum time step must be > 0");
    detail::require(omega_points >= 2, ErrorKind::invalid_argument, "need at least 2 frequency points");
    krylov.validate();
    selection().validate();
    for (const auto& p : noise_sweep) {
      NoiseConfig{p.sigma, 0}.validate();
      detail::require(p.svd_threshold >= 0.0, ErrorKind::invalid_argument, "svd threshold must be >= 0");
    }
  }
};

namespace detail {

inline SelectionMode parse_mode(std::string_view name) {
  if (name == "bitstring") return SelectionMode::bitstring;
  if (name == "symmetry-eigvec" || name == "symmetry_eigvec") return SelectionMode::symmetry_eigvec;
  throw Error(ErrorKind::invalid_argument, "unknown selection mode '" + std::string(name) + "'");
}

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

inline std::uint64_t noise_seed_for(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

}  // namespace detail

/// Reads a JSON config whose keys mirror the CLI flags (with underscores).
/// Relative paths resolve against `base_dir`.
inline RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  detail::require(j.is_object(), ErrorKind::parse, "config must be a JSON object");
  static const std::vector<std::string> kKnown = {
      "hamiltonian", "initial_state", "tau", "krylov_dim", "max_references", "refs_per_round", "mode",
      "shots", "exact_sampling", "svd_threshold", "noise_sigma", "seed", "t_max", "eps_stop",
      "grid_points", "dipole_x", "dipole_y", "dipole_z", "gamma", "observable", "oracle", "out",
      "noise_sweep", "omega_min", "omega_max", "omega_points", "spectrum_dt", "dump_matrices",
      "eig_cache", "timing"};
  for (const auto& [key, value] : j.items()) {
    detail::require(std::find(kKnown.begin(), kKnown.end(), key) != kKnown.end(), ErrorKind::parse,
                    "unknown config key '" + key + "'");
  }
  RunConfig cfg;
  try {
    if (j.contains("hamiltonian")) cfg.hamiltonian_path = detail::resolve(base_dir, j.at("hamiltonian").get<std::string>());
    if (j.contains("initial_state")) {
      const auto spec = j.at("initial_state").get<std::string>();
      const bool literal = spec == kGroundDipoleSpec || spec.find_first_not_of("01") == std::string::npos;
      cfg.initial_state = literal ? spec : detail::resolve(base_dir, spec).string();
    }
    detail::read_key(j, "tau", cfg.krylov.tau);
    detail::read_key(j, "krylov_dim", cfg.krylov.krylov_dim);
    detail::read_key(j, "svd_threshold", cfg.krylov.svd_threshold);
    if (j.contains("noise_sigma")) cfg.krylov.noise = NoiseConfig{j.at("noise_sigma").get<double>(), 0};
    detail::read_key(j, "max_references", cfg.max_references);
    detail::read_key(j, "refs_per_round", cfg.refs_per_round);
    if (j.contains("mode")) cfg.mode = detail::parse_mode(j.at("mode").get<std::string>());
    detail::read_key(j, "shots", cfg.shots);
    detail::read_key(j, "exact_sampling", cfg.exact_sampling);
    detail::read_key(j, "seed", cfg.seed);
    detail::read_key(j, "t_max", cfg.t_max);
    detail::read_key(j, "eps_stop", cfg.eps_stop);
    detail::read_key(j, "grid_points", cfg.grid_points);
    const char* dipole_keys[3] = {"dipole_x", "dipole_y", "dipole_z"};
    for (std::size_t a = 0; a < 3; ++a) {
      if (j.contains(dipole_keys[a])) cfg.dipole_paths[a] = detail::resolve(base_dir, j.at(dipole_keys[a]).get<std::string>());
    }
    detail::read_key(j, "gamma", cfg.gamma);
    if (j.contains("observable")) cfg.observable_path = detail::resolve(base_dir, j.at("observable").get<std::string>());
    detail::read_key(j, "oracle", cfg.oracle);
    if (j.contains("out")) cfg.out_dir = detail::resolve(base_dir, j.at("out").get<std::string>());
    if (j.contains("noise_sweep")) {
      for (const auto& p : j.at("noise_sweep")) {
        NoiseSweepPoint point;
        point.sigma = p.at("sigma").get<double>();
        detail::read_key(p, "svd_threshold", point.svd_threshold);
        cfg.noise_sweep.push_back(point);
      }
    }
    if (j.contains("omega_min")) cfg.omega_min = j.at("omega_min").get<double>();
    if (j.contains("omega_max")) cfg.omega_max = j.at("omega_max").get<double>();
    detail::read_key(j, "omega_points", cfg.omega_points);
    detail::read_key(j, "spectrum_dt", cfg.spectrum_dt);
    detail::read_key(j, "dump_matrices", cfg.dump_matrices);
    if (j.contains("eig_cache")) cfg.eig_cache = detail::resolve(base_dir, j.at("eig_cache").get<std::string>());
    detail::read_key(j, "timing", cfg.timing);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("config: ") + e.what());
  }
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

struct ExperimentSummary {
  nlohmann::json summary;
  std::vector<std::filesystem::path> artifacts;
};

namespace detail {

inline std::string csv_text(const CorrelationSeries& s, const std::vector<double>* fidelity) {
  std::ostringstream out;
  write_correlation_csv(out, s, fidelity);
  return out.str();
}

inline nlohmann::json run_summary(const SqkffResult& run) {
  nlohmann::json j;
  j["stop_reason"] = to_string(run.stop_reason);
  j["rounds_executed"] = run.rounds_executed();
  std::vector<std::size_t> ranks, refs;
  for (const auto& r : run.rounds) {
    ranks.push_back(r.model.kept_rank);
    refs.push_back(r.basis.references.size());
  }
  j["kept_rank_history"] = ranks;
  j["reference_count_history"] = refs;
  const auto& last = run.final_round();
  if (last.fidelity) j["final_fidelity_t_max"] = last.fidelity->back();
  return j;
}

inline std::string format_sigma(double sigma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", sigma);
  return buf;
}

}  // namespace detail

/// Runs the configured pipeline and writes its artifacts into cfg.out_dir.
inline ExperimentSummary run_experiment(RunConfig cfg) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  cfg.validate();

  ExperimentSummary result;
  auto emit = [&](const std::string& name, std::string_view text) {
    const auto path = cfg.out_dir / name;
    write_text_file(path, text);
    result.artifacts.push_back(path);
  };
  std::filesystem::create_directories(cfg.out_dir);

  const PauliSumOperator h = load_pauli_sum(cfg.hamiltonian_path);
  const std::size_t n = h.qubit_count();
  const SpectralDecomposition d = cfg.eig_cache ? eig_decompose_cached(h, *cfg.eig_cache) : eig_decompose(h);
  const auto decomposed = Clock::now();

  KrylovConfig krylov = cfg.krylov;
  if (krylov.noise) krylov.noise->seed = detail::noise_seed_for(cfg.seed);
  const SelectionConfig sel = cfg.selection();

  nlohmann::json& summary = result.summary;
  summary["qubit_count"] = n;
  summary["hamiltonian_terms"] = h.terms().size();
  summary["tau"] = krylov.tau;
  summary["krylov_dim"] = krylov.krylov_dim;
  summary["svd_threshold"] = krylov.svd_threshold;
  summary["noise_sigma"] = krylov.noise ? krylov.noise->sigma : 0.0;
  summary["max_references"] = cfg.max_references;
  summary["mode"] = to_string(cfg.mode);
  summary["sampling"] = cfg.exact_sampling ? nlohmann::json("exact") : nlohmann::json(cfg.shots);
  summary["seed"] = cfg.seed;
  summary["t_max"] = cfg.t_max;
  summary["eps_stop"] = cfg.eps_stop;
  summary["oracle"] = cfg.oracle;

  if (cfg.initial_state != kGroundDipoleSpec) {
    const StateVector psi0 = load_state(cfg.initial_state, n);
    const SqkffResult run = run_sqkff(h, d, psi0, krylov, sel, cfg.oracle);

    std::string log;
    for (const auto& round : run.rounds) {
      const std::vector<double>* fid = round.fidelity ? &*round.fidelity : nullptr;
      emit("round_" + std::to_string(round.round) + ".csv", detail::csv_text(round.correlation, fid));
      log += round_log_entry(round, n).dump() + '\n';
    }
    emit("rounds.jsonl", log);
    summary["autocorrelation"] = detail::run_summary(run);
    if (cfg.dump_matrices) emit("model.json", to_json(run.model()).dump(1) + '\n');

    if (cfg.observable_path) {
      const PauliSumOperator obs = load_pauli_sum(*cfg.observable_path, n);
      const auto values = observable_expectation_ff(run.model(), run.basis(), obs, sel.eval_grid);
      std::ostringstream csv;
      csv << "t,O" << (cfg.oracle ? ",O_exact" : "") << '\n';
      for (std::size_t j = 0; j < values.size(); ++j) {
        const double t = sel.eval_grid[j];
        csv << detail::format_double(t) << ',' << detail::format_double(values[j]);
        if (cfg.oracle) csv << ',' << detail::format_double(expectation(obs, evolve_exact(d, psi0, t)));
        csv << '\n';
      }
      emit("observable.csv", csv.str());
    }

    if (!cfg.noise_sweep.empty()) {
      nlohmann::json sweep = nlohmann::json::array();
      for (const auto& point : cfg.noise_sweep) {
        KrylovConfig noisy = krylov;
        noisy.svd_threshold = point.svd_threshold;
        noisy.noise = NoiseConfig{point.sigma, detail::noise_seed_for(cfg.seed)};
        const SqkffResult r = run_sqkff(h, d, psi0, noisy, sel, cfg.oracle);
        const auto& last = r.final_round();
        const std::vector<double>* fid = last.fidelity ? &*last.fidelity : nullptr;
        // Repeated sigmas (threshold scans) also carry the threshold in the name.
        const auto repeats = std::count_if(cfg.noise_sweep.begin(), cfg.noise_sweep.end(),
                                           [&](const NoiseSweepPoint& p) { return p.sigma == point.sigma; });
        std::string name = "noise_sigma_" + detail::format_sigma(point.sigma);
        if (repeats > 1) name += "_svd_" + detail::format_sigma(point.svd_threshold);
        name += ".csv";
        emit(name, detail::csv_text(last.correlation, fid));
        nlohmann::json entry = detail::run_summary(r);
        entry["sigma"] = point.sigma;
        entry["svd_threshold"] = point.svd_threshold;
        entry["file"] = name;
        sweep.push_back(std::move(entry));
      }
      summary["noise_sweep"] = std::move(sweep);
    }
  }

  if (cfg.dipole_requested()) {
    const double t_end = default_spectrum_t_end(cfg.gamma);
    const auto points = static_cast<std::size_t>(std::ceil(t_end / cfg.spectrum_dt)) + 1;
    const TimeGrid grid(0.0, t_end, points);
    const double width = d.eigenvalues(d.eigenvalues.size() - 1) - d.eigenvalues(0);
    const double lo = cfg.omega_min.value_or(0.0);
    const double hi = cfg.omega_max.value_or(std::max(1.1 * width, lo + 1.0));
    const auto omega = frequency_grid(lo, hi, cfg.omega_points);

    std::vector<SpectrumSeries> channels;
    nlohmann::json dipoles = nlohmann::json::object();
    static constexpr const char* kAxisNames[3] = {"x", "y", "z"};
    for (std::size_t a = 0; a < 3; ++a) {
      if (!cfg.dipole_paths[a]) continue;
      const PauliSumOperator mu = load_pauli_sum(*cfg.dipole_paths[a], n);
      DipoleCorrelation dc = dipole_correlation_ff(h, d, mu, krylov, sel, grid, false);
      std::vector<double> fid;
      if (cfg.oracle) fid = fidelity_series(d, dc.initial, dc.run.basis(), dc.run.model(), grid);
      emit(std::string("dipole_") + kAxisNames[a] + ".csv",
           detail::csv_text(dc.series, cfg.oracle ? &fid : nullptr));
      channels.push_back(lineshape(dc.series, cfg.gamma, omega, dc.ground.energy, static_cast<Axis>(a)));
      nlohmann::json entry = detail::run_summary(dc.run);
      entry["ground_energy"] = dc.ground.energy;
      entry["ground_degenerate"] = dc.ground.degenerate;
      entry["norm_factor"] = dc.series.norm_factor;
      if (cfg.oracle) entry["final_fidelity"] = fid.back();
      dipoles[kAxisNames[a]] = std::move(entry);
      if (dc.ground.degenerate) warn_to_stderr("ground state is degenerate; dipole correlation uses one member");
    }
    std::ostringstream csv;
    write_spectrum_csv(csv, oscillator_strength(channels));
    emit("spectrum.csv", csv.str());
    summary["dipole"] = std::move(dipoles);
    summary["gamma"] = cfg.gamma;
  }

  if (cfg.timing) {
    const auto seconds = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };
    summary["timing"] = {{"decomposition_s", seconds(started, decomposed)},
                         {"total_s", seconds(started, Clock::now())}};
  }
  emit("summary.json", summary.dump(2) + '\n');
  return result;
}

}  // namespace krylovff
