// Command-line driver: fast-forwarded dynamics from a Pauli-sum Hamiltonian,
// plus a generator for the bundled spin-model Hamiltonians.

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "krylovff/krylovff.hpp"

namespace {

int report(const std::string& kind, const std::string& message) {
  nlohmann::json err;
  err["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << err.dump() << '\n';
  return 1;
}

std::vector<krylovff::NoiseSweepPoint> parse_noise_sweep(const std::string& text) {
  // "sigma:eps,sigma:eps,..."; eps falls back to the default threshold.
  std::vector<krylovff::NoiseSweepPoint> points;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    if (!item.empty()) {
      krylovff::NoiseSweepPoint p;
      const auto colon = item.find(':');
      const auto sigma = krylovff::detail::parse_double(item.substr(0, colon));
      if (!sigma) throw krylovff::Error(krylovff::ErrorKind::parse, "bad noise sweep entry '" + item + "'");
      p.sigma = *sigma;
      if (colon != std::string::npos) {
        const auto eps = krylovff::detail::parse_double(item.substr(colon + 1));
        if (!eps) throw krylovff::Error(krylovff::ErrorKind::parse, "bad noise sweep entry '" + item + "'");
        p.svd_threshold = *eps;
      }
      points.push_back(p);
    }
    start = end + 1;
  }
  return points;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selected quantum Krylov fast-forwarding of Pauli-sum Hamiltonians"};
  app.set_version_flag("--version", "krylovff 1.0");

  std::string config_path, hamiltonian, initial_state, mode = "bitstring", observable, out_dir;
  std::string dipole[3], noise_sweep, eig_cache;
  double tau = krylovff::kDefaultTau, svd = krylovff::kDefaultSvdThreshold, sigma = 0.0;
  double t_max = 20.0, eps_stop = 1e-4, gamma = krylovff::kDefaultGamma, omega_min = 0.0, omega_max = 0.0;
  double spectrum_dt = 0.1;
  std::size_t krylov_dim = krylovff::kDefaultKrylovDim, max_refs = 1, refs_per_round = 1, shots = 1000;
  std::size_t grid_points = 201, omega_points = 2001;
  std::uint64_t seed = 0;
  bool exact_sampling = false, oracle = true, dump_matrices = false, timing = false;

  auto* cfg_opt = app.add_option("--config", config_path, "JSON config mirroring these flags")->check(CLI::ExistingFile);
  auto* ham_opt = app.add_option("--hamiltonian", hamiltonian, "Pauli-sum Hamiltonian file");
  auto* init_opt = app.add_option("--initial-state", initial_state, "bitstring, state file, or ground+dipole");
  auto* tau_opt = app.add_option("--tau", tau, "Krylov time step (a.u.)");
  auto* dim_opt = app.add_option("--krylov-dim", krylov_dim, "Krylov steps per reference (M)");
  auto* max_opt = app.add_option("--max-references", max_refs, "maximum number of references");
  auto* rpr_opt = app.add_option("--refs-per-round", refs_per_round, "references added per round");
  auto* mode_opt = app.add_option("--mode", mode, "reference selection mode")
                       ->check(CLI::IsMember({"bitstring", "symmetry-eigvec"}));
  auto* shots_opt = app.add_option("--shots", shots, "samples per transition measurement");
  auto* exact_opt = app.add_flag("--exact-sampling", exact_sampling, "rank bitstrings by exact p(x)");
  auto* svd_opt = app.add_option("--svd-threshold", svd, "overlap singular value cutoff");
  auto* sigma_opt = app.add_option("--noise-sigma", sigma, "additive Gaussian noise on H, S, d0");
  auto* seed_opt = app.add_option("--seed", seed, "global seed");
  auto* tmax_opt = app.add_option("--t-max", t_max, "end of the evaluation grid (a.u.)");
  auto* eps_opt = app.add_option("--eps-stop", eps_stop, "stopping tolerance on |C(t)|");
  auto* grid_opt = app.add_option("--grid-points", grid_points, "evaluation grid points on [0, t_max]");
  CLI::Option* dip_opt[3] = {app.add_option("--dipole-x", dipole[0], "x dipole Pauli-sum file"),
                             app.add_option("--dipole-y", dipole[1], "y dipole Pauli-sum file"),
                             app.add_option("--dipole-z", dipole[2], "z dipole Pauli-sum file")};
  auto* gamma_opt = app.add_option("--gamma", gamma, "spectral linewidth");
  auto* obs_opt = app.add_option("--observable", observable, "Pauli-sum observable file");
  auto* oracle_opt = app.add_flag("--oracle,!--no-oracle", oracle, "compare against exact dynamics");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* sweep_opt = app.add_option("--noise-sweep", noise_sweep, "sigma:svd_threshold pairs, comma separated");
  auto* omin_opt = app.add_option("--omega-min", omega_min, "lowest spectrum frequency");
  auto* omax_opt = app.add_option("--omega-max", omega_max, "highest spectrum frequency");
  auto* opts_opt = app.add_option("--omega-points", omega_points, "spectrum frequency points");
  auto* sdt_opt = app.add_option("--spectrum-dt", spectrum_dt, "time step of the dipole correlation grid");
  auto* dump_opt = app.add_flag("--dump-matrices", dump_matrices, "write H, S, d0 of the final round");
  auto* cache_opt = app.add_option("--eig-cache", eig_cache, "directory caching Hamiltonian eigendecompositions");
  auto* timing_opt = app.add_flag("--timing", timing, "record wall-clock timings in summary.json");

  auto* generate = app.add_subcommand("generate", "write a spin-model Hamiltonian in Pauli-sum format");
  std::string model_kind = "heisenberg", model_out;
  std::size_t model_qubits = 4, model_terms = 0;
  double model_field = 1.0;
  bool model_periodic = false;
  std::uint64_t model_seed = 0;
  generate->add_option("--model", model_kind, "heisenberg | tfim | random_pauli")->required();
  generate->add_option("--qubits", model_qubits, "number of qubits")->required();
  generate->add_option("--field", model_field, "transverse field g (tfim)");
  generate->add_option("--terms", model_terms, "number of terms (random_pauli)");
  generate->add_flag("--periodic", model_periodic, "periodic boundary conditions");
  generate->add_option("--seed", model_seed, "seed (random_pauli)");
  generate->add_option("-o,--output", model_out, "output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      krylovff::ModelParams params;
      params.field = model_field;
      params.terms = model_terms;
      params.periodic = model_periodic;
      const auto op = krylovff::generate_test_hamiltonian(krylovff::parse_model_kind(model_kind), model_qubits,
                                                          params, model_seed);
      if (model_out.empty()) {
        std::cout << krylovff::serialize(op);
      } else {
        krylovff::write_text_file(model_out, krylovff::serialize(op));
      }
      return 0;
    }

    krylovff::RunConfig cfg;
    if (*cfg_opt) cfg = krylovff::load_run_config(config_path);
    // Explicit flags override the config file.
    if (*ham_opt) cfg.hamiltonian_path = hamiltonian;
    if (*init_opt) cfg.initial_state = initial_state;
    if (*tau_opt) cfg.krylov.tau = tau;
    if (*dim_opt) cfg.krylov.krylov_dim = krylov_dim;
    if (*svd_opt) cfg.krylov.svd_threshold = svd;
    if (*sigma_opt) cfg.krylov.noise = krylovff::NoiseConfig{sigma, 0};
    if (*max_opt) cfg.max_references = max_refs;
    if (*rpr_opt) cfg.refs_per_round = refs_per_round;
    if (*mode_opt) cfg.mode = krylovff::detail::parse_mode(mode);
    if (*shots_opt) {
      cfg.shots = shots;
      cfg.exact_sampling = false;
    }
    if (*exact_opt) cfg.exact_sampling = exact_sampling;
    if (*seed_opt) cfg.seed = seed;
    if (*tmax_opt) cfg.t_max = t_max;
    if (*eps_opt) cfg.eps_stop = eps_stop;
    if (*grid_opt) cfg.grid_points = grid_points;
    for (int a = 0; a < 3; ++a) {
      if (*dip_opt[a]) cfg.dipole_paths[static_cast<std::size_t>(a)] = dipole[a];
    }
    if (*gamma_opt) cfg.gamma = gamma;
    if (*obs_opt) cfg.observable_path = observable;
    if (*oracle_opt) cfg.oracle = oracle;
    if (*out_opt) cfg.out_dir = out_dir;
    if (*sweep_opt) cfg.noise_sweep = parse_noise_sweep(noise_sweep);
    if (*omin_opt) cfg.omega_min = omega_min;
    if (*omax_opt) cfg.omega_max = omega_max;
    if (*opts_opt) cfg.omega_points = omega_points;
    if (*sdt_opt) cfg.spectrum_dt = spectrum_dt;
    if (*dump_opt) cfg.dump_matrices = dump_matrices;
    if (*cache_opt) cfg.eig_cache = eig_cache;
    if (*timing_opt) cfg.timing = timing;

    const auto result = krylovff::run_experiment(cfg);
    std::cout << result.summary.dump(2) << '\n';
    return 0;
  } catch (const krylovff::Error& e) {
    return report(std::string(krylovff::to_string(e.kind())), e.what());
  } catch (const std::exception& e) {
    return report("internal", e.what());
  }
}
