// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

using namespace krylovff;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

KrylovConfig config(std::size_t m, double tau) {
  KrylovConfig cfg;
  cfg.krylov_dim = m;
  cfg.tau = tau;
  return cfg;
}

SelectionConfig single_reference(double t_max, std::size_t points) {
  SelectionConfig sel;
  sel.max_references = 1;
  sel.t_max = t_max;
  sel.eval_grid = TimeGrid(0.0, t_max, points);
  return sel;
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

// 1. Single ladder over an exactly spanned trajectory is exact on [0, 100].
Outcome exactness() {
  std::mt19937_64 rng(101);
  const TimeGrid grid(0.0, 100.0, 2001);
  double worst_infidelity = 0.0, worst_modulus = 0.0, slowest = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto inst = testing_support::make_exact_span_instance(rng);
    const auto started = Clock::now();
    const auto cfg = config(inst.support + static_cast<std::size_t>(trial % 3), inst.tau);
    const auto run = run_sqkff(inst.hamiltonian, inst.decomposition, inst.psi0, cfg, single_reference(100.0, 2001),
                               false);
    const auto ff = autocorrelation_ff(run.model(), grid);
    const auto fid = fidelity_series(inst.decomposition, inst.psi0, run.basis(), run.model(), grid);
    slowest = std::max(slowest, seconds_since(started));
    const auto exact = exact_autocorrelation(inst.decomposition, inst.psi0, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      worst_infidelity = std::max(worst_infidelity, 1.0 - fid[j]);
      worst_modulus = std::max(worst_modulus, std::abs(std::abs(ff.values[j]) - std::abs(exact.values[j])));
    }
  }
  return {worst_infidelity <= 1e-7 && worst_modulus <= 1e-7 && slowest < 1.0,
          fmt("40 instances, max 1-F %.2e, max ||C|-|C_exact|| %.2e, slowest %.3f s", worst_infidelity,
              worst_modulus, slowest)};
}

// 2. Whitened propagation against e^{-i S^-1 H t} S^-1 d0.
Outcome pseudoinverse_equivalence() {
  std::mt19937_64 rng(102);
  std::vector<double> times = {0.0};
  for (int i = 0; i < 49; ++i) times.push_back(0.01 * std::pow(1e4, i / 48.0));
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = testing_support::make_full_rank_instance(rng);
    const auto basis = build_krylov_basis(inst.decomposition, {inst.psi0}, inst.config);
    const auto model = threshold_and_whiten(assemble_subspace_matrices(basis, inst.hamiltonian, inst.psi0),
                                            inst.config.svd_threshold);
    if (model.kept_rank != model.size()) return {false, "full-rank instance lost a direction"};
    const Matrix s_inv = model.overlap.inverse();
    const Matrix generator = s_inv * model.hamiltonian;
    const Vector c0 = s_inv * model.d0;
    for (double t : times) {
      const Vector direct = (Complex(0.0, -t) * generator).exp() * c0;
      worst = std::max(worst, (fast_forward_coefficients(model, t) - direct).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= 1e-8, fmt("20 instances x 50 times, max deviation %.2e", worst)};
}

// v^dag A v summed in extended precision, so the check resolves drift well
// below the rounding of a double quadratic form with entries near eps^{-1/2}.
std::complex<long double> quadratic_form(const Vector& v, const Matrix& a) {
  std::complex<long double> acc = 0.0L;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::complex<long double> row = 0.0L;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      row += std::complex<long double>(a(i, j)) * std::complex<long double>(v(j));
    }
    acc += std::conj(std::complex<long double>(v(i))) * row;
  }
  return acc;
}

// 3. c^dag S c and c^dag H c are constants of the subspace motion.
Outcome conservation() {
  std::mt19937_64 rng(103);
  const TimeGrid grid(0.0, 100.0, 101);
  double worst_norm = 0.0, worst_energy = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 3;
    const auto h = testing_support::random_operator(n, 2 * n + 2, rng);
    const auto d = eig_decompose(h);
    const auto psi = testing_support::random_state(n, rng);
    std::vector<StateVector> refs = {psi};
    const std::size_t r = 1 + rng() % 3;
    while (refs.size() < r) refs.push_back(StateVector::basis(n, rng() % dimension_for(n)));
    const auto cfg = config(1 + rng() % 6, 0.1 + 0.9 * std::uniform_real_distribution<double>()(rng));
    const auto basis = build_krylov_basis(d, refs, cfg);
    const auto model = threshold_and_whiten(assemble_subspace_matrices(basis, h, psi), cfg.svd_threshold);
    const Vector c0 = fast_forward_coefficients(model, 0.0);
    const auto norm0 = quadratic_form(c0, model.overlap);
    const auto energy0 = quadratic_form(c0, model.hamiltonian);
    for (double t : grid.times()) {
      const Vector c = fast_forward_coefficients(model, t);
      worst_norm = std::max(worst_norm, static_cast<double>(std::abs(quadratic_form(c, model.overlap) - norm0)));
      worst_energy =
          std::max(worst_energy, static_cast<double>(std::abs(quadratic_form(c, model.hamiltonian) - energy0)));
    }
  }
  return {worst_norm <= 1e-9 && worst_energy <= 1e-9,
          fmt("100 instances, max drift c'Sc %.2e, c'Hc %.2e", worst_norm, worst_energy)};
}

double mean_infidelity(const KrylovRound& round) {
  double sum = 0.0;
  for (double f : *round.fidelity) sum += 1.0 - f;
  return sum / static_cast<double>(round.fidelity->size());
}

SelectionConfig heisenberg_selection(std::size_t max_refs, double eps_stop) {
  SelectionConfig sel;
  sel.max_references = max_refs;
  sel.seed = 7;
  sel.t_max = 20.0;
  sel.eval_grid = TimeGrid(0.0, 20.0, 201);
  sel.eps_stop = eps_stop;
  return sel;
}

PauliSumOperator bundled_model(const char* name) {
  return load_pauli_sum(fs::path(KRYLOVFF_SOURCE_DIR) / "data" / name);
}

const PauliSumOperator& heisenberg() {
  static const PauliSumOperator h = bundled_model("heisenberg4.txt");
  return h;
}

const StateVector kNeel = StateVector::from_bitstring("0101");

// 4. More references never make the Heisenberg trajectory worse. The plain
// chain conserves S_z, so one ladder of 6 already spans |0101>'s sector; the
// chain with a site-dependent transverse field is where references matter.
Outcome multi_reference_improvement() {
  const auto started = Clock::now();
  const auto cfg = config(6, 0.1);
  bool pass = true;
  std::string detail;
  for (const char* name : {"heisenberg4.txt", "heisenberg4_field.txt"}) {
    const auto h = bundled_model(name);
    const auto d = eig_decompose(h);
    std::vector<double> averaged;
    for (std::size_t r : {1, 2, 4}) {
      const auto run = run_sqkff(h, d, kNeel, cfg, heisenberg_selection(r, 1e-300), true);
      averaged.push_back(mean_infidelity(run.final_round()));
    }
    const auto converged = run_sqkff(h, d, kNeel, cfg, heisenberg_selection(4, 1e-4), true);
    const double final_fidelity = converged.final_round().fidelity->back();
    pass = pass && averaged[1] <= averaged[0] + 1e-6 && averaged[2] <= averaged[1] + 1e-6 &&
           final_fidelity >= 0.99;
    detail += std::string(detail.empty() ? "" : "; ") + name +
              fmt(" mean 1-F R=1 %.2e, R=2 %.2e, R=4 %.2e", averaged[0], averaged[1], averaged[2]) +
              fmt(", F(T) %.6f", final_fidelity);
  }
  const double elapsed = seconds_since(started);
  return {pass && elapsed < 10.0, detail + fmt("; %.2f s", elapsed)};
}

// 5. Small noise with a matched threshold stays near the noiseless run.
Outcome noise_robustness() {
  const auto& h = heisenberg();
  const auto d = eig_decompose(h);
  const auto sel = heisenberg_selection(4, 1e-4);
  const auto clean = run_sqkff(h, d, kNeel, config(6, 0.1), sel, true);

  auto noisy_cfg = config(6, 0.1);
  noisy_cfg.svd_threshold = 1e-4;
  noisy_cfg.noise = NoiseConfig{1e-5, 42};
  const auto noisy = run_sqkff(h, d, kNeel, noisy_cfg, sel, true);
  const double gap = std::abs((1.0 - noisy.final_round().fidelity->back()) -
                              (1.0 - clean.final_round().fidelity->back()));

  auto zero_cfg = config(6, 0.1);
  zero_cfg.noise = NoiseConfig{0.0, 42};
  const auto zero = run_sqkff(h, d, kNeel, zero_cfg, sel, true);
  bool identical = zero.rounds.size() == clean.rounds.size();
  for (std::size_t i = 0; identical && i < clean.rounds.size(); ++i) {
    identical = zero.rounds[i].correlation.values == clean.rounds[i].correlation.values &&
                *zero.rounds[i].fidelity == *clean.rounds[i].fidelity &&
                zero.rounds[i].model.hamiltonian == clean.rounds[i].model.hamiltonian &&
                zero.rounds[i].model.overlap == clean.rounds[i].model.overlap;
  }
  return {gap <= 0.1 && identical,
          fmt("final infidelity gap %.2e at sigma=1e-5, ", gap) +
              (identical ? "sigma=0 bit-identical" : "sigma=0 differs from noiseless")};
}

std::vector<std::size_t> significant_maxima(const std::vector<double>& f, double fraction) {
  const double top = *std::max_element(f.begin(), f.end());
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    if (f[i] > f[i - 1] && f[i] >= f[i + 1] && f[i] > fraction * top) peaks.push_back(i);
  }
  return peaks;
}

// 6. Lorentzian line of a two-level dipole and peak placement on 3 qubits.
Outcome spectrum_correctness() {
  const double gamma = kDefaultGamma;
  const double t_end = default_spectrum_t_end(gamma);
  const TimeGrid grid(0.0, t_end, static_cast<std::size_t>(std::ceil(t_end / 0.1)) + 1);

  const double delta = 0.5;
  const auto two_level = parse_pauli_sum(fmt("%.17g Z\n", -delta / 2));
  const auto flip = parse_pauli_sum("1 X\n");
  const auto omega = frequency_grid(0.0, 1.0, 2001);
  const auto dc = dipole_correlation_ff(two_level, flip, config(2, 0.5), single_reference(20.0, 201), grid);
  const auto line = lineshape(dc.series, gamma, omega, dc.ground.energy, Axis::x);
  const auto& re_i = line.lineshape[0];
  const auto peak = static_cast<std::size_t>(std::max_element(re_i.begin(), re_i.end()) - re_i.begin());
  const double position_error = std::abs(omega[peak] - delta);
  const double height_ratio = re_i[peak] / (2.0 / gamma);
  bool pass = position_error <= omega[1] - omega[0] && std::abs(height_ratio - 1.0) <= 0.05;

  std::mt19937_64 rng(106);
  double worst_offset = 0.0;
  std::size_t peak_count = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto inst = testing_support::make_dipole_instance(rng);
    const auto& d = inst.decomposition;
    const auto run = dipole_correlation_ff(inst.hamiltonian, d, inst.dipole, config(inst.support, inst.tau),
                                           single_reference(20.0, 201), grid);
    const double width = d.eigenvalues(d.eigenvalues.size() - 1) - d.eigenvalues(0);
    const auto w = frequency_grid(0.0, 1.1 * width, 4001);
    const auto f =
        oscillator_strength({lineshape(run.series, gamma, w, run.ground.energy)}).oscillator_strength;
    const double tol = std::max(w[1] - w[0], gamma);
    const auto peaks = significant_maxima(f, 1e-2);
    pass = pass && !peaks.empty();
    for (std::size_t i : peaks) {
      double nearest = 1e300;
      for (double gap : inst.gaps) nearest = std::min(nearest, std::abs(w[i] - gap));
      worst_offset = std::max(worst_offset, nearest / tol);
      ++peak_count;
    }
  }
  pass = pass && worst_offset <= 1.0;
  return {pass, fmt("two-level peak offset %.1e, height/(2/gamma) %.4f; ", position_error, height_ratio) +
                    fmt("3-qubit: %g peaks, worst offset %.2f of tolerance", static_cast<double>(peak_count),
                        worst_offset)};
}

// 7. Multinomial frequencies against exact transition probabilities.
Outcome sampling_statistics() {
  std::mt19937_64 rng(107);
  const std::size_t shots = 100000;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto h = testing_support::random_operator(3, 8, rng);
    const auto d = eig_decompose(h);
    const auto psi = testing_support::random_state(3, rng);
    const auto cfg = config(6, 0.1);
    SelectionConfig sel;
    sel.max_references = 2;
    sel.shots = shots;
    sel.seed = 700 + static_cast<std::uint64_t>(trial);
    const auto p = transition_probabilities(d, psi, static_cast<double>(cfg.krylov_dim - 1) * cfg.tau);
    std::vector<double> observed(8, 0.0);
    for (const auto& s : sample_transition_bitstrings(d, psi, cfg, sel)) observed[s.index] = s.frequency;
    for (std::size_t x = 0; x < 8; ++x) {
      const double px = p(static_cast<Eigen::Index>(x));
      const double se = std::sqrt(px * (1.0 - px) / static_cast<double>(shots));
      const double dev = std::abs(observed[x] - px);
      if (se > 0.0) {
        worst = std::max(worst, dev / se);
      } else if (dev > 0.0) {
        worst = 1e300;
      }
    }
  }
  return {worst <= 3.0, fmt("5 instances x 8 bitstrings, worst deviation %.2f standard errors", worst)};
}

// 8. Bundled configs reproduce their artifacts byte for byte.
Outcome determinism() {
  const fs::path scratch = fs::temp_directory_path() / "krylovff_acceptance_determinism";
  fs::remove_all(scratch);
  std::size_t configs = 0, files = 0;
  std::string mismatch;
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(fs::path(KRYLOVFF_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() == ".json") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& path : paths) {
    std::vector<ExperimentSummary> runs;
    for (const char* tag : {"a", "b"}) {
      RunConfig cfg = load_run_config(path);
      cfg.out_dir = scratch / path.stem() / tag;
      runs.push_back(run_experiment(cfg));
    }
    ++configs;
    if (runs[0].artifacts.size() != runs[1].artifacts.size()) mismatch = path.filename().string();
    for (std::size_t i = 0; mismatch.empty() && i < runs[0].artifacts.size(); ++i) {
      ++files;
      if (read_text_file(runs[0].artifacts[i]) != read_text_file(runs[1].artifacts[i])) {
        mismatch = runs[0].artifacts[i].filename().string();
      }
    }
  }
  fs::remove_all(scratch);
  if (configs == 0) return {false, "no bundled configs found"};
  if (!mismatch.empty()) return {false, "artifact differs between reruns: " + mismatch};
  return {true, fmt("%g configs, %g artifacts byte-identical", static_cast<double>(configs),
                    static_cast<double>(files))};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {"exactness", exactness},
      {"pseudoinverse-equivalence", pseudoinverse_equivalence},
      {"conservation", conservation},
      {"multi-reference-improvement", multi_reference_improvement},
      {"noise-robustness", noise_robustness},
      {"spectrum-correctness", spectrum_correctness},
      {"sampling-statistics", sampling_statistics},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("%s %zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
