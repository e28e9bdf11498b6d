#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "krylovff/error.hpp"
#include "krylovff/krylov.hpp"
#include "krylovff/pauli.hpp"
#include "krylovff/selection.hpp"
#include "krylovff/series.hpp"
#include "krylovff/state.hpp"

namespace krylovff {

using WarningSink = std::function<void(std::string_view)>;

inline void warn_to_stderr(std::string_view message) { std::cerr << "warning: " << message << '\n'; }

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  detail::require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  detail::require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
  out << text;
  detail::require(static_cast<bool>(out), ErrorKind::io, "short write to " + path.string());
}

inline PauliSumOperator load_pauli_sum(const std::filesystem::path& path,
                                       std::optional<std::size_t> expected_qubits = std::nullopt) {
  std::ifstream in(path);
  detail::require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  return parse_pauli_sum(in, expected_qubits, path.string());
}

/// Parses `<re> <im> <bitstring>` lines; repeated bitstrings accumulate.
inline StateVector parse_state(std::istream& in, std::size_t qubit_count, std::string_view source,
                               const WarningSink& warn = warn_to_stderr) {
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(dimension_for(qubit_count)));
  std::string line;
  std::size_t line_no = 0;
  std::size_t entries = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::parse, std::string(source) + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto tokens = detail::split_ws(view);
    if (tokens.size() != 3) fail("expected '<re> <im> <bitstring>'");
    const auto re = detail::parse_double(tokens[0]);
    const auto im = detail::parse_double(tokens[1]);
    if (!re || !im || !std::isfinite(*re) || !std::isfinite(*im)) fail("bad amplitude");
    if (tokens[2].size() != qubit_count) {
      fail("bitstring length " + std::to_string(tokens[2].size()) + " does not match " +
           std::to_string(qubit_count) + " qubits");
    }
    BasisIndex index = 0;
    try {
      index = parse_bitstring(tokens[2]);
    } catch (const Error& e) {
      fail(e.what());
    }
    amps(static_cast<Eigen::Index>(index)) += Complex(*re, *im);
    ++entries;
  }
  detail::require(entries > 0, ErrorKind::parse, std::string(source) + ": state file is empty");
  const double norm = amps.norm();
  detail::require(norm > 0.0, ErrorKind::invalid_argument, std::string(source) + ": state has zero norm");
  if (std::abs(norm - 1.0) > 1e-6) {
    warn(std::string(source) + ": state norm " + detail::format_double(norm) + " renormalized to 1");
  }
  return {qubit_count, amps / norm};
}

/// A bitstring spec ("0101") or the path of a state file.
inline StateVector load_state(std::string_view spec, std::size_t qubit_count,
                              const WarningSink& warn = warn_to_stderr) {
  detail::require(!spec.empty(), ErrorKind::invalid_argument, "empty initial-state spec");
  const bool is_bitstring = spec.find_first_not_of("01") == std::string_view::npos;
  if (is_bitstring) {
    detail::require(spec.size() == qubit_count, ErrorKind::parse,
                    "bitstring '" + std::string(spec) + "' does not have " + std::to_string(qubit_count) +
                        " characters");
    return StateVector::from_bitstring(spec);
  }
  const std::filesystem::path path{std::string(spec)};
  if (!std::filesystem::exists(path)) {
    // Looks like a mistyped bitstring rather than a path.
    detail::require(spec.find_first_not_of("0123456789") != std::string_view::npos, ErrorKind::parse,
                    "bitstring '" + std::string(spec) + "' contains characters outside {0,1}");
    throw Error(ErrorKind::io, "state file " + path.string() + " does not exist");
  }
  std::ifstream in(path);
  detail::require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  return parse_state(in, qubit_count, path.string(), warn);
}

/// State file text with one line per nonzero amplitude.
inline std::string serialize(const StateVector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.amplitudes.size(); ++i) {
    const Complex a = v.amplitudes(i);
    if (a == Complex{0.0, 0.0}) continue;
    out += detail::format_double(a.real()) + ' ' + detail::format_double(a.imag()) + ' ' +
           format_bitstring(static_cast<BasisIndex>(i), v.qubit_count) + '\n';
  }
  return out;
}

inline void write_correlation_csv(std::ostream& out, const CorrelationSeries& series,
                                  const std::vector<double>* fidelity = nullptr) {
  detail::require(!fidelity || fidelity->size() == series.values.size(), ErrorKind::dimension_mismatch,
                  "fidelity column does not match the correlation series");
  out << "t,re_C,im_C,abs2_C" << (fidelity ? ",fidelity" : "") << '\n';
  for (std::size_t j = 0; j < series.values.size(); ++j) {
    const Complex c = series.values[j];
    out << detail::format_double(series.grid[j]) << ',' << detail::format_double(c.real()) << ','
        << detail::format_double(c.imag()) << ',' << detail::format_double(std::norm(c));
    if (fidelity) out << ',' << detail::format_double((*fidelity)[j]);
    out << '\n';
  }
}

inline void write_spectrum_csv(std::ostream& out, const SpectrumSeries& spectrum) {
  out << "omega,re_I_x,re_I_y,re_I_z,f\n";
  for (std::size_t i = 0; i < spectrum.omega.size(); ++i) {
    out << detail::format_double(spectrum.omega[i]);
    for (const auto& channel : spectrum.lineshape) {
      out << ',' << detail::format_double(channel.empty() ? 0.0 : channel[i]);
    }
    const double f = spectrum.oscillator_strength.empty() ? 0.0 : spectrum.oscillator_strength[i];
    out << ',' << detail::format_double(f) << '\n';
  }
}

namespace detail {

inline nlohmann::json complex_rows(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json real_list(const RealVector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace detail

/// H, S, d0 (row-major, [re, im] pairs) plus the kept singular values and
/// the reduced spectrum when the model is whitened.
inline nlohmann::json to_json(const SubspaceModel& model) {
  nlohmann::json j;
  j["dimension"] = model.size();
  j["H"] = detail::complex_rows(model.hamiltonian);
  j["S"] = detail::complex_rows(model.overlap);
  nlohmann::json d0 = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.d0.size(); ++i) d0.push_back({model.d0(i).real(), model.d0(i).imag()});
  j["d0"] = std::move(d0);
  if (model.whitened) {
    j["svd_threshold"] = model.svd_threshold;
    j["kept_rank"] = model.kept_rank;
    j["kept_singular_values"] = detail::real_list(model.kept_singular_values);
    j["lambda"] = detail::real_list(model.reduced_eigenvalues);
  }
  return j;
}

/// One line of the per-round log.
inline nlohmann::json round_log_entry(const KrylovRound& round, std::size_t qubit_count) {
  nlohmann::json pool = nlohmann::json::array();
  for (const auto& e : round.pool) {
    nlohmann::json entry;
    entry["bitstring"] = e.bitstring ? nlohmann::json(format_bitstring(*e.bitstring, qubit_count))
                                     : nlohmann::json(nullptr);
    entry["frequency"] = e.frequency;
    entry["provenance"] = to_string(e.provenance);
    pool.push_back(std::move(entry));
  }
  nlohmann::json j;
  j["round"] = round.round;
  j["pool"] = std::move(pool);
  j["references"] = round.basis.references.size();
  j["kept_rank"] = round.model.kept_rank;
  j["max_delta"] = round.max_delta ? nlohmann::json(*round.max_delta) : nlohmann::json(nullptr);
  j["fidelity_t_max"] =
      round.fidelity ? nlohmann::json(round.fidelity->back()) : nlohmann::json(nullptr);
  return j;
}

}  // namespace krylovff
