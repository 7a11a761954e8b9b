#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "catsync/coupling.hpp"
#include "catsync/dynamics.hpp"

namespace catsync {

/// Everything a CLI run needs. Text form is YAML; trig terms are rows
/// [kind, coeff, k1, k2, kw, kt].
struct RunConfig {
  CouplingSpec coupling;

  int n_phi = 64;
  int n_t = 256;

  int n_max = 3;
  int m_sum = 40;

  double dt = kDefaultDt;
  int n_iter = 100000;
  int n_transient = 1000;
  std::uint64_t seed = 1;
  int n_points = 10000;

  std::string method = "qr_direct";  // or perturbative, birkhoff_multiplier, both
  std::vector<double> sweep;         // empty: single run at coupling.epsilon
  bool find_epsilon_c = true;
  double tol = 1e-4;

  int trees_n_max = 5;
  int n_enum_max = 6;
  bool render = false;
  bool verify_trees = false;

  std::string output_dir = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses YAML text. Errors carry the field path and line number.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Deterministic YAML text; parse_config(write_config(c)) == c.
std::string write_config(const RunConfig& c);

/// Field-order independent JSON text of the result-relevant fields
/// (excludes the output directory).
std::string canonical_config(const RunConfig& c);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);

std::string config_hash(const RunConfig& c);

}  // namespace catsync
