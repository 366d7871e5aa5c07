#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pam/covariance_models.hpp"
#include "pam/errors.hpp"
#include "pam/simulation_grid.hpp"

namespace pam::cli {

struct ModelSpec {
  std::string kind = "gaussian";  // riesz, gaussian, cauchy, white, tabulated
  int dimension = 1;
  double beta = 0.0;
  std::string table;  // CSV path for tabulated spectra
};

struct VerifySpec {
  bool limits = true;
  bool regression = true;
  bool normality = true;
  double slope_tolerance = 0.15;
  double max_skew = 0.2;
  double max_excess_kurtosis = 0.3;
  double max_ks = 0.05;
  std::size_t normality_min_samples = 500;
  // Widened bracket factors for the d = 1 finite-measure case.
  double bracket_lo = 0.5;
  double bracket_hi = 2.5;
  // 0 disables the z-score check against the limit covariance.
  double max_abs_z = 0.0;
  double quad_rel_tol = 1e-8;
};

struct RunConfig {
  ModelSpec model;
  GridSpec grid;
  std::vector<double> times{1.0};
  std::size_t replicas = 100;
  std::uint64_t seed = 1;
  bool zero_noise = false;
  double blow_up = 1e12;  // |U| threshold of the simulator
  VerifySpec verify;
  // Not part of the experiment identity.
  unsigned threads = 1;
  std::string out = "out";
  std::optional<std::uint32_t> ensemble_crc;

  CovarianceModel build_model() const;
  /// INI text of everything that determines results (no threads, no output
  /// directory, no integrity section). Parsing it gives back this config.
  std::string canonical() const;
  std::uint32_t hash() const;
};

struct ConfigIssue {
  std::string field;  // e.g. "grid.dt"
  int line = 0;       // 0 when the field is absent from the file
  std::string message;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> list);
  std::vector<ConfigIssue> issues;
};

/// Parses and validates; every problem is collected before throwing.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// canonical() plus an [integrity] section carrying the ensemble checksum.
std::string manifest_text(const RunConfig& cfg, std::optional<std::uint32_t> ensemble_crc);

}  // namespace pam::cli
