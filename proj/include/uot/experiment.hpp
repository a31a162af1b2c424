#pragma once

#include <map>
#include <optional>
#include <string>

#include "uot/io.hpp"
#include "uot/recon.hpp"

namespace uot {

inline constexpr const char* kVersion = "0.1.0";

/// Full description of one simulate-and-reconstruct experiment. Every field
/// maps to a key of the flat key=value config format; unknown keys are
/// errors.
struct ExperimentConfig {
  // grids (forward and reconstruction differ by default to avoid inverse
  // crimes)
  int nx_forward = 193;
  int ny_forward = 193;
  int nx_recon = 129;
  int ny_recon = 129;
  double x0 = 0.0;
  double y0 = 0.0;
  double lx = 5.0;
  double ly = 5.0;

  // medium
  std::string phantom = "disk_low";
  double mu_bar = 0.023;      // cm^-1
  double mus_prime = 10.74;   // cm^-1
  double gamma = 0.431;
  double alpha = 1.0;

  // source and detector
  std::string source_edge = "left";
  double source_magnitude = 1.0;
  double eta_x = 5.0;
  double eta_y = 2.5;

  // scan
  double scan_x0 = 0.5;
  double scan_y0 = 0.5;
  double scan_x1 = 4.5;
  double scan_y1 = 4.5;
  int scan_n1 = 100;
  int scan_n2 = 100;

  // ultrasound shape used for data generation
  std::string shape = "gaussian";  // or "perfect"
  double sigma1 = 0.1;
  double sigma2 = 0.1;

  // measurement generation
  std::string measurement_path = "adjoint";  // direct | adjoint | both
  double noise_level = 0.0;
  std::uint64_t noise_seed = 0;

  // reconstruction
  int recon_max_iters = 40;
  double recon_tol = 1e-4;
  double recon_relaxation = 1.0;
  double recon_mu_min = 1e-4;
  double recon_mu_max = 1.0;
  bool recon_smooth = false;

  // solver
  double cg_tol = 1e-10;
  int cg_max_iter = 0;  // 0 -> 10n

  // outputs
  std::string output_dir = "out";
  bool save_iterates = false;
  bool allow_inverse_crime = false;

  void validate() const;
  /// All fields as config keys, in declaration order.
  std::map<std::string, std::string> as_key_values() const;
};

/// Sets one key=value pair; throws ConfigError for unknown keys or
/// unparsable values.
void apply_config_key(ExperimentConfig& config, const std::string& key,
                      const std::string& value);

/// Flat key=value file ('#' comments, blank lines ignored).
ExperimentConfig parse_config_file(const std::string& path);

/// Named workflows from the numerical experiments: disk_low (40 iterations),
/// disk_high (70), multi (40), elongated (sigma 0.1 x 0.3 data).
ExperimentConfig preset_config(const std::string& name);

struct ExperimentResult {
  MeasurementSet measurements;
  ReconState recon;
  NodalField truth_on_recon_grid;
  double interior_l2_error = 0.0;   // mass-weighted, over U
  double direct_adjoint_dev = 0.0;  // only for measurement_path = both
};

/// Runs phantom -> forward -> measurements -> reconstruction, writing all
/// artifacts and a manifest.json under config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Stages that only produce data (used by the phantom/forward subcommands).
void run_phantom_stage(const ExperimentConfig& config);
MeasurementSet run_forward_stage(const ExperimentConfig& config);

}  // namespace uot
