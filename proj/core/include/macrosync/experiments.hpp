#pragma once

#include "macrosync/config_file.hpp"
#include "macrosync/cumulant.hpp"
#include "macrosync/microscopic.hpp"
#include "macrosync/stability.hpp"
#include "macrosync/sweeps.hpp"
#include "macrosync/svg.hpp"

#include <filesystem>
#include <string>
#include <vector>

// Experiment runner: one reproducible sweep per figure of the study, driven
// by a strict sectioned key = value configuration. All rates are expressed in
// units of gamma_minus; "scaled" couplings are in units of
// (gamma_minus + gamma_plus).
namespace macrosync {

struct AxisSpec {
  double min = 0.0;
  double max = 1.0;
  int count = 2;
};

struct ExperimentConfig {
  std::string id;

  ModelParams model{};
  IntegratorConfig integrator{};

  double spectrum_window = 0.5;
  double order_window_fraction = 0.1;
  double sync_threshold = 1e-3;
  double store_omega_max = 2.5;  // spectra rows kept within +-this
  double bitmap_threshold = 5e-3;
  int theta_nodes = 4096;
  int phi_nodes = 256;
  double v_max_scaled = 20.0;  // bisection bracket in (gamma-+gamma+) units
  Complex init_coherence_a{0.1, 0.0};
  Complex init_coherence_b{0.0, 0.0};

  AxisSpec delta_axis;
  AxisSpec k_axis;
  AxisSpec vab_axis;
  AxisSpec v_scaled_axis;
  AxisSpec gamma_ratio_axis;

  std::vector<double> v_scaled_values;
  std::vector<double> k_scaled_values;
  std::vector<double> gamma_ratio_values;
  std::vector<double> vab_over_v_values;
  std::vector<double> k_values;
  std::vector<double> v_values;
  std::vector<int> n_values;

  int workers = 0;
  double resolution_scale = 1.0;
};

/// Known experiment identifiers in a fixed order.
const std::vector<std::string>& experiment_ids();

/// Built-in defaults for one experiment id. Throws ConfigError on an unknown
/// id.
ExperimentConfig default_config(const std::string& id);

/// Applies config text over a config; every key must belong to the documented
/// schema ([provenance] is skipped). Throws ConfigError otherwise.
void apply_config_text(ExperimentConfig& cfg, const ConfigText& text);

/// Applies one "section.key=value" override.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// Full resolved configuration as config text (the metadata payload, and the
/// round-trip format accepted by apply_config_text).
ConfigText resolved_config_text(const ExperimentConfig& cfg);

struct ResultBundle {
  std::vector<std::filesystem::path> files;
  std::string metadata;
  std::size_t cells_total = 0;
  std::size_t cells_failed = 0;
  double wall_seconds = 0.0;
};

struct SimulationBudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runs the configured experiment and writes CSV payloads, deterministic SVG
/// heatmaps for matrix outputs, and a metadata file to out_dir. Throws
/// SimulationBudgetError when more than 1% of sweep cells fail.
ResultBundle run(const ExperimentConfig& cfg,
                 const std::filesystem::path& out_dir);

/// Deterministic SVG for a rectangular matrix CSV written by this module
/// (long form: row value, column value, cell value). Returns the SVG text.
std::string export_heatmap(const std::filesystem::path& matrix_csv,
                           ColorScale scale,
                           const std::filesystem::path& svg_out);

}  // namespace macrosync
