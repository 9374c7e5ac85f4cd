#pragma once

#include "macrosync/dynamics.hpp"
#include "macrosync/signal.hpp"

#include <cstdint>
#include <optional>
#include <vector>

// Per-cell two-group integration protocol and parameter-plane sweeps built
// from it (frequency-locking maps, order-parameter maps, relative phase).
namespace macrosync {

struct TwoGroupProtocol {
  IntegratorConfig integrator{};
  double spectrum_window = 0.5;      // trailing fraction used for the DFT
  double order_window_fraction = 0.1;  // trailing fraction for |<S^+>|_t
  double sync_threshold = 1e-3;      // below this the group counts as silent
  Complex init_coherence_a{0.1, 0.0};  // group A starts perturbed
  Complex init_coherence_b{0.0, 0.0};  // group B starts uniform
};

struct TwoGroupCell {
  double order_a = 0.0;
  double order_b = 0.0;
  std::optional<double> omega_a;  // dominant frequencies (absent when silent)
  std::optional<double> omega_b;
  Complex amp_final_a{0.0, 0.0};
  Complex amp_final_b{0.0, 0.0};
  double relative_phase = 0.0;  // arg<S^+>_A - arg<S^+>_B at the final time
  bool synced_a = false;
  bool synced_b = false;
  bool failed = false;

  bool both_synced() const { return synced_a && synced_b; }
  std::optional<double> frequency_difference() const {
    if (!both_synced() || !omega_a || !omega_b) return std::nullopt;
    return *omega_a - *omega_b;
  }
};

/// Integrates one parameter point with the standard two-group protocol and
/// extracts order parameters, dominant frequencies and the final relative
/// phase.
TwoGroupCell run_two_group_cell(const ModelParams& p,
                                const TwoGroupProtocol& proto);

enum class MapAxis { InterGroupCoupling, LevelAsymmetry };

struct LockingMap {
  std::vector<double> delta_axis;
  std::vector<double> second_axis;  // v_ab or k values
  MapAxis axis_kind = MapAxis::InterGroupCoupling;
  // Row-major [second_index * delta_count + delta_index]; NaN marks cells
  // where either group is below the sync threshold.
  std::vector<double> freq_diff;
  std::vector<double> order_min;
  std::vector<double> relative_phase;  // NaN on unsynced cells
  std::vector<std::uint8_t> failed;
  double bin_width = 0.0;

  std::size_t cells() const { return delta_axis.size() * second_axis.size(); }
};

/// Sweeps the (delta, second-axis) plane; each cell runs the two-group
/// protocol independently (parallel over cells). Integration failures are
/// recorded per cell, not fatal.
LockingMap locking_map(const std::vector<double>& delta_axis,
                       const std::vector<double>& second_axis,
                       MapAxis axis_kind, const ModelParams& base,
                       const TwoGroupProtocol& proto, int workers = 0);

/// Uniform inclusive grid helper.
std::vector<double> linspace(double lo, double hi, int count);

}  // namespace macrosync
