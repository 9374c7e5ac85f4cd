#include "macrosync/sweeps.hpp"

#include "macrosync/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace macrosync {

TwoGroupCell run_two_group_cell(const ModelParams& p,
                                const TwoGroupProtocol& proto) {
  TwoGroupCell cell;
  MeanFieldState init{
      initial_with_coherence(proto.init_coherence_a).matrix(),
      initial_with_coherence(proto.init_coherence_b).matrix()};
  const Trajectory traj = integrate(p, init, proto.integrator);

  cell.order_a = order_parameter(traj, Group::A, proto.order_window_fraction);
  cell.order_b = order_parameter(traj, Group::B, proto.order_window_fraction);
  cell.synced_a = cell.order_a >= proto.sync_threshold;
  cell.synced_b = cell.order_b >= proto.sync_threshold;
  cell.amp_final_a = traj.amps_a.back();
  cell.amp_final_b = traj.amps_b.back();
  cell.relative_phase = std::remainder(
      std::arg(cell.amp_final_a) - std::arg(cell.amp_final_b),
      2.0 * std::numbers::pi);
  cell.omega_a = dominant_frequency(spectrum(traj, Group::A,
                                             proto.spectrum_window));
  cell.omega_b = dominant_frequency(spectrum(traj, Group::B,
                                             proto.spectrum_window));
  return cell;
}

LockingMap locking_map(const std::vector<double>& delta_axis,
                       const std::vector<double>& second_axis,
                       MapAxis axis_kind, const ModelParams& base,
                       const TwoGroupProtocol& proto, int workers) {
  LockingMap map;
  map.delta_axis = delta_axis;
  map.second_axis = second_axis;
  map.axis_kind = axis_kind;
  const std::size_t nd = delta_axis.size();
  const std::size_t ns = second_axis.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  map.freq_diff.assign(nd * ns, nan);
  map.order_min.assign(nd * ns, 0.0);
  map.relative_phase.assign(nd * ns, nan);
  map.failed.assign(nd * ns, 0);

  {
    const std::size_t window = static_cast<std::size_t>(std::llround(
        proto.spectrum_window * double(proto.integrator.n_samples)));
    const double dt =
        proto.integrator.t_final / double(proto.integrator.n_samples - 1);
    map.bin_width = 2.0 * std::numbers::pi / (double(window) * dt);
  }

  parallel_for(nd * ns, workers, [&](std::size_t cell_idx) {
    const std::size_t is = cell_idx / nd;
    const std::size_t id = cell_idx % nd;
    ModelParams p = base;
    p.delta = delta_axis[id];
    if (axis_kind == MapAxis::InterGroupCoupling) {
      p.v_ab = second_axis[is];
    } else {
      p.k = second_axis[is];
    }
    try {
      const TwoGroupCell cell = run_two_group_cell(p, proto);
      map.order_min[cell_idx] = std::min(cell.order_a, cell.order_b);
      if (const auto dw = cell.frequency_difference()) {
        map.freq_diff[cell_idx] = *dw;
        map.relative_phase[cell_idx] = cell.relative_phase;
      }
    } catch (const StiffnessError&) {
      map.failed[cell_idx] = 1;
    }
  });
  return map;
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 2) {
    throw std::invalid_argument("linspace: need at least two points");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * double(i) / double(count - 1);
  }
  return out;
}

}  // namespace macrosync
