#include "macrosync/experiments.hpp"

#include "macrosync/csv.hpp"
#include "macrosync/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace macrosync {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_doubles(const std::vector<double>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ",";
    out += fmt_full(vs[i]);
  }
  return out;
}

std::string join_ints(const std::vector<int>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(vs[i]);
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) {
    throw ConfigError("config: key " + key + " expects a list");
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key,
                                const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_int(key, item));
  }
  if (out.empty()) {
    throw ConfigError("config: key " + key + " expects a list");
  }
  return out;
}

int scaled_count(int count, double scale) {
  return std::max(2, static_cast<int>(std::lround(count * scale)));
}

std::vector<double> axis_points(const AxisSpec& axis, double scale) {
  return linspace(axis.min, axis.max, scaled_count(axis.count, scale));
}

double gamma_sum(const ModelParams& p) { return p.gamma_minus + p.gamma_plus; }

}  // namespace

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{
      "fig2a", "fig2b", "fig2c", "fig2d", "fig3",  "fig3d",
      "fig4",  "figS1", "figS2", "figS3", "figS4", "custom"};
  return ids;
}

ExperimentConfig default_config(const std::string& id) {
  ExperimentConfig c;
  c.id = id;
  c.model.gamma_minus = 1.0;
  c.model.gamma_plus = 0.5;
  c.integrator.t_final = 1000.0;
  c.integrator.n_samples = 10000;
  c.integrator.rel_tol = 1e-9;
  c.integrator.abs_tol = 1e-9;
  c.integrator.max_step = 0.1;

  if (id == "fig2a") {
    c.init_coherence_a = Complex(0.1, 0.2);
    c.integrator.t_final = 500.0;
    c.integrator.n_samples = 5000;
    c.v_scaled_values = {0.2, 0.6};
  } else if (id == "fig2b") {
    c.integrator.t_final = 5000.0;
    c.integrator.n_samples = 5000;
    c.order_window_fraction = 0.5;
    c.v_scaled_axis = {0.0, 1.0, 320};
  } else if (id == "fig2c") {
    c.integrator.t_final = 10000.0;
    c.integrator.n_samples = 10000;
    c.order_window_fraction = 0.1;  // last 1000 of 10000 samples
    c.gamma_ratio_axis = {0.05, 2.0, 255};
    c.v_scaled_axis = {0.004, 1.0, 255};
    c.k_scaled_values = {0.0, -0.1, 0.1};
  } else if (id == "fig2d") {
    c.model.omega = 0.1;
    c.gamma_ratio_values = {1.0, 0.5};
    c.k_scaled_values = {-0.1, 0.0, 0.1};
  } else if (id == "fig3") {
    c.model.v = 1.0;
    c.model.v_ab = 0.5;
    c.integrator.t_final = 1000.0;
    c.integrator.n_samples = 10000;
    c.order_window_fraction = 0.1;
    c.delta_axis = {-3.0, 3.0, 255};
  } else if (id == "fig3d") {
    c.model.v = 1.0;
    c.integrator.t_final = 1000.0;
    c.integrator.n_samples = 10000;
    c.order_window_fraction = 0.1;
    c.delta_axis = {-3.0, 3.0, 255};
    c.vab_axis = {0.0, 1.0, 255};
  } else if (id == "fig4") {
    c.model.v = 1.0;
    c.model.v_ab = 1.0;
    c.integrator.t_final = 500.0;
    c.integrator.n_samples = 10000;
    c.order_window_fraction = 0.1;  // last 1000 of 10000 samples
    c.delta_axis = {-15.0, 15.0, 255};
    c.k_axis = {-15.0, 15.0, 255};
  } else if (id == "figS1") {
    // Small per-pair coupling keeps the first-order expansion honest and
    // puts the off-resonant floor below the 5e-3 bitmap threshold.
    c.model.v_ab = 0.02;
    c.delta_axis = {-15.0, 15.0, 255};
    c.k_axis = {-15.0, 15.0, 255};
  } else if (id == "figS2") {
    c.model.v = 1.0;
    c.integrator.t_final = 1000.0;
    c.integrator.n_samples = 10000;
    c.order_window_fraction = 0.1;
    c.delta_axis = {-3.0, 3.0, 129};
    c.vab_over_v_values = {0.25, 0.5, 1.0, 1.5, 2.0};
  } else if (id == "figS3") {
    c.model.v = 1.0;
    c.model.v_ab = 1.0;
    c.integrator.t_final = 1000.0;
    c.integrator.n_samples = 10000;
    c.order_window_fraction = 0.1;
    c.delta_axis = {-15.0, 15.0, 129};
    c.k_values = {-10.0, -5.0, 0.0, 5.0, 10.0};
    c.store_omega_max = 12.0;
  } else if (id == "figS4") {
    // Coarse sampling: ten consecutive samples span 100 time units, so the
    // 1/e hold skips the short transient dip and reads the persistent decay.
    c.model.gamma_plus = 0.4;
    c.integrator.t_final = 2500.0;
    c.integrator.n_samples = 251;
    c.n_values = {100, 250, 500, 1000, 2000};
    c.v_values = {0.0, 0.75, 1.0, 1.25, 1.5};
  } else if (id == "custom") {
    c.integrator.t_final = 1000.0;
    c.integrator.n_samples = 10000;
    c.order_window_fraction = 0.1;
  } else {
    throw ConfigError("unknown experiment id '" + id + "'");
  }
  return c;
}

namespace {

void apply_entry(ExperimentConfig& c, const std::string& key,
                 const std::string& value) {
  auto d = [&] { return parse_double(key, value); };
  auto i = [&] { return parse_int(key, value); };

  if (key.rfind("provenance.", 0) == 0) return;  // informational section

  if (key == "experiment.id") {
    if (value != c.id) {
      throw ConfigError("config: experiment.id '" + value +
                        "' conflicts with requested experiment '" + c.id +
                        "'");
    }
    return;
  }

  if (key == "model.gamma_plus") c.model.gamma_plus = d();
  else if (key == "model.gamma_minus") c.model.gamma_minus = d();
  else if (key == "model.k") c.model.k = d();
  else if (key == "model.delta") c.model.delta = d();
  else if (key == "model.v") c.model.v = d();
  else if (key == "model.v_ab") c.model.v_ab = d();
  else if (key == "model.omega") c.model.omega = d();
  else if (key == "integrator.t_final") c.integrator.t_final = d();
  else if (key == "integrator.n_samples") c.integrator.n_samples = i();
  else if (key == "integrator.rel_tol") c.integrator.rel_tol = d();
  else if (key == "integrator.abs_tol") c.integrator.abs_tol = d();
  else if (key == "integrator.max_step") c.integrator.max_step = d();
  else if (key == "analysis.spectrum_window") c.spectrum_window = d();
  else if (key == "analysis.order_window_fraction")
    c.order_window_fraction = d();
  else if (key == "analysis.sync_threshold") c.sync_threshold = d();
  else if (key == "analysis.store_omega_max") c.store_omega_max = d();
  else if (key == "analysis.bitmap_threshold") c.bitmap_threshold = d();
  else if (key == "analysis.theta_nodes") c.theta_nodes = i();
  else if (key == "analysis.phi_nodes") c.phi_nodes = i();
  else if (key == "analysis.v_max_scaled") c.v_max_scaled = d();
  else if (key == "analysis.init_coherence_a_re")
    c.init_coherence_a.real(d());
  else if (key == "analysis.init_coherence_a_im")
    c.init_coherence_a.imag(d());
  else if (key == "analysis.init_coherence_b_re")
    c.init_coherence_b.real(d());
  else if (key == "analysis.init_coherence_b_im")
    c.init_coherence_b.imag(d());
  else if (key == "grid.delta_min") c.delta_axis.min = d();
  else if (key == "grid.delta_max") c.delta_axis.max = d();
  else if (key == "grid.delta_count") c.delta_axis.count = i();
  else if (key == "grid.k_min") c.k_axis.min = d();
  else if (key == "grid.k_max") c.k_axis.max = d();
  else if (key == "grid.k_count") c.k_axis.count = i();
  else if (key == "grid.vab_min") c.vab_axis.min = d();
  else if (key == "grid.vab_max") c.vab_axis.max = d();
  else if (key == "grid.vab_count") c.vab_axis.count = i();
  else if (key == "grid.v_scaled_min") c.v_scaled_axis.min = d();
  else if (key == "grid.v_scaled_max") c.v_scaled_axis.max = d();
  else if (key == "grid.v_scaled_count") c.v_scaled_axis.count = i();
  else if (key == "grid.gamma_ratio_min") c.gamma_ratio_axis.min = d();
  else if (key == "grid.gamma_ratio_max") c.gamma_ratio_axis.max = d();
  else if (key == "grid.gamma_ratio_count") c.gamma_ratio_axis.count = i();
  else if (key == "lists.v_scaled_values")
    c.v_scaled_values = parse_double_list(key, value);
  else if (key == "lists.k_scaled_values")
    c.k_scaled_values = parse_double_list(key, value);
  else if (key == "lists.gamma_ratio_values")
    c.gamma_ratio_values = parse_double_list(key, value);
  else if (key == "lists.vab_over_v_values")
    c.vab_over_v_values = parse_double_list(key, value);
  else if (key == "lists.k_values")
    c.k_values = parse_double_list(key, value);
  else if (key == "lists.v_values")
    c.v_values = parse_double_list(key, value);
  else if (key == "lists.n_values")
    c.n_values = parse_int_list(key, value);
  else if (key == "run.workers") c.workers = i();
  else if (key == "run.resolution_scale") c.resolution_scale = d();
  else
    throw ConfigError("config: unknown key '" + key + "'");
}

void validate_config(const ExperimentConfig& c) {
  c.model.validate();
  c.integrator.validate();
  for (const AxisSpec* a : {&c.delta_axis, &c.k_axis, &c.vab_axis,
                            &c.v_scaled_axis, &c.gamma_ratio_axis}) {
    if (a->count < 2) {
      throw ConfigError("config: axis resolution must be >= 2");
    }
    if (!std::isfinite(a->min) || !std::isfinite(a->max)) {
      throw ConfigError("config: axis range must be finite");
    }
  }
  if (!(c.resolution_scale > 0.0)) {
    throw ConfigError("config: resolution_scale must be > 0");
  }
  if (!(c.spectrum_window > 0.0) || c.spectrum_window > 1.0 ||
      !(c.order_window_fraction > 0.0) || c.order_window_fraction > 1.0) {
    throw ConfigError("config: window fractions must lie in (0, 1]");
  }
}

}  // namespace

void apply_config_text(ExperimentConfig& cfg, const ConfigText& text) {
  for (const auto& [key, value] : text.entries) {
    apply_entry(cfg, key, value);
  }
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("--set expects section.key=value, got '" + assignment +
                      "'");
  }
  apply_entry(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

ConfigText resolved_config_text(const ExperimentConfig& c) {
  ConfigText t;
  auto put = [&](const std::string& k, const std::string& v) {
    t.entries[k] = v;
  };
  put("experiment.id", c.id);
  put("model.gamma_plus", fmt_full(c.model.gamma_plus));
  put("model.gamma_minus", fmt_full(c.model.gamma_minus));
  put("model.k", fmt_full(c.model.k));
  put("model.delta", fmt_full(c.model.delta));
  put("model.v", fmt_full(c.model.v));
  put("model.v_ab", fmt_full(c.model.v_ab));
  put("model.omega", fmt_full(c.model.omega));
  put("integrator.t_final", fmt_full(c.integrator.t_final));
  put("integrator.n_samples", std::to_string(c.integrator.n_samples));
  put("integrator.rel_tol", fmt_full(c.integrator.rel_tol));
  put("integrator.abs_tol", fmt_full(c.integrator.abs_tol));
  put("integrator.max_step", fmt_full(c.integrator.max_step));
  put("analysis.spectrum_window", fmt_full(c.spectrum_window));
  put("analysis.order_window_fraction", fmt_full(c.order_window_fraction));
  put("analysis.sync_threshold", fmt_full(c.sync_threshold));
  put("analysis.store_omega_max", fmt_full(c.store_omega_max));
  put("analysis.bitmap_threshold", fmt_full(c.bitmap_threshold));
  put("analysis.theta_nodes", std::to_string(c.theta_nodes));
  put("analysis.phi_nodes", std::to_string(c.phi_nodes));
  put("analysis.v_max_scaled", fmt_full(c.v_max_scaled));
  put("analysis.init_coherence_a_re", fmt_full(c.init_coherence_a.real()));
  put("analysis.init_coherence_a_im", fmt_full(c.init_coherence_a.imag()));
  put("analysis.init_coherence_b_re", fmt_full(c.init_coherence_b.real()));
  put("analysis.init_coherence_b_im", fmt_full(c.init_coherence_b.imag()));
  put("grid.delta_min", fmt_full(c.delta_axis.min));
  put("grid.delta_max", fmt_full(c.delta_axis.max));
  put("grid.delta_count", std::to_string(c.delta_axis.count));
  put("grid.k_min", fmt_full(c.k_axis.min));
  put("grid.k_max", fmt_full(c.k_axis.max));
  put("grid.k_count", std::to_string(c.k_axis.count));
  put("grid.vab_min", fmt_full(c.vab_axis.min));
  put("grid.vab_max", fmt_full(c.vab_axis.max));
  put("grid.vab_count", std::to_string(c.vab_axis.count));
  put("grid.v_scaled_min", fmt_full(c.v_scaled_axis.min));
  put("grid.v_scaled_max", fmt_full(c.v_scaled_axis.max));
  put("grid.v_scaled_count", std::to_string(c.v_scaled_axis.count));
  put("grid.gamma_ratio_min", fmt_full(c.gamma_ratio_axis.min));
  put("grid.gamma_ratio_max", fmt_full(c.gamma_ratio_axis.max));
  put("grid.gamma_ratio_count", std::to_string(c.gamma_ratio_axis.count));
  if (!c.v_scaled_values.empty())
    put("lists.v_scaled_values", join_doubles(c.v_scaled_values));
  if (!c.k_scaled_values.empty())
    put("lists.k_scaled_values", join_doubles(c.k_scaled_values));
  if (!c.gamma_ratio_values.empty())
    put("lists.gamma_ratio_values", join_doubles(c.gamma_ratio_values));
  if (!c.vab_over_v_values.empty())
    put("lists.vab_over_v_values", join_doubles(c.vab_over_v_values));
  if (!c.k_values.empty()) put("lists.k_values", join_doubles(c.k_values));
  if (!c.v_values.empty()) put("lists.v_values", join_doubles(c.v_values));
  if (!c.n_values.empty()) put("lists.n_values", join_ints(c.n_values));
  put("run.workers", std::to_string(c.workers));
  put("run.resolution_scale", fmt_full(c.resolution_scale));
  return t;
}

namespace {

struct RunState {
  const ExperimentConfig& cfg;
  const std::filesystem::path& out;
  ResultBundle bundle;
  std::vector<std::string> failures;  // per-cell diagnostics for metadata

  void note_cells(std::size_t total, std::size_t failed) {
    bundle.cells_total += total;
    bundle.cells_failed += failed;
  }
  std::filesystem::path file(const std::string& name) {
    auto p = out / name;
    bundle.files.push_back(p);
    return p;
  }
};

TwoGroupProtocol protocol_from(const ExperimentConfig& c) {
  TwoGroupProtocol proto;
  proto.integrator = c.integrator;
  proto.spectrum_window = c.spectrum_window;
  proto.order_window_fraction = c.order_window_fraction;
  proto.sync_threshold = c.sync_threshold;
  proto.init_coherence_a = c.init_coherence_a;
  proto.init_coherence_b = c.init_coherence_b;
  return proto;
}

void write_heatmap_file(RunState& rs, const std::string& name,
                        const std::vector<double>& values, std::size_t rows,
                        std::size_t cols, ColorScale scale,
                        const std::string& title) {
  HeatmapOptions opt;
  opt.scale = scale;
  opt.title = title;
  const std::string svg = render_heatmap(values, rows, cols, opt);
  const auto path = rs.file(name);
  std::ofstream f(path, std::ios::binary);
  f << svg;
}

// Single-group trajectory: group B pinned to the dark state so the pair
// integrator spends its budget on group A.
Trajectory single_group_trajectory(const ModelParams& p, Complex coherence,
                                   const IntegratorConfig& integ,
                                   bool record_states = false) {
  MeanFieldState init{initial_with_coherence(coherence).matrix(),
                      Matrix3(projector(1, 1))};
  ModelParams q = p;
  q.v_ab = 0.0;
  q.delta = 0.0;
  return integrate(q, init, integ, record_states);
}

void run_fig2a(RunState& rs) {
  const auto& c = rs.cfg;
  CsvWriter w(rs.file("fig2a_amplitude.csv"));
  w.header({"v_over_gamma_sum", "time_gamma", "amp_re", "amp_im"});
  for (double vs : c.v_scaled_values) {
    ModelParams p = c.model;
    p.v = vs * gamma_sum(p);
    const Trajectory traj =
        single_group_trajectory(p, c.init_coherence_a, c.integrator);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      w.row({vs, traj.times[i], traj.amps_a[i].real(), traj.amps_a[i].imag()});
    }
  }
  w.close();
  rs.note_cells(c.v_scaled_values.size(), 0);
}

void run_fig2b(RunState& rs) {
  const auto& c = rs.cfg;
  const auto vs_axis = axis_points(c.v_scaled_axis, c.resolution_scale);
  struct Row {
    double order = kNan, c01 = kNan, c02 = kNan, c12 = kNan;
    bool failed = false;
  };
  std::vector<Row> rows(vs_axis.size());
  parallel_for(vs_axis.size(), c.workers, [&](std::size_t i) {
    ModelParams p = c.model;
    p.v = vs_axis[i] * gamma_sum(p);
    try {
      const Trajectory traj = single_group_trajectory(
          p, c.init_coherence_a, c.integrator, /*record_states=*/true);
      rows[i].order =
          order_parameter(traj, Group::A, c.order_window_fraction);
      const std::size_t n = traj.states.size();
      const std::size_t window = static_cast<std::size_t>(
          std::llround(c.order_window_fraction * double(n)));
      double a01 = 0, a02 = 0, a12 = 0;
      for (std::size_t s = n - window; s < n; ++s) {
        const Matrix3& rho = traj.states[s].rho_a;
        a01 += std::abs(rho(0, 1));
        a02 += std::abs(rho(0, 2));
        a12 += std::abs(rho(1, 2));
      }
      rows[i].c01 = a01 / double(window);
      rows[i].c02 = a02 / double(window);
      rows[i].c12 = a12 / double(window);
    } catch (const StiffnessError&) {
      rows[i].failed = true;
    }
  });
  CsvWriter w(rs.file("fig2b_order_parameter.csv"));
  w.header({"v_over_gamma_sum", "order_parameter", "coh_01_abs", "coh_02_abs",
            "coh_12_abs"});
  std::size_t failed = 0;
  for (std::size_t i = 0; i < vs_axis.size(); ++i) {
    if (rows[i].failed) {
      ++failed;
      rs.failures.push_back("fig2b cell " + std::to_string(i));
    }
    w.row({vs_axis[i], rows[i].order, rows[i].c01, rows[i].c02, rows[i].c12});
  }
  w.close();
  rs.note_cells(vs_axis.size(), failed);
}

void run_fig2c(RunState& rs) {
  const auto& c = rs.cfg;
  const auto ratios = axis_points(c.gamma_ratio_axis, c.resolution_scale);
  const auto vss = axis_points(c.v_scaled_axis, c.resolution_scale);
  std::vector<double> order(ratios.size() * vss.size(), kNan);
  std::vector<std::uint8_t> failed(order.size(), 0);
  parallel_for(order.size(), c.workers, [&](std::size_t cell) {
    const std::size_t iv = cell / ratios.size();
    const std::size_t ir = cell % ratios.size();
    ModelParams p = c.model;
    p.gamma_plus = ratios[ir] * p.gamma_minus;
    p.v = vss[iv] * gamma_sum(p);
    try {
      const Trajectory traj =
          single_group_trajectory(p, c.init_coherence_a, c.integrator);
      order[cell] = order_parameter(traj, Group::A, c.order_window_fraction);
    } catch (const StiffnessError&) {
      failed[cell] = 1;
    }
  });
  write_matrix_csv(rs.file("fig2c_order_parameter.csv"), "v_over_gamma_sum",
                   "gamma_ratio", {"order_parameter"}, vss, ratios, {&order});
  write_heatmap_file(rs, "fig2c_order_parameter.svg", order, vss.size(),
                     ratios.size(), ColorScale::Grayscale,
                     "order parameter");

  // Critical-coupling overlays from the stability analysis.
  CsvWriter w(rs.file("fig2c_critical_coupling.csv"));
  w.header({"k_over_gamma_sum", "gamma_ratio", "vc_over_gamma_sum"});
  for (double ks : c.k_scaled_values) {
    std::vector<double> vc(ratios.size(), kNan);
    parallel_for(ratios.size(), c.workers, [&](std::size_t ir) {
      ModelParams p = c.model;
      p.gamma_plus = ratios[ir] * p.gamma_minus;
      p.k = ks * gamma_sum(p);
      p.v_ab = 0.0;
      const auto crit = critical_coupling(p, c.v_max_scaled * gamma_sum(p));
      if (crit.value) vc[ir] = *crit.value / gamma_sum(p);
    });
    for (std::size_t ir = 0; ir < ratios.size(); ++ir) {
      w.row({ks, ratios[ir], vc[ir]});
    }
  }
  w.close();
  std::size_t nfailed = 0;
  for (auto f : failed) nfailed += f;
  rs.note_cells(order.size(), nfailed);
}

void run_fig2d(RunState& rs) {
  const auto& c = rs.cfg;
  CsvWriter w(rs.file("fig2d_phase_distribution.csv"));
  w.header({"gamma_ratio", "k_over_gamma_sum", "phi", "s"});
  const PhaseGrid grid{c.theta_nodes, c.phi_nodes};
  for (double ratio : c.gamma_ratio_values) {
    for (double ks : c.k_scaled_values) {
      ModelParams p = c.model;
      p.gamma_plus = ratio * p.gamma_minus;
      p.k = ks * gamma_sum(p);
      const DensityMatrix rho = driven_steady_state(p);
      const PhaseDistribution s = phase_distribution(rho.matrix(), grid);
      for (std::size_t i = 0; i < s.phis.size(); ++i) {
        w.row({ratio, ks, s.phis[i], s.values[i]});
      }
    }
  }
  w.close();
  rs.note_cells(c.gamma_ratio_values.size() * c.k_scaled_values.size(), 0);
}

struct DeltaSweepPoint {
  Spectrum spec_a, spec_b;
  TwoGroupCell cell;
  bool failed = false;
};

// Shared by fig3 / figS2 / figS3 columns: a delta sweep retaining spectra.
std::vector<DeltaSweepPoint> delta_sweep(const ExperimentConfig& c,
                                         const ModelParams& base,
                                         const std::vector<double>& deltas) {
  std::vector<DeltaSweepPoint> points(deltas.size());
  const TwoGroupProtocol proto = protocol_from(c);
  parallel_for(deltas.size(), c.workers, [&](std::size_t i) {
    ModelParams p = base;
    p.delta = deltas[i];
    try {
      MeanFieldState init{
          initial_with_coherence(proto.init_coherence_a).matrix(),
          initial_with_coherence(proto.init_coherence_b).matrix()};
      const Trajectory traj = integrate(p, init, proto.integrator);
      points[i].spec_a = spectrum(traj, Group::A, proto.spectrum_window);
      points[i].spec_b = spectrum(traj, Group::B, proto.spectrum_window);
      TwoGroupCell& cell = points[i].cell;
      cell.order_a =
          order_parameter(traj, Group::A, proto.order_window_fraction);
      cell.order_b =
          order_parameter(traj, Group::B, proto.order_window_fraction);
      cell.synced_a = cell.order_a >= proto.sync_threshold;
      cell.synced_b = cell.order_b >= proto.sync_threshold;
      cell.omega_a = dominant_frequency(points[i].spec_a);
      cell.omega_b = dominant_frequency(points[i].spec_b);
    } catch (const StiffnessError&) {
      points[i].failed = true;
    }
  });
  return points;
}

void write_delta_sweep(RunState& rs, const std::string& stem,
                       double column_value, const std::vector<double>& deltas,
                       const std::vector<DeltaSweepPoint>& points,
                       CsvWriter& spectra, CsvWriter& freqdiff) {
  const auto& c = rs.cfg;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const auto& pt = points[i];
    if (pt.failed) {
      ++failed;
      rs.failures.push_back(stem + " delta index " + std::to_string(i));
      continue;
    }
    for (std::size_t b = 0; b < pt.spec_a.freqs.size(); ++b) {
      if (std::abs(pt.spec_a.freqs[b]) > c.store_omega_max) continue;
      spectra.row({column_value, deltas[i], pt.spec_a.freqs[b],
                   pt.spec_a.mags[b], pt.spec_b.mags[b]});
    }
    const auto dw = pt.cell.frequency_difference();
    freqdiff.row({column_value, deltas[i], dw ? *dw : kNan, pt.cell.order_a,
                  pt.cell.order_b});
  }
  rs.note_cells(deltas.size(), failed);
}

void run_fig3(RunState& rs) {
  const auto& c = rs.cfg;
  const auto deltas = axis_points(c.delta_axis, c.resolution_scale);
  const auto points = delta_sweep(c, c.model, deltas);
  CsvWriter spectra(rs.file("fig3_spectra.csv"));
  spectra.header({"v_ab", "delta", "omega", "power_a", "power_b"});
  CsvWriter freqdiff(rs.file("fig3_frequency_difference.csv"));
  freqdiff.header({"v_ab", "delta", "freq_diff", "order_a", "order_b"});
  write_delta_sweep(rs, "fig3", c.model.v_ab, deltas, points, spectra,
                    freqdiff);
  spectra.close();
  freqdiff.close();
}

void run_fig3d(RunState& rs) {
  const auto& c = rs.cfg;
  const auto deltas = axis_points(c.delta_axis, c.resolution_scale);
  const auto vabs = axis_points(c.vab_axis, c.resolution_scale);
  const LockingMap map = locking_map(deltas, vabs, MapAxis::InterGroupCoupling,
                                     c.model, protocol_from(c), c.workers);
  write_matrix_csv(rs.file("fig3d_frequency_difference.csv"), "v_ab", "delta",
                   {"freq_diff", "order_min"}, vabs, deltas,
                   {&map.freq_diff, &map.order_min});
  write_heatmap_file(rs, "fig3d_frequency_difference.svg", map.freq_diff,
                     vabs.size(), deltas.size(), ColorScale::Diverging,
                     "frequency difference");
  std::size_t failed = 0;
  for (std::size_t i = 0; i < map.failed.size(); ++i) {
    if (map.failed[i]) {
      ++failed;
      rs.failures.push_back("fig3d cell " + std::to_string(i));
    }
  }
  rs.note_cells(map.cells(), failed);
}

void run_fig4(RunState& rs) {
  const auto& c = rs.cfg;
  const auto deltas = axis_points(c.delta_axis, c.resolution_scale);
  const auto ks = axis_points(c.k_axis, c.resolution_scale);
  const LockingMap map = locking_map(deltas, ks, MapAxis::LevelAsymmetry,
                                     c.model, protocol_from(c), c.workers);
  write_matrix_csv(rs.file("fig4_frequency_difference.csv"), "k", "delta",
                   {"freq_diff"}, ks, deltas, {&map.freq_diff});
  write_matrix_csv(rs.file("fig4_order_parameter.csv"), "k", "delta",
                   {"order_min"}, ks, deltas, {&map.order_min});
  write_matrix_csv(rs.file("fig4_relative_phase.csv"), "k", "delta",
                   {"relative_phase"}, ks, deltas, {&map.relative_phase});
  write_heatmap_file(rs, "fig4_frequency_difference.svg", map.freq_diff,
                     ks.size(), deltas.size(), ColorScale::Diverging,
                     "frequency difference");
  write_heatmap_file(rs, "fig4_order_parameter.svg", map.order_min, ks.size(),
                     deltas.size(), ColorScale::Grayscale, "order parameter");
  write_heatmap_file(rs, "fig4_relative_phase.svg", map.relative_phase,
                     ks.size(), deltas.size(), ColorScale::Diverging,
                     "relative phase");
  std::size_t failed = 0;
  for (std::size_t i = 0; i < map.failed.size(); ++i) {
    if (map.failed[i]) {
      ++failed;
      rs.failures.push_back("fig4 cell " + std::to_string(i));
    }
  }
  rs.note_cells(map.cells(), failed);
}

void run_figS1(RunState& rs) {
  const auto& c = rs.cfg;
  const auto deltas = axis_points(c.delta_axis, c.resolution_scale);
  const auto ks = axis_points(c.k_axis, c.resolution_scale);
  const PhaseGrid grid{c.theta_nodes, c.phi_nodes};
  const SyncBitmap map = sync_bitmap(deltas, ks, c.model, c.bitmap_threshold,
                                     grid, c.workers);
  std::vector<double> bitmap(map.synced.size());
  for (std::size_t i = 0; i < map.synced.size(); ++i) {
    bitmap[i] = map.synced[i] ? 1.0 : 0.0;
  }
  write_matrix_csv(rs.file("figS1_smax.csv"), "k", "delta", {"s_max"}, ks,
                   deltas, {&map.s_max});
  write_matrix_csv(rs.file("figS1_phimax.csv"), "k", "delta", {"phi_max"}, ks,
                   deltas, {&map.phi_max});
  write_matrix_csv(rs.file("figS1_bitmap.csv"), "k", "delta", {"synced"}, ks,
                   deltas, {&bitmap});
  write_heatmap_file(rs, "figS1_smax.svg", map.s_max, ks.size(), deltas.size(),
                     ColorScale::Grayscale, "max of s(phi_AB)");
  write_heatmap_file(rs, "figS1_phimax.svg", map.phi_max, ks.size(),
                     deltas.size(), ColorScale::Grayscale, "argmax phi_AB");
  write_heatmap_file(rs, "figS1_bitmap.svg", bitmap, ks.size(), deltas.size(),
                     ColorScale::Grayscale, "synced");
  rs.note_cells(map.synced.size(), 0);
}

void run_figS2(RunState& rs) {
  const auto& c = rs.cfg;
  const auto deltas = axis_points(c.delta_axis, c.resolution_scale);
  CsvWriter spectra(rs.file("figS2_spectra.csv"));
  spectra.header({"v_ab", "delta", "omega", "power_a", "power_b"});
  CsvWriter freqdiff(rs.file("figS2_frequency_difference.csv"));
  freqdiff.header({"v_ab", "delta", "freq_diff", "order_a", "order_b"});
  for (double ratio : c.vab_over_v_values) {
    ModelParams base = c.model;
    base.v_ab = ratio * base.v;
    const auto points = delta_sweep(c, base, deltas);
    write_delta_sweep(rs, "figS2", base.v_ab, deltas, points, spectra,
                      freqdiff);
  }
  spectra.close();
  freqdiff.close();
}

void run_figS3(RunState& rs) {
  const auto& c = rs.cfg;
  const auto deltas = axis_points(c.delta_axis, c.resolution_scale);
  CsvWriter spectra(rs.file("figS3_spectra.csv"));
  spectra.header({"k", "delta", "omega", "power_a", "power_b"});
  CsvWriter freqdiff(rs.file("figS3_frequency_difference.csv"));
  freqdiff.header({"k", "delta", "freq_diff", "order_a", "order_b"});
  for (double k : c.k_values) {
    ModelParams base = c.model;
    base.k = k;
    const auto points = delta_sweep(c, base, deltas);
    write_delta_sweep(rs, "figS3", k, deltas, points, spectra, freqdiff);
  }
  spectra.close();
  freqdiff.close();
}

void run_figS4(RunState& rs) {
  const auto& c = rs.cfg;
  const MomentState init =
      MomentState::from_density(default_initial(InitialKind::Perturbed)
                                    .matrix());
  struct Job {
    int n;  // 0 encodes the mean-field (N -> infinity) reference
    double v;
  };
  std::vector<Job> jobs;
  for (double v : c.v_values) {
    for (int n : c.n_values) jobs.push_back({n, v});
    jobs.push_back({0, v});
  }
  std::vector<AmplitudeSeries> series(jobs.size());
  std::vector<std::optional<double>> lifetimes(jobs.size());
  std::vector<std::uint8_t> failed(jobs.size(), 0);
  parallel_for(jobs.size(), c.workers, [&](std::size_t i) {
    ModelParams p = c.model;
    p.v = jobs[i].v;
    p.v_ab = 0.0;
    try {
      // derive() needs a site count; the mean-field path only uses the
      // N -> infinity tables.
      const CumulantSystem sys =
          CumulantSystem::derive(p, jobs[i].n > 0 ? jobs[i].n : 2);
      series[i] = jobs[i].n > 0
                      ? integrate_cumulant(sys, init, c.integrator)
                      : integrate_cumulant_meanfield(sys, init, c.integrator);
      lifetimes[i] = lifetime(series[i]);
    } catch (const StiffnessError&) {
      failed[i] = 1;
    }
  });

  CsvWriter lw(rs.file("figS4_lifetimes.csv"));
  lw.header({"n", "v", "lifetime_gamma"});
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (failed[i]) {
      rs.failures.push_back("figS4 job " + std::to_string(i));
      continue;
    }
    lw.row({double(jobs[i].n), jobs[i].v,
            lifetimes[i] ? *lifetimes[i] : kNan});
  }
  lw.close();

  CsvWriter aw(rs.file("figS4_amplitudes.csv"));
  aw.header({"n", "v", "time_gamma", "amp_abs"});
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (failed[i]) continue;
    const auto& s = series[i];
    const std::size_t stride =
        std::max<std::size_t>(1, s.times.size() / 600);
    for (std::size_t t = 0; t < s.times.size(); t += stride) {
      aw.row({double(jobs[i].n), jobs[i].v, s.times[t], s.abs_amps[t]});
    }
  }
  aw.close();

  // Linear fit of lifetime against N per coupling strength.
  CsvWriter fw(rs.file("figS4_fit.csv"));
  fw.header({"v", "slope", "intercept", "r_squared"});
  for (double v : c.v_values) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (jobs[i].v == v && jobs[i].n > 0 && !failed[i] && lifetimes[i]) {
        xs.push_back(double(jobs[i].n));
        ys.push_back(*lifetimes[i]);
      }
    }
    if (xs.size() < 2) {
      fw.row({v, kNan, kNan, kNan});
      continue;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double n = double(xs.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double fit = intercept + slope * xs[i];
      ss_res += (ys[i] - fit) * (ys[i] - fit);
      ss_tot += (ys[i] - mean) * (ys[i] - mean);
    }
    const double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : kNan;
    fw.row({v, slope, intercept, r2});
  }
  fw.close();

  std::size_t nfailed = 0;
  for (auto f : failed) nfailed += f;
  rs.note_cells(jobs.size(), nfailed);
}

void run_custom(RunState& rs) {
  const auto& c = rs.cfg;
  const TwoGroupProtocol proto = protocol_from(c);
  MeanFieldState init{initial_with_coherence(proto.init_coherence_a).matrix(),
                      initial_with_coherence(proto.init_coherence_b).matrix()};
  const Trajectory traj = integrate(c.model, init, proto.integrator);

  CsvWriter tw(rs.file("custom_trajectory.csv"));
  tw.header({"time_gamma", "amp_a_re", "amp_a_im", "amp_b_re", "amp_b_im"});
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    tw.row({traj.times[i], traj.amps_a[i].real(), traj.amps_a[i].imag(),
            traj.amps_b[i].real(), traj.amps_b[i].imag()});
  }
  tw.close();

  const Spectrum sa = spectrum(traj, Group::A, proto.spectrum_window);
  const Spectrum sb = spectrum(traj, Group::B, proto.spectrum_window);
  CsvWriter sw(rs.file("custom_spectra.csv"));
  sw.header({"omega", "power_a", "power_b"});
  for (std::size_t b = 0; b < sa.freqs.size(); ++b) {
    if (std::abs(sa.freqs[b]) > c.store_omega_max) continue;
    sw.row({sa.freqs[b], sa.mags[b], sb.mags[b]});
  }
  sw.close();

  const double order_a =
      order_parameter(traj, Group::A, proto.order_window_fraction);
  const double order_b =
      order_parameter(traj, Group::B, proto.order_window_fraction);
  const auto wa = dominant_frequency(sa);
  const auto wb = dominant_frequency(sb);
  CsvWriter cw(rs.file("custom_summary.csv"));
  cw.header({"order_a", "order_b", "omega_a", "omega_b", "relative_phase"});
  cw.row({order_a, order_b, wa ? *wa : kNan, wb ? *wb : kNan,
          std::remainder(std::arg(traj.amps_a.back()) -
                             std::arg(traj.amps_b.back()),
                         2.0 * std::numbers::pi)});
  cw.close();
  rs.note_cells(1, 0);
}

}  // namespace

ResultBundle run(const ExperimentConfig& cfg,
                 const std::filesystem::path& out_dir) {
  validate_config(cfg);
  std::filesystem::create_directories(out_dir);
  const auto start = std::chrono::steady_clock::now();

  RunState rs{cfg, out_dir, {}, {}};
  if (cfg.id == "fig2a") run_fig2a(rs);
  else if (cfg.id == "fig2b") run_fig2b(rs);
  else if (cfg.id == "fig2c") run_fig2c(rs);
  else if (cfg.id == "fig2d") run_fig2d(rs);
  else if (cfg.id == "fig3") run_fig3(rs);
  else if (cfg.id == "fig3d") run_fig3d(rs);
  else if (cfg.id == "fig4") run_fig4(rs);
  else if (cfg.id == "figS1") run_figS1(rs);
  else if (cfg.id == "figS2") run_figS2(rs);
  else if (cfg.id == "figS3") run_figS3(rs);
  else if (cfg.id == "figS4") run_figS4(rs);
  else if (cfg.id == "custom") run_custom(rs);
  else throw ConfigError("unknown experiment id '" + cfg.id + "'");

  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  rs.bundle.wall_seconds = elapsed;

  ConfigText meta = resolved_config_text(cfg);
  meta.entries["provenance.version"] = "0.1.0";
  meta.entries["provenance.wall_seconds"] = fmt_full(elapsed);
  meta.entries["provenance.cells_total"] =
      std::to_string(rs.bundle.cells_total);
  meta.entries["provenance.cells_failed"] =
      std::to_string(rs.bundle.cells_failed);
  for (std::size_t i = 0; i < rs.failures.size() && i < 100; ++i) {
    meta.entries["provenance.failure_" + std::to_string(i)] = rs.failures[i];
  }
  rs.bundle.metadata = serialize_config(meta);
  {
    std::ofstream f(out_dir / "metadata.txt", std::ios::binary);
    f << rs.bundle.metadata;
    rs.bundle.files.push_back(out_dir / "metadata.txt");
  }

  if (rs.bundle.cells_total > 0 &&
      double(rs.bundle.cells_failed) > 0.01 * double(rs.bundle.cells_total)) {
    throw SimulationBudgetError(
        "simulation error budget exceeded: " +
        std::to_string(rs.bundle.cells_failed) + " of " +
        std::to_string(rs.bundle.cells_total) + " cells failed");
  }
  return rs.bundle;
}

std::string export_heatmap(const std::filesystem::path& matrix_csv,
                           ColorScale scale,
                           const std::filesystem::path& svg_out) {
  std::ifstream in(matrix_csv, std::ios::binary);
  if (!in) {
    throw std::runtime_error("export_heatmap: cannot open " +
                             matrix_csv.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("export_heatmap: empty file");
  }
  std::vector<double> rows_axis, cols_axis, cells;
  auto parse_cell = [](const std::string& s) {
    if (s == "nan") return kNan;
    return std::strtod(s.c_str(), nullptr);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string r, c, v;
    if (!std::getline(ss, r, ',') || !std::getline(ss, c, ',') ||
        !std::getline(ss, v, ',')) {
      throw std::invalid_argument("export_heatmap: malformed row '" + line +
                                  "'");
    }
    const double rv = parse_cell(r);
    const double cv = parse_cell(c);
    if (rows_axis.empty() || rows_axis.back() != rv) rows_axis.push_back(rv);
    if (rows_axis.size() == 1) cols_axis.push_back(cv);
    cells.push_back(parse_cell(v));
  }
  const std::size_t nrows = rows_axis.size();
  const std::size_t ncols = cols_axis.size();
  if (nrows == 0 || ncols == 0 || cells.size() != nrows * ncols) {
    throw std::invalid_argument("export_heatmap: non-rectangular input");
  }
  HeatmapOptions opt;
  opt.scale = scale;
  opt.title = matrix_csv.stem().string();
  const std::string svg = render_heatmap(cells, nrows, ncols, opt);
  std::ofstream out(svg_out, std::ios::binary);
  out << svg;
  return svg;
}

}  // namespace macrosync
