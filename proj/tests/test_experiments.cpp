#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "macrosync/csv.hpp"
#include "macrosync/experiments.hpp"

#include <filesystem>
#include <fstream>

using namespace macrosync;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("macrosync_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto cfg = parse_config(
      "# comment\n[model]\nk = 1.5\n\n[integrator]\nn_samples = 100\n");
  CHECK(cfg.entries.at("model.k") == "1.5");
  CHECK(cfg.entries.at("integrator.n_samples") == "100");

  CHECK_THROWS_AS(parse_config("[model\nk = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("novalue\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[a]\nx = 1\nx = 2\n"), ConfigError);
}

TEST_CASE("unknown keys are rejected, provenance is ignored") {
  ExperimentConfig cfg = default_config("custom");
  ConfigText text;
  text.entries["model.k"] = "2.0";
  text.entries["provenance.version"] = "9.9.9";
  CHECK_NOTHROW(apply_config_text(cfg, text));
  CHECK(cfg.model.k == 2.0);

  text.entries["model.unknown_knob"] = "1";
  CHECK_THROWS_AS(apply_config_text(cfg, text), ConfigError);

  CHECK_THROWS_AS(apply_override(cfg, "integrator.t_final"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "integrator.t_final=abc"), ConfigError);
  CHECK_NOTHROW(apply_override(cfg, "integrator.t_final=123"));
  CHECK(cfg.integrator.t_final == 123.0);
}

TEST_CASE("unknown experiment id") {
  CHECK_THROWS_AS(default_config("fig99"), ConfigError);
}

TEST_CASE("number formatting is pinned") {
  CHECK(format_number(1.0) == "1.000000000000e+00");
  CHECK(format_number(-0.03125) == "-3.125000000000e-02");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("custom run: trivially silent point produces a valid bundle") {
  const auto dir = temp_dir("custom");
  ExperimentConfig cfg = default_config("custom");
  cfg.integrator.t_final = 50.0;
  cfg.integrator.n_samples = 500;
  cfg.workers = 2;
  // V = V_AB = 0: amplitudes decay to zero.
  const auto bundle = run(cfg, dir);
  CHECK(bundle.cells_failed == 0);
  CHECK(fs::exists(dir / "custom_trajectory.csv"));
  CHECK(fs::exists(dir / "custom_spectra.csv"));
  CHECK(fs::exists(dir / "custom_summary.csv"));
  CHECK(fs::exists(dir / "metadata.txt"));

  const std::string traj = slurp(dir / "custom_trajectory.csv");
  CHECK(traj.find("time_gamma,amp_a_re,amp_a_im,amp_b_re,amp_b_im") == 0);
  CHECK(traj.find("\r\n") == std::string::npos);  // LF endings only
  // Final amplitude row is numerically dead.
  const auto last_comma = traj.find_last_of(',');
  const double last_val = std::strtod(traj.c_str() + last_comma + 1, nullptr);
  CHECK(std::abs(last_val) < 1e-8);
}

TEST_CASE("determinism: identical bytes across repeated runs") {
  ExperimentConfig cfg = default_config("fig2b");
  cfg.integrator.t_final = 200.0;
  cfg.integrator.n_samples = 400;
  cfg.v_scaled_axis.count = 8;
  cfg.workers = 2;

  const auto dir1 = temp_dir("det1");
  const auto dir2 = temp_dir("det2");
  run(cfg, dir1);
  cfg.workers = 1;  // scheduling must not affect the payload
  run(cfg, dir2);
  CHECK(slurp(dir1 / "fig2b_order_parameter.csv") ==
        slurp(dir2 / "fig2b_order_parameter.csv"));
}

TEST_CASE("metadata round-trips to an identical payload") {
  const auto dir1 = temp_dir("meta1");
  ExperimentConfig cfg = default_config("fig2d");
  cfg.phi_nodes = 64;
  cfg.theta_nodes = 256;
  run(cfg, dir1);

  ExperimentConfig reloaded = default_config("fig2d");
  apply_config_text(reloaded, load_config_file(dir1 / "metadata.txt"));
  const auto dir2 = temp_dir("meta2");
  run(reloaded, dir2);
  CHECK(slurp(dir1 / "fig2d_phase_distribution.csv") ==
        slurp(dir2 / "fig2d_phase_distribution.csv"));
}

TEST_CASE("reduced fig2b shows the sharp transition") {
  const auto dir = temp_dir("fig2b");
  ExperimentConfig cfg = default_config("fig2b");
  cfg.resolution_scale = 0.25;  // 80 coupling values
  cfg.workers = 2;
  const auto bundle = run(cfg, dir);
  CHECK(bundle.cells_total == 80);
  CHECK(bundle.cells_failed == 0);

  // Parse the order-parameter column; expect dead values at small coupling
  // and a jump to finite values past the transition.
  std::ifstream in(dir / "fig2b_order_parameter.csv");
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> vs, order;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    vs.push_back(std::strtod(line.substr(0, c1).c_str(), nullptr));
    order.push_back(std::strtod(line.substr(c1 + 1, c2 - c1 - 1).c_str(),
                                nullptr));
  }
  REQUIRE(vs.size() == 80);
  double below = 0.0, above = 0.0;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i] < 0.25) below = std::max(below, order[i]);
    if (vs[i] > 0.45) above = std::min(above == 0.0 ? 1e9 : above, order[i]);
  }
  CHECK(below < 1e-4);
  CHECK(above > 0.05);
}

TEST_CASE("tiny locking map keeps the zero-detuning column locked") {
  const auto dir = temp_dir("fig3d");
  ExperimentConfig cfg = default_config("fig3d");
  cfg.delta_axis = {-1.0, 1.0, 9};
  cfg.vab_axis = {0.3, 0.5, 2};
  cfg.integrator.t_final = 400.0;
  cfg.integrator.n_samples = 4000;
  cfg.workers = 2;
  const auto bundle = run(cfg, dir);
  CHECK(bundle.cells_failed == 0);
  CHECK(fs::exists(dir / "fig3d_frequency_difference.svg"));

  // The delta = 0 column must be synchronized with zero difference.
  std::ifstream in(dir / "fig3d_frequency_difference.csv");
  std::string line;
  std::getline(in, line);
  bool found_zero = false;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const double vab = std::strtod(line.substr(0, c1).c_str(), nullptr);
    const double delta =
        std::strtod(line.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr);
    (void)vab;
    if (std::abs(delta) < 1e-12) {
      const auto c3 = line.find(',', c2 + 1);
      const std::string cell = line.substr(c2 + 1, c3 - c2 - 1);
      CHECK(cell != "nan");
      CHECK(std::abs(std::strtod(cell.c_str(), nullptr)) < 1e-9);
      found_zero = true;
    }
  }
  CHECK(found_zero);
}

TEST_CASE("heatmap rendering") {
  SUBCASE("two-by-two extremes") {
    HeatmapOptions opt;
    const std::string svg = render_heatmap({0.0, 1.0, 1.0, 0.0}, 2, 2, opt);
    // Four cells, extreme colors on the diagonal.
    CHECK(std::count(svg.begin(), svg.end(), '\n') >= 5);
    CHECK(svg.find("#000000") != std::string::npos);
    CHECK(svg.find("#ffffff") != std::string::npos);
    std::size_t rects = 0;
    for (std::size_t pos = 0; (pos = svg.find("<rect", pos)) != std::string::npos;
         ++pos) {
      ++rects;
    }
    CHECK(rects == 4);
  }

  SUBCASE("constant input renders a single color") {
    HeatmapOptions opt;
    const std::string svg = render_heatmap({2.5, 2.5, 2.5, 2.5}, 2, 2, opt);
    std::size_t grays = 0;
    for (std::size_t pos = 0; (pos = svg.find("#808080", pos)) != std::string::npos;
         ++pos) {
      ++grays;
    }
    CHECK(grays == 4);
  }

  SUBCASE("NaN cells are black in a diverging map") {
    HeatmapOptions opt;
    opt.scale = ColorScale::Diverging;
    const std::string svg = render_heatmap(
        {-1.0, std::numeric_limits<double>::quiet_NaN(), 0.0, 1.0}, 2, 2, opt);
    CHECK(svg.find("#000000") != std::string::npos);
  }

  SUBCASE("non-rectangular input is rejected") {
    CHECK_THROWS_AS(render_heatmap({1.0, 2.0, 3.0}, 2, 2, HeatmapOptions{}),
                    std::invalid_argument);
  }

  SUBCASE("deterministic bytes and file export") {
    const auto dir = temp_dir("svg");
    {
      CsvWriter w(dir / "m.csv");
      w.header({"row", "col", "value"});
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 3; ++c) {
          w.row({double(r), double(c), double(r * 3 + c)});
        }
      }
      w.close();
    }
    const std::string svg1 =
        export_heatmap(dir / "m.csv", ColorScale::Grayscale, dir / "m.svg");
    const std::string svg2 =
        export_heatmap(dir / "m.csv", ColorScale::Grayscale, dir / "m2.svg");
    CHECK(svg1 == svg2);
    CHECK(slurp(dir / "m.svg") == svg1);
  }
}

TEST_CASE("resolved config text covers every applied key") {
  // Every key emitted into metadata must be accepted back by the loader.
  for (const auto& id : experiment_ids()) {
    ExperimentConfig cfg = default_config(id);
    const ConfigText text = resolved_config_text(cfg);
    ExperimentConfig again = default_config(id);
    CHECK_NOTHROW(apply_config_text(again, text));
  }
}
