#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "macrosync/signal.hpp"

#include <numbers>
#include <random>

using namespace macrosync;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<Complex> naive_dft(const std::vector<Complex>& x) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n, Complex(0, 0));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * kPi * double(j) * double(k) / double(n);
      out[k] += x[j] * Complex(std::cos(ang), std::sin(ang));
    }
  }
  return out;
}
}  // namespace

TEST_CASE("Hann window") {
  const auto w3 = hann_window(3);
  CHECK(w3[0] == 0.0);
  CHECK(w3[1] == doctest::Approx(1.0));
  CHECK(w3[2] == 0.0);

  for (std::size_t n : {2u, 17u, 256u}) {
    const auto w = hann_window(n);
    CHECK(w.front() == 0.0);
    CHECK(w.back() == 0.0);
  }

  // Closed-form sum: (n - 1) / 2.
  const auto w = hann_window(1001);
  double sum = 0.0;
  for (double v : w) sum += v;
  CHECK(sum == doctest::Approx(500.0).epsilon(1e-12));

  CHECK_THROWS_AS(hann_window(1), std::invalid_argument);
}

TEST_CASE("FFT agrees with the naive DFT at awkward lengths") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n : {8u, 12u, 50u, 100u, 625u}) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = Complex(u(rng), u(rng));
    const auto expect = naive_dft(x);
    auto got = x;
    fft(got);
    double maxerr = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      maxerr = std::max(maxerr, std::abs(got[k] - expect[k]));
    }
    CHECK(maxerr < 1e-9 * double(n));

    fft(got, /*inverse=*/true);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(got[k] - x[k]) < 1e-10 * double(n));
    }
  }
}

TEST_CASE("spectrum recovers a single tone in one bin") {
  const std::size_t n = 2000;
  const double dt = 0.1;
  const double w0 = 2.7;
  std::vector<Complex> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = std::exp(Complex(0, w0 * double(j) * dt));
  }
  const Spectrum s = spectrum_of(x, dt);
  const auto peak = dominant_frequency(s);
  REQUIRE(peak.has_value());
  CHECK(std::abs(*peak - w0) <= s.bin_width());

  // A negative tone lands on the negative axis.
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = std::exp(Complex(0, -w0 * double(j) * dt));
  }
  const auto neg = dominant_frequency(spectrum_of(x, dt));
  REQUIRE(neg.has_value());
  CHECK(std::abs(*neg + w0) <= s.bin_width());
}

TEST_CASE("decayed series produce a numerically flat spectrum") {
  const std::size_t n = 1024;
  std::vector<Complex> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = 1e-9 * std::exp(-0.05 * double(j));
  }
  const Spectrum s = spectrum_of(x, 0.1);
  double peak = 0.0;
  for (double m : s.mags) peak = std::max(peak, m);
  CHECK(peak < 1e-6 * double(n));
}

TEST_CASE("Parseval consistency of the windowed transform") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 300;
  std::vector<Complex> x(n);
  for (auto& v : x) v = Complex(u(rng), u(rng));

  const auto w = hann_window(n);
  double energy = 0.0;
  for (std::size_t j = 0; j < n; ++j) energy += std::norm(x[j] * w[j]);

  const Spectrum s = spectrum_of(x, 1.0);
  double spectral = 0.0;
  for (double m : s.mags) spectral += m * m;
  CHECK(spectral == doctest::Approx(double(n) * energy).epsilon(1e-10));
}

TEST_CASE("dominant frequency edge cases") {
  Spectrum s;
  s.freqs = {-2.0, -1.0, 0.0, 1.0, 2.0};
  s.mags = {0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK_FALSE(dominant_frequency(s).has_value());

  s.mags = {0.5, 1.0, 0.1, 1.0, 0.5};  // tie between -1 and +1
  const auto f = dominant_frequency(s);
  REQUIRE(f.has_value());
  CHECK(std::abs(*f) == 1.0);  // smallest |omega| among the tied bins

  s.mags = {0.5, 1.0, 0.1, 0.2, 0.5};
  CHECK(*dominant_frequency(s) == -1.0);

  CHECK_THROWS_AS(dominant_frequency(Spectrum{}), std::invalid_argument);
}

TEST_CASE("trajectory spectrum rejects undersized windows") {
  Trajectory traj;
  traj.times = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5};
  traj.amps_a.assign(10, Complex(1.0, 0.0));
  traj.amps_b = traj.amps_a;
  CHECK_THROWS_AS(spectrum(traj, Group::A, 0.2), std::invalid_argument);
  CHECK_NOTHROW(spectrum(traj, Group::A, 0.8));
}
