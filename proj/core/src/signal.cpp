#include "macrosync/signal.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace macrosync {

namespace {

constexpr double kPi = std::numbers::pi;

void fft_pow2(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / double(len) * (inverse ? 1.0 : -1.0);
    const Complex wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const Complex u = a[i + j];
        const Complex v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= double(n);
  }
}

// Bluestein's algorithm: re-expresses a length-n DFT as a convolution of
// power-of-two length.
void fft_bluestein(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the argument small.
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = sign * kPi * double(k2) / double(n);
    chirp[k] = Complex(std::cos(ang), std::sin(ang));
  }
  std::size_t m = std::bit_ceil(2 * n + 1);
  std::vector<Complex> x(m, Complex(0, 0)), y(m, Complex(0, 0));
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
  for (std::size_t k = 0; k < n; ++k) {
    y[k] = std::conj(chirp[k]);
    if (k != 0) y[m - k] = std::conj(chirp[k]);
  }
  fft_pow2(x, false);
  fft_pow2(y, false);
  for (std::size_t k = 0; k < m; ++k) x[k] *= y[k];
  fft_pow2(x, true);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  if (inverse) {
    for (auto& v : a) v /= double(n);
  }
}

}  // namespace

std::vector<double> hann_window(std::size_t n) {
  if (n < 2) {
    throw std::invalid_argument("hann_window: need at least two points");
  }
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = 0.5 * (1.0 - std::cos(2.0 * kPi * double(k) / double(n - 1)));
  }
  return w;
}

void fft(std::vector<Complex>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n == 0) return;
  if (std::has_single_bit(n)) {
    fft_pow2(data, inverse);
  } else {
    fft_bluestein(data, inverse);
  }
}

Spectrum spectrum_of(std::span<const Complex> samples, double dt) {
  const std::size_t n = samples.size();
  if (n < 8) {
    throw std::invalid_argument("spectrum: fewer than 8 samples in window");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("spectrum: sample spacing must be positive");
  }
  const auto w = hann_window(n);
  std::vector<Complex> buf(n);
  for (std::size_t k = 0; k < n; ++k) buf[k] = samples[k] * w[k];
  fft(buf, false);

  Spectrum s;
  s.freqs.resize(n);
  s.mags.resize(n);
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(n) / 2;
  const double domega = 2.0 * kPi / (double(n) * dt);
  for (std::size_t j = 0; j < n; ++j) {
    const std::ptrdiff_t k_signed = static_cast<std::ptrdiff_t>(j) - half;
    const std::size_t k = static_cast<std::size_t>(
        (k_signed + static_cast<std::ptrdiff_t>(n)) % static_cast<std::ptrdiff_t>(n));
    s.freqs[j] = domega * double(k_signed);
    s.mags[j] = std::abs(buf[k]);
  }
  return s;
}

Spectrum spectrum(const Trajectory& traj, Group group,
                  double window_fraction) {
  if (!(window_fraction > 0.0) || window_fraction > 1.0) {
    throw std::invalid_argument(
        "spectrum: window_fraction must lie in (0, 1]");
  }
  const auto& amps = group == Group::A ? traj.amps_a : traj.amps_b;
  const std::size_t n = amps.size();
  const std::size_t count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(window_fraction * double(n))));
  if (count > n) {
    throw std::invalid_argument("spectrum: window exceeds trajectory");
  }
  return spectrum_of(std::span<const Complex>(amps).subspan(n - count),
                     traj.dt());
}

std::optional<double> dominant_frequency(const Spectrum& s) {
  if (s.mags.empty()) {
    throw std::invalid_argument("dominant_frequency: empty spectrum");
  }
  double best_mag = 0.0;
  std::optional<double> best;
  for (std::size_t i = 0; i < s.mags.size(); ++i) {
    const double m = s.mags[i];
    if (m <= 0.0) continue;
    if (!best || m > best_mag ||
        (m == best_mag && std::abs(s.freqs[i]) < std::abs(*best))) {
      best_mag = m;
      best = s.freqs[i];
    }
  }
  return best;
}

}  // namespace macrosync
