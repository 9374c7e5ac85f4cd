#pragma once

#include "macrosync/dynamics.hpp"

#include <optional>
#include <vector>

// Windowed discrete Fourier analysis of complex amplitude time series.
namespace macrosync {

/// Hann weights w_k = 0.5 (1 - cos(2 pi k / (n-1))), k = 0..n-1. Requires
/// n >= 2; the endpoints are exactly zero.
std::vector<double> hann_window(std::size_t n);

/// In-place FFT of arbitrary length (radix-2 with a Bluestein fallback),
/// forward convention X_k = sum_j x_j exp(-2 pi i j k / n), no normalization.
void fft(std::vector<Complex>& data, bool inverse = false);

struct Spectrum {
  std::vector<double> freqs;  // angular frequencies, ascending, +/- range
  std::vector<double> mags;   // |FT| per bin

  double bin_width() const {
    return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0;
  }
};

/// DFT magnitudes of a Hann-windowed complex series sampled at spacing dt.
/// The frequency axis is angular (omega = 2 pi f) and covers negative and
/// positive frequencies. Throws if fewer than 8 samples are given.
Spectrum spectrum_of(std::span<const Complex> samples, double dt);

/// Spectrum of the trailing window_fraction of a trajectory's amplitudes.
Spectrum spectrum(const Trajectory& traj, Group group, double window_fraction);

/// Frequency of the maximum-magnitude bin; ties break toward the smallest
/// |omega|. Returns nothing for an all-zero spectrum.
std::optional<double> dominant_frequency(const Spectrum& s);

}  // namespace macrosync
