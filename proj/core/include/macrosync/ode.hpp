#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

// Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)) over plain
// Eigen vectors of doubles. Shared by the mean-field and moment-equation
// integrators.
namespace macrosync {

struct OdeOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double max_step = 0.1;
};

struct StiffnessError : std::runtime_error {
  explicit StiffnessError(double t)
      : std::runtime_error("integration step size underflow at t = " +
                           std::to_string(t)),
        t_reached(t) {}
  double t_reached;
};

namespace detail {

template <class Vec>
double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double atol,
                  double rtol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale =
        atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double e = err[i] / scale;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 through every time in sample_times
/// (strictly increasing, first >= t0). Calls on_sample(index, t, y) at each
/// sample. Throws StiffnessError when the accepted step underflows.
template <class Vec, class Rhs, class Sampler>
void integrate_rk45(Rhs&& rhs, Vec y, double t0,
                    std::span<const double> sample_times,
                    const OdeOptions& opt, Sampler&& on_sample) {
  if (sample_times.empty()) return;

  // Dormand-Prince 5(4) tableau.
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                   a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                   a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

  double t = t0;
  Vec k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), k5(y.size()),
      k6(y.size()), k7(y.size()), ytmp(y.size()), ynew(y.size()),
      err(y.size());

  rhs(t, y, k1);
  double h = std::min(opt.max_step, sample_times.back() - t0);
  {
    // Crude initial step from the local derivative scale.
    double ynorm = 0.0, fnorm = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      ynorm = std::max(ynorm, std::abs(y[i]));
      fnorm = std::max(fnorm, std::abs(k1[i]));
    }
    if (fnorm > 0.0) {
      h = std::min(h, 0.01 * (ynorm + opt.abs_tol) / fnorm);
    }
    h = std::max(h, 1e-8);
  }

  std::size_t next = 0;
  while (next < sample_times.size()) {
    const double t_target = sample_times[next];
    if (t >= t_target - 1e-12 * std::max(1.0, std::abs(t_target))) {
      on_sample(next, t, y);
      ++next;
      continue;
    }
    double step = std::min({h, opt.max_step, t_target - t});
    bool accepted = false;
    while (!accepted) {
      if (!(step > 16.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(t)))) {
        throw StiffnessError(t);
      }
      ytmp = y + step * (a21 * k1);
      rhs(t + c2 * step, ytmp, k2);
      ytmp = y + step * (a31 * k1 + a32 * k2);
      rhs(t + c3 * step, ytmp, k3);
      ytmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * step, ytmp, k4);
      ytmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * step, ytmp, k5);
      ytmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + step, ytmp, k6);
      ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      rhs(t + step, ynew, k7);
      err = step *
            (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double en = detail::error_norm(err, y, ynew, opt.abs_tol, opt.rel_tol);
      if (!std::isfinite(en)) en = 1e10;
      if (en <= 1.0) {
        accepted = true;
        t += step;
        y.swap(ynew);
        k1.swap(k7);  // FSAL
        const double grow =
            en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
        h = step * std::clamp(grow, 0.2, 5.0);
        h = std::min(h, opt.max_step);
      } else {
        step *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
      }
    }
  }
}

}  // namespace macrosync
