#pragma once

// Adaptive Dormand-Prince 5(4) stepping for complex state vectors.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "rydberg/error.hpp"

namespace rydberg::ode {

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  // 0 picks a step from the span
  double min_step = 1e-12;    // relative to max(1, |t|)
  std::size_t max_steps = 50'000'000;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

/// Integrates y' = rhs(t, y, dydt) from t0 to t1 (either direction).
/// `observer(t, y)` runs after every accepted step and may throw to abort.
/// `step` carries the last successful step size in and out, so a caller can
/// integrate segment by segment without restarting the controller.
template <class Rhs, class Observer>
Stats integrate(Rhs&& rhs, Eigen::VectorXcd& y, double t0, double t1, const Options& options,
                Observer&& observer, double& step) {
  using Vec = Eigen::VectorXcd;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Stats stats;
  if (t1 == t0) return stats;
  const double direction = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  double h = step > 0.0 ? std::min(step, span) : (options.initial_step > 0.0 ? options.initial_step : span * 1e-3);

  const auto n = y.size();
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n);
  rhs(t0, y, k1);
  ++stats.evaluations;

  double t = t0;
  bool last = false;
  while (!last) {
    if (stats.accepted + stats.rejected >= options.max_steps) {
      throw StiffnessError("ode::integrate: step budget exhausted at t=" + std::to_string(t), t);
    }
    const double proposal = h;
    if (h >= std::abs(t1 - t)) {
      h = std::abs(t1 - t);
      last = true;
    }
    const double hs = direction * h;

    tmp = y + hs * a21 * k1;
    rhs(t + c2 * hs, tmp, k2);
    tmp = y + hs * (a31 * k1 + a32 * k2);
    rhs(t + c3 * hs, tmp, k3);
    tmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * hs, tmp, k4);
    tmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * hs, tmp, k5);
    tmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + hs, tmp, k6);
    y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + hs, y_new, k7);
    stats.evaluations += 6;

    tmp = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    // Max norm: unreachable components are identically zero and would dilute an RMS.
    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale =
          options.abs_tol + options.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err = std::max(err, std::abs(tmp[i]) / scale);
    }
    if (!std::isfinite(err)) {
      throw StiffnessError("ode::integrate: non-finite error estimate at t=" + std::to_string(t), t);
    }

    const double factor =
        err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    if (err <= 1.0) {
      t = last ? t1 : t + hs;
      y.swap(y_new);
      k1.swap(k7);
      ++stats.accepted;
      observer(t, static_cast<const Vec&>(y));
      h *= factor;
      step = last ? std::max(proposal, h) : h;
    } else {
      ++stats.rejected;
      last = false;
      h *= std::min(1.0, factor);
      if (h < options.min_step * std::max(1.0, std::abs(t))) {
        throw StiffnessError("ode::integrate: step size underflow at t=" + std::to_string(t), t);
      }
    }
  }
  return stats;
}

template <class Rhs>
Stats integrate(Rhs&& rhs, Eigen::VectorXcd& y, double t0, double t1, const Options& options) {
  double step = 0.0;
  return integrate(std::forward<Rhs>(rhs), y, t0, t1, options, [](double, const Eigen::VectorXcd&) {},
                   step);
}

}  // namespace rydberg::ode
