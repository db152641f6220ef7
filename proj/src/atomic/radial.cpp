#include <algorithm>
#include <cmath>
#include <string>

#include "rydberg/atomic.hpp"
#include "rydberg/error.hpp"

namespace rydberg {

namespace {

// With r = x^2 and u(r) = sqrt(x) w(x) the radial equation u'' = g(r) u becomes
// w'' = Q(x) w with Q = (2l + 1/2)(2l + 3/2) / x^2 - 8 - 8 E x^2. The local
// wavelength in x is nearly constant, so a uniform x mesh resolves every lobe.
double numerov_q(double x, int l, double energy_ha) {
  const double a = 2.0 * l + 0.5;
  return a * (a + 1.0) / (x * x) - 8.0 - 8.0 * energy_ha * x * x;
}

}  // namespace

RadialWavefunction radial_wavefunction(double n_eff, int l, const RadialOptions& options) {
  if (!(n_eff > 0.0)) throw InvalidModelError("radial_wavefunction: n_eff must be positive");
  if (l < 0) throw InvalidModelError("radial_wavefunction: negative l");
  if (!(options.step > 0.0)) throw ResolutionError("radial_wavefunction: step must be positive");

  const double h = options.step;
  const double energy_ha = -0.5 / (n_eff * n_eff);
  const double ll1 = static_cast<double>(l) * (l + 1);

  const double r_out = 2.0 * n_eff * (n_eff + 15.0);
  const double r_turn = ll1 < n_eff * n_eff ? n_eff * n_eff - n_eff * std::sqrt(n_eff * n_eff - ll1)
                                            : n_eff * n_eff;
  const double r_in = options.min_inner_radius;
  const auto i_turn = static_cast<std::size_t>(std::floor(std::sqrt(0.5 * r_turn) / h));

  const auto i_out = static_cast<std::size_t>(std::ceil(std::sqrt(r_out) / h));
  const auto i_in = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(r_in) / h)));
  if (i_out < i_in + 16) {
    throw ResolutionError("radial_wavefunction: fewer than 16 mesh points for n*=" +
                          std::to_string(n_eff) + ", l=" + std::to_string(l));
  }

  const std::size_t count = i_out - i_in + 1;
  std::vector<double> w(count, 0.0);
  std::vector<double> f(count);  // 1 - h^2 Q / 12
  double worst = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double q = numerov_q(static_cast<double>(i_in + k) * h, l, energy_ha);
    f[k] = 1.0 - h * h * q / 12.0;
    if (i_in + k >= i_turn) worst = std::max(worst, std::abs(h * h * q / 12.0));
  }
  if (worst > 0.05) {
    throw ResolutionError("radial_wavefunction: mesh step " + std::to_string(h) +
                          " too coarse for n*=" + std::to_string(n_eff) + ", l=" + std::to_string(l));
  }

  // Start deep in the classically forbidden tail with the decaying WKB ratio.
  const double q_last = numerov_q(static_cast<double>(i_out) * h, l, energy_ha);
  w[count - 1] = 1e-30;
  w[count - 2] = w[count - 1] * std::exp(h * std::sqrt(std::max(q_last, 0.0)));
  // Below half the inner turning point, stop as soon as |u| grows inward (a
  // non-integer n* admits only the irregular solution there) or the mesh no
  // longer resolves the centrifugal barrier.
  std::size_t first = 0;
  for (std::size_t k = count - 2; k > 0; --k) {
    w[k - 1] = ((12.0 - 10.0 * f[k]) * w[k] - f[k + 1] * w[k + 1]) / f[k - 1];
    if (std::abs(w[k - 1]) > 1e250) {
      for (std::size_t j = k - 1; j < count; ++j) w[j] *= 1e-250;
    }
    const std::size_t i = i_in + k - 1;
    if (i < i_turn) {
      const double u_here = std::sqrt(static_cast<double>(i) * h) * std::abs(w[k - 1]);
      const double u_prev = std::sqrt(static_cast<double>(i + 1) * h) * std::abs(w[k]);
      if (u_here > u_prev || std::abs(1.0 - f[k - 1]) > 0.05) {
        first = k;
        break;
      }
    }
  }

  RadialWavefunction out;
  out.n_eff = n_eff;
  out.l = l;
  out.step = h;
  out.first_index = i_in + first;
  out.u.resize(count - first);
  for (std::size_t k = first; k < count; ++k) {
    out.u[k - first] = std::sqrt(static_cast<double>(i_in + k) * h) * w[k];
  }

  const double norm = radial_integral(out, out, 0);
  if (!std::isfinite(norm) || !(norm > 0.0)) {
    throw ResolutionError("radial_wavefunction: normalization failed for n*=" +
                          std::to_string(n_eff) + ", l=" + std::to_string(l));
  }
  const double scale = 1.0 / std::sqrt(norm);
  for (double& v : out.u) v *= scale;
  return out;
}

double radial_integral(const RadialWavefunction& a, const RadialWavefunction& b, int power) {
  if (a.step != b.step) {
    throw ResolutionError("radial_integral: wavefunctions sampled on different meshes");
  }
  const std::size_t lo = std::max(a.first_index, b.first_index);
  const std::size_t hi = std::min(a.last_index(), b.last_index());
  if (hi <= lo) return 0.0;

  // dr = 2 x dx; trapezoid weights on the x lattice.
  const double h = a.step;
  double sum = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double x = static_cast<double>(i) * h;
    const double r = x * x;
    double term = a.u[i - a.first_index] * b.u[i - b.first_index] * 2.0 * x;
    for (int p = 0; p < power; ++p) term *= r;
    if (i == lo || i + 1 == hi) term *= 0.5;
    sum += term;
  }
  return sum * h;
}

double radial_dipole_integral(const RydbergState& s1, const RydbergState& s2,
                              const QuantumDefectModel& model, const RadialOptions& options) {
  if (std::abs(s1.l - s2.l) != 1) {
    throw SelectionRuleError("radial_dipole_integral: " + s1.label() + " and " + s2.label() +
                             " are not dipole-connected (|l1 - l2| != 1)");
  }
  const auto a = radial_wavefunction(effective_n(s1, model), s1.l, options);
  const auto b = radial_wavefunction(effective_n(s2, model), s2.l, options);
  return radial_integral(a, b, 1);
}

}  // namespace rydberg
