#include "rydberg/weakfield.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "rydberg/error.hpp"
#include "rydberg/ode.hpp"

namespace rydberg {

namespace {

constexpr double kEuler = 0.57721566490153286061;

struct BesselPair {
  double k0;
  double k1;
};

// Series around the origin, good to a few ulp for x <= 2.
BesselPair bessel_series(double x) {
  const double y = 0.25 * x * x;
  const double log_term = std::log(0.5 * x) + kEuler;

  // K0 = -(ln(x/2) + gamma) I0 + sum_k y^k / (k!)^2 H_k
  double term = 1.0;  // y^k / (k!)^2
  double harmonic = 0.0;
  double i0 = 1.0;
  double k0_sum = 0.0;
  // K1 = 1/x + ln(x/2) I1 - (x/4) sum_k [psi(k+1) + psi(k+2)] y^k / (k!(k+1)!)
  double term1 = 1.0;  // y^k / (k! (k+1)!)
  double i1_sum = 1.0;
  double psi_sum = -2.0 * kEuler + 1.0;  // psi(1) + psi(2)
  double k1_sum = psi_sum;
  for (int k = 1; k < 60; ++k) {
    term *= y / (static_cast<double>(k) * k);
    term1 *= y / (static_cast<double>(k) * (k + 1));
    harmonic += 1.0 / k;
    psi_sum += 1.0 / k + 1.0 / (k + 1);
    i0 += term;
    k0_sum += term * harmonic;
    i1_sum += term1;
    k1_sum += term1 * psi_sum;
    if (term < 1e-18 * i0 && term1 < 1e-18 * i1_sum) break;
  }
  const double i1 = 0.5 * x * i1_sum;
  return {-log_term * i0 + k0_sum, 1.0 / x + std::log(0.5 * x) * i1 - 0.25 * x * k1_sum};
}

// Steed's continued fraction (CF2) for K_0 and K_1 at x >= 2.
BesselPair bessel_continued_fraction(double x) {
  constexpr double eps = 1e-17;
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i < 100000; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps) break;
  }
  h *= a1;
  const double k0 = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) / s;
  const double k1 = k0 * (x + 0.5 - h) / x;
  return {k0, k1};
}

BesselPair bessel_pair(double x) {
  if (!(x > 0.0)) {
    throw DomainError("modified Bessel K: argument must be positive, got " + std::to_string(x));
  }
  return x <= 2.0 ? bessel_series(x) : bessel_continued_fraction(x);
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Bracket b = lambda sgn(kappa) K0 -+ K1 and its derivative w.r.t. x = 1/|kappa|.
double bracket(const WeakCouplingChannel& ch, double kappa, const BesselPair& k) {
  const double s = ch.lambda * sign_of(kappa);
  return ch.target == Sublevel::Plus ? s * k.k0 - k.k1 : s * k.k0 + k.k1;
}

}  // namespace

double bessel_k0(double x) { return bessel_pair(x).k0; }
double bessel_k1(double x) { return bessel_pair(x).k1; }

double bessel_k(int order, double x) {
  if (order == 0) return bessel_k0(x);
  if (order == 1) return bessel_k1(x);
  throw DomainError("bessel_k: only orders 0 and 1 are implemented");
}

std::complex<double> driving_function(double kappa, double tau) {
  const double s = kappa * tau;
  const double denom = std::pow(s * s + 1.0, 1.5);
  return {s / denom, -1.0 / denom};
}

ChannelProbability analytic_probability(const WeakCouplingChannel& channel, double kappa) {
  if (channel.eta < 0.0) throw DomainError("analytic_probability: eta must be non-negative");
  if (kappa == 0.0) return {0.0, true};
  const double x = 1.0 / std::abs(kappa);
  const auto k = bessel_pair(x);
  const double b = bracket(channel, kappa, k);
  const double x2 = x * x;
  return {4.0 * channel.eta * channel.eta * x2 * x2 * b * b, false};
}

double analytic_probability_derivative(const WeakCouplingChannel& channel, double kappa) {
  if (kappa == 0.0) return 0.0;
  const double x = 1.0 / std::abs(kappa);
  const auto k = bessel_pair(x);
  const double s = channel.lambda * sign_of(kappa);
  const double pm = channel.target == Sublevel::Plus ? -1.0 : 1.0;
  const double b = s * k.k0 + pm * k.k1;
  // d/dx of b with K0' = -K1 and K1' = -K0 - K1/x.
  const double db_dx = -s * k.k1 + pm * (-k.k0 - k.k1 / x);
  const double x3 = x * x * x;
  const double dp_dx = 4.0 * channel.eta * channel.eta * (4.0 * x3 * b * b + 2.0 * x3 * x * b * db_dx);
  // dx/dkappa = -sgn(kappa) / kappa^2 = -sgn(kappa) x^2
  return dp_dx * (-sign_of(kappa) * x * x);
}

Peak find_peak(const WeakCouplingChannel& channel) {
  if (!(channel.eta > 0.0)) throw DomainError("find_peak: eta must be positive");
  const double branch = channel.target == Sublevel::Minus ? channel.lambda : -channel.lambda;

  // Golden-section search on log|kappa|, then polish the stationary point by
  // bisection on the closed-form derivative.
  auto p_of = [&](double log_k) {
    return analytic_probability(channel, branch * std::exp(log_k)).probability;
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(1e-2);
  double hi = std::log(1e2);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = p_of(x1);
  double f2 = p_of(x2);
  while (hi - lo > 1e-6) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = p_of(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = p_of(x1);
    }
  }

  double a = std::exp(lo) * 0.999;
  double b = std::exp(hi) * 1.001;
  auto slope = [&](double mag) { return analytic_probability_derivative(channel, branch * mag) * branch; };
  double sa = slope(a);
  if (sa <= 0.0 || slope(b) >= 0.0) {
    const double k = branch * 0.5 * (std::exp(lo) + std::exp(hi));
    return {k, analytic_probability(channel, k).probability};
  }
  for (int i = 0; i < 200 && b - a > 4.0 * std::numeric_limits<double>::epsilon() * b; ++i) {
    const double mid = 0.5 * (a + b);
    const double sm = slope(mid);
    if (sm == 0.0) {
      a = b = mid;
      break;
    }
    if ((sm > 0.0) == (sa > 0.0)) {
      a = mid;
      sa = sm;
    } else {
      b = mid;
    }
  }
  const double k = branch * 0.5 * (a + b);
  return {k, analytic_probability(channel, k).probability};
}

std::vector<std::vector<std::complex<double>>> weak_ode_solution(
    const std::vector<WeakCouplingChannel>& channels, double kappa,
    const std::vector<double>& tau_grid, double rel_tol, double abs_tol) {
  std::vector<std::vector<std::complex<double>>> out;
  if (tau_grid.empty()) return out;
  const auto n = static_cast<Eigen::Index>(channels.size());
  const std::complex<double> i_unit(0.0, 1.0);

  auto rhs = [&](double tau, const Eigen::VectorXcd& c, Eigen::VectorXcd& dc) {
    const auto f = driving_function(kappa, tau);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& ch = channels[static_cast<std::size_t>(j)];
      const auto drive = ch.target == Sublevel::Plus ? f : -std::conj(f);
      dc[j] = -i_unit * static_cast<double>(ch.lambda) * c[j] + i_unit * ch.eta * drive;
    }
  };

  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n);
  ode::Options options;
  options.rel_tol = rel_tol;
  options.abs_tol = abs_tol;
  double step = 0.0;
  auto snapshot = [&] { out.emplace_back(c.data(), c.data() + c.size()); };
  snapshot();
  for (std::size_t g = 1; g < tau_grid.size(); ++g) {
    ode::integrate(rhs, c, tau_grid[g - 1], tau_grid[g], options,
                   [](double, const Eigen::VectorXcd&) {}, step);
    snapshot();
  }
  return out;
}

}  // namespace rydberg
