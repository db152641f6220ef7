#pragma once

// Weak-coupling (first-order) description of the fly-by: each |n'p,+-1>
// channel is driven independently by the scaled Coulomb field F(tau) while the
// atom stays in |ns>.

#include <complex>
#include <vector>

namespace rydberg {

/// Modified Bessel functions of the second kind, x > 0 (DomainError otherwise).
/// Power series up to x = 2, Steed's continued fraction beyond.
double bessel_k0(double x);
double bessel_k1(double x);
double bessel_k(int order, double x);  // order in {0, 1}

/// F(tau) = (kappa tau - i) / ((kappa tau)^2 + 1)^{3/2}
std::complex<double> driving_function(double kappa, double tau);

enum class Sublevel { Plus, Minus };  // |n'p, m = +1> or |n'p, m = -1>

struct WeakCouplingChannel {
  double eta = 0.0;
  int lambda = 1;  // sign of E(n'p) - E(ns)
  Sublevel target = Sublevel::Minus;
};

struct ChannelProbability {
  double probability = 0.0;
  bool adiabatic_limit = false;  // kappa == 0, returned as the limit value 0
};

/// P = 4 eta^2 kappa^-4 [lambda sgn(kappa) K0(1/|kappa|) -+ K1(1/|kappa|)]^2,
/// upper sign for Plus.
ChannelProbability analytic_probability(const WeakCouplingChannel& channel, double kappa);

/// dP/dkappa from the closed form (K0' = -K1, K1' = -K0 - K1/x).
double analytic_probability_derivative(const WeakCouplingChannel& channel, double kappa);

struct Peak {
  double kappa = 0.0;
  double probability = 0.0;
};

/// Maximum over kappa on the branch where the channel is resonant
/// (sign(kappa) = lambda for Minus, -lambda for Plus).
Peak find_peak(const WeakCouplingChannel& channel);

/// Amplitudes C(tau) of each channel from the first-order equations
/// dC/dtau = -i lambda C +- i eta F (F for Plus, -F* for Minus), C(tau_grid[0]) = 0.
/// Returns one row per grid point, one column per channel.
std::vector<std::vector<std::complex<double>>> weak_ode_solution(
    const std::vector<WeakCouplingChannel>& channels, double kappa,
    const std::vector<double>& tau_grid, double rel_tol = 1e-11, double abs_tol = 1e-14);

}  // namespace rydberg
