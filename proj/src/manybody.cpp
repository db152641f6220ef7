#include "rydberg/manybody.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rydberg/coupling.hpp"
#include "rydberg/error.hpp"
#include "rydberg/weakfield.hpp"

namespace rydberg {

void ChainConfig::validate() const {
  if (atoms < 1) throw ConfigError("chain: atom count must be >= 1");
  if (!(spacing > 0.0)) throw ConfigError("chain: spacing R_at must be positive");
  if (!(distance > 0.0)) throw ConfigError("chain: distance D must be positive");
  if (gap == 0.0) throw DegenerateGapError("chain: vanishing s-p gap");
}

bool ChainConfig::weak_dipole_valid() const {
  return dipole * dipole / (spacing * spacing * spacing) < 0.1 * std::abs(gap);
}

ChainConfig make_chain(const QuantumDefectModel& model, int n, int n_prime, int atoms,
                       double spacing, double distance, const RadialOptions& options) {
  ChainConfig c;
  c.atoms = atoms;
  c.spacing = spacing;
  c.distance = distance;
  c.n = n;
  c.n_prime = n_prime;
  c.dipole = std::abs(channel_dipole(model, n, n_prime, options));
  c.gap = channel_gap(model, n, n_prime);
  c.validate();
  return c;
}

void ExcitonLabel::validate(int atoms) const {
  if (m < 1 || m > atoms) {
    throw ConfigError("exciton label: m=" + std::to_string(m) + " outside 1.." + std::to_string(atoms));
  }
  if (chi != 1 && chi != -1) throw ConfigError("exciton label: chi must be +1 or -1");
}

std::vector<ExcitonLabel> exciton_labels(int atoms) {
  std::vector<ExcitonLabel> out;
  for (int m = 1; m <= atoms; ++m) {
    out.push_back({m, 1});
    out.push_back({m, -1});
  }
  return out;
}

Eigen::MatrixXd build_vdd_matrix(const ChainConfig& chain) {
  chain.validate();
  const Eigen::Index dim = 2 * chain.atoms;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(dim, dim);
  const double r3 = chain.spacing * chain.spacing * chain.spacing;
  const double pre = -chain.dipole * chain.dipole / (4.0 * r3);
  for (Eigen::Index i = 0; i + 1 < chain.atoms; ++i) {
    const Eigen::Index a = 2 * i;
    const Eigen::Index b = 2 * (i + 1);
    v(a, b) = v(a + 1, b + 1) = pre;
    v(a, b + 1) = v(a + 1, b) = -3.0 * pre;
    v(b, a) = v(b + 1, a + 1) = pre;
    v(b + 1, a) = v(b, a + 1) = -3.0 * pre;
  }
  return v;
}

Eigen::VectorXd exciton_state(const ExcitonLabel& label, int atoms) {
  label.validate(atoms);
  Eigen::VectorXd v(2 * atoms);
  const double norm = std::sqrt(2.0 / (atoms + 1)) / std::numbers::sqrt2;
  for (int j = 1; j <= atoms; ++j) {
    const double s = norm * std::sin(label.m * j * std::numbers::pi / (atoms + 1));
    v[2 * (j - 1)] = s;
    v[2 * (j - 1) + 1] = label.chi * s;
  }
  return v;
}

double exciton_energy(const ExcitonLabel& label, const ChainConfig& chain) {
  chain.validate();
  label.validate(chain.atoms);
  const double r3 = chain.spacing * chain.spacing * chain.spacing;
  return chain.gap - (1.0 - 3.0 * label.chi) * chain.dipole * chain.dipole / (2.0 * r3) *
                         std::cos(label.m * std::numbers::pi / (chain.atoms + 1));
}

double dirichlet_kernel(int atoms, double alpha) {
  const double half = 0.5 * alpha;
  const double s = std::sin(half);
  if (std::abs(s) >= 1e-6) return std::sin(atoms * half) / s;
  // alpha = 2 pi j + u: ratio is (-1)^{(N-1) j} sin(N u/2) / sin(u/2).
  const double j = std::round(alpha / (2.0 * std::numbers::pi));
  const double x = half - j * std::numbers::pi;
  const double sign = (static_cast<long long>(j) * (atoms - 1)) % 2 == 0 ? 1.0 : -1.0;
  const double n2 = static_cast<double>(atoms) * atoms;
  return sign * atoms * (1.0 - (n2 - 1.0) * x * x / 6.0);
}

double collective_probability(const ExcitonLabel& label, const ChainConfig& chain, double kappa,
                              double eta, int lambda) {
  chain.validate();
  label.validate(chain.atoms);
  if (!(kappa > 0.0)) throw DomainError("collective_probability: requires kappa > 0");
  if (!chain.weak_dipole_valid()) {
    throw DomainError("collective_probability: mu^2/R_at^3 not small against the gap");
  }
  if (lambda != 1 && lambda != -1) throw ConfigError("collective_probability: lambda must be +-1");
  const double x = 1.0 / kappa;
  const double k = label.chi == -1 ? bessel_k1(x) : bessel_k0(x);
  const int n = chain.atoms;
  const double phi = label.m * std::numbers::pi / (n + 1);
  const double shift = lambda * chain.spacing / (kappa * chain.distance);
  const double parity = label.m % 2 == 1 ? 1.0 : -1.0;  // (-1)^{m+1}
  const double bracket = dirichlet_kernel(n, phi + shift) + parity * dirichlet_kernel(n, phi - shift);
  const double x2 = x * x;
  return 4.0 * eta * eta / (n + 1) * x2 * x2 * k * k * bracket * bracket;
}

double total_collective_probability(const ChainConfig& chain, double kappa, double eta) {
  chain.validate();
  if (!(kappa > 0.0)) throw DomainError("total_collective_probability: requires kappa > 0");
  const double x = 1.0 / kappa;
  const double k0 = bessel_k0(x);
  const double k1 = bessel_k1(x);
  const double x2 = x * x;
  return 8.0 * chain.atoms * eta * eta * x2 * x2 * (k0 * k0 + k1 * k1);
}

}  // namespace rydberg
