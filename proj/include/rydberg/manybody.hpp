#pragma once

// Chain of N atoms parallel to the wire, single-excitation sector of one
// n'p channel: nearest-neighbour resonant dipole-dipole operator, exciton
// states |m, chi> and the collective weak-coupling probabilities.
//
// Single-excitation basis index: 2 (j - 1) for |n'p+>_j, 2 (j - 1) + 1 for |n'p->_j.

#include <vector>

#include <Eigen/Dense>

#include "rydberg/atomic.hpp"

namespace rydberg {

struct ChainConfig {
  int atoms = 1;
  double spacing = 0.0;   // R_at, bohr
  double distance = 0.0;  // D, bohr
  int n = 0;
  int n_prime = 0;
  double dipole = 0.0;    // mu_{nn'}, bohr
  double gap = 0.0;       // Delta_{n'p}, hartree (signed)

  void validate() const;
  /// mu^2 / R_at^3 < 0.1 |Delta|
  bool weak_dipole_valid() const;
};

ChainConfig make_chain(const QuantumDefectModel& model, int n, int n_prime, int atoms,
                       double spacing, double distance, const RadialOptions& options = {});

struct ExcitonLabel {
  int m = 1;    // 1..N
  int chi = 1;  // +1 or -1

  void validate(int atoms) const;
  friend bool operator==(const ExcitonLabel&, const ExcitonLabel&) = default;
};

/// m = 1..N, each with chi = +1 then -1.
std::vector<ExcitonLabel> exciton_labels(int atoms);

Eigen::MatrixXd build_vdd_matrix(const ChainConfig& chain);

Eigen::VectorXd exciton_state(const ExcitonLabel& label, int atoms);

/// Delta - (1 - 3 chi) mu^2 / (2 R^3) cos(m pi / (N + 1))
double exciton_energy(const ExcitonLabel& label, const ChainConfig& chain);

/// sin(N a / 2) / sin(a / 2), with its limit (+-N) near a = 2 pi j.
double dirichlet_kernel(int atoms, double alpha);

/// Collective weak-coupling probability for kappa > 0 (DomainError otherwise,
/// or when the chain violates the weak-dipole condition).
double collective_probability(const ExcitonLabel& label, const ChainConfig& chain, double kappa,
                              double eta, int lambda);

/// 8 N eta^2 kappa^-4 [K0^2 + K1^2] at 1/kappa.
double total_collective_probability(const ChainConfig& chain, double kappa, double eta);

}  // namespace rydberg
