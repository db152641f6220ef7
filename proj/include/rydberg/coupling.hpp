#pragma once

// Fly-by geometry, unit conversions, the dimensionless parameters (eta, kappa,
// lambda, tau) and the interaction matrix along the trajectory X = k t.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydberg/atomic.hpp"

namespace rydberg {

struct FlybyGeometry {
  double distance = 0.0;  // wire-atom distance D, bohr
  double momentum = 0.0;  // electron momentum k, atomic units; sign sets direction
  double sigma = 0.0;     // wave-packet width, bohr

  static FlybyGeometry from_micrometres(double distance_um, double momentum,
                                        double sigma_um = 0.0);
  void validate() const;  // D > 0, sigma >= 0
  bool point_charge_valid() const { return sigma < distance / 10.0; }
};

struct DimensionlessParams {
  double eta = 0.0;
  double kappa = 0.0;
  int lambda = 1;
  double tau_scale = 0.0;  // |Delta_{n'p}| in hartree; tau = t * tau_scale
};

/// Delta_{n'p} = E(n'p) - E(ns), signed, hartree.
double channel_gap(const QuantumDefectModel& model, int n, int n_prime);

/// mu_{ns, n'p-} = <ns| x+iy |n'p, m=-1> = sqrt(2/3) <ns|r|n'p>, bohr.
double channel_dipole(const QuantumDefectModel& model, int n, int n_prime,
                      const RadialOptions& options = {});

/// eta_{nn'} = |mu_{nn'}| / (2 D^2 |Delta_{n'p}|). DegenerateGapError if the gap vanishes.
double eta(int n, int n_prime, double distance, const QuantumDefectModel& model,
           const RadialOptions& options = {});

/// Sign of Delta_{n'p}.
int lambda_sign(int n, int n_prime, const QuantumDefectModel& model);

DimensionlessParams dimensionless_params(const QuantumDefectModel& model, int n, int n_prime,
                                         const FlybyGeometry& geometry,
                                         const RadialOptions& options = {});

/// D for which eta_{nn} takes the given value.
double distance_for_eta(double target_eta, int n, const QuantumDefectModel& model,
                        const RadialOptions& options = {});

/// Converts between electron kinetic energy, momentum and kappa = k / (D |Delta|).
struct MomentumScale {
  double distance = 0.0;  // bohr
  double gap = 0.0;       // |Delta|, hartree

  static MomentumScale reference(const QuantumDefectModel& model, int n, double distance);
};

struct KineticRepresentations {
  double energy_ev = 0.0;
  double momentum = 0.0;
  double kappa = 0.0;
};

KineticRepresentations from_energy_ev(double energy_ev, const MomentumScale& scale);
KineticRepresentations from_momentum(double momentum, const MomentumScale& scale);
KineticRepresentations from_kappa(double kappa, const MomentumScale& scale);

/// H_int at electron position X: [mu (X - iD) + mu^dagger (X + iD)] / (2 |R|^3), hartree.
Eigen::MatrixXcd interaction_matrix(const BasisSet& basis, const DipoleTable& table, double x,
                                    double distance);

struct ValidityCheck {
  bool satisfied = false;
  double margin = 0.0;  // ratio that should be large; >= threshold means satisfied
};

struct ValidityReport {
  ValidityCheck back_action;     // momentum spread vs. momentum transfer of the smallest gap
  ValidityCheck point_charge;    // D / sigma
  ValidityCheck slow_envelope;   // |kappa| / eta_{nn}
  double threshold = 5.0;
  std::vector<std::string> warnings;

  bool all_satisfied() const {
    return back_action.satisfied && point_charge.satisfied && slow_envelope.satisfied;
  }
};

/// Diagnostics for the approximations behind the point-charge equation of
/// motion. Never throws for physically valid input; only reports.
ValidityReport validity_report(const FlybyGeometry& geometry, const BasisSet& basis,
                               const QuantumDefectModel& model, const RadialOptions& options = {});

}  // namespace rydberg
