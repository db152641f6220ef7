#include "rydberg/coupling.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rydberg/error.hpp"
#include "rydberg/units.hpp"

namespace rydberg {

FlybyGeometry FlybyGeometry::from_micrometres(double distance_um, double momentum,
                                              double sigma_um) {
  FlybyGeometry g{units::micrometres_to_bohr(distance_um), momentum,
                  units::micrometres_to_bohr(sigma_um)};
  g.validate();
  return g;
}

void FlybyGeometry::validate() const {
  if (!(distance > 0.0)) throw ConfigError("geometry: distance D must be positive");
  if (!(sigma >= 0.0)) throw ConfigError("geometry: sigma must be non-negative");
  if (!std::isfinite(momentum)) throw ConfigError("geometry: momentum must be finite");
}

double channel_gap(const QuantumDefectModel& model, int n, int n_prime) {
  return energy(n_prime, 1, model) - energy(n, 0, model);
}

double channel_dipole(const QuantumDefectModel& model, int n, int n_prime,
                      const RadialOptions& options) {
  const RydbergState s{n, 0, 0};
  const RydbergState p{n_prime, 1, -1};
  validate_state(s);
  validate_state(p);
  return radial_dipole_integral(s, p, model, options) * angular_factor(0, 0, 1, -1);
}

double eta(int n, int n_prime, double distance, const QuantumDefectModel& model,
           const RadialOptions& options) {
  if (!(distance > 0.0)) throw ConfigError("eta: distance must be positive");
  const double gap = channel_gap(model, n, n_prime);
  if (gap == 0.0) {
    throw DegenerateGapError("eta: " + std::to_string(n) + "s and " + std::to_string(n_prime) +
                             "p are degenerate");
  }
  return std::abs(channel_dipole(model, n, n_prime, options)) /
         (2.0 * distance * distance * std::abs(gap));
}

int lambda_sign(int n, int n_prime, const QuantumDefectModel& model) {
  const double gap = channel_gap(model, n, n_prime);
  if (gap == 0.0) throw DegenerateGapError("lambda_sign: degenerate s-p gap");
  return gap > 0.0 ? 1 : -1;
}

DimensionlessParams dimensionless_params(const QuantumDefectModel& model, int n, int n_prime,
                                         const FlybyGeometry& geometry,
                                         const RadialOptions& options) {
  geometry.validate();
  DimensionlessParams p;
  p.eta = eta(n, n_prime, geometry.distance, model, options);
  p.lambda = lambda_sign(n, n_prime, model);
  p.tau_scale = std::abs(channel_gap(model, n, n_prime));
  p.kappa = geometry.momentum / (geometry.distance * p.tau_scale);
  return p;
}

double distance_for_eta(double target_eta, int n, const QuantumDefectModel& model,
                        const RadialOptions& options) {
  if (!(target_eta > 0.0)) throw ConfigError("distance_for_eta: eta must be positive");
  // eta scales exactly as D^-2.
  const double eta_at_unit = eta(n, n, 1.0, model, options);
  return std::sqrt(eta_at_unit / target_eta);
}

MomentumScale MomentumScale::reference(const QuantumDefectModel& model, int n, double distance) {
  const double gap = std::abs(channel_gap(model, n, n));
  if (gap == 0.0) throw DegenerateGapError("reference gap vanishes");
  if (!(distance > 0.0)) throw ConfigError("distance must be positive");
  return {distance, gap};
}

KineticRepresentations from_energy_ev(double energy_ev, const MomentumScale& scale) {
  if (!(energy_ev > 0.0)) throw DomainError("kinetic energy must be positive");
  const double k = std::sqrt(2.0 * units::ev_to_hartree(energy_ev));
  return {energy_ev, k, k / (scale.distance * scale.gap)};
}

KineticRepresentations from_momentum(double momentum, const MomentumScale& scale) {
  if (momentum == 0.0 || !std::isfinite(momentum)) throw DomainError("momentum must be nonzero");
  return {units::hartree_to_ev(0.5 * momentum * momentum), momentum,
          momentum / (scale.distance * scale.gap)};
}

KineticRepresentations from_kappa(double kappa, const MomentumScale& scale) {
  const double k = kappa * scale.distance * scale.gap;
  return from_momentum(k, scale);
}

Eigen::MatrixXcd interaction_matrix(const BasisSet& basis, const DipoleTable& table, double x,
                                    double distance) {
  const double r2 = x * x + distance * distance;
  if (!(r2 > 0.0)) throw DomainError("interaction_matrix: electron at the atom position");
  const double r3 = r2 * std::sqrt(r2);
  if (!std::isfinite(1.0 / r3)) throw DomainError("interaction_matrix: |R|^3 underflow");
  (void)basis;
  const std::complex<double> w(x, -distance);
  Eigen::MatrixXcd h = (w * table.plus + std::conj(w) * table.plus.adjoint()) / (2.0 * r3);
  return h;
}

ValidityReport validity_report(const FlybyGeometry& geometry, const BasisSet& basis,
                               const QuantumDefectModel& model, const RadialOptions& options) {
  geometry.validate();
  ValidityReport report;
  const double inf = std::numeric_limits<double>::infinity();

  // Smallest nonzero gap from the initial level.
  const double e0 = energy(basis.initial, model);
  double min_gap = inf;
  for (double e : basis.energies) {
    const double gap = std::abs(e - e0);
    if (gap > 0.0) min_gap = std::min(min_gap, gap);
  }

  // Momentum spread 1/(2 sigma) against the recoil Delta_min / |k|.
  const double k = std::abs(geometry.momentum);
  if (geometry.sigma == 0.0 || !std::isfinite(min_gap)) {
    report.back_action.margin = inf;
  } else if (k == 0.0) {
    report.back_action.margin = 0.0;
  } else {
    report.back_action.margin = (0.5 / geometry.sigma) / (min_gap / k);
  }

  report.point_charge.margin = geometry.sigma == 0.0 ? inf : geometry.distance / geometry.sigma;

  const int n = basis.initial.n;
  const double eta_nn = eta(n, n, geometry.distance, model, options);
  const double kappa = geometry.momentum / (geometry.distance * std::abs(channel_gap(model, n, n)));
  report.slow_envelope.margin = eta_nn == 0.0 ? inf : std::abs(kappa) / eta_nn;

  report.back_action.satisfied = report.back_action.margin >= report.threshold;
  report.point_charge.satisfied = report.point_charge.margin >= 10.0;
  report.slow_envelope.satisfied = report.slow_envelope.margin >= report.threshold;

  auto warn = [&](const ValidityCheck& c, const char* what) {
    if (!c.satisfied) {
      std::ostringstream os;
      os << what << " (margin " << c.margin << ")";
      report.warnings.push_back(os.str());
    }
  };
  warn(report.back_action, "back-action on the electron not negligible");
  warn(report.point_charge, "wave packet not point-like: sigma >= D/10");
  warn(report.slow_envelope, "slowly varying envelope questionable: |kappa| not >> eta");
  return report;
}

}  // namespace rydberg
