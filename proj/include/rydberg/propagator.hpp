#pragma once

// Time-dependent propagation of the atomic amplitudes in the field of a
// point-like electron moving along X = k t at distance D.
//
// Time is the scaled tau = t |Delta| where Delta is the ns -> np gap of the
// initial state's shell. Bare-frame amplitudes carry free phases
// exp(-i (E_a - E_init) t), i.e. energies are measured from the initial level.

#include <complex>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "rydberg/atomic.hpp"
#include "rydberg/coupling.hpp"
#include "rydberg/ode.hpp"

namespace rydberg {

struct AmplitudeVector {
  Eigen::VectorXcd amplitudes;  // bare frame
  double time = 0.0;            // tau

  static AmplitudeVector basis_state(const BasisSet& basis, std::size_t index, double time = 0.0);
  static AmplitudeVector initial(const BasisSet& basis, double time = 0.0) {
    return basis_state(basis, basis.initial_index(), time);
  }
  double norm_squared() const { return amplitudes.squaredNorm(); }
};

enum class Frame { Bare, Interaction };

struct PropagationConfig {
  double half_window = 0.0;  // T; 0 selects 50 / |kappa|
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  Frame frame = Frame::Interaction;
  bool auto_window = true;        // double T until populations settle
  int max_window_doublings = 6;
  double window_tol = 1e-8;       // max |dP| between successive windows
  double norm_tol = 1e-8;         // drift above 100x this aborts

  void validate() const;
};

struct PropagationResult {
  AmplitudeVector final_state;
  double half_window = 0.0;    // window actually used
  int window_doublings = 0;
  double window_change = 0.0;  // max |dP| of the last doubling; 0 if none ran
  bool window_converged = true;
  double max_norm_drift = 0.0;
  ode::Stats stats;
};

using TrajectoryObserver = std::function<void(const AmplitudeVector&)>;

/// Propagation of one fly-by. Holds the scaled couplings g = mu / (2 D^2 |Delta|)
/// and level offsets (E_a - E_init) / |Delta|; safe to share across threads.
class FlybyPropagator {
 public:
  FlybyPropagator(const BasisSet& basis, const DipoleTable& table,
                  const QuantumDefectModel& model, const FlybyGeometry& geometry);

  double kappa() const { return kappa_; }
  double tau_scale() const { return tau_scale_; }
  const BasisSet& basis() const { return *basis_; }

  /// Evolves `state` from state.time to tau_end (either direction).
  /// `observer` receives the bare-frame state after each accepted step.
  AmplitudeVector evolve(const AmplitudeVector& state, double tau_end,
                         const PropagationConfig& config, const TrajectoryObserver& observer = {},
                         double* max_norm_drift = nullptr, ode::Stats* stats = nullptr) const;

  /// Full fly-by from -T to +T, with automatic window doubling.
  PropagationResult propagate(const AmplitudeVector& initial, const PropagationConfig& config,
                              const TrajectoryObserver& observer = {}) const;

 private:
  struct Coupling {
    Eigen::Index row;
    Eigen::Index col;
    std::complex<double> g;
  };

  AmplitudeVector run_window(const AmplitudeVector& initial, double half_window,
                             const PropagationConfig& config, const TrajectoryObserver& observer,
                             double& drift, ode::Stats& stats) const;

  const BasisSet* basis_;
  double kappa_ = 0.0;
  double tau_scale_ = 0.0;
  Eigen::VectorXd offsets_;
  std::vector<Coupling> couplings_;
};

/// Convenience wrapper: builds the propagator and runs one fly-by from |initial>.
PropagationResult propagate(const AmplitudeVector& initial, const BasisSet& basis,
                            const DipoleTable& table, const QuantumDefectModel& model,
                            const FlybyGeometry& geometry, const PropagationConfig& config = {});

struct Populations {
  std::vector<double> per_state;  // indexed like the basis
  std::vector<double> by_l;       // sum over n and m for each l
  double initial = 0.0;           // P_ns
  double other_s = 0.0;           // s states other than the initial one
  double p = 0.0;
  double d = 0.0;
  double higher = 0.0;            // l > 2
  double total = 0.0;

  double depletion() const { return 1.0 - initial; }
};

Populations populations(const AmplitudeVector& state, const BasisSet& basis);

/// Probability of one basis state; 0 if the state is not in the basis.
double population_of(const Populations& pops, const BasisSet& basis, const RydbergState& state);

struct Polarization {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  /// Largest |<x + iy>| reachable by free evolution after the fly-by: sum over
  /// distinct Bohr frequencies of the coherence magnitudes. Independent of the
  /// final-time phase.
  double envelope = 0.0;
};

/// <x>, <y> from <x+iy> = <x> + i<y>; <z> from the z table.
Polarization polarization(const AmplitudeVector& state, const BasisSet& basis,
                          const DipoleTable& table);

/// Trajectory rows: tau, P_ns, P_p, P_d, P_l>d, <x>, <y>, norm.
struct TrajectoryRow {
  double tau, p_ns, p_p, p_d, p_higher, x, y, norm;
};

TrajectoryObserver trajectory_recorder(const BasisSet& basis, const DipoleTable& table,
                                       std::vector<TrajectoryRow>& rows);
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows);

}  // namespace rydberg
