#include "rydberg/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "rydberg/error.hpp"
#include "rydberg/weakfield.hpp"

namespace rydberg {

using cplx = std::complex<double>;

AmplitudeVector AmplitudeVector::basis_state(const BasisSet& basis, std::size_t index,
                                             double time) {
  if (index >= basis.size()) throw ConfigError("basis_state: index out of range");
  AmplitudeVector v;
  v.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  v.amplitudes[static_cast<Eigen::Index>(index)] = 1.0;
  v.time = time;
  return v;
}

void PropagationConfig::validate() const {
  if (!(half_window >= 0.0)) throw ConfigError("propagation: half_window must be >= 0");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("propagation: tolerances must be > 0");
  if (max_window_doublings < 0) throw ConfigError("propagation: max_window_doublings must be >= 0");
  if (!(window_tol > 0.0)) throw ConfigError("propagation: window_tol must be > 0");
  if (!(norm_tol > 0.0)) throw ConfigError("propagation: norm_tol must be > 0");
}

FlybyPropagator::FlybyPropagator(const BasisSet& basis, const DipoleTable& table,
                                 const QuantumDefectModel& model, const FlybyGeometry& geometry)
    : basis_(&basis) {
  geometry.validate();
  if (table.size() != basis.size()) throw ConfigError("propagator: table and basis sizes differ");
  const int n = basis.initial.n;
  tau_scale_ = std::abs(channel_gap(model, n, n));
  if (tau_scale_ == 0.0) throw DegenerateGapError("propagator: reference gap vanishes");
  kappa_ = geometry.momentum / (geometry.distance * tau_scale_);
  if (kappa_ == 0.0) throw DomainError("propagator: electron momentum must be nonzero");

  const auto size = static_cast<Eigen::Index>(basis.size());
  const double e0 = energy(basis.initial, model);
  offsets_.resize(size);
  for (Eigen::Index a = 0; a < size; ++a) {
    offsets_[a] = (basis.energies[static_cast<std::size_t>(a)] - e0) / tau_scale_;
  }
  const double scale = 1.0 / (2.0 * geometry.distance * geometry.distance * tau_scale_);
  couplings_.reserve(table.plus_entries.size());
  for (const auto& e : table.plus_entries) {
    if (e.value == 0.0) continue;
    couplings_.push_back({static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col),
                          cplx(e.value * scale, 0.0)});
  }
}

AmplitudeVector FlybyPropagator::evolve(const AmplitudeVector& state, double tau_end,
                                        const PropagationConfig& config,
                                        const TrajectoryObserver& observer, double* max_norm_drift,
                                        ode::Stats* stats) const {
  config.validate();
  const auto size = static_cast<Eigen::Index>(basis_->size());
  if (state.amplitudes.size() != size) throw ConfigError("evolve: state size differs from basis");

  // Couplings between states that the initial support can never reach carry
  // zero amplitude on both ends; drop them.
  std::vector<char> reachable(static_cast<std::size_t>(size), 0);
  for (Eigen::Index a = 0; a < size; ++a) reachable[static_cast<std::size_t>(a)] = state.amplitudes[a] != 0.0;
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& c : couplings_) {
      auto& r = reachable[static_cast<std::size_t>(c.row)];
      auto& s = reachable[static_cast<std::size_t>(c.col)];
      if (r != s) {
        r = s = 1;
        grew = true;
      }
    }
  }
  std::vector<Coupling> active;
  for (const auto& c : couplings_) {
    if (reachable[static_cast<std::size_t>(c.row)]) active.push_back(c);
  }

  const double kappa = kappa_;
  const Eigen::VectorXd& eps = offsets_;
  const bool interaction = config.frame == Frame::Interaction;
  const cplx minus_i(0.0, -1.0);

  Eigen::VectorXcd phase(size), bare(size), acc(size);
  auto set_phase = [&](double tau) {
    for (Eigen::Index a = 0; a < size; ++a) phase[a] = std::polar(1.0, eps[a] * tau);
  };

  // Interaction frame: y_a = exp(+i eps_a tau) c_a.
  auto rhs = [&](double tau, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
    const cplx f = driving_function(kappa, tau);
    const cplx fc = std::conj(f);
    if (interaction) {
      set_phase(tau);
      bare = y.cwiseProduct(phase.conjugate());
    } else {
      bare = y;
    }
    acc.setZero();
    for (const auto& c : active) {
      acc[c.row] += c.g * f * bare[c.col];
      acc[c.col] += std::conj(c.g) * fc * bare[c.row];
    }
    if (interaction) {
      dy = minus_i * acc.cwiseProduct(phase);
    } else {
      dy = minus_i * (acc + eps.cast<cplx>().cwiseProduct(bare));
    }
  };

  auto to_bare = [&](double tau, const Eigen::VectorXcd& y) {
    AmplitudeVector out;
    out.time = tau;
    if (interaction) {
      out.amplitudes.resize(size);
      for (Eigen::Index a = 0; a < size; ++a) out.amplitudes[a] = y[a] * std::polar(1.0, -eps[a] * tau);
    } else {
      out.amplitudes = y;
    }
    return out;
  };

  Eigen::VectorXcd y = state.amplitudes;
  if (interaction) {
    for (Eigen::Index a = 0; a < size; ++a) y[a] *= std::polar(1.0, eps[a] * state.time);
  }
  const double norm0 = y.squaredNorm();
  double drift = 0.0;
  const double limit = 100.0 * config.norm_tol;
  auto watch = [&](double tau, const Eigen::VectorXcd& v) {
    const double d = std::abs(v.squaredNorm() - norm0);
    drift = std::max(drift, d);
    if (d > limit) {
      throw IntegratorRejectionError("propagator: norm drift " + std::to_string(d) +
                                     " exceeds limit at tau=" + std::to_string(tau));
    }
    if (observer) observer(to_bare(tau, v));
  };

  ode::Options opts;
  opts.rel_tol = config.rel_tol;
  opts.abs_tol = config.abs_tol;
  double step = 0.0;
  const auto s = ode::integrate(rhs, y, state.time, tau_end, opts, watch, step);
  if (stats) {
    stats->accepted += s.accepted;
    stats->rejected += s.rejected;
    stats->evaluations += s.evaluations;
  }
  if (max_norm_drift) *max_norm_drift = std::max(*max_norm_drift, drift);
  return to_bare(tau_end, y);
}

AmplitudeVector FlybyPropagator::run_window(const AmplitudeVector& initial, double half_window,
                                            const PropagationConfig& config,
                                            const TrajectoryObserver& observer, double& drift,
                                            ode::Stats& stats) const {
  AmplitudeVector start = initial;
  start.time = -half_window;
  return evolve(start, half_window, config, observer, &drift, &stats);
}

PropagationResult FlybyPropagator::propagate(const AmplitudeVector& initial,
                                             const PropagationConfig& config,
                                             const TrajectoryObserver& observer) const {
  config.validate();
  if (std::abs(initial.norm_squared() - 1.0) > config.norm_tol) {
    throw ConfigError("propagate: initial state is not normalized");
  }
  PropagationResult result;
  double window = config.half_window > 0.0 ? config.half_window : 50.0 / std::abs(kappa_);

  // With doubling, the observer is replayed on the accepted window at the end.
  const bool doubling = config.auto_window && config.max_window_doublings > 0;
  auto current = run_window(initial, window, config, doubling ? TrajectoryObserver{} : observer,
                            result.max_norm_drift, result.stats);
  if (doubling) {
    result.window_converged = false;
    for (int d = 1; d <= config.max_window_doublings; ++d) {
      const bool last_try = d == config.max_window_doublings;
      window *= 2.0;
      auto next = run_window(initial, window, config, {}, result.max_norm_drift, result.stats);
      const double change =
          (next.amplitudes.cwiseAbs2() - current.amplitudes.cwiseAbs2()).cwiseAbs().maxCoeff();
      current = std::move(next);
      result.window_doublings = d;
      result.window_change = change;
      if (change < config.window_tol) {
        result.window_converged = true;
        break;
      }
      if (last_try) break;
    }
    if (observer) {
      double ignored = 0.0;
      ode::Stats extra;
      current = run_window(initial, window, config, observer, ignored, extra);
    }
  }
  result.half_window = window;
  result.final_state = std::move(current);
  return result;
}

PropagationResult propagate(const AmplitudeVector& initial, const BasisSet& basis,
                            const DipoleTable& table, const QuantumDefectModel& model,
                            const FlybyGeometry& geometry, const PropagationConfig& config) {
  return FlybyPropagator(basis, table, model, geometry).propagate(initial, config);
}

Populations populations(const AmplitudeVector& state, const BasisSet& basis) {
  if (static_cast<std::size_t>(state.amplitudes.size()) != basis.size()) {
    throw ConfigError("populations: state size differs from basis");
  }
  Populations p;
  p.per_state.resize(basis.size());
  p.by_l.assign(static_cast<std::size_t>(std::max(basis.l_max, 0)) + 1, 0.0);
  for (std::size_t a = 0; a < basis.size(); ++a) {
    const double prob = std::norm(state.amplitudes[static_cast<Eigen::Index>(a)]);
    const auto& s = basis.states[a];
    p.per_state[a] = prob;
    if (static_cast<std::size_t>(s.l) >= p.by_l.size()) p.by_l.resize(static_cast<std::size_t>(s.l) + 1, 0.0);
    p.by_l[static_cast<std::size_t>(s.l)] += prob;
    p.total += prob;
    if (s == basis.initial) {
      p.initial += prob;
    } else if (s.l == 0) {
      p.other_s += prob;
    } else if (s.l == 1) {
      p.p += prob;
    } else if (s.l == 2) {
      p.d += prob;
    } else {
      p.higher += prob;
    }
  }
  return p;
}

double population_of(const Populations& pops, const BasisSet& basis, const RydbergState& state) {
  if (!basis.contains(state)) return 0.0;
  return pops.per_state[basis.index_of(state)];
}

Polarization polarization(const AmplitudeVector& state, const BasisSet& basis,
                          const DipoleTable& table) {
  if (static_cast<std::size_t>(state.amplitudes.size()) != basis.size() ||
      table.size() != basis.size()) {
    throw ConfigError("polarization: size mismatch");
  }
  const auto& c = state.amplitudes;
  Polarization out;
  cplx plus = 0.0;
  // Coherences grouped by Bohr frequency (E_a - E_b), for the envelope.
  std::vector<std::pair<double, cplx>> terms;
  terms.reserve(table.plus_entries.size());
  for (const auto& e : table.plus_entries) {
    const auto a = static_cast<Eigen::Index>(e.row);
    const auto b = static_cast<Eigen::Index>(e.col);
    const cplx t = std::conj(c[a]) * e.value * c[b];
    plus += t;
    terms.emplace_back(basis.energies[e.row] - basis.energies[e.col], t);
  }
  double z = 0.0;
  for (const auto& e : table.z_entries) {
    const auto a = static_cast<Eigen::Index>(e.row);
    const auto b = static_cast<Eigen::Index>(e.col);
    z += (std::conj(c[a]) * e.value * c[b]).real();
  }
  out.x = plus.real();
  out.y = plus.imag();
  out.z = z;

  std::sort(terms.begin(), terms.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });
  double envelope = 0.0;
  for (std::size_t i = 0; i < terms.size();) {
    cplx group = terms[i].second;
    std::size_t j = i + 1;
    const double tol = 1e-9 * std::max(std::abs(terms[i].first), 1e-12);
    while (j < terms.size() && terms[j].first - terms[i].first <= tol) group += terms[j++].second;
    envelope += std::abs(group);
    i = j;
  }
  out.envelope = envelope;
  return out;
}

TrajectoryObserver trajectory_recorder(const BasisSet& basis, const DipoleTable& table,
                                       std::vector<TrajectoryRow>& rows) {
  return [&basis, &table, &rows](const AmplitudeVector& s) {
    const auto pops = populations(s, basis);
    const auto pol = polarization(s, basis, table);
    rows.push_back({s.time, pops.initial, pops.p, pops.d, pops.higher, pol.x, pol.y, pops.total});
  };
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
  out << "tau,P_ns,P_p,P_d,P_l_gt_d,x,y,norm\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.10e,%.12e,%.12e,%.12e,%.12e,%.10e,%.10e,%.15f\n", r.tau,
                  r.p_ns, r.p_p, r.p_d, r.p_higher, r.x, r.y, r.norm);
    out << buf;
  }
}

}  // namespace rydberg
