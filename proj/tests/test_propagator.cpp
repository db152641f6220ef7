#include <cmath>
#include <complex>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "doctest.h"
#include "rydberg/coupling.hpp"
#include "rydberg/error.hpp"
#include "rydberg/propagator.hpp"
#include "rydberg/units.hpp"
#include "rydberg/weakfield.hpp"

using namespace rydberg;
using cplx = std::complex<double>;

namespace {

struct Setup {
  QuantumDefectModel model;
  BasisSet basis;
  DipoleTable table;
  double distance = 0.0;
  double gap = 0.0;
};

Setup three_state(double distance_um = 2.5) {
  Setup s;
  s.model = builtin_defect_model("Rb");
  s.basis = make_basis(s.model, {55, 0, 0}, {{55, 0, 0}, {55, 1, -1}, {55, 1, 1}});
  s.table = dipole_table(s.basis, s.model);
  s.distance = units::micrometres_to_bohr(distance_um);
  s.gap = std::abs(channel_gap(s.model, 55, 55));
  return s;
}

Setup windowed(int n_window, int l_max) {
  Setup s;
  s.model = builtin_defect_model("Rb");
  s.basis = build_basis(s.model, {55, 0, 0}, n_window, l_max);
  s.table = dipole_table(s.basis, s.model);
  s.distance = units::micrometres_to_bohr(2.5);
  s.gap = std::abs(channel_gap(s.model, 55, 55));
  return s;
}

FlybyGeometry geometry_for(const Setup& s, double kappa) {
  return {s.distance, kappa * s.distance * s.gap, 0.0};
}

double pop(const AmplitudeVector& v, const BasisSet& b, const RydbergState& st) {
  return std::norm(v.amplitudes[static_cast<Eigen::Index>(b.index_of(st))]);
}

// Bare-frame Schroedinger equation with the dense interaction matrix,
// integrated by Boost's Dormand-Prince on real/imaginary parts.
Eigen::VectorXcd dense_oracle(const Setup& s, double kappa, const Eigen::VectorXcd& c0, double t0,
                              double t1) {
  const auto n = static_cast<Eigen::Index>(s.basis.size());
  const double e0 = energy(s.basis.initial, s.model);
  Eigen::VectorXd offsets(n);
  for (Eigen::Index a = 0; a < n; ++a) offsets[a] = (s.basis.energies[static_cast<std::size_t>(a)] - e0) / s.gap;
  using state = std::vector<double>;
  auto rhs = [&](const state& y, state& dy, double tau) {
    Eigen::VectorXcd c(n);
    for (Eigen::Index a = 0; a < n; ++a) c[a] = cplx(y[2 * a], y[2 * a + 1]);
    const double x = kappa * s.distance * tau;
    const Eigen::VectorXcd h = interaction_matrix(s.basis, s.table, x, s.distance) / s.gap * c +
                               offsets.cwiseProduct(c);
    for (Eigen::Index a = 0; a < n; ++a) {
      const cplx d = cplx(0.0, -1.0) * h[a];
      dy[2 * a] = d.real();
      dy[2 * a + 1] = d.imag();
    }
  };
  state y(2 * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    y[2 * a] = c0[a].real();
    y[2 * a + 1] = c0[a].imag();
  }
  namespace ode = boost::numeric::odeint;
  ode::integrate_adaptive(ode::make_controlled(1e-12, 1e-12, ode::runge_kutta_dopri5<state>()), rhs, y,
                          t0, t1, 1e-3);
  Eigen::VectorXcd out(n);
  for (Eigen::Index a = 0; a < n; ++a) out[a] = cplx(y[2 * a], y[2 * a + 1]);
  return out;
}

PropagationConfig fixed_window(double half, Frame frame = Frame::Interaction) {
  PropagationConfig c;
  c.half_window = half;
  c.auto_window = false;
  c.frame = frame;
  return c;
}

}  // namespace

TEST_SUITE("propagator") {

TEST_CASE("configuration checks") {
  PropagationConfig c;
  CHECK_NOTHROW(c.validate());
  c.rel_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.half_window = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.max_window_doublings = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  const auto s = three_state();
  CHECK_THROWS_AS(FlybyPropagator(s.basis, s.table, s.model, {s.distance, 0.0, 0.0}), DomainError);
  auto state = AmplitudeVector::initial(s.basis);
  state.amplitudes *= 2.0;
  const FlybyPropagator prop(s.basis, s.table, s.model, geometry_for(s, 1.0));
  CHECK_THROWS_AS(prop.propagate(state, {}), ConfigError);
  CHECK_THROWS_AS(AmplitudeVector::basis_state(s.basis, 7), ConfigError);
}

TEST_CASE("kappa and time scale") {
  const auto s = three_state();
  const FlybyPropagator prop(s.basis, s.table, s.model, geometry_for(s, 1.7));
  CHECK(prop.kappa() == doctest::Approx(1.7));
  CHECK(prop.tau_scale() == doctest::Approx(s.gap));
}

TEST_CASE("agrees with an independent dense integrator") {
  const auto s = windowed(1, 3);
  for (double kappa : {0.6, 2.0, -1.2}) {
    const FlybyPropagator prop(s.basis, s.table, s.model, geometry_for(s, kappa));
    const double half = 20.0 / std::abs(kappa);
    auto start = AmplitudeVector::initial(s.basis, -half);
    const auto ours = prop.evolve(start, half, fixed_window(half));
    const auto ref = dense_oracle(s, kappa, start.amplitudes, -half, half);
    CHECK((ours.amplitudes - ref).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(ours.time == doctest::Approx(half));
  }
}

TEST_CASE("bare and interaction frames agree") {
  const auto s = windowed(1, 3);
  const FlybyPropagator prop(s.basis, s.table, s.model, geometry_for(s, 1.0));
  const auto bare = prop.propagate(AmplitudeVector::initial(s.basis), fixed_window(30.0, Frame::Bare));
  const auto inter = prop.propagate(AmplitudeVector::initial(s.basis), fixed_window(30.0, Frame::Interaction));
  CHECK((bare.final_state.amplitudes - inter.final_state.amplitudes).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("norm is conserved") {
  const auto s = windowed(1, 3);
  for (double kappa : {0.3, 1.0, 5.0}) {
    const auto r = propagate(AmplitudeVector::initial(s.basis), s.basis, s.table, s.model,
                             geometry_for(s, kappa), fixed_window(50.0 / kappa));
    CHECK(std::abs(r.final_state.norm_squared() - 1.0) < 1e-8);
    CHECK(r.max_norm_drift < 1e-8);
    CHECK(r.stats.accepted > 0);
  }
}

TEST_CASE("evolving back retraces the trajectory") {
  const auto s = windowed(1, 3);
  const FlybyPropagator prop(s.basis, s.table, s.model, geometry_for(s, 0.8));
  const auto cfg = fixed_window(40.0);
  const auto start = AmplitudeVector::initial(s.basis, -40.0);
  const auto mid = prop.evolve(start, 40.0, cfg);
  CHECK(std::norm(mid.amplitudes[static_cast<Eigen::Index>(s.basis.initial_index())]) < 0.99);
  const auto back = prop.evolve(mid, -40.0, cfg);
  CHECK((back.amplitudes - start.amplitudes).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("tighter tolerances change populations by less than 1e-6") {
  const auto s = windowed(1, 3);
  const FlybyPropagator prop(s.basis, s.table, s.model, geometry_for(s, 0.9));
  auto loose = fixed_window(60.0);
  loose.rel_tol = 1e-8;
  loose.abs_tol = 1e-10;
  auto tight = fixed_window(60.0);
  tight.rel_tol = 1e-12;
  tight.abs_tol = 1e-14;
  const auto a = populations(prop.propagate(AmplitudeVector::initial(s.basis), loose).final_state, s.basis);
  const auto b = populations(prop.propagate(AmplitudeVector::initial(s.basis), tight).final_state, s.basis);
  for (std::size_t i = 0; i < a.per_state.size(); ++i) CHECK(std::abs(a.per_state[i] - b.per_state[i]) < 1e-6);
}

TEST_CASE("window doubling converges to 1e-8 on the three-level system") {
  const auto s = three_state();
  PropagationConfig cfg;
  cfg.half_window = 20.0;
  cfg.max_window_doublings = 12;
  cfg.window_tol = 1e-8;
  const auto r = propagate(AmplitudeVector::initial(s.basis), s.basis, s.table, s.model,
                           geometry_for(s, 1.0), cfg);
  CHECK(r.window_converged);
  CHECK(r.window_change < 1e-8);
  CHECK(r.window_doublings >= 1);
  CHECK(r.half_window == doctest::Approx(20.0 * std::pow(2.0, r.window_doublings)));

  cfg.max_window_doublings = 0;
  const auto once = propagate(AmplitudeVector::initial(s.basis), s.basis, s.table, s.model,
                              geometry_for(s, 1.0), cfg);
  CHECK(once.window_doublings == 0);
  CHECK(once.half_window == 20.0);
}

TEST_CASE("weak coupling limit reproduces the closed form") {
  const auto s = three_state(12.0);
  const double eta_nn = eta(55, 55, s.distance, s.model);
  REQUIRE(eta_nn < 0.01);
  for (double kappa : {0.4, 0.6978954825, 1.5, 4.0}) {
    PropagationConfig cfg;
    cfg.max_window_doublings = 10;
    const auto r = propagate(AmplitudeVector::initial(s.basis), s.basis, s.table, s.model,
                             geometry_for(s, kappa), cfg);
    const double pm = pop(r.final_state, s.basis, {55, 1, -1});
    const double pp = pop(r.final_state, s.basis, {55, 1, 1});
    const double am = analytic_probability({eta_nn, 1, Sublevel::Minus}, kappa).probability;
    const double ap = analytic_probability({eta_nn, 1, Sublevel::Plus}, kappa).probability;
    CHECK(pm == doctest::Approx(am).epsilon(1e-3));
    CHECK(pp == doctest::Approx(ap).epsilon(1e-3).scale(1e-3 * am));
  }
}

TEST_CASE("reversing the electron swaps p+1 and p-1") {
  const auto s = three_state();
  for (double kappa : {0.5, 1.3}) {
    const auto fwd = propagate(AmplitudeVector::initial(s.basis), s.basis, s.table, s.model,
                               geometry_for(s, kappa), fixed_window(60.0 / kappa));
    const auto rev = propagate(AmplitudeVector::initial(s.basis), s.basis, s.table, s.model,
                               geometry_for(s, -kappa), fixed_window(60.0 / kappa));
    CHECK(pop(fwd.final_state, s.basis, {55, 1, -1}) ==
          doctest::Approx(pop(rev.final_state, s.basis, {55, 1, 1})).epsilon(1e-10));
    CHECK(pop(fwd.final_state, s.basis, {55, 1, 1}) ==
          doctest::Approx(pop(rev.final_state, s.basis, {55, 1, -1})).epsilon(1e-10));
    CHECK(pop(fwd.final_state, s.basis, {55, 0, 0}) ==
          doctest::Approx(pop(rev.final_state, s.basis, {55, 0, 0})).epsilon(1e-10));
  }
}

TEST_CASE("zero dipoles leave the state untouched") {
  const auto s = windowed(1, 3);
  const auto zero = zero_dipole_table(s.basis);
  const auto r = propagate(AmplitudeVector::initial(s.basis), s.basis, zero, s.model,
                           geometry_for(s, 1.0), fixed_window(30.0));
  const auto p = populations(r.final_state, s.basis);
  CHECK(p.initial == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.p == 0.0);
}

TEST_CASE("unreachable states do not change the result") {
  const auto rb = builtin_defect_model("Rb");
  Setup a = three_state();
  Setup b = a;
  b.basis = make_basis(rb, {55, 0, 0}, {{55, 0, 0}, {55, 1, -1}, {55, 1, 0}, {55, 1, 1}, {54, 1, 0}});
  b.table = dipole_table(b.basis, rb);
  // p0 states need a z coupling or a d intermediate; neither is present
  const auto ra = propagate(AmplitudeVector::initial(a.basis), a.basis, a.table, rb, geometry_for(a, 1.0), fixed_window(40.0));
  const auto rb_ = propagate(AmplitudeVector::initial(b.basis), b.basis, b.table, rb, geometry_for(b, 1.0), fixed_window(40.0));
  for (const RydbergState st : {RydbergState{55, 0, 0}, RydbergState{55, 1, -1}, RydbergState{55, 1, 1}}) {
    CHECK(pop(ra.final_state, a.basis, st) == doctest::Approx(pop(rb_.final_state, b.basis, st)).epsilon(1e-9));
  }
  CHECK(pop(rb_.final_state, b.basis, {55, 1, 0}) == 0.0);
  CHECK(pop(rb_.final_state, b.basis, {54, 1, 0}) == 0.0);
}

TEST_CASE("population bookkeeping") {
  const auto s = windowed(1, 3);
  const auto r = propagate(AmplitudeVector::initial(s.basis), s.basis, s.table, s.model,
                           geometry_for(s, 0.8), fixed_window(40.0));
  const auto p = populations(r.final_state, s.basis);
  CHECK(p.initial + p.other_s + p.p + p.d + p.higher == doctest::Approx(p.total).epsilon(1e-14));
  double by_l = 0.0;
  for (double v : p.by_l) by_l += v;
  CHECK(by_l == doctest::Approx(p.total).epsilon(1e-14));
  CHECK(p.depletion() == doctest::Approx(1.0 - p.initial));
  CHECK(p.p > 0.0);
  CHECK(p.d > 0.0);
  CHECK(population_of(p, s.basis, {55, 0, 0}) == p.initial);
  CHECK(population_of(p, s.basis, {90, 0, 0}) == 0.0);
}

TEST_CASE("polarization of a hand-built superposition") {
  const auto s = three_state();
  const double mu = channel_dipole(s.model, 55, 55);
  AmplitudeVector v = AmplitudeVector::initial(s.basis);
  const auto is = static_cast<Eigen::Index>(s.basis.index_of({55, 0, 0}));
  const auto im = static_cast<Eigen::Index>(s.basis.index_of({55, 1, -1}));
  v.amplitudes[is] = 1.0 / std::sqrt(2.0);
  v.amplitudes[im] = 1.0 / std::sqrt(2.0);
  auto pol = polarization(v, s.basis, s.table);
  CHECK(pol.x == doctest::Approx(mu / 2.0).epsilon(1e-14));
  CHECK(pol.y == doctest::Approx(0.0).scale(mu));
  CHECK(pol.z == 0.0);
  CHECK(pol.envelope == doctest::Approx(mu / 2.0).epsilon(1e-14));

  v.amplitudes[im] = cplx(0.0, 1.0 / std::sqrt(2.0));
  pol = polarization(v, s.basis, s.table);
  CHECK(pol.x == doctest::Approx(0.0).scale(mu));
  CHECK(pol.y == doctest::Approx(mu / 2.0).epsilon(1e-14));
  CHECK(pol.envelope == doctest::Approx(mu / 2.0).epsilon(1e-14));

  // p+1 carries the opposite sign
  const auto ip = static_cast<Eigen::Index>(s.basis.index_of({55, 1, 1}));
  v.amplitudes.setZero();
  v.amplitudes[is] = 1.0 / std::sqrt(2.0);
  v.amplitudes[ip] = 1.0 / std::sqrt(2.0);
  pol = polarization(v, s.basis, s.table);
  CHECK(pol.x == doctest::Approx(-mu / 2.0).epsilon(1e-14));

  // a single basis state has no dipole
  pol = polarization(AmplitudeVector::initial(s.basis), s.basis, s.table);
  CHECK(pol.x == 0.0);
  CHECK(pol.envelope == 0.0);
}

TEST_CASE("envelope bounds the free evolution after the fly-by") {
  const auto s = windowed(1, 3);
  const FlybyPropagator prop(s.basis, s.table, s.model, geometry_for(s, 0.7));
  const auto r = prop.propagate(AmplitudeVector::initial(s.basis), fixed_window(60.0));
  const auto pol = polarization(r.final_state, s.basis, s.table);
  CHECK(pol.envelope > 0.0);
  CHECK(std::abs(pol.z) < 1e-12 * pol.envelope);
  // free phases exp(-i E t) after the pass: |<x+iy>| never exceeds the envelope
  const double e0 = energy(s.basis.initial, s.model);
  for (double t : {0.0, 13.7, 211.0, 5000.0}) {
    AmplitudeVector later = r.final_state;
    for (Eigen::Index a = 0; a < later.amplitudes.size(); ++a) {
      later.amplitudes[a] *= std::polar(1.0, -(s.basis.energies[static_cast<std::size_t>(a)] - e0) / s.gap * t);
    }
    const auto p = polarization(later, s.basis, s.table);
    CHECK(std::hypot(p.x, p.y) <= pol.envelope * (1.0 + 1e-12));
    CHECK(p.envelope == doctest::Approx(pol.envelope).epsilon(1e-10));
  }
}

TEST_CASE("trajectory recording") {
  const auto s = three_state();
  std::vector<TrajectoryRow> rows;
  PropagationConfig cfg;
  cfg.half_window = 10.0;
  cfg.max_window_doublings = 2;
  cfg.window_tol = 1e-14;  // force every doubling
  const FlybyPropagator prop(s.basis, s.table, s.model, geometry_for(s, 1.0));
  const auto r = prop.propagate(AmplitudeVector::initial(s.basis), cfg, trajectory_recorder(s.basis, s.table, rows));
  REQUIRE(rows.size() > 10);
  CHECK(r.window_doublings == 2);
  // only the accepted window is reported
  CHECK(rows.front().tau >= -r.half_window - 1e-12);
  CHECK(rows.back().tau == doctest::Approx(r.half_window));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].tau > rows[i - 1].tau);
  for (const auto& row : rows) CHECK(row.norm == doctest::Approx(1.0).epsilon(1e-8));

  std::ostringstream os;
  write_trajectory_csv(os, rows);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "tau,P_ns,P_p,P_d,P_l_gt_d,x,y,norm");
  std::size_t count = 0;
  while (std::getline(is, line)) ++count;
  CHECK(count == rows.size());
}

}  // TEST_SUITE
