#pragma once

// Quantum-defect description of a single alkali Rydberg atom: level energies,
// radial wavefunctions, dipole matrix elements and the truncated basis used by
// the propagator.
//
// Phase conventions (every sign-sensitive result depends on these):
//  * radial functions u(r) = r R(r) are positive on their outermost lobe;
//  * spherical harmonics carry the Condon-Shortley phase.
// With these, <ns| x+iy |n'p, m=-1> = +sqrt(2/3) * <ns|r|n'p> and
// <n'p, m=+1| x+iy |ns> = -sqrt(2/3) * <ns|r|n'p>.

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rydberg {

struct QuantumDefectModel {
  std::string element;
  std::map<int, double> defects;  // l -> delta_l
  int l_cutoff = 0;               // delta_l == 0 for l > l_cutoff

  double defect(int l) const;

  /// Throws InvalidModelError on negative defects or entries above the cutoff.
  void validate() const;
};

/// Compiled-in literature defaults; names are case-insensitive ("Rb", "rubidium", "Li", "H").
QuantumDefectModel builtin_defect_model(std::string_view element);

/// Parses the key-value defect format (see docs/formats.md).
QuantumDefectModel parse_defect_model(std::istream& in, const std::string& source = "<stream>");
QuantumDefectModel load_defect_model(const std::filesystem::path& path);

struct RydbergState {
  int n = 1;
  int l = 0;
  int m = 0;

  friend auto operator<=>(const RydbergState&, const RydbergState&) = default;
  std::string label() const;  // e.g. "55p-1"
};

/// Inverse of RydbergState::label: "55s", "55p-1", "38g+3". ConfigError on bad input.
RydbergState parse_state_label(std::string_view text);

/// Throws InvalidModelError if the quantum numbers are inconsistent.
void validate_state(const RydbergState& state);

double effective_n(const RydbergState& state, const QuantumDefectModel& model);
double effective_n(int n, int l, const QuantumDefectModel& model);

/// E = -1 / (2 n*^2) in hartree.
double energy(const RydbergState& state, const QuantumDefectModel& model);
double energy(int n, int l, const QuantumDefectModel& model);

// ---------------------------------------------------------------------------
// Radial wavefunctions

struct RadialOptions {
  /// Step of the uniform mesh in x = sqrt(r), units of sqrt(bohr).
  double step = 0.005;
  /// Smallest inner cutoff; only matters for l = 0 where the turning point is r = 0.
  double min_inner_radius = 1e-3;
};

/// u(r) = r R(r) sampled on x_i = i * step, i in [first_index, first_index + u.size()).
/// All wavefunctions built with the same step share one lattice, so products
/// of two functions only need their index ranges intersected.
struct RadialWavefunction {
  double n_eff = 0.0;
  int l = 0;
  double step = 0.0;
  std::size_t first_index = 0;
  std::vector<double> u;

  double x(std::size_t k) const { return static_cast<double>(first_index + k) * step; }
  double r(std::size_t k) const { return x(k) * x(k); }
  std::size_t last_index() const { return first_index + u.size(); }  // one past the end
};

/// Numerov inward integration of the pure Coulomb problem at E = -1/(2 n_eff^2)
/// on the sqrt(r) mesh, from r_out = 2 n_eff (n_eff + 15) inward. Inside half the
/// inner turning point the integration stops once |u| grows inward or the mesh
/// stops resolving Q; never below min_inner_radius. Normalized to unit norm.
RadialWavefunction radial_wavefunction(double n_eff, int l, const RadialOptions& options = {});

/// Integral of f1(r) * r^power * f2(r) dr over the overlapping support.
double radial_integral(const RadialWavefunction& a, const RadialWavefunction& b, int power);

/// <1| r |2>; requires |l1 - l2| == 1 (SelectionRuleError otherwise).
double radial_dipole_integral(const RydbergState& s1, const RydbergState& s2,
                              const QuantumDefectModel& model, const RadialOptions& options = {});

// ---------------------------------------------------------------------------
// Angular factors

enum class DipoleComponent { XPlusIY, XMinusIY, Z };

/// <l m| c / r |lp mp> for c in {x+iy, x-iy, z}. Real under the Condon-Shortley phase.
double angular_factor(DipoleComponent component, int l, int m, int lp, int mp);

/// <l m| (x+iy)/r |lp mp>: nonzero only for lp = l +- 1 and mp = m - 1.
inline double angular_factor(int l, int m, int lp, int mp) {
  return angular_factor(DipoleComponent::XPlusIY, l, m, lp, mp);
}

// ---------------------------------------------------------------------------
// Basis and dipole table

struct BasisSet {
  std::vector<RydbergState> states;
  std::vector<double> energies;  // hartree, aligned with states
  RydbergState initial;
  int n_min = 0;
  int n_max = 0;
  int l_max = 0;

  std::size_t size() const { return states.size(); }
  std::size_t index_of(const RydbergState& state) const;  // throws if absent
  bool contains(const RydbergState& state) const;
  std::size_t initial_index() const { return index_of(initial); }
};

/// All (n, l, m) with l <= l_max whose effective quantum number lies within
/// n_window + 1/2 of the initial state's, ordered by energy, then l, then m.
BasisSet build_basis(const QuantumDefectModel& model, const RydbergState& initial, int n_window,
                     int l_max);

/// Basis from an explicit state list (used for few-level restrictions).
BasisSet make_basis(const QuantumDefectModel& model, const RydbergState& initial,
                    std::vector<RydbergState> states);

struct DipoleEntry {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Position matrix elements over a basis, in bohr.
/// plus(a, b) = <a| x+iy |b>; the x-iy block is plus^dagger; z(a, b) = <a| z |b>.
struct DipoleTable {
  Eigen::MatrixXcd plus;
  Eigen::MatrixXcd z;
  std::vector<DipoleEntry> plus_entries;  // nonzeros of plus, row-major order
  std::vector<DipoleEntry> z_entries;

  std::size_t size() const { return static_cast<std::size_t>(plus.rows()); }
  double max_abs() const;
};

enum class Execution { Serial, Parallel };

/// Radial integrals are computed once per (n, l, n', l') pair; Parallel
/// distributes those over OpenMP threads and produces bitwise the same table.
DipoleTable dipole_table(const BasisSet& basis, const QuantumDefectModel& model,
                         const RadialOptions& options = {},
                         Execution execution = Execution::Parallel);

/// Same table with every entry set to zero; decoupled reference for tests.
DipoleTable zero_dipole_table(const BasisSet& basis);

/// CSV rows (n,l,m,n',l',m',re,im) for every nonzero x+iy element.
void write_dipole_csv(std::ostream& out, const BasisSet& basis, const DipoleTable& table);

}  // namespace rydberg
