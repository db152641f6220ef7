#include <cstdio>
#include <string>
#include <cmath>
#include <map>
#include <ostream>
#include <tuple>
#include <utility>

#include "rydberg/atomic.hpp"
#include "rydberg/error.hpp"

namespace rydberg {

namespace {

using Shell = std::pair<int, int>;  // (n, l)

}  // namespace

double DipoleTable::max_abs() const {
  double best = 0.0;
  for (const auto& e : plus_entries) best = std::max(best, std::abs(e.value));
  for (const auto& e : z_entries) best = std::max(best, std::abs(e.value));
  return best;
}

DipoleTable dipole_table(const BasisSet& basis, const QuantumDefectModel& model,
                         const RadialOptions& options, Execution execution) {
  // Distinct shells and shell pairs with |l - l'| = 1.
  std::map<Shell, std::size_t> shell_index;
  for (const auto& s : basis.states) shell_index.emplace(Shell{s.n, s.l}, 0);
  std::vector<Shell> shells;
  for (auto& [shell, idx] : shell_index) {
    idx = shells.size();
    shells.push_back(shell);
  }

  std::vector<RadialWavefunction> radial(shells.size());
  std::vector<std::string> failures(shells.size());
  const auto n_shells = static_cast<std::ptrdiff_t>(shells.size());
#pragma omp parallel for schedule(dynamic) if (execution == Execution::Parallel)
  for (std::ptrdiff_t i = 0; i < n_shells; ++i) {
    const auto [n, l] = shells[static_cast<std::size_t>(i)];
    try {
      radial[static_cast<std::size_t>(i)] = radial_wavefunction(effective_n(n, l, model), l, options);
    } catch (const Error& e) {
      failures[static_cast<std::size_t>(i)] = RydbergState{n, l, 0}.label() + ": " + e.what();
    }
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw ResolutionError("dipole_table: radial solver failed for " + f);
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < shells.size(); ++a) {
    for (std::size_t b = a + 1; b < shells.size(); ++b) {
      if (std::abs(shells[a].second - shells[b].second) == 1) pairs.emplace_back(a, b);
    }
  }
  std::vector<double> integrals(pairs.size());
  const auto n_pairs = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic) if (execution == Execution::Parallel)
  for (std::ptrdiff_t p = 0; p < n_pairs; ++p) {
    const auto [a, b] = pairs[static_cast<std::size_t>(p)];
    integrals[static_cast<std::size_t>(p)] = radial_integral(radial[a], radial[b], 1);
  }
  std::map<std::pair<std::size_t, std::size_t>, double> lookup;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    lookup[pairs[p]] = integrals[p];
    lookup[{pairs[p].second, pairs[p].first}] = integrals[p];
  }

  const auto dim = static_cast<Eigen::Index>(basis.size());
  DipoleTable table;
  table.plus = Eigen::MatrixXcd::Zero(dim, dim);
  table.z = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& a = basis.states[i];
    const std::size_t sa = shell_index.at({a.n, a.l});
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const auto& b = basis.states[j];
      if (std::abs(a.l - b.l) != 1) continue;
      const double rad = lookup.at({sa, shell_index.at({b.n, b.l})});
      const double plus = rad * angular_factor(DipoleComponent::XPlusIY, a.l, a.m, b.l, b.m);
      const double z = rad * angular_factor(DipoleComponent::Z, a.l, a.m, b.l, b.m);
      if (plus != 0.0) {
        table.plus(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = plus;
        table.plus_entries.push_back({i, j, plus});
      }
      if (z != 0.0) {
        table.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z;
        table.z_entries.push_back({i, j, z});
      }
    }
  }
  return table;
}

DipoleTable zero_dipole_table(const BasisSet& basis) {
  const auto dim = static_cast<Eigen::Index>(basis.size());
  DipoleTable table;
  table.plus = Eigen::MatrixXcd::Zero(dim, dim);
  table.z = Eigen::MatrixXcd::Zero(dim, dim);
  return table;
}

void write_dipole_csv(std::ostream& out, const BasisSet& basis, const DipoleTable& table) {
  out << "n,l,m,n',l',m',re_mu,im_mu\n";
  char buf[64];
  for (const auto& e : table.plus_entries) {
    const auto& a = basis.states[e.row];
    const auto& b = basis.states[e.col];
    const auto value = table.plus(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col));
    out << a.n << ',' << a.l << ',' << a.m << ',' << b.n << ',' << b.l << ',' << b.m << ',';
    std::snprintf(buf, sizeof buf, "%.12e", value.real());
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.12e", value.imag());
    out << buf << '\n';
  }
}

}  // namespace rydberg
