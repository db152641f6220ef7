#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "rydberg/atomic.hpp"
#include "rydberg/error.hpp"

namespace rydberg {

namespace {

void finalize(BasisSet& basis, const QuantumDefectModel& model) {
  std::vector<std::tuple<double, int, int, int>> keyed;
  keyed.reserve(basis.states.size());
  for (const auto& s : basis.states) keyed.emplace_back(energy(s, model), s.l, s.m, s.n);
  std::sort(keyed.begin(), keyed.end());

  basis.states.clear();
  basis.energies.clear();
  basis.n_min = basis.n_max = basis.initial.n;
  basis.l_max = 0;
  for (const auto& [e, l, m, n] : keyed) {
    basis.states.push_back({n, l, m});
    basis.energies.push_back(e);
    basis.n_min = std::min(basis.n_min, n);
    basis.n_max = std::max(basis.n_max, n);
    basis.l_max = std::max(basis.l_max, l);
  }
}

}  // namespace

std::size_t BasisSet::index_of(const RydbergState& state) const {
  const auto it = std::find(states.begin(), states.end(), state);
  if (it == states.end()) throw ConfigError("state " + state.label() + " is not in the basis");
  return static_cast<std::size_t>(it - states.begin());
}

bool BasisSet::contains(const RydbergState& state) const {
  return std::find(states.begin(), states.end(), state) != states.end();
}

BasisSet build_basis(const QuantumDefectModel& model, const RydbergState& initial, int n_window,
                     int l_max) {
  validate_state(initial);
  if (n_window < 0) throw ConfigError("build_basis: n_window must be >= 0");
  if (l_max < 1) throw ConfigError("build_basis: l_max must be >= 1");

  const double centre = effective_n(initial, model);
  const double half_width = n_window + 0.5;

  BasisSet basis;
  basis.initial = initial;
  for (int l = 0; l <= l_max; ++l) {
    const double delta = model.defect(l);
    const int n_lo = std::max(l + 1, static_cast<int>(std::ceil(centre - half_width + delta)));
    const int n_hi = static_cast<int>(std::floor(centre + half_width + delta));
    for (int n = n_lo; n <= n_hi; ++n) {
      if (std::abs(effective_n(n, l, model) - centre) > half_width) continue;
      for (int m = -l; m <= l; ++m) basis.states.push_back({n, l, m});
    }
  }
  if (basis.states.empty()) throw ConfigError("build_basis: empty basis");
  if (!basis.contains(initial)) basis.states.push_back(initial);
  finalize(basis, model);
  return basis;
}

BasisSet make_basis(const QuantumDefectModel& model, const RydbergState& initial,
                    std::vector<RydbergState> states) {
  validate_state(initial);
  std::set<RydbergState> seen;
  BasisSet basis;
  basis.initial = initial;
  for (const auto& s : states) {
    validate_state(s);
    if (!seen.insert(s).second) throw ConfigError("make_basis: duplicate state " + s.label());
    basis.states.push_back(s);
  }
  if (!seen.contains(initial)) basis.states.push_back(initial);
  finalize(basis, model);
  return basis;
}

}  // namespace rydberg
