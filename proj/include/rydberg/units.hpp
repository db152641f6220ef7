#pragma once

// Atomic units throughout: hbar = e = m_e = 1, lengths in bohr, energies in hartree.

namespace rydberg::units {

inline constexpr double bohr_radius_m = 5.29177210903e-11;
inline constexpr double hartree_ev = 27.211386245988;

constexpr double micrometres_to_bohr(double um) { return um * 1e-6 / bohr_radius_m; }
constexpr double bohr_to_micrometres(double a0) { return a0 * bohr_radius_m * 1e6; }
constexpr double ev_to_hartree(double ev) { return ev / hartree_ev; }
constexpr double hartree_to_ev(double ha) { return ha * hartree_ev; }

}  // namespace rydberg::units
