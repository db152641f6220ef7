#include "rydberg/scanner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>

#include "rydberg/coupling.hpp"
#include "rydberg/error.hpp"
#include "rydberg/manybody.hpp"
#include "rydberg/units.hpp"
#include "rydberg/weakfield.hpp"

namespace rydberg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

bool is_numeric_mode(ScanMode m) {
  return m == ScanMode::SingleAtomNumeric || m == ScanMode::Polarization || m == ScanMode::Table1;
}

std::string chi_label(int chi) { return chi > 0 ? "+1" : "-1"; }

}  // namespace

ScanContext ScanContext::build(const ScanJob& job, Execution execution) {
  job.validate();
  ScanContext ctx;
  ctx.model = job.defects_file.empty() ? builtin_defect_model(job.element)
                                       : load_defect_model(job.defects_file);
  RadialOptions radial;
  radial.step = job.radial_step;
  ctx.distance = job.distance_a0 ? *job.distance_a0
                                 : distance_for_eta(*job.eta_target, job.n, ctx.model, radial);
  ctx.gap = std::abs(channel_gap(ctx.model, job.n, job.n));
  if (ctx.gap == 0.0) throw DegenerateGapError("scan: ns-np gap vanishes");
  ctx.eta_nn = eta(job.n, job.n, ctx.distance, ctx.model, radial);
  if (is_numeric_mode(job.mode)) {
    const RydbergState initial{job.n, 0, 0};
    ctx.basis = job.states.empty() ? build_basis(ctx.model, initial, job.n_window, job.l_max)
                                   : make_basis(ctx.model, initial, job.states);
    ctx.table = job.zero_dipoles ? zero_dipole_table(ctx.basis)
                                 : dipole_table(ctx.basis, ctx.model, radial, execution);
  }
  return ctx;
}

double ScanContext::energy_ev(double kappa) const {
  const double k = kappa * distance * gap;
  return units::hartree_to_ev(0.5 * k * k);
}

double ScanContext::kappa_of_energy(double energy_ev) const {
  if (!(energy_ev > 0.0)) throw DomainError("kinetic energy must be positive");
  return std::sqrt(2.0 * units::ev_to_hartree(energy_ev)) / (distance * gap);
}

NumericPoint numeric_point(const ScanContext& ctx, const ScanJob& job, double kappa) {
  const FlybyGeometry geometry{ctx.distance, kappa * ctx.distance * ctx.gap, job.sigma_a0};
  const FlybyPropagator prop(ctx.basis, ctx.table, ctx.model, geometry);
  NumericPoint out;
  out.propagation = prop.propagate(AmplitudeVector::initial(ctx.basis), job.propagation);
  out.populations = populations(out.propagation.final_state, ctx.basis);
  out.polarization = polarization(out.propagation.final_state, ctx.basis, ctx.table);
  return out;
}

std::vector<double> depletion_scan(const ScanContext& ctx, const ScanJob& job,
                                   Execution execution) {
  const auto kappas = job.grid.points();
  std::vector<double> out(kappas.size(), kNaN);
  const auto count = static_cast<long>(kappas.size());
#pragma omp parallel for schedule(dynamic, 1) if (execution == Execution::Parallel)
  for (long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] =
          numeric_point(ctx, job, kappas[static_cast<std::size_t>(i)]).populations.depletion();
    } catch (const Error&) {
      // left as NaN; the inversion skips it
    }
  }
  return out;
}

namespace {

// Bisection in log(kappa) on depletion - target, which changes sign across
// [lo, hi]; stops when the energy bracket is within rel_tol.
struct Bracket {
  double lo, hi, dep_lo, dep_hi;
};

Bracket refine(const ScanContext& ctx, const ScanJob& job, double target, Bracket b, int& evals) {
  const double ratio_limit = std::sqrt(1.0 + job.energy_rel_tol);
  const bool lo_above = b.dep_lo >= target;
  while (b.hi / b.lo > ratio_limit) {
    const double mid = std::sqrt(b.lo * b.hi);
    const double d = numeric_point(ctx, job, mid).populations.depletion();
    ++evals;
    if ((d >= target) == lo_above) {
      b.lo = mid;
      b.dep_lo = d;
    } else {
      b.hi = mid;
      b.dep_hi = d;
    }
  }
  return b;
}

double interpolate_root(const Bracket& b, double target) {
  if (b.dep_hi == b.dep_lo) return std::sqrt(b.lo * b.hi);
  const double t = (target - b.dep_lo) / (b.dep_hi - b.dep_lo);
  return std::exp(std::log(b.lo) + t * (std::log(b.hi) - std::log(b.lo)));
}

}  // namespace

InversionResult invert_for_depletion(const ScanContext& ctx, const ScanJob& job, double target,
                                     const std::vector<double>& kappas,
                                     const std::vector<double>& depletion) {
  if (!(target > 0.0 && target < 1.0)) throw ConfigError("invert: target must lie in (0, 1)");
  if (kappas.size() != depletion.size() || kappas.empty()) {
    throw ConfigError("invert: scan arrays are empty or mismatched");
  }
  InversionResult r;
  r.target = target;
  std::size_t imax = kappas.size();
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    if (std::isnan(depletion[i])) continue;
    if (imax == kappas.size() || depletion[i] > depletion[imax]) imax = i;
  }
  if (imax == kappas.size()) throw ResolutionError("invert: every scan point failed");
  r.max_depletion = depletion[imax];
  r.kappa_at_max = kappas[imax];
  if (target >= r.max_depletion) {
    std::ostringstream os;
    os << "invert: target depletion " << target << " not reachable; scan maximum is "
       << r.max_depletion << " at kappa=" << r.kappa_at_max;
    throw UnreachableTargetError(os.str(), r.max_depletion);
  }

  // Descending branch: first scan point past the maximum that drops below target.
  std::optional<Bracket> desc;
  std::size_t last_good = imax;
  for (std::size_t i = imax + 1; i < kappas.size(); ++i) {
    if (std::isnan(depletion[i])) continue;
    if (depletion[i] < target) {
      desc = Bracket{kappas[last_good], kappas[i], depletion[last_good], depletion[i]};
      break;
    }
    last_good = i;
  }
  if (!desc) {
    double lo = kappas[last_good];
    double dep_lo = depletion[last_good];
    for (int k = 0; k < 8 && !desc; ++k) {
      const double hi = lo * 2.0;
      const double d = numeric_point(ctx, job, hi).populations.depletion();
      ++r.evaluations;
      if (d < target) {
        desc = Bracket{lo, hi, dep_lo, d};
      } else {
        lo = hi;
        dep_lo = d;
      }
    }
    if (!desc) throw ResolutionError("invert: depletion stays above target at large kappa");
  }
  const auto b = refine(ctx, job, target, *desc, r.evaluations);
  r.kappa = interpolate_root(b, target);
  r.energy_ev = ctx.energy_ev(r.kappa);
  r.bracket_lo_ev = ctx.energy_ev(b.lo);
  r.bracket_hi_ev = ctx.energy_ev(b.hi);
  r.depletion_lo = b.dep_lo;
  r.depletion_hi = b.dep_hi;

  // Ascending branch, reported when the scan starts below target.
  std::size_t upper = imax;
  for (std::size_t i = imax; i-- > 0;) {
    if (std::isnan(depletion[i])) continue;
    if (depletion[i] < target) {
      const auto a = refine(ctx, job, target,
                            Bracket{kappas[i], kappas[upper], depletion[i], depletion[upper]},
                            r.evaluations);
      r.ascending_energy_ev = ctx.energy_ev(interpolate_root(a, target));
      break;
    }
    upper = i;
  }
  return r;
}

InversionResult invert_for_depletion(const ScanJob& job, double target) {
  const auto ctx = ScanContext::build(job);
  const auto kappas = job.grid.points();
  return invert_for_depletion(ctx, job, target, kappas, depletion_scan(ctx, job));
}

ScanResult run_scan(const ScanJob& job, Execution execution) {
  const auto ctx = ScanContext::build(job, execution);
  return run_scan(job, ctx, execution);
}

ScanResult run_scan(const ScanJob& job, const ScanContext& ctx, Execution execution) {
  job.validate();
  ScanResult result;
  auto& prov = result.provenance;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(job.hash()));
  prov.emplace_back("config_hash", std::string("fnv1a64:") + hash);
  prov.emplace_back("model", ctx.model.element);
  prov.emplace_back("distance_a0", fmt(ctx.distance));
  prov.emplace_back("gap_hartree", fmt(ctx.gap));
  prov.emplace_back("eta_nn", fmt(ctx.eta_nn));
  if (is_numeric_mode(job.mode)) prov.emplace_back("basis_size", std::to_string(ctx.basis.size()));

  const auto kappas = job.grid.points();
  std::vector<double> channel_eta;
  std::vector<int> channel_lambda;
  std::vector<int> channels = job.channels.empty() ? std::vector<int>{job.n} : job.channels;
  std::optional<ChainConfig> chain;

  switch (job.mode) {
    case ScanMode::SingleAtomNumeric:
      result.columns = {"kappa", "E_kin_eV", "P_ns", "P_other_s", "P_p", "P_d", "P_l_gt_d",
                        "depletion", "norm_drift", "window_change", "window_converged"};
      break;
    case ScanMode::Polarization:
      result.columns = {"kappa", "E_kin_eV", "x", "y", "z", "envelope", "P_ns", "norm_drift",
                        "window_converged"};
      break;
    case ScanMode::SingleAtomAnalytic: {
      result.columns = {"kappa", "E_kin_eV"};
      RadialOptions radial;
      radial.step = job.radial_step;
      for (int np : channels) {
        channel_eta.push_back(eta(job.n, np, ctx.distance, ctx.model, radial));
        channel_lambda.push_back(lambda_sign(job.n, np, ctx.model));
        result.columns.push_back("P_" + std::to_string(np) + "p+1");
        result.columns.push_back("P_" + std::to_string(np) + "p-1");
        prov.emplace_back("eta_" + std::to_string(job.n) + "_" + std::to_string(np),
                          fmt(channel_eta.back()));
      }
      result.columns.push_back("P_total");
      break;
    }
    case ScanMode::ManyBody: {
      RadialOptions radial;
      radial.step = job.radial_step;
      const double spacing =
          job.spacing_a0 ? *job.spacing_a0 : job.spacing_over_d.value_or(2.0) * ctx.distance;
      chain = make_chain(ctx.model, job.n, job.n, job.atoms, spacing, ctx.distance, radial);
      prov.emplace_back("spacing_a0", fmt(spacing));
      prov.emplace_back("weak_dipole_valid", chain->weak_dipole_valid() ? "true" : "false");
      result.columns = {"kappa", "E_kin_eV"};
      for (const auto& l : exciton_labels(job.atoms)) {
        result.columns.push_back("m" + std::to_string(l.m) + "_chi" + chi_label(l.chi));
      }
      result.columns.push_back("total");
      break;
    }
    case ScanMode::Table1: {
      result.columns = {"target",        "E_kin_eV",      "kappa",        "bracket_lo_eV",
                        "bracket_hi_eV", "depletion_lo",  "depletion_hi", "ascending_E_kin_eV",
                        "max_depletion", "kappa_at_max",  "evaluations"};
      const auto dep = depletion_scan(ctx, job, execution);
      for (double t : job.targets) {
        ScanRecord rec;
        try {
          const auto r = invert_for_depletion(ctx, job, t, kappas, dep);
          rec.values = {t,
                        r.energy_ev,
                        r.kappa,
                        r.bracket_lo_ev,
                        r.bracket_hi_ev,
                        r.depletion_lo,
                        r.depletion_hi,
                        r.ascending_energy_ev.value_or(kNaN),
                        r.max_depletion,
                        r.kappa_at_max,
                        static_cast<double>(r.evaluations)};
        } catch (const UnreachableTargetError& e) {
          rec.values.assign(result.columns.size(), kNaN);
          rec.values[0] = t;
          rec.values[8] = e.achievable();
          rec.status = std::string("error: ") + e.what();
          result.failures.push_back(rec.status);
        } catch (const Error& e) {
          rec.values.assign(result.columns.size(), kNaN);
          rec.values[0] = t;
          rec.status = std::string("error: ") + e.what();
          result.failures.push_back(rec.status);
        }
        result.records.push_back(std::move(rec));
      }
      return result;
    }
  }

  result.records.resize(kappas.size());
  const auto count = static_cast<long>(kappas.size());
#pragma omp parallel for schedule(dynamic, 1) if (execution == Execution::Parallel)
  for (long i = 0; i < count; ++i) {
    const double kappa = kappas[static_cast<std::size_t>(i)];
    auto& rec = result.records[static_cast<std::size_t>(i)];
    try {
      std::vector<double> v{kappa, ctx.energy_ev(kappa)};
      switch (job.mode) {
        case ScanMode::SingleAtomNumeric: {
          const auto p = numeric_point(ctx, job, kappa);
          const auto& pop = p.populations;
          v.insert(v.end(), {pop.initial, pop.other_s, pop.p, pop.d, pop.higher, pop.depletion(),
                             p.propagation.max_norm_drift, p.propagation.window_change,
                             p.propagation.window_converged ? 1.0 : 0.0});
          break;
        }
        case ScanMode::Polarization: {
          const auto p = numeric_point(ctx, job, kappa);
          const auto& pol = p.polarization;
          v.insert(v.end(), {pol.x, pol.y, pol.z, pol.envelope, p.populations.initial,
                             p.propagation.max_norm_drift,
                             p.propagation.window_converged ? 1.0 : 0.0});
          break;
        }
        case ScanMode::SingleAtomAnalytic: {
          double total = 0.0;
          for (std::size_t c = 0; c < channels.size(); ++c) {
            for (auto target : {Sublevel::Plus, Sublevel::Minus}) {
              const double prob =
                  analytic_probability({channel_eta[c], channel_lambda[c], target}, kappa)
                      .probability;
              v.push_back(prob);
              total += prob;
            }
          }
          v.push_back(total);
          break;
        }
        case ScanMode::ManyBody: {
          for (const auto& l : exciton_labels(job.atoms)) {
            v.push_back(collective_probability(l, *chain, kappa, ctx.eta_nn,
                                               lambda_sign(job.n, job.n, ctx.model)));
          }
          v.push_back(total_collective_probability(*chain, kappa, ctx.eta_nn));
          break;
        }
        case ScanMode::Table1:
          break;
      }
      rec.values = std::move(v);
    } catch (const Error& e) {
      rec.values.assign(result.columns.size(), kNaN);
      rec.values[0] = kappa;
      rec.status = std::string("error: ") + e.what();
    }
  }
  for (const auto& rec : result.records) {
    if (rec.status != "ok") result.failures.push_back(rec.status);
  }
  return result;
}

}  // namespace rydberg
