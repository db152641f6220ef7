#pragma once

// Parameter scans over kappa, depletion inversion and their text I/O.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rydberg/atomic.hpp"
#include "rydberg/propagator.hpp"

namespace rydberg {

enum class ScanMode { SingleAtomNumeric, SingleAtomAnalytic, Polarization, ManyBody, Table1 };
enum class GridSpacing { Linear, Log };
enum class OutputFormat { Csv, Json };

std::string to_string(ScanMode mode);
ScanMode parse_scan_mode(std::string_view text);

struct KappaGrid {
  double min = 0.1;
  double max = 10.0;
  int count = 40;
  GridSpacing spacing = GridSpacing::Log;

  void validate() const;
  std::vector<double> points() const;
};

struct ScanJob {
  ScanMode mode = ScanMode::SingleAtomAnalytic;
  std::string element;
  std::string defects_file;  // overrides the built-in model when set
  int n = 0;
  std::vector<int> channels;  // n' list for the analytic mode; defaults to {n}

  // Exactly one of distance_a0 / eta_target.
  std::optional<double> distance_a0;
  std::optional<double> eta_target;  // D chosen so that eta_nn equals this
  double sigma_a0 = 0.0;

  KappaGrid grid;
  int n_window = 3;
  int l_max = 4;
  std::vector<RydbergState> states;  // explicit basis; empty means the energy window
  bool zero_dipoles = false;
  double radial_step = 0.005;
  PropagationConfig propagation;

  int atoms = 2;
  std::optional<double> spacing_a0;
  std::optional<double> spacing_over_d;

  std::vector<double> targets;
  double energy_rel_tol = 0.01;

  void validate() const;
  /// Canonical "key = value" lines with every default filled in.
  std::vector<std::pair<std::string, std::string>> canonical() const;
  std::string canonical_text() const;
  std::uint64_t hash() const;  // FNV-1a over canonical_text()
};

/// Documented defaults for an element: n_window 3, l_max 4 (8 for lithium).
int default_l_max(std::string_view element);

/// Parses "key = value" lines. If the text contains "#cfg " lines (an earlier
/// output file), only those are read. Errors carry "source:line:".
ScanJob parse_config(std::istream& in, const std::string& source = "<config>");
ScanJob load_config(const std::filesystem::path& path);

/// Resolved physical context of a job: model, basis, table, distance.
struct ScanContext {
  QuantumDefectModel model;
  double distance = 0.0;  // bohr
  double gap = 0.0;       // |Delta_{np}| of the initial shell
  double eta_nn = 0.0;
  BasisSet basis;         // empty for analytic modes
  DipoleTable table;

  static ScanContext build(const ScanJob& job, Execution execution = Execution::Parallel);
  double energy_ev(double kappa) const;
  double kappa_of_energy(double energy_ev) const;
};

struct ScanRecord {
  std::vector<double> values;  // aligned with ScanResult::columns
  std::string status = "ok";
};

struct ScanResult {
  std::vector<std::string> columns;
  std::vector<ScanRecord> records;
  std::vector<std::pair<std::string, std::string>> provenance;
  std::vector<std::string> failures;
};

/// Numeric outcome at a single kappa for the full propagation modes.
struct NumericPoint {
  Populations populations;
  Polarization polarization;
  PropagationResult propagation;
};

NumericPoint numeric_point(const ScanContext& ctx, const ScanJob& job, double kappa);

/// One record per grid point, in grid order regardless of execution.
ScanResult run_scan(const ScanJob& job, Execution execution = Execution::Parallel);
ScanResult run_scan(const ScanJob& job, const ScanContext& ctx,
                    Execution execution = Execution::Parallel);

struct InversionResult {
  double target = 0.0;
  double energy_ev = 0.0;  // descending-branch root
  double kappa = 0.0;
  double bracket_lo_ev = 0.0;
  double bracket_hi_ev = 0.0;
  double depletion_lo = 0.0;  // depletion at the low-energy bracket end
  double depletion_hi = 0.0;
  std::optional<double> ascending_energy_ev;
  double max_depletion = 0.0;
  double kappa_at_max = 0.0;
  int evaluations = 0;
};

/// Depletion 1 - P_ns on the job's kappa grid.
std::vector<double> depletion_scan(const ScanContext& ctx, const ScanJob& job,
                                   Execution execution = Execution::Parallel);

/// Kinetic energy at which the depletion equals `target` on the branch above
/// the depletion maximum. UnreachableTargetError when target exceeds the scan maximum.
InversionResult invert_for_depletion(const ScanContext& ctx, const ScanJob& job, double target,
                                     const std::vector<double>& kappas,
                                     const std::vector<double>& depletion);
InversionResult invert_for_depletion(const ScanJob& job, double target);

void write_csv(std::ostream& out, const ScanJob& job, const ScanResult& result);
void write_json(std::ostream& out, const ScanJob& job, const ScanResult& result);
void write_result(std::ostream& out, const ScanJob& job, const ScanResult& result,
                  OutputFormat format);

}  // namespace rydberg
