// Command-line front end: scan | invert | peak | validate.
// Exit codes: 0 success, 2 configuration error, 3 numeric failure.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>

#include <omp.h>

#include "CLI11.hpp"

#include "rydberg/coupling.hpp"
#include "rydberg/error.hpp"
#include "rydberg/scanner.hpp"
#include "rydberg/weakfield.hpp"

namespace {

using namespace rydberg;

struct Common {
  std::string config;
  std::string out = "-";
  std::string format = "csv";
  int threads = 0;
  bool seedless = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
  auto* opt = cmd->add_option("--config", c.config, "configuration file");
  if (needs_config) opt->required();
  cmd->add_option("--out", c.out, "output file ('-' for stdout)");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", c.threads, "worker threads (0: OpenMP default)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--seedless", c.seedless, "assert a fully deterministic run (no RNG is used)");
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

OutputFormat format_of(const Common& c) {
  return c.format == "json" ? OutputFormat::Json : OutputFormat::Csv;
}

void apply_threads(const Common& c) {
  if (c.threads > 0) omp_set_num_threads(c.threads);
}

int report_failures(const ScanResult& r) {
  for (const auto& f : r.failures) std::cerr << "warning: " << f << "\n";
  return r.failures.empty() ? 0 : 3;
}

int cmd_scan(const Common& c) {
  apply_threads(c);
  const auto job = load_config(c.config);
  const auto result = run_scan(job);
  Output out(c.out);
  write_result(out.stream(), job, result, format_of(c));
  return report_failures(result);
}

int cmd_invert(const Common& c, const std::vector<double>& targets) {
  apply_threads(c);
  auto job = load_config(c.config);
  job.mode = ScanMode::Table1;
  if (!targets.empty()) job.targets = targets;
  job.validate();
  const auto result = run_scan(job);
  Output out(c.out);
  write_result(out.stream(), job, result, format_of(c));
  return report_failures(result);
}

int cmd_peak(const Common& c, double eta_value, int lambda, const std::string& sublevel) {
  std::vector<WeakCouplingChannel> channels;
  std::vector<std::string> names;
  const Sublevel target = sublevel == "plus" ? Sublevel::Plus : Sublevel::Minus;
  if (!c.config.empty()) {
    const auto job = load_config(c.config);
    const auto ctx = ScanContext::build(job);
    RadialOptions radial;
    radial.step = job.radial_step;
    const auto list = job.channels.empty() ? std::vector<int>{job.n} : job.channels;
    for (int np : list) {
      for (auto s : {Sublevel::Plus, Sublevel::Minus}) {
        channels.push_back({eta(job.n, np, ctx.distance, ctx.model, radial),
                            lambda_sign(job.n, np, ctx.model), s});
        names.push_back(std::to_string(np) + (s == Sublevel::Plus ? "p+1" : "p-1"));
      }
    }
  } else {
    if (!(eta_value > 0.0)) throw ConfigError("peak: --eta must be positive (or pass --config)");
    if (lambda != 1 && lambda != -1) throw ConfigError("peak: --lambda must be +1 or -1");
    channels.push_back({eta_value, lambda, target});
    names.push_back(sublevel);
  }
  Output out(c.out);
  auto& os = out.stream();
  os << std::setprecision(12);
  if (format_of(c) == OutputFormat::Json) {
    os << "[\n";
    for (std::size_t i = 0; i < channels.size(); ++i) {
      const auto p = find_peak(channels[i]);
      os << "  {\"channel\": \"" << names[i] << "\", \"eta\": " << channels[i].eta
         << ", \"lambda\": " << channels[i].lambda << ", \"kappa_max\": " << p.kappa
         << ", \"P_max\": " << p.probability
         << ", \"P_max_over_eta2\": " << p.probability / (channels[i].eta * channels[i].eta) << "}"
         << (i + 1 < channels.size() ? ",\n" : "\n");
    }
    os << "]\n";
  } else {
    os << "channel,eta,lambda,kappa_max,P_max,P_max_over_eta2\n";
    for (std::size_t i = 0; i < channels.size(); ++i) {
      const auto p = find_peak(channels[i]);
      os << names[i] << "," << channels[i].eta << "," << channels[i].lambda << "," << p.kappa << ","
         << p.probability << "," << p.probability / (channels[i].eta * channels[i].eta) << "\n";
    }
  }
  return 0;
}

int cmd_validate(const Common& c) {
  const auto job = load_config(c.config);
  Output out(c.out);
  auto& os = out.stream();
  os << job.canonical_text();
  const auto ctx = ScanContext::build(job);
  os << "# distance_a0 = " << ctx.distance << "\n# eta_nn = " << ctx.eta_nn << "\n";
  if (!ctx.basis.states.empty()) {
    os << "# basis_size = " << ctx.basis.size() << "\n";
    for (double kappa : {job.grid.min, job.grid.max}) {
      const FlybyGeometry g{ctx.distance, kappa * ctx.distance * ctx.gap, job.sigma_a0};
      const auto rep = validity_report(g, ctx.basis, ctx.model);
      os << "# validity at kappa=" << kappa << ": back_action=" << rep.back_action.margin
         << " point_charge=" << rep.point_charge.margin
         << " envelope=" << rep.slow_envelope.margin
         << (rep.all_satisfied() ? " (ok)" : " (warnings)") << "\n";
      for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg atom excitation by a guided electron"};
  app.require_subcommand(1);

  Common scan_opts, invert_opts, peak_opts, validate_opts;
  auto* scan = app.add_subcommand("scan", "run a kappa scan from a config file");
  add_common(scan, scan_opts, true);

  std::vector<double> targets;
  auto* invert = app.add_subcommand("invert", "kinetic energies for target depletions");
  add_common(invert, invert_opts, true);
  invert->add_option("--target", targets, "depletion targets in (0,1); overrides the config");

  double eta_value = 0.0;
  int lambda = 1;
  std::string sublevel = "minus";
  auto* peak = app.add_subcommand("peak", "weak-coupling peak location and height");
  add_common(peak, peak_opts, false);
  peak->add_option("--eta", eta_value, "coupling strength");
  peak->add_option("--lambda", lambda, "gap sign, +1 or -1");
  peak->add_option("--sublevel", sublevel, "plus or minus")->check(CLI::IsMember({"plus", "minus"}));

  auto* validate = app.add_subcommand("validate", "check a config and print its resolved form");
  add_common(validate, validate_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*scan) return cmd_scan(scan_opts);
    if (*invert) return cmd_invert(invert_opts, targets);
    if (*peak) return cmd_peak(peak_opts, eta_value, lambda, sublevel);
    if (*validate) return cmd_validate(validate_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
