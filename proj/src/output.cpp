#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <string>

#include "json.hpp"

#include "rydberg/scanner.hpp"

namespace rydberg {

namespace {

const std::set<std::string> kIntegerColumns = {"window_converged", "evaluations"};

std::string cell(const std::string& column, double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  if (kIntegerColumns.count(column)) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.10e", v);
  }
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

void write_csv(std::ostream& out, const ScanJob& job, const ScanResult& result) {
  for (const auto& [k, v] : job.canonical()) out << "#cfg " << k << " = " << v << "\n";
  for (const auto& [k, v] : result.provenance) out << "# " << k << " = " << v << "\n";
  out << "# failures = " << result.failures.size() << "\n";
  for (std::size_t i = 0; i < result.columns.size(); ++i) out << result.columns[i] << ",";
  out << "status\n";
  for (const auto& rec : result.records) {
    for (std::size_t i = 0; i < result.columns.size(); ++i) {
      out << cell(result.columns[i], i < rec.values.size() ? rec.values[i] : NAN) << ",";
    }
    out << csv_escape(rec.status) << "\n";
  }
}

void write_json(std::ostream& out, const ScanJob& job, const ScanResult& result) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(job.mode);
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : job.canonical()) cfg[k] = v;
  j["config"] = cfg;
  nlohmann::ordered_json prov = nlohmann::ordered_json::object();
  for (const auto& [k, v] : result.provenance) prov[k] = v;
  j["provenance"] = prov;
  j["columns"] = result.columns;
  auto records = nlohmann::ordered_json::array();
  for (const auto& rec : result.records) {
    nlohmann::ordered_json r;
    for (std::size_t i = 0; i < result.columns.size(); ++i) {
      const double v = i < rec.values.size() ? rec.values[i] : NAN;
      if (std::isnan(v)) {
        r[result.columns[i]] = nullptr;
      } else {
        r[result.columns[i]] = v;
      }
    }
    r["status"] = rec.status;
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);
  j["failures"] = result.failures;
  out << j.dump(2) << "\n";
}

void write_result(std::ostream& out, const ScanJob& job, const ScanResult& result,
                  OutputFormat format) {
  if (format == OutputFormat::Json) {
    write_json(out, job, result);
  } else {
    write_csv(out, job, result);
  }
}

}  // namespace rydberg
