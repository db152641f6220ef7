#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rydberg/atomic.hpp"
#include "rydberg/error.hpp"

namespace rydberg {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

double QuantumDefectModel::defect(int l) const {
  if (l > l_cutoff) return 0.0;
  const auto it = defects.find(l);
  return it == defects.end() ? 0.0 : it->second;
}

void QuantumDefectModel::validate() const {
  for (const auto& [l, delta] : defects) {
    if (l < 0) throw InvalidModelError(element + ": negative orbital quantum number in defect table");
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
      throw InvalidModelError(element + ": quantum defect for l=" + std::to_string(l) +
                              " must be finite and non-negative");
    }
    if (l > l_cutoff && delta != 0.0) {
      throw InvalidModelError(element + ": nonzero defect for l=" + std::to_string(l) +
                              " above l_cutoff=" + std::to_string(l_cutoff));
    }
  }
}

QuantumDefectModel builtin_defect_model(std::string_view element) {
  const std::string key = lowercase(element);
  if (key == "rb" || key == "rubidium") {
    return {"Rb", {{0, 3.131}, {1, 2.650}, {2, 1.348}, {3, 0.0165}}, 3};
  }
  if (key == "li" || key == "lithium") {
    return {"Li", {{0, 0.399}, {1, 0.047}, {2, 0.002}}, 2};
  }
  if (key == "h" || key == "hydrogen") {
    return {"H", {}, -1};
  }
  throw InvalidModelError("no built-in quantum defects for element '" + std::string(element) + "'");
}

QuantumDefectModel parse_defect_model(std::istream& in, const std::string& source) {
  QuantumDefectModel model;
  bool have_element = false;
  bool have_cutoff = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidModelError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "element") {
        model.element = value;
        have_element = true;
      } else if (key == "l_cutoff") {
        model.l_cutoff = std::stoi(value);
        have_cutoff = true;
      } else if (key.rfind("delta_", 0) == 0) {
        std::size_t used = 0;
        const int l = std::stoi(key.substr(6), &used);
        if (used != key.size() - 6) throw std::invalid_argument(key);
        if (model.defects.contains(l)) throw InvalidModelError(where + "duplicate key '" + key + "'");
        model.defects[l] = std::stod(value);
      } else {
        throw InvalidModelError(where + "unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw InvalidModelError(where + "cannot parse value for '" + key + "'");
    }
  }
  if (!have_element) throw InvalidModelError(source + ": missing 'element'");
  if (!have_cutoff) {
    model.l_cutoff = model.defects.empty() ? -1 : model.defects.rbegin()->first;
  }
  model.validate();
  return model;
}

QuantumDefectModel load_defect_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidModelError("cannot open defect file " + path.string());
  return parse_defect_model(in, path.string());
}

std::string RydbergState::label() const {
  static constexpr char letters[] = "spdfghiklmnoqrtuv";
  std::ostringstream os;
  os << n;
  if (l < static_cast<int>(sizeof(letters)) - 1) {
    os << letters[l];
  } else {
    os << "[l=" << l << "]";
  }
  if (l > 0) os << (m >= 0 ? "+" : "") << m;
  return os.str();
}

RydbergState parse_state_label(std::string_view text) {
  static constexpr std::string_view letters = "spdfghiklmnoqrtuv";
  auto fail = [&] { return ConfigError("invalid state label '" + std::string(text) + "'"); };
  std::size_t pos = 0;
  RydbergState s;
  auto read_int = [&](int& out) {
    const auto* first = text.data() + pos;
    const auto res = std::from_chars(first, text.data() + text.size(), out);
    if (res.ec != std::errc{} || res.ptr == first) throw fail();
    pos += static_cast<std::size_t>(res.ptr - first);
  };
  read_int(s.n);
  if (pos >= text.size()) throw fail();
  const auto l = letters.find(text[pos]);
  if (l == std::string_view::npos) throw fail();
  s.l = static_cast<int>(l);
  ++pos;
  if (pos == text.size()) {
    if (s.l != 0) throw fail();
  } else {
    if (text[pos] == '+') ++pos;
    read_int(s.m);
    if (pos != text.size()) throw fail();
  }
  validate_state(s);
  return s;
}

void validate_state(const RydbergState& s) {
  if (s.n < 1 || s.l < 0 || s.l >= s.n || std::abs(s.m) > s.l) {
    throw InvalidModelError("invalid quantum numbers (n=" + std::to_string(s.n) +
                            ", l=" + std::to_string(s.l) + ", m=" + std::to_string(s.m) + ")");
  }
}

double effective_n(int n, int l, const QuantumDefectModel& model) {
  return static_cast<double>(n) - model.defect(l);
}

double effective_n(const RydbergState& state, const QuantumDefectModel& model) {
  return effective_n(state.n, state.l, model);
}

double energy(int n, int l, const QuantumDefectModel& model) {
  const double n_eff = effective_n(n, l, model);
  if (!(n_eff > 0.0)) {
    throw InvalidModelError(model.element + ": non-positive effective quantum number for n=" +
                            std::to_string(n) + ", l=" + std::to_string(l));
  }
  return -0.5 / (n_eff * n_eff);
}

double energy(const RydbergState& state, const QuantumDefectModel& model) {
  return energy(state.n, state.l, model);
}

}  // namespace rydberg
