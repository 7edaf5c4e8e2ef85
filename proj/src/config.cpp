#include "spincm/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

namespace spincm {

ConfigError::ConfigError(const std::string& msg, int line, std::string key)
    : std::runtime_error(format(msg, line, key)),
      line_(line),
      key_(std::move(key)) {}

std::string ConfigError::format(const std::string& msg, int line,
                                const std::string& key) {
  std::ostringstream os;
  os << "config error";
  if (line > 0) os << " (line " << line << ")";
  if (!key.empty()) os << " [" << key << "]";
  os << ": " << msg;
  return os.str();
}

OrbitSpecification RunConfig::orbit_spec() const {
  OrbitSpecification spec;
  spec.N = N;
  spec.site_xi = site_xi;
  spec.left_spectrum = left_spectrum;
  spec.right_spectrum = right_spectrum;
  return spec;
}

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Entry {
  std::string value;
  int line = 0;
  mutable bool used = false;
};

using Section = std::map<std::string, Entry>;

struct IniTable {
  std::map<std::string, Section> sections;
  std::map<std::string, int> section_lines;
};

IniTable tokenize(const std::string& text) {
  IniTable tab;
  std::istringstream in(text);
  std::string raw;
  std::string current;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("malformed section header '" + raw + "'", lineno);
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty())
        throw ConfigError("empty section name", lineno);
      if (tab.sections.count(current))
        throw ConfigError("duplicate section [" + current + "]", lineno);
      tab.sections[current] = {};
      tab.section_lines[current] = lineno;
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value', got '" + raw + "'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", lineno);
    if (current.empty())
      throw ConfigError("key '" + key + "' outside any section", lineno, key);
    auto& sec = tab.sections[current];
    if (sec.count(key))
      throw ConfigError("duplicate key", lineno, current + "." + key);
    sec[key] = Entry{value, lineno, false};
  }
  return tab;
}

const Entry* find(const IniTable& tab, const std::string& section,
                  const std::string& key) {
  auto sit = tab.sections.find(section);
  if (sit == tab.sections.end()) return nullptr;
  auto kit = sit->second.find(key);
  if (kit == sit->second.end()) return nullptr;
  kit->second.used = true;
  return &kit->second;
}

const Entry& require(const IniTable& tab, const std::string& section,
                     const std::string& key) {
  const Entry* e = find(tab, section, key);
  if (!e) {
    const auto sl = tab.section_lines.find(section);
    throw ConfigError("missing required key",
                      sl == tab.section_lines.end() ? 0 : sl->second,
                      section + "." + key);
  }
  return *e;
}

long long parse_int(const Entry& e, const std::string& key) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("expected an integer, got '" + e.value + "'", e.line,
                      key);
  }
}

double parse_double(const Entry& e, const std::string& key) {
  try {
    size_t pos = 0;
    const double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + e.value + "'", e.line, key);
  }
}

Vec parse_spectrum(const Entry& e, const std::string& key, int max_len) {
  std::istringstream in(e.value);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) {
    try {
      size_t pos = 0;
      vals.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("expected numbers, got '" + tok + "'", e.line, key);
    }
  }
  if (static_cast<int>(vals.size()) > max_len)
    throw ConfigError("spectrum has more than floor(N/2) entries", e.line,
                      key);
  for (double v : vals)
    if (v < 0.0)
      throw ConfigError("spectrum entries must be >= 0", e.line, key);
  std::sort(vals.begin(), vals.end(), std::greater<double>());
  Vec out(static_cast<int>(vals.size()));
  for (int i = 0; i < out.size(); ++i) out[i] = vals[static_cast<size_t>(i)];
  return out;
}

void check_no_leftovers(const IniTable& tab) {
  static const char* known[] = {"chain", "boundary.left", "boundary.right",
                                "hamiltonian", "time", "output", "run"};
  for (const auto& [name, sec] : tab.sections) {
    const bool orbit = name.rfind("orbits.", 0) == 0;
    const bool ok =
        orbit || std::find_if(std::begin(known), std::end(known),
                              [&](const char* k) { return name == k; }) !=
                     std::end(known);
    if (!ok)
      throw ConfigError("unknown section [" + name + "]",
                        tab.section_lines.at(name));
    for (const auto& [key, entry] : sec)
      if (!entry.used)
        throw ConfigError("unknown key", entry.line, name + "." + key);
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  const IniTable tab = tokenize(text);
  RunConfig cfg;

  // [chain]
  {
    const Entry& kind = require(tab, "chain", "kind");
    if (kind.value == "periodic")
      cfg.chain = ChainKind::periodic;
    else if (kind.value == "open")
      cfg.chain = ChainKind::open;
    else
      throw ConfigError("kind must be 'periodic' or 'open'", kind.line,
                        "chain.kind");
    const long long N = parse_int(require(tab, "chain", "N"), "chain.N");
    if (N < 2 || N > 64)
      throw ConfigError("N must be in [2, 64]",
                        require(tab, "chain", "N").line, "chain.N");
    cfg.N = static_cast<int>(N);
    const long long n = parse_int(require(tab, "chain", "sites"),
                                  "chain.sites");
    if (n < 1 || n > 64)
      throw ConfigError("sites must be in [1, 64]",
                        require(tab, "chain", "sites").line, "chain.sites");
    cfg.n = static_cast<int>(n);
  }

  // [orbits.k]
  cfg.site_xi.resize(static_cast<size_t>(cfg.n), 0.0);
  for (int k = 1; k <= cfg.n; ++k) {
    const std::string sec = "orbits." + std::to_string(k);
    if (!tab.sections.count(sec))
      throw ConfigError("missing section [" + sec + "] (one per site)", 0,
                        sec);
    const Entry& xi = require(tab, sec, "xi");
    const double v = parse_double(xi, sec + ".xi");
    if (v == 0.0)
      throw ConfigError("xi must be nonzero", xi.line, sec + ".xi");
    cfg.site_xi[static_cast<size_t>(k - 1)] = v;
  }
  for (const auto& [name, sec] : tab.sections) {
    if (name.rfind("orbits.", 0) != 0) continue;
    const std::string idx = name.substr(7);
    bool numeric = !idx.empty() && std::all_of(idx.begin(), idx.end(), [](char c) {
                     return std::isdigit(static_cast<unsigned char>(c));
                   });
    const int k = numeric ? std::stoi(idx) : -1;
    if (k < 1 || k > cfg.n)
      throw ConfigError("orbit section index out of range 1..sites",
                        tab.section_lines.at(name), name);
  }

  // [boundary.*]
  const bool has_left = tab.sections.count("boundary.left") > 0;
  const bool has_right = tab.sections.count("boundary.right") > 0;
  if (cfg.chain == ChainKind::periodic && (has_left || has_right))
    throw ConfigError("boundary sections are only valid for the open chain",
                      tab.section_lines.at(has_left ? "boundary.left"
                                                    : "boundary.right"));
  if (cfg.chain == ChainKind::open) {
    if (has_left)
      cfg.left_spectrum = parse_spectrum(
          require(tab, "boundary.left", "spectrum"), "boundary.left.spectrum",
          cfg.N / 2);
    if (has_right)
      cfg.right_spectrum = parse_spectrum(
          require(tab, "boundary.right", "spectrum"),
          "boundary.right.spectrum", cfg.N / 2);
  }

  // [hamiltonian]
  {
    const long long site = parse_int(require(tab, "hamiltonian", "site"),
                                     "hamiltonian.site");
    const long long deg = parse_int(require(tab, "hamiltonian", "degree"),
                                    "hamiltonian.degree");
    const int lo = cfg.chain == ChainKind::open ? 0 : 1;
    if (site < lo || site > cfg.n)
      throw ConfigError("site out of range",
                        require(tab, "hamiltonian", "site").line,
                        "hamiltonian.site");
    if (deg < 2 || deg > cfg.N)
      throw ConfigError("degree must be in [2, N]",
                        require(tab, "hamiltonian", "degree").line,
                        "hamiltonian.degree");
    cfg.hamiltonian = HamiltonianId{static_cast<int>(site),
                                    static_cast<int>(deg)};
  }

  // [time]
  {
    const Entry& T = require(tab, "time", "T");
    cfg.T = parse_double(T, "time.T");
    if (!(cfg.T >= 0.0))
      throw ConfigError("T must be >= 0", T.line, "time.T");
    if (const Entry* e = find(tab, "time", "samples")) {
      const long long s = parse_int(*e, "time.samples");
      if (s < 1 || s > 1000000)
        throw ConfigError("samples must be in [1, 1e6]", e->line,
                          "time.samples");
      cfg.samples = static_cast<int>(s);
    }
    if (const Entry* e = find(tab, "time", "method")) {
      if (e->value != "rk4" && e->value != "midpoint" &&
          e->value != "adaptive")
        throw ConfigError("method must be rk4 | midpoint | adaptive", e->line,
                          "time.method");
      cfg.integrator.method = e->value;
    }
    if (const Entry* e = find(tab, "time", "step")) {
      cfg.integrator.step = parse_double(*e, "time.step");
      if (!(cfg.integrator.step > 0.0))
        throw ConfigError("step must be > 0", e->line, "time.step");
    }
    if (const Entry* e = find(tab, "time", "tol")) {
      cfg.integrator.tol = parse_double(*e, "time.tol");
      if (!(cfg.integrator.tol > 0.0))
        throw ConfigError("tol must be > 0", e->line, "time.tol");
    }
    if (const Entry* e = find(tab, "time", "reproject")) {
      if (e->value == "true" || e->value == "1")
        cfg.integrator.reproject = true;
      else if (e->value == "false" || e->value == "0")
        cfg.integrator.reproject = false;
      else
        throw ConfigError("reproject must be true|false", e->line,
                          "time.reproject");
    }
  }

  // [output]
  if (const Entry* e = find(tab, "output", "format")) {
    if (e->value != "json" && e->value != "csv" && e->value != "both")
      throw ConfigError("format must be json | csv | both", e->line,
                        "output.format");
    cfg.format = e->value;
  }
  if (const Entry* e = find(tab, "output", "prefix")) {
    if (e->value.empty() ||
        e->value.find_first_of("/\\") != std::string::npos)
      throw ConfigError("prefix must be a bare file stem", e->line,
                        "output.prefix");
    cfg.prefix = e->value;
  }

  // [run]
  if (const Entry* e = find(tab, "run", "seed")) {
    const long long s = parse_int(*e, "run.seed");
    if (s < 0) throw ConfigError("seed must be >= 0", e->line, "run.seed");
    cfg.seed = static_cast<unsigned long long>(s);
  }

  check_no_leftovers(tab);
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunConfig load_config(const std::string& path) {
  return parse_config_text(read_file(path));
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace spincm
