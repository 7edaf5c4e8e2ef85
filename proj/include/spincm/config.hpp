#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "spincm/dynamics.hpp"

namespace spincm {

/// Config parse/validation failure carrying the offending line and key so
/// the CLI can report exact diagnostics (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line = 0, std::string key = "");
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  static std::string format(const std::string& msg, int line,
                            const std::string& key);
  int line_ = 0;
  std::string key_;
};

/// A full run description: chain shape, orbit data, driving Hamiltonian,
/// integration window, and output options.
struct RunConfig {
  ChainKind chain = ChainKind::periodic;
  int N = 2;
  int n = 1;
  std::vector<double> site_xi;
  Vec left_spectrum = Vec::Zero(0);   // open chain; empty means trivial
  Vec right_spectrum = Vec::Zero(0);
  HamiltonianId hamiltonian{1, 2};
  double T = 1.0;
  int samples = 100;
  IntegratorOptions integrator;
  unsigned long long seed = 1;
  std::string format = "json";  // json | csv | both
  std::string prefix = "run";

  OrbitSpecification orbit_spec() const;
};

/// Parse and validate an INI-style config. Sections: [chain], [orbits.k]
/// for k = 1..n, [boundary.left], [boundary.right] (open chain only),
/// [hamiltonian], [time], [output], [run]. Throws ConfigError on any
/// unknown section/key, missing field, or invariant violation.
RunConfig parse_config_text(const std::string& text);

/// Read a file fully; throws ConfigError if unreadable.
std::string read_file(const std::string& path);

RunConfig load_config(const std::string& path);

/// FNV-1a (64-bit) hash of the raw config text, as a hex string; stamped
/// into every output for provenance.
std::string config_hash(const std::string& text);

}  // namespace spincm
