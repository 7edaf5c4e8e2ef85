#pragma once

#include <optional>
#include <string>

#include "spincm/jsonio.hpp"

namespace spincm {

/// Process exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;       // everything passed
inline constexpr int kExitFail = 1;     // ran fine, a check failed
inline constexpr int kExitConfig = 2;   // usage or config error
inline constexpr int kExitRuntime = 3;  // regularity loss mid-run

/// Command-line options after parsing; optionals override config values.
struct RunnerOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<unsigned long long> seed;
  std::optional<std::string> format;
  std::optional<double> tol;
  bool assert_free_flight = false;
};

/// Cap the worker pool from SPINCM_THREADS (positive integer). Unset or
/// malformed values leave the default.
void configure_threads();

/// Integrate the configured chain and write the trajectory to
/// <out>/<prefix>.{json,csv}. With assert_free_flight the spins are
/// aligned so every coupling vanishes, and the run fails (exit 3) unless
/// q(t) is linear and p constant to 1e-9. A mid-run regularity loss
/// writes the partial trajectory with its failure time and exits 3.
int cmd_simulate(const RunnerOptions& opt);

/// Run one suite or a suite group, write <out>/report_<leaf>.json per
/// leaf, print one verdict line each. Exit 0 iff all leaves pass.
int cmd_verify(const std::string& suite, const RunnerOptions& opt);

/// Integrate numerically and via the exact factorization flow, write both
/// trajectories plus a distance report, and compare the sup separation
/// against the tolerance (default 1e-6). Exit 0 iff within tolerance.
int cmd_compare(const RunnerOptions& opt);

}  // namespace spincm
