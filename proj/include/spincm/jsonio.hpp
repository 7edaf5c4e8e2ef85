#pragma once

#include <optional>
#include <string>

#include "spincm/config.hpp"
#include "spincm/verify.hpp"

namespace spincm {

/// Provenance stamped into every output file. When a run aborts mid-way,
/// failure_time/error mark the last valid sample so partial trajectories
/// stay interpretable.
struct OutputMeta {
  std::string config_hash;
  unsigned long long seed = 0;
  std::optional<double> failure_time;
  std::string error;
};

/// Trajectory as JSON: {meta, layout, times, states}; states carry p, q,
/// per-site spins {xi, a, b} and, for the open chain, the boundary
/// matrices as strict-upper-triangle coordinate lists. Doubles round-trip
/// exactly.
std::string trajectory_json(const Trajectory<PeriodicRadialState>& traj,
                            const OutputMeta& meta);
std::string trajectory_json(const Trajectory<OpenRadialState>& traj,
                            const OutputMeta& meta);

/// Trajectory as CSV, one row per sample. Column order: time, p_1..p_N,
/// q_1..q_N, then per site a_1..a_N, b_1..b_N, then the boundary
/// upper-triangle coordinates (left, right) for the open chain. The two
/// leading comment lines carry the provenance and the header.
std::string trajectory_csv(const Trajectory<PeriodicRadialState>& traj,
                           const OutputMeta& meta);
std::string trajectory_csv(const Trajectory<OpenRadialState>& traj,
                           const OutputMeta& meta);

/// Suite report as JSON: {suite, trials, tolerance, max_residual, pass,
/// per_case: [{label, residual, pass}], meta}.
std::string report_json(const Report& rep, const OutputMeta& meta);

/// Write via a temp file in the target directory followed by a rename, so
/// readers never observe a partial file.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace spincm
