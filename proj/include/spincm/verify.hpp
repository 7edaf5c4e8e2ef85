#pragma once

#include <optional>
#include <string>

#include "spincm/dynamics.hpp"

namespace spincm {

// ---------------------------------------------------------------------------
// Trace-word invariants on extended states.
// ---------------------------------------------------------------------------

/// A word over {Y, Z} attached to a site: Y is the site moment x_i and Z is
/// the transported neighbour Ad*_{g_{i-1}^{-1}} x_{i-1} (indices cyclic for
/// the periodic chain). For the open chain, site 0 and site n+1 address the
/// boundary invariants: the word must then be Y-only and Y means the
/// antisymmetric projection of x_0 (left) or of Ad*_{g_n^{-1}} x_n (right).
struct TraceWordSpec {
  int site = 1;
  std::string word = "YY";
};

/// Trace of the word. Gauge invariant, and conserved along every
/// flow_extended.
double trace_word(const ExtendedState& es, const TraceWordSpec& spec);

/// A stock list of low-degree words covering every site (and both
/// boundaries for the open chain).
std::vector<TraceWordSpec> default_trace_words(const ExtendedState& es);

// ---------------------------------------------------------------------------
// Structure probes.
// ---------------------------------------------------------------------------

/// Conserved-quantity scan of a trajectory-like sequence of values.
struct ConservationReport {
  std::vector<std::string> labels;
  std::vector<double> initial;
  std::vector<double> max_abs_drift;
  std::vector<double> max_rel_drift;
  double tolerance = 0.0;
  bool pass = false;
};

/// Numerical rank with a relative singular-value threshold; *gap_ok is
/// cleared when the spectral gap around the cut is smaller than 10x the
/// threshold.
int numeric_rank(const Mat& m, double rel_tol, bool* gap_ok);

/// Rank of the chart-gradient matrix of the commuting family
/// {H_d^(k) : sites x degrees}. Expected n(N-1) for the periodic chain.
int liouville_count_probe(const PeriodicRadialState& s, bool* gap_ok = nullptr);
int liouville_count_probe(const OpenRadialState& s, bool* gap_ok = nullptr);

/// Tangent-space dimension bookkeeping at a state: dim_s is the dimension
/// of the reduced space (constraint tangent modulo gauge directions),
/// dim_b the number of independent commuting Hamiltonians on it, and
/// dim_p = dim_s - dim_b.
struct DimensionProbe {
  int dim_s = 0;
  int dim_b = 0;
  int dim_p = 0;
  bool rank_gap_ok = true;
};
DimensionProbe dimension_probe(const PeriodicRadialState& s);
DimensionProbe dimension_probe(const OpenRadialState& s);

// ---------------------------------------------------------------------------
// The two-site involution on extended states and its equivariance.
// ---------------------------------------------------------------------------

/// (x1, x2, g1, g2) -> (-x1, Ad*_{g1} x2, g1, g1 g2 g1); defined for
/// two-site periodic extended states.
ExtendedState psi_map(const ExtendedState& es);

/// Residual of the intertwining property between the chain gauge action of
/// (h1, h2) and the twisted action (Ad*_{h1} on both moments, h1 . h2^{-1}
/// on both legs) on the image.
double psi_equivariance_check(const ExtendedState& es, const Mat& h1,
                              const Mat& h2);

// ---------------------------------------------------------------------------
// Well-separated random states for long integrations: descending p aligned
// with descending q (separations grow), wide torus gaps, spin fluctuations
// damped while honouring the orbit data exactly.
// ---------------------------------------------------------------------------

PeriodicRadialState sample_tame_periodic(const LieContext& ctx,
                                         const OrbitSpecification& spec,
                                         Rng& rng);
OpenRadialState sample_tame_open(const LieContext& ctx,
                                 const OrbitSpecification& spec, Rng& rng);

// ---------------------------------------------------------------------------
// Certification suites. Every suite is deterministic in `seed` and
// independent of the thread count; tol == nullopt picks the suite default.
// ---------------------------------------------------------------------------

struct CaseResult {
  std::string label;
  double residual = 0.0;
  bool pass = false;
};

struct Report {
  std::string suite;
  int trials = 0;
  double tolerance = 0.0;
  double max_residual = 0.0;
  bool pass = false;
  std::vector<CaseResult> per_case;
};

using Tol = std::optional<double>;

/// Closed-form D_k against the reconstructed Casimir difference
/// 1/2 (x^(k), x^(k)) - 1/2 (x^(k-1), x^(k-1)); relative residuals.
Report dk_suite(ChainKind kind, int trials = 1000, Tol tol = {},
                unsigned long long seed = 1);

/// Twisted r-matrix symmetry: the direct formula against two involution
/// code paths.
Report twist_symmetry_suite(int trials = 200, Tol tol = {},
                            unsigned long long seed = 1);

/// Pairwise Poisson brackets of the commuting family from analytic chart
/// gradients.
Report commute_suite(ChainKind kind, int trials = 200, Tol tol = {},
                     unsigned long long seed = 1);

/// Trace-word drift under exact extended flows at every site and degree.
Report conserve_exact_suite(ChainKind kind, Tol tol = {},
                            unsigned long long seed = 1);

/// Trace-word drift along integrated radial trajectories of the quadratic
/// Hamiltonian at the last site, T = 10.
Report conserve_ode_suite(ChainKind kind, Tol tol = {},
                          unsigned long long seed = 1);

/// Line-fit residual of log|f(t)| along exact flows, plus slope match and
/// (open chain) signed-diagonal invariance.
Report angle_suite(ChainKind kind, Tol tol = {}, unsigned long long seed = 1);

/// Sup gauge-invariant distance between projection-method and integrated
/// trajectories over T = 1, N in {2,3}, n in {1,2}.
Report projection_suite(ChainKind kind, Tol tol = {},
                        unsigned long long seed = 1);

/// Equivariance residual of the two-site involution over random states.
Report psi_equivariance_suite(int trials = 100, Tol tol = {},
                              unsigned long long seed = 1);

/// Leaf swap of the two-site involution: Casimir spectra of the twisted
/// moments match the opposite site orbits.
Report psi_leaf_suite(int trials = 100, Tol tol = {},
                      unsigned long long seed = 1);

/// Dimension probes across >= `states` random states per size.
Report dims_suite(ChainKind kind, int states = 20, unsigned long long seed = 1);

/// Quadratic Casimir of the rank-one orbit equals xi^2 (1 - 1/N).
Report rank1_casimir_suite(int trials = 200, Tol tol = {},
                           unsigned long long seed = 1);

/// Local-spin pairing identity on constrained chains.
Report rank1_gspin_suite(int trials = 200, Tol tol = {},
                         unsigned long long seed = 1);

/// Liouville count probe equals n(N-1) on the stock size list.
Report liouville_rank_suite(int states_per_size = 5,
                            unsigned long long seed = 1);

/// Leaf suite registry: names accepted by run_suite.
std::vector<std::string> suite_names();

/// Run one leaf suite by name with default trial counts. Throws
/// std::invalid_argument for unknown names.
Report run_suite(const std::string& name, unsigned long long seed, Tol tol = {});

/// Names of the leaf suites behind a CLI suite group (dk, commute,
/// conserve, angles, projection, psi, dims, liouville, all). A single
/// leaf name is accepted too; unknown names yield an empty list.
std::vector<std::string> suite_group(const std::string& group);

}  // namespace spincm
