#pragma once

#include <string>

#include "spincm/openchain.hpp"
#include "spincm/periodic.hpp"

namespace spincm {

enum class ChainKind { periodic, open };

/// Which commuting Hamiltonian drives a flow: H = Tr(x^(site)^degree).
/// Valid sites are 1..n for the periodic chain and 0..n for the open one;
/// valid degrees are 2..N.
struct HamiltonianId {
  int site = 1;
  int degree = 2;
};

// ---------------------------------------------------------------------------
// Flat chart over a chain state. Coordinates are ordered
// [p q a^(1) b^(1) ... a^(n) b^(n)] and, for the open chain, the strict
// upper triangles (row major) of the left and right boundary matrices.
// xi per site is not a coordinate: it is the function a.b.
// ---------------------------------------------------------------------------
struct ChartLayout {
  int N = 0;
  int n = 0;
  bool open = false;
  int tri() const { return N * (N - 1) / 2; }
  int p_off() const { return 0; }
  int q_off() const { return N; }
  int a_off(int k) const { return 2 * N + 2 * N * (k - 1); }  // k = 1..n
  int b_off(int k) const { return a_off(k) + N; }
  int left_off() const { return 2 * N + 2 * N * n; }
  int right_off() const { return left_off() + tri(); }
  int dim() const { return 2 * N + 2 * N * n + (open ? 2 * tri() : 0); }
};

ChartLayout layout_for(const PeriodicRadialState& s);
ChartLayout layout_for(const OpenRadialState& s);

Vec to_flat(const PeriodicRadialState& s);
Vec to_flat(const OpenRadialState& s);

/// Rebuild a state from chart coordinates. Per-spin xi is recomputed as
/// a.b and boundary spectra are recomputed from the matrices; no chain
/// constraint is re-imposed, so off-shell points (finite-difference
/// probes, integrator stages) are representable.
PeriodicRadialState from_flat(const PeriodicRadialState& tmpl, const Vec& z);
OpenRadialState from_flat(const OpenRadialState& tmpl, const Vec& z);

/// Flattened antisymmetric-matrix helpers for the boundary blocks.
Vec upper_tri(const Mat& y);
Mat from_upper_tri(int N, const Vec& coeffs);

// ---------------------------------------------------------------------------
// Poisson structure on the chart. Every sector carries the 1/(2N) scale of
// the invariant form, which is exactly what makes the Casimir family
// commute across sites:
//   {q_i, p_j} = (delta_ij - 1/N) / (2N),
//   {a_i^(k), b_j^(k)} = delta_ij / (2N) per site,
//   {F, G}(Y) = -1/(2N) Tr(Y [grad F, grad G]) on each boundary block,
//   where grad assembles the antisymmetric matrix with (i,j) entry equal
//   to half the partial in the upper-tri coordinate.
// ---------------------------------------------------------------------------

double poisson_bracket(const ChartLayout& lay, const Vec& z, const Vec& grad_f,
                       const Vec& grad_g);

/// Hamiltonian vector field z_dot from a chart gradient of H at z.
Vec hamiltonian_field(const ChartLayout& lay, const Vec& z, const Vec& grad_h);

/// Analytic chart gradient of hamiltonian(s, id.site, id.degree).
Vec grad_hamiltonian(const PeriodicRadialState& s, const HamiltonianId& id);
Vec grad_hamiltonian(const OpenRadialState& s, const HamiltonianId& id);

double eval_hamiltonian(const PeriodicRadialState& s, const HamiltonianId& id);
double eval_hamiltonian(const OpenRadialState& s, const HamiltonianId& id);

// ---------------------------------------------------------------------------
// Numerical integration of the radial flow.
// ---------------------------------------------------------------------------

struct IntegratorOptions {
  std::string method = "rk4";  // rk4 | midpoint | adaptive
  double step = 1e-3;          // fixed step size (rk4, midpoint)
  double tol = 1e-10;          // local error tolerance (adaptive)
  bool reproject = true;       // re-impose spin relations after each step
  long max_steps = 50000000;
};

template <class State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
};

/// Integrate the flow of id from s0 over [0, T], recording samples+1
/// uniformly spaced states (including both endpoints).
Trajectory<PeriodicRadialState> integrate(const PeriodicRadialState& s0,
                                          const HamiltonianId& id, double T,
                                          const IntegratorOptions& opt,
                                          int samples);
Trajectory<OpenRadialState> integrate(const OpenRadialState& s0,
                                      const HamiltonianId& id, double T,
                                      const IntegratorOptions& opt,
                                      int samples);

// ---------------------------------------------------------------------------
// Extended (group-level) states and the exact projection-method flow.
// ---------------------------------------------------------------------------

/// Chain point on the unreduced space: site moments x and transport group
/// legs g. Periodic: x^(1..n), g_1..g_n stored 0-based. Open: x^(0..n),
/// g_0..g_n.
struct ExtendedState {
  ChainKind kind = ChainKind::periodic;
  std::vector<Mat> x;
  std::vector<Mat> g;
  int N() const { return x.empty() ? 0 : static_cast<int>(x.front().rows()); }
  int legs() const { return static_cast<int>(x.size()); }
};

/// Canonical section: all transport legs are the identity except the last,
/// which is a = diag(exp q); the x legs are the reconstructed moments.
ExtendedState embed_extended(const PeriodicRadialState& s);
ExtendedState embed_extended(const OpenRadialState& s);

/// Exact flow of H = Tr(x_site^degree) for time t: x is unchanged and the
/// group leg at `site` is multiplied on the left by exp(t grad H), with
/// grad taken in the Killing metric. Site labels match HamiltonianId
/// (periodic 1..n, open 0..n).
void flow_extended(ExtendedState& es, int site, int degree, double t);

/// Gauge action for tests. Periodic: x_i -> h_i x_i h_i^{-1},
/// g_i -> h_i g_i h_{i+1}^{-1} (cyclic). Open: the h list covers the bulk
/// legs and kl, kr act on the ends.
void gauge_transform_periodic(ExtendedState& es, const std::vector<Mat>& h);
void gauge_transform_open(ExtendedState& es, const Mat& kl,
                          const std::vector<Mat>& h, const Mat& kr);

/// Return to radial coordinates: diagonalize the holonomy (periodic) or
/// take its SVD (open), transport every site moment into that frame, and
/// split off the spins. Throws std::domain_error when the holonomy is
/// outside the regular set (complex, nonpositive or colliding spectrum).
/// The result is canonical up to the residual gauge (diagonal conjugation
/// for the periodic chain, signed-diagonal conjugation for the open one).
PeriodicRadialState gauge_fix_periodic(const LieContext& ctx,
                                       const ExtendedState& es,
                                       const std::vector<double>& site_xi,
                                       double tol = 1e-8);
OpenRadialState gauge_fix_open(const LieContext& ctx, const ExtendedState& es,
                               const OrbitSpecification& spec,
                               double tol = 1e-8);

/// Gauge-invariant separation of two radial states: max abs difference of
/// p, q, spin-matrix diagonals, and all conjugation-invariant pair
/// products X_ij Y_ji between spin/boundary matrices.
double radial_distance(const PeriodicRadialState& sa,
                       const PeriodicRadialState& sb);
double radial_distance(const OpenRadialState& sa, const OpenRadialState& sb);

// ---------------------------------------------------------------------------
// Angle coordinates along the exact flow.
// ---------------------------------------------------------------------------

/// Signed value of a product of transported frame matrix elements; angle
/// functions are log|f| with the sign tracked separately.
struct AngleValue {
  double log_abs = 0.0;
  int sign = 1;
};

/// Periodic: f = prod_i (s_i g_i s_{i+1}^{-1})[m_i, m_{i+1}] with cyclic
/// indices, where s_i diagonalizes x_i with descending real spectrum.
/// m is 0-based, one weight per site (size n).
AngleValue angle_periodic(const ExtendedState& es, const std::vector<int>& m);

/// Open: f = prod_{i=0..n} ((s_i g_i s_{i+1}^{-1})[m_i, m_{i+1}])^2 with
/// orthogonal end frames from the symmetric parts of x_0 and of the
/// right-transported x_n. m has n+2 entries.
AngleValue angle_open(const ExtendedState& es, const std::vector<int>& m);

/// Predicted d/dt of the angle under flow_extended(site, degree):
/// [grad Tr(y^degree)]_{mm} at the sorted spectrum y of the flowed site
/// (doubled for the open chain).
double angle_slope_periodic(const ExtendedState& es, int site, int degree,
                            const std::vector<int>& m);
double angle_slope_open(const ExtendedState& es, int site, int degree,
                        const std::vector<int>& m);

}  // namespace spincm
