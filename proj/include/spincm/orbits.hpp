#pragma once

#include "spincm/liealg.hpp"

namespace spincm {

/// Point of the rank-one coadjoint orbit with parameter xi, in (a, b)
/// coordinates: mu = b a^T - (xi/N) Id with a^T b = xi. The pair is defined
/// modulo the scaling gauge (a, b) ~ (lambda a, lambda^{-1} b).
struct RankOneOrbitPoint {
  double xi = 0.0;
  Vec a;
  Vec b;
  int N() const { return static_cast<int>(a.size()); }
  double constraint_residual() const { return a.dot(b) - xi; }
};

/// mu = b a^T - (xi/N) Id. Throws if a^T b strays from xi beyond tol.
Mat embed_rank1(const RankOneOrbitPoint& pt, double tol = 1e-8);

/// Representative with ||a|| = ||b|| and the first nonzero entry of a
/// positive. Idempotent; embed_rank1 is unchanged.
RankOneOrbitPoint normalize_gauge(const RankOneOrbitPoint& pt);

/// Inverse of embed_rank1 for a matrix known to lie on the xi orbit:
/// rank-one factorization of mu + (xi/N) Id, gauge normalized.
RankOneOrbitPoint factor_rank1(const Mat& mu, double xi, double tol = 1e-8);

/// Sum over sites of the diagonal of the embedded spin matrices. Zero iff
/// the chain's Cartan moment constraint holds.
Vec chain_moment_residual(const std::vector<RankOneOrbitPoint>& spins);

/// Antisymmetric boundary matrix together with its conjugation-invariant
/// spectrum label (sorted rotation angles).
struct KOrbitPoint {
  Mat y;
  Vec spectrum;
  int N() const { return static_cast<int>(y.rows()); }
};

/// Rotation angles of an antisymmetric matrix: the floor(N/2) paired
/// singular values, sorted descending.
Vec antisymmetric_spectrum(const Mat& y);

/// Block-diagonal normal form with 2x2 rotation generators for each angle.
Mat k_orbit_normal_form(int N, const Vec& spectrum);

/// Random point on the SO(N)-conjugation orbit of the normal form.
KOrbitPoint sample_k_orbit(int N, const Vec& spectrum, Rng& rng);

/// Per-site orbit data for a chain. Boundary spectra apply to the open
/// chain only; an empty or zero spectrum is the trivial orbit.
struct OrbitSpecification {
  int N = 2;
  std::vector<double> site_xi;
  Vec left_spectrum;
  Vec right_spectrum;
  int sites() const { return static_cast<int>(site_xi.size()); }
  double xi_total() const;
  void validate() const;
};

/// Minimum-norm correction of the b vectors (at fixed a) so that
/// a^(k).b^(k) = xi_k for every site and, when with_cartan is set, the
/// Cartan moment relation sum_k a_i^(k) b_i^(k) = xi_total/N holds for
/// every index i. Both families are linear in b. Returns the max residual
/// after correction.
double project_spin_constraints(std::vector<RankOneOrbitPoint>& spins,
                                const std::vector<double>& site_xi,
                                bool with_cartan);

/// Sample spins satisfying both relation families of the periodic chain:
/// sum_i a_i^(k) b_i^(k) = xi_k for every site k, and
/// sum_k a_i^(k) b_i^(k) = xi_total/N for every index i
/// (the second family is the Cartan moment constraint). Residuals <= 1e-12.
std::vector<RankOneOrbitPoint> sample_constrained(const OrbitSpecification& spec,
                                                  Rng& rng);

/// Sample spins satisfying only the per-site constraint a^T b = xi_k
/// (the open chain has no Cartan constraint).
std::vector<RankOneOrbitPoint> sample_sites(const OrbitSpecification& spec,
                                            Rng& rng);

/// Local spin variables: for each index i = 1..N an n x n matrix
/// g^(i)_{kl} = b_i^(k) a_i^(l) - delta_{kl} xi_total/(N n). Requires the
/// Cartan moment constraint to hold.
std::vector<Mat> local_spins(const std::vector<RankOneOrbitPoint>& spins,
                             double tol = 1e-8);

}  // namespace spincm
