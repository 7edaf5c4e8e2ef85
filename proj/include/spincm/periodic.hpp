#pragma once

#include "spincm/liealg.hpp"
#include "spincm/orbits.hpp"

namespace spincm {

/// Point of the periodic-chain reduced phase space in radial coordinates:
/// n rank-one spins mu^(1..n), the Cartan momentum p = x_0^(n), and
/// q = log a on the regular torus. Invariants (enforced by
/// make_periodic_state): sum p = sum q = 0, q strictly decreasing and
/// regular, and the Cartan moment constraint sum_k diag(mu^(k)) = 0.
struct PeriodicRadialState {
  LieContext ctx;
  std::vector<RankOneOrbitPoint> spins;
  Vec p;
  Vec q;
  int n() const { return static_cast<int>(spins.size()); }
  std::vector<Mat> spin_matrices() const;
};

PeriodicRadialState make_periodic_state(const LieContext& ctx,
                                        std::vector<RankOneOrbitPoint> spins,
                                        Vec p, Vec q, double tol = 1e-8);

/// Draw a random valid state: constrained spins, Gaussian trace-free p,
/// sorted well-separated trace-free q.
PeriodicRadialState sample_periodic_state(const LieContext& ctx,
                                          const OrbitSpecification& spec,
                                          Rng& rng, double scale = 1.0);

// ---------------------------------------------------------------------------
// Formula layer on raw spin matrices. The q vector may be any regular
// vector (W-chamber sorting is a state-level convention, not a formula
// requirement); generic coadjoint orbits enter as explicit mu matrices.
// ---------------------------------------------------------------------------

/// x^(k) for k = 1..n: root parts
/// x_a = [a_a (mu^(1)+..+mu^(k))_a + (mu^(k+1)+..+mu^(n))_a] / (a_a - 1),
/// Cartan part x_0^(k) = p - mu_0^(n) - ... - mu_0^(k+1).
Mat reconstruct_x(const LieContext& ctx, const std::vector<Mat>& mu,
                  const Vec& p, const Vec& q, int k);

/// Dynamical r-matrix pairing of spins k and l:
/// r_kl = -1/2 (mu_0^(k), mu_0^(l)) + sum_a mu_-a^(k) mu_a^(l) / (a_a - 1).
double felder_r(const LieContext& ctx, const Mat& mu_k, const Mat& mu_l,
                const Vec& q);

/// Same value written as two sums over positive roots only.
double felder_r_positive_split(const LieContext& ctx, const Mat& mu_k,
                               const Mat& mu_l, const Vec& q);

/// D_k = (mu_0^(k), p) - sum_{l<k} r_lk + sum_{l>k} r_kl for k = 2..n.
/// Equals 1/2 (x^(k), x^(k)) - 1/2 (x^(k-1), x^(k-1)).
double kzb_D(const LieContext& ctx, const std::vector<Mat>& mu, const Vec& p,
             const Vec& q, int k);

/// Closed form of H_2^(n) = 1/2 (x^(n), x^(n)) in terms of the total spin
/// mu = sum_k mu^(k):
/// 1/2 (p,p) + sum_{a>0} mu_a mu_-a / ((1 - a_a)(1 - a_a^{-1})).
double h2_closed_form(const LieContext& ctx, const std::vector<Mat>& mu,
                      const Vec& p, const Vec& q);

/// Casimir Hamiltonian H = Tr(x^(k)^d), 2 <= d <= N, k = 1..n.
double hamiltonian(const LieContext& ctx, const std::vector<Mat>& mu,
                   const Vec& p, const Vec& q, int k, int d);

// Typed wrappers.
Mat reconstruct_x(const PeriodicRadialState& s, int k);
double felder_r(const PeriodicRadialState& s, int k, int l);
double kzb_D(const PeriodicRadialState& s, int k);
double h2_closed_form(const PeriodicRadialState& s);
double hamiltonian(const PeriodicRadialState& s, int k, int d);

}  // namespace spincm
