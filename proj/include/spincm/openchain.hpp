#pragma once

#include "spincm/liealg.hpp"
#include "spincm/orbits.hpp"

namespace spincm {

/// Point of the open-chain reduced phase space in radial coordinates:
/// antisymmetric boundary spins mu_left, mu_right in so(N), bulk rank-one
/// spins mu^(1..n) (each constrained only by a.b = xi), the Cartan momentum
/// p = diag of x^(n), and regular q with sum p = sum q = 0, q strictly
/// decreasing.
struct OpenRadialState {
  LieContext ctx;
  KOrbitPoint left;
  KOrbitPoint right;
  std::vector<RankOneOrbitPoint> spins;
  Vec p;
  Vec q;
  int n() const { return static_cast<int>(spins.size()); }
  std::vector<Mat> spin_matrices() const;
};

OpenRadialState make_open_state(const LieContext& ctx, KOrbitPoint left,
                                KOrbitPoint right,
                                std::vector<RankOneOrbitPoint> spins, Vec p,
                                Vec q, double tol = 1e-8);

OpenRadialState sample_open_state(const LieContext& ctx,
                                  const OrbitSpecification& spec, Rng& rng,
                                  double scale = 1.0);

// ---------------------------------------------------------------------------
// Formula layer on raw matrices: ml, mr antisymmetric, mu generic spin
// matrices, q any regular vector.
// ---------------------------------------------------------------------------

/// Boundary kernel in root coordinates:
/// K_a = (a_a mu'_[a] + mu''_[a]) / (a_a - a_a^{-1}),
/// where y_[a] denotes the doubled root coordinate of an antisymmetric y.
double boundary_K(const LieContext& ctx, const Mat& ml, const Mat& mr,
                  const Vec& q, const Root& r);

/// x^(k) for k = 0..n: root parts solve the open recursion
/// x_a = [a_a mu'_[a] + mu''_[a] + sum_{l<=k} a_a (mu^(l)_a - mu^(l)_-a)
///        + sum_{l>k} (a_a^{-1} mu^(l)_a - a_a mu^(l)_-a)] / (a_a - a_a^{-1}),
/// Cartan part x_0^(k) = p - sum_{l>k} mu_0^(l).
Mat reconstruct_x_open(const LieContext& ctx, const Mat& ml, const Mat& mr,
                       const std::vector<Mat>& mu, const Vec& p, const Vec& q,
                       int k);

/// Rescaled r-matrix pairing:
/// r_kl = -1/2 (mu_0^(k), mu_0^(l)) + sum_a mu_-a^(k) mu_a^(l) / (a_a^2 - 1).
double felder_r_rescaled(const LieContext& ctx, const Mat& mu_k,
                         const Mat& mu_l, const Vec& q);

/// Involution-twisted pairing:
/// r^t_kl = 1/2 (mu_0^(k), mu_0^(l)) - sum_a mu_a^(k) mu_a^(l) / (a_a^2 - 1).
/// Symmetric in (k, l); equals felder_r_rescaled with the first argument
/// replaced by -mu_k^T.
double theta_twist_r(const LieContext& ctx, const Mat& mu_k, const Mat& mu_l,
                     const Vec& q);

/// kappa_k = 1/2 (mu_0^(k), mu_0^(k)) + sum_a (mu_a^(k))^2 / (1 - a_a^2).
double kappa(const LieContext& ctx, const Mat& mu_k, const Vec& q);

/// D_k = (mu_0^(k), p) - sum_{l<k} (r_lk + r^t_lk)
///       + sum_a K_a mu_-a^(k) - kappa_k + sum_{l>k} (r_kl - r^t_kl),
/// for k = 1..n. Equals 1/2 (x^(k), x^(k)) - 1/2 (x^(k-1), x^(k-1)).
double bkzb_D(const LieContext& ctx, const Mat& ml, const Mat& mr,
              const std::vector<Mat>& mu, const Vec& p, const Vec& q, int k);

/// Closed form of H_2^(n) = 1/2 (x^(n), x^(n)):
/// 1/2 (p,p) + sum_{a>0} u_a v_a / (a_a - a_a^{-1})^2 with
/// u_a = a_a mu'_[a] + mu''_[a] + a_a (mu_a - mu_-a),
/// v_a = a_a^{-1} mu'_[a] + mu''_[a] + a_a^{-1} (mu_a - mu_-a),
/// where mu = sum_k mu^(k).
double h2_open_closed(const LieContext& ctx, const Mat& ml, const Mat& mr,
                      const std::vector<Mat>& mu, const Vec& p, const Vec& q);

/// Casimir Hamiltonian H = Tr(x^(k)^d), 2 <= d <= N, k = 0..n.
double hamiltonian_open(const LieContext& ctx, const Mat& ml, const Mat& mr,
                        const std::vector<Mat>& mu, const Vec& p, const Vec& q,
                        int k, int d);

// Typed wrappers.
Mat reconstruct_x_open(const OpenRadialState& s, int k);
double felder_r_rescaled(const OpenRadialState& s, int k, int l);
double bkzb_D(const OpenRadialState& s, int k);
double h2_open_closed(const OpenRadialState& s);
double hamiltonian_open(const OpenRadialState& s, int k, int d);

}  // namespace spincm
