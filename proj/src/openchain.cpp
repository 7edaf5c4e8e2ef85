#include "spincm/openchain.hpp"

#include <cmath>
#include <stdexcept>

namespace spincm {

namespace {

void check_antisymmetric(const Mat& y, const char* what) {
  if (y.rows() != y.cols() ||
      (y + y.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + y.cwiseAbs().maxCoeff()))
    throw std::invalid_argument(std::string(what) + ": matrix is not antisymmetric");
}

void check_sizes(const LieContext& ctx, const Mat& ml, const Mat& mr,
                 const std::vector<Mat>& mu, const Vec& p, const Vec& q) {
  const int N = ctx.N();
  if (ml.rows() != N || mr.rows() != N)
    throw std::invalid_argument("open chain: boundary matrix size mismatch");
  check_antisymmetric(ml, "open chain left boundary");
  check_antisymmetric(mr, "open chain right boundary");
  if (mu.empty()) throw std::invalid_argument("open chain: empty spin list");
  for (const Mat& m : mu)
    if (m.rows() != N || m.cols() != N)
      throw std::invalid_argument("open chain: spin matrix size mismatch");
  if (p.size() != N || q.size() != N)
    throw std::invalid_argument("open chain: p/q size mismatch");
  if (!is_regular(q, ctx.reg_epsilon()))
    throw std::invalid_argument("open chain: q is not regular");
}

}  // namespace

std::vector<Mat> OpenRadialState::spin_matrices() const {
  std::vector<Mat> out;
  out.reserve(spins.size());
  for (const auto& s : spins) out.push_back(embed_rank1(s));
  return out;
}

OpenRadialState make_open_state(const LieContext& ctx, KOrbitPoint left,
                                KOrbitPoint right,
                                std::vector<RankOneOrbitPoint> spins, Vec p,
                                Vec q, double tol) {
  const int N = ctx.N();
  if (left.N() != N || right.N() != N)
    throw std::invalid_argument("open state: boundary dimension mismatch");
  check_antisymmetric(left.y, "open state left boundary");
  check_antisymmetric(right.y, "open state right boundary");
  if (spins.empty()) throw std::invalid_argument("open state: no spins");
  for (const auto& s : spins) {
    if (s.N() != N)
      throw std::invalid_argument("open state: spin dimension mismatch");
    if (std::abs(s.constraint_residual()) > tol * (1.0 + std::abs(s.xi)))
      throw std::invalid_argument("open state: spin constraint a.b = xi violated");
  }
  if (p.size() != N || q.size() != N)
    throw std::invalid_argument("open state: p/q size mismatch");
  if (std::abs(p.sum()) > tol || std::abs(q.sum()) > tol)
    throw std::invalid_argument("open state: p,q must be trace-free");
  for (int i = 0; i + 1 < N; ++i)
    if (!(q(i) > q(i + 1)))
      throw std::invalid_argument("open state: q must be strictly decreasing");
  if (!is_regular(q, ctx.reg_epsilon()))
    throw std::invalid_argument("open state: q is not regular");
  return OpenRadialState{ctx,          std::move(left), std::move(right),
                         std::move(spins), std::move(p),   std::move(q)};
}

OpenRadialState sample_open_state(const LieContext& ctx,
                                  const OrbitSpecification& spec, Rng& rng,
                                  double scale) {
  const int N = ctx.N();
  if (spec.N != N) throw std::invalid_argument("sample_open_state: N mismatch");
  KOrbitPoint left = sample_k_orbit(N, spec.left_spectrum, rng);
  KOrbitPoint right = sample_k_orbit(N, spec.right_spectrum, rng);
  std::vector<RankOneOrbitPoint> spins = sample_sites(spec, rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec p(N);
  for (int i = 0; i < N; ++i) p(i) = scale * gauss(rng);
  p.array() -= p.mean();
  Vec q(N);
  for (int attempt = 0;; ++attempt) {
    for (int i = 0; i < N; ++i) q(i) = scale * gauss(rng);
    std::sort(q.data(), q.data() + N, std::greater<double>());
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < N; ++i) min_gap = std::min(min_gap, q(i) - q(i + 1));
    if (min_gap > 0.2 * scale) break;
    if (attempt > 256)
      throw std::runtime_error("sample_open_state: could not draw regular q");
  }
  q.array() -= q.mean();
  return make_open_state(ctx, std::move(left), std::move(right),
                         std::move(spins), std::move(p), std::move(q));
}

double boundary_K(const LieContext& ctx, const Mat& ml, const Mat& mr,
                  const Vec& q, const Root& r) {
  const double a = root_value(q, r);
  return ctx.root_scale() * (2.0 * a * ml(r.i, r.j) + 2.0 * mr(r.i, r.j)) /
         (a - 1.0 / a);
}

Mat reconstruct_x_open(const LieContext& ctx, const Mat& ml, const Mat& mr,
                       const std::vector<Mat>& mu, const Vec& p, const Vec& q,
                       int k) {
  check_sizes(ctx, ml, mr, mu, p, q);
  const int n = static_cast<int>(mu.size());
  if (k < 0 || k > n)
    throw std::invalid_argument("reconstruct_x_open: site index out of range");
  const int N = ctx.N();
  Mat x = Mat::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const double a = std::exp(q(i) - q(j));
      const double den = a - 1.0 / a;
      double num = 2.0 * a * ml(i, j) + 2.0 * mr(i, j);
      for (int l = 0; l < n; ++l) {
        if (l < k)
          num += a * (mu[l](i, j) - mu[l](j, i));
        else
          num += mu[l](i, j) / a - a * mu[l](j, i);
      }
      x(i, j) = num / den;
    }
    double diag = p(i);
    for (int l = k; l < n; ++l) diag -= mu[l](i, i);
    x(i, i) = diag;
  }
  return x;
}

double felder_r_rescaled(const LieContext& ctx, const Mat& mu_k,
                         const Mat& mu_l, const Vec& q) {
  const int N = ctx.N();
  const double ks = ctx.killing_scale();
  double r = -0.5 * ks * mu_k.diagonal().dot(mu_l.diagonal());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const double a2 = std::exp(2.0 * (q(i) - q(j)));
      r += ks * mu_k(j, i) * mu_l(i, j) / (a2 - 1.0);
    }
  return r;
}

double theta_twist_r(const LieContext& ctx, const Mat& mu_k, const Mat& mu_l,
                     const Vec& q) {
  const int N = ctx.N();
  const double ks = ctx.killing_scale();
  double r = 0.5 * ks * mu_k.diagonal().dot(mu_l.diagonal());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const double a2 = std::exp(2.0 * (q(i) - q(j)));
      r -= ks * mu_k(i, j) * mu_l(i, j) / (a2 - 1.0);
    }
  return r;
}

double kappa(const LieContext& ctx, const Mat& mu_k, const Vec& q) {
  const int N = ctx.N();
  const double ks = ctx.killing_scale();
  double val = 0.5 * ks * mu_k.diagonal().squaredNorm();
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const double a2 = std::exp(2.0 * (q(i) - q(j)));
      val += ks * mu_k(i, j) * mu_k(i, j) / (1.0 - a2);
    }
  return val;
}

double bkzb_D(const LieContext& ctx, const Mat& ml, const Mat& mr,
              const std::vector<Mat>& mu, const Vec& p, const Vec& q, int k) {
  check_sizes(ctx, ml, mr, mu, p, q);
  const int n = static_cast<int>(mu.size());
  if (k < 1 || k > n) throw std::invalid_argument("bkzb_D: k must be in 1..n");
  const int ki = k - 1;  // 0-based
  const int N = ctx.N();
  const double ks = ctx.killing_scale();
  double d = ks * mu[ki].diagonal().dot(p);
  for (int l = 0; l < ki; ++l)
    d -= felder_r_rescaled(ctx, mu[l], mu[ki], q) +
         theta_twist_r(ctx, mu[l], mu[ki], q);
  // Boundary term sum_a K_a mu_-a^(k) - kappa_k.
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const double a = std::exp(q(i) - q(j));
      d += ks * (2.0 * a * ml(i, j) + 2.0 * mr(i, j)) * mu[ki](j, i) /
           (a - 1.0 / a);
    }
  d -= kappa(ctx, mu[ki], q);
  for (int l = ki + 1; l < n; ++l)
    d += felder_r_rescaled(ctx, mu[ki], mu[l], q) -
         theta_twist_r(ctx, mu[ki], mu[l], q);
  return d;
}

double h2_open_closed(const LieContext& ctx, const Mat& ml, const Mat& mr,
                      const std::vector<Mat>& mu, const Vec& p, const Vec& q) {
  check_sizes(ctx, ml, mr, mu, p, q);
  const int N = ctx.N();
  const double ks = ctx.killing_scale();
  Mat total = Mat::Zero(N, N);
  for (const Mat& m : mu) total += m;
  double h = 0.5 * ks * p.dot(p);
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      const double a = std::exp(q(i) - q(j));
      const double den = a - 1.0 / a;
      const double skew = total(i, j) - total(j, i);
      const double u = 2.0 * a * ml(i, j) + 2.0 * mr(i, j) + a * skew;
      const double v = 2.0 / a * ml(i, j) + 2.0 * mr(i, j) + skew / a;
      h += ks * u * v / (den * den);
    }
  return h;
}

double hamiltonian_open(const LieContext& ctx, const Mat& ml, const Mat& mr,
                        const std::vector<Mat>& mu, const Vec& p, const Vec& q,
                        int k, int d) {
  return casimir(d, reconstruct_x_open(ctx, ml, mr, mu, p, q, k));
}

Mat reconstruct_x_open(const OpenRadialState& s, int k) {
  return reconstruct_x_open(s.ctx, s.left.y, s.right.y, s.spin_matrices(), s.p,
                            s.q, k);
}

double felder_r_rescaled(const OpenRadialState& s, int k, int l) {
  if (k < 1 || k > s.n() || l < 1 || l > s.n())
    throw std::invalid_argument("felder_r_rescaled: site index out of range");
  return felder_r_rescaled(s.ctx, embed_rank1(s.spins[k - 1]),
                           embed_rank1(s.spins[l - 1]), s.q);
}

double bkzb_D(const OpenRadialState& s, int k) {
  return bkzb_D(s.ctx, s.left.y, s.right.y, s.spin_matrices(), s.p, s.q, k);
}

double h2_open_closed(const OpenRadialState& s) {
  return h2_open_closed(s.ctx, s.left.y, s.right.y, s.spin_matrices(), s.p,
                        s.q);
}

double hamiltonian_open(const OpenRadialState& s, int k, int d) {
  return hamiltonian_open(s.ctx, s.left.y, s.right.y, s.spin_matrices(), s.p,
                          s.q, k, d);
}

}  // namespace spincm
