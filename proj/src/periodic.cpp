#include "spincm/periodic.hpp"

#include <cmath>
#include <stdexcept>

namespace spincm {

namespace {

void check_site(int k, int n, const char* what) {
  if (k < 1 || k > n)
    throw std::invalid_argument(std::string(what) + ": site index out of range");
}

void check_sizes(const LieContext& ctx, const std::vector<Mat>& mu,
                 const Vec& p, const Vec& q) {
  const int N = ctx.N();
  if (mu.empty()) throw std::invalid_argument("periodic: empty spin list");
  for (const Mat& m : mu)
    if (m.rows() != N || m.cols() != N)
      throw std::invalid_argument("periodic: spin matrix size mismatch");
  if (p.size() != N || q.size() != N)
    throw std::invalid_argument("periodic: p/q size mismatch");
  if (!is_regular(q, ctx.reg_epsilon()))
    throw std::invalid_argument("periodic: q is not regular");
}

}  // namespace

std::vector<Mat> PeriodicRadialState::spin_matrices() const {
  std::vector<Mat> out;
  out.reserve(spins.size());
  for (const auto& s : spins) out.push_back(embed_rank1(s));
  return out;
}

PeriodicRadialState make_periodic_state(const LieContext& ctx,
                                        std::vector<RankOneOrbitPoint> spins,
                                        Vec p, Vec q, double tol) {
  const int N = ctx.N();
  if (spins.empty()) throw std::invalid_argument("periodic state: no spins");
  for (const auto& s : spins)
    if (s.N() != N)
      throw std::invalid_argument("periodic state: spin dimension mismatch");
  if (p.size() != N || q.size() != N)
    throw std::invalid_argument("periodic state: p/q size mismatch");
  if (std::abs(p.sum()) > tol || std::abs(q.sum()) > tol)
    throw std::invalid_argument("periodic state: p,q must be trace-free");
  for (int i = 0; i + 1 < N; ++i)
    if (!(q(i) > q(i + 1)))
      throw std::invalid_argument("periodic state: q must be strictly decreasing");
  if (!is_regular(q, ctx.reg_epsilon()))
    throw std::invalid_argument("periodic state: q is not regular");
  if (chain_moment_residual(spins).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("periodic state: Cartan moment constraint violated");
  return PeriodicRadialState{ctx, std::move(spins), std::move(p), std::move(q)};
}

PeriodicRadialState sample_periodic_state(const LieContext& ctx,
                                          const OrbitSpecification& spec,
                                          Rng& rng, double scale) {
  const int N = ctx.N();
  if (spec.N != N) throw std::invalid_argument("sample_periodic_state: N mismatch");
  std::vector<RankOneOrbitPoint> spins = sample_constrained(spec, rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec p(N);
  for (int i = 0; i < N; ++i) p(i) = scale * gauss(rng);
  p.array() -= p.mean();
  // Sorted Gaussian q with a floor on consecutive gaps keeps a_a away from 1.
  Vec q(N);
  for (int attempt = 0;; ++attempt) {
    for (int i = 0; i < N; ++i) q(i) = scale * gauss(rng);
    std::sort(q.data(), q.data() + N, std::greater<double>());
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < N; ++i) min_gap = std::min(min_gap, q(i) - q(i + 1));
    if (min_gap > 0.2 * scale) break;
    if (attempt > 256)
      throw std::runtime_error("sample_periodic_state: could not draw regular q");
  }
  q.array() -= q.mean();
  return make_periodic_state(ctx, std::move(spins), std::move(p), std::move(q));
}

Mat reconstruct_x(const LieContext& ctx, const std::vector<Mat>& mu,
                  const Vec& p, const Vec& q, int k) {
  check_sizes(ctx, mu, p, q);
  const int n = static_cast<int>(mu.size());
  check_site(k, n, "reconstruct_x");
  const int N = ctx.N();
  Mat x = Mat::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const double a = std::exp(q(i) - q(j));
      double num = 0.0;
      for (int l = 0; l < n; ++l) num += (l < k ? a : 1.0) * mu[l](i, j);
      x(i, j) = num / (a - 1.0);
    }
    double diag = p(i);
    for (int l = k; l < n; ++l) diag -= mu[l](i, i);
    x(i, i) = diag;
  }
  return x;
}

double felder_r(const LieContext& ctx, const Mat& mu_k, const Mat& mu_l,
                const Vec& q) {
  const int N = ctx.N();
  const double ks = ctx.killing_scale();
  double r = -0.5 * ks * mu_k.diagonal().dot(mu_l.diagonal());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const double a = std::exp(q(i) - q(j));
      r += ks * mu_k(j, i) * mu_l(i, j) / (a - 1.0);
    }
  return r;
}

double felder_r_positive_split(const LieContext& ctx, const Mat& mu_k,
                               const Mat& mu_l, const Vec& q) {
  const int N = ctx.N();
  const double ks = ctx.killing_scale();
  double r = -0.5 * ks * mu_k.diagonal().dot(mu_l.diagonal());
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      const double a = std::exp(q(i) - q(j));
      r += ks * (mu_k(j, i) * mu_l(i, j) - a * mu_k(i, j) * mu_l(j, i)) /
           (a - 1.0);
    }
  return r;
}

double kzb_D(const LieContext& ctx, const std::vector<Mat>& mu, const Vec& p,
             const Vec& q, int k) {
  check_sizes(ctx, mu, p, q);
  const int n = static_cast<int>(mu.size());
  if (k < 2 || k > n) throw std::invalid_argument("kzb_D: k must be in 2..n");
  const int ki = k - 1;  // 0-based
  double d = ctx.killing_scale() * mu[ki].diagonal().dot(p);
  for (int l = 0; l < ki; ++l) d -= felder_r(ctx, mu[l], mu[ki], q);
  for (int l = ki + 1; l < n; ++l) d += felder_r(ctx, mu[ki], mu[l], q);
  return d;
}

double h2_closed_form(const LieContext& ctx, const std::vector<Mat>& mu,
                      const Vec& p, const Vec& q) {
  check_sizes(ctx, mu, p, q);
  const int N = ctx.N();
  const double ks = ctx.killing_scale();
  Mat total = Mat::Zero(N, N);
  for (const Mat& m : mu) total += m;
  double h = 0.5 * ks * p.dot(p);
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      const double a = std::exp(q(i) - q(j));
      h += ks * total(i, j) * total(j, i) / ((1.0 - a) * (1.0 - 1.0 / a));
    }
  return h;
}

double hamiltonian(const LieContext& ctx, const std::vector<Mat>& mu,
                   const Vec& p, const Vec& q, int k, int d) {
  return casimir(d, reconstruct_x(ctx, mu, p, q, k));
}

Mat reconstruct_x(const PeriodicRadialState& s, int k) {
  return reconstruct_x(s.ctx, s.spin_matrices(), s.p, s.q, k);
}

double felder_r(const PeriodicRadialState& s, int k, int l) {
  check_site(k, s.n(), "felder_r");
  check_site(l, s.n(), "felder_r");
  return felder_r(s.ctx, embed_rank1(s.spins[k - 1]), embed_rank1(s.spins[l - 1]),
                  s.q);
}

double kzb_D(const PeriodicRadialState& s, int k) {
  return kzb_D(s.ctx, s.spin_matrices(), s.p, s.q, k);
}

double h2_closed_form(const PeriodicRadialState& s) {
  return h2_closed_form(s.ctx, s.spin_matrices(), s.p, s.q);
}

double hamiltonian(const PeriodicRadialState& s, int k, int d) {
  return hamiltonian(s.ctx, s.spin_matrices(), s.p, s.q, k, d);
}

}  // namespace spincm
