#include "spincm/orbits.hpp"

#include <cmath>
#include <stdexcept>

namespace spincm {

Mat embed_rank1(const RankOneOrbitPoint& pt, double tol) {
  const double scale = 1.0 + std::abs(pt.xi);
  if (std::abs(pt.constraint_residual()) > tol * scale)
    throw std::invalid_argument("embed_rank1: a^T b != xi");
  const int N = pt.N();
  return pt.b * pt.a.transpose() - (pt.xi / N) * Mat::Identity(N, N);
}

RankOneOrbitPoint normalize_gauge(const RankOneOrbitPoint& pt) {
  const double na = pt.a.norm();
  if (na == 0.0) throw std::invalid_argument("normalize_gauge: zero a");
  const double nb = pt.b.norm();
  double lambda = (nb > 0.0) ? std::sqrt(nb / na) : 1.0;
  for (int i = 0; i < pt.a.size(); ++i) {
    if (pt.a(i) != 0.0) {
      if (pt.a(i) * lambda < 0.0) lambda = -lambda;
      break;
    }
  }
  return RankOneOrbitPoint{pt.xi, lambda * pt.a, pt.b / lambda};
}

RankOneOrbitPoint factor_rank1(const Mat& mu, double xi, double tol) {
  const int N = static_cast<int>(mu.rows());
  Mat m = mu + (xi / N) * Mat::Identity(N, N);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double sigma = svd.singularValues()(0);
  const double rest =
      (N > 1) ? svd.singularValues().tail(N - 1).norm() : 0.0;
  if (rest > tol * std::max(1.0, sigma))
    throw std::invalid_argument("factor_rank1: matrix is not rank one");
  RankOneOrbitPoint pt{xi, svd.matrixV().col(0), sigma * svd.matrixU().col(0)};
  return normalize_gauge(pt);
}

Vec chain_moment_residual(const std::vector<RankOneOrbitPoint>& spins) {
  if (spins.empty()) throw std::invalid_argument("chain_moment_residual: empty");
  const int N = spins.front().N();
  Vec res = Vec::Zero(N);
  for (const auto& s : spins)
    res += (s.b.array() * s.a.array()).matrix() - Vec::Constant(N, s.xi / N);
  return res;
}

Vec antisymmetric_spectrum(const Mat& y) {
  const int N = static_cast<int>(y.rows());
  Eigen::JacobiSVD<Mat> svd(y);
  Vec sv = svd.singularValues();  // descending, angles appear in pairs
  Vec out(N / 2);
  for (int k = 0; k < N / 2; ++k) out(k) = sv(2 * k);
  return out;
}

Mat k_orbit_normal_form(int N, const Vec& spectrum) {
  if (spectrum.size() > N / 2)
    throw std::invalid_argument("k_orbit_normal_form: spectrum too long");
  Mat y = Mat::Zero(N, N);
  for (int k = 0; k < spectrum.size(); ++k) {
    y(2 * k, 2 * k + 1) = spectrum(k);
    y(2 * k + 1, 2 * k) = -spectrum(k);
  }
  return y;
}

KOrbitPoint sample_k_orbit(int N, const Vec& spectrum, Rng& rng) {
  Vec sorted = spectrum;
  std::sort(sorted.data(), sorted.data() + sorted.size(),
            [](double a, double b) { return a > b; });
  if (sorted.size() > 0 && sorted(sorted.size() - 1) < 0.0)
    throw std::invalid_argument("sample_k_orbit: angles must be >= 0");
  Mat nf = k_orbit_normal_form(N, sorted);
  Mat r = random_special_orthogonal(N, rng);
  Vec full = Vec::Zero(N / 2);
  full.head(sorted.size()) = sorted;
  return KOrbitPoint{r * nf * r.transpose(), full};
}

double OrbitSpecification::xi_total() const {
  double t = 0.0;
  for (double x : site_xi) t += x;
  return t;
}

void OrbitSpecification::validate() const {
  if (N < 2) throw std::invalid_argument("orbit spec: N must be >= 2");
  if (site_xi.empty()) throw std::invalid_argument("orbit spec: no sites");
  for (double x : site_xi)
    if (x == 0.0)
      throw std::invalid_argument("orbit spec: site orbits must be nontrivial");
}

namespace {

std::vector<RankOneOrbitPoint> draw_sites(const OrbitSpecification& spec,
                                          Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<RankOneOrbitPoint> spins;
  for (double xi : spec.site_xi) {
    RankOneOrbitPoint pt;
    pt.xi = xi;
    pt.a = Vec(spec.N);
    pt.b = Vec(spec.N);
    for (int i = 0; i < spec.N; ++i) pt.a(i) = gauss(rng);
    for (int i = 0; i < spec.N; ++i) pt.b(i) = gauss(rng);
    spins.push_back(pt);
  }
  return spins;
}

}  // namespace

double project_spin_constraints(std::vector<RankOneOrbitPoint>& spins,
                                const std::vector<double>& site_xi,
                                bool with_cartan) {
  const int n = static_cast<int>(spins.size());
  if (site_xi.size() != spins.size())
    throw std::invalid_argument("project_spin_constraints: xi list size mismatch");
  const int N = spins.front().N();
  double xi_tot = 0.0;
  for (double x : site_xi) xi_tot += x;
  // Both relation families are linear in b at fixed a. Stack them as
  // C vec(b) = rhs with vec(b) ordered site major, and take the
  // minimum-norm correction of the current b.
  const int rows = with_cartan ? n + N : n;
  Mat c = Mat::Zero(rows, n * N);
  Vec rhs(rows);
  Vec b0(n * N);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < N; ++i) c(k, k * N + i) = spins[k].a(i);
    rhs(k) = site_xi[k];
    b0.segment(k * N, N) = spins[k].b;
  }
  if (with_cartan) {
    for (int i = 0; i < N; ++i) {
      for (int k = 0; k < n; ++k) c(n + i, k * N + i) = spins[k].a(i);
      rhs(n + i) = xi_tot / N;
    }
  }
  Vec resid = rhs - c * b0;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(c);
  Vec db = cod.solve(resid);
  Vec b = b0 + db;
  if (!b.allFinite())
    throw std::runtime_error("project_spin_constraints: correction diverged");
  for (int k = 0; k < n; ++k) {
    spins[k].b = b.segment(k * N, N);
    spins[k].xi = site_xi[k];
  }
  double max_res = 0.0;
  for (int k = 0; k < n; ++k)
    max_res = std::max(max_res, std::abs(spins[k].constraint_residual()));
  if (with_cartan)
    max_res =
        std::max(max_res, chain_moment_residual(spins).lpNorm<Eigen::Infinity>());
  return max_res;
}

std::vector<RankOneOrbitPoint> sample_constrained(const OrbitSpecification& spec,
                                                  Rng& rng) {
  spec.validate();
  const int n = spec.sites();
  const double xi_tot = spec.xi_total();
  for (int attempt = 0; attempt < 64; ++attempt) {
    auto spins = draw_sites(spec, rng);
    double res;
    try {
      res = project_spin_constraints(spins, spec.site_xi, true);
    } catch (const std::runtime_error&) {
      continue;
    }
    bool ok = res <= 1e-12 * (1.0 + std::abs(xi_tot));
    for (int k = 0; k < n; ++k)
      if (spins[k].b.lpNorm<Eigen::Infinity>() > 1e6) ok = false;
    if (!ok) continue;
    for (auto& s : spins) s = normalize_gauge(s);
    return spins;
  }
  throw std::runtime_error("sample_constrained: no feasible sample found");
}

std::vector<RankOneOrbitPoint> sample_sites(const OrbitSpecification& spec,
                                            Rng& rng) {
  spec.validate();
  for (int attempt = 0; attempt < 64; ++attempt) {
    auto spins = draw_sites(spec, rng);
    bool ok = true;
    for (auto& s : spins) {
      // Correct b along a to meet a^T b = xi exactly.
      const double n2 = s.a.squaredNorm();
      if (n2 < 1e-12) {
        ok = false;
        break;
      }
      s.b += s.a * ((s.xi - s.a.dot(s.b)) / n2);
      s = normalize_gauge(s);
    }
    if (ok) return spins;
  }
  throw std::runtime_error("sample_sites: no feasible sample found");
}

std::vector<Mat> local_spins(const std::vector<RankOneOrbitPoint>& spins,
                             double tol) {
  const int n = static_cast<int>(spins.size());
  const int N = spins.front().N();
  if (chain_moment_residual(spins).lpNorm<Eigen::Infinity>() > tol)
    throw std::invalid_argument("local_spins: Cartan moment constraint violated");
  double xi_tot = 0.0;
  for (const auto& s : spins) xi_tot += s.xi;
  std::vector<Mat> out;
  for (int i = 0; i < N; ++i) {
    Mat g = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        g(k, l) = spins[k].b(i) * spins[l].a(i) -
                  ((k == l) ? xi_tot / (N * n) : 0.0);
    out.push_back(g);
  }
  return out;
}

}  // namespace spincm
