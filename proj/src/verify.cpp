#include "spincm/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spincm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Splitmix-style mixing so every trial gets an independent stream and the
/// schedule of a parallel run cannot influence the draws.
unsigned long long mix_seed(unsigned long long seed, unsigned long long trial) {
  unsigned long long z = seed + 0x9e3779b97f4a7c15ull * (trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double rel_gap(double lhs, double rhs) {
  return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

double rel_mat_gap(const Mat& a, const Mat& b) {
  const double scale =
      1.0 + std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

Mat ad_inv(const Mat& g, const Mat& x) {
  return Eigen::PartialPivLU<Mat>(g).solve(x * g);
}

std::string label_Nn(const char* prefix, int N, int n) {
  std::ostringstream os;
  os << prefix << " N=" << N << " n=" << n;
  return os.str();
}

/// Aggregate per-trial case lists into a report: residuals are folded by
/// label with max, so the report layout is independent of trial order.
Report fold_report(std::string suite, int trials, double tol,
                   const std::vector<std::vector<CaseResult>>& buckets) {
  std::map<std::string, double> agg;
  for (const auto& bucket : buckets)
    for (const auto& c : bucket) {
      const double r = std::isfinite(c.residual) ? c.residual : kInf;
      auto [it, inserted] = agg.emplace(c.label, r);
      if (!inserted) it->second = std::max(it->second, r);
    }
  Report rep;
  rep.suite = std::move(suite);
  rep.trials = trials;
  rep.tolerance = tol;
  rep.pass = !agg.empty();
  for (const auto& [label, res] : agg) {
    const bool ok = res < tol;
    rep.per_case.push_back(CaseResult{label, res, ok});
    rep.max_residual = std::max(rep.max_residual, res);
    rep.pass = rep.pass && ok;
  }
  return rep;
}

/// Trial fan-out. Exceptions must not escape the loop body (OpenMP would
/// terminate), so they are recorded as infinite residuals.
template <class Fn>
std::vector<std::vector<CaseResult>> run_parallel(int trials,
                                                  unsigned long long seed,
                                                  Fn&& body) {
  std::vector<std::vector<CaseResult>> out(
      static_cast<size_t>(std::max(trials, 0)));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int t = 0; t < trials; ++t) {
    auto& slot = out[static_cast<size_t>(t)];
    try {
      Rng rng(mix_seed(seed, static_cast<unsigned long long>(t)));
      slot = body(t, rng);
    } catch (const std::exception& e) {
      slot = {CaseResult{"trial " + std::to_string(t) + ": " + e.what(), kInf,
                         false}};
    } catch (...) {
      slot = {CaseResult{"trial " + std::to_string(t) + ": unknown error",
                         kInf, false}};
    }
  }
  return out;
}

struct SizeCase {
  int N = 2;
  int n = 1;
};

OrbitSpecification random_spec(int N, int n, Rng& rng, bool boundaries) {
  OrbitSpecification spec;
  spec.N = N;
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::bernoulli_distribution flip(0.5);
  for (int k = 0; k < n; ++k)
    spec.site_xi.push_back((flip(rng) ? -1.0 : 1.0) * mag(rng));
  if (boundaries) {
    const int h = N / 2;
    std::uniform_real_distribution<double> ang(0.3, 1.1);
    auto draw = [&] {
      Vec s(h);
      for (int i = 0; i < h; ++i) s[i] = ang(rng);
      std::sort(s.data(), s.data() + h, std::greater<double>());
      return s;
    };
    spec.left_spectrum = draw();
    spec.right_spectrum = draw();
  }
  return spec;
}

/// Unit-scale states for the bracket certification: every site spin has
/// Frobenius norm near one (so the charges xi are of order one as well),
/// p is a unit Gaussian and the torus separations are of order one. The
/// commutators are certified at an absolute tolerance, and holding the
/// norms at one keeps the gradient magnitudes - and with them the rounding
/// floor of the bracket evaluation - far below it.
std::vector<RankOneOrbitPoint> unit_spins(int N, int n, Rng& rng,
                                          std::vector<double>& xi_out) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> align(0.6, 0.95);
  std::uniform_real_distribution<double> radius(0.9, 1.15);
  std::bernoulli_distribution flip(0.5);
  std::vector<RankOneOrbitPoint> spins;
  xi_out.clear();
  for (int k = 0; k < n; ++k) {
    Vec a(N), w(N);
    for (int i = 0; i < N; ++i) {
      a[i] = gauss(rng);
      w[i] = gauss(rng);
    }
    a.normalize();
    Vec orth = w - w.dot(a) * a;
    if (orth.norm() < 1e-8) continue;
    orth.normalize();
    const double c = (flip(rng) ? 1.0 : -1.0) * align(rng);
    const double r = radius(rng);
    RankOneOrbitPoint sp;
    sp.a = r * a;
    sp.b = r * (c * a + std::sqrt(1.0 - c * c) * orth);
    sp.xi = sp.a.dot(sp.b);
    xi_out.push_back(sp.xi);
    spins.push_back(std::move(sp));
  }
  if (static_cast<int>(spins.size()) != n)
    throw std::runtime_error("unit_spins: degenerate draw");
  return spins;
}

Vec unit_gaps_q(int N, Rng& rng) {
  std::uniform_real_distribution<double> gap(0.9, 1.3);
  Vec q(N);
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    q[N - 1 - i] = acc;
    acc += gap(rng);
  }
  q.array() -= q.mean();
  return q;
}

Vec unit_p(int N, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec p(N);
  for (int i = 0; i < N; ++i) p[i] = gauss(rng);
  p.array() -= p.mean();
  return p;
}

PeriodicRadialState unit_scale_periodic(const LieContext& ctx, int n,
                                        Rng& rng) {
  const int N = ctx.N();
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<double> xi;
    auto spins = unit_spins(N, n, rng, xi);
    double pre = 0.0;
    for (const auto& sp : spins) pre = std::max(pre, sp.b.norm());
    if (project_spin_constraints(spins, xi, true) > 1e-10) continue;
    double post = 0.0;
    for (const auto& sp : spins) post = std::max(post, sp.b.norm());
    if (post > 2.5 * pre + 1.0) continue;
    return make_periodic_state(ctx, std::move(spins), unit_p(N, rng),
                               unit_gaps_q(N, rng));
  }
  throw std::runtime_error("unit_scale_periodic: no feasible sample");
}

OpenRadialState unit_scale_open(const LieContext& ctx, int n, Rng& rng) {
  const int N = ctx.N();
  std::uniform_real_distribution<double> ang(0.4, 1.0);
  const int h = N / 2;
  auto draw_spec = [&] {
    Vec s(h);
    for (int i = 0; i < h; ++i) s[i] = ang(rng);
    std::sort(s.data(), s.data() + h, std::greater<double>());
    return s;
  };
  std::vector<double> xi;
  auto spins = unit_spins(N, n, rng, xi);
  return make_open_state(ctx, sample_k_orbit(N, draw_spec(), rng),
                         sample_k_orbit(N, draw_spec(), rng),
                         std::move(spins), unit_p(N, rng),
                         unit_gaps_q(N, rng));
}

/// (a, b) -> (s a, s b) rescales every spin matrix by s^2 and xi with it;
/// all chain constraints are preserved.
std::vector<RankOneOrbitPoint> scale_spins(std::vector<RankOneOrbitPoint> spins,
                                           double s) {
  for (auto& sp : spins) {
    sp.a *= s;
    sp.b *= s;
    sp.xi *= s * s;
  }
  return spins;
}

/// Centered descending vector with consecutive gaps gap +- jitter.
Vec spread_profile(int N, double gap, double jitter, Rng& rng) {
  std::uniform_real_distribution<double> j(-jitter, jitter);
  Vec v(N);
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    v[i] = -acc;
    acc += gap + j(rng);
  }
  v.array() -= v.mean();
  return v;
}

/// Random small-xi orbit data for the internal tame samplers.
OrbitSpecification small_spec(int N, int n, Rng& rng, bool boundaries,
                              bool trivial_left, bool trivial_right) {
  OrbitSpecification spec;
  spec.N = N;
  std::uniform_real_distribution<double> mag(0.2, 0.45);
  std::bernoulli_distribution flip(0.5);
  for (int k = 0; k < n; ++k)
    spec.site_xi.push_back((flip(rng) ? -1.0 : 1.0) * mag(rng));
  if (boundaries) {
    const int h = N / 2;
    std::uniform_real_distribution<double> ang(0.15, 0.4);
    auto draw = [&](bool trivial) {
      Vec s = Vec::Zero(h);
      if (!trivial) {
        for (int i = 0; i < h; ++i) s[i] = ang(rng);
        std::sort(s.data(), s.data() + h, std::greater<double>());
      }
      return s;
    };
    spec.left_spectrum = draw(trivial_left);
    spec.right_spectrum = draw(trivial_right);
  }
  return spec;
}

PeriodicRadialState tame_periodic_state(const LieContext& ctx, int n,
                                        Rng& rng) {
  return sample_tame_periodic(
      ctx, small_spec(ctx.N(), n, rng, false, false, false), rng);
}

OpenRadialState tame_open_state(const LieContext& ctx, int n, Rng& rng,
                                bool trivial_left, bool trivial_right) {
  return sample_tame_open(
      ctx, small_spec(ctx.N(), n, rng, true, trivial_left, trivial_right),
      rng);
}

std::vector<int> chain_sites(ChainKind kind, int n) {
  std::vector<int> s;
  if (kind == ChainKind::open) s.push_back(0);
  for (int k = 1; k <= n; ++k) s.push_back(k);
  return s;
}

const char* kind_name(ChainKind kind) {
  return kind == ChainKind::periodic ? "periodic" : "open";
}

/// Flow time clamped so ||t grad|| stays O(1); the invariance statements
/// hold for every t, and this keeps the transports well conditioned.
double safe_flow_time(const ExtendedState& es, int site, int degree,
                      double nominal) {
  const int idx = es.kind == ChainKind::periodic ? site - 1 : site;
  const LieContext ctx(es.N());
  const double g =
      gradient_casimir(ctx, degree, es.x[idx]).cwiseAbs().maxCoeff();
  return nominal / (1.0 + g);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

LineFit fit_line(const std::vector<double>& t, const std::vector<double>& y) {
  const int m = static_cast<int>(t.size());
  double tb = 0.0, yb = 0.0;
  for (int i = 0; i < m; ++i) {
    tb += t[i];
    yb += y[i];
  }
  tb /= m;
  yb /= m;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < m; ++i) {
    num += (t[i] - tb) * (y[i] - yb);
    den += (t[i] - tb) * (t[i] - tb);
  }
  LineFit f;
  f.slope = num / den;
  f.intercept = yb - f.slope * tb;
  for (int i = 0; i < m; ++i)
    f.max_residual =
        std::max(f.max_residual, std::abs(y[i] - f.intercept - f.slope * t[i]));
  return f;
}

/// All diagonal sign matrices with determinant +1 (2^{N-1} of them).
std::vector<Mat> even_sign_matrices(int N) {
  std::vector<Mat> out;
  for (unsigned mask = 0; mask < (1u << N); ++mask) {
    if (std::popcount(mask) % 2 != 0) continue;
    Mat c = Mat::Identity(N, N);
    for (int i = 0; i < N; ++i)
      if (mask & (1u << i)) c(i, i) = -1.0;
    out.push_back(c);
  }
  return out;
}

Mat orthonormal_columns(const Mat& v, double rel_tol = 1e-10) {
  if (v.cols() == 0 || v.rows() == 0) return Mat(v.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(v, Eigen::ComputeThinU);
  const Vec sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  int r = 0;
  while (r < sv.size() && smax > 0.0 && sv[r] > rel_tol * smax) ++r;
  return svd.matrixU().leftCols(r);
}

/// Orthonormal basis, in the column coefficients of v, of ker(j v).
Mat product_null_basis(const Mat& j, const Mat& v, double rel_tol,
                       bool* gap_ok) {
  if (j.rows() == 0) return Mat::Identity(v.cols(), v.cols());
  const Mat jv = j * v;
  Eigen::JacobiSVD<Mat> svd(jv, Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  int rank = 0;
  if (smax > 0.0) {
    const double tau = rel_tol * smax;
    while (rank < sv.size() && sv[rank] > tau) ++rank;
    if (gap_ok) {
      if (rank > 0 && sv[rank - 1] < 10.0 * tau) *gap_ok = false;
      if (rank < sv.size() && sv[rank] > 0.1 * tau) *gap_ok = false;
    }
  }
  return svd.matrixV().rightCols(v.cols() - rank);
}

}  // namespace

// ---------------------------------------------------------------------------
// Well-separated random states for long integrations.
// ---------------------------------------------------------------------------

PeriodicRadialState sample_tame_periodic(const LieContext& ctx,
                                         const OrbitSpecification& spec,
                                         Rng& rng) {
  const double s = 0.55;
  OrbitSpecification scaled = spec;
  for (double& xi : scaled.site_xi) xi /= s * s;
  auto spins = scale_spins(sample_constrained(scaled, rng), s);
  Vec p = spread_profile(ctx.N(), 0.55, 0.08, rng);
  Vec q = spread_profile(ctx.N(), 1.9, 0.2, rng);
  return make_periodic_state(ctx, std::move(spins), std::move(p),
                             std::move(q));
}

OpenRadialState sample_tame_open(const LieContext& ctx,
                                 const OrbitSpecification& spec, Rng& rng) {
  const double s = 0.55;
  OrbitSpecification scaled = spec;
  for (double& xi : scaled.site_xi) xi /= s * s;
  auto spins = scale_spins(sample_sites(scaled, rng), s);
  KOrbitPoint left = sample_k_orbit(ctx.N(), spec.left_spectrum, rng);
  KOrbitPoint right = sample_k_orbit(ctx.N(), spec.right_spectrum, rng);
  Vec p = spread_profile(ctx.N(), 0.5, 0.08, rng);
  Vec q = spread_profile(ctx.N(), 1.9, 0.2, rng);
  return make_open_state(ctx, std::move(left), std::move(right),
                         std::move(spins), std::move(p), std::move(q));
}

// ---------------------------------------------------------------------------
// Trace words.
// ---------------------------------------------------------------------------

double trace_word(const ExtendedState& es, const TraceWordSpec& spec) {
  if (spec.word.empty())
    throw std::invalid_argument("trace_word: empty word");
  for (char c : spec.word)
    if (c != 'Y' && c != 'Z')
      throw std::invalid_argument("trace_word: letters must be Y or Z");
  const int legs = es.legs();
  Mat y, z;
  bool have_z = true;
  if (es.kind == ChainKind::periodic) {
    if (spec.site < 1 || spec.site > legs)
      throw std::out_of_range("trace_word: site out of range");
    const int idx = spec.site - 1;
    const int prev = (idx + legs - 1) % legs;
    y = es.x[idx];
    z = ad_inv(es.g[prev], es.x[prev]);
  } else {
    const int n = legs - 1;
    if (spec.site == 0) {
      y = project_k(es.x[0]);
      have_z = false;
    } else if (spec.site == n + 1) {
      y = project_k(ad_inv(es.g[n], es.x[n]));
      have_z = false;
    } else if (spec.site >= 1 && spec.site <= n) {
      y = es.x[spec.site];
      z = ad_inv(es.g[spec.site - 1], es.x[spec.site - 1]);
    } else {
      throw std::out_of_range("trace_word: site out of range");
    }
  }
  if (!have_z && spec.word.find('Z') != std::string::npos)
    throw std::invalid_argument("trace_word: boundary sites take Y-only words");
  Mat prod = Mat::Identity(es.N(), es.N());
  for (char c : spec.word) prod = prod * (c == 'Y' ? y : z);
  return prod.trace();
}

std::vector<TraceWordSpec> default_trace_words(const ExtendedState& es) {
  static const char* bulk[] = {"YY", "YZ", "YYZ", "YZZ", "YYZZ"};
  std::vector<TraceWordSpec> out;
  if (es.kind == ChainKind::periodic) {
    for (int site = 1; site <= es.legs(); ++site)
      for (const char* w : bulk) out.push_back(TraceWordSpec{site, w});
  } else {
    const int n = es.legs() - 1;
    out.push_back(TraceWordSpec{0, "YY"});
    out.push_back(TraceWordSpec{0, "YYYY"});
    for (int site = 1; site <= n; ++site)
      for (const char* w : bulk) out.push_back(TraceWordSpec{site, w});
    out.push_back(TraceWordSpec{n + 1, "YY"});
    out.push_back(TraceWordSpec{n + 1, "YYYY"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rank and dimension probes.
// ---------------------------------------------------------------------------

int numeric_rank(const Mat& m, double rel_tol, bool* gap_ok) {
  if (gap_ok) *gap_ok = true;
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec sv = svd.singularValues();
  const double smax = sv[0];
  if (!(smax > 0.0) || !std::isfinite(smax)) return 0;
  const double tau = rel_tol * smax;
  int rank = 0;
  while (rank < sv.size() && sv[rank] > tau) ++rank;
  if (gap_ok) {
    if (rank > 0 && sv[rank - 1] < 10.0 * tau) *gap_ok = false;
    if (rank < sv.size() && sv[rank] > 0.1 * tau) *gap_ok = false;
  }
  return rank;
}

namespace {

template <class State>
int liouville_rank_impl(const State& s, ChainKind kind, bool* gap_ok) {
  const auto lay = layout_for(s);
  const int N = lay.N;
  std::vector<Vec> rows;
  for (int site : chain_sites(kind, lay.n))
    for (int d = 2; d <= N; ++d)
      rows.push_back(grad_hamiltonian(s, HamiltonianId{site, d}));
  Mat g(static_cast<int>(rows.size()), lay.dim());
  for (int i = 0; i < g.rows(); ++i) g.row(i) = rows[static_cast<size_t>(i)];
  return numeric_rank(g, 1e-8, gap_ok);
}

}  // namespace

int liouville_count_probe(const PeriodicRadialState& s, bool* gap_ok) {
  return liouville_rank_impl(s, ChainKind::periodic, gap_ok);
}

int liouville_count_probe(const OpenRadialState& s, bool* gap_ok) {
  return liouville_rank_impl(s, ChainKind::open, gap_ok);
}

namespace {

/// Shared tail of the dimension probe. v spans the allowed chart
/// directions, j the constraint differentials, gauge the gauge directions
/// (exactly tangent), ham the Hamiltonian differentials.
DimensionProbe probe_from_blocks(const Mat& v, const Mat& j, const Mat& gauge,
                                 const Mat& ham) {
  bool g1 = true, g2 = true, g3 = true;
  const Mat vo = orthonormal_columns(v);
  const Mat w = product_null_basis(j, vo, 1e-8, &g1);
  const Mat b = vo * w;  // orthonormal basis of the constraint tangent
  const int grank = numeric_rank(gauge * b, 1e-8, &g2);
  const int hrank = numeric_rank(ham * b, 1e-8, &g3);
  DimensionProbe pr;
  pr.dim_s = static_cast<int>(b.cols()) - grank;
  pr.dim_b = hrank;
  pr.dim_p = pr.dim_s - pr.dim_b;
  pr.rank_gap_ok = g1 && g2 && g3;
  return pr;
}

void fill_tracefree_pq(const ChartLayout& lay, std::vector<Vec>* cols) {
  const int D = lay.dim();
  for (int i = 0; i + 1 < lay.N; ++i) {
    Vec cp = Vec::Zero(D);
    cp[lay.p_off() + i] = 1.0;
    cp[lay.p_off() + lay.N - 1] = -1.0;
    cols->push_back(cp);
    Vec cq = Vec::Zero(D);
    cq[lay.q_off() + i] = 1.0;
    cq[lay.q_off() + lay.N - 1] = -1.0;
    cols->push_back(cq);
  }
}

void fill_spin_units(const ChartLayout& lay, std::vector<Vec>* cols) {
  const int D = lay.dim();
  for (int k = 1; k <= lay.n; ++k)
    for (int i = 0; i < 2 * lay.N; ++i) {
      Vec c = Vec::Zero(D);
      c[lay.a_off(k) + i] = 1.0;
      cols->push_back(c);
    }
}

Mat cols_to_matrix(int D, const std::vector<Vec>& cols) {
  Mat m(D, static_cast<int>(cols.size()));
  for (int c = 0; c < m.cols(); ++c) m.col(c) = cols[static_cast<size_t>(c)];
  return m;
}

/// Per-site xi rows; optionally the Cartan moment rows.
Mat constraint_rows(const ChartLayout& lay,
                    const std::vector<RankOneOrbitPoint>& spins,
                    bool with_cartan) {
  const int D = lay.dim();
  const int rows = lay.n + (with_cartan ? lay.N : 0);
  Mat j = Mat::Zero(rows, D);
  for (int k = 1; k <= lay.n; ++k) {
    const auto& sp = spins[static_cast<size_t>(k - 1)];
    for (int i = 0; i < lay.N; ++i) {
      j(k - 1, lay.a_off(k) + i) = sp.b[i];
      j(k - 1, lay.b_off(k) + i) = sp.a[i];
    }
  }
  if (with_cartan)
    for (int i = 0; i < lay.N; ++i)
      for (int k = 1; k <= lay.n; ++k) {
        const auto& sp = spins[static_cast<size_t>(k - 1)];
        j(lay.n + i, lay.a_off(k) + i) = sp.b[i];
        j(lay.n + i, lay.b_off(k) + i) = sp.a[i];
      }
  return j;
}

/// Per-site scaling directions (a, -b); optionally the diagonal
/// conjugation directions (periodic residual gauge).
Mat gauge_rows(const ChartLayout& lay,
               const std::vector<RankOneOrbitPoint>& spins, bool with_conj) {
  const int D = lay.dim();
  const int rows = lay.n + (with_conj ? lay.N - 1 : 0);
  Mat g = Mat::Zero(rows, D);
  for (int k = 1; k <= lay.n; ++k) {
    const auto& sp = spins[static_cast<size_t>(k - 1)];
    for (int i = 0; i < lay.N; ++i) {
      g(k - 1, lay.a_off(k) + i) = sp.a[i];
      g(k - 1, lay.b_off(k) + i) = -sp.b[i];
    }
  }
  if (with_conj)
    for (int m = 0; m + 1 < lay.N; ++m) {
      const int row = lay.n + m;
      for (int k = 1; k <= lay.n; ++k) {
        const auto& sp = spins[static_cast<size_t>(k - 1)];
        // v = e_m - e_{m+1}: delta a = -v a, delta b = +v b.
        g(row, lay.a_off(k) + m) = -sp.a[m];
        g(row, lay.a_off(k) + m + 1) = sp.a[m + 1];
        g(row, lay.b_off(k) + m) = sp.b[m];
        g(row, lay.b_off(k) + m + 1) = -sp.b[m + 1];
      }
    }
  return g;
}

template <class State>
Mat hamiltonian_rows(const State& s, ChainKind kind) {
  const auto lay = layout_for(s);
  std::vector<Vec> rows;
  for (int site : chain_sites(kind, lay.n))
    for (int d = 2; d <= lay.N; ++d)
      rows.push_back(grad_hamiltonian(s, HamiltonianId{site, d}));
  return cols_to_matrix(lay.dim(), rows).transpose();
}

}  // namespace

DimensionProbe dimension_probe(const PeriodicRadialState& s) {
  const auto lay = layout_for(s);
  std::vector<Vec> cols;
  fill_tracefree_pq(lay, &cols);
  fill_spin_units(lay, &cols);
  const Mat v = cols_to_matrix(lay.dim(), cols);
  const Mat j = constraint_rows(lay, s.spins, /*with_cartan=*/true);
  const Mat g = gauge_rows(lay, s.spins, /*with_conj=*/true);
  const Mat h = hamiltonian_rows(s, ChainKind::periodic);
  return probe_from_blocks(v, j, g, h);
}

DimensionProbe dimension_probe(const OpenRadialState& s) {
  const auto lay = layout_for(s);
  std::vector<Vec> cols;
  fill_tracefree_pq(lay, &cols);
  fill_spin_units(lay, &cols);
  // Boundary orbit tangents: upper triangles of [T, Y] over an so(N) basis.
  auto boundary_tangents = [&](const Mat& y, int off) {
    const int N = lay.N;
    for (int u = 0; u < N; ++u)
      for (int w = u + 1; w < N; ++w) {
        Mat t = Mat::Zero(N, N);
        t(u, w) = 1.0;
        t(w, u) = -1.0;
        const Vec coeffs = upper_tri(t * y - y * t);
        if (coeffs.cwiseAbs().maxCoeff() == 0.0) continue;
        Vec c = Vec::Zero(lay.dim());
        c.segment(off, lay.tri()) = coeffs;
        cols.push_back(c);
      }
  };
  boundary_tangents(s.left.y, lay.left_off());
  boundary_tangents(s.right.y, lay.right_off());
  const Mat v = cols_to_matrix(lay.dim(), cols);
  const Mat j = constraint_rows(lay, s.spins, /*with_cartan=*/false);
  const Mat g = gauge_rows(lay, s.spins, /*with_conj=*/false);
  const Mat h = hamiltonian_rows(s, ChainKind::open);
  return probe_from_blocks(v, j, g, h);
}

// ---------------------------------------------------------------------------
// Two-site involution.
// ---------------------------------------------------------------------------

ExtendedState psi_map(const ExtendedState& es) {
  if (es.kind != ChainKind::periodic || es.legs() != 2)
    throw std::invalid_argument("psi_map: needs a two-site periodic state");
  ExtendedState out;
  out.kind = ChainKind::periodic;
  out.x = {(-es.x[0]).eval(), adjoint_star(es.g[0], es.x[1])};
  out.g = {es.g[0], es.g[0] * es.g[1] * es.g[0]};
  return out;
}

double psi_equivariance_check(const ExtendedState& es, const Mat& h1,
                              const Mat& h2) {
  ExtendedState hs = es;
  gauge_transform_periodic(hs, {h1, h2});
  const ExtendedState lhs = psi_map(hs);
  ExtendedState rhs = psi_map(es);
  const Mat h2i = h2.inverse();
  rhs.x[0] = adjoint_star(h1, rhs.x[0]);
  rhs.x[1] = adjoint_star(h1, rhs.x[1]);
  rhs.g[0] = h1 * rhs.g[0] * h2i;
  rhs.g[1] = h1 * rhs.g[1] * h2i;
  double r = 0.0;
  for (int i = 0; i < 2; ++i) {
    r = std::max(r, rel_mat_gap(lhs.x[i], rhs.x[i]));
    r = std::max(r, rel_mat_gap(lhs.g[i], rhs.g[i]));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Suites.
// ---------------------------------------------------------------------------

Report dk_suite(ChainKind kind, int trials, Tol tol, unsigned long long seed) {
  const double tolerance = tol.value_or(1e-10);
  std::vector<SizeCase> grid;
  for (int N : {2, 3, 4, 5})
    for (int n : {2, 3, 4}) grid.push_back({N, n});
  auto buckets = run_parallel(trials, seed, [&](int t, Rng& rng) {
    const SizeCase sz = grid[static_cast<size_t>(t) % grid.size()];
    const LieContext ctx(sz.N);
    std::vector<CaseResult> out;
    if (kind == ChainKind::periodic) {
      const auto s =
          sample_periodic_state(ctx, random_spec(sz.N, sz.n, rng, false), rng);
      for (int k = 2; k <= sz.n; ++k) {
        const double lhs = kzb_D(s, k);
        const double rhs = sz.N * (casimir(2, reconstruct_x(s, k)) -
                                   casimir(2, reconstruct_x(s, k - 1)));
        out.push_back(CaseResult{label_Nn("periodic", sz.N, sz.n),
                                 rel_gap(lhs, rhs), true});
      }
    } else {
      const auto s =
          sample_open_state(ctx, random_spec(sz.N, sz.n, rng, true), rng);
      for (int k = 1; k <= sz.n; ++k) {
        const double lhs = bkzb_D(s, k);
        const double rhs = sz.N * (casimir(2, reconstruct_x_open(s, k)) -
                                   casimir(2, reconstruct_x_open(s, k - 1)));
        out.push_back(
            CaseResult{label_Nn("open", sz.N, sz.n), rel_gap(lhs, rhs), true});
      }
    }
    return out;
  });
  return fold_report(kind == ChainKind::periodic ? "dk_periodic" : "dk_open",
                     trials, tolerance, buckets);
}

Report twist_symmetry_suite(int trials, Tol tol, unsigned long long seed) {
  const double tolerance = tol.value_or(1e-12);
  std::vector<SizeCase> grid;
  for (int N : {2, 3, 4, 5})
    for (int n : {2, 3}) grid.push_back({N, n});
  auto buckets = run_parallel(trials, seed, [&](int t, Rng& rng) {
    const SizeCase sz = grid[static_cast<size_t>(t) % grid.size()];
    const LieContext ctx(sz.N);
    const auto s =
        sample_open_state(ctx, random_spec(sz.N, sz.n, rng, true), rng);
    const auto mu = s.spin_matrices();
    double worst = 0.0;
    for (int k = 0; k < sz.n; ++k)
      for (int l = 0; l < sz.n; ++l) {
        const double direct = theta_twist_r(s.ctx, mu[k], mu[l], s.q);
        const double swapped = theta_twist_r(s.ctx, mu[l], mu[k], s.q);
        const double via_k =
            felder_r_rescaled(s.ctx, cartan_involution(mu[k]), mu[l], s.q);
        const double via_l =
            felder_r_rescaled(s.ctx, cartan_involution(mu[l]), mu[k], s.q);
        const double scale = std::max(1.0, std::abs(direct));
        const double res = std::max({std::abs(direct - swapped),
                                     std::abs(direct - via_k),
                                     std::abs(direct - via_l)}) /
                           scale;
        worst = std::max(worst, res);
      }
    return std::vector<CaseResult>{
        CaseResult{label_Nn("open", sz.N, sz.n), worst, true}};
  });
  return fold_report("twist_symmetry", trials, tolerance, buckets);
}

Report commute_suite(ChainKind kind, int trials, Tol tol,
                     unsigned long long seed) {
  const double tolerance = tol.value_or(1e-7);
  std::vector<SizeCase> grid;
  for (int N : {2, 3, 4, 5})
    for (int n : {1, 2, 3}) grid.push_back({N, n});
  auto buckets = run_parallel(trials, seed, [&](int t, Rng& rng) {
    const SizeCase sz = grid[static_cast<size_t>(t) % grid.size()];
    const LieContext ctx(sz.N);
    std::vector<HamiltonianId> ids;
    for (int site : chain_sites(kind, sz.n))
      for (int d = 2; d <= sz.N; ++d) ids.push_back(HamiltonianId{site, d});
    double worst = 0.0;
    auto scan = [&](const auto& s) {
      const auto lay = layout_for(s);
      const Vec z = to_flat(s);
      std::vector<Vec> gr;
      gr.reserve(ids.size());
      for (const auto& id : ids) gr.push_back(grad_hamiltonian(s, id));
      for (size_t i = 0; i < gr.size(); ++i)
        for (size_t j = i + 1; j < gr.size(); ++j)
          worst =
              std::max(worst, std::abs(poisson_bracket(lay, z, gr[i], gr[j])));
    };
    if (kind == ChainKind::periodic)
      scan(unit_scale_periodic(ctx, sz.n, rng));
    else
      scan(unit_scale_open(ctx, sz.n, rng));
    return std::vector<CaseResult>{
        CaseResult{label_Nn(kind_name(kind), sz.N, sz.n), worst, true}};
  });
  return fold_report(kind == ChainKind::periodic ? "commute_periodic"
                                                 : "commute_open",
                     trials, tolerance, buckets);
}

Report conserve_exact_suite(ChainKind kind, Tol tol, unsigned long long seed) {
  const double tolerance = tol.value_or(1e-8);
  const std::vector<SizeCase> sizes = {{2, 2}, {3, 2}, {3, 3},
                                       {4, 2}, {4, 3}, {5, 2}};
  const int per_size = 3;
  const int trials = static_cast<int>(sizes.size()) * per_size;
  auto buckets = run_parallel(trials, seed, [&](int t, Rng& rng) {
    const SizeCase sz = sizes[static_cast<size_t>(t) % sizes.size()];
    const LieContext ctx(sz.N);
    ExtendedState es0;
    if (kind == ChainKind::periodic)
      es0 = embed_extended(tame_periodic_state(ctx, sz.n, rng));
    else
      es0 = embed_extended(tame_open_state(ctx, sz.n, rng, false, false));
    const auto words = default_trace_words(es0);
    std::vector<double> base;
    base.reserve(words.size());
    for (const auto& w : words) base.push_back(trace_word(es0, w));
    double worst = 0.0;
    auto check = [&](const ExtendedState& es) {
      for (size_t i = 0; i < words.size(); ++i)
        worst = std::max(worst, rel_gap(trace_word(es, words[i]), base[i]));
    };
    const auto sites = chain_sites(kind, sz.n);
    for (int site : sites)
      for (int d = 2; d <= sz.N; ++d) {
        ExtendedState es = es0;
        flow_extended(es, site, d, safe_flow_time(es0, site, d, 0.37));
        check(es);
      }
    {
      ExtendedState es = es0;
      flow_extended(es, sites.front(), 2,
                    safe_flow_time(es, sites.front(), 2, 0.21));
      flow_extended(es, sites.back(), sz.N,
                    safe_flow_time(es, sites.back(), sz.N, -0.4));
      flow_extended(es, sites[sites.size() / 2], 2,
                    safe_flow_time(es, sites[sites.size() / 2], 2, 0.13));
      check(es);
    }
    return std::vector<CaseResult>{
        CaseResult{label_Nn(kind_name(kind), sz.N, sz.n), worst, true}};
  });
  return fold_report(kind == ChainKind::periodic ? "conserve_exact_periodic"
                                                 : "conserve_exact_open",
                     trials, tolerance, buckets);
}

Report conserve_ode_suite(ChainKind kind, Tol tol, unsigned long long seed) {
  const double tolerance = tol.value_or(1e-6);
  const std::vector<SizeCase> sizes = {{2, 1}, {2, 2}, {3, 2}};
  const int per_size = 2;
  const int trials = static_cast<int>(sizes.size()) * per_size;
  auto buckets = run_parallel(trials, seed, [&](int t, Rng& rng) {
    const SizeCase sz = sizes[static_cast<size_t>(t) % sizes.size()];
    const LieContext ctx(sz.N);
    IntegratorOptions opt;
    opt.method = "rk4";
    opt.step = 1e-3;
    const HamiltonianId id{sz.n, 2};
    const double T = 10.0;
    const int samples = 50;
    double worst = 0.0;
    auto scan = [&](const auto& traj) {
      const ExtendedState es0 = embed_extended(traj.states.front());
      const auto words = default_trace_words(es0);
      std::vector<double> base;
      for (const auto& w : words) base.push_back(trace_word(es0, w));
      for (const auto& st : traj.states) {
        const ExtendedState es = embed_extended(st);
        for (size_t i = 0; i < words.size(); ++i)
          worst = std::max(worst, rel_gap(trace_word(es, words[i]), base[i]));
      }
    };
    if (kind == ChainKind::periodic)
      scan(integrate(tame_periodic_state(ctx, sz.n, rng), id, T, opt, samples));
    else
      scan(integrate(tame_open_state(ctx, sz.n, rng, false, false), id, T, opt,
                     samples));
    return std::vector<CaseResult>{
        CaseResult{label_Nn(kind_name(kind), sz.N, sz.n), worst, true}};
  });
  return fold_report(kind == ChainKind::periodic ? "conserve_ode_periodic"
                                                 : "conserve_ode_open",
                     trials, tolerance, buckets);
}

Report angle_suite(ChainKind kind, Tol tol, unsigned long long seed) {
  const double tolerance = tol.value_or(1e-9);
  struct AngleCase {
    int N;
    int n;
    bool trivial_left;
  };
  std::vector<AngleCase> sizes;
  if (kind == ChainKind::periodic)
    sizes = {{2, 2, false}, {3, 2, false}, {3, 3, false}};
  else
    sizes = {{2, 1, false},
             {2, 1, true},
             {2, 2, false},
             {3, 2, false},
             {3, 1, true}};
  const int per_size = 2;
  const int trials = static_cast<int>(sizes.size()) * per_size;
  const double dt = 0.02;
  const int samples = 50;
  auto buckets = run_parallel(trials, seed, [&](int t, Rng& rng) {
    const AngleCase sz = sizes[static_cast<size_t>(t) % sizes.size()];
    const LieContext ctx(sz.N);
    const int mlen = kind == ChainKind::periodic ? sz.n : sz.n + 2;
    ExtendedState es0;
    bool ready = false;
    for (int attempt = 0; attempt < 60 && !ready; ++attempt) {
      try {
        if (kind == ChainKind::periodic)
          es0 = embed_extended(tame_periodic_state(ctx, sz.n, rng));
        else
          es0 = embed_extended(
              tame_open_state(ctx, sz.n, rng, sz.trivial_left, false));
        const std::vector<int> probe(static_cast<size_t>(mlen), 0);
        if (kind == ChainKind::periodic)
          angle_periodic(es0, probe);
        else
          angle_open(es0, probe);
        ready = true;
      } catch (const std::domain_error&) {
      }
    }
    if (!ready)
      throw std::runtime_error("angle suite: no regular state found");
    std::string label = label_Nn(kind_name(kind), sz.N, sz.n);
    if (sz.trivial_left) label += " left-trivial";
    std::vector<int> flow_sites;
    if (kind == ChainKind::periodic)
      flow_sites = chain_sites(kind, sz.n);
    else if (sz.trivial_left)
      flow_sites = {0};
    else
      for (int k = 1; k <= sz.n; ++k) flow_sites.push_back(k);
    std::uniform_int_distribution<int> wdist(0, sz.N - 1);
    double worst = 0.0;
    std::vector<int> good_m;
    for (int site : flow_sites)
      for (int d = 2; d <= sz.N; ++d) {
        bool done = false;
        for (int mt = 0; mt < 30 && !done; ++mt) {
          std::vector<int> m(static_cast<size_t>(mlen));
          for (auto& w : m) w = wdist(rng);
          try {
            std::vector<double> ts(samples), ys(samples);
            std::vector<int> signs(samples);
            ExtendedState es = es0;
            for (int j = 0; j < samples; ++j) {
              if (j > 0) flow_extended(es, site, d, dt);
              const AngleValue v = kind == ChainKind::periodic
                                       ? angle_periodic(es, m)
                                       : angle_open(es, m);
              ts[static_cast<size_t>(j)] = j * dt;
              ys[static_cast<size_t>(j)] = v.log_abs;
              signs[static_cast<size_t>(j)] = v.sign;
            }
            const LineFit fit = fit_line(ts, ys);
            const double pred =
                kind == ChainKind::periodic
                    ? angle_slope_periodic(es0, site, d, m)
                    : angle_slope_open(es0, site, d, m);
            double res = fit.max_residual;
            res = std::max(res, std::abs(fit.slope - pred) /
                                    std::max(1.0, std::abs(pred)));
            for (int j = 1; j < samples; ++j)
              if (signs[static_cast<size_t>(j)] != signs[0]) res = 1.0;
            worst = std::max(worst, res);
            good_m = m;
            done = true;
          } catch (const std::domain_error&) {
          }
        }
        if (!done) worst = kInf;
      }
    if (kind == ChainKind::open && !good_m.empty()) {
      const AngleValue base = angle_open(es0, good_m);
      for (const Mat& c : even_sign_matrices(sz.N)) {
        ExtendedState es = es0;
        gauge_transform_open(es, c, std::vector<Mat>(sz.n, c), c);
        const AngleValue v = angle_open(es, good_m);
        double res = std::abs(v.log_abs - base.log_abs) /
                     std::max(1.0, std::abs(base.log_abs));
        if (v.sign != base.sign) res = std::max(res, 1.0);
        worst = std::max(worst, res);
      }
    }
    return std::vector<CaseResult>{CaseResult{label, worst, true}};
  });
  return fold_report(
      kind == ChainKind::periodic ? "angles_periodic" : "angles_open", trials,
      tolerance, buckets);
}

Report projection_suite(ChainKind kind, Tol tol, unsigned long long seed) {
  const double tolerance = tol.value_or(1e-6);
  const std::vector<SizeCase> sizes = {{2, 1}, {2, 2}, {3, 1}, {3, 2}};
  const int per_size = 2;
  const int trials = static_cast<int>(sizes.size()) * per_size;
  auto buckets = run_parallel(trials, seed, [&](int t, Rng& rng) {
    const SizeCase sz = sizes[static_cast<size_t>(t) % sizes.size()];
    const LieContext ctx(sz.N);
    const double T = 1.0;
    const int samples = 10;
    IntegratorOptions opt;
    opt.method = "adaptive";
    opt.tol = 1e-12;
    opt.step = 1e-2;
    std::vector<int> degrees = {2};
    if (sz.N == 3) degrees.push_back(3);
    double worst = -1.0;
    for (int attempt = 0; attempt < 25 && worst < 0.0; ++attempt) {
      try {
        double w = 0.0;
        if (kind == ChainKind::periodic) {
          const PeriodicRadialState s0 = tame_periodic_state(ctx, sz.n, rng);
          std::vector<double> xi;
          for (const auto& sp : s0.spins) xi.push_back(sp.xi);
          const ExtendedState es0 = embed_extended(s0);
          for (int d : degrees) {
            const HamiltonianId id{sz.n, d};
            const auto traj = integrate(s0, id, T, opt, samples);
            for (size_t j = 0; j < traj.times.size(); ++j) {
              ExtendedState es = es0;
              flow_extended(es, id.site, id.degree, traj.times[j]);
              const PeriodicRadialState ref = gauge_fix_periodic(ctx, es, xi);
              w = std::max(w, radial_distance(traj.states[j], ref));
            }
          }
        } else {
          const OpenRadialState s0 = tame_open_state(ctx, sz.n, rng, false,
                                                     false);
          OrbitSpecification spec;
          spec.N = sz.N;
          for (const auto& sp : s0.spins) spec.site_xi.push_back(sp.xi);
          spec.left_spectrum = s0.left.spectrum;
          spec.right_spectrum = s0.right.spectrum;
          const ExtendedState es0 = embed_extended(s0);
          for (int d : degrees) {
            const HamiltonianId id{sz.n, d};
            const auto traj = integrate(s0, id, T, opt, samples);
            for (size_t j = 0; j < traj.times.size(); ++j) {
              ExtendedState es = es0;
              flow_extended(es, id.site, id.degree, traj.times[j]);
              const OpenRadialState ref = gauge_fix_open(ctx, es, spec);
              w = std::max(w, radial_distance(traj.states[j], ref));
            }
          }
        }
        worst = w;
      } catch (const std::domain_error&) {
      }
    }
    if (worst < 0.0)
      throw std::runtime_error("projection suite: no regular trajectory");
    return std::vector<CaseResult>{
        CaseResult{label_Nn(kind_name(kind), sz.N, sz.n), worst, true}};
  });
  return fold_report(kind == ChainKind::periodic ? "projection_periodic"
                                                 : "projection_open",
                     trials, tolerance, buckets);
}

Report psi_equivariance_suite(int trials, Tol tol, unsigned long long seed) {
  const double tolerance = tol.value_or(1e-12);
  auto buckets = run_parallel(trials, seed, [&](int t, Rng& rng) {
    const int N = 2 + (t % 3);
    const LieContext ctx(N);
    ExtendedState es;
    es.kind = ChainKind::periodic;
    es.x = {random_traceless(ctx, rng), random_traceless(ctx, rng)};
    es.g = {random_group_element(ctx, rng, 0.4),
            random_group_element(ctx, rng, 0.4)};
    const Mat h1 = random_group_element(ctx, rng, 0.4);
    const Mat h2 = random_group_element(ctx, rng, 0.4);
    const double res = psi_equivariance_check(es, h1, h2);
    std::ostringstream os;
    os << "N=" << N;
    return std::vector<CaseResult>{CaseResult{os.str(), res, true}};
  });
  return fold_report("psi_equivariance", trials, tolerance, buckets);
}

Report psi_leaf_suite(int trials, Tol tol, unsigned long long seed) {
  const double tolerance = tol.value_or(1e-10);
  auto buckets = run_parallel(trials, seed, [&](int t, Rng& rng) {
    const int N = 2 + (t % 3);
    const LieContext ctx(N);
    ExtendedState es;
    es.kind = ChainKind::periodic;
    es.x = {random_traceless(ctx, rng), random_traceless(ctx, rng)};
    es.g = {random_group_element(ctx, rng, 0.4),
            random_group_element(ctx, rng, 0.4)};
    const ExtendedState im = psi_map(es);
    // Moment maps of the twisted action on the image side.
    const Mat mu1_star = im.x[0] + im.x[1];
    const Mat mu2_star =
        (-ad_inv(im.g[0], im.x[0]) - ad_inv(im.g[1], im.x[1])).eval();
    // Site moments of the source chain.
    const Mat mu1 = es.x[0] - ad_inv(es.g[1], es.x[1]);
    const Mat mu2 = es.x[1] - ad_inv(es.g[0], es.x[0]);
    double worst = 0.0;
    for (int d = 2; d <= N; ++d) {
      worst = std::max(worst, rel_gap(casimir(d, mu1_star), casimir(d, mu2)));
      worst = std::max(worst, rel_gap(casimir(d, mu2_star), casimir(d, mu1)));
    }
    std::ostringstream os;
    os << "N=" << N;
    return std::vector<CaseResult>{CaseResult{os.str(), worst, true}};
  });
  return fold_report("psi_leaf", trials, tolerance, buckets);
}

Report dims_suite(ChainKind kind, int states, unsigned long long seed) {
  const double tolerance = 0.5;
  struct DimCase {
    int N;
    int n;
    bool trivial;  // open chain: both boundary orbits trivial
  };
  std::vector<DimCase> sizes;
  if (kind == ChainKind::periodic)
    sizes = {{2, 1, false},
             {2, 2, false},
             {3, 1, false},
             {3, 2, false},
             {4, 2, false}};
  else
    sizes = {{2, 1, true},  {2, 1, false}, {3, 1, true},
             {3, 1, false}, {3, 2, false}, {4, 2, false}};
  const int trials = static_cast<int>(sizes.size());
  auto buckets = run_parallel(trials, seed, [&](int t, Rng& rng) {
    const DimCase sz = sizes[static_cast<size_t>(t)];
    const LieContext ctx(sz.N);
    int smin = 0, smax = 0, bmin = 0, bmax = 0;
    double res = 0.0;
    for (int i = 0; i < states; ++i) {
      DimensionProbe pr;
      if (kind == ChainKind::periodic)
        pr = dimension_probe(sample_periodic_state(
            ctx, random_spec(sz.N, sz.n, rng, false), rng));
      else
        pr = dimension_probe(
            tame_open_state(ctx, sz.n, rng, sz.trivial, sz.trivial));
      if (!pr.rank_gap_ok) res = kInf;
      if (pr.dim_p != pr.dim_s - pr.dim_b) res = std::max(res, 1.0);
      if (i == 0) {
        smin = smax = pr.dim_s;
        bmin = bmax = pr.dim_b;
      } else {
        smin = std::min(smin, pr.dim_s);
        smax = std::max(smax, pr.dim_s);
        bmin = std::min(bmin, pr.dim_b);
        bmax = std::max(bmax, pr.dim_b);
      }
    }
    // Stability across states.
    res = std::max(res, static_cast<double>((smax - smin) + (bmax - bmin)));
    // Expected counts.
    if (kind == ChainKind::periodic) {
      res = std::max(res,
                     static_cast<double>(std::abs(smax - 2 * sz.n * (sz.N - 1))));
      res = std::max(res,
                     static_cast<double>(std::abs(bmax - sz.n * (sz.N - 1))));
    } else {
      const int orbit_dim =
          sz.trivial ? 0 : sz.N * (sz.N - 1) / 2 - sz.N / 2;
      const int expect_s =
          2 * (sz.N - 1) + 2 * sz.n * (sz.N - 1) + 2 * orbit_dim;
      res = std::max(res, static_cast<double>(std::abs(smax - expect_s)));
    }
    std::string label = label_Nn(kind_name(kind), sz.N, sz.n);
    if (kind == ChainKind::open)
      label += sz.trivial ? " trivial-boundaries" : " generic-boundaries";
    return std::vector<CaseResult>{CaseResult{label, res, true}};
  });
  return fold_report(
      kind == ChainKind::periodic ? "dims_periodic" : "dims_open", trials,
      tolerance, buckets);
}

Report rank1_casimir_suite(int trials, Tol tol, unsigned long long seed) {
  const double tolerance = tol.value_or(1e-12);
  auto buckets = run_parallel(trials, seed, [&](int t, Rng& rng) {
    const int N = 2 + (t % 4);
    std::uniform_real_distribution<double> mag(0.3, 1.5);
    std::bernoulli_distribution flip(0.5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double xi = (flip(rng) ? -1.0 : 1.0) * mag(rng);
    Vec a(N), b(N);
    for (int i = 0; i < N; ++i) {
      a[i] = gauss(rng);
      b[i] = gauss(rng);
    }
    b += a * ((xi - a.dot(b)) / a.squaredNorm());
    const Mat mu = embed_rank1(RankOneOrbitPoint{xi, a, b});
    const double res =
        rel_gap(casimir(2, mu), xi * xi * (1.0 - 1.0 / N));
    std::ostringstream os;
    os << "N=" << N;
    return std::vector<CaseResult>{CaseResult{os.str(), res, true}};
  });
  return fold_report("rank1_casimir", trials, tolerance, buckets);
}

Report rank1_gspin_suite(int trials, Tol tol, unsigned long long seed) {
  const double tolerance = tol.value_or(1e-12);
  std::vector<SizeCase> grid;
  for (int N : {2, 3, 4})
    for (int n : {2, 3}) grid.push_back({N, n});
  auto buckets = run_parallel(trials, seed, [&](int t, Rng& rng) {
    const SizeCase sz = grid[static_cast<size_t>(t) % grid.size()];
    const auto spec = random_spec(sz.N, sz.n, rng, false);
    const auto spins = sample_constrained(spec, rng);
    const auto g = local_spins(spins);
    Mat mu = Mat::Zero(sz.N, sz.N);
    for (const auto& sp : spins) mu += embed_rank1(sp);
    const double xi_tot = spec.xi_total();
    double worst = 0.0;
    for (int i = 0; i < sz.N; ++i)
      for (int j = 0; j < sz.N; ++j) {
        if (i == j) continue;
        const double lhs = (g[static_cast<size_t>(i)] *
                            g[static_cast<size_t>(j)])
                               .trace();
        const double rhs =
            mu(i, j) * mu(j, i) - xi_tot * xi_tot / (double(sz.N) * sz.N * sz.n);
        worst = std::max(worst, rel_gap(lhs, rhs));
      }
    return std::vector<CaseResult>{
        CaseResult{label_Nn("periodic", sz.N, sz.n), worst, true}};
  });
  return fold_report("rank1_gspin", trials, tolerance, buckets);
}

Report liouville_rank_suite(int states_per_size, unsigned long long seed) {
  const double tolerance = 0.5;
  const std::vector<SizeCase> sizes = {{2, 1}, {2, 2}, {3, 2}, {4, 3}};
  const int trials = static_cast<int>(sizes.size());
  auto buckets = run_parallel(trials, seed, [&](int t, Rng& rng) {
    const SizeCase sz = sizes[static_cast<size_t>(t)];
    const LieContext ctx(sz.N);
    double res = 0.0;
    for (int i = 0; i < states_per_size; ++i) {
      const auto s =
          sample_periodic_state(ctx, random_spec(sz.N, sz.n, rng, false), rng);
      bool gap = true;
      const int r = liouville_count_probe(s, &gap);
      if (!gap) res = kInf;
      res = std::max(res,
                     static_cast<double>(std::abs(r - sz.n * (sz.N - 1))));
    }
    return std::vector<CaseResult>{
        CaseResult{label_Nn("periodic", sz.N, sz.n), res, true}};
  });
  return fold_report("liouville_rank", trials, tolerance, buckets);
}

// ---------------------------------------------------------------------------
// Registry.
// ---------------------------------------------------------------------------

std::vector<std::string> suite_names() {
  return {"dk_periodic",
          "dk_open",
          "twist_symmetry",
          "commute_periodic",
          "commute_open",
          "conserve_exact_periodic",
          "conserve_exact_open",
          "conserve_ode_periodic",
          "conserve_ode_open",
          "angles_periodic",
          "angles_open",
          "projection_periodic",
          "projection_open",
          "psi_equivariance",
          "psi_leaf",
          "dims_periodic",
          "dims_open",
          "rank1_casimir",
          "rank1_gspin",
          "liouville_rank"};
}

namespace {

Report apply_tol_override(Report rep, Tol tol) {
  if (!tol) return rep;
  rep.tolerance = *tol;
  rep.pass = !rep.per_case.empty();
  for (auto& c : rep.per_case) {
    c.pass = c.residual < *tol;
    rep.pass = rep.pass && c.pass;
  }
  return rep;
}

}  // namespace

Report run_suite(const std::string& name, unsigned long long seed, Tol tol) {
  const auto periodic = ChainKind::periodic;
  const auto open = ChainKind::open;
  if (name == "dk_periodic") return dk_suite(periodic, 1000, tol, seed);
  if (name == "dk_open") return dk_suite(open, 1000, tol, seed);
  if (name == "twist_symmetry") return twist_symmetry_suite(200, tol, seed);
  if (name == "commute_periodic") return commute_suite(periodic, 200, tol, seed);
  if (name == "commute_open") return commute_suite(open, 200, tol, seed);
  if (name == "conserve_exact_periodic")
    return conserve_exact_suite(periodic, tol, seed);
  if (name == "conserve_exact_open")
    return conserve_exact_suite(open, tol, seed);
  if (name == "conserve_ode_periodic")
    return conserve_ode_suite(periodic, tol, seed);
  if (name == "conserve_ode_open") return conserve_ode_suite(open, tol, seed);
  if (name == "angles_periodic") return angle_suite(periodic, tol, seed);
  if (name == "angles_open") return angle_suite(open, tol, seed);
  if (name == "projection_periodic")
    return projection_suite(periodic, tol, seed);
  if (name == "projection_open") return projection_suite(open, tol, seed);
  if (name == "psi_equivariance")
    return psi_equivariance_suite(100, tol, seed);
  if (name == "psi_leaf") return psi_leaf_suite(100, tol, seed);
  if (name == "dims_periodic")
    return apply_tol_override(dims_suite(periodic, 20, seed), tol);
  if (name == "dims_open")
    return apply_tol_override(dims_suite(open, 20, seed), tol);
  if (name == "rank1_casimir") return rank1_casimir_suite(200, tol, seed);
  if (name == "rank1_gspin") return rank1_gspin_suite(200, tol, seed);
  if (name == "liouville_rank")
    return apply_tol_override(liouville_rank_suite(5, seed), tol);
  throw std::invalid_argument("unknown suite: " + name);
}

std::vector<std::string> suite_group(const std::string& group) {
  if (group == "dk") return {"dk_periodic", "dk_open", "twist_symmetry"};
  if (group == "commute") return {"commute_periodic", "commute_open"};
  if (group == "conserve")
    return {"conserve_exact_periodic", "conserve_exact_open",
            "conserve_ode_periodic", "conserve_ode_open"};
  if (group == "angles") return {"angles_periodic", "angles_open"};
  if (group == "projection")
    return {"projection_periodic", "projection_open"};
  if (group == "psi") return {"psi_equivariance", "psi_leaf"};
  if (group == "dims") return {"dims_periodic", "dims_open"};
  if (group == "liouville")
    return {"rank1_casimir", "rank1_gspin", "liouville_rank"};
  if (group == "all") return suite_names();
  const auto names = suite_names();
  if (std::find(names.begin(), names.end(), group) != names.end())
    return {group};
  return {};
}

}  // namespace spincm
