#include "spincm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spincm {

namespace {

Vec center(const Vec& v) { return v.array() - v.mean(); }

int site_index(const ExtendedState& es, int site, const char* what) {
  const int idx = (es.kind == ChainKind::periodic) ? site - 1 : site;
  if (idx < 0 || idx >= es.legs())
    throw std::invalid_argument(std::string(what) + ": site out of range");
  return idx;
}

/// Spectral frame of a matrix with real, distinct eigenvalues: returns the
/// descending spectrum and the eigenvector matrix B (unit columns, sign of
/// the largest-magnitude entry positive) with x = B diag(lambda) B^{-1}.
void real_eigen_frame(const Mat& x, bool require_positive, Vec* lambda_out,
                      Mat* frame_out) {
  const int N = static_cast<int>(x.rows());
  Eigen::EigenSolver<Mat> es(x);
  if (es.info() != Eigen::Success)
    throw std::domain_error("eigen frame: decomposition failed");
  const Eigen::VectorXcd ev = es.eigenvalues();
  const double scale = 1.0 + ev.cwiseAbs().maxCoeff();
  for (int i = 0; i < N; ++i)
    if (std::abs(ev(i).imag()) > 1e-9 * scale)
      throw std::domain_error("eigen frame: complex spectrum");
  std::vector<int> idx(N);
  for (int i = 0; i < N; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return ev(a).real() > ev(b).real(); });
  Vec lam(N);
  for (int i = 0; i < N; ++i) lam(i) = ev(idx[i]).real();
  for (int i = 0; i + 1 < N; ++i)
    if (lam(i) - lam(i + 1) < 1e-9 * scale)
      throw std::domain_error("eigen frame: colliding spectrum");
  if (require_positive && lam(N - 1) <= 0.0)
    throw std::domain_error("eigen frame: nonpositive spectrum");
  Mat frame(N, N);
  for (int i = 0; i < N; ++i) {
    Eigen::VectorXcd col = es.eigenvectors().col(idx[i]);
    // A real eigenvalue of a real matrix has a real eigenvector up to a
    // complex unit; pick the larger of the real/imag parts.
    Vec re = col.real(), im = col.imag();
    Vec v = (re.norm() >= im.norm()) ? re : im;
    v.normalize();
    int top = 0;
    v.cwiseAbs().maxCoeff(&top);
    if (v(top) < 0.0) v = -v;
    frame.col(i) = v;
  }
  if (lambda_out) *lambda_out = lam;
  if (frame_out) *frame_out = frame;
}

/// Orthogonal frame of a symmetric matrix: rows are eigenvectors for the
/// descending spectrum, made deterministic by the largest-entry sign rule
/// with a det = +1 correction folded into the last row.
void symmetric_frame(const Mat& x_sym, Vec* lambda_out, Mat* s_out) {
  const int N = static_cast<int>(x_sym.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(x_sym);
  if (es.info() != Eigen::Success)
    throw std::domain_error("symmetric frame: decomposition failed");
  Vec lam(N);
  Mat r(N, N);
  for (int i = 0; i < N; ++i) {  // ascending -> descending
    lam(i) = es.eigenvalues()(N - 1 - i);
    r.col(i) = es.eigenvectors().col(N - 1 - i);
  }
  const double scale = 1.0 + lam.cwiseAbs().maxCoeff();
  for (int i = 0; i + 1 < N; ++i)
    if (lam(i) - lam(i + 1) < 1e-9 * scale)
      throw std::domain_error("symmetric frame: colliding spectrum");
  for (int j = 0; j + 1 < N; ++j) {
    int top = 0;
    r.col(j).cwiseAbs().maxCoeff(&top);
    if (r(top, j) < 0.0) r.col(j) = -r.col(j);
  }
  if (r.determinant() < 0.0) r.col(N - 1) = -r.col(N - 1);
  if (lambda_out) *lambda_out = lam;
  if (s_out) *s_out = r.transpose();
}

}  // namespace

// ---------------------------------------------------------------------------
// Charts.
// ---------------------------------------------------------------------------

ChartLayout layout_for(const PeriodicRadialState& s) {
  return ChartLayout{s.ctx.N(), s.n(), false};
}

ChartLayout layout_for(const OpenRadialState& s) {
  return ChartLayout{s.ctx.N(), s.n(), true};
}

Vec upper_tri(const Mat& y) {
  const int N = static_cast<int>(y.rows());
  Vec out(N * (N - 1) / 2);
  int idx = 0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) out(idx++) = y(i, j);
  return out;
}

Mat from_upper_tri(int N, const Vec& coeffs) {
  if (coeffs.size() != N * (N - 1) / 2)
    throw std::invalid_argument("from_upper_tri: size mismatch");
  Mat y = Mat::Zero(N, N);
  int idx = 0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      y(i, j) = coeffs(idx);
      y(j, i) = -coeffs(idx);
      ++idx;
    }
  return y;
}

Vec to_flat(const PeriodicRadialState& s) {
  const ChartLayout lay = layout_for(s);
  Vec z(lay.dim());
  z.segment(lay.p_off(), lay.N) = s.p;
  z.segment(lay.q_off(), lay.N) = s.q;
  for (int k = 1; k <= lay.n; ++k) {
    z.segment(lay.a_off(k), lay.N) = s.spins[k - 1].a;
    z.segment(lay.b_off(k), lay.N) = s.spins[k - 1].b;
  }
  return z;
}

Vec to_flat(const OpenRadialState& s) {
  const ChartLayout lay = layout_for(s);
  Vec z(lay.dim());
  z.segment(lay.p_off(), lay.N) = s.p;
  z.segment(lay.q_off(), lay.N) = s.q;
  for (int k = 1; k <= lay.n; ++k) {
    z.segment(lay.a_off(k), lay.N) = s.spins[k - 1].a;
    z.segment(lay.b_off(k), lay.N) = s.spins[k - 1].b;
  }
  z.segment(lay.left_off(), lay.tri()) = upper_tri(s.left.y);
  z.segment(lay.right_off(), lay.tri()) = upper_tri(s.right.y);
  return z;
}

namespace {

std::vector<RankOneOrbitPoint> spins_from_flat(const ChartLayout& lay,
                                               const Vec& z) {
  std::vector<RankOneOrbitPoint> spins(lay.n);
  for (int k = 1; k <= lay.n; ++k) {
    spins[k - 1].a = z.segment(lay.a_off(k), lay.N);
    spins[k - 1].b = z.segment(lay.b_off(k), lay.N);
    spins[k - 1].xi = spins[k - 1].a.dot(spins[k - 1].b);
  }
  return spins;
}

}  // namespace

PeriodicRadialState from_flat(const PeriodicRadialState& tmpl, const Vec& z) {
  const ChartLayout lay = layout_for(tmpl);
  if (z.size() != lay.dim())
    throw std::invalid_argument("from_flat: chart size mismatch");
  return PeriodicRadialState{tmpl.ctx, spins_from_flat(lay, z),
                             z.segment(lay.p_off(), lay.N),
                             z.segment(lay.q_off(), lay.N)};
}

OpenRadialState from_flat(const OpenRadialState& tmpl, const Vec& z) {
  const ChartLayout lay = layout_for(tmpl);
  if (z.size() != lay.dim())
    throw std::invalid_argument("from_flat: chart size mismatch");
  Mat yl = from_upper_tri(lay.N, z.segment(lay.left_off(), lay.tri()));
  Mat yr = from_upper_tri(lay.N, z.segment(lay.right_off(), lay.tri()));
  KOrbitPoint left{yl, antisymmetric_spectrum(yl)};
  KOrbitPoint right{yr, antisymmetric_spectrum(yr)};
  return OpenRadialState{tmpl.ctx,
                         std::move(left),
                         std::move(right),
                         spins_from_flat(lay, z),
                         z.segment(lay.p_off(), lay.N),
                         z.segment(lay.q_off(), lay.N)};
}

// ---------------------------------------------------------------------------
// Poisson structure.
// ---------------------------------------------------------------------------

double poisson_bracket(const ChartLayout& lay, const Vec& z, const Vec& grad_f,
                       const Vec& grad_g) {
  if (grad_f.size() != lay.dim() || grad_g.size() != lay.dim() ||
      z.size() != lay.dim())
    throw std::invalid_argument("poisson_bracket: size mismatch");
  const int N = lay.N;
  const Vec fp = grad_f.segment(lay.p_off(), N), fq = grad_f.segment(lay.q_off(), N);
  const Vec gp = grad_g.segment(lay.p_off(), N), gq = grad_g.segment(lay.q_off(), N);
  double val = (fq.dot(center(gp)) - fp.dot(center(gq))) / (2.0 * N);
  for (int k = 1; k <= lay.n; ++k) {
    const Vec fa = grad_f.segment(lay.a_off(k), N), fb = grad_f.segment(lay.b_off(k), N);
    const Vec ga = grad_g.segment(lay.a_off(k), N), gb = grad_g.segment(lay.b_off(k), N);
    val += (fa.dot(gb) - fb.dot(ga)) / (2.0 * N);
  }
  if (lay.open) {
    for (int off : {lay.left_off(), lay.right_off()}) {
      Mat y = from_upper_tri(N, z.segment(off, lay.tri()));
      Mat a = 0.5 * from_upper_tri(N, grad_f.segment(off, lay.tri()));
      Mat b = 0.5 * from_upper_tri(N, grad_g.segment(off, lay.tri()));
      val -= (y * (a * b - b * a)).trace() / (2.0 * N);
    }
  }
  return val;
}

Vec hamiltonian_field(const ChartLayout& lay, const Vec& z, const Vec& grad_h) {
  if (grad_h.size() != lay.dim() || z.size() != lay.dim())
    throw std::invalid_argument("hamiltonian_field: size mismatch");
  const int N = lay.N;
  Vec out = Vec::Zero(lay.dim());
  out.segment(lay.q_off(), N) = center(grad_h.segment(lay.p_off(), N)) / (2.0 * N);
  out.segment(lay.p_off(), N) = -center(grad_h.segment(lay.q_off(), N)) / (2.0 * N);
  for (int k = 1; k <= lay.n; ++k) {
    out.segment(lay.a_off(k), N) =
        grad_h.segment(lay.b_off(k), N) / (2.0 * N);
    out.segment(lay.b_off(k), N) =
        -grad_h.segment(lay.a_off(k), N) / (2.0 * N);
  }
  if (lay.open) {
    for (int off : {lay.left_off(), lay.right_off()}) {
      Mat y = from_upper_tri(N, z.segment(off, lay.tri()));
      Mat g = 0.5 * from_upper_tri(N, grad_h.segment(off, lay.tri()));
      out.segment(off, lay.tri()) = upper_tri(g * y - y * g) / (2.0 * N);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Analytic gradients of the Casimir Hamiltonians.
// ---------------------------------------------------------------------------

namespace {

Mat matrix_power(const Mat& x, int e) {
  Mat out = Mat::Identity(x.rows(), x.cols());
  for (int i = 0; i < e; ++i) out = out * x;
  return out;
}

/// Push a per-site matrix derivative D (D_rs = dH/dmu_rs) onto the (a, b)
/// coordinates of the rank-one chart, mu = b a^T - (a.b/N) Id.
void accumulate_spin_chain_rule(const Mat& d, const RankOneOrbitPoint& spin,
                                Vec* grad_a, Vec* grad_b) {
  const int N = spin.N();
  const double tr = d.trace();
  *grad_a = d.transpose() * spin.b - (tr / N) * spin.b;
  *grad_b = d * spin.a - (tr / N) * spin.a;
}

}  // namespace

Vec grad_hamiltonian(const PeriodicRadialState& s, const HamiltonianId& id) {
  const ChartLayout lay = layout_for(s);
  const int N = lay.N, n = lay.n, k = id.site, deg = id.degree;
  if (k < 1 || k > n)
    throw std::invalid_argument("grad_hamiltonian: site out of range");
  const std::vector<Mat> mu = s.spin_matrices();
  const Mat x = reconstruct_x(s.ctx, mu, s.p, s.q, k);
  const Mat t = static_cast<double>(deg) * matrix_power(x, deg - 1);
  // dH = sum_rs t(s,r) dx(r,s).
  Vec grad = Vec::Zero(lay.dim());
  for (int i = 0; i < N; ++i) grad(lay.p_off() + i) = t(i, i);
  Mat total = Mat::Zero(N, N);
  for (const Mat& m : mu) total += m;
  for (int l = 0; l < n; ++l) {
    Mat d = Mat::Zero(N, N);
    for (int r = 0; r < N; ++r) {
      for (int c = 0; c < N; ++c) {
        if (r == c) continue;
        const double a = std::exp(s.q(r) - s.q(c));
        d(r, c) = t(c, r) * (l < k ? a : 1.0) / (a - 1.0);
      }
      if (l >= k) d(r, r) = -t(r, r);
    }
    Vec ga, gb;
    accumulate_spin_chain_rule(d, s.spins[l], &ga, &gb);
    grad.segment(lay.a_off(l + 1), N) = ga;
    grad.segment(lay.b_off(l + 1), N) = gb;
  }
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) {
      if (r == c) continue;
      const double a = std::exp(s.q(r) - s.q(c));
      const double dxda = -total(r, c) / ((a - 1.0) * (a - 1.0));
      const double w = t(c, r) * a * dxda;
      grad(lay.q_off() + r) += w;
      grad(lay.q_off() + c) -= w;
    }
  return grad;
}

Vec grad_hamiltonian(const OpenRadialState& s, const HamiltonianId& id) {
  const ChartLayout lay = layout_for(s);
  const int N = lay.N, n = lay.n, k = id.site, deg = id.degree;
  if (k < 0 || k > n)
    throw std::invalid_argument("grad_hamiltonian: site out of range");
  const std::vector<Mat> mu = s.spin_matrices();
  const Mat& ml = s.left.y;
  const Mat& mr = s.right.y;
  const Mat x = reconstruct_x_open(s.ctx, ml, mr, mu, s.p, s.q, k);
  const Mat t = static_cast<double>(deg) * matrix_power(x, deg - 1);
  Vec grad = Vec::Zero(lay.dim());
  for (int i = 0; i < N; ++i) grad(lay.p_off() + i) = t(i, i);
  // Spins.
  for (int l = 0; l < n; ++l) {
    Mat d = Mat::Zero(N, N);
    for (int r = 0; r < N; ++r) {
      for (int c = 0; c < N; ++c) {
        if (r == c) continue;
        const double a = std::exp(s.q(r) - s.q(c));
        const double den = a - 1.0 / a;
        d(r, c) += t(c, r) * (l < k ? a : 1.0 / a) / den;
        d(c, r) += t(c, r) * (-a / den);
      }
      if (l >= k) d(r, r) = -t(r, r);
    }
    Vec ga, gb;
    accumulate_spin_chain_rule(d, s.spins[l], &ga, &gb);
    grad.segment(lay.a_off(l + 1), N) = ga;
    grad.segment(lay.b_off(l + 1), N) = gb;
  }
  // Boundary upper-tri coordinates.
  {
    int idx = 0;
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j) {
        const double a = std::exp(s.q(i) - s.q(j));
        const double den = a - 1.0 / a;
        grad(lay.left_off() + idx) =
            t(j, i) * 2.0 * a / den + t(i, j) * 2.0 / (a * den);
        grad(lay.right_off() + idx) = 2.0 * (t(j, i) + t(i, j)) / den;
        ++idx;
      }
  }
  // q dependence. Writing the root part as x_ij = (a P + Q + S/a) / (a - 1/a)
  // with P, Q, S independent of a, the quotient rule collapses to
  // a dx/da = -(2 (P + S) + Q (a + 1/a)) / (a - 1/a)^2, which keeps every
  // intermediate at the size of the spins even for wide torus separations
  // (the naive two-term quotient rule cancels catastrophically there).
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const double a = std::exp(s.q(i) - s.q(j));
      const double den = a - 1.0 / a;
      double pterm = 2.0 * ml(i, j);
      const double qterm = 2.0 * mr(i, j);
      double sterm = 0.0;
      for (int l = 0; l < n; ++l) {
        if (l < k) {
          pterm += mu[l](i, j) - mu[l](j, i);
        } else {
          pterm -= mu[l](j, i);
          sterm += mu[l](i, j);
        }
      }
      const double w = -t(j, i) *
                       (2.0 * (pterm + sterm) + qterm * (a + 1.0 / a)) /
                       (den * den);
      grad(lay.q_off() + i) += w;
      grad(lay.q_off() + j) -= w;
    }
  return grad;
}

double eval_hamiltonian(const PeriodicRadialState& s, const HamiltonianId& id) {
  return hamiltonian(s, id.site, id.degree);
}

double eval_hamiltonian(const OpenRadialState& s, const HamiltonianId& id) {
  return hamiltonian_open(s, id.site, id.degree);
}

// ---------------------------------------------------------------------------
// Integration.
// ---------------------------------------------------------------------------

namespace {

void reproject_state(PeriodicRadialState& s, const std::vector<double>& xi) {
  project_spin_constraints(s.spins, xi, true);
  s.p = center(s.p);
  s.q = center(s.q);
}

void reproject_state(OpenRadialState& s, const std::vector<double>& xi) {
  project_spin_constraints(s.spins, xi, false);
  s.p = center(s.p);
  s.q = center(s.q);
}

template <class State>
Trajectory<State> integrate_impl(const State& s0, const HamiltonianId& id,
                                 double T, const IntegratorOptions& opt,
                                 int samples) {
  if (samples < 1) throw std::invalid_argument("integrate: samples must be >= 1");
  if (!(T >= 0.0)) throw std::invalid_argument("integrate: T must be >= 0");
  if (!(opt.step > 0.0) || !(opt.tol > 0.0))
    throw std::invalid_argument("integrate: step and tol must be positive");
  const ChartLayout lay = layout_for(s0);
  std::vector<double> xi0;
  for (const auto& sp : s0.spins) xi0.push_back(sp.xi);

  auto field = [&](const Vec& z) {
    State st = from_flat(s0, z);
    return hamiltonian_field(lay, z, grad_hamiltonian(st, id));
  };
  auto rk4 = [&](const Vec& z, double h) {
    Vec k1 = field(z);
    Vec k2 = field(z + 0.5 * h * k1);
    Vec k3 = field(z + 0.5 * h * k2);
    Vec k4 = field(z + h * k3);
    return Vec(z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  };
  auto midpoint = [&](const Vec& z, double h) {
    Vec w = z + 0.5 * h * field(z);
    for (int it = 0; it < 50; ++it) {
      Vec w_next = z + 0.5 * h * field(w);
      const double delta = (w_next - w).template lpNorm<Eigen::Infinity>();
      w = w_next;
      if (delta <= 1e-14 * (1.0 + w.template lpNorm<Eigen::Infinity>())) break;
    }
    return Vec(2.0 * w - z);
  };
  enum class Method { rk4, midpoint, adaptive };
  Method method;
  if (opt.method == "rk4")
    method = Method::rk4;
  else if (opt.method == "midpoint")
    method = Method::midpoint;
  else if (opt.method == "adaptive")
    method = Method::adaptive;
  else
    throw std::invalid_argument("integrate: unknown method '" + opt.method + "'");

  Vec z = to_flat(s0);
  long steps_done = 0;
  auto guard = [&]() {
    if (++steps_done > opt.max_steps)
      throw std::runtime_error("integrate: step budget exceeded");
  };
  auto post_step = [&](Vec& zz) {
    if (!opt.reproject) return;
    State st = from_flat(s0, zz);
    reproject_state(st, xi0);
    zz = to_flat(st);
  };

  Trajectory<State> traj;
  traj.times.push_back(0.0);
  traj.states.push_back(s0);
  double t = 0.0;
  double h_adapt = std::min(opt.step, T > 0 ? T / samples : opt.step);
  for (int j = 1; j <= samples; ++j) {
    const double t_target = T * j / samples;
    if (method == Method::adaptive) {
      while (t < t_target - 1e-15 * (1.0 + T)) {
        guard();
        double h = std::min(h_adapt, t_target - t);
        Vec big = rk4(z, h);
        Vec half = rk4(rk4(z, 0.5 * h), 0.5 * h);
        const double err =
            (big - half).template lpNorm<Eigen::Infinity>() / 15.0;
        const double tol_scale =
            opt.tol * (1.0 + z.template lpNorm<Eigen::Infinity>());
        if (err <= tol_scale) {
          t += h;
          z = half + (half - big) / 15.0;
          post_step(z);
        }
        const double ratio = tol_scale / std::max(err, 1e-300);
        h_adapt = h * std::clamp(0.9 * std::pow(ratio, 0.2), 0.2, 5.0);
        if (h_adapt < 1e-14 * (1.0 + T))
          throw std::runtime_error("integrate: step size underflow");
      }
    } else {
      const double span = t_target - t;
      const long nsteps = std::max(1L, static_cast<long>(std::ceil(span / opt.step - 1e-12)));
      const double h = span / nsteps;
      for (long i = 0; i < nsteps; ++i) {
        guard();
        z = (method == Method::rk4) ? rk4(z, h) : midpoint(z, h);
        post_step(z);
      }
      t = t_target;
    }
    t = t_target;
    traj.times.push_back(t_target);
    traj.states.push_back(from_flat(s0, z));
  }
  return traj;
}

}  // namespace

Trajectory<PeriodicRadialState> integrate(const PeriodicRadialState& s0,
                                          const HamiltonianId& id, double T,
                                          const IntegratorOptions& opt,
                                          int samples) {
  return integrate_impl(s0, id, T, opt, samples);
}

Trajectory<OpenRadialState> integrate(const OpenRadialState& s0,
                                      const HamiltonianId& id, double T,
                                      const IntegratorOptions& opt,
                                      int samples) {
  return integrate_impl(s0, id, T, opt, samples);
}

// ---------------------------------------------------------------------------
// Extended states and the exact flow.
// ---------------------------------------------------------------------------

ExtendedState embed_extended(const PeriodicRadialState& s) {
  const int n = s.n(), N = s.ctx.N();
  ExtendedState es;
  es.kind = ChainKind::periodic;
  const std::vector<Mat> mu = s.spin_matrices();
  for (int k = 1; k <= n; ++k)
    es.x.push_back(reconstruct_x(s.ctx, mu, s.p, s.q, k));
  for (int k = 0; k < n - 1; ++k) es.g.push_back(Mat::Identity(N, N));
  es.g.push_back(s.q.array().exp().matrix().asDiagonal());
  return es;
}

ExtendedState embed_extended(const OpenRadialState& s) {
  const int n = s.n(), N = s.ctx.N();
  ExtendedState es;
  es.kind = ChainKind::open;
  const std::vector<Mat> mu = s.spin_matrices();
  for (int k = 0; k <= n; ++k)
    es.x.push_back(reconstruct_x_open(s.ctx, s.left.y, s.right.y, mu, s.p, s.q, k));
  for (int k = 0; k < n; ++k) es.g.push_back(Mat::Identity(N, N));
  es.g.push_back(s.q.array().exp().matrix().asDiagonal());
  return es;
}

void flow_extended(ExtendedState& es, int site, int degree, double t) {
  const int idx = site_index(es, site, "flow_extended");
  const LieContext ctx(es.N());
  const Mat grad = gradient_casimir(ctx, degree, es.x[idx]);
  es.g[idx] = matrix_exponential(t * grad) * es.g[idx];
}

void gauge_transform_periodic(ExtendedState& es, const std::vector<Mat>& h) {
  if (es.kind != ChainKind::periodic)
    throw std::invalid_argument("gauge_transform_periodic: wrong chain kind");
  const int n = es.legs();
  if (static_cast<int>(h.size()) != n)
    throw std::invalid_argument("gauge_transform_periodic: need one h per site");
  std::vector<Mat> hinv(n);
  for (int i = 0; i < n; ++i) hinv[i] = h[i].inverse();
  for (int i = 0; i < n; ++i) {
    es.x[i] = h[i] * es.x[i] * hinv[i];
    es.g[i] = h[i] * es.g[i] * hinv[(i + 1) % n];
  }
}

void gauge_transform_open(ExtendedState& es, const Mat& kl,
                          const std::vector<Mat>& h, const Mat& kr) {
  if (es.kind != ChainKind::open)
    throw std::invalid_argument("gauge_transform_open: wrong chain kind");
  const int legs = es.legs();  // n + 1
  const int n = legs - 1;
  if (static_cast<int>(h.size()) != n)
    throw std::invalid_argument("gauge_transform_open: need one h per bulk site");
  // Frames acting at the n + 2 vertices: kl, h_1..h_n, kr.
  std::vector<Mat> v;
  v.push_back(kl);
  for (const Mat& m : h) v.push_back(m);
  v.push_back(kr);
  for (int i = 0; i <= n; ++i) {
    es.x[i] = v[i] * es.x[i] * v[i].inverse();
    es.g[i] = v[i] * es.g[i] * v[i + 1].inverse();
  }
}

PeriodicRadialState gauge_fix_periodic(const LieContext& ctx,
                                       const ExtendedState& es,
                                       const std::vector<double>& site_xi,
                                       double tol) {
  if (es.kind != ChainKind::periodic)
    throw std::invalid_argument("gauge_fix_periodic: wrong chain kind");
  const int n = es.legs();
  const int N = ctx.N();
  if (static_cast<int>(site_xi.size()) != n)
    throw std::invalid_argument("gauge_fix_periodic: xi list size mismatch");
  if (es.N() != N)
    throw std::invalid_argument("gauge_fix_periodic: dimension mismatch");
  // z_j = Ad*_{(g_j ... g_n)^{-1}} x_j, computed with tail products.
  std::vector<Mat> z(n);
  Mat tail = Mat::Identity(N, N);
  for (int j = n - 1; j >= 0; --j) {
    tail = es.g[j] * tail;
    z[j] = Eigen::PartialPivLU<Mat>(tail).solve(es.x[j] * tail);
  }
  const Mat m = tail;  // holonomy g_1 ... g_n
  Vec lam;
  Mat frame;
  real_eigen_frame(m, /*require_positive=*/true, &lam, &frame);
  Eigen::PartialPivLU<Mat> frame_lu(frame);
  Vec q = lam.array().log();
  std::vector<Mat> xfix(n);
  for (int j = 0; j < n; ++j) {
    Mat xt = frame_lu.solve(z[j] * frame);
    // Conjugate by a = diag(lam) to land on the canonical section.
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) xt(r, c) *= lam(r) / lam(c);
    xfix[j] = xt;
  }
  Vec p = xfix[n - 1].diagonal();
  std::vector<RankOneOrbitPoint> spins(n);
  for (int j = 0; j < n; ++j) {
    Mat mu;
    if (j == 0) {
      Mat wrap = xfix[n - 1];
      for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c) wrap(r, c) *= lam(c) / lam(r);
      mu = xfix[0] - wrap;
    } else {
      mu = xfix[j] - xfix[j - 1];
    }
    spins[j] = factor_rank1(mu, site_xi[j], tol);
  }
  return make_periodic_state(ctx, std::move(spins), center(p), center(q), tol);
}

OpenRadialState gauge_fix_open(const LieContext& ctx, const ExtendedState& es,
                               const OrbitSpecification& spec, double tol) {
  if (es.kind != ChainKind::open)
    throw std::invalid_argument("gauge_fix_open: wrong chain kind");
  const int legs = es.legs();
  const int n = legs - 1;
  const int N = ctx.N();
  if (spec.sites() != n)
    throw std::invalid_argument("gauge_fix_open: orbit spec size mismatch");
  if (es.N() != N)
    throw std::invalid_argument("gauge_fix_open: dimension mismatch");
  // z_i = Ad*_{g_0 ... g_{i-1}} x_i.
  std::vector<Mat> z(legs);
  Mat head = Mat::Identity(N, N);
  z[0] = es.x[0];
  for (int i = 1; i <= n; ++i) {
    head = head * es.g[i - 1];
    z[i] = head * Eigen::PartialPivLU<Mat>(head.transpose())
                      .solve(es.x[i].transpose())
                      .transpose();
  }
  const Mat m = head * es.g[n];
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat u = svd.matrixU(), v = svd.matrixV();
  const Vec sv = svd.singularValues();
  const double scale = 1.0 + sv(0);
  for (int i = 0; i + 1 < N; ++i)
    if (sv(i) - sv(i + 1) < 1e-9 * scale)
      throw std::domain_error("gauge_fix_open: colliding singular values");
  // Deterministic signs; a final pair flip puts both frames in SO(N).
  for (int j = 0; j + 1 < N; ++j) {
    int top = 0;
    u.col(j).cwiseAbs().maxCoeff(&top);
    if (u(top, j) < 0.0) {
      u.col(j) = -u.col(j);
      v.col(j) = -v.col(j);
    }
  }
  if (u.determinant() < 0.0) {
    u.col(N - 1) = -u.col(N - 1);
    v.col(N - 1) = -v.col(N - 1);
  }
  Vec q = sv.array().log();
  std::vector<Mat> xfix(legs);
  for (int i = 0; i <= n; ++i) xfix[i] = u.transpose() * z[i] * u;
  Vec p = xfix[n].diagonal();
  Mat ml = project_k(xfix[0]);
  Mat wrap = xfix[n];
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) wrap(r, c) *= sv(c) / sv(r);
  Mat mr = -project_k(wrap);
  std::vector<RankOneOrbitPoint> spins(n);
  for (int i = 1; i <= n; ++i)
    spins[i - 1] = factor_rank1(xfix[i] - xfix[i - 1], spec.site_xi[i - 1], tol);
  KOrbitPoint left{ml, antisymmetric_spectrum(ml)};
  KOrbitPoint right{mr, antisymmetric_spectrum(mr)};
  return make_open_state(ctx, std::move(left), std::move(right),
                         std::move(spins), center(p), center(q), tol);
}

// ---------------------------------------------------------------------------
// Gauge-invariant separation.
// ---------------------------------------------------------------------------

namespace {

double invariant_distance(const Vec& p1, const Vec& q1,
                          const std::vector<Mat>& m1, const Vec& p2,
                          const Vec& q2, const std::vector<Mat>& m2) {
  if (p1.size() != p2.size() || m1.size() != m2.size())
    throw std::invalid_argument("radial_distance: shape mismatch");
  const int N = static_cast<int>(p1.size());
  double d = (p1 - p2).lpNorm<Eigen::Infinity>();
  d = std::max(d, (q1 - q2).lpNorm<Eigen::Infinity>());
  for (size_t k = 0; k < m1.size(); ++k)
    d = std::max(d, (m1[k].diagonal() - m2[k].diagonal())
                        .lpNorm<Eigen::Infinity>());
  for (size_t k = 0; k < m1.size(); ++k)
    for (size_t l = 0; l < m1.size(); ++l)
      for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
          d = std::max(d, std::abs(m1[k](i, j) * m1[l](j, i) -
                                   m2[k](i, j) * m2[l](j, i)));
  return d;
}

}  // namespace

double radial_distance(const PeriodicRadialState& sa,
                       const PeriodicRadialState& sb) {
  return invariant_distance(sa.p, sa.q, sa.spin_matrices(), sb.p, sb.q,
                            sb.spin_matrices());
}

double radial_distance(const OpenRadialState& sa, const OpenRadialState& sb) {
  std::vector<Mat> m1 = sa.spin_matrices(), m2 = sb.spin_matrices();
  m1.push_back(sa.left.y);
  m1.push_back(sa.right.y);
  m2.push_back(sb.left.y);
  m2.push_back(sb.right.y);
  return invariant_distance(sa.p, sa.q, m1, sb.p, sb.q, m2);
}

// ---------------------------------------------------------------------------
// Angle coordinates.
// ---------------------------------------------------------------------------

namespace {

void accumulate_factor(double val, AngleValue* out, int power) {
  if (val == 0.0)
    throw std::domain_error("angle: vanishing matrix element");
  out->log_abs += power * std::log(std::abs(val));
  if (power % 2 == 1 && val < 0.0) out->sign = -out->sign;
}

}  // namespace

AngleValue angle_periodic(const ExtendedState& es, const std::vector<int>& m) {
  if (es.kind != ChainKind::periodic)
    throw std::invalid_argument("angle_periodic: wrong chain kind");
  const int n = es.legs();
  const int N = es.N();
  if (static_cast<int>(m.size()) != n)
    throw std::invalid_argument("angle_periodic: need one weight per site");
  for (int w : m)
    if (w < 0 || w >= N)
      throw std::invalid_argument("angle_periodic: weight out of range");
  std::vector<Mat> frame(n);  // eigenvector matrices B_i, s_i = B_i^{-1}
  for (int i = 0; i < n; ++i) real_eigen_frame(es.x[i], false, nullptr, &frame[i]);
  AngleValue out;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    // (s_i g_i s_j^{-1}) = B_i^{-1} g_i B_j.
    Mat f = Eigen::PartialPivLU<Mat>(frame[i]).solve(es.g[i] * frame[j]);
    accumulate_factor(f(m[i], m[j]), &out, 1);
  }
  return out;
}

AngleValue angle_open(const ExtendedState& es, const std::vector<int>& m) {
  if (es.kind != ChainKind::open)
    throw std::invalid_argument("angle_open: wrong chain kind");
  const int legs = es.legs();
  const int n = legs - 1;
  const int N = es.N();
  if (static_cast<int>(m.size()) != n + 2)
    throw std::invalid_argument("angle_open: need n + 2 weights");
  for (int w : m)
    if (w < 0 || w >= N)
      throw std::invalid_argument("angle_open: weight out of range");
  // Vertex frames s_0 .. s_{n+1}.
  std::vector<Mat> s(n + 2);
  symmetric_frame(0.5 * (es.x[0] + es.x[0].transpose()), nullptr, &s[0]);
  for (int i = 1; i <= n; ++i) {
    Mat frame;
    real_eigen_frame(es.x[i], false, nullptr, &frame);
    s[i] = frame.inverse();
  }
  Mat right = adjoint_star(es.g[n].inverse(), es.x[n]);
  symmetric_frame(0.5 * (right + right.transpose()), nullptr, &s[n + 1]);
  AngleValue out;
  for (int i = 0; i <= n; ++i) {
    Mat f = s[i] * es.g[i] * s[i + 1].inverse();
    accumulate_factor(f(m[i], m[i + 1]), &out, 2);
  }
  return out;
}

namespace {

double slope_from_spectrum(const Vec& lam, int degree, int weight) {
  const LieContext ctx(static_cast<int>(lam.size()));
  Mat y = lam.asDiagonal();
  return gradient_casimir(ctx, degree, y)(weight, weight);
}

}  // namespace

double angle_slope_periodic(const ExtendedState& es, int site, int degree,
                            const std::vector<int>& m) {
  const int idx = site_index(es, site, "angle_slope_periodic");
  Vec lam;
  real_eigen_frame(es.x[idx], false, &lam, nullptr);
  return slope_from_spectrum(lam, degree, m[idx]);
}

double angle_slope_open(const ExtendedState& es, int site, int degree,
                        const std::vector<int>& m) {
  const int idx = site_index(es, site, "angle_slope_open");
  Vec lam;
  if (idx == 0) {
    symmetric_frame(0.5 * (es.x[0] + es.x[0].transpose()), &lam, nullptr);
  } else {
    real_eigen_frame(es.x[idx], false, &lam, nullptr);
  }
  return 2.0 * slope_from_spectrum(lam, degree, m[idx]);
}

}  // namespace spincm
