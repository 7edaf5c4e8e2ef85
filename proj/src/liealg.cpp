#include "spincm/liealg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace spincm {

LieContext::LieContext(int N) : n_(N), root_scale_(std::sqrt(2.0 * N)) {
  if (N < 2) throw std::invalid_argument("LieContext: N must be >= 2");
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) positive_.push_back(Root{i, j});
  roots_ = positive_;
  for (const Root& r : positive_) roots_.push_back(r.negated());
}

Mat LieContext::root_vector(Root r) const {
  Mat e = Mat::Zero(n_, n_);
  e(r.i, r.j) = 1.0 / root_scale_;
  return e;
}

double killing_form(const LieContext& ctx, const Mat& x, const Mat& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::invalid_argument("killing_form: dimension mismatch");
  return ctx.killing_scale() * (x * y).trace();
}

double killing_form_cartan(const LieContext& ctx, const Vec& x, const Vec& y) {
  return ctx.killing_scale() * x.dot(y);
}

double root_coordinate(const LieContext& ctx, const Mat& y, Root r) {
  return ctx.root_scale() * y(r.i, r.j);
}

Vec cartan_component(const Mat& y) { return y.diagonal(); }

Mat from_components(const LieContext& ctx, const Vec& cartan,
                    const std::vector<double>& root_coords) {
  const auto& roots = ctx.roots();
  if (root_coords.size() != roots.size())
    throw std::invalid_argument("from_components: root coordinate count");
  Mat y = cartan.asDiagonal();
  for (size_t k = 0; k < roots.size(); ++k)
    y(roots[k].i, roots[k].j) = root_coords[k] / ctx.root_scale();
  return y;
}

Mat adjoint_star(const Mat& g, const Mat& x) {
  // g x g^{-1} through an LU solve: (g^T)^{-1} applied on the right.
  Eigen::PartialPivLU<Mat> lu(g.transpose());
  return lu.solve((g * x).transpose()).transpose();
}

Mat cartan_involution(const Mat& x) { return -x.transpose(); }

Mat project_k(const Mat& x) { return 0.5 * (x - x.transpose()); }

Mat project_p(const Mat& x) { return 0.5 * (x + x.transpose()); }

double bracket_coordinate_k(const LieContext& ctx, const Mat& y, Root r) {
  return 2.0 * ctx.root_scale() * y(r.i, r.j);
}

double casimir(int d, const Mat& x) {
  if (d < 1) throw std::invalid_argument("casimir: degree must be >= 1");
  Mat p = x;
  for (int k = 1; k < d; ++k) p = p * x;
  return p.trace();
}

Mat gradient_casimir(const LieContext& ctx, int d, const Mat& x) {
  if (d < 2 || d > ctx.N())
    throw std::invalid_argument("gradient_casimir: degree out of range");
  Mat p = Mat::Identity(x.rows(), x.cols());
  for (int k = 1; k < d; ++k) p = p * x;
  const double tr = p.trace();
  return (static_cast<double>(d) / ctx.killing_scale()) *
         (p - (tr / ctx.N()) * Mat::Identity(x.rows(), x.cols()));
}

double root_value(const Vec& q, Root r) { return std::exp(q(r.i) - q(r.j)); }

bool is_regular(const Vec& q, double eps) {
  for (int i = 0; i < q.size(); ++i)
    for (int j = i + 1; j < q.size(); ++j)
      if (std::abs(q(i) - q(j)) <= eps) return false;
  return true;
}

double to_trace_normalization(const LieContext& ctx, double value) {
  return value / ctx.killing_scale();
}

Mat matrix_exponential(const Mat& x) { return x.exp(); }

Mat random_traceless(const LieContext& ctx, Rng& rng, double scale) {
  std::normal_distribution<double> gauss(0.0, scale);
  Mat x(ctx.N(), ctx.N());
  for (int i = 0; i < ctx.N(); ++i)
    for (int j = 0; j < ctx.N(); ++j) x(i, j) = gauss(rng);
  const double shift = x.trace() / ctx.N();
  x.diagonal().array() -= shift;
  return x;
}

Mat random_group_element(const LieContext& ctx, Rng& rng, double scale) {
  return matrix_exponential(random_traceless(ctx, rng, scale));
}

Mat random_special_orthogonal(int N, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat a(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) a(i, j) = gauss(rng);
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the sign ambiguity of QR so the distribution is rotation invariant.
  for (int j = 0; j < N; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  if (q.determinant() < 0) q.col(N - 1) *= -1.0;
  return q;
}

}  // namespace spincm
