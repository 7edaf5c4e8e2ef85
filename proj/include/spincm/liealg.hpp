#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace spincm {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// A root eps_i - eps_j of the A-series system, stored as the ordered index
/// pair (i, j), i != j, zero based. Positive roots have i < j.
struct Root {
  int i;
  int j;
  Root negated() const { return Root{j, i}; }
  bool positive() const { return i < j; }
};

/// Normalization constants and root bookkeeping for sl_N(R).
///
/// The invariant bilinear form is (x, y) = 2N Tr(xy); root vectors are
/// e_{eps_i - eps_j} = E_ij / sqrt(2N), so (e_a, e_{-a}) = 1. Dual-space
/// elements are identified with traceless matrices through this form.
class LieContext {
public:
  explicit LieContext(int N);

  int N() const { return n_; }
  double killing_scale() const { return 2.0 * n_; }
  double root_scale() const { return root_scale_; }  // sqrt(2N)
  double reg_epsilon() const { return reg_eps_; }

  /// All N(N-1) roots; the first N(N-1)/2 entries are the positive ones.
  const std::vector<Root>& roots() const { return roots_; }
  const std::vector<Root>& positive_roots() const { return positive_; }

  /// e_alpha as a matrix, normalized so that (e_a, e_{-a}) = 1.
  Mat root_vector(Root r) const;

private:
  int n_;
  double root_scale_;
  double reg_eps_ = 1e-8;
  std::vector<Root> roots_;
  std::vector<Root> positive_;
};

/// (x, y) = 2N Tr(xy).
double killing_form(const LieContext& ctx, const Mat& x, const Mat& y);

/// Pairing of diagonal (Cartan) vectors under the same form: 2N sum_i x_i y_i.
double killing_form_cartan(const LieContext& ctx, const Vec& x, const Vec& y);

/// y_alpha = y(e_{-alpha}) = sqrt(2N) * y_ij.
double root_coordinate(const LieContext& ctx, const Mat& y, Root r);

/// Diagonal part of y (the Cartan component; sums to zero for traceless y).
Vec cartan_component(const Mat& y);

/// Rebuild a matrix from its Cartan component and the root coordinates
/// listed in ctx.roots() order.
Mat from_components(const LieContext& ctx, const Vec& cartan,
                    const std::vector<double>& root_coords);

/// Coadjoint action under the matrix identification: g x g^{-1}.
Mat adjoint_star(const Mat& g, const Mat& x);

/// theta(x) = -x^T.
Mat cartan_involution(const Mat& x);

/// Antisymmetric part (x - x^T)/2: the projection g* -> so(N)* dual to the
/// inclusion, under the bilinear-form identification.
Mat project_k(const Mat& x);

/// Symmetric part (x + x^T)/2.
Mat project_p(const Mat& x);

/// y_[alpha] = y(e_{-alpha} - e_alpha) = 2 sqrt(2N) Y_ij for antisymmetric Y.
double bracket_coordinate_k(const LieContext& ctx, const Mat& y, Root r);

/// Tr(x^d).
double casimir(int d, const Mat& x);

/// Gradient of x -> Tr(x^d) with respect to the 2N-scaled form:
/// the traceless matrix G with (G, y) = d/dt Tr((x + t y)^d)|_0 for all
/// traceless y, i.e. G = (d / 2N) (x^{d-1} - Tr(x^{d-1})/N Id).
Mat gradient_casimir(const LieContext& ctx, int d, const Mat& x);

/// Multiplicative root value a_alpha = e^{q_i - q_j}.
double root_value(const Vec& q, Root r);

/// All pairwise gaps |q_i - q_j| exceed eps.
bool is_regular(const Vec& q, double eps);

/// Divide a 2N-normalized quantity down to the plain trace normalization.
double to_trace_normalization(const LieContext& ctx, double value);

/// Matrix exponential (scaling-and-squaring via Eigen).
Mat matrix_exponential(const Mat& x);

/// Gaussian traceless matrix, entries O(scale).
Mat random_traceless(const LieContext& ctx, Rng& rng, double scale = 1.0);

/// Random element of SL_N(R) near the identity scale: exp of a Gaussian
/// traceless matrix.
Mat random_group_element(const LieContext& ctx, Rng& rng, double scale = 0.5);

/// Haar-ish random SO(N) element (QR of a Gaussian matrix, det corrected).
Mat random_special_orthogonal(int N, Rng& rng);

}  // namespace spincm
