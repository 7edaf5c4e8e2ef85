#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "spincm/liealg.hpp"

using namespace spincm;

namespace {

Mat rotation_generator2(double t) {
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = -t;
  m(1, 0) = t;
  return m;
}

}  // namespace

TEST_CASE("invariant form on sl_2 diagonal elements") {
  LieContext ctx(2);
  Mat h(2, 2);
  h << 1, 0, 0, -1;
  CHECK(killing_form(ctx, h, h) == doctest::Approx(8.0));  // 2N Tr(h^2) = 4*2
  Mat e(2, 2);
  e << 0, 1, 0, 0;
  CHECK(killing_form(ctx, h, e) == doctest::Approx(0.0));
  Vec hv(2);
  hv << 1, -1;
  CHECK(killing_form_cartan(ctx, hv, hv) == doctest::Approx(8.0));
}

TEST_CASE("root vectors are dual pairs under the form") {
  for (int N : {2, 3, 4}) {
    LieContext ctx(N);
    CHECK(static_cast<int>(ctx.roots().size()) == N * (N - 1));
    CHECK(static_cast<int>(ctx.positive_roots().size()) == N * (N - 1) / 2);
    for (const Root& r : ctx.roots()) {
      const Mat ea = ctx.root_vector(r);
      const Mat em = ctx.root_vector(r.negated());
      CHECK(killing_form(ctx, ea, em) == doctest::Approx(1.0));
      CHECK(killing_form(ctx, ea, ea) == doctest::Approx(0.0));
    }
    for (const Root& r : ctx.positive_roots()) CHECK(r.positive());
  }
}

TEST_CASE("root coordinates extract scaled matrix entries") {
  LieContext ctx(3);
  Rng rng(7);
  const Mat y = random_traceless(ctx, rng);
  const double s = std::sqrt(6.0);  // sqrt(2N)
  for (const Root& r : ctx.roots())
    CHECK(root_coordinate(ctx, y, r) == doctest::Approx(s * y(r.i, r.j)));
}

TEST_CASE("component split round trips a traceless matrix") {
  LieContext ctx(4);
  Rng rng(11);
  const Mat y = random_traceless(ctx, rng);
  std::vector<double> coords;
  for (const Root& r : ctx.roots())
    coords.push_back(root_coordinate(ctx, y, r));
  const Mat back = from_components(ctx, cartan_component(y), coords);
  CHECK((back - y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(cartan_component(y).sum()) < 1e-12);
}

TEST_CASE("coadjoint action is matrix conjugation") {
  LieContext ctx(3);
  Rng rng(3);
  const Mat g = random_group_element(ctx, rng);
  const Mat x = random_traceless(ctx, rng);
  const Mat ax = adjoint_star(g, x);
  CHECK((ax - g * x * g.inverse()).cwiseAbs().maxCoeff() < 1e-10);
  // invariance of the form
  const Mat y = random_traceless(ctx, rng);
  CHECK(killing_form(ctx, ax, adjoint_star(g, y)) ==
        doctest::Approx(killing_form(ctx, x, y)));
}

TEST_CASE("involution and symmetric/antisymmetric projections") {
  LieContext ctx(3);
  Rng rng(5);
  const Mat x = random_traceless(ctx, rng);
  CHECK((cartan_involution(x) + x.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Mat k = project_k(x);
  const Mat p = project_p(x);
  CHECK((k + k.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((k + p - x).cwiseAbs().maxCoeff() < 1e-14);
  // doubled coordinates of the antisymmetric part
  for (const Root& r : ctx.positive_roots())
    CHECK(bracket_coordinate_k(ctx, k, r) ==
          doctest::Approx(2.0 * std::sqrt(6.0) * k(r.i, r.j)));
}

TEST_CASE("power traces on a diagonal matrix") {
  Mat x = Mat::Zero(3, 3);
  x.diagonal() << 2, -1, -1;
  CHECK(casimir(2, x) == doctest::Approx(6.0));
  CHECK(casimir(3, x) == doctest::Approx(6.0));
  CHECK(casimir(4, x) == doctest::Approx(18.0));
}

TEST_CASE("power-trace gradient matches directional finite differences") {
  LieContext ctx(3);
  Rng rng(17);
  const Mat x = random_traceless(ctx, rng);
  for (int d : {2, 3}) {
    const Mat g = gradient_casimir(ctx, d, x);
    CHECK(std::abs(g.trace()) < 1e-12);
    for (int rep = 0; rep < 4; ++rep) {
      const Mat y = random_traceless(ctx, rng);
      const double h = 1e-6;
      const double fd =
          (casimir(d, x + h * y) - casimir(d, x - h * y)) / (2.0 * h);
      CHECK(killing_form(ctx, g, y) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  // quadratic case closed form: gradient is x/N for traceless x
  const Mat g2 = gradient_casimir(ctx, 2, x);
  CHECK((g2 - x / 3.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("multiplicative root values and regularity") {
  Vec q(3);
  q << 1.0, 0.25, -1.25;
  CHECK(root_value(q, Root{0, 1}) == doctest::Approx(std::exp(0.75)));
  CHECK(root_value(q, Root{2, 0}) == doctest::Approx(std::exp(-2.25)));
  CHECK(is_regular(q, 1e-3));
  Vec qc(3);
  qc << 1.0, 1.0 + 1e-9, -2.0;
  CHECK(!is_regular(qc, 1e-6));
}

TEST_CASE("matrix exponential on closed-form cases") {
  // nilpotent
  Mat e(2, 2);
  e << 0, 1, 0, 0;
  CHECK((matrix_exponential(e) - (Mat::Identity(2, 2) + e))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  // diagonal
  Mat h = Mat::Zero(2, 2);
  h.diagonal() << 0.7, -0.7;
  Mat eh = matrix_exponential(h);
  CHECK(eh(0, 0) == doctest::Approx(std::exp(0.7)));
  CHECK(eh(1, 1) == doctest::Approx(std::exp(-0.7)));
  CHECK(std::abs(eh(0, 1)) + std::abs(eh(1, 0)) < 1e-15);
  // rotation
  const double t = 0.6;
  Mat r = matrix_exponential(rotation_generator2(t));
  CHECK(r(0, 0) == doctest::Approx(std::cos(t)));
  CHECK(r(1, 0) == doctest::Approx(std::sin(t)));
  CHECK(r(0, 1) == doctest::Approx(-std::sin(t)));
}

TEST_CASE("normalization helpers and random elements") {
  LieContext ctx(4);
  CHECK(to_trace_normalization(ctx, 16.0) == doctest::Approx(2.0));
  CHECK(ctx.root_scale() == doctest::Approx(std::sqrt(8.0)));
  Rng rng(23);
  const Mat x = random_traceless(ctx, rng);
  CHECK(std::abs(x.trace()) < 1e-12);
  const Mat g = random_group_element(ctx, rng);
  CHECK(g.determinant() == doctest::Approx(1.0).epsilon(1e-8));
  const Mat k = random_special_orthogonal(4, rng);
  CHECK((k.transpose() * k - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK(k.determinant() == doctest::Approx(1.0));
}
