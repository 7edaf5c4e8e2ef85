#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "spincm/periodic.hpp"

using namespace spincm;

namespace {

PeriodicRadialState random_state(int N, std::vector<double> xi,
                                 unsigned long long seed) {
  LieContext ctx(N);
  Rng rng(seed);
  OrbitSpecification spec;
  spec.N = N;
  spec.site_xi = std::move(xi);
  return sample_periodic_state(ctx, spec, rng);
}

Mat total_spin(const PeriodicRadialState& s) {
  Mat tot = Mat::Zero(s.ctx.N(), s.ctx.N());
  for (const Mat& m : s.spin_matrices()) tot += m;
  return tot;
}

}  // namespace

TEST_CASE("two-spin r-matrix pairing on a hand-checked configuration") {
  LieContext ctx(2);
  Mat mk(2, 2), ml(2, 2);
  mk << 0.5, 0.0, 1.0, -0.5;  // embeds a=(1,0), b=(1,1), xi=1
  ml << 0.5, 1.0, 0.0, -0.5;  // embeds a=(1,1), b=(1,0), xi=1
  Vec q(2);
  q << 1.0, -1.0;
  // Cartan term: -1/2 (mu0_k, mu0_l) = -1/2 * 4 * (1/4 + 1/4) = -1.
  // Root term: only the positive root contributes, coordinate product
  // 2*2 = 4 against (e^2 - 1).
  CHECK(felder_r(ctx, mk, ml, q) ==
        doctest::Approx(-1.0 + 4.0 / (std::exp(2.0) - 1.0)).epsilon(1e-14));
  CHECK(felder_r(ctx, ml, mk, q) ==
        doctest::Approx(-1.0 + 4.0 / (std::exp(-2.0) - 1.0)).epsilon(1e-14));
}

TEST_CASE("positive-root split agrees with the full root sum") {
  const auto s = random_state(4, {0.7, -0.2, 1.1}, 19);
  const auto mu = s.spin_matrices();
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      if (k == l) continue;
      CHECK(felder_r(s.ctx, mu[k], mu[l], s.q) ==
            doctest::Approx(felder_r_positive_split(s.ctx, mu[k], mu[l], s.q))
                .epsilon(1e-12));
    }
}

TEST_CASE("reconstructed moments carry the expected Cartan parts") {
  const auto s = random_state(3, {0.9, 0.4, -0.5}, 4);
  const auto mu = s.spin_matrices();
  const int n = s.n();
  // top site: diagonal is exactly p
  CHECK((cartan_component(reconstruct_x(s, n)) - s.p).cwiseAbs().maxCoeff() <
        1e-12);
  // lower sites subtract the higher spin diagonals
  for (int k = 1; k < n; ++k) {
    Vec expect = s.p;
    for (int l = k; l < n; ++l) expect -= cartan_component(mu[l]);
    CHECK((cartan_component(reconstruct_x(s, k)) - expect)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK(std::abs(reconstruct_x(s, k).trace()) < 1e-10);
  }
}

TEST_CASE("consecutive-difference identity for the commuting family") {
  const auto s = random_state(3, {0.8, -0.6, 1.2, 0.5}, 8);
  for (int k = 2; k <= s.n(); ++k) {
    const Mat xk = reconstruct_x(s, k);
    const Mat xk1 = reconstruct_x(s, k - 1);
    const double diff = 0.5 * killing_form(s.ctx, xk, xk) -
                        0.5 * killing_form(s.ctx, xk1, xk1);
    CHECK(kzb_D(s, k) == doctest::Approx(diff).epsilon(1e-11));
  }
}

TEST_CASE("closed-form quadratic Hamiltonian matches the moment norm") {
  const auto s = random_state(4, {1.0, -0.3}, 15);
  const Mat xn = reconstruct_x(s, s.n());
  CHECK(h2_closed_form(s) ==
        doctest::Approx(0.5 * killing_form(s.ctx, xn, xn)).epsilon(1e-12));
  CHECK(h2_closed_form(s) ==
        doctest::Approx(4.0 * casimir(2, xn)).epsilon(1e-12));
}

TEST_CASE("trace-normalized quadratic Hamiltonian has the sinh pair form") {
  const auto s = random_state(3, {0.7, -0.2, 1.1}, 42);
  const Mat tot = total_spin(s);
  double expect = 0.5 * s.p.squaredNorm();
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double g = 0.5 * (s.q[i] - s.q[j]);
      expect -= tot(i, j) * tot(j, i) / (4.0 * std::sinh(g) * std::sinh(g));
    }
  CHECK(to_trace_normalization(s.ctx, h2_closed_form(s)) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("named Hamiltonians are power traces of the moments") {
  const auto s = random_state(3, {0.6, 0.9}, 77);
  for (int k = 1; k <= s.n(); ++k)
    for (int d = 2; d <= 3; ++d)
      CHECK(hamiltonian(s, k, d) ==
            doctest::Approx(casimir(d, reconstruct_x(s, k))).epsilon(1e-12));
}

TEST_CASE("state constructor enforces the chart invariants") {
  LieContext ctx(3);
  Rng rng(2);
  OrbitSpecification spec;
  spec.N = 3;
  spec.site_xi = {0.5, 0.5};
  auto good = sample_periodic_state(ctx, spec, rng);

  SUBCASE("ascending q is rejected") {
    Vec q = good.q.reverse();
    CHECK_THROWS_AS(
        make_periodic_state(ctx, good.spins, good.p, q),
        std::invalid_argument);
  }
  SUBCASE("momentum with nonzero mean is rejected") {
    Vec p = good.p;
    p[0] += 0.3;
    CHECK_THROWS_AS(make_periodic_state(ctx, good.spins, p, good.q),
                    std::invalid_argument);
  }
  SUBCASE("broken moment constraint is rejected") {
    auto spins = good.spins;
    spins[0].b *= 1.5;
    spins[0].xi = spins[0].a.dot(spins[0].b);
    CHECK_THROWS_AS(make_periodic_state(ctx, spins, good.p, good.q),
                    std::invalid_argument);
  }
  SUBCASE("valid data round trips") {
    auto s = make_periodic_state(ctx, good.spins, good.p, good.q);
    CHECK(s.n() == 2);
    CHECK(std::abs(s.p.sum()) < 1e-12);
    CHECK(std::abs(s.q.sum()) < 1e-12);
  }
}

TEST_CASE("sampled states sit on the requested orbits") {
  const auto s = random_state(5, {0.4, -0.9, 1.3}, 31);
  REQUIRE(s.n() == 3);
  CHECK(std::abs(s.spins[0].a.dot(s.spins[0].b) - 0.4) < 1e-10);
  CHECK(std::abs(s.spins[1].a.dot(s.spins[1].b) + 0.9) < 1e-10);
  CHECK(std::abs(s.spins[2].a.dot(s.spins[2].b) - 1.3) < 1e-10);
  CHECK(chain_moment_residual(s.spins).cwiseAbs().maxCoeff() < 1e-10);
  for (int i = 0; i + 1 < 5; ++i) CHECK(s.q[i] > s.q[i + 1]);
}
