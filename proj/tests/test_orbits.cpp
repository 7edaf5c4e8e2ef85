#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "spincm/orbits.hpp"

using namespace spincm;

TEST_CASE("rank-one embedding on a hand-checked point") {
  RankOneOrbitPoint pt;
  pt.xi = 1.0;
  pt.a = Vec(2);
  pt.a << 1, 0;
  pt.b = Vec(2);
  pt.b << 1, 1;
  const Mat mu = embed_rank1(pt);
  Mat expect(2, 2);
  expect << 0.5, 0.0, 1.0, -0.5;
  CHECK((mu - expect).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(std::abs(mu.trace()) < 1e-15);
}

TEST_CASE("embedding rejects violated scalar constraints") {
  RankOneOrbitPoint pt;
  pt.xi = 2.0;
  pt.a = Vec(2);
  pt.a << 1, 0;
  pt.b = Vec(2);
  pt.b << 1, 1;  // a.b = 1 != 2
  CHECK_THROWS_AS(embed_rank1(pt), std::invalid_argument);
}

TEST_CASE("gauge normalization balances norms without moving the orbit point") {
  Rng rng(31);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 10; ++rep) {
    RankOneOrbitPoint pt;
    pt.a = Vec(3);
    pt.b = Vec(3);
    for (int i = 0; i < 3; ++i) {
      pt.a[i] = gauss(rng);
      pt.b[i] = 3.0 * gauss(rng);
    }
    pt.xi = pt.a.dot(pt.b);
    const RankOneOrbitPoint fixed = normalize_gauge(pt);
    CHECK(fixed.a.norm() == doctest::Approx(fixed.b.norm()));
    CHECK((embed_rank1(fixed) - embed_rank1(pt)).cwiseAbs().maxCoeff() <
          1e-12);
    // first nonzero entry of a is positive, and the map is idempotent
    int lead = 0;
    while (lead < 3 && std::abs(fixed.a[lead]) < 1e-14) ++lead;
    REQUIRE(lead < 3);
    CHECK(fixed.a[lead] > 0.0);
    const RankOneOrbitPoint again = normalize_gauge(fixed);
    CHECK((again.a - fixed.a).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((again.b - fixed.b).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("factorization inverts the embedding") {
  Rng rng(5);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 10; ++rep) {
    RankOneOrbitPoint pt;
    pt.a = Vec(4);
    pt.b = Vec(4);
    for (int i = 0; i < 4; ++i) {
      pt.a[i] = gauss(rng);
      pt.b[i] = gauss(rng);
    }
    pt.xi = pt.a.dot(pt.b);
    const Mat mu = embed_rank1(pt);
    const RankOneOrbitPoint back = factor_rank1(mu, pt.xi);
    CHECK((embed_rank1(back) - mu).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(back.constraint_residual() < 1e-10);
  }
}

TEST_CASE("antisymmetric spectrum of rotation normal forms") {
  Vec spec1(1);
  spec1 << 0.7;
  const Mat y2 = k_orbit_normal_form(2, spec1);
  CHECK((y2 + y2.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Vec s2 = antisymmetric_spectrum(y2);
  REQUIRE(s2.size() == 1);
  CHECK(s2[0] == doctest::Approx(0.7));

  Vec spec2(2);
  spec2 << 1.3, 0.4;
  const Mat y5 = k_orbit_normal_form(5, spec2);
  const Vec s5 = antisymmetric_spectrum(y5);
  REQUIRE(s5.size() == 2);
  CHECK(s5[0] == doctest::Approx(1.3));
  CHECK(s5[1] == doctest::Approx(0.4));
}

TEST_CASE("orbit samples keep the conjugation-invariant spectrum") {
  Rng rng(13);
  Vec spec(2);
  spec << 0.9, 0.2;
  for (int rep = 0; rep < 5; ++rep) {
    const KOrbitPoint pt = sample_k_orbit(4, spec, rng);
    CHECK((pt.y + pt.y.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    const Vec s = antisymmetric_spectrum(pt.y);
    CHECK((s - spec).cwiseAbs().maxCoeff() < 1e-10);
  }
  // empty spectrum pads to the trivial orbit
  const KOrbitPoint triv = sample_k_orbit(3, Vec::Zero(0), rng);
  CHECK(triv.y.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("constrained sampling satisfies both relation families") {
  Rng rng(99);
  OrbitSpecification spec;
  spec.N = 3;
  spec.site_xi = {0.8, -0.3, 1.4};
  const auto spins = sample_constrained(spec, rng);
  REQUIRE(static_cast<int>(spins.size()) == 3);
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(spins[k].a.dot(spins[k].b) - spec.site_xi[k]) < 1e-12);
  CHECK(chain_moment_residual(spins).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(spec.xi_total() == doctest::Approx(1.9));
}

TEST_CASE("per-site sampling enforces only the scalar constraints") {
  Rng rng(7);
  OrbitSpecification spec;
  spec.N = 4;
  spec.site_xi = {0.5, 0.5};
  const auto spins = sample_sites(spec, rng);
  REQUIRE(static_cast<int>(spins.size()) == 2);
  for (const auto& s : spins) CHECK(std::abs(s.constraint_residual()) < 1e-12);
}

TEST_CASE("constraint projection repairs perturbed spins") {
  Rng rng(3);
  OrbitSpecification spec;
  spec.N = 3;
  spec.site_xi = {1.0, -0.4};
  auto spins = sample_constrained(spec, rng);
  std::normal_distribution<double> gauss;
  for (auto& s : spins)
    for (int i = 0; i < 3; ++i) s.b[i] += 1e-3 * gauss(rng);
  const double res = project_spin_constraints(spins, spec.site_xi, true);
  CHECK(res < 1e-12);
  for (int k = 0; k < 2; ++k)
    CHECK(std::abs(spins[k].a.dot(spins[k].b) - spec.site_xi[k]) < 1e-12);
  CHECK(chain_moment_residual(spins).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("local spin matrices collect transposed-index products") {
  Rng rng(21);
  OrbitSpecification spec;
  spec.N = 3;
  spec.site_xi = {0.6, 0.9};
  const auto spins = sample_constrained(spec, rng);
  const auto g = local_spins(spins);
  REQUIRE(static_cast<int>(g.size()) == 3);
  const double shift = spec.xi_total() / (3.0 * 2.0);
  for (int i = 0; i < 3; ++i) {
    REQUIRE(g[i].rows() == 2);
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        const double expect =
            spins[k].b[i] * spins[l].a[i] - (k == l ? shift : 0.0);
        CHECK(g[i](k, l) == doctest::Approx(expect));
      }
  }
}

TEST_CASE("orbit data validation") {
  OrbitSpecification spec;
  spec.N = 3;
  spec.site_xi = {0.4};
  CHECK_NOTHROW(spec.validate());
  spec.N = 1;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.N = 3;
  spec.site_xi.clear();
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
