#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "spincm/dynamics.hpp"
#include "spincm/openchain.hpp"
#include "spincm/periodic.hpp"

using namespace spincm;

namespace {

PeriodicRadialState periodic_state(unsigned long long seed) {
  LieContext ctx(3);
  Rng rng(seed);
  OrbitSpecification spec;
  spec.N = 3;
  spec.site_xi = {0.8, -0.5};
  return sample_periodic_state(ctx, spec, rng);
}

OpenRadialState open_state(unsigned long long seed) {
  LieContext ctx(3);
  Rng rng(seed);
  OrbitSpecification spec;
  spec.N = 3;
  spec.site_xi = {0.8, -0.5};
  spec.left_spectrum = Vec::Constant(1, 0.9);
  spec.right_spectrum = Vec::Constant(1, 0.4);
  return sample_open_state(ctx, spec, rng);
}

Vec unit(int dim, int i) {
  Vec v = Vec::Zero(dim);
  v[i] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("flat chart round trips both state types") {
  const auto sp = periodic_state(3);
  const Vec zp = to_flat(sp);
  const auto lay = layout_for(sp);
  CHECK(zp.size() == lay.dim());
  const auto sp2 = from_flat(sp, zp);
  CHECK(radial_distance(sp, sp2) < 1e-14);

  const auto so = open_state(3);
  const Vec zo = to_flat(so);
  CHECK(zo.size() == layout_for(so).dim());
  const auto so2 = from_flat(so, zo);
  CHECK(radial_distance(so, so2) < 1e-14);
}

TEST_CASE("strict upper triangle coordinates round trip") {
  Rng rng(4);
  std::normal_distribution<double> gauss;
  Mat y = Mat::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      y(i, j) = gauss(rng);
      y(j, i) = -y(i, j);
    }
  const Vec c = upper_tri(y);
  CHECK(c.size() == 6);
  CHECK((from_upper_tri(4, c) - y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Poisson tensor takes the documented canonical values") {
  const auto s = open_state(5);
  const auto lay = layout_for(s);
  const Vec z = to_flat(s);
  const int N = 3;
  const double scale = 1.0 / (2.0 * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const double qp = poisson_bracket(lay, z, unit(lay.dim(), lay.q_off() + i),
                                        unit(lay.dim(), lay.p_off() + j));
      const double expect = ((i == j ? 1.0 : 0.0) - 1.0 / N) * scale;
      CHECK(qp == doctest::Approx(expect).epsilon(1e-14));
      const double ab = poisson_bracket(lay, z, unit(lay.dim(), lay.a_off(1) + i),
                                        unit(lay.dim(), lay.b_off(1) + j));
      CHECK(ab == doctest::Approx(i == j ? scale : 0.0).epsilon(1e-14));
    }
  // sites do not interact
  CHECK(poisson_bracket(lay, z, unit(lay.dim(), lay.a_off(1)),
                        unit(lay.dim(), lay.b_off(2))) == 0.0);
  // boundary block: -1/(2N) Tr(Y [half-coordinate gradients])
  Vec gf = unit(lay.dim(), lay.left_off() + 0);
  Vec gg = unit(lay.dim(), lay.left_off() + 1);
  const Mat A = 0.5 * from_upper_tri(N, Vec::Unit(3, 0));
  const Mat B = 0.5 * from_upper_tri(N, Vec::Unit(3, 1));
  const double expect = -(s.left.y * (A * B - B * A)).trace() * scale;
  CHECK(poisson_bracket(lay, z, gf, gg) ==
        doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("bracket is antisymmetric and kills coinciding gradients") {
  const auto s = open_state(7);
  const auto lay = layout_for(s);
  const Vec z = to_flat(s);
  Rng rng(11);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 5; ++rep) {
    Vec f(lay.dim()), g(lay.dim());
    for (int i = 0; i < lay.dim(); ++i) {
      f[i] = gauss(rng);
      g[i] = gauss(rng);
    }
    CHECK(poisson_bracket(lay, z, f, g) ==
          doctest::Approx(-poisson_bracket(lay, z, g, f)).epsilon(1e-12));
    CHECK(std::abs(poisson_bracket(lay, z, f, f)) < 1e-12);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  const double h = 1e-6;
  SUBCASE("periodic chain") {
    const auto s = periodic_state(13);
    const auto lay = layout_for(s);
    const Vec z = to_flat(s);
    for (const HamiltonianId id : {HamiltonianId{2, 2}, HamiltonianId{1, 3}}) {
      const Vec g = grad_hamiltonian(s, id);
      for (int i = 0; i < lay.dim(); i += 3) {
        Vec zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        const double fd = (eval_hamiltonian(from_flat(s, zp), id) -
                           eval_hamiltonian(from_flat(s, zm), id)) /
                          (2.0 * h);
        CHECK(g[i] == doctest::Approx(fd).epsilon(5e-6));
      }
    }
  }
  SUBCASE("open chain") {
    const auto s = open_state(13);
    const auto lay = layout_for(s);
    const Vec z = to_flat(s);
    for (const HamiltonianId id : {HamiltonianId{2, 2}, HamiltonianId{0, 2}}) {
      const Vec g = grad_hamiltonian(s, id);
      for (int i = 0; i < lay.dim(); i += 3) {
        Vec zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        const double fd = (eval_hamiltonian(from_flat(s, zp), id) -
                           eval_hamiltonian(from_flat(s, zm), id)) /
                          (2.0 * h);
        CHECK(g[i] == doctest::Approx(fd).epsilon(5e-6));
      }
    }
  }
}

TEST_CASE("quadratic flow moves positions along the momentum") {
  const auto s = periodic_state(17);
  const auto lay = layout_for(s);
  const HamiltonianId id{s.n(), 2};
  const Vec field = hamiltonian_field(lay, to_flat(s), grad_hamiltonian(s, id));
  // H = Tr(x^2) with x diagonal part p gives qdot = p / N
  CHECK((field.segment(lay.q_off(), 3) - s.p / 3.0).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("integration methods agree and conserve the Hamiltonian") {
  const auto s = periodic_state(23);
  const HamiltonianId id{2, 2};
  IntegratorOptions rk4;
  rk4.method = "rk4";
  rk4.step = 1e-3;
  IntegratorOptions mid;
  mid.method = "midpoint";
  mid.step = 2e-4;
  IntegratorOptions ada;
  ada.method = "adaptive";
  ada.tol = 1e-12;
  const double T = 0.5;
  const auto t1 = integrate(s, id, T, rk4, 5);
  const auto t2 = integrate(s, id, T, mid, 5);
  const auto t3 = integrate(s, id, T, ada, 5);
  REQUIRE(t1.states.size() == 6);
  REQUIRE(t1.times.front() == 0.0);
  CHECK(t1.times.back() == doctest::Approx(T));
  CHECK(radial_distance(t1.states.back(), t2.states.back()) < 1e-8);
  CHECK(radial_distance(t1.states.back(), t3.states.back()) < 1e-8);
  const double h0 = eval_hamiltonian(s, id);
  for (const auto& st : t1.states)
    CHECK(eval_hamiltonian(st, id) == doctest::Approx(h0).epsilon(1e-10));
  // orbit constraints survived the flow
  for (const auto& st : t1.states) {
    for (const auto& sp : st.spins)
      CHECK(std::abs(sp.constraint_residual()) < 1e-9);
    CHECK(chain_moment_residual(st.spins).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("open-chain integration conserves all commuting Hamiltonians") {
  const auto s = open_state(29);
  const HamiltonianId drive{s.n(), 2};
  IntegratorOptions opt;
  opt.method = "adaptive";
  opt.tol = 1e-12;
  const auto traj = integrate(s, drive, 1.0, opt, 4);
  for (int k = 0; k <= s.n(); ++k)
    for (int d = 2; d <= 3; ++d) {
      const double v0 = eval_hamiltonian(s, HamiltonianId{k, d});
      for (const auto& st : traj.states)
        CHECK(eval_hamiltonian(st, HamiltonianId{k, d}) ==
              doctest::Approx(v0).epsilon(1e-8));
    }
}

TEST_CASE("group-level embedding projects back to the same radial point") {
  const auto sp = periodic_state(31);
  const auto esp = embed_extended(sp);
  CHECK(esp.legs() == sp.n());
  const auto backp = gauge_fix_periodic(sp.ctx, esp, {0.8, -0.5});
  CHECK(radial_distance(sp, backp) < 1e-10);

  const auto so = open_state(31);
  const auto eso = embed_extended(so);
  CHECK(eso.legs() == so.n() + 1);
  OrbitSpecification spec;
  spec.N = 3;
  spec.site_xi = {0.8, -0.5};
  spec.left_spectrum = Vec::Constant(1, 0.9);
  spec.right_spectrum = Vec::Constant(1, 0.4);
  const auto backo = gauge_fix_open(so.ctx, eso, spec);
  CHECK(radial_distance(so, backo) < 1e-10);
}

TEST_CASE("gauge fixing is invariant under the chain gauge action") {
  Rng rng(37);
  SUBCASE("periodic") {
    const auto s = periodic_state(41);
    auto es = embed_extended(s);
    std::vector<Mat> h;
    for (int i = 0; i < s.n(); ++i)
      h.push_back(random_group_element(s.ctx, rng, 0.3));
    gauge_transform_periodic(es, h);
    const auto back = gauge_fix_periodic(s.ctx, es, {0.8, -0.5});
    CHECK(radial_distance(s, back) < 1e-9);
  }
  SUBCASE("open") {
    const auto s = open_state(41);
    auto es = embed_extended(s);
    std::vector<Mat> h;
    for (int i = 0; i < s.n(); ++i)
      h.push_back(random_group_element(s.ctx, rng, 0.3));
    const Mat kl = random_special_orthogonal(3, rng);
    const Mat kr = random_special_orthogonal(3, rng);
    gauge_transform_open(es, kl, h, kr);
    OrbitSpecification spec;
    spec.N = 3;
    spec.site_xi = {0.8, -0.5};
    spec.left_spectrum = Vec::Constant(1, 0.9);
    spec.right_spectrum = Vec::Constant(1, 0.4);
    const auto back = gauge_fix_open(s.ctx, es, spec);
    CHECK(radial_distance(s, back) < 1e-9);
  }
}

TEST_CASE("exact flow fixes the moments and is trivial at time zero") {
  const auto s = periodic_state(43);
  auto es = embed_extended(s);
  const auto x_before = es.x;
  const auto g_before = es.g;
  flow_extended(es, 1, 2, 0.0);
  for (int i = 0; i < es.legs(); ++i) {
    CHECK((es.x[i] - x_before[i]).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((es.g[i] - g_before[i]).cwiseAbs().maxCoeff() < 1e-14);
  }
  flow_extended(es, 1, 2, 0.7);
  for (int i = 0; i < es.legs(); ++i)
    CHECK((es.x[i] - x_before[i]).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((es.g[0] - g_before[0]).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("gauge-invariant distance separates genuinely different states") {
  const auto s = periodic_state(47);
  CHECK(radial_distance(s, s) == 0.0);
  auto zs = to_flat(s);
  zs[0] += 1e-3;
  zs[1] -= 1e-3;
  const auto s2 = from_flat(s, zs);
  CHECK(radial_distance(s, s2) > 1e-4);
}

namespace {

/// The angle frames need real distinct site spectra; retry until a sampled
/// state provides them.
ExtendedState framed_periodic(unsigned long long seed,
                              const std::vector<int>& probe) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto es = embed_extended(periodic_state(seed + attempt));
    try {
      angle_periodic(es, probe);
      return es;
    } catch (const std::domain_error&) {
    }
  }
  throw std::runtime_error("no framed periodic state found");
}

ExtendedState framed_open(unsigned long long seed,
                          const std::vector<int>& probe) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto es = embed_extended(open_state(seed + attempt));
    try {
      angle_open(es, probe);
      return es;
    } catch (const std::domain_error&) {
    }
  }
  throw std::runtime_error("no framed open state found");
}

}  // namespace

TEST_CASE("angle functions produce finite signed logarithms") {
  const auto esp = framed_periodic(53, {0, 1});
  const AngleValue vp = angle_periodic(esp, {0, 1});
  CHECK(std::isfinite(vp.log_abs));
  CHECK((vp.sign == 1 || vp.sign == -1));

  const auto eso = framed_open(53, {0, 1, 0, 1});
  const AngleValue vo = angle_open(eso, {0, 1, 0, 1});
  CHECK(std::isfinite(vo.log_abs));
  CHECK((vo.sign == 1 || vo.sign == -1));
}

TEST_CASE("angle slope predicts the short-time log drift") {
  const std::vector<int> m{1, 0};
  auto es = framed_periodic(59, m);
  const double slope = angle_slope_periodic(es, 2, 2, m);
  const double v0 = angle_periodic(es, m).log_abs;
  const double h = 1e-6;
  flow_extended(es, 2, 2, h);
  const double v1 = angle_periodic(es, m).log_abs;
  CHECK((v1 - v0) / h == doctest::Approx(slope).epsilon(1e-4));
}
