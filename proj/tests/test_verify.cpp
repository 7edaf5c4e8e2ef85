#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spincm/openchain.hpp"
#include "spincm/periodic.hpp"
#include "spincm/verify.hpp"

using namespace spincm;

namespace {

PeriodicRadialState periodic_state(int N, int n, unsigned long long seed) {
  LieContext ctx(N);
  Rng rng(seed);
  OrbitSpecification spec;
  spec.N = N;
  for (int k = 0; k < n; ++k) spec.site_xi.push_back(k % 2 ? -0.6 : 0.9);
  return sample_periodic_state(ctx, spec, rng);
}

OpenRadialState open_state(int N, int n, unsigned long long seed) {
  LieContext ctx(N);
  Rng rng(seed);
  OrbitSpecification spec;
  spec.N = N;
  for (int k = 0; k < n; ++k) spec.site_xi.push_back(k % 2 ? -0.6 : 0.9);
  spec.left_spectrum = Vec::Constant(1, 0.8);
  spec.right_spectrum = Vec::Constant(1, 0.3);
  return sample_open_state(ctx, spec, rng);
}

}  // namespace

TEST_CASE("trace words are invariant under the chain gauge action") {
  Rng rng(3);
  const auto s = periodic_state(3, 2, 7);
  auto es = embed_extended(s);
  const auto words = default_trace_words(es);
  REQUIRE(!words.empty());
  std::vector<double> before;
  for (const auto& w : words) before.push_back(trace_word(es, w));
  std::vector<Mat> h;
  for (int i = 0; i < s.n(); ++i)
    h.push_back(random_group_element(s.ctx, rng, 0.4));
  gauge_transform_periodic(es, h);
  for (std::size_t i = 0; i < words.size(); ++i)
    CHECK(trace_word(es, words[i]) ==
          doctest::Approx(before[i]).epsilon(1e-10));
}

TEST_CASE("trace words are conserved by every exact flow") {
  const auto s = open_state(3, 2, 11);
  auto es = embed_extended(s);
  const auto words = default_trace_words(es);
  std::vector<double> before;
  for (const auto& w : words) before.push_back(trace_word(es, w));
  flow_extended(es, 0, 2, 0.8);
  flow_extended(es, 2, 3, -0.4);
  for (std::size_t i = 0; i < words.size(); ++i)
    CHECK(trace_word(es, words[i]) ==
          doctest::Approx(before[i]).epsilon(1e-9));
}

TEST_CASE("boundary trace words read the end orbits") {
  const auto s = open_state(4, 2, 13);
  const auto es = embed_extended(s);
  TraceWordSpec left;
  left.site = 0;
  left.word = "YY";
  CHECK(trace_word(es, left) ==
        doctest::Approx((s.left.y * s.left.y).trace()).epsilon(1e-12));
  TraceWordSpec right;
  right.site = s.n() + 1;
  right.word = "YY";
  CHECK(trace_word(es, right) ==
        doctest::Approx((s.right.y * s.right.y).trace()).epsilon(1e-12));
}

TEST_CASE("numeric rank with spectral-gap reporting") {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = 1.0;
  m(1, 1) = 0.5;
  m(2, 2) = 1e-13;
  bool gap_ok = false;
  CHECK(numeric_rank(m, 1e-9, &gap_ok) == 2);
  CHECK(gap_ok);
  // a singular value sitting exactly at the threshold spoils the gap
  m(2, 2) = 1e-9;
  numeric_rank(m, 1e-9, &gap_ok);
  CHECK(!gap_ok);
}

TEST_CASE("independent Hamiltonian count matches n(N-1)") {
  bool gap_ok = false;
  CHECK(liouville_count_probe(periodic_state(3, 2, 17), &gap_ok) == 4);
  CHECK(gap_ok);
  CHECK(liouville_count_probe(periodic_state(2, 2, 19), &gap_ok) == 2);
}

TEST_CASE("tangent-space bookkeeping at random states") {
  const auto pr = dimension_probe(periodic_state(3, 2, 23));
  CHECK(pr.dim_s == 8);  // 2 n (N-1)
  CHECK(pr.dim_b == 4);  // n (N-1)
  CHECK(pr.dim_p == pr.dim_s - pr.dim_b);
  CHECK(pr.rank_gap_ok);

  const auto po = dimension_probe(open_state(3, 2, 23));
  CHECK(po.dim_p == po.dim_s - po.dim_b);
  CHECK(po.rank_gap_ok);
}

TEST_CASE("two-site involution swaps the leaf data") {
  const auto s = periodic_state(3, 2, 29);
  const auto es = embed_extended(s);
  const auto im = psi_map(es);
  REQUIRE(im.legs() == 2);
  // the first twisted moment is the negated first moment
  CHECK((im.x[0] + es.x[0]).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(casimir(2, im.x[0]) == doctest::Approx(casimir(2, es.x[0])));
  // equivariance at the identity is exact
  CHECK(psi_equivariance_check(es, Mat::Identity(3, 3),
                               Mat::Identity(3, 3)) < 1e-12);
  // and at random group elements within roundoff
  Rng rng(31);
  CHECK(psi_equivariance_check(es, random_group_element(s.ctx, rng, 0.4),
                               random_group_element(s.ctx, rng, 0.4)) < 1e-10);
}

TEST_CASE("suite registry is closed and consistent") {
  const auto names = suite_names();
  CHECK(names.size() == 20);
  CHECK(suite_group("all") == names);
  for (const std::string& g :
       {"dk", "commute", "conserve", "angles", "projection", "psi", "dims",
        "liouville"}) {
    const auto leaves = suite_group(g);
    CHECK(!leaves.empty());
    for (const auto& leaf : leaves)
      CHECK(std::find(names.begin(), names.end(), leaf) != names.end());
  }
  // every leaf name resolves to itself
  for (const auto& leaf : names) {
    const auto resolved = suite_group(leaf);
    REQUIRE(resolved.size() == 1);
    CHECK(resolved[0] == leaf);
  }
  CHECK(suite_group("nonsense").empty());
  CHECK_THROWS_AS(run_suite("nonsense", 1), std::invalid_argument);
}

TEST_CASE("suite reports are deterministic in the seed") {
  const auto r1 = run_suite("psi_leaf", 5);
  const auto r2 = run_suite("psi_leaf", 5);
  CHECK(r1.max_residual == r2.max_residual);
  CHECK(r1.trials == r2.trials);
  CHECK(r1.pass);
  REQUIRE(r1.per_case.size() == r2.per_case.size());
  for (std::size_t i = 0; i < r1.per_case.size(); ++i) {
    CHECK(r1.per_case[i].label == r2.per_case[i].label);
    CHECK(r1.per_case[i].residual == r2.per_case[i].residual);
  }
}

TEST_CASE("tolerance overrides flow through to the verdict") {
  const auto strict = run_suite("psi_equivariance", 3, 1e-30);
  CHECK(!strict.pass);
  CHECK(strict.tolerance == 1e-30);
  const auto loose = run_suite("psi_equivariance", 3, 1e-3);
  CHECK(loose.pass);
}

TEST_CASE("well-separated samplers honour the orbit data") {
  LieContext ctx(4);
  Rng rng(37);
  OrbitSpecification spec;
  spec.N = 4;
  spec.site_xi = {0.7, -0.4};
  const auto sp = sample_tame_periodic(ctx, spec, rng);
  for (int k = 0; k < 2; ++k)
    CHECK(std::abs(sp.spins[k].a.dot(sp.spins[k].b) - spec.site_xi[k]) <
          1e-10);
  CHECK(chain_moment_residual(sp.spins).cwiseAbs().maxCoeff() < 1e-10);

  spec.left_spectrum = Vec::Constant(2, 0.5);
  spec.right_spectrum = Vec::Zero(0);
  const auto so = sample_tame_open(ctx, spec, rng);
  CHECK((antisymmetric_spectrum(so.left.y) -
         Vec::Constant(2, 0.5)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(so.right.y.cwiseAbs().maxCoeff() < 1e-12);
}
