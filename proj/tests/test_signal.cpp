#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sqlab/estimator.hpp"
#include "sqlab/signal.hpp"

using namespace sqlab;

namespace {

Signal four_cells(std::vector<double> v) {
  Signal f(1, -1, 2);  // box [-1/2, 1/2), 4 cells
  REQUIRE(f.v.size() == 4);
  f.v = std::move(v);
  return f;
}

}  // namespace

TEST_CASE("integral and average are exact cell sums") {
  Signal f = four_cells({1.0, 2.0, 3.0, 4.0});
  Box B = f.domain();
  CHECK(integral(f, B) == 2.5);  // (1+2+3+4)/4
  CHECK(average(f, B) == 2.5);
  Signal g = four_cells({1.0, -2.0, 3.0, -4.0});
  CHECK(integral(g, B, true) == 2.5);
  Cube half;
  half.n = 1;
  half.level = 1;
  half.idx[0] = 0;  // [0, 1/2)
  CHECK(integral(f, half.box()) == 0.25 * (3.0 + 4.0));
}

TEST_CASE("median picks the maximal admissible value") {
  Box B = ambient_box(1, -1);
  CHECK(median(four_cells({1, 2, 3, 4}), B) == 3.0);
  CHECK(median(four_cells({1, 1, 2, 2}), B) == 2.0);
  CHECK(median(four_cells({5, 5, 5, 5}), B) == 5.0);
  CHECK(median(four_cells({-1, -1, -1, 7}), B) == -1.0);
}

TEST_CASE("rearrangement uses the strict-overshoot convention") {
  Signal f = four_cells({3, 1, 1, 0});
  Box B = f.domain();
  CHECK(rearrangement(f, B, 0.25) == 3.0);
  CHECK(rearrangement(f, B, 0.5) == 1.0);
  CHECK(rearrangement(f, B, 0.75) == 1.0);
  CHECK(rearrangement(f, B, 0.80) == 0.0);
  // non-increasing in t
  double prev = rearrangement(f, B, 0.01);
  for (double t = 0.05; t <= 1.0; t += 0.05) {
    double cur = rearrangement(f, B, t);
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("layer decomposition is equimeasurable") {
  Signal f = random_signal(1, -1, 8, 9001, 24, false);
  Box B = f.domain();
  double p = 3.0;
  double lhs = 0.0;
  for (double x : f.v) lhs += std::pow(std::fabs(x), p) * f.cell_volume();
  std::vector<Layer> ls = restrict_layers(f, B);
  double rhs = 0.0;
  double mass = 0.0;
  for (const Layer& l : ls) {
    rhs += std::pow(std::fabs(l.value), p) * l.measure;
    mass += l.measure;
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  CHECK(mass == doctest::Approx(B.volume()).epsilon(1e-12));
}

TEST_CASE("local oscillation basics") {
  Signal c = four_cells({2, 2, 2, 2});
  CHECK(local_osc(c, c.domain(), 0.125) == 0.0);

  Signal f = random_signal(1, -1, 6, 42, 16, false);
  Box D = f.domain();
  // scaling by a power of two is exact
  Signal g = f;
  for (double& x : g.v) x *= 2.0;
  CHECK(local_osc(g, D, 0.125) == 2.0 * local_osc(f, D, 0.125));
  // translation invariance up to rounding of the shifted samples
  Signal h = f;
  for (double& x : h.v) x += 0.7531;
  CHECK(local_osc(h, D, 0.125) ==
        doctest::Approx(local_osc(f, D, 0.125)).epsilon(1e-12));
  // smaller lambda can only increase the oscillation
  CHECK(local_osc(f, D, 0.125) >= local_osc(f, D, 0.25));
}

TEST_CASE("maximal function of a unit indicator") {
  // f = chi_[0,1) inside [-4, 4); at x = 2 the best window is [0, 2+h).
  Signal f(1, 2, 4);  // h = 1/16, 128 cells
  long long N = f.side_cells();
  long long origin = N / 2;
  long long ones = 16;  // cells of [0, 1)
  for (long long j = 0; j < ones; ++j) f.at(origin + j) = 1.0;
  Signal M = hl_maximal(f);
  long long jx = origin + 2 * 16;  // cell [2, 2 + h)
  CHECK(M.at(jx) == 16.0 / 33.0);
  // domination and homogeneity
  for (long long j = 0; j < N; ++j) CHECK(M.at(j) >= std::fabs(f.at(j)));
  Signal f2 = f;
  for (double& x : f2.v) x *= 2.0;
  Signal M2 = hl_maximal(f2);
  for (long long j = 0; j < N; ++j) CHECK(M2.at(j) == 2.0 * M.at(j));
}

TEST_CASE("maximal function dominates cube averages") {
  Signal f = random_signal(1, -1, 7, 7, 24, false);
  Signal M = hl_maximal(f);
  for (int level = 1; level <= 5; ++level) {
    long long lanes = 1LL << level;
    for (long long i = -lanes / 2; i < lanes / 2; ++i) {
      Cube q;
      q.n = 1;
      q.level = level;
      q.idx[0] = i;
      double avg = average(f, q.box(), true);
      CellRange r = cube_cells(f, q);
      for (long long j = r.x0; j < r.x1; ++j)
        CHECK(avg <= M.at(j) * (1.0 + 1e-12) + 1e-300);
    }
  }
}

TEST_CASE("norms and the weak quasinorm") {
  Signal chi(1, -1, 4);  // 16 cells
  for (int j = 8; j < 12; ++j) chi.v[static_cast<std::size_t>(j)] = 1.0;  // [0, 1/4)
  CHECK(lp_norm(chi, 2.0) == 0.5);          // |E|^{1/2}
  CHECK(weak_quasinorm(chi, 1.0) == 0.25);  // |E|
  CHECK(weak_quasinorm(chi, 2.0) == 0.5);

  // two-cell hand sum with a weight
  Signal f(1, -1, 1);
  f.v = {2.0, 3.0};
  Signal ws(1, -1, 1);
  ws.v = {5.0, 7.0};
  Weight w = Weight::from_signal(ws);
  CHECK(lp_norm(f, 2.0, &w) ==
        doctest::Approx(std::sqrt(0.5 * (4.0 * 5.0 + 9.0 * 7.0))).epsilon(1e-15));

  // scaling and Chebyshev
  Signal g = random_signal(1, -1, 8, 5, 24, false);
  Signal g2 = g;
  for (double& x : g2.v) x *= -2.0;
  CHECK(lp_norm(g2, 1.5) == doctest::Approx(2.0 * lp_norm(g, 1.5)).epsilon(1e-14));
  CHECK(weak_quasinorm(g, 1.5) <= lp_norm(g, 1.5) * (1.0 + 1e-12));

  // thresholds enumerate sample magnitudes; {|s| >= 1} includes the cells at
  // level 3 -> sup is max(3 * (2/16), 1 * (10/16)) = 5/8.
  Signal s(1, -1, 4);
  for (int j = 8; j < 10; ++j) s.v[static_cast<std::size_t>(j)] = 3.0;
  for (int j = 10; j < 16; ++j) s.v[static_cast<std::size_t>(j)] = 1.0;
  for (int j = 0; j < 2; ++j) s.v[static_cast<std::size_t>(j)] = 1.0;
  CHECK(weak_quasinorm(s, 1.0) == 0.625);
}

TEST_CASE("weight characteristic on a dyadic step weight") {
  // w = 4 on [0,1/2), 1 elsewhere in [-1,1); p = 2, dyadic scope.
  // The attaining window is [0,1): avg w = 5/2, avg 1/w = 5/8.
  Signal ws(1, 0, 5);  // 64 cells, h = 1/32
  std::fill(ws.v.begin(), ws.v.end(), 1.0);
  for (int j = 32; j < 48; ++j) ws.v[static_cast<std::size_t>(j)] = 4.0;
  Weight w = Weight::from_signal(ws);
  ApResult r = ap_char(w, 2.0, ApScope::dyadic);
  CHECK(r.value == doctest::Approx(25.0 / 16.0).epsilon(1e-14));
  CHECK(r.window.lo[0].to_double() == 0.0);
  CHECK(r.window.hi[0].to_double() == 1.0);
  // the unrestricted scope can only see more windows
  CHECK(ap_char(w, 2.0, ApScope::all).value >= r.value - 1e-14);
}

TEST_CASE("weight characteristic: unit weight, scopes, duality") {
  Signal ones(1, -1, 5);
  std::fill(ones.v.begin(), ones.v.end(), 1.0);
  Weight uw = Weight::from_signal(ones);
  CHECK(ap_char(uw, 2.0, ApScope::all).value == 1.0);
  CHECK(ap_char(uw, 3.0, ApScope::dyadic).value == 1.0);
  CHECK(ap_char(uw, 2.0, ApScope::dyadic_shifted).value == 1.0);

  for (int i = 0; i < 4; ++i) {
    Weight rw = random_weight(1, -1, 6, 100 + static_cast<std::uint64_t>(i));
    double p = 2.5;
    double all = ap_char(rw, p, ApScope::all).value;
    double dy = ap_char(rw, p, ApScope::dyadic).value;
    CHECK(all >= 1.0 - 1e-12);
    CHECK(dy <= all * (1.0 + 1e-12));
    double pp = p / (p - 1.0);
    Signal dual(1, -1, 6);
    for (std::size_t j = 0; j < dual.v.size(); ++j)
      dual.v[j] = std::pow(rw.s.v[j], 1.0 - pp);
    Weight dw = Weight::from_signal(dual);
    CHECK(ap_char(dw, pp, ApScope::dyadic).value ==
          doctest::Approx(std::pow(dy, pp - 1.0)).epsilon(1e-12));
  }
}
