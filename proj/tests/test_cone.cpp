#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "sqlab/cone.hpp"
#include "sqlab/estimator.hpp"

using namespace sqlab;

namespace {

Field test_field(int n, int K, std::uint64_t seed, int levels = 16) {
  Signal f = random_signal(n, -1, K, seed);
  TGrid tg = TGrid::spanning(f, levels);
  return conv_field(f, KernelSpec::make(KernelId::haar, n), tg);
}

}  // namespace

TEST_CASE("aperture sandwich holds term by term") {
  for (int n : {1, 2}) {
    Field F = test_field(n, n == 1 ? 8 : 4, 11);
    BumpSpec bump = BumpSpec::standard();
    for (double a : {0.5, 1.0, 3.0}) {
      Signal lo = cone_energy(F, a);
      Signal mid = smooth_energy(F, bump, a);
      Signal hi = cone_energy(F, 2.0 * a);
      for (std::size_t i = 0; i < lo.v.size(); ++i) {
        CHECK(lo.v[i] <= mid.v[i]);
        CHECK(mid.v[i] <= hi.v[i]);
      }
    }
  }
}

TEST_CASE("cone energy is monotone in the aperture") {
  Field F = test_field(1, 8, 3);
  Signal prev = cone_energy(F, 0.5);
  for (double a : {1.0, 2.0, 3.5, 8.0}) {
    Signal cur = cone_energy(F, a);
    for (std::size_t i = 0; i < cur.v.size(); ++i) CHECK(prev.v[i] <= cur.v[i]);
    prev = cur;
  }
}

TEST_CASE("sharp bump collapses the smooth operator onto the plain one") {
  for (int n : {1, 2}) {
    Field F = test_field(n, n == 1 ? 7 : 4, 5);
    BumpSpec sharp = BumpSpec::unit_indicator();
    for (double a : {1.0, 2.5}) {
      Signal plain = cone_square(F, a);
      Signal smooth = smooth_square(F, sharp, a);
      for (std::size_t i = 0; i < plain.v.size(); ++i)
        CHECK(plain.v[i] == smooth.v[i]);
    }
  }
}

TEST_CASE("square roots square back to the energies") {
  Field F = test_field(1, 7, 9);
  Signal e = cone_energy(F, 1.0);
  Signal s = cone_square(F, 1.0);
  for (std::size_t i = 0; i < e.v.size(); ++i) {
    CHECK(s.v[i] == std::sqrt(e.v[i]));
    CHECK(s.v[i] >= 0.0);
  }
}

TEST_CASE("gstar dominates every fixed-weight truncation and is finite") {
  Field F = test_field(1, 7, 21);
  for (double mu : {2.5, 3.0}) {
    Signal g = gstar_energy(F, mu);
    Signal c = cone_energy(F, 1.0);
    // the unit cone carries weight factor >= 2^{-mu n} inside |x-y| < t
    double floor_factor = std::pow(2.0, -mu);
    for (std::size_t i = 0; i < g.v.size(); ++i) {
      CHECK(std::isfinite(g.v[i]));
      CHECK(g.v[i] >= floor_factor * c.v[i] * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("gstar fft path matches the direct path") {
  Field F = test_field(1, 7, 33);
  Signal a = gstar_energy(F, 3.0, GstarMethod::direct);
  Signal b = gstar_energy(F, 3.0, GstarMethod::fft);
  double scale = 1e-300;
  for (double x : a.v) scale = std::max(scale, std::fabs(x));
  for (std::size_t i = 0; i < a.v.size(); ++i)
    CHECK(std::fabs(a.v[i] - b.v[i]) <= 1e-10 * scale);
}

TEST_CASE("cone expansion majorizes gstar on the shared quadrature") {
  for (int n : {1, 2}) {
    Field F = test_field(n, n == 1 ? 7 : 4, 13);
    for (double mu : {2.5, 3.0}) {
      Signal g = gstar_energy(F, mu, GstarMethod::direct);
      Signal maj = gstar_cone_majorant(F, mu);
      for (std::size_t i = 0; i < g.v.size(); ++i) CHECK(g.v[i] <= maj.v[i]);
    }
  }
}

TEST_CASE("too few annuli for the majorant is a coverage error") {
  Field F = test_field(1, 7, 17);
  CHECK(gstar_required_annuli(F) > 0);
  CHECK_THROWS_AS(gstar_cone_majorant(F, 3.0, 0), CoverageError);
}

TEST_CASE("masked cone integral obeys the aperture comparison") {
  Signal f = random_signal(1, -1, 8, 77);
  TGrid tg = TGrid::spanning(f, 16);
  Field F = conv_field(f, KernelSpec::make(KernelId::haar), tg);
  std::vector<unsigned char> mask = random_cell_set(-1, 8, 5, 6, 0.3);
  double base = masked_cone_integral(F, 1.0, mask);
  CHECK(base >= 0.0);
  for (double a : {2.0, 4.0}) {
    double wide = masked_cone_integral(F, a, mask);
    CHECK(base <= wide);  // nested cones, shared term order
  }
  // empty mask reduces to the full integral of the unit-cone energy
  std::vector<unsigned char> none(mask.size(), 0);
  double full = masked_cone_integral(F, 1.0, none);
  Signal e = cone_energy(F, 1.0);
  double direct = 0.0;
  for (double x : e.v) direct += x;
  direct *= f.h();
  CHECK(full == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("excised wide cone controlled by the excised unit cone") {
  Signal f = random_signal(1, -1, 8, 31);
  TGrid tg = TGrid::spanning(f, 16);
  Field F = conv_field(f, KernelSpec::make(KernelId::haar), tg);
  std::vector<unsigned char> omega = random_cell_set(-1, 8, 9, 6, 0.3);
  Signal chi(1, -1, 8);
  for (std::size_t i = 0; i < chi.v.size(); ++i) chi.v[i] = omega[i] ? 1.0 : 0.0;
  Signal M = hl_maximal(chi);
  double rhs = masked_cone_integral(F, 1.0, omega);
  for (double a : {1.0, 2.0, 4.0}) {
    double thr = 0.5 / a;  // 1 / (2 alpha^n), n = 1
    std::vector<unsigned char> bad(omega.size());
    for (std::size_t i = 0; i < bad.size(); ++i) bad[i] = M.v[i] > thr ? 1 : 0;
    double lhs = masked_cone_integral(F, a, bad);
    CHECK(lhs <= 2.0 * a * rhs);
  }
}

TEST_CASE("cone of the zero field is zero") {
  Signal z(1, -1, 6);
  TGrid tg = TGrid::spanning(z, 8);
  Field F = conv_field(z, KernelSpec::make(KernelId::haar), tg);
  Signal s = cone_square(F, 2.0);
  for (double x : s.v) CHECK(x == 0.0);
  Signal g = gstar(F, 3.0);
  for (double x : g.v) CHECK(x == 0.0);
}
