#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "sqlab/field.hpp"
#include "sqlab/kernel.hpp"

using namespace sqlab;

TEST_CASE("kernel names round trip and bad names throw") {
  for (KernelId id : {KernelId::haar, KernelId::mexhat, KernelId::boxcar})
    CHECK(kernel_id_from(kernel_name(id)) == id);
  CHECK_THROWS_AS(kernel_id_from("gauss"), KernelError);
}

TEST_CASE("kernel validation accepts the admissible kernels") {
  KernelReport haar = validate_kernel(KernelSpec::make(KernelId::haar));
  CHECK(haar.passed);
  CHECK(haar.eps_ok);
  CHECK(std::fabs(haar.mean) <= haar.mean_tol);
  // the step kernel moves mass 4|h| under an |h|-shift, no more
  CHECK(haar.smooth_const <= 4.0 + 1e-9);
  CHECK(haar.decay_const > 0.0);

  KernelReport mex = validate_kernel(KernelSpec::make(KernelId::mexhat));
  CHECK(mex.passed);
  CHECK(mex.eps_ok);

  // boxcar has unit mean: rejected, and that is the point of the control
  KernelReport box = validate_kernel(KernelSpec::make(KernelId::boxcar));
  CHECK_FALSE(box.passed);
  CHECK(std::fabs(box.mean) > box.mean_tol);
}

TEST_CASE("kernel antiderivative matches the profile numerically") {
  for (KernelId id : {KernelId::haar, KernelId::mexhat}) {
    KernelSpec k = KernelSpec::make(id);
    double R = k.support_radius();
    // centered difference of A against psi away from jump points
    for (double x = -R + 0.137; x < R; x += 0.231) {
      double d = 1e-6;
      double approx = (k.antiderivative(x + d) - k.antiderivative(x - d)) / (2 * d);
      CHECK(approx == doctest::Approx(k.profile(x)).epsilon(1e-4));
    }
    CHECK(k.antiderivative(-R - 1.0) == 0.0);
  }
}

TEST_CASE("scale grids span the box") {
  Signal f(1, -1, 7);
  TGrid tg = TGrid::spanning(f, 48);
  CHECK(tg.L == 48);
  CHECK(tg.t(0) == 2.0 * f.h());
  CHECK(tg.t(47) == doctest::Approx(f.domain().side(0)).epsilon(1e-12));
  for (int l = 1; l < tg.L; ++l) CHECK(tg.t(l) > tg.t(l - 1));
  CHECK(tg.dlog() == doctest::Approx(std::log(tg.ratio)).epsilon(1e-12));

  TGrid st = TGrid::standard(f);
  CHECK(st.ratio == doctest::Approx(std::pow(2.0, 0.125)).epsilon(1e-12));
  CHECK(st.t(0) == 2.0 * f.h());
  CHECK(st.t(st.L - 1) == doctest::Approx(f.domain().side(0)).epsilon(1e-10));
}

TEST_CASE("field storage and quadrature weights") {
  Signal f(1, -1, 5);
  TGrid tg = TGrid::spanning(f, 8);
  Field F(f.n, f.J, f.K, tg);
  CHECK(F.cells_per_level() == static_cast<std::size_t>(f.side_cells()));
  CHECK(F.v.size() == F.cells_per_level() * 8);
  F.at(3, 7) = 2.5;
  CHECK(F.level(3)[7] == 2.5);
  // dy dt/t^{n+1} weights decrease along the scale axis (n = 1)
  for (int l = 1; l < tg.L; ++l) CHECK(F.level_weight(l) < F.level_weight(l - 1));
  CHECK(F.level_weight(0) > 0.0);
}

TEST_CASE("convolution of a single cell matches the primitive") {
  for (KernelId id : {KernelId::haar, KernelId::mexhat}) {
    KernelSpec k = KernelSpec::make(id);
    Signal f(1, -1, 6);  // h = 1/64
    long long jc = 40;
    f.at(jc) = 1.0;
    double a = f.cell_box(jc).lo[0].to_double();
    TGrid tg = TGrid::spanning(f, 12);
    Field F = conv_field(f, k, tg, ConvMethod::direct);
    for (int l : {0, 5, 11}) {
      double t = tg.t(l);
      for (long long j : {jc - 9, jc, jc + 3}) {
        double y = f.cell_center(j)[0].to_double();
        double want = k.antiderivative((y - a) / t) - k.antiderivative((y - a - f.h()) / t);
        CHECK(F.at(l, j) == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("fft and direct convolution agree") {
  for (int n : {1, 2}) {
    int K = n == 1 ? 7 : 4;
    for (KernelId id : {KernelId::haar, KernelId::mexhat}) {
      Signal f(n, -1, K);
      // deterministic ripple, no RNG needed
      for (std::size_t i = 0; i < f.v.size(); ++i)
        f.v[i] = std::sin(0.37 * static_cast<double>(i)) + 0.25;
      TGrid tg = TGrid::spanning(f, 10);
      KernelSpec k = KernelSpec::make(id, n);
      Field A = conv_field(f, k, tg, ConvMethod::direct);
      Field B = conv_field(f, k, tg, ConvMethod::fft);
      double sup = 0.0, scale = 1e-300;
      for (std::size_t i = 0; i < A.v.size(); ++i) {
        sup = std::max(sup, std::fabs(A.v[i] - B.v[i]));
        scale = std::max(scale, std::fabs(A.v[i]));
      }
      CHECK(sup <= 1e-10 * scale);
    }
  }
}

TEST_CASE("convolution is linear and kills the zero signal") {
  Signal f(1, -1, 6), g(1, -1, 6);
  for (std::size_t i = 0; i < f.v.size(); ++i) {
    f.v[i] = std::cos(0.11 * static_cast<double>(i));
    g.v[i] = 0.5 * std::sin(0.23 * static_cast<double>(i) + 1.0);
  }
  Signal s = f;
  for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] += g.v[i];
  TGrid tg = TGrid::spanning(f, 8);
  KernelSpec k = KernelSpec::make(KernelId::haar);
  Field Ff = conv_field(f, k, tg);
  Field Fg = conv_field(g, k, tg);
  Field Fs = conv_field(s, k, tg);
  double scale = 1e-300;
  for (double x : Fs.v) scale = std::max(scale, std::fabs(x));
  for (std::size_t i = 0; i < Fs.v.size(); ++i)
    CHECK(std::fabs(Fs.v[i] - (Ff.v[i] + Fg.v[i])) <= 1e-12 * scale);

  Signal z(1, -1, 6);
  Field Fz = conv_field(z, k, tg);
  for (double x : Fz.v) CHECK(x == 0.0);
}
