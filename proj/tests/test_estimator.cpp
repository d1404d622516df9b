#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "sqlab/estimator.hpp"
#include "sqlab/io.hpp"

using namespace sqlab;

TEST_CASE("exponent fit recovers exact power laws") {
  FitResult one = fit_exponent({{1, 1}, {2, 2}, {4, 4}});
  CHECK(one.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.residual <= 1e-12);
  CHECK(one.points == 3);
  FitResult two = fit_exponent({{1, 1}, {2, 4}, {4, 16}});
  CHECK(two.slope == doctest::Approx(2.0).epsilon(1e-12));
  FitResult flat = fit_exponent({{1, 3}, {2, 3}, {4, 3}, {8, 3}});
  CHECK(flat.slope == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(flat.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  CHECK_THROWS_AS(fit_exponent({{1, 1}, {2, 2}}), EstimatorError);
  CHECK_THROWS_AS(fit_exponent({{1, 1}, {1, 2}, {2, 3}}), EstimatorError);
  CHECK_THROWS_AS(fit_exponent({{1, 1}, {2, 0.0}, {4, 2}}), EstimatorError);
  CHECK_THROWS_AS(fit_exponent({{-1, 1}, {2, 2}, {4, 4}}), EstimatorError);
}

TEST_CASE("deterministic generators repeat and differ by seed") {
  Signal a = random_signal(1, -1, 8, 99);
  Signal b = random_signal(1, -1, 8, 99);
  Signal c = random_signal(1, -1, 8, 100);
  CHECK(a.v == b.v);
  CHECK(a.v != c.v);
  Weight wa = random_weight(2, -1, 4, 7);
  Weight wb = random_weight(2, -1, 4, 7);
  CHECK(wa.s.v == wb.s.v);
  for (double x : wa.s.v) {
    CHECK(x >= 1.0 / 8.0 - 1e-15);
    CHECK(x <= 8.0 + 1e-15);
  }
  std::vector<unsigned char> m1 = random_cell_set(-1, 8, 3, 6, 0.3);
  std::vector<unsigned char> m2 = random_cell_set(-1, 8, 3, 6, 0.3);
  CHECK(m1 == m2);
}

TEST_CASE("central signals stay inside the middle quarter") {
  Signal f = random_signal(1, -1, 8, 17, 24, true, true);
  long long N = f.side_cells();
  for (long long j = 0; j < N; ++j) {
    double x = f.cell_center(j)[0].to_double();
    if (std::fabs(x) > 0.125 + f.h()) CHECK(f.at(j) == 0.0);
    CHECK(f.at(j) >= 0.0);  // nonneg mode
  }
}

TEST_CASE("power-law members integrate to their primitive") {
  // |x|^{delta-1} on (0, 2^{J-1}]: integral = (2^{J-1})^delta / delta.
  for (double delta : {1.0, 0.5, 0.25}) {
    Signal f = power_signal(-1, 10, delta);
    double total = 0.0;
    for (double x : f.v) total += x;
    total *= f.cell_volume();
    double want = std::pow(0.25, delta) / delta;
    CHECK(total == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("power weights report their characteristic") {
  PowerWeight unit = power_weight(-1, 8, 2.0, 1.0);
  CHECK(unit.apchar == 1.0);
  for (double x : unit.w.s.v) CHECK(x == 1.0);

  PowerWeight rough = power_weight(-1, 8, 2.0, 0.5);
  CHECK(rough.apchar > 1.0);
  CHECK(rough.apchar ==
        doctest::Approx(ap_char(rough.w, 2.0, ApScope::all).value).epsilon(1e-13));
  // smaller delta means a rougher weight
  PowerWeight rougher = power_weight(-1, 8, 2.0, 0.25);
  CHECK(rougher.apchar > rough.apchar);
}

TEST_CASE("operator names round trip") {
  for (OpId id : {OpId::cone, OpId::smooth, OpId::gstar, OpId::maximal,
                  OpId::sparse_dilated, OpId::aggregate})
    CHECK(op_id_from(op_name(id)) == id);
  CHECK_THROWS_AS(op_id_from("riesz"), EstimatorError);
}

TEST_CASE("applied operators are nonnegative and seedless") {
  Signal f = random_signal(1, -1, 7, 3);
  for (OpId id : {OpId::cone, OpId::smooth, OpId::gstar, OpId::maximal,
                  OpId::sparse_dilated, OpId::aggregate}) {
    OpSpec op;
    op.id = id;
    op.alpha = 2.0;
    op.m = 1;
    Signal out = apply_op(op, f);
    CHECK(out.same_grid(f));
    for (double x : out.v) {
      CHECK(x >= 0.0);
      CHECK(std::isfinite(x));
    }
  }
}

TEST_CASE("family norm ratios are monotone under enlargement") {
  FamilySpec spec;
  spec.n = 1;
  spec.J = -1;
  spec.K = 8;
  spec.seed = 5;
  spec.random_members = 2;
  spec.indicator_levels = 2;
  std::vector<TestPair> small = make_family(spec);
  FamilySpec bigger = spec;
  bigger.random_members = 4;
  bigger.indicator_levels = 3;
  std::vector<TestPair> big = make_family(bigger);
  CHECK(big.size() > small.size());

  OpSpec op;
  op.id = OpId::cone;
  op.alpha = 1.0;
  OpNormResult lo = opnorm_lower(op, 2.0, nullptr, small);
  OpNormResult hi = opnorm_lower(op, 2.0, nullptr, big);
  CHECK(lo.value > 0.0);
  CHECK(lo.value <= hi.value * (1.0 + 1e-12));
  CHECK(!lo.best.empty());
  CHECK(lo.members.size() + static_cast<std::size_t>(lo.skipped) == small.size());

  // repeat run is bitwise identical
  OpNormResult again = opnorm_lower(op, 2.0, nullptr, small);
  CHECK(again.value == lo.value);
  CHECK(again.best == lo.best);
}

TEST_CASE("aperture scan produces a usable fit and is deterministic") {
  FamilySpec fam;
  fam.n = 1;
  fam.J = -1;
  fam.K = 7;
  fam.seed = 11;
  fam.random_members = 2;
  fam.indicator_levels = 2;
  fam.spike = true;
  KernelSpec k = KernelSpec::make(KernelId::haar);
  std::vector<double> alphas{1, 2, 4, 8};
  ScanResult r1 = scan_aperture(2.0, nullptr, k, alphas, fam);
  CHECK(r1.points.size() == alphas.size());
  CHECK(r1.fit.points == static_cast<int>(alphas.size()));
  CHECK(r1.x_name == "alpha");
  for (std::size_t i = 1; i < r1.points.size(); ++i) {
    CHECK(r1.points[i].x > r1.points[i - 1].x);
    // wider cones see more of the field
    CHECK(r1.points[i].measured >= r1.points[i - 1].measured * (1.0 - 1e-12));
  }
  // unweighted L^2 aperture growth is at most the dimension rate, and the
  // family's spike keeps it at least at the square-root rate
  CHECK(r1.fit.slope <= 1.0 + 0.3);
  CHECK(r1.fit.slope >= 0.5 - 0.3);

  ScanResult r2 = scan_aperture(2.0, nullptr, k, alphas, fam);
  CHECK(scan_json(r1) == scan_json(r2));
}

TEST_CASE("weight scan tracks the characteristic") {
  FamilySpec fam;
  fam.n = 1;
  fam.J = -1;
  fam.K = 7;
  fam.seed = 13;
  fam.random_members = 2;
  fam.indicator_levels = 2;
  OpSpec op;
  op.id = OpId::maximal;
  std::vector<double> deltas{0.5, 0.25, 0.125};
  ScanResult r = scan_weight(2.0, KernelSpec::make(KernelId::haar), deltas, op, fam);
  CHECK(r.points.size() == deltas.size());
  CHECK(r.x_name == "apchar");
  for (const ScanPoint& pt : r.points) {
    CHECK(pt.apchar >= 1.0);
    CHECK(pt.measured > 0.0);
  }
  // the maximal function obeys the linear-in-characteristic bound at p = 2
  CHECK(r.fit.slope <= 1.0 + 0.15);
}

TEST_CASE("shift growth scan fits against the dilation exponent") {
  Cube root;
  root.n = 1;
  root.level = 7;
  root.idx[0] = 4;
  SparseFamily S = random_family(root, 12, 19, 2);
  Signal f = random_signal(1, -1, 12, 21, 24, true, true);
  for (double& x : f.v) x += 0.05;
  Weight w = random_weight(1, -1, 12, 22);
  ScanResult r = scan_shift_growth(S, f, w, {1, 2, 3, 4, 5, 6});
  CHECK(r.x_name == "m");
  CHECK(r.points.size() == 6);
  CHECK(r.fit.points == 6);
  CHECK(std::isfinite(r.fit.slope));
}

TEST_CASE("weak scans respect their mode preconditions") {
  FamilySpec fam;
  fam.n = 1;
  fam.J = -1;
  fam.K = 7;
  fam.seed = 23;
  fam.random_members = 1;
  fam.indicator_levels = 2;
  KernelSpec k = KernelSpec::make(KernelId::haar);
  CHECK_THROWS_AS(scan_weak(2.0, k, {1, 2, 4}, WeakMode::aperture, fam),
                  EstimatorError);
  CHECK_THROWS_AS(scan_weak(3.5, k, {0.5, 0.25}, WeakMode::weighted, fam),
                  EstimatorError);
  ScanResult r = scan_weak(1.0, k, {1, 2, 4}, WeakMode::aperture, fam);
  CHECK(r.points.size() == 3);
  CHECK(r.fit.points == 3);
}
