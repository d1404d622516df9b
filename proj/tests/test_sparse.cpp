#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "sqlab/estimator.hpp"
#include "sqlab/sparse.hpp"

using namespace sqlab;

namespace {

Cube unit_cube(int n) {
  Cube q;
  q.n = n;
  q.level = 1;
  q.idx[0] = 0;
  if (n == 2) q.idx[1] = 0;
  return q;  // [0, 1/2)^n inside the J = -1 box
}

SparseFamily family_of(const Cube& root, std::vector<std::vector<Cube>> levels) {
  SparseFamily S;
  S.root = root;
  S.levels = std::move(levels);
  return S;
}

}  // namespace

TEST_CASE("sparse certificate accepts and rejects by the packing rule") {
  Cube root = unit_cube(1);
  std::vector<Cube> kids = children(root, 10);
  REQUIRE(kids.size() == 2);

  // a single generation is always sparse
  SparseCertificate ok = verify_sparse(family_of(root, {{root}}));
  CHECK(ok.pass);
  CHECK(ok.worst_packing == 0.0);

  // one child covers exactly half: boundary case passes
  SparseCertificate half = verify_sparse(family_of(root, {{root}, {kids[0]}}));
  CHECK(half.pass);
  CHECK(half.worst_packing == 0.5);

  // both children cover everything: packing fails
  SparseCertificate full = verify_sparse(family_of(root, {{root}, kids}));
  CHECK_FALSE(full.pass);
  CHECK_FALSE(full.packing);
  CHECK(full.level_disjoint);
  CHECK(full.nested);
  CHECK(full.worst_packing == 1.0);

  // a generation escaping the previous one fails nesting
  Cube outside = unit_cube(1);
  outside.idx[0] = -1;  // [-1/2, 0)
  SparseCertificate esc = verify_sparse(family_of(root, {{root}, {outside}}));
  CHECK_FALSE(esc.pass);
  CHECK_FALSE(esc.nested);

  // overlapping cubes in one generation fail disjointness
  SparseCertificate dup =
      verify_sparse(family_of(root, {{root}, {kids[0], kids[0]}}));
  CHECK_FALSE(dup.pass);
  CHECK_FALSE(dup.level_disjoint);
}

TEST_CASE("random and tower families certify by construction") {
  for (int n : {1, 2}) {
    Cube root = unit_cube(n);
    SparseFamily T = tower_family(root, 8);
    CHECK(verify_sparse(T).pass);
    CHECK(T.levels.size() >= 2);
    for (std::uint64_t s : {1ull, 2ull, 3ull}) {
      SparseFamily R = random_family(root, 8, s);
      CHECK(verify_sparse(R).pass);
      CHECK(R.size() >= 1);
    }
  }
}

TEST_CASE("decomposition output satisfies its pointwise bound") {
  for (int n : {1, 2}) {
    int K = n == 1 ? 9 : 5;
    Cube root = unit_cube(n);
    for (std::uint64_t s : {5ull, 6ull}) {
      Signal f = random_signal(n, -1, K, s);
      Decomposition d = lmo_decompose(f, root);
      CHECK(d.certificate.pass);
      CHECK(d.cells_checked > 0);
      CHECK(d.family.origin == FamilyOrigin::decomposition);
      if (!d.family.levels.empty()) {
        CHECK(d.family.levels[0].size() == 1);
        CHECK(relation(d.family.levels[0][0], root) == CubeRelation::equal);
      }
      // the root median is what the signal code reports
      CHECK(d.root_median == median(f, root.box()));
    }
  }
}

TEST_CASE("decomposition of a constant is empty") {
  Signal c(1, -1, 8);
  std::fill(c.v.begin(), c.v.end(), 4.25);
  Decomposition d = lmo_decompose(c, unit_cube(1));
  CHECK(d.certificate.pass);
  CHECK(d.family.levels.empty());
  CHECK(d.root_median == 4.25);
}

TEST_CASE("oversized lambda is rejected") {
  Signal f = random_signal(1, -1, 8, 2);
  CHECK_THROWS(lmo_decompose(f, unit_cube(1), 0.3));
}

TEST_CASE("sparse square on the tower family") {
  Cube root = unit_cube(1);
  Signal f(1, -1, 8);
  std::fill(f.v.begin(), f.v.end(), 1.0);
  SparseFamily T = tower_family(root, 8);
  Signal s = sparse_square(T, f, 0);
  // averages of the constant 1 are 1 on every tower cube; the stack depth
  // below a cell is the number of cubes containing it
  CellRange r = cube_cells(f, root);
  long long first = r.x0;
  double deepest = s.at(first);
  CHECK(deepest == doctest::Approx(std::sqrt(static_cast<double>(T.size()))).epsilon(1e-12));
  CHECK(s.at(r.x1 - 1) == 1.0);  // only the root covers the far end
  for (long long j = 0; j < first; ++j) CHECK(s.at(j) == 0.0);
}

TEST_CASE("dilation escapes count cubes leaving the box") {
  Cube root = unit_cube(1);  // [0, 1/2) in [-1/2, 1/2)
  Signal f(1, -1, 8);
  SparseFamily S = family_of(root, {{root}});
  S.origin = FamilyOrigin::synthetic;
  CHECK(dilation_escapes(S, f, 0) == 0);
  CHECK(dilation_escapes(S, f, 1) == 1);  // [-1/4, 3/4) leaves
  Cube inner;
  inner.n = 1;
  inner.level = 4;
  inner.idx[0] = 1;  // [1/16, 2/16)
  SparseFamily I = family_of(inner, {{inner}});
  CHECK(dilation_escapes(I, f, 2) == 0);  // side 1/4 centered at 3/32 stays
}

TEST_CASE("bilinear pairing matches the quadrature of the square") {
  Cube root = unit_cube(1);
  Signal f = random_signal(1, -1, 8, 41);
  Signal g = random_signal(1, -1, 8, 42);
  SparseFamily S = random_family(root, 8, 7);
  for (int m : {0, 1, 2}) {
    BilinearResult b = bilinear_form(S, f, g, m);
    Signal sq = sparse_square(S, f, m);
    double quad = 0.0, scale = 1e-300;
    for (std::size_t i = 0; i < sq.v.size(); ++i) {
      quad += sq.v[i] * sq.v[i] * g.v[i] * f.cell_volume();
      scale += std::fabs(sq.v[i] * sq.v[i] * g.v[i]) * f.cell_volume();
    }
    CHECK(std::fabs(b.pairing - quad) <= 1e-12 * scale + 1e-300);
  }
}

TEST_CASE("refit covers dilations within the side budget") {
  Cube root;
  root.n = 1;
  root.level = 8;
  root.idx[0] = 3;
  Signal f = random_signal(1, -1, 12, 13, 24, true, true);
  Signal g = random_signal(1, -1, 12, 14, 24, true, true);
  SparseFamily S = random_family(root, 12, 15, 2);
  for (int m : {0, 2, 4}) {
    RefitResult r = refit_shifted(S, m, f.domain());
    CHECK(r.assignments.size() == S.flatten().size());
    std::size_t indexed = 0;
    for (const auto& ids : r.by_grid) indexed += ids.size();
    CHECK(indexed == r.assignments.size());
    for (const RefitAssignment& a : r.assignments) {
      Cube dil = dilate(a.source, m);
      CHECK(a.cover.box().contains(dil.box()));
      CHECK(a.ratio >= 1.0);
      CHECK(a.ratio <= 6.0);
    }
    // majorant dominates the two-signal form pointwise for nonnegative data
    Signal maj = refit_majorant(r, f, g);
    Signal form = bilinear_form(S, f, g, m).form;
    for (std::size_t i = 0; i < form.v.size(); ++i) CHECK(form.v[i] <= maj.v[i]);
  }
}

TEST_CASE("aggregate sums carry geometric tails") {
  Cube root = unit_cube(1);
  Signal f = random_signal(1, -1, 8, 23, 24, true, true);
  SparseFamily S = random_family(root, 8, 3);
  AggregateResult t = calT(S, f, 0.75, 4);
  AggregateResult b = calB(S, f, 0.75, 4);
  CHECK(t.tail_bound > 0.0);
  CHECK(b.tail_bound > 0.0);
  CHECK(b.tail_bound < t.tail_bound);  // faster decay, smaller tail
  // m = 0 term alone is a pointwise lower bound
  Signal s0 = sparse_square(S, f, 0);
  for (std::size_t i = 0; i < s0.v.size(); ++i) {
    CHECK(t.value.v[i] >= s0.v[i] * (1.0 - 1e-12));
    CHECK(std::isfinite(t.value.v[i]));
  }
}

TEST_CASE("domination gap stays moderate and anomaly-free") {
  Signal f = random_signal(1, -1, 8, 77, 24, true);
  TGrid tg = TGrid::spanning(f, 16);
  KernelSpec k = KernelSpec::make(KernelId::haar);
  Cube root = unit_cube(1);
  root.level = 1;
  root.idx[0] = -1;  // [-1/2, 0): any root works, pick the left half
  DominationGap d =
      domination_gap(f, k, BumpSpec::standard(), 1.0, root, k.delta, 6, tg);
  CHECK(d.anomalies == 0);
  CHECK(d.max_ratio >= 0.0);
  CHECK(std::isfinite(d.max_ratio));
  CHECK(d.decomposition.certificate.pass);
}
