#include "doctest.h"
#include "sqlab/geometry.hpp"

using namespace sqlab;

TEST_CASE("thirds rationals are exact") {
  DyadicThird a = DyadicThird::from_int(1);
  CHECK(a.to_double() == 1.0);
  DyadicThird c = DyadicThird::corner(1, 3, 1);  // (3*1 + 1) / (3*2^3) = 1/6
  CHECK(c.to_double() == doctest::Approx(1.0 / 6).epsilon(1e-15));
  CHECK(compare(c, c) == 0);
  CHECK(compare(DyadicThird{1, 4}, DyadicThird{2, 5}) == 0);  // 1/48 == 2/96
  CHECK(compare(DyadicThird{1, 4}, DyadicThird{3, 5}) < 0);
  CHECK(DyadicThird::from_double(0.375).to_double() == 0.375);
  CHECK(sub(add(c, a), a) == c);
}

TEST_CASE("cube boxes and children") {
  Cube q;
  q.n = 1;
  q.grid = 0;
  q.level = 2;
  q.idx[0] = 3;
  Box b = q.box();
  CHECK(b.lo[0].to_double() == 0.75);
  CHECK(b.hi[0].to_double() == 1.0);
  CHECK(q.side() == 0.25);

  auto kids = children(q, 10);
  REQUIRE(kids.size() == 2);
  CHECK(kids[0].box().lo[0].to_double() == 0.75);
  CHECK(kids[1].box().hi[0].to_double() == 1.0);
  for (const Cube& k : kids) {
    CHECK(parent(k).idx[0] == q.idx[0]);
    CHECK(parent(k).level == q.level);
    CHECK(relation(q, k) == CubeRelation::contains);
    CHECK(relation(k, q) == CubeRelation::contained);
  }
  CHECK(relation(kids[0], kids[1]) == CubeRelation::disjoint);
  CHECK(relation(q, q) == CubeRelation::equal);

  Cube q2 = q;
  q2.n = 2;
  q2.idx[1] = -1;
  CHECK(children(q2, 10).size() == 4);
  // self + 4 children + 16 grandchildren
  CHECK(descendants(q2, 2, 10).size() == 21);
}

TEST_CASE("dilation is concentric and exact") {
  Cube q;
  q.n = 1;
  q.level = 4;
  q.idx[0] = 5;  // [5/16, 6/16)
  Cube d = dilate(q, 2);
  Box b = d.box();
  double c = (5.0 / 16 + 6.0 / 16) / 2;
  CHECK(b.lo[0].to_double() == doctest::Approx(c - 2.0 / 16).epsilon(1e-15));
  CHECK(b.hi[0].to_double() == doctest::Approx(c + 2.0 / 16).epsilon(1e-15));
  CHECK(d.box().contains(q.box()));
  CHECK(dilate(q, 0).box().contains(q.box()));
  CHECK(q.box().contains(dilate(q, 0).box()));
}

TEST_CASE("cube_from_point brackets the point on every grid") {
  for (int g = 0; g <= grid_count(1); ++g) {
    for (int level = 0; level <= 6; ++level) {
      Point p{};
      p[0] = DyadicThird{7, 5};  // 7/96
      Cube q = cube_from_point(1, g, level, p);
      CHECK(q.box().contains_point(p));
    }
  }
}

TEST_CASE("shifted grids differ from the standard one") {
  GridShift g1{1, 1}, g2{1, 2};
  CHECK(g1.sigma(0) == 0);  // grid 1 carries the zero shift
  CHECK(g2.sigma(0) == 1);
  CHECK(g2.signed_sigma(0, 2) == 1);
  CHECK(g2.signed_sigma(0, 3) == -1);  // shifts alternate per level
}

TEST_CASE("shifted cover of an awkward interval") {
  // Approximately [0.3, 0.55): not aligned to any dyadic grid.
  const long long unit = 3LL << 20;
  Box target;
  target.n = 1;
  target.lo[0] = DyadicThird{static_cast<long long>(0.3 * unit), 20};
  target.hi[0] = DyadicThird{static_cast<long long>(0.55 * unit), 20};
  CoverResult r = shifted_cover(target, ambient_box(1, 2));
  CHECK(r.cover.box().contains(target));
  CHECK(r.ratio <= 6.0);
  CHECK(r.cover.grid >= 1);
  CHECK(r.cover.grid <= grid_count(1));
}

TEST_CASE("shifted cover needs margin inside the ambient box") {
  Box target;
  target.n = 1;
  target.lo[0] = DyadicThird{static_cast<long long>(0.4 * (3LL << 20)), 20};
  target.hi[0] = DyadicThird{static_cast<long long>(0.45 * (3LL << 20)), 20};
  CHECK_THROWS_AS(shifted_cover(target, ambient_box(1, -1)), CoverError);
}

TEST_CASE("cover ratio stays within 6 on a sweep of sides") {
  Box ambient = ambient_box(1, 2);
  const long long unit = 3LL << 20;
  for (int i = 0; i < 200; ++i) {
    double side = 0.002 + 0.001 * i;  // up to ~0.2
    long long w = static_cast<long long>(side * unit);
    Box target;
    target.n = 1;
    target.lo[0] = DyadicThird{-unit / 7 + 911 * i, 20};
    target.hi[0] = DyadicThird{-unit / 7 + 911 * i + w, 20};
    CoverResult r = shifted_cover(target, ambient);
    CHECK(r.cover.box().contains(target));
    CHECK(r.ratio <= 6.0);
  }
}

TEST_CASE("floor_index inverts corners") {
  for (int level = 0; level <= 5; ++level) {
    for (long long j = -5; j <= 5; ++j) {
      DyadicThird x = DyadicThird::corner(j, level, 0);
      CHECK(floor_index(x, level, 0) == j);
    }
  }
}
