#include "sqlab/geometry.hpp"

#include <cmath>
#include <sstream>

namespace sqlab {

namespace {

using i128 = __int128;

void normalize(DyadicThird& r) {
  if (r.num == 0) {
    r.q = 0;
    return;
  }
  while ((r.num & 1LL) == 0 && r.q > -900) {
    r.num >>= 1;
    --r.q;
  }
}

i128 shifted_num(const DyadicThird& r, int common_q) {
  int sh = common_q - r.q;
  if (sh < 0 || sh > 110) throw GeometryError("rational shift out of range");
  return i128(r.num) << sh;
}

long long floor_div(i128 a, i128 b) {
  i128 quo = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --quo;
  if (quo > i128(__INT64_MAX__) || quo < -i128(__INT64_MAX__))
    throw GeometryError("index overflow");
  return static_cast<long long>(quo);
}

}  // namespace

DyadicThird DyadicThird::from_double(double x) {
  if (!std::isfinite(x)) throw GeometryError("non-finite coordinate");
  if (x == 0.0) return {0, 0};
  int e = 0;
  double fr = std::frexp(x, &e);          // x = fr * 2^e, |fr| in [0.5, 1)
  auto m = static_cast<long long>(std::ldexp(fr, 53));  // exact integer
  DyadicThird r{3 * m, 53 - e};
  normalize(r);
  return r;
}

double DyadicThird::to_double() const {
  return std::ldexp(static_cast<double>(num), -q) / 3.0;
}

int compare(const DyadicThird& a, const DyadicThird& b) {
  int cq = a.q > b.q ? a.q : b.q;
  i128 na = shifted_num(a, cq), nb = shifted_num(b, cq);
  return na < nb ? -1 : (na > nb ? 1 : 0);
}

DyadicThird add(const DyadicThird& a, const DyadicThird& b) {
  int cq = a.q > b.q ? a.q : b.q;
  i128 s = shifted_num(a, cq) + shifted_num(b, cq);
  if (s > i128(__INT64_MAX__) || s < -i128(__INT64_MAX__))
    throw GeometryError("rational overflow");
  DyadicThird r{static_cast<long long>(s), cq};
  normalize(r);
  return r;
}

DyadicThird sub(const DyadicThird& a, const DyadicThird& b) {
  return add(a, {-b.num, b.q});
}

long long floor_index(const DyadicThird& x, int level, int s) {
  int d = x.q - level;
  if (d >= 0) {
    if (d > 100) throw GeometryError("level gap out of range");
    return floor_div(i128(x.num) - (i128(s) << d), i128(3) << d);
  }
  if (d < -100) throw GeometryError("level gap out of range");
  return floor_div((i128(x.num) << (-d)) - i128(s), i128(3));
}

bool Box::contains(const Box& inner) const {
  for (int c = 0; c < n; ++c)
    if (compare(lo[c], inner.lo[c]) > 0 || compare(inner.hi[c], hi[c]) > 0) return false;
  return true;
}

bool Box::contains_point(const Point& p) const {
  for (int c = 0; c < n; ++c)
    if (compare(lo[c], p[c]) > 0 || compare(p[c], hi[c]) >= 0) return false;
  return true;
}

double Box::max_side() const {
  double m = 0.0;
  for (int c = 0; c < n; ++c) m = std::max(m, side(c));
  return m;
}

double Box::volume() const {
  double v = 1.0;
  for (int c = 0; c < n; ++c) v *= side(c);
  return v;
}

Box ambient_box(int n, int J) {
  Box b;
  b.n = n;
  for (int c = 0; c < n; ++c) {
    b.lo[c] = {-3, -J};
    b.hi[c] = {3, -J};
  }
  return b;
}

Box Cube::box() const {
  GridShift gs{n, grid};
  Box b;
  b.n = n;
  for (int c = 0; c < n; ++c) {
    int s = gs.signed_sigma(c, level);
    if (dilation == 1) {
      b.lo[c] = DyadicThird::corner(idx[c], level, s);
      b.hi[c] = DyadicThird::corner(idx[c] + 1, level, s);
    } else {
      long long base = 2 * (3 * idx[c] + s);
      b.lo[c] = {base + 3 - 3 * dilation, level + 1};
      b.hi[c] = {base + 3 + 3 * dilation, level + 1};
    }
  }
  return b;
}

double Cube::side() const {
  return std::ldexp(static_cast<double>(dilation), -level);
}

std::string Cube::str() const {
  std::ostringstream os;
  os << "cube{grid=" << grid << " level=" << level << " idx=[";
  for (int c = 0; c < n; ++c) os << (c ? "," : "") << idx[c];
  os << "]";
  if (dilation != 1) os << " dilation=" << dilation;
  os << "}";
  return os.str();
}

std::vector<Cube> children(const Cube& q, int max_level) {
  if (q.dilation != 1) throw GeometryError("children of a dilated cube are undefined");
  if (q.level >= max_level)
    throw ResolutionError("children would exceed finest resolution at " + q.str());
  GridShift gs{q.n, q.grid};
  std::vector<Cube> out;
  out.reserve(std::size_t(1) << q.n);
  for (int bits = 0; bits < (1 << q.n); ++bits) {
    Cube ch = q;
    ch.level = q.level + 1;
    for (int c = 0; c < q.n; ++c)
      ch.idx[c] = 2 * q.idx[c] + gs.signed_sigma(c, q.level) + ((bits >> c) & 1);
    out.push_back(ch);
  }
  return out;
}

Cube parent(const Cube& q) {
  if (q.dilation != 1) throw GeometryError("parent of a dilated cube is undefined");
  GridShift gs{q.n, q.grid};
  Cube p = q;
  p.level = q.level - 1;
  for (int c = 0; c < q.n; ++c)
    p.idx[c] = floor_div(i128(q.idx[c]) - gs.signed_sigma(c, p.level), 2);
  return p;
}

Cube dilate(const Cube& q, int m) {
  if (m < 0 || m > 40) throw GeometryError("dilation exponent out of range");
  Cube d = q;
  d.dilation = q.dilation << m;
  return d;
}

std::vector<Cube> descendants(const Cube& q, int depth, int max_level) {
  if (depth < 0) throw GeometryError("negative descendant depth");
  if (q.level + depth > max_level)
    throw ResolutionError("descendants would exceed finest resolution at " + q.str());
  std::vector<Cube> out{q};
  std::size_t head = 0;
  for (int d = 0; d < depth; ++d) {
    std::size_t tail = out.size();
    for (; head < tail; ++head)
      for (const Cube& ch : children(out[head], max_level)) out.push_back(ch);
  }
  return out;
}

Cube cube_from_point(int n, int grid, int level, const Point& p) {
  GridShift gs{n, grid};
  Cube q;
  q.n = n;
  q.grid = grid;
  q.level = level;
  for (int c = 0; c < n; ++c) q.idx[c] = floor_index(p[c], level, gs.signed_sigma(c, level));
  return q;
}

CubeRelation relation(const Cube& a, const Cube& b) {
  if (a.grid != b.grid || a.n != b.n) throw GeometryError("relation requires a common grid");
  Box ba = a.box(), bb = b.box();
  bool a_in_b = bb.contains(ba), b_in_a = ba.contains(bb);
  if (a_in_b && b_in_a) return CubeRelation::equal;
  if (a_in_b) return CubeRelation::contained;
  if (b_in_a) return CubeRelation::contains;
  for (int c = 0; c < a.n; ++c)
    if (compare(ba.hi[c], bb.lo[c]) <= 0 || compare(bb.hi[c], ba.lo[c]) <= 0)
      return CubeRelation::disjoint;
  throw GeometryError("cubes of one grid overlap without nesting: " + a.str() + " vs " + b.str());
}

CoverResult shifted_cover(const Box& target, const Box& ambient) {
  double ell = target.max_side();
  if (!(ell > 0.0)) throw CoverError("cover target has empty side");
  for (int c = 0; c < target.n; ++c) {
    if (target.lo[c].to_double() - 6.0 * ell < ambient.lo[c].to_double() ||
        target.hi[c].to_double() + 6.0 * ell > ambient.hi[c].to_double())
      throw CoverError("cover target violates the 6*side ambient margin");
  }
  Point anchor{};
  for (int c = 0; c < target.n; ++c) anchor[c] = target.lo[c];
  int k0 = static_cast<int>(std::floor(-std::log2(ell)));
  for (int k = k0 + 1; k >= k0 - 3; --k) {
    double side = std::ldexp(1.0, -k);
    if (side < ell || side > 6.0 * ell) continue;
    for (int g = 1; g <= grid_count(target.n); ++g) {
      Cube cand = cube_from_point(target.n, g, k, anchor);
      if (cand.box().contains(target)) return {cand, side / ell};
    }
  }
  throw CoverError("no shifted cube of side <= 6*target covers the target box");
}

}  // namespace sqlab
