#ifndef SQLAB_GEOMETRY_HPP
#define SQLAB_GEOMETRY_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqlab {

inline constexpr int kMaxDim = 3;

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResolutionError : GeometryError {
  using GeometryError::GeometryError;
};
struct CoverError : GeometryError {
  using GeometryError::GeometryError;
};

// Exact rational of the form num / (3 * 2^q), q of either sign.  Every
// coordinate that appears in this library (cell corners, shifted-grid cube
// corners, dilated cube corners, double-precision inputs) is representable.
struct DyadicThird {
  long long num = 0;
  int q = 0;

  static DyadicThird from_int(long long v) { return {3 * v, 0}; }
  static DyadicThird from_double(double x);  // exact; throws on non-finite
  // (3*j + s) / (3 * 2^level) with s in {-1, 0, +1}
  static DyadicThird corner(long long j, int level, int s) {
    return {3 * j + s, level};
  }

  double to_double() const;
  DyadicThird scaled_pow2(int m) const { return {num, q - m}; }  // value * 2^m
};

int compare(const DyadicThird& a, const DyadicThird& b);
inline bool operator<(const DyadicThird& a, const DyadicThird& b) { return compare(a, b) < 0; }
inline bool operator<=(const DyadicThird& a, const DyadicThird& b) { return compare(a, b) <= 0; }
inline bool operator==(const DyadicThird& a, const DyadicThird& b) { return compare(a, b) == 0; }
DyadicThird add(const DyadicThird& a, const DyadicThird& b);
DyadicThird sub(const DyadicThird& a, const DyadicThird& b);
// floor(x * 2^level - s/3) for s in {-1, 0, +1}; used to locate grid indices.
long long floor_index(const DyadicThird& x, int level, int s);

using Point = std::array<DyadicThird, kMaxDim>;

// Half-open axis-parallel box, coordinates exact.
struct Box {
  int n = 1;
  std::array<DyadicThird, kMaxDim> lo{};
  std::array<DyadicThird, kMaxDim> hi{};

  bool contains(const Box& inner) const;
  bool contains_point(const Point& p) const;
  double side(int c) const { return sub(hi[c], lo[c]).to_double(); }
  double max_side() const;
  double volume() const;
};

Box ambient_box(int n, int J);  // [-2^J, 2^J)^n

// Per-coordinate shift selector of a grid.  Grid 0 is the standard dyadic
// grid; grids 1..2^n are the shifted family, coordinate c of grid g shifted
// by (-1)^level * sigma_c / (3 * 2^level) with sigma_c = bit c of (g-1).
struct GridShift {
  int n = 1;
  int id = 0;
  int sigma(int c) const { return id == 0 ? 0 : ((id - 1) >> c) & 1; }
  // Signed shift numerator at a level: (-1)^level * sigma(c).
  int signed_sigma(int c, int level) const {
    int s = sigma(c);
    return (level & 1) ? -s : s;
  }
};

inline int grid_count(int n) { return 1 << n; }  // shifted family size

// Dyadic (possibly shifted, possibly dilated) cube.  Side before dilation is
// 2^-level; `dilation` is a concentric power-of-two factor.
struct Cube {
  int n = 1;
  int grid = 0;
  int level = 0;
  std::array<long long, kMaxDim> idx{};
  long long dilation = 1;

  Box box() const;
  double side() const;
  std::string str() const;
};

enum class CubeRelation { disjoint, equal, contains, contained };

std::vector<Cube> children(const Cube& q, int max_level);
Cube parent(const Cube& q);
Cube dilate(const Cube& q, int m);  // factor 2^m, m >= 0
std::vector<Cube> descendants(const Cube& q, int depth, int max_level);
Cube cube_from_point(int n, int grid, int level, const Point& p);
CubeRelation relation(const Cube& a, const Cube& b);  // same grid required

struct CoverResult {
  Cube cover;
  double ratio = 0.0;  // cover side / target max side
};

// Smallest shifted-family cube containing `target`, side at most 6 times the
// target side.  `target` must sit inside `ambient` with margin 6 * side.
CoverResult shifted_cover(const Box& target, const Box& ambient);

}  // namespace sqlab

#endif
