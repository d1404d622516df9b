#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sqlab/kernel.hpp"
#include "sqlab/signal.hpp"

namespace sqlab {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Geometric scale grid t_l = t_min * ratio^l, l = 0..L-1.
struct TGrid {
  double t_min = 0.0;
  double ratio = 0.0;
  int L = 0;

  double t(int l) const;
  double dlog() const;  // ln ratio = Delta t_l / t_l of the quadrature

  // Spans [2h, box side] with the given number of levels.
  static TGrid spanning(const Signal& f, int levels);
  // Spans [2h, box side] at the default density of 8 levels per octave.
  static TGrid standard(const Signal& f);
};

// Samples of a function on the upper half-space, on the spatial grid of a
// Signal crossed with a TGrid; stored level-major.
struct Field {
  int n = 1, J = -1, K = 12;
  TGrid tg;
  std::vector<double> v;

  Field(int n_, int J_, int K_, TGrid tg_);

  long long side_cells() const { return 1LL << (J + 1 + K); }
  std::size_t cells_per_level() const;
  double h() const;
  bool same_grid(const Signal& f) const { return f.n == n && f.J == J && f.K == K; }

  double& at(int l, long long ix, long long iy = 0);
  double at(int l, long long ix, long long iy = 0) const;
  double* level(int l);
  const double* level(int l) const;

  // Per-cell weight of the dy dt / t^{n+1} quadrature at level l.
  double level_weight(int l) const;
};

enum class ConvMethod { automatic, direct, fft };

// F(y, t_l) = (f * psi_{t_l})(y) with f piecewise constant: cell
// contributions are exact primitives of the kernel, so direct summation is
// exact quadrature and the fft path must agree to rounding.
Field conv_field(const Signal& f, const KernelSpec& k, const TGrid& tg,
                 ConvMethod method = ConvMethod::automatic);

}  // namespace sqlab
