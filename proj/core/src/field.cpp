#include "sqlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "fft_conv.hpp"

namespace sqlab {

double TGrid::t(int l) const { return t_min * std::pow(ratio, l); }
double TGrid::dlog() const { return std::log(ratio); }

TGrid TGrid::spanning(const Signal& f, int levels) {
  if (levels < 2) throw FieldError("t-grid needs at least 2 levels");
  TGrid tg;
  tg.t_min = 2.0 * f.h();
  tg.L = levels;
  double t_max = f.domain().side(0);
  tg.ratio = std::pow(t_max / tg.t_min, 1.0 / (levels - 1));
  if (!(tg.ratio > 1.0)) throw FieldError("degenerate t-grid span");
  return tg;
}

TGrid TGrid::standard(const Signal& f) {
  double octaves = std::log2(f.domain().side(0) / (2.0 * f.h()));
  int levels = 1 + static_cast<int>(std::lround(octaves * 8));
  TGrid tg;
  tg.t_min = 2.0 * f.h();
  tg.ratio = std::pow(2.0, 1.0 / 8.0);
  tg.L = levels;
  return tg;
}

Field::Field(int n_, int J_, int K_, TGrid tg_) : n(n_), J(J_), K(K_), tg(tg_) {
  if (n < 1 || n > 2) throw FieldError("field dimension must be 1 or 2");
  if (!(tg.t_min > 0.0) || !(tg.ratio > 1.0) || tg.L < 1)
    throw FieldError("invalid t-grid");
  v.assign(cells_per_level() * static_cast<std::size_t>(tg.L), 0.0);
}

std::size_t Field::cells_per_level() const {
  std::size_t N = std::size_t(1) << (J + 1 + K);
  return n == 1 ? N : N * N;
}

double Field::h() const { return std::ldexp(1.0, -K); }

double& Field::at(int l, long long ix, long long iy) {
  return v[static_cast<std::size_t>(l) * cells_per_level() +
           static_cast<std::size_t>(n == 1 ? ix : iy * side_cells() + ix)];
}

double Field::at(int l, long long ix, long long iy) const {
  return v[static_cast<std::size_t>(l) * cells_per_level() +
           static_cast<std::size_t>(n == 1 ? ix : iy * side_cells() + ix)];
}

double* Field::level(int l) { return v.data() + static_cast<std::size_t>(l) * cells_per_level(); }
const double* Field::level(int l) const {
  return v.data() + static_cast<std::size_t>(l) * cells_per_level();
}

double Field::level_weight(int l) const {
  return std::pow(h(), n) * tg.dlog() / std::pow(tg.t(l), n);
}

namespace {

// Exact cell weights g(d) = A(((d+1/2)h)/t) - A(((d-1/2)h)/t): the integral
// of psi_t over a cell at signed cell offset d. Stored for |d| <= dmax.
struct CellKernel {
  long long dmax = 0;
  std::vector<double> g;  // g[dmax + d]

  double at(long long d) const { return g[static_cast<std::size_t>(dmax + d)]; }
};

CellKernel cell_kernel(const KernelSpec& k, double h, double t, long long N) {
  CellKernel ck;
  double rad = k.support_radius();
  ck.dmax = std::min<long long>(N - 1, static_cast<long long>(std::ceil(rad * t / h + 0.5)));
  ck.g.resize(static_cast<std::size_t>(2 * ck.dmax + 1));
  for (long long d = -ck.dmax; d <= ck.dmax; ++d)
    ck.g[static_cast<std::size_t>(ck.dmax + d)] =
        k.antiderivative((d + 0.5) * h / t) - k.antiderivative((d - 0.5) * h / t);
  return ck;
}

void conv_direct_1d(const double* f, long long N, const CellKernel& ck, double* out) {
  for (long long j = 0; j < N; ++j) {
    double acc = 0.0;
    long long i0 = std::max(0LL, j - ck.dmax), i1 = std::min(N - 1, j + ck.dmax);
    for (long long i = i0; i <= i1; ++i) acc += f[i] * ck.at(j - i);
    out[j] = acc;
  }
}

}  // namespace

Field conv_field(const Signal& f, const KernelSpec& k, const TGrid& tg, ConvMethod method) {
  if (k.n != f.n) throw FieldError("kernel/signal dimension mismatch");
  if (tg.t_min < f.h())
    throw QuadratureError("t_min below the grid step: scales finer than one cell"
                          " cannot be trusted on piecewise-constant data");
  Field F(f.n, f.J, f.K, tg);
  long long N = f.side_cells();
  bool use_fft = method == ConvMethod::fft || (method == ConvMethod::automatic && N >= 512);
  std::unique_ptr<detail::FftConv> fft;
  if (use_fft) fft = std::make_unique<detail::FftConv>(N);

  std::vector<double> tmp(f.n == 2 ? f.v.size() : 0);
  for (int l = 0; l < tg.L; ++l) {
    CellKernel ck = cell_kernel(k, f.h(), tg.t(l), N);
    if (f.n == 1) {
      if (use_fft)
        fft->run(f.v.data(), ck.g.data(), ck.dmax, F.level(l));
      else
        conv_direct_1d(f.v.data(), N, ck, F.level(l));
      continue;
    }
    // tensor kernel: convolve rows, then columns
    for (long long y = 0; y < N; ++y) {
      const double* src = f.v.data() + static_cast<std::size_t>(y * N);
      double* dst = tmp.data() + static_cast<std::size_t>(y * N);
      if (use_fft)
        fft->run(src, ck.g.data(), ck.dmax, dst);
      else
        conv_direct_1d(src, N, ck, dst);
    }
    std::vector<double> col(static_cast<std::size_t>(N)), cout(static_cast<std::size_t>(N));
    for (long long x = 0; x < N; ++x) {
      for (long long y = 0; y < N; ++y) col[static_cast<std::size_t>(y)] = tmp[static_cast<std::size_t>(y * N + x)];
      if (use_fft)
        fft->run(col.data(), ck.g.data(), ck.dmax, cout.data());
      else
        conv_direct_1d(col.data(), N, ck, cout.data());
      for (long long y = 0; y < N; ++y) F.at(l, x, y) = cout[static_cast<std::size_t>(y)];
    }
  }
  return F;
}

}  // namespace sqlab
