#include "sqlab/cone.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "fft_conv.hpp"

namespace sqlab {
namespace {

// Largest cell offset d in [0, cap] with d*h < radius, or -1. The products
// d*h are exact (integer mantissa scaled by a power of two), so the two
// adjustment loops pin the strict boundary without rounding ambiguity.
long long window_radius(double radius, double h, long long cap) {
  if (!(radius > 0.0)) return -1;
  double q = std::min(radius / h, static_cast<double>(cap) + 1.0);
  long long r = static_cast<long long>(std::ceil(q)) - 1;
  r = std::min(r, cap);
  while (r + 1 <= cap && static_cast<double>(r + 1) * h < radius) ++r;
  while (r >= 0 && static_cast<double>(r) * h >= radius) --r;
  return r;
}

double dist_1d(long long ad, double h) { return static_cast<double>(ad) * h; }

// sqrt of the exact integer adx^2 + ady^2 is correctly rounded, and the
// scaling by h (a power of two) is exact.
double dist_2d(long long adx, long long ady, double h) {
  return std::sqrt(static_cast<double>(adx * adx + ady * ady)) * h;
}

// rx[ady] = largest dx with dist_2d(dx, ady) < radius; nonincreasing in ady.
void row_extents(double radius, double h, long long rb, std::vector<long long>& rx) {
  rx.assign(static_cast<std::size_t>(rb) + 1, -1);
  long long cur = rb;
  for (long long ady = 0; ady <= rb; ++ady) {
    while (cur >= 0 && !(dist_2d(cur, ady, h) < radius)) --cur;
    rx[static_cast<std::size_t>(ady)] = cur;
  }
}

void squares_of(const double* lv, std::size_t count, std::vector<double>& vsq) {
  vsq.resize(count);
  for (std::size_t i = 0; i < count; ++i) vsq[i] = lv[i] * lv[i];
}

// Shared accumulation pattern for cone/smooth/gstar: the window sums run
// over ascending cell index (rows ascending, cells ascending within a row),
// so enlarging a window only appends or interleaves nonnegative terms into
// the same rounding order. That makes the pointwise aperture comparisons
// exact statements about floating-point results, not just about the limits.
void accumulate_window_1d(std::vector<double>& sq, const std::vector<double>& vsq,
                          long long N, long long r, double w) {
  if (r >= N - 1) {
    double full = 0.0;
    for (long long i = 0; i < N; ++i) full += vsq[static_cast<std::size_t>(i)];
    const double add = w * full;
    for (long long j = 0; j < N; ++j) sq[static_cast<std::size_t>(j)] += add;
    return;
  }
#pragma omp parallel for schedule(static)
  for (long long j = 0; j < N; ++j) {
    const long long i0 = std::max(0LL, j - r), i1 = std::min(N - 1, j + r);
    double acc = 0.0;
    for (long long i = i0; i <= i1; ++i) acc += vsq[static_cast<std::size_t>(i)];
    sq[static_cast<std::size_t>(j)] += w * acc;
  }
}

void accumulate_window_2d(std::vector<double>& sq, const std::vector<double>& vsq,
                          long long N, const std::vector<long long>& rx,
                          long long rb, double w) {
#pragma omp parallel for schedule(static)
  for (long long jy = 0; jy < N; ++jy) {
    for (long long jx = 0; jx < N; ++jx) {
      double acc = 0.0;
      const long long y0 = std::max(0LL, jy - rb), y1 = std::min(N - 1, jy + rb);
      for (long long iy = y0; iy <= y1; ++iy) {
        const long long ext = rx[static_cast<std::size_t>(std::llabs(iy - jy))];
        if (ext < 0) continue;
        const long long i0 = std::max(0LL, jx - ext), i1 = std::min(N - 1, jx + ext);
        const double* row = vsq.data() + static_cast<std::size_t>(iy * N);
        for (long long ix = i0; ix <= i1; ++ix) acc += row[static_cast<std::size_t>(ix)];
      }
      sq[static_cast<std::size_t>(jy * N + jx)] += w * acc;
    }
  }
}

void accumulate_full_2d(std::vector<double>& sq, const std::vector<double>& vsq,
                        double w) {
  double full = 0.0;
  for (double x : vsq) full += x;
  const double add = w * full;
  for (double& s : sq) s += add;
}

void accumulate_weighted_1d(std::vector<double>& sq, const std::vector<double>& vsq,
                            long long N, long long rw, const std::vector<double>& wv,
                            double w) {
#pragma omp parallel for schedule(static)
  for (long long j = 0; j < N; ++j) {
    const long long i0 = std::max(0LL, j - rw), i1 = std::min(N - 1, j + rw);
    double acc = 0.0;
    for (long long i = i0; i <= i1; ++i)
      acc += wv[static_cast<std::size_t>(std::llabs(j - i))] * vsq[static_cast<std::size_t>(i)];
    sq[static_cast<std::size_t>(j)] += w * acc;
  }
}

void accumulate_weighted_2d(std::vector<double>& sq, const std::vector<double>& vsq,
                            long long N, long long rw, const std::vector<double>& wt,
                            double w) {
  const long long stride = rw + 1;
#pragma omp parallel for schedule(static)
  for (long long jy = 0; jy < N; ++jy) {
    for (long long jx = 0; jx < N; ++jx) {
      double acc = 0.0;
      const long long y0 = std::max(0LL, jy - rw), y1 = std::min(N - 1, jy + rw);
      for (long long iy = y0; iy <= y1; ++iy) {
        const double* wrow = wt.data() + static_cast<std::size_t>(std::llabs(iy - jy) * stride);
        const double* row = vsq.data() + static_cast<std::size_t>(iy * N);
        const long long i0 = std::max(0LL, jx - rw), i1 = std::min(N - 1, jx + rw);
        for (long long ix = i0; ix <= i1; ++ix)
          acc += wrow[static_cast<std::size_t>(std::llabs(jx - ix))] * row[static_cast<std::size_t>(ix)];
      }
      sq[static_cast<std::size_t>(jy * N + jx)] += w * acc;
    }
  }
}

Signal sqrt_of(Signal e) {
  for (double& x : e.v) x = std::sqrt(std::max(x, 0.0));
  return e;
}

}  // namespace

Signal cone_energy(const Field& F, double alpha) {
  if (!(alpha > 0.0)) throw FieldError("aperture must be positive");
  Signal out(F.n, F.J, F.K);
  const long long N = F.side_cells();
  const double h = F.h();
  std::vector<double> vsq;
  std::vector<long long> rx;
  for (int l = 0; l < F.tg.L; ++l) {
    const double radius = alpha * F.tg.t(l);
    const long long r = window_radius(radius, h, N);
    if (r < 0) continue;
    const double w = F.level_weight(l);
    squares_of(F.level(l), F.cells_per_level(), vsq);
    if (F.n == 1) {
      accumulate_window_1d(out.v, vsq, N, r, w);
    } else if (dist_2d(N - 1, N - 1, h) < radius) {
      accumulate_full_2d(out.v, vsq, w);
    } else {
      const long long rb = std::min(r, N - 1);
      row_extents(radius, h, rb, rx);
      accumulate_window_2d(out.v, vsq, N, rx, rb, w);
    }
  }
  return out;
}

Signal cone_square(const Field& F, double alpha) { return sqrt_of(cone_energy(F, alpha)); }

double masked_cone_integral(const Field& F, double alpha,
                            const std::vector<unsigned char>& excluded) {
  if (!(alpha > 0.0)) throw FieldError("aperture must be positive");
  if (F.n != 1) throw FieldError("masked cone integrals are 1-D only");
  const long long N = F.side_cells();
  if (excluded.size() != static_cast<std::size_t>(N))
    throw FieldError("mask size does not match the grid");
  // Exact prefix counts of the kept cells.
  std::vector<long long> kept(static_cast<std::size_t>(N) + 1, 0);
  for (long long j = 0; j < N; ++j)
    kept[static_cast<std::size_t>(j + 1)] =
        kept[static_cast<std::size_t>(j)] + (excluded[static_cast<std::size_t>(j)] ? 0 : 1);
  const double h = F.h();
  double total = 0.0;
  std::vector<double> vsq;
  // Swapping the cell and vertex sums: each field cell (i, l) contributes
  // |F|^2 w_l h once per kept vertex in its window. The (l, i) term order is
  // aperture-independent, so two apertures' totals compare term by term.
  for (int l = 0; l < F.tg.L; ++l) {
    const double radius = alpha * F.tg.t(l);
    const long long r = window_radius(radius, h, N - 1);
    if (r < 0) continue;
    const double wh = F.level_weight(l) * h;
    squares_of(F.level(l), F.cells_per_level(), vsq);
    for (long long i = 0; i < N; ++i) {
      const long long j0 = std::max(0LL, i - r), j1 = std::min(N - 1, i + r);
      const double cnt = static_cast<double>(kept[static_cast<std::size_t>(j1 + 1)] -
                                             kept[static_cast<std::size_t>(j0)]);
      total += wh * vsq[static_cast<std::size_t>(i)] * cnt;
    }
  }
  return total;
}

Signal smooth_energy(const Field& F, const BumpSpec& bump, double alpha) {
  if (!(alpha > 0.0)) throw FieldError("aperture must be positive");
  Signal out(F.n, F.J, F.K);
  const long long N = F.side_cells();
  const double h = F.h();
  std::vector<double> vsq, wv;
  for (int l = 0; l < F.tg.L; ++l) {
    const double radius = alpha * F.tg.t(l);
    // support of bump(dist/radius) lies strictly inside dist < 2*radius,
    // and doubling is exact, so this window is the aperture-2alpha one
    const long long rw = std::min(window_radius(2.0 * radius, h, N), N - 1);
    if (rw < 0) continue;
    const double w = F.level_weight(l);
    squares_of(F.level(l), F.cells_per_level(), vsq);
    if (F.n == 1) {
      wv.resize(static_cast<std::size_t>(rw) + 1);
      for (long long d = 0; d <= rw; ++d)
        wv[static_cast<std::size_t>(d)] = bump.value(dist_1d(d, h) / radius);
      accumulate_weighted_1d(out.v, vsq, N, rw, wv, w);
    } else {
      wv.resize(static_cast<std::size_t>((rw + 1) * (rw + 1)));
      for (long long dy = 0; dy <= rw; ++dy)
        for (long long dx = 0; dx <= rw; ++dx)
          wv[static_cast<std::size_t>(dy * (rw + 1) + dx)] =
              bump.value(dist_2d(dx, dy, h) / radius);
      accumulate_weighted_2d(out.v, vsq, N, rw, wv, w);
    }
  }
  return out;
}

Signal smooth_square(const Field& F, const BumpSpec& bump, double alpha) {
  return sqrt_of(smooth_energy(F, bump, alpha));
}

Signal gstar_energy(const Field& F, double mu, GstarMethod method) {
  if (!(mu > 1.0)) throw FieldError("gstar needs mu > 1");
  if (method == GstarMethod::fft && F.n != 1)
    throw FieldError("gstar fft path supports n = 1 only");
  Signal out(F.n, F.J, F.K);
  const long long N = F.side_cells();
  const double h = F.h();
  const double mun = mu * F.n;
  const bool use_fft =
      F.n == 1 && (method == GstarMethod::fft ||
                   (method == GstarMethod::automatic && N >= 512));
  std::unique_ptr<detail::FftConv> fft;
  std::vector<double> vsq, wv, ker, row;
  if (use_fft) {
    fft = std::make_unique<detail::FftConv>(N);
    ker.resize(static_cast<std::size_t>(2 * N - 1));
    row.resize(static_cast<std::size_t>(N));
  }
  for (int l = 0; l < F.tg.L; ++l) {
    const double t = F.tg.t(l);
    const double w = F.level_weight(l);
    squares_of(F.level(l), F.cells_per_level(), vsq);
    if (F.n == 1) {
      wv.resize(static_cast<std::size_t>(N));
      for (long long d = 0; d < N; ++d)
        wv[static_cast<std::size_t>(d)] = std::pow(t / (t + dist_1d(d, h)), mun);
      if (use_fft) {
        for (long long d = -(N - 1); d <= N - 1; ++d)
          ker[static_cast<std::size_t>(N - 1 + d)] = wv[static_cast<std::size_t>(std::llabs(d))];
        fft->run(vsq.data(), ker.data(), N - 1, row.data());
        for (long long j = 0; j < N; ++j)
          out.v[static_cast<std::size_t>(j)] += w * row[static_cast<std::size_t>(j)];
      } else {
        accumulate_weighted_1d(out.v, vsq, N, N - 1, wv, w);
      }
    } else {
      wv.resize(static_cast<std::size_t>(N * N));
      for (long long dy = 0; dy < N; ++dy)
        for (long long dx = 0; dx < N; ++dx)
          wv[static_cast<std::size_t>(dy * N + dx)] =
              std::pow(t / (t + dist_2d(dx, dy, h)), mun);
      accumulate_weighted_2d(out.v, vsq, N, N - 1, wv, w);
    }
  }
  // correlation of nonnegative data: negatives can only be fft roundoff
  for (double& x : out.v) x = std::max(x, 0.0);
  return out;
}

Signal gstar(const Field& F, double mu, GstarMethod method) {
  return sqrt_of(gstar_energy(F, mu, method));
}

int gstar_required_annuli(const Field& F) {
  const long long N = F.side_cells();
  const double h = F.h();
  int K = 0;
  for (int l = 0; l < F.tg.L; ++l) {
    const double* lv = F.level(l);
    double dist = -1.0;
    if (F.n == 1) {
      long long lo = -1, hi = -1;
      for (long long i = 0; i < N; ++i)
        if (lv[static_cast<std::size_t>(i)] != 0.0) {
          if (lo < 0) lo = i;
          hi = i;
        }
      if (hi < 0) continue;
      dist = dist_1d(std::max(hi, N - 1 - lo), h);
    } else {
      long long xlo = N, xhi = -1, ylo = N, yhi = -1;
      for (long long iy = 0; iy < N; ++iy)
        for (long long ix = 0; ix < N; ++ix)
          if (lv[static_cast<std::size_t>(iy * N + ix)] != 0.0) {
            xlo = std::min(xlo, ix);
            xhi = std::max(xhi, ix);
            ylo = std::min(ylo, iy);
            yhi = std::max(yhi, iy);
          }
      if (xhi < 0) continue;
      dist = dist_2d(std::max(xhi, N - 1 - xlo), std::max(yhi, N - 1 - ylo), h);
    }
    // same comparison the window construction uses: inside means dist < radius
    while (K < 60 && !(dist < std::ldexp(1.0, K + 1) * F.tg.t(l))) ++K;
  }
  return K;
}

Signal gstar_cone_majorant(const Field& F, double mu, int annuli) {
  if (!(mu > 1.0)) throw FieldError("gstar needs mu > 1");
  const int need = gstar_required_annuli(F);
  if (annuli < 0)
    annuli = need;
  else if (annuli < need)
    throw CoverageError("cone majorant with " + std::to_string(annuli) +
                        " annuli leaves reachable field mass outside the widest cone (need " +
                        std::to_string(need) + ")");
  Signal out = cone_square(F, 1.0);
  for (int k = 0; k <= annuli; ++k) {
    const double c = std::pow(2.0, -0.5 * k * mu * F.n);
    const Signal sk = cone_square(F, std::ldexp(1.0, k + 1));
    for (std::size_t j = 0; j < out.v.size(); ++j) out.v[j] += c * sk.v[j];
  }
  return out;
}

double gstar_tail_bound(const Signal& f, const KernelSpec& k, const TGrid& tg) {
  KernelSpec ks = k;
  if (!(ks.c_decay > 0.0)) ks.c_decay = validate_kernel(ks).decay_const;
  // Off the box, |F(y,t)| <= c ||f||_1 t^{-n} (1 + d(y, box)/t)^{-(n+eps)}
  // and the weight is at most 1; integrate the square over the outside
  // region and all levels. For n = 2 the outside annulus at distance s has
  // perimeter at most P + 8s.
  const double l1 = integral(f, f.domain(), true);
  const double eps = ks.eps;
  double total = 0.0;
  for (int l = 0; l < tg.L; ++l) {
    const double t = tg.t(l);
    const double peak = ks.c_decay * l1 / std::pow(t, f.n);
    double geo;
    if (f.n == 1) {
      geo = 2.0 * t / (1.0 + 2.0 * eps);
    } else {
      const double P = 4.0 * f.domain().side(0);
      geo = P * t / (3.0 + 2.0 * eps) +
            8.0 * t * t / ((3.0 + 2.0 * eps) * (2.0 + 2.0 * eps));
    }
    total += tg.dlog() / std::pow(t, f.n) * peak * peak * geo;
  }
  return total;
}

}  // namespace sqlab
