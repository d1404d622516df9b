#include "sqlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sqlab {

KernelId kernel_id_from(const std::string& name) {
  if (name == "haar") return KernelId::haar;
  if (name == "mexhat") return KernelId::mexhat;
  if (name == "boxcar") return KernelId::boxcar;
  throw KernelError("unknown kernel: " + name);
}

std::string kernel_name(KernelId id) {
  switch (id) {
    case KernelId::haar: return "haar";
    case KernelId::mexhat: return "mexhat";
    case KernelId::boxcar: return "boxcar";
  }
  return "?";
}

double KernelSpec::profile(double x) const {
  switch (id) {
    case KernelId::haar:
      if (x < 0.0 || x >= 1.0) return 0.0;
      return x < 0.5 ? 1.0 : -1.0;
    case KernelId::mexhat:
      return (1.0 - x * x) * std::exp(-0.5 * x * x);
    case KernelId::boxcar:
      return x >= 0.0 && x < 1.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

double KernelSpec::antiderivative(double z) const {
  switch (id) {
    case KernelId::haar:
      if (z <= 0.0 || z >= 1.0) return 0.0;
      return z < 0.5 ? z : 1.0 - z;
    case KernelId::mexhat:
      return z * std::exp(-0.5 * z * z);
    case KernelId::boxcar:
      return std::clamp(z, 0.0, 1.0);
  }
  return 0.0;
}

double KernelSpec::value(const double* x) const {
  double v = profile(x[0]);
  for (int c = 1; c < n; ++c) v *= profile(x[c]);
  return v;
}

double KernelSpec::support_radius() const {
  // mexhat's primitive underflows to exactly 0 past |z| ~ 39
  return id == KernelId::mexhat ? 40.0 : 1.0;
}

KernelSpec KernelSpec::make(KernelId id, int n) {
  if (n < 1 || n > 2) throw KernelError("kernel dimension must be 1 or 2");
  KernelSpec k;
  k.id = id;
  k.n = n;
  k.eps = 1.0;
  k.delta = k.eps < 1.0 ? k.eps : 0.75;
  return k;
}

namespace {

double glue(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

double bump_profile(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  double a = glue(2.0 - r), b = glue(r - 1.0);
  return a / (a + b);
}

}  // namespace

double BumpSpec::value(double r) const {
  if (sharp) return r < 1.0 ? 1.0 : 0.0;
  return bump_profile(r);
}

BumpSpec BumpSpec::standard() {
  BumpSpec b;
  const double dr = 1e-5;
  for (double r = 1.0; r < 2.0; r += 1e-3) {
    double s = std::fabs(bump_profile(r + dr) - bump_profile(r - dr)) / (2.0 * dr);
    b.lipschitz = std::max(b.lipschitz, s);
  }
  return b;
}

BumpSpec BumpSpec::unit_indicator() {
  BumpSpec b;
  b.sharp = true;
  return b;
}

namespace {

// Exact L^1 distance between psi(.+h) and psi for a piecewise-constant
// profile with the given breakpoints: the difference is constant between
// consecutive points of the merged breakpoint set.
double step_l1_shift(const KernelSpec& k, const std::vector<double>& breaks, double h) {
  std::vector<double> pts;
  for (double b : breaks) {
    pts.push_back(b);
    pts.push_back(b - h);
  }
  std::sort(pts.begin(), pts.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double len = pts[i + 1] - pts[i];
    if (len <= 0.0) continue;
    double mid = 0.5 * (pts[i] + pts[i + 1]);
    acc += len * std::fabs(k.profile(mid + h) - k.profile(mid));
  }
  return acc;
}

// Composite-midpoint quadrature of int |psi(.+h) - psi| for smooth profiles.
double smooth_l1_shift(const KernelSpec& k, double lo, double hi, double h, int cells) {
  double step = (hi - lo) / cells, acc = 0.0;
  for (int i = 0; i < cells; ++i) {
    double x = lo + (i + 0.5) * step;
    acc += std::fabs(k.profile(x + h) - k.profile(x));
  }
  return acc * step;
}

double l1_shift_1d(const KernelSpec& k, double h) {
  switch (k.id) {
    case KernelId::haar: return step_l1_shift(k, {0.0, 0.5, 1.0}, h);
    case KernelId::boxcar: return step_l1_shift(k, {0.0, 1.0}, h);
    case KernelId::mexhat: return smooth_l1_shift(k, -9.0, 9.0, h, 1 << 15);
  }
  return 0.0;
}

// 2-D tensor kernels: midpoint grid quadrature of int |psi(.+h) - psi|,
// on a dyadic grid so step-kernel breakpoints fall between sample points
// for dyadic shifts.
double l1_shift_2d(const KernelSpec& k, double hx, double hy) {
  double R = k.id == KernelId::mexhat ? 6.0 : 2.5;
  int per_unit = k.id == KernelId::mexhat ? 64 : 256;
  int m = static_cast<int>(2.0 * R) * per_unit;
  double step = 2.0 * R / m, acc = 0.0;
  for (int iy = 0; iy < m; ++iy) {
    double y = -R + (iy + 0.5) * step;
    double fy0 = k.profile(y), fy1 = k.profile(y + hy);
    for (int ix = 0; ix < m; ++ix) {
      double x = -R + (ix + 0.5) * step;
      acc += std::fabs(k.profile(x + hx) * fy1 - k.profile(x) * fy0);
    }
  }
  return acc * step * step;
}

}  // namespace

KernelReport validate_kernel(const KernelSpec& k, const ProbeSet& probes) {
  KernelReport rep;
  rep.mean_tol = 1e-9;

  // mean from the exact primitive (tensor mean is the 1-D mean to the n-th power)
  double R0 = k.support_radius() + 1.0;
  double mean1 = k.antiderivative(R0) - k.antiderivative(-R0);
  rep.mean = k.n == 1 ? mean1 : mean1 * mean1;

  // decay constant: sup |psi(x)| (1+|x|)^{n+eps} over the probes
  if (k.n == 1) {
    long long m = static_cast<long long>(2.0 * probes.radius * probes.count);
    for (long long i = 0; i <= m; ++i) {
      double x = -probes.radius + 2.0 * probes.radius * static_cast<double>(i) / m;
      double v = std::fabs(k.profile(x)) * std::pow(1.0 + std::fabs(x), k.n + k.eps);
      rep.decay_const = std::max(rep.decay_const, v);
    }
  } else {
    int m = 2048;
    for (int iy = 0; iy <= m; ++iy) {
      double y = -probes.radius + 2.0 * probes.radius * iy / m;
      for (int ix = 0; ix <= m; ++ix) {
        double x = -probes.radius + 2.0 * probes.radius * ix / m;
        double p[2] = {x, y};
        double v = std::fabs(k.value(p)) *
                   std::pow(1.0 + std::hypot(x, y), k.n + k.eps);
        rep.decay_const = std::max(rep.decay_const, v);
      }
    }
  }

  // smoothness constant: sup over probe shifts of int|psi(.+h)-psi| / |h|^eps
  if (k.n == 1) {
    for (int j = 0; j <= 10; ++j) {
      double h = std::ldexp(1.0, -j);
      rep.smooth_const = std::max(rep.smooth_const, l1_shift_1d(k, h) / std::pow(h, k.eps));
    }
    for (double h : {1.5, 3.0})
      rep.smooth_const = std::max(rep.smooth_const, l1_shift_1d(k, h) / std::pow(h, k.eps));
  } else {
    for (int j = 0; j <= 8; ++j) {
      double h = std::ldexp(1.0, -j);
      double axis = l1_shift_2d(k, h, 0.0);
      double diag = l1_shift_2d(k, h * M_SQRT1_2, h * M_SQRT1_2);
      rep.smooth_const =
          std::max(rep.smooth_const, std::max(axis, diag) / std::pow(h, k.eps));
    }
  }

  rep.eps_ok = std::isfinite(rep.decay_const) && std::isfinite(rep.smooth_const) &&
               rep.decay_const < 1e6 && rep.smooth_const < 1e6;
  bool mean_ok = std::fabs(rep.mean) <= rep.mean_tol;
  rep.passed = rep.eps_ok && mean_ok;
  if (!mean_ok)
    rep.detail = "nonzero mean " + std::to_string(rep.mean);
  else if (!rep.eps_ok)
    rep.detail = "no finite constant fits the bounds";
  return rep;
}

}  // namespace sqlab
