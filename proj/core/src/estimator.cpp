#include "sqlab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sqlab {
namespace {

// mt19937_64 output is pinned by the standard; the mappings below avoid
// std::uniform_*_distribution so streams are identical across libraries.
struct Rng {
  std::mt19937_64 e;
  explicit Rng(std::uint64_t seed) : e(seed) {}
  double u01() { return static_cast<double>(e() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * u01(); }
  long long below(long long m) { return static_cast<long long>(e() % static_cast<std::uint64_t>(m)); }
};

// Uniform dyadic cube at the given level, confined to the middle quarter of
// the box when central is set.
Cube random_cube(Rng& rng, int n, int J, int level, bool central) {
  const long long lanes = 1LL << (level + J + 1);
  const long long count = central ? lanes / 4 : lanes;
  const long long base = central ? -lanes / 8 : -lanes / 2;
  if (count < 1) throw EstimatorError("cube level too coarse for the requested region");
  Cube q;
  q.n = n;
  q.level = level;
  for (int c = 0; c < n; ++c) q.idx[c] = base + rng.below(count);
  return q;
}

void add_on_cube(Signal& f, const Cube& q, double value) {
  const CellRange r = cube_cells(f, q);
  for (long long iy = r.y0; iy < r.y1; ++iy)
    for (long long ix = r.x0; ix < r.x1; ++ix) f.at(ix, iy) += value;
}

}  // namespace

Signal random_signal(int n, int J, int K, std::uint64_t seed, int pieces, bool central,
                     bool nonneg) {
  Signal f(n, J, K);
  Rng rng(seed);
  const int lo = std::min(K, central ? 3 - J : 2 - J);
  const int hi = std::min(K, lo + 5);
  for (int i = 0; i < pieces; ++i) {
    const int level = lo + static_cast<int>(rng.below(hi - lo + 1));
    const Cube q = random_cube(rng, n, J, level, central);
    const double v = nonneg ? rng.uniform(0.25, 1.0) : rng.uniform(-1.0, 1.0);
    add_on_cube(f, q, v);
  }
  if (std::all_of(f.v.begin(), f.v.end(), [](double x) { return x == 0.0; }))
    f.at(f.side_cells() / 2, n == 2 ? f.side_cells() / 2 : 0) = 1.0;
  return f;
}

Weight random_weight(int n, int J, int K, std::uint64_t seed, double spread) {
  if (!(spread > 1.0)) throw EstimatorError("weight spread must exceed 1");
  Signal w(n, J, K);
  std::fill(w.v.begin(), w.v.end(), 1.0);
  Rng rng(seed);
  const int lo = std::min(K, 1 - J);
  const int hi = std::min(K, lo + 5);
  for (int i = 0; i < 16; ++i) {
    const int level = lo + static_cast<int>(rng.below(hi - lo + 1));
    const Cube q = random_cube(rng, n, J, level, false);
    const double factor = rng.uniform(0.5, 2.0);
    const CellRange r = cube_cells(w, q);
    for (long long iy = r.y0; iy < r.y1; ++iy)
      for (long long ix = r.x0; ix < r.x1; ++ix) w.at(ix, iy) *= factor;
  }
  for (double& x : w.v) x = std::clamp(x, 1.0 / spread, spread);
  return Weight::from_signal(std::move(w));
}

std::vector<unsigned char> random_cell_set(int J, int K, std::uint64_t seed, int pieces,
                                           double fill) {
  Signal probe(1, J, K);
  const long long N = probe.side_cells();
  std::vector<unsigned char> mask(static_cast<std::size_t>(N), 0);
  Rng rng(seed);
  const int lo = std::min(K, 2 - J);
  const int hi = std::min(K, lo + 5);
  long long marked = 0;
  for (int i = 0; i < pieces && marked < static_cast<long long>(fill * static_cast<double>(N));
       ++i) {
    const int level = lo + static_cast<int>(rng.below(hi - lo + 1));
    const Cube q = random_cube(rng, 1, J, level, false);
    const CellRange r = cube_cells(probe, q);
    for (long long ix = r.x0; ix < r.x1; ++ix) {
      marked += mask[static_cast<std::size_t>(ix)] ? 0 : 1;
      mask[static_cast<std::size_t>(ix)] = 1;
    }
  }
  return mask;
}

SparseFamily random_family(const Cube& root, int K, std::uint64_t seed, int generations) {
  SparseFamily S;
  S.root = root;
  S.origin = FamilyOrigin::synthetic;
  Rng rng(seed);
  std::vector<Cube> cur{root};
  std::vector<std::vector<Cube>> gens;
  for (int g = 0; g < generations && !cur.empty(); ++g) {
    std::vector<Cube> next;
    for (const Cube& q : cur) {
      if (q.level + 2 > K) continue;
      std::vector<Cube> grand;
      for (const Cube& c : children(q, K))
        for (const Cube& gc : children(c, K)) grand.push_back(gc);
      // keep at most half of the grandchildren: the packing condition holds
      // by construction
      const long long half = static_cast<long long>(grand.size()) / 2;
      const long long take = 1 + rng.below(half);
      for (long long i = 0; i < take; ++i) {
        const long long j = i + rng.below(static_cast<long long>(grand.size()) - i);
        std::swap(grand[static_cast<std::size_t>(i)], grand[static_cast<std::size_t>(j)]);
      }
      grand.resize(static_cast<std::size_t>(take));
      std::sort(grand.begin(), grand.end(), [](const Cube& a, const Cube& b) {
        return a.idx[0] != b.idx[0] ? a.idx[0] < b.idx[0] : a.idx[1] < b.idx[1];
      });
      next.insert(next.end(), grand.begin(), grand.end());
    }
    if (next.empty()) break;
    gens.push_back(std::move(next));
    cur = gens.back();
  }
  S.levels.push_back({root});
  for (auto& g : gens) S.levels.push_back(std::move(g));
  return S;
}

SparseFamily tower_family(const Cube& root, int K) {
  SparseFamily S;
  S.root = root;
  S.origin = FamilyOrigin::synthetic;
  S.levels.push_back({root});
  Cube q = root;
  while (q.level < K) {
    ++q.level;
    for (int c = 0; c < q.n; ++c) q.idx[c] <<= 1;
    S.levels.push_back({q});
  }
  return S;
}

namespace {

// |x|^{(1-delta)(p-1)} cell-averaged from the primitive |x|^{1+e}/(1+e).
Signal power_weight_signal(int J, int K, double p, double delta) {
  if (!(delta > 0.0) || delta > 1.0) throw EstimatorError("delta outside (0, 1]");
  if (!(p > 1.0)) throw EstimatorError("power weight needs p > 1");
  Signal w(1, J, K);
  const double e = (1.0 - delta) * (p - 1.0);
  if (e == 0.0) {
    std::fill(w.v.begin(), w.v.end(), 1.0);
    return w;
  }
  const long long N = w.side_cells();
  const double h = w.h();
  const double c = 1.0 + e;
  for (long long i = 0; i < N; ++i) {
    const double a = (static_cast<double>(i) - static_cast<double>(N / 2)) * h;
    const double b = a + h;
    double mass;
    if (a >= 0.0)
      mass = std::pow(b, c) - std::pow(a, c);
    else if (b <= 0.0)
      mass = std::pow(-a, c) - std::pow(-b, c);
    else
      mass = std::pow(-a, c) + std::pow(b, c);
    w.at(i) = mass / (c * h);
  }
  return w;
}

}  // namespace

Signal power_signal(int J, int K, double delta) {
  if (!(delta > 0.0) || delta > 1.0) throw EstimatorError("delta outside (0, 1]");
  Signal f(1, J, K);
  const long long N = f.side_cells();
  const double h = f.h();
  const long long cells = 1LL << (J - 1 + K);  // support (0, 2^{J-1}]
  for (long long i = 0; i < cells; ++i) {
    const double a = static_cast<double>(i) * h;
    const double b = a + h;
    f.at(N / 2 + i) =
        delta == 1.0 ? 1.0 : (std::pow(b, delta) - std::pow(a, delta)) / (delta * h);
  }
  return f;
}

PowerWeight power_weight(int J, int K, double p, double delta, ApScope scope) {
  PowerWeight out;
  out.delta = delta;
  out.w = Weight::from_signal(power_weight_signal(J, K, p, delta));
  out.apchar = ap_char(out.w, p, scope).value;
  return out;
}

std::vector<TestPair> make_family(const FamilySpec& spec) {
  if (spec.n != 1 && spec.n != 2) throw EstimatorError("dimension must be 1 or 2");
  if (!spec.deltas.empty() && spec.n != 1)
    throw EstimatorError("power-law members are 1-D");
  std::vector<TestPair> fam;
  for (int l = 2; l < 2 + spec.indicator_levels && l <= spec.K; ++l) {
    Cube q;
    q.n = spec.n;
    q.level = l;
    Signal f(spec.n, spec.J, spec.K);
    add_on_cube(f, q, 1.0);
    fam.push_back({"ind" + std::to_string(l), std::move(f), std::nullopt});
  }
  if (spec.spike) {
    Signal f(spec.n, spec.J, spec.K);
    f.at(f.side_cells() / 2, spec.n == 2 ? f.side_cells() / 2 : 0) = 1.0;
    fam.push_back({"spike", std::move(f), std::nullopt});
  }
  for (int i = 0; i < spec.random_members; ++i)
    fam.push_back({"rand" + std::to_string(i),
                   random_signal(spec.n, spec.J, spec.K, spec.seed + static_cast<std::uint64_t>(i)),
                   std::nullopt});
  for (double d : spec.deltas) {
    TestPair tp;
    tp.label = "power" + std::to_string(d);
    tp.f = power_signal(spec.J, spec.K, d);
    tp.w = Weight::from_signal(power_weight_signal(spec.J, spec.K, spec.p, d));
    fam.push_back(std::move(tp));
  }
  if (fam.empty()) throw EstimatorError("family spec generated no members");
  return fam;
}

OpId op_id_from(const std::string& name) {
  if (name == "cone") return OpId::cone;
  if (name == "smooth") return OpId::smooth;
  if (name == "gstar") return OpId::gstar;
  if (name == "maximal") return OpId::maximal;
  if (name == "sparse") return OpId::sparse_dilated;
  if (name == "aggregate") return OpId::aggregate;
  throw EstimatorError("unknown operator id: " + name);
}

std::string op_name(OpId id) {
  switch (id) {
    case OpId::cone: return "cone";
    case OpId::smooth: return "smooth";
    case OpId::gstar: return "gstar";
    case OpId::maximal: return "maximal";
    case OpId::sparse_dilated: return "sparse";
    case OpId::aggregate: return "aggregate";
  }
  return "?";
}

namespace {

SparseFamily default_tower(const Signal& f) {
  Cube root;
  root.n = f.n;
  root.level = 1 - f.J;  // [0, 2^{J-1})^n
  return tower_family(root, f.K);
}

}  // namespace

Signal apply_op(const OpSpec& op, const Signal& f) {
  switch (op.id) {
    case OpId::maximal:
      return hl_maximal(f);
    case OpId::sparse_dilated: {
      const SparseFamily S = op.family ? *op.family : default_tower(f);
      return sparse_square(S, f, op.m);
    }
    case OpId::aggregate: {
      const SparseFamily S = op.family ? *op.family : default_tower(f);
      return calT(S, f, op.decay, op.m_max).value;
    }
    default: {
      const TGrid tg = op.tg.L > 0 ? op.tg : TGrid::standard(f);
      const Field F = conv_field(f, op.kernel, tg);
      if (op.id == OpId::cone) return cone_square(F, op.alpha);
      if (op.id == OpId::smooth) return smooth_square(F, op.bump, op.alpha);
      return gstar(F, op.mu);
    }
  }
}

OpNormResult opnorm_lower(const OpSpec& op, double p, const Weight* w,
                          const std::vector<TestPair>& family, bool weak) {
  if (family.empty()) throw EstimatorError("empty test family");
  if (!(p >= 1.0)) throw EstimatorError("p must be >= 1");
  OpNormResult out;
  for (const TestPair& tp : family) {
    const Weight* weff = w ? w : (tp.w ? &*tp.w : nullptr);
    const double den = lp_norm(tp.f, p, weff);
    if (!(den > 0.0)) {
      ++out.skipped;
      continue;
    }
    const Signal g = apply_op(op, tp.f);
    const double num = weak ? weak_quasinorm(g, p, weff) : lp_norm(g, p, weff);
    const double ratio = num / den;
    out.members.push_back({tp.label, ratio});
    if (ratio > out.value) {
      out.value = ratio;
      out.best = tp.label;
    }
  }
  if (out.members.empty()) throw EstimatorError("every family member had zero norm");
  return out;
}

FitResult fit_exponent(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 3) throw EstimatorError("exponent fit needs at least 3 points");
  for (const auto& [x, y] : pts)
    if (!(x > 0.0) || !(y > 0.0))
      throw EstimatorError("exponent fit needs positive coordinates");
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (pts[i].first == pts[j].first)
        throw EstimatorError("exponent fit needs distinct abscissae");
  const double n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (const auto& [x, y] : pts) {
    const double r = std::log(y) - (fit.intercept + fit.slope * std::log(x));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.points = static_cast<int>(pts.size());
  return fit;
}

namespace {

void fill_meta(ScanResult& res, const FamilySpec& fam, const KernelSpec& k) {
  res.seed = fam.seed;
  res.n = fam.n;
  res.J = fam.J;
  res.K = fam.K;
  res.kernel = kernel_name(k.id);
}

FitResult fit_points(const ScanResult& res, const char* what) {
  std::vector<std::pair<double, double>> pts;
  for (const ScanPoint& pt : res.points) pts.emplace_back(pt.x, pt.measured);
  if (pts.size() < 3)
    throw EstimatorError(std::string("degenerate ") + what +
                         " fit: fewer than 3 usable points");
  return fit_exponent(pts);
}

}  // namespace

ScanResult scan_aperture(double p, const Weight* w, const KernelSpec& k,
                         const std::vector<double>& alphas, const FamilySpec& fam,
                         const TGrid* tg) {
  if (alphas.size() < 3) throw EstimatorError("aperture scan needs at least 3 apertures");
  const std::vector<TestPair> family = make_family(fam);
  struct Prep {
    const TestPair* tp;
    const Weight* w;
    double den;
    Field F;
  };
  std::vector<Prep> preps;
  ScanResult res;
  res.id = "aperture";
  res.x_name = "alpha";
  fill_meta(res, fam, k);
  for (const TestPair& tp : family) {
    const Weight* weff = w ? w : (tp.w ? &*tp.w : nullptr);
    const double den = lp_norm(tp.f, p, weff);
    if (!(den > 0.0)) {
      res.note += tp.label + " skipped (zero norm); ";
      continue;
    }
    preps.push_back({&tp, weff, den,
                     conv_field(tp.f, k, tg ? *tg : TGrid::standard(tp.f))});
  }
  if (preps.empty()) throw EstimatorError("every family member had zero norm");
  std::vector<double> as = alphas;
  std::sort(as.begin(), as.end());
  for (double a : as) {
    if (!(a > 0.0)) throw EstimatorError("apertures must be positive");
    double best = 0.0;
    std::string who;
    for (const Prep& pr : preps) {
      const double ratio = lp_norm(cone_square(pr.F, a), p, pr.w) / pr.den;
      if (ratio > best) {
        best = ratio;
        who = pr.tp->label;
      }
    }
    if (best > 0.0)
      res.points.push_back({a, best, 1.0, who});
    else
      res.note += "alpha " + std::to_string(a) + " dropped (zero ratio); ";
  }
  res.fit = fit_points(res, "aperture");
  return res;
}

ScanResult scan_weight(double p, const KernelSpec& k, const std::vector<double>& deltas,
                       const OpSpec& op_in, const FamilySpec& fam) {
  if (deltas.size() < 3) throw EstimatorError("weight scan needs at least 3 deltas");
  if (fam.n != 1) throw EstimatorError("power-weight scans are 1-D");
  ScanResult res;
  res.id = "weight-" + op_name(op_in.id);
  res.x_name = "apchar";
  fill_meta(res, fam, k);
  for (double d : deltas) {
    const PowerWeight pw = power_weight(fam.J, fam.K, p, d);
    FamilySpec fs = fam;
    fs.deltas = {d};
    fs.p = p;
    OpSpec op = op_in;
    op.kernel = k;
    const OpNormResult r = opnorm_lower(op, p, &pw.w, make_family(fs));
    if (r.value > 0.0)
      res.points.push_back({pw.apchar, r.value, pw.apchar, r.best});
    else
      res.note += "delta " + std::to_string(d) + " dropped (zero ratio); ";
  }
  std::sort(res.points.begin(), res.points.end(),
            [](const ScanPoint& a, const ScanPoint& b) { return a.x < b.x; });
  res.fit = fit_points(res, "weight");
  return res;
}

ScanResult scan_shift_growth(const SparseFamily& S, const Signal& f, const Weight& w,
                             const std::vector<int>& ms) {
  if (ms.empty()) throw EstimatorError("empty dilation list");
  std::vector<int> sorted = ms;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.front() < 1)
    throw EstimatorError("shift growth scan needs m >= 1 (log m must exist)");
  if (S.size() > 0 && dilation_escapes(S, f, sorted.back()) > 0)
    throw EstimatorError("dilated cubes escape the box at m = " +
                         std::to_string(sorted.back()));
  ScanResult res;
  res.id = "shift-growth";
  res.x_name = "m";
  res.n = f.n;
  res.J = f.J;
  res.K = f.K;
  for (int m : sorted) {
    const double val = lp_norm(sparse_square(S, f, m), 3.0, &w);
    if (val > 0.0)
      res.points.push_back({static_cast<double>(m), val, 1.0, ""});
    else
      res.note += "m " + std::to_string(m) + " dropped (zero norm); ";
  }
  if (res.points.size() >= 3) {
    std::vector<std::pair<double, double>> pts;
    for (const ScanPoint& pt : res.points) pts.emplace_back(pt.x, pt.measured);
    res.fit = fit_exponent(pts);
  } else {
    res.note += "no fit; ";
  }
  return res;
}

ScanResult scan_weak(double p, const KernelSpec& k, const std::vector<double>& xs,
                     WeakMode mode, const FamilySpec& fam, const TGrid* tg) {
  if (xs.size() < 3) throw EstimatorError("weak scan needs at least 3 points");
  ScanResult res;
  fill_meta(res, fam, k);
  if (mode == WeakMode::aperture) {
    if (p != 1.0)
      throw EstimatorError("the aperture weak scan is the L^1 endpoint; p must be 1");
    res.id = "weak-aperture";
    res.x_name = "alpha";
    const std::vector<TestPair> family = make_family(fam);
    struct Prep {
      const TestPair* tp;
      const Weight* w;
      double den;
      Field F;
    };
    std::vector<Prep> preps;
    for (const TestPair& tp : family) {
      const Weight* weff = tp.w ? &*tp.w : nullptr;
      const double den = lp_norm(tp.f, 1.0, weff);
      if (!(den > 0.0)) {
        res.note += tp.label + " skipped (zero norm); ";
        continue;
      }
      preps.push_back({&tp, weff, den,
                       conv_field(tp.f, k, tg ? *tg : TGrid::standard(tp.f))});
    }
    if (preps.empty()) throw EstimatorError("every family member had zero norm");
    std::vector<double> as = xs;
    std::sort(as.begin(), as.end());
    for (double a : as) {
      if (!(a > 0.0)) throw EstimatorError("apertures must be positive");
      double best = 0.0;
      std::string who;
      for (const Prep& pr : preps) {
        const double ratio = weak_quasinorm(cone_square(pr.F, a), 1.0, pr.w) / pr.den;
        if (ratio > best) {
          best = ratio;
          who = pr.tp->label;
        }
      }
      if (best > 0.0)
        res.points.push_back({a, best, 1.0, who});
      else
        res.note += "alpha " + std::to_string(a) + " dropped (zero ratio); ";
    }
    res.fit = fit_points(res, "weak aperture");
    return res;
  }
  if (!(p > 2.0 && p < 3.0))
    throw EstimatorError("the weighted weak scan needs 2 < p < 3");
  if (fam.n != 1) throw EstimatorError("power-weight scans are 1-D");
  res.id = "weak-weighted";
  res.x_name = "apchar";
  for (double d : xs) {
    const PowerWeight pw = power_weight(fam.J, fam.K, p, d);
    FamilySpec fs = fam;
    fs.deltas = {d};
    fs.p = p;
    OpSpec op;
    op.id = OpId::cone;
    op.kernel = k;
    if (tg) op.tg = *tg;
    const OpNormResult r = opnorm_lower(op, p, &pw.w, make_family(fs), /*weak=*/true);
    if (r.value > 0.0)
      res.points.push_back({pw.apchar, r.value, pw.apchar, r.best});
    else
      res.note += "delta " + std::to_string(d) + " dropped (zero ratio); ";
  }
  std::sort(res.points.begin(), res.points.end(),
            [](const ScanPoint& a, const ScanPoint& b) { return a.x < b.x; });
  res.fit = fit_points(res, "weak weighted");
  return res;
}

}  // namespace sqlab
