#include "sqlab/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace sqlab {

std::size_t SparseFamily::size() const {
  std::size_t s = 0;
  for (const auto& g : levels) s += g.size();
  return s;
}

std::vector<Cube> SparseFamily::flatten() const {
  std::vector<Cube> out;
  out.reserve(size());
  for (const auto& g : levels) out.insert(out.end(), g.begin(), g.end());
  return out;
}

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

using Key = std::array<long long, 2>;

Key key_of(const Cube& q) { return {q.idx[0], q.n == 2 ? q.idx[1] : 0}; }

// dyadic ancestor `up` levels coarser; arithmetic shift floors negatives
Key ancestor_key(const Cube& q, int up) {
  return {q.idx[0] >> up, q.n == 2 ? (q.idx[1] >> up) : 0};
}

// One generation indexed by (level, idx) for nesting queries.
struct GenIndex {
  std::map<int, std::map<Key, std::size_t>> by_level;

  bool add(const Cube& q, std::size_t pos) {
    return by_level[q.level].emplace(key_of(q), pos).second;
  }
  // position of a generation cube containing q (equality included unless
  // strict), or npos
  std::size_t find_container(const Cube& q, bool strict = false) const {
    for (const auto& [lvl, keys] : by_level) {
      if (lvl > q.level || (strict && lvl == q.level)) break;
      auto it = keys.find(ancestor_key(q, q.level - lvl));
      if (it != keys.end()) return it->second;
    }
    return npos;
  }
  int count_containers(const Cube& q) const {
    int c = 0;
    for (const auto& [lvl, keys] : by_level) {
      if (lvl > q.level) break;
      if (keys.count(ancestor_key(q, q.level - lvl)) && ++c > 1) break;
    }
    return c;
  }
};

}  // namespace

SparseCertificate verify_sparse(const SparseFamily& S) {
  SparseCertificate cert;
  cert.level_disjoint = cert.nested = cert.packing = true;
  const int n = S.root.n;
  auto fail = [&cert](bool& flag, const std::string& what) {
    flag = false;
    if (cert.detail.empty()) cert.detail = what;
  };

  int lo_level = S.root.level, hi_level = S.root.level;
  bool shape_ok = true;
  for (const auto& gen : S.levels)
    for (const Cube& q : gen) {
      if (q.n != n || q.grid != S.root.grid || q.dilation != 1 || S.root.dilation != 1) {
        fail(cert.nested, "family cube off the root's grid: " + q.str());
        shape_ok = false;
        continue;
      }
      lo_level = std::min(lo_level, q.level);
      hi_level = std::max(hi_level, q.level);
      CubeRelation rel = relation(q, S.root);
      if (rel != CubeRelation::contained && rel != CubeRelation::equal)
        fail(cert.nested, "family cube outside the root: " + q.str());
    }
  if (!shape_ok || n * (hi_level - lo_level) > 62) {
    if (shape_ok) fail(cert.nested, "level span too wide for exact measures");
    cert.pass = false;
    return cert;
  }
  // exact cube measures in units of the finest level present
  auto meas = [&](const Cube& q) { return 1LL << (n * (hi_level - q.level)); };

  std::vector<GenIndex> idx(S.levels.size());
  for (std::size_t g = 0; g < S.levels.size(); ++g)
    for (std::size_t j = 0; j < S.levels[g].size(); ++j)
      if (!idx[g].add(S.levels[g][j], j))
        fail(cert.level_disjoint, "duplicate cube in one generation: " + S.levels[g][j].str());
  for (std::size_t g = 0; g < S.levels.size(); ++g)
    for (const Cube& q : S.levels[g])
      if (idx[g].count_containers(q) > 1)
        fail(cert.level_disjoint, "nested cubes in one generation: " + q.str());

  for (std::size_t g = 0; g + 1 < S.levels.size(); ++g) {
    const auto& cur = S.levels[g];
    const auto& nxt = S.levels[g + 1];
    std::vector<long long> inter(cur.size(), 0);    // |Omega_{g+1} ∩ Q|
    std::vector<long long> covered(nxt.size(), 0);  // coverage of R by gen g
    for (std::size_t r = 0; r < nxt.size(); ++r) {
      std::size_t c = idx[g].find_container(nxt[r]);
      if (c != npos) {
        inter[c] += meas(nxt[r]);
        covered[r] = meas(nxt[r]);
      }
    }
    for (std::size_t c = 0; c < cur.size(); ++c) {
      std::size_t r = idx[g + 1].find_container(cur[c], /*strict=*/true);
      if (r != npos) {
        covered[r] += meas(cur[c]);
        inter[c] += meas(cur[c]);
      }
    }
    for (std::size_t r = 0; r < nxt.size(); ++r)
      if (covered[r] != meas(nxt[r]))
        fail(cert.nested, "generation " + std::to_string(g + 1) +
                              " escapes the previous one at " + nxt[r].str());
    for (std::size_t c = 0; c < cur.size(); ++c) {
      cert.worst_packing = std::max(
          cert.worst_packing, static_cast<double>(inter[c]) / static_cast<double>(meas(cur[c])));
      if (2 * inter[c] > meas(cur[c]))
        fail(cert.packing, "next generation covers more than half of " + cur[c].str());
    }
  }

  cert.pass = cert.level_disjoint && cert.nested && cert.packing;
  return cert;
}

namespace {

// Selection under one active cube P: E = cells where |f - median| exceeds
// twice the local oscillation (of measure < lambda |P| by construction),
// and the selected cubes are the maximal strict subcubes R with
// |R ∩ E| >= |R| / 2^{n+1}. A cube failing that strictly keeps a majority
// of its cells outside E, which pins its median within 2 osc of P's; the
// non-strict acceptance keeps the selected total below |P|/2.
void select_under(const Signal& f, double lambda, const Cube& P, std::vector<Cube>& out) {
  const CellRange r = cube_cells(f, P);
  const Box pb = P.box();
  const double m = median(f, pb);
  const double thr = 2.0 * local_osc(f, pb, lambda);
  const long long sx = r.x1 - r.x0, sy = r.y1 - r.y0;
  std::vector<long long> sat(static_cast<std::size_t>((sx + 1) * (sy + 1)), 0);
  bool any = false;
  for (long long iy = 0; iy < sy; ++iy)
    for (long long ix = 0; ix < sx; ++ix) {
      const bool e = std::fabs(f.at(r.x0 + ix, r.y0 + iy) - m) > thr;
      any = any || e;
      sat[static_cast<std::size_t>((iy + 1) * (sx + 1) + ix + 1)] =
          sat[static_cast<std::size_t>(iy * (sx + 1) + ix + 1)] +
          sat[static_cast<std::size_t>((iy + 1) * (sx + 1) + ix)] -
          sat[static_cast<std::size_t>(iy * (sx + 1) + ix)] + (e ? 1 : 0);
    }
  if (!any) return;
  auto count = [&](const CellRange& c) {
    const long long x0 = c.x0 - r.x0, x1 = c.x1 - r.x0;
    const long long y0 = c.y0 - r.y0, y1 = c.y1 - r.y0;
    return sat[static_cast<std::size_t>(y1 * (sx + 1) + x1)] -
           sat[static_cast<std::size_t>(y0 * (sx + 1) + x1)] -
           sat[static_cast<std::size_t>(y1 * (sx + 1) + x0)] +
           sat[static_cast<std::size_t>(y0 * (sx + 1) + x0)];
  };
  const int shift = f.n + 1;
  std::vector<Cube> queue = children(P, f.K);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Cube c = queue[head];
    const CellRange cr = cube_cells(f, c);
    const long long cnt = count(cr);
    if (cnt == 0) continue;
    const long long cells = (cr.x1 - cr.x0) * (cr.y1 - cr.y0);
    if ((cnt << shift) >= cells) {
      out.push_back(c);
    } else if (c.level < f.K) {
      for (const Cube& ch : children(c, f.K)) queue.push_back(ch);
    }
  }
}

}  // namespace

Decomposition lmo_decompose(const Signal& f, const Cube& root, double lambda) {
  const double lam_max = std::ldexp(1.0, -(f.n + 2));
  if (lambda <= 0.0) lambda = lam_max;
  if (lambda > lam_max)
    throw SignalError("oscillation fraction above 2^-(n+2) breaks the selection rule");
  (void)cube_cells(f, root);  // validates the root against the grid

  Decomposition dec;
  dec.family.root = root;
  dec.family.origin = FamilyOrigin::decomposition;
  dec.root_median = median(f, root.box());

  std::vector<std::vector<Cube>> gens;
  std::vector<Cube> current{root};
  while (!current.empty()) {
    std::vector<Cube> next;
    for (const Cube& P : current) select_under(f, lambda, P, next);
    if (next.empty()) break;
    gens.push_back(std::move(next));
    current = gens.back();
  }
  if (!gens.empty()) {
    dec.family.levels.push_back({root});
    for (auto& g : gens) dec.family.levels.push_back(std::move(g));
  }

  dec.certificate = verify_sparse(dec.family);
  if (!dec.certificate.pass)
    throw std::logic_error("decomposition produced a non-sparse family: " +
                           dec.certificate.detail);

  // re-check the pointwise inequality the family promises
  Signal msharp = local_sharp_max(f, OscillationQuery{root, lambda, f.K});
  Signal oscsum(f.n, f.J, f.K);
  for (const Cube& Q : dec.family.flatten()) {
    const double o = local_osc(f, Q.box(), lambda);
    const CellRange cr = cube_cells(f, Q);
    for (long long iy = cr.y0; iy < cr.y1; ++iy)
      for (long long ix = cr.x0; ix < cr.x1; ++ix) oscsum.at(ix, iy) += o;
  }
  const CellRange rr = cube_cells(f, root);
  for (long long iy = rr.y0; iy < rr.y1; ++iy)
    for (long long ix = rr.x0; ix < rr.x1; ++ix) {
      const double lhs = std::fabs(f.at(ix, iy) - dec.root_median);
      const double rhs = 4.0 * msharp.at(ix, iy) + 2.0 * oscsum.at(ix, iy);
      if (!(lhs <= rhs))
        throw std::logic_error(
            "decomposition inequality failed at cell (" + std::to_string(ix) + "," +
            std::to_string(iy) + "): " + std::to_string(lhs) + " > " + std::to_string(rhs));
      ++dec.cells_checked;
    }
  return dec;
}

int dilation_escapes(const SparseFamily& S, const Signal& f, int m) {
  const Box dom = f.domain();
  int c = 0;
  for (const Cube& q : S.flatten())
    if (!dom.contains(dilate(q, m).box())) ++c;
  return c;
}

Signal sparse_square(const SparseFamily& S, const Signal& f, int m) {
  if (m < 0) throw SignalError("negative dilation exponent");
  Signal sumsq(f.n, f.J, f.K);
  for (const Cube& q : S.flatten()) {
    const double a = average(f, dilate(q, m).box());
    const double asq = a * a;
    const CellRange cr = cube_cells(f, q);
    for (long long iy = cr.y0; iy < cr.y1; ++iy)
      for (long long ix = cr.x0; ix < cr.x1; ++ix) sumsq.at(ix, iy) += asq;
  }
  for (double& x : sumsq.v) x = std::sqrt(x);
  return sumsq;
}

namespace {

// Inclusive run of cells whose centers lie in [lo, hi) on one axis; dilated
// and shifted cubes are not cell-aligned, so indicator membership is decided
// at cell centers, exactly.
std::pair<long long, long long> axis_center_run(const Signal& f, const DyadicThird& lo,
                                                const DyadicThird& hi) {
  const DyadicThird x0{-3, -f.J};
  const DyadicThird rlo = sub(lo, x0), rhi = sub(hi, x0);
  const long long N = f.side_cells();
  auto center = [&](long long i) { return DyadicThird{3 * (2 * i + 1), f.K + 1}; };
  long long a = std::max(floor_index(rlo, f.K, 0) - 1, 0LL);
  while (a < N && compare(center(a), rlo) < 0) ++a;
  long long b = std::min(floor_index(rhi, f.K, 0) + 1, N - 1);
  while (b >= 0 && compare(center(b), rhi) >= 0) --b;
  return {a, b};
}

template <typename Fn>
void for_center_cells(const Signal& f, const Box& B, Fn&& fn) {
  auto [x0, x1] = axis_center_run(f, B.lo[0], B.hi[0]);
  if (x0 > x1) return;
  if (f.n == 1) {
    for (long long ix = x0; ix <= x1; ++ix) fn(ix, 0LL);
    return;
  }
  auto [y0, y1] = axis_center_run(f, B.lo[1], B.hi[1]);
  for (long long iy = y0; iy <= y1; ++iy)
    for (long long ix = x0; ix <= x1; ++ix) fn(ix, iy);
}

}  // namespace

BilinearResult bilinear_form(const SparseFamily& S, const Signal& f, const Signal& g, int m) {
  if (!f.same_grid(g)) throw SignalError("bilinear form needs a shared grid");
  if (m < 0) throw SignalError("negative dilation exponent");
  BilinearResult out;
  out.form = Signal(f.n, f.J, f.K);
  for (const Cube& q : S.flatten()) {
    const Box dil = dilate(q, m).box();
    const double fa = average(f, dil);
    const double gint = integral(g, q.box());
    const double term = fa * (gint / dil.volume());
    for_center_cells(f, dil, [&](long long ix, long long iy) { out.form.at(ix, iy) += term; });
    out.pairing += fa * fa * gint;
  }
  return out;
}

RefitResult refit_shifted(const SparseFamily& S, int m, const Box& ambient) {
  if (m < 0) throw SignalError("negative dilation exponent");
  RefitResult out;
  out.m = m;
  out.by_grid.assign(static_cast<std::size_t>(grid_count(S.root.n)) + 1, {});
  for (const Cube& q : S.flatten()) {
    const Box target = dilate(q, m).box();
    CoverResult cr;
    try {
      cr = shifted_cover(target, ambient);
    } catch (const CoverError& e) {
      throw CoverError(std::string(e.what()) + " while refitting " + q.str() +
                       " dilated by 2^" + std::to_string(m));
    }
    out.by_grid[static_cast<std::size_t>(cr.cover.grid)].push_back(out.assignments.size());
    out.assignments.push_back(RefitAssignment{q, cr.cover, cr.ratio});
  }
  return out;
}

Signal refit_majorant(const RefitResult& r, const Signal& f, const Signal& g) {
  if (!f.same_grid(g)) throw SignalError("refit majorant needs a shared grid");
  Signal out(f.n, f.J, f.K);
  const double c = std::pow(6.0, 2 * f.n);
  for (const RefitAssignment& a : r.assignments) {
    const Box pb = a.cover.box();
    const double fa = average(f, pb);
    const double gint = integral(g, a.source.box());
    const double term = c * fa * (gint / pb.volume());
    for_center_cells(f, pb, [&](long long ix, long long iy) { out.at(ix, iy) += term; });
  }
  return out;
}

namespace {

AggregateResult aggregate(const SparseFamily& S, const Signal& f, double delta, int m_max,
                          double exp_factor) {
  if (!(delta > 0.0) || delta > 1.0) throw SignalError("delta outside (0, 1]");
  if (m_max < 0) throw SignalError("negative m_max");
  AggregateResult out;
  out.value = Signal(f.n, f.J, f.K);
  double sup = 0.0;
  for (int m = 0; m <= m_max; ++m) {
    const Signal tm = sparse_square(S, f, m);
    const double c = std::pow(2.0, -exp_factor * m * delta);
    double mx = 0.0;
    for (std::size_t i = 0; i < tm.v.size(); ++i) {
      out.value.v[i] += c * tm.v[i];
      mx = std::max(mx, tm.v[i]);
    }
    sup = std::max(sup, mx);
  }
  out.escapes = dilation_escapes(S, f, m_max);
  const double q = std::pow(2.0, -exp_factor * delta);
  out.tail_bound = std::pow(q, m_max) / (1.0 - q) * sup;
  return out;
}

}  // namespace

AggregateResult calT(const SparseFamily& S, const Signal& f, double delta, int m_max) {
  return aggregate(S, f, delta, m_max, 0.5);
}

AggregateResult calB(const SparseFamily& S, const Signal& f, double delta, int m_max) {
  return aggregate(S, f, delta, m_max, 1.0);
}

DominationGap domination_gap(const Signal& f, const KernelSpec& k, const BumpSpec& bump,
                             double alpha, const Cube& root, double delta, int m_max,
                             const TGrid& tg) {
  const Field F = conv_field(f, k, tg);
  const Signal energy = smooth_energy(F, bump, alpha);
  DominationGap out;
  out.decomposition = lmo_decompose(energy, root);
  const AggregateResult agg = calT(out.decomposition.family, f, delta, m_max);
  const Signal M = hl_maximal(f);
  out.ratio = Signal(f.n, f.J, f.K);
  const double an = std::pow(alpha, f.n);
  const CellRange rr = cube_cells(f, root);
  for (long long iy = rr.y0; iy < rr.y1; ++iy)
    for (long long ix = rr.x0; ix < rr.x1; ++ix) {
      const double num = std::sqrt(std::fabs(energy.at(ix, iy) - out.decomposition.root_median));
      const double den = an * (M.at(ix, iy) + agg.value.at(ix, iy));
      if (den > 0.0) {
        const double q = num / den;
        out.ratio.at(ix, iy) = q;
        out.max_ratio = std::max(out.max_ratio, q);
      } else if (num > 0.0) {
        ++out.anomalies;
      }
    }
  return out;
}

}  // namespace sqlab
