#include "sqlab/signal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace sqlab {

namespace {

// Cell index run covering [lo, hi) on one axis, with exact overlap lengths.
struct AxisRun {
  long long i0 = 0;
  std::vector<double> w;
};

AxisRun axis_overlap(int J, int K, const DyadicThird& lo, const DyadicThird& hi) {
  AxisRun run;
  long long N = 1LL << (J + 1 + K);
  DyadicThird x0{-3, -J};
  DyadicThird rlo = sub(lo, x0), rhi = sub(hi, x0);
  long long a = floor_index(rlo, K, 0);
  long long b = floor_index(rhi, K, 0);
  if (compare(rhi, DyadicThird{3 * b, K}) == 0) --b;  // hi exactly on a boundary
  a = std::max(a, 0LL);
  b = std::min(b, N - 1);
  if (a > b) return run;
  run.i0 = a;
  run.w.resize(static_cast<std::size_t>(b - a + 1), std::ldexp(1.0, -K));
  for (long long i : {a, b}) {  // boundary cells: exact clipped lengths
    DyadicThird cl{3 * i, K}, cr{3 * (i + 1), K};
    DyadicThird l = compare(rlo, cl) > 0 ? rlo : cl;
    DyadicThird r = compare(rhi, cr) < 0 ? rhi : cr;
    run.w[static_cast<std::size_t>(i - a)] = std::max(0.0, sub(r, l).to_double());
  }
  return run;
}

double box_volume(const Box& B) {
  double v = 1.0;
  for (int c = 0; c < B.n; ++c) v *= sub(B.hi[c], B.lo[c]).to_double();
  return v;
}

// Groups layers by value (ascending), measures accumulated.
std::vector<Layer> grouped_ascending(std::vector<Layer> ls) {
  std::sort(ls.begin(), ls.end(), [](const Layer& a, const Layer& b) { return a.value < b.value; });
  std::vector<Layer> g;
  for (const Layer& l : ls) {
    if (!g.empty() && g.back().value == l.value)
      g.back().measure += l.measure;
    else
      g.push_back(l);
  }
  return g;
}

// Smallest alpha >= 0 with (measure of layers with value > alpha) < t,
// i.e. the non-increasing rearrangement at t. Layers must be sorted by
// descending value (equal values may repeat).
double rearrangement_of(const std::vector<Layer>& desc, std::size_t count, double t) {
  double result = 0.0, cum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    if (cum < t)
      result = desc[i].value;
    else
      break;
    cum += desc[i].measure;
  }
  if (cum < t) result = 0.0;
  return result;
}

// Oscillation over explicit ascending value groups.
double osc_of_groups(const std::vector<Layer>& g, double lambda) {
  if (g.empty()) throw SignalError("oscillation over an empty box");
  if (g.size() == 1) return 0.0;
  double total = 0.0;
  for (const Layer& l : g) total += l.measure;
  double t = lambda * total;

  std::vector<double> cand;
  cand.reserve(2 * g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    cand.push_back(g[i].value);
    if (i + 1 < g.size()) cand.push_back(0.5 * (g[i].value + g[i + 1].value));
  }

  double best = std::numeric_limits<double>::infinity();
  std::vector<Layer> desc(g.size());
  for (double c : cand) {
    // two-pointer merge: |value - c| descending over the ascending groups
    std::size_t lo = 0, hi = g.size(), out = 0;
    while (lo < hi) {
      double dl = std::fabs(g[lo].value - c), dh = std::fabs(g[hi - 1].value - c);
      if (dl >= dh)
        desc[out++] = {dl, g[lo++].measure};
      else
        desc[out++] = {dh, g[--hi].measure};
    }
    best = std::min(best, rearrangement_of(desc, out, t));
    if (best == 0.0) break;
  }
  return best;
}

}  // namespace

Signal::Signal(int n_, int J_, int K_) : n(n_), J(J_), K(K_) {
  if (n < 1 || n > 2) throw SignalError("signal dimension must be 1 or 2");
  if (J + 1 + K < 0 || J + 1 + K > 24) throw SignalError("cell count out of range");
  v.assign(cell_count(), 0.0);
}

std::size_t Signal::cell_count() const {
  std::size_t N = std::size_t(1) << (J + 1 + K);
  return n == 1 ? N : N * N;
}

double Signal::h() const { return std::ldexp(1.0, -K); }
double Signal::cell_volume() const { return std::ldexp(1.0, -K * n); }
double Signal::x0() const { return -std::ldexp(1.0, J); }

double& Signal::at(long long ix, long long iy) {
  return v[static_cast<std::size_t>(n == 1 ? ix : iy * side_cells() + ix)];
}
double Signal::at(long long ix, long long iy) const {
  return v[static_cast<std::size_t>(n == 1 ? ix : iy * side_cells() + ix)];
}

Point Signal::cell_center(long long ix, long long iy) const {
  Point p{};
  p[0] = add(DyadicThird{-3, -J}, DyadicThird{3 * (2 * ix + 1), K + 1});
  if (n == 2) p[1] = add(DyadicThird{-3, -J}, DyadicThird{3 * (2 * iy + 1), K + 1});
  return p;
}

Box Signal::cell_box(long long ix, long long iy) const {
  Box b;
  b.n = n;
  DyadicThird x0r{-3, -J};
  b.lo[0] = add(x0r, DyadicThird{3 * ix, K});
  b.hi[0] = add(x0r, DyadicThird{3 * (ix + 1), K});
  if (n == 2) {
    b.lo[1] = add(x0r, DyadicThird{3 * iy, K});
    b.hi[1] = add(x0r, DyadicThird{3 * (iy + 1), K});
  }
  return b;
}

Weight Weight::from_signal(Signal w) {
  for (double x : w.v)
    if (!(x > 0.0) || !std::isfinite(x)) throw SignalError("weight must be positive and finite");
  return Weight{std::move(w)};
}

double integral(const Signal& f, const Box& B, bool absolute) {
  if (B.n != f.n) throw SignalError("box dimension mismatch");
  AxisRun rx = axis_overlap(f.J, f.K, B.lo[0], B.hi[0]);
  if (rx.w.empty()) return 0.0;
  double acc = 0.0;
  if (f.n == 1) {
    for (std::size_t k = 0; k < rx.w.size(); ++k) {
      double val = f.at(rx.i0 + static_cast<long long>(k));
      acc += rx.w[k] * (absolute ? std::fabs(val) : val);
    }
    return acc;
  }
  AxisRun ry = axis_overlap(f.J, f.K, B.lo[1], B.hi[1]);
  for (std::size_t ky = 0; ky < ry.w.size(); ++ky) {
    double row = 0.0;
    for (std::size_t kx = 0; kx < rx.w.size(); ++kx) {
      double val = f.at(rx.i0 + static_cast<long long>(kx), ry.i0 + static_cast<long long>(ky));
      row += rx.w[kx] * (absolute ? std::fabs(val) : val);
    }
    acc += ry.w[ky] * row;
  }
  return acc;
}

double average(const Signal& f, const Box& B, bool absolute) {
  double vol = box_volume(B);
  if (!(vol > 0.0)) throw SignalError("average over an empty box");
  return integral(f, B, absolute) / vol;
}

std::vector<Layer> restrict_layers(const Signal& f, const Box& B) {
  if (B.n != f.n) throw SignalError("box dimension mismatch");
  std::vector<Layer> out;
  double covered = 0.0;
  AxisRun rx = axis_overlap(f.J, f.K, B.lo[0], B.hi[0]);
  if (f.n == 1) {
    for (std::size_t k = 0; k < rx.w.size(); ++k)
      if (rx.w[k] > 0.0) {
        out.push_back({f.at(rx.i0 + static_cast<long long>(k)), rx.w[k]});
        covered += rx.w[k];
      }
  } else {
    AxisRun ry = axis_overlap(f.J, f.K, B.lo[1], B.hi[1]);
    for (std::size_t ky = 0; ky < ry.w.size(); ++ky)
      for (std::size_t kx = 0; kx < rx.w.size(); ++kx) {
        double m = rx.w[kx] * ry.w[ky];
        if (m > 0.0) {
          out.push_back({f.at(rx.i0 + static_cast<long long>(kx),
                              ry.i0 + static_cast<long long>(ky)),
                         m});
          covered += m;
        }
      }
  }
  double vol = box_volume(B);
  if (vol > covered) out.push_back({0.0, vol - covered});  // zero extension
  return out;
}

double rearrangement(const Signal& f, const Box& B, double t) {
  if (!(t >= 0.0)) throw SignalError("rearrangement needs t >= 0");
  std::vector<Layer> ls = restrict_layers(f, B);
  for (Layer& l : ls) l.value = std::fabs(l.value);
  std::sort(ls.begin(), ls.end(), [](const Layer& a, const Layer& b) { return a.value > b.value; });
  std::vector<Layer> desc;
  for (const Layer& l : ls) {
    if (!desc.empty() && desc.back().value == l.value)
      desc.back().measure += l.measure;
    else
      desc.push_back(l);
  }
  return rearrangement_of(desc, desc.size(), t);
}

double median(const Signal& f, const Box& B) {
  std::vector<Layer> g = grouped_ascending(restrict_layers(f, B));
  if (g.empty()) throw SignalError("median of an empty box");
  double total = 0.0;
  for (const Layer& l : g) total += l.measure;
  double half = total / 2.0;
  double m = g.front().value, below = 0.0;
  for (const Layer& l : g) {
    if (below <= half) m = l.value;
    below += l.measure;
  }
  return m;
}

double local_osc(const Signal& f, const Box& B, double lambda) {
  if (!(lambda > 0.0) || !(lambda <= 0.5)) throw SignalError("lambda outside (0, 1/2]");
  return osc_of_groups(grouped_ascending(restrict_layers(f, B)), lambda);
}

CellRange cube_cells(const Signal& f, const Cube& q) {
  if (q.grid != 0 || q.dilation != 1)
    throw SignalError("cell mapping needs a standard-grid undilated cube");
  if (q.level > f.K) throw SignalError("cube finer than the grid");
  long long origin = 1LL << (f.K + f.J);  // cells left of coordinate 0
  long long span = 1LL << (f.K - q.level);
  CellRange r{};
  r.x0 = q.idx[0] * span + origin;
  r.x1 = r.x0 + span;
  if (f.n == 2) {
    r.y0 = q.idx[1] * span + origin;
    r.y1 = r.y0 + span;
  } else {
    r.y0 = 0;
    r.y1 = 1;
  }
  long long N = f.side_cells();
  if (r.x0 < 0 || r.x1 > N || r.y0 < 0 || (f.n == 2 && r.y1 > N))
    throw SignalError("cube outside the ambient box: " + q.str());
  return r;
}

namespace {

double osc_of_range(const Signal& f, const CellRange& r, double lambda) {
  std::vector<Layer> ls;
  ls.reserve(static_cast<std::size_t>((r.x1 - r.x0) * (r.y1 - r.y0)));
  double cellv = f.cell_volume();
  for (long long iy = r.y0; iy < r.y1; ++iy)
    for (long long ix = r.x0; ix < r.x1; ++ix) ls.push_back({f.at(ix, iy), cellv});
  return osc_of_groups(grouped_ascending(std::move(ls)), lambda);
}

void sharp_recurse(const Signal& f, const Cube& q, int max_level, double lambda, double inherited,
                   Signal& out) {
  CellRange r = cube_cells(f, q);
  double mn = f.at(r.x0, r.y0), mx = mn;
  for (long long iy = r.y0; iy < r.y1; ++iy)
    for (long long ix = r.x0; ix < r.x1; ++ix) {
      double val = f.at(ix, iy);
      mn = std::min(mn, val);
      mx = std::max(mx, val);
    }
  double here = mn == mx ? inherited : std::max(inherited, osc_of_range(f, r, lambda));
  if (q.level >= max_level || mn == mx) {
    for (long long iy = r.y0; iy < r.y1; ++iy)
      for (long long ix = r.x0; ix < r.x1; ++ix) out.at(ix, iy) = here;
    return;
  }
  for (const Cube& ch : children(q, max_level)) sharp_recurse(f, ch, max_level, lambda, here, out);
}

// Sliding maximum with window width `width`: out[i] gains
// max over a in [i-width+1, i], a restricted to the index range of vals.
void sliding_max_into(const std::vector<double>& vals, long long width, std::vector<double>* out) {
  std::deque<std::size_t> dq;
  std::size_t m = vals.size();
  for (std::size_t i = 0; i < out->size(); ++i) {
    if (i < m) {
      while (!dq.empty() && vals[dq.back()] <= vals[i]) dq.pop_back();
      dq.push_back(i);
    }
    while (!dq.empty() && dq.front() + static_cast<std::size_t>(width) <= i) dq.pop_front();
    if (!dq.empty()) (*out)[i] = std::max((*out)[i], vals[dq.front()]);
  }
}

}  // namespace

Signal local_sharp_max(const Signal& f, const OscillationQuery& query) {
  if (query.max_level > f.K) throw SignalError("query level finer than the grid");
  Signal out(f.n, f.J, f.K);
  sharp_recurse(f, query.root, query.max_level, query.lambda, 0.0, out);
  return out;
}

Signal hl_maximal(const Signal& f) {
  long long N = f.side_cells();
  Signal out(f.n, f.J, f.K);
  if (f.n == 1) {
    // width-1 windows exactly, wider ones via prefix sums
    for (long long i = 0; i < N; ++i) out.at(i) = std::fabs(f.at(i));
    std::vector<double> P(static_cast<std::size_t>(N) + 1, 0.0);
    for (long long i = 0; i < N; ++i) P[i + 1] = P[i] + std::fabs(f.at(i));
    std::vector<double> means;
    for (long long L = 2; L <= N; ++L) {
      means.assign(static_cast<std::size_t>(N - L + 1), 0.0);
      for (long long a = 0; a + L <= N; ++a)
        means[static_cast<std::size_t>(a)] = (P[a + L] - P[a]) / static_cast<double>(L);
      sliding_max_into(means, L, &out.v);
    }
    return out;
  }
  // n == 2: all grid-aligned squares via summed-area table + separable sliding max
  std::vector<double> sat(static_cast<std::size_t>((N + 1) * (N + 1)), 0.0);
  auto S = [&](long long x, long long y) -> double& {
    return sat[static_cast<std::size_t>(y * (N + 1) + x)];
  };
  for (long long y = 0; y < N; ++y)
    for (long long x = 0; x < N; ++x)
      S(x + 1, y + 1) = std::fabs(f.at(x, y)) + S(x, y + 1) + S(x + 1, y) - S(x, y);
  for (long long y = 0; y < N; ++y)
    for (long long x = 0; x < N; ++x) out.at(x, y) = std::fabs(f.at(x, y));
  std::vector<double> row, col, tmp(static_cast<std::size_t>(N * N));
  for (long long L = 2; L <= N; ++L) {
    double inv = 1.0 / static_cast<double>(L * L);
    std::fill(tmp.begin(), tmp.end(), -std::numeric_limits<double>::infinity());
    for (long long b = 0; b + L <= N; ++b) {
      row.assign(static_cast<std::size_t>(N - L + 1), 0.0);
      for (long long a = 0; a + L <= N; ++a)
        row[static_cast<std::size_t>(a)] =
            (S(a + L, b + L) - S(a, b + L) - S(a + L, b) + S(a, b)) * inv;
      std::vector<double> line(static_cast<std::size_t>(N),
                               -std::numeric_limits<double>::infinity());
      sliding_max_into(row, L, &line);
      for (long long x = 0; x < N; ++x)
        tmp[static_cast<std::size_t>(b * N + x)] = line[static_cast<std::size_t>(x)];
    }
    for (long long x = 0; x < N; ++x) {
      col.assign(static_cast<std::size_t>(N - L + 1), 0.0);
      for (long long b = 0; b + L <= N; ++b)
        col[static_cast<std::size_t>(b)] = tmp[static_cast<std::size_t>(b * N + x)];
      std::vector<double> line(static_cast<std::size_t>(N),
                               -std::numeric_limits<double>::infinity());
      sliding_max_into(col, L, &line);
      for (long long y = 0; y < N; ++y)
        out.at(x, y) = std::max(out.at(x, y), line[static_cast<std::size_t>(y)]);
    }
  }
  return out;
}

double lp_norm(const Signal& f, double p, const Weight* w) {
  if (!(p >= 1.0)) throw SignalError("lp_norm needs p >= 1");
  if (w && !w->s.same_grid(f)) throw SignalError("weight grid mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.v.size(); ++i)
    acc += std::pow(std::fabs(f.v[i]), p) * (w ? w->s.v[i] : 1.0);
  double r = std::pow(acc * f.cell_volume(), 1.0 / p);
  if (!std::isfinite(r)) throw NumericError("lp_norm overflowed");
  return r;
}

double weak_quasinorm(const Signal& f, double p, const Weight* w) {
  if (!(p >= 1.0)) throw SignalError("weak_quasinorm needs p >= 1");
  if (w && !w->s.same_grid(f)) throw SignalError("weight grid mismatch");
  std::vector<Layer> ls(f.v.size());
  double cellv = f.cell_volume();
  for (std::size_t i = 0; i < f.v.size(); ++i)
    ls[i] = {std::fabs(f.v[i]), cellv * (w ? w->s.v[i] : 1.0)};
  std::sort(ls.begin(), ls.end(), [](const Layer& a, const Layer& b) { return a.value > b.value; });
  // sup_xi xi * w({|f| >= xi})^{1/p}, realized at sample values
  double best = 0.0, cum = 0.0;
  for (const Layer& l : ls) {
    if (l.value <= 0.0) break;
    cum += l.measure;
    best = std::max(best, l.value * std::pow(cum, 1.0 / p));
  }
  if (!std::isfinite(best)) throw NumericError("weak_quasinorm overflowed");
  return best;
}

namespace {

Box window_box(const Signal& f, long long ax, long long bx, long long ay, long long by) {
  Box B;
  B.n = f.n;
  DyadicThird x0r{-3, -f.J};
  B.lo[0] = add(x0r, DyadicThird{3 * ax, f.K});
  B.hi[0] = add(x0r, DyadicThird{3 * bx, f.K});
  if (f.n == 2) {
    B.lo[1] = add(x0r, DyadicThird{3 * ay, f.K});
    B.hi[1] = add(x0r, DyadicThird{3 * by, f.K});
  }
  return B;
}

}  // namespace

ApResult ap_char(const Weight& w, double p, ApScope scope) {
  if (!(p > 1.0)) throw SignalError("ap_char needs p > 1");
  const Signal& ws = w.s;
  long long N = ws.side_cells();
  double dualexp = -1.0 / (p - 1.0);
  Signal sig(ws.n, ws.J, ws.K);  // dual weight w^{-1/(p-1)}, cellwise
  for (std::size_t i = 0; i < ws.v.size(); ++i) {
    sig.v[i] = std::pow(ws.v[i], dualexp);
    if (!std::isfinite(sig.v[i])) throw NumericError("dual weight overflowed");
  }
  ApResult best;
  best.value = 0.0;
  auto consider = [&](double sw, double ss, double len, long long ax, long long bx, long long ay,
                      long long by) {
    double val = (sw / len) * std::pow(ss / len, p - 1.0);
    if (val > best.value) {
      best.value = val;
      best.window = window_box(ws, ax, bx, ay, by);
    }
  };

  if (scope == ApScope::all) {
    if (ws.n == 1) {
      for (long long a = 0; a < N; ++a) {
        double sw = 0.0, ss = 0.0;
        for (long long b = a; b < N; ++b) {
          sw += ws.at(b);
          ss += sig.at(b);
          consider(sw, ss, static_cast<double>(b - a + 1), a, b + 1, 0, 1);
        }
      }
    } else {
      for (long long L = 1; L <= N; ++L)
        for (long long ay = 0; ay + L <= N; ++ay)
          for (long long ax = 0; ax + L <= N; ++ax) {
            double sw = 0.0, ss = 0.0;
            for (long long y = ay; y < ay + L; ++y)
              for (long long x = ax; x < ax + L; ++x) {
                sw += ws.at(x, y);
                ss += sig.at(x, y);
              }
            consider(sw, ss, static_cast<double>(L * L), ax, ax + L, ay, ay + L);
          }
    }
    return best;
  }

  for (int g = scope == ApScope::dyadic ? 0 : 1;
       g <= (scope == ApScope::dyadic ? 0 : grid_count(ws.n)); ++g) {
    for (int level = -ws.J; level <= ws.K; ++level) {
      if (g == 0) {
        long long span = 1LL << (ws.K - level);
        for (long long ay = 0; ay < (ws.n == 2 ? N : 1); ay += (ws.n == 2 ? span : 1))
          for (long long ax = 0; ax < N; ax += span) {
            double sw = 0.0, ss = 0.0;
            long long y1 = ws.n == 2 ? ay + span : 1;
            for (long long y = ay; y < y1; ++y)
              for (long long x = ax; x < ax + span; ++x) {
                sw += ws.at(x, y);
                ss += sig.at(x, y);
              }
            double cells = static_cast<double>(span) * (ws.n == 2 ? static_cast<double>(span) : 1.0);
            consider(sw, ss, cells, ax, ax + span, ay, ws.n == 2 ? ay + span : 1);
          }
      } else {
        // shifted cubes: thirds corners, boundary cells clipped exactly
        Box dom = ws.domain();
        GridShift gs{ws.n, g};
        std::array<long long, 2> ilo{}, ihi{};
        for (int c = 0; c < ws.n; ++c) {
          ilo[c] = floor_index(dom.lo[c], level, gs.signed_sigma(c, level));
          ihi[c] = floor_index(dom.hi[c], level, gs.signed_sigma(c, level));
        }
        for (long long jy = (ws.n == 2 ? ilo[1] : 0); jy <= (ws.n == 2 ? ihi[1] : 0); ++jy)
          for (long long jx = ilo[0]; jx <= ihi[0]; ++jx) {
            Cube q;
            q.n = ws.n;
            q.grid = g;
            q.level = level;
            q.idx[0] = jx;
            q.idx[1] = jy;
            Box B = q.box();
            double vol = B.volume();
            double val = (integral(ws, B) / vol) * std::pow(integral(sig, B) / vol, p - 1.0);
            if (val > best.value) {
              best.value = val;
              best.window = B;
            }
          }
      }
    }
  }
  return best;
}

}  // namespace sqlab
