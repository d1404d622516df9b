#ifndef SQLAB_SIGNAL_HPP
#define SQLAB_SIGNAL_HPP

#include <functional>
#include <optional>
#include <vector>

#include "sqlab/geometry.hpp"

namespace sqlab {

struct SignalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Piecewise-constant samples on the uniform grid of the ambient box
// [-2^J, 2^J)^n with step h = 2^-K.  Cell i covers [x0 + i h, x0 + (i+1) h).
// Values are cell values; integrals against the grid are exact.
struct Signal {
  int n = 1;
  int J = -1;
  int K = 12;
  std::vector<double> v;

  Signal() = default;
  Signal(int n_, int J_, int K_);

  int side_cells() const { return 1 << (J + 1 + K); }
  std::size_t cell_count() const;
  double h() const;
  double cell_volume() const;
  double x0() const;

  double& at(long long ix, long long iy = 0);
  double at(long long ix, long long iy = 0) const;
  Point cell_center(long long ix, long long iy = 0) const;
  Box cell_box(long long ix, long long iy = 0) const;
  Box domain() const { return ambient_box(n, J); }

  bool same_grid(const Signal& o) const { return n == o.n && J == o.J && K == o.K; }
};

// Strictly positive, finite samples; used for L^p(w) norms and A_p scans.
struct Weight {
  Signal s;
  static Weight from_signal(Signal w);  // validates positivity
};

// Exact integral of f over B (zero extension outside the ambient box).
double integral(const Signal& f, const Box& B, bool absolute = false);
// (1/|B|) * integral(f, B); |B| measured in domain units.
double average(const Signal& f, const Box& B, bool absolute = false);

// Value/measure pairs of f restricted to B, boundary cells clipped exactly.
struct Layer {
  double value;
  double measure;
};
std::vector<Layer> restrict_layers(const Signal& f, const Box& B);

// Nonincreasing rearrangement of |f| restricted to B, evaluated at t:
// smallest alpha >= 0 with |{x in B : |f(x)| > alpha}| < t.
double rearrangement(const Signal& f, const Box& B, double t);

// Maximal median of f over B: largest sample value m with both
// |{f > m}| <= |B|/2 and |{f < m}| <= |B|/2.
double median(const Signal& f, const Box& B);

// Local mean oscillation: inf over offsets c of the rearrangement of
// |f - c| on B at lambda |B|.  The infimum is realized over the finite
// candidate set of cell values and midpoints of consecutive distinct values.
double local_osc(const Signal& f, const Box& B, double lambda);

// Half-open cell-index ranges of a standard-grid undilated cube on f's grid.
struct CellRange {
  long long x0, x1, y0, y1;
};
CellRange cube_cells(const Signal& f, const Cube& q);

struct OscillationQuery {
  Cube root;        // standard-grid, undilated
  double lambda;    // oscillation fraction, typically 2^-(n+2)
  int max_level;    // finest cube level, typically K
};

// Dyadic local sharp maximal function on the cells of query.root:
// sup of local_osc over dyadic subcubes of the root containing the cell.
// Returns a full-grid signal, zero outside the root.
Signal local_sharp_max(const Signal& f, const OscillationQuery& query);

// Uncentered maximal function over all grid-aligned cubes of the box.
Signal hl_maximal(const Signal& f);

double lp_norm(const Signal& f, double p, const Weight* w = nullptr);
double weak_quasinorm(const Signal& f, double p, const Weight* w = nullptr);

enum class ApScope { all, dyadic, dyadic_shifted };

struct ApResult {
  double value = 1.0;
  Box window;  // attaining window
};

// Muckenhoupt characteristic sup_Q avg_Q(w) * avg_Q(w^{-1/(p-1)})^{p-1}
// over the cube family selected by `scope`; p > 1.
ApResult ap_char(const Weight& w, double p, ApScope scope = ApScope::all);

}  // namespace sqlab

#endif
