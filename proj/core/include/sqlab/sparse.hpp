#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sqlab/cone.hpp"
#include "sqlab/field.hpp"
#include "sqlab/signal.hpp"

namespace sqlab {

enum class FamilyOrigin { decomposition, synthetic };

// Leveled collection of same-grid dyadic cubes below a root cube. Generation
// g occupies levels[g]; the union of generation g is the set the packing
// condition constrains. A nonempty decomposition output lists the root as
// its single generation-0 cube, so an all-constant input yields levels = {}.
struct SparseFamily {
  Cube root;
  std::vector<std::vector<Cube>> levels;
  FamilyOrigin origin = FamilyOrigin::synthetic;

  std::size_t size() const;
  std::vector<Cube> flatten() const;  // generation-major cube list
};

// Exact integer-measure check of the three family conditions:
//   (i)   cubes of one generation are pairwise disjoint,
//   (ii)  each generation's union is contained in the previous one's,
//   (iii) the next generation covers at most half of every cube.
struct SparseCertificate {
  bool pass = false;
  bool level_disjoint = false;
  bool nested = false;
  bool packing = false;
  double worst_packing = 0.0;  // max over cubes of covered fraction in (iii)
  std::string detail;          // first violation, empty when pass
};
SparseCertificate verify_sparse(const SparseFamily& S);

// Local mean oscillation decomposition of f below the root cube: selects a
// sparse family such that at every grid cell x of the root,
//   |f(x) - m| <= 4 * osc_sharp(x) + 2 * sum_{Q in family, x in Q} osc(Q),
// where m is the maximal median of f on the root, osc(Q) the local mean
// oscillation at fraction lambda, and osc_sharp the dyadic sharp maximal
// function of those oscillations. Both the inequality and the sparseness
// certificate are re-checked on the output before returning; a failure
// throws (it would mean the construction itself is broken).
struct Decomposition {
  SparseFamily family;
  double root_median = 0.0;
  SparseCertificate certificate;
  long long cells_checked = 0;  // cells swept by the postcondition check
};
// lambda <= 0 selects the default 2^-(n+2); values above 2^-(n+2) are
// rejected (the selection rule's proof needs the default or smaller).
Decomposition lmo_decompose(const Signal& f, const Cube& root, double lambda = 0.0);

// Number of family cubes whose 2^m-dilation leaves the ambient box; their
// averages zero-extend f.
int dilation_escapes(const SparseFamily& S, const Signal& f, int m);

// (sum over family cubes Q of (avg of f over 2^m Q)^2 chi_Q)^{1/2}.
Signal sparse_square(const SparseFamily& S, const Signal& f, int m);

// form = sum over Q of (avg_{2^m Q} f)(|2^m Q|^{-1} int_Q g) chi_{2^m Q};
// pairing = sum over Q of (avg_{2^m Q} f)^2 int_Q g, which equals the
// quadrature of (sparse_square)^2 g up to the route difference in rounding.
// chi of a dilated cube is evaluated at cell centers (dilated cubes need
// not be cell-aligned).
struct BilinearResult {
  Signal form;
  double pairing = 0.0;
};
BilinearResult bilinear_form(const SparseFamily& S, const Signal& f, const Signal& g, int m);

// For each family cube Q, a shifted-grid cube P containing 2^m Q with side
// at most 6 times larger, partitioning the family by covering grid.
struct RefitAssignment {
  Cube source;
  Cube cover;
  double ratio = 0.0;  // cover side / dilated side, in [1, 6]
};
struct RefitResult {
  int m = 0;
  std::vector<RefitAssignment> assignments;       // flatten() order
  std::vector<std::vector<std::size_t>> by_grid;  // assignment indices per grid
};
RefitResult refit_shifted(const SparseFamily& S, int m, const Box& ambient);

// 6^{2n} * sum over assignments of (avg_P f)(|P|^{-1} int_Q g) chi_P, the
// refit majorant dominating bilinear_form(...).form pointwise for f, g >= 0.
Signal refit_majorant(const RefitResult& r, const Signal& f, const Signal& g);

// sum_{m=0}^{m_max} 2^{-m delta/2} sparse_square(S, f, m), with the
// geometric tail past m_max reported; calB uses weights 2^{-m delta}.
struct AggregateResult {
  Signal value;
  double tail_bound = 0.0;
  int escapes = 0;  // dilations that left the box at the largest m
};
AggregateResult calT(const SparseFamily& S, const Signal& f, double delta, int m_max = 6);
AggregateResult calB(const SparseFamily& S, const Signal& f, double delta, int m_max = 6);

// Decomposes smooth_energy(f * psi, alpha) over the root and compares the
// centered square function against alpha^n (Mf + calT f) cell by cell:
// ratio = |energy - median|^{1/2} / (alpha^n (Mf + calT f)), 0 where both
// numerator and denominator vanish; cells with positive numerator over a
// zero denominator are counted as anomalies.
struct DominationGap {
  Signal ratio;
  double max_ratio = 0.0;
  long long anomalies = 0;
  Decomposition decomposition;
};
DominationGap domination_gap(const Signal& f, const KernelSpec& k, const BumpSpec& bump,
                             double alpha, const Cube& root, double delta, int m_max,
                             const TGrid& tg);

}  // namespace sqlab
