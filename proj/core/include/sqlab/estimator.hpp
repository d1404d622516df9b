#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqlab/cone.hpp"
#include "sqlab/field.hpp"
#include "sqlab/kernel.hpp"
#include "sqlab/signal.hpp"
#include "sqlab/sparse.hpp"

namespace sqlab {

class EstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- deterministic generators -------------------------------------------
// Everything below is a pure function of its arguments; the same seed gives
// the same bytes on every platform (mt19937_64 is pinned by the standard).

// Sum of `pieces` random dyadic-interval bumps. With `central` the support
// stays inside the middle quarter of the box, so concentric dilations of
// interior cubes see genuine decay instead of clipped mass; `nonneg` keeps
// all bump heights positive.
Signal random_signal(int n, int J, int K, std::uint64_t seed, int pieces = 24,
                     bool central = true, bool nonneg = false);

// Strictly positive piecewise-constant weight with values in
// [1/spread, spread].
Weight random_weight(int n, int J, int K, std::uint64_t seed, double spread = 8.0);

// Byte mask (one per cell) of a union of `pieces` random dyadic cubes
// covering roughly `fill` of the box. 1-D only.
std::vector<unsigned char> random_cell_set(int J, int K, std::uint64_t seed,
                                           int pieces, double fill);

// Random sparse family below `root`: each generation picks at most half of
// every selected cube's grandchildren, so the certificate holds by
// construction. Generations deeper than level K are cut off.
SparseFamily random_family(const Cube& root, int K, std::uint64_t seed,
                           int generations = 3);

// The nested halving chain below `root` (corner-anchored child at every
// step, down to level K): the canonical family concentrating at one point.
SparseFamily tower_family(const Cube& root, int K);

// ---- test families -------------------------------------------------------

struct TestPair {
  std::string label;
  Signal f;
  std::optional<Weight> w;  // paired weight; empty = Lebesgue
};

struct FamilySpec {
  int n = 1, J = -1, K = 12;
  std::uint64_t seed = 1;
  int random_members = 6;
  int indicator_levels = 4;   // indicators of [0, 2^-l) for l = 2..1+levels
  bool spike = true;          // single-cell indicator member
  std::vector<double> deltas; // power-law members (1-D), paired with weights
  double p = 2.0;             // exponent pairing the power-law weights
};
std::vector<TestPair> make_family(const FamilySpec& spec);

// |x|^{delta-1} restricted to (0, 2^{J-1}], cell-averaged exactly from the
// closed-form primitive. 1-D; delta in (0, 1].
Signal power_signal(int J, int K, double delta);

struct PowerWeight {
  Weight w;
  double apchar = 1.0;
  double delta = 1.0;
};
// w_delta = |x|^{(1-delta)(p-1)} cell-averaged exactly, with its measured
// characteristic. delta = 1 gives w identically 1 and apchar exactly 1.
// 1-D; delta in (0, 1], p > 1.
PowerWeight power_weight(int J, int K, double p, double delta,
                         ApScope scope = ApScope::all);

// ---- operators under test -------------------------------------------------

enum class OpId { cone, smooth, gstar, maximal, sparse_dilated, aggregate };
OpId op_id_from(const std::string& name);
std::string op_name(OpId id);

struct OpSpec {
  OpId id = OpId::cone;
  double alpha = 1.0;   // cone / smooth aperture
  double mu = 3.0;      // gstar weight exponent
  int m = 0;            // sparse_dilated dilation exponent
  double decay = 0.75;  // aggregate decay delta
  int m_max = 6;        // aggregate truncation
  KernelSpec kernel = KernelSpec::make(KernelId::haar);
  TGrid tg;             // L == 0 picks TGrid::standard(f) per signal
  BumpSpec bump = BumpSpec::standard();
  const SparseFamily* family = nullptr;  // sparse ops; null = tower at [0, 2^{J-1})
};

Signal apply_op(const OpSpec& op, const Signal& f);

struct MemberRatio {
  std::string label;
  double ratio = 0.0;
};
struct OpNormResult {
  double value = 0.0;  // max ratio over the family
  std::string best;    // attaining member
  int skipped = 0;     // members with zero denominator norm
  std::vector<MemberRatio> members;
};
// max over the family of ||op f||_{L^p(w)} / ||f||_{L^p(w)}. An explicit w
// applies to every member; otherwise each member's paired weight (or
// Lebesgue) is used. weak = true puts the weak quasinorm in the numerator.
// Monotone under family enlargement; deterministic given the family.
OpNormResult opnorm_lower(const OpSpec& op, double p, const Weight* w,
                          const std::vector<TestPair>& family, bool weak = false);

// ---- scans and fitting -----------------------------------------------------

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms log deviation
  int points = 0;         // 0 = no fit was possible
};
// Least squares on (log x, log y); throws on fewer than 3 points, repeated
// x, or nonpositive coordinates.
FitResult fit_exponent(const std::vector<std::pair<double, double>>& pts);

struct ScanPoint {
  double x = 0.0;         // alpha, m, or [w]
  double measured = 0.0;  // norm ratio at this point
  double apchar = 1.0;    // weight characteristic in play
  std::string label;      // attaining family member
};
struct ScanResult {
  std::string id;
  std::string x_name;  // "alpha" | "apchar" | "m"
  std::vector<ScanPoint> points;  // sorted by x; zero-ratio points dropped
  FitResult fit;
  std::uint64_t seed = 0;
  int n = 1, J = -1, K = 12;
  std::string kernel;
  std::string note;
};

// Norm ratio of the plain cone operator per aperture, fitted log-log
// against alpha. Fields are built once per family member and shared across
// apertures; null tg picks TGrid::standard per signal.
ScanResult scan_aperture(double p, const Weight* w, const KernelSpec& k,
                         const std::vector<double>& alphas, const FamilySpec& fam,
                         const TGrid* tg = nullptr);

// Norm ratio of `op` against the measured characteristic of the power
// weight w_delta, one point per delta, fitted log-log against [w].
ScanResult scan_weight(double p, const KernelSpec& k, const std::vector<double>& deltas,
                       const OpSpec& op, const FamilySpec& fam);

// ||sparse_square(S, f, m)||_{L^3(w)} per m >= 1, fitted against m. An
// empty family yields all-zero points and no fit; a dilation leaving the
// box at max m is a precondition error.
ScanResult scan_shift_growth(const SparseFamily& S, const Signal& f, const Weight& w,
                             const std::vector<int>& ms);

// aperture: weak-L^1 ratio of the cone operator per alpha (p must be 1).
// weighted: weak-L^p(w_delta) ratio of the unit-aperture operator per
// delta, 2 < p < 3, fitted against [w_delta].
enum class WeakMode { aperture, weighted };
ScanResult scan_weak(double p, const KernelSpec& k, const std::vector<double>& xs,
                     WeakMode mode, const FamilySpec& fam, const TGrid* tg = nullptr);

}  // namespace sqlab
