#pragma once

#include <stdexcept>
#include <string>

namespace sqlab {

class KernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KernelId { haar, mexhat, boxcar };

KernelId kernel_id_from(const std::string& name);
std::string kernel_name(KernelId id);

// A convolution kernel psi on R^n. For n == 2 the kernel is the tensor
// product of the 1-D profile with itself. `antiderivative` is the exact
// primitive A(z) = int_{-inf}^{z} psi, which turns piecewise-constant
// convolution into closed-form cell sums.
struct KernelSpec {
  KernelId id = KernelId::haar;
  int n = 1;
  double eps = 1.0;        // decay/smoothness exponent of the kernel bounds
  double delta = 0.75;     // oscillation-sum exponent; eps when eps < 1
  double c_decay = 0.0;    // filled in by validate_kernel
  double c_smooth = 0.0;

  double profile(double x) const;        // 1-D value psi(x)
  double antiderivative(double z) const; // exact primitive of the profile
  double value(const double* x) const;   // n-D value (tensor product)
  double support_radius() const;         // |x| beyond which psi is negligible

  static KernelSpec make(KernelId id, int n = 1);
};

// Radial bump with value exactly 1 on |z| <= 1 and exactly 0 on |z| >= 2,
// glued by the exp(-1/s) sigmoid in between. The sharp variant is the open
// unit-ball indicator, which collapses the smooth operators onto the plain
// cone ones.
struct BumpSpec {
  double lipschitz = 0.0;  // measured sup |d/dr profile|
  bool sharp = false;

  double value(double r) const;  // radial profile at r = |z| >= 0

  static BumpSpec standard();
  static BumpSpec unit_indicator();
};

struct KernelReport {
  bool passed = false;    // eps_ok and mean within tolerance
  bool eps_ok = false;    // finite constants fit both bounds
  double decay_const = 0.0;
  double smooth_const = 0.0;
  double mean = 0.0;
  double mean_tol = 0.0;
  std::string detail;
};

struct ProbeSet {
  double radius = 16.0;  // must cover the largest dilation in play
  int count = 4096;      // samples per unit length
};

// Fits the smallest constants for the decay bound |psi(x)| <= c/(1+|x|)^{n+eps}
// and the L^1 modulus bound int |psi(.+h) - psi| <= c|h|^eps on the probe set,
// and evaluates int psi from the exact antiderivative. Failures are reported,
// not thrown.
KernelReport validate_kernel(const KernelSpec& k, const ProbeSet& probes = {});

}  // namespace sqlab
