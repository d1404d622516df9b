#pragma once

#include "sqlab/field.hpp"

namespace sqlab {

class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature of |F(y,t)|^2 dy dt / t^{n+1} over the cone {|y - x| < alpha t}
// as a function of the vertex x, before the square root; cone_square is its
// pointwise square root.
Signal cone_energy(const Field& F, double alpha);
Signal cone_square(const Field& F, double alpha);

// Smooth-aperture variant: the cone indicator becomes bump(|x - y|/(alpha t)).
// With the standard bump the result sits pointwise between the apertures
// alpha and 2 alpha; with the sharp bump it reproduces cone_* bitwise.
Signal smooth_energy(const Field& F, const BumpSpec& bump, double alpha);
Signal smooth_square(const Field& F, const BumpSpec& bump, double alpha);

enum class GstarMethod { automatic, direct, fft };

// Full-plane functional with weight (t / (t + |x - y|))^{mu n}; the fft path
// (1-D only) evaluates each level by circular correlation.
Signal gstar_energy(const Field& F, double mu,
                    GstarMethod method = GstarMethod::automatic);
Signal gstar(const Field& F, double mu,
             GstarMethod method = GstarMethod::automatic);

// S_1 + sum_{k=0}^{annuli} 2^{-k mu n / 2} S_{2^{k+1}}: the aperture
// expansion dominating gstar pointwise on the shared quadrature. annuli < 0
// picks gstar_required_annuli(F); an explicit count whose widest cone cannot
// reach all nonzero field mass raises CoverageError.
Signal gstar_cone_majorant(const Field& F, double mu, int annuli = -1);

// Smallest annulus count whose widest cone reaches every nonzero field cell
// from every evaluation point.
int gstar_required_annuli(const Field& F);

// h * sum over cells x outside the mask of cone_energy(F, alpha)(x),
// accumulated field-major: both sides of an aperture comparison then share
// term order, so "excised large cone <= 2 alpha * excised unit cone" style
// inequalities are exact on the quadrature. 1-D only; mask has one byte per
// cell, nonzero meaning excluded.
double masked_cone_integral(const Field& F, double alpha,
                            const std::vector<unsigned char>& excluded);

// Bound on the quadrature mass the box truncation discards, from the
// kernel's validated decay constant (reported alongside gstar, not asserted).
double gstar_tail_bound(const Signal& f, const KernelSpec& k, const TGrid& tg);

}  // namespace sqlab
