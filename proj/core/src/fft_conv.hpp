#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>

namespace sqlab::detail {

// Zero-padded circular convolution of a length-N row with a kernel given by
// signed offsets d in [-dmax, dmax] (ker[dmax + d]); pad size >= 2N keeps the
// linear convolution alias-free.
class FftConv {
 public:
  explicit FftConv(long long N) : N_(N) {
    M_ = 1;
    while (M_ < 2 * N_) M_ <<= 1;
    fbuf_ = fftw_alloc_real(M_);
    kbuf_ = fftw_alloc_real(M_);
    obuf_ = fftw_alloc_real(M_);
    fspec_ = fftw_alloc_complex(M_ / 2 + 1);
    kspec_ = fftw_alloc_complex(M_ / 2 + 1);
    fwd_f_ = fftw_plan_dft_r2c_1d(static_cast<int>(M_), fbuf_, fspec_, FFTW_ESTIMATE);
    fwd_k_ = fftw_plan_dft_r2c_1d(static_cast<int>(M_), kbuf_, kspec_, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(M_), kspec_, obuf_, FFTW_ESTIMATE);
  }
  ~FftConv() {
    fftw_destroy_plan(fwd_f_);
    fftw_destroy_plan(fwd_k_);
    fftw_destroy_plan(inv_);
    fftw_free(fbuf_);
    fftw_free(kbuf_);
    fftw_free(obuf_);
    fftw_free(fspec_);
    fftw_free(kspec_);
  }
  FftConv(const FftConv&) = delete;
  FftConv& operator=(const FftConv&) = delete;

  void run(const double* f, const double* ker, long long dmax, double* out) {
    std::fill(fbuf_, fbuf_ + M_, 0.0);
    std::copy(f, f + N_, fbuf_);
    fftw_execute(fwd_f_);
    std::fill(kbuf_, kbuf_ + M_, 0.0);
    for (long long d = -dmax; d <= dmax; ++d) kbuf_[(d + M_) % M_] = ker[dmax + d];
    fftw_execute(fwd_k_);
    for (long long i = 0; i <= M_ / 2; ++i) {
      std::complex<double> a(fspec_[i][0], fspec_[i][1]);
      std::complex<double> b(kspec_[i][0], kspec_[i][1]);
      std::complex<double> c = a * b;
      kspec_[i][0] = c.real();
      kspec_[i][1] = c.imag();
    }
    fftw_execute(inv_);
    double inv_m = 1.0 / static_cast<double>(M_);
    for (long long j = 0; j < N_; ++j) out[j] = obuf_[j] * inv_m;
  }

 private:
  long long N_, M_;
  double *fbuf_, *kbuf_, *obuf_;
  fftw_complex *fspec_, *kspec_;
  fftw_plan fwd_f_, fwd_k_, inv_;
};

}  // namespace sqlab::detail
