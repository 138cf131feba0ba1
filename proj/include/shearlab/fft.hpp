#pragma once

#include <fftw3.h>

#include <mutex>

#include "shearlab/common.hpp"

namespace shearlab {

// FFTW planning is not thread-safe; execution on local buffers is.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// In-order unnormalized DFT: out[j] = sum_m in[m] e^{-2 pi i j m / n}.
inline cvector fft_forward(const cvector& in) {
  const int n = static_cast<int>(in.size());
  cvector out(n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_1d(
        n, reinterpret_cast<fftw_complex*>(const_cast<cdouble*>(in.data())),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
        FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

inline cvector fft_inverse(const cvector& in) {
  const int n = static_cast<int>(in.size());
  cvector out(n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_1d(
        n, reinterpret_cast<fftw_complex*>(const_cast<cdouble*>(in.data())),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
        FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  for (auto& x : out) x /= static_cast<double>(n);
  return out;
}

// Row-major 2D transform, both axes forward, unnormalized.
inline cvector fft_forward_2d(const cvector& in, int rows, int cols) {
  cvector out(in.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_2d(
        rows, cols,
        reinterpret_cast<fftw_complex*>(const_cast<cdouble*>(in.data())),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
        FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

// Frequency of DFT bin j for n samples at spacing h (wrapped to +/- Nyquist).
inline double dft_frequency(int j, int n, double h) {
  int jj = (j <= n / 2) ? j : j - n;
  return 2.0 * M_PI * jj / (n * h);
}

inline int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace shearlab
