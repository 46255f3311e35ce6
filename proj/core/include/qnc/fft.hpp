#pragma once

#include <complex>

namespace qnc::fft {

// Single-precision real FFTs used for the decoder's fast convolutions.
// Plans are created once per size (deterministic estimate-mode planning, so
// results do not depend on runtime measurements) and cached process-wide;
// plan creation is serialized internally, executions are thread-safe.
//
// size must be a power of two.

// out must hold size/2 + 1 bins.
void forward_r2c(int size, const float* in, std::complex<float>* out);

// Unnormalized inverse (FFTW convention): caller divides by size.
// in must hold size/2 + 1 bins; in is preserved.
void inverse_c2r(int size, const std::complex<float>* in, float* out);

}  // namespace qnc::fft
