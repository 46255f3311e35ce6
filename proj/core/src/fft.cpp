#include "qnc/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace qnc::fft {
namespace {

struct PlanPair {
  fftwf_plan fwd = nullptr;
  fftwf_plan inv = nullptr;
};

// FFTW planning is not thread-safe; new-array execution is.  Plans are made
// with FFTW_UNALIGNED so they accept any caller buffers.
std::mutex plan_mutex;
std::unordered_map<int, PlanPair>& plan_cache() {
  static std::unordered_map<int, PlanPair> cache;
  return cache;
}

PlanPair plans_for(int size) {
  if (size < 2 || (size & (size - 1)) != 0)
    throw std::invalid_argument("fft: size must be a power of two >= 2");
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(size);
  if (it != cache.end()) return it->second;

  std::vector<float> real(static_cast<std::size_t>(size));
  std::vector<fftwf_complex> cplx(static_cast<std::size_t>(size / 2 + 1));
  PlanPair p;
  p.fwd = fftwf_plan_dft_r2c_1d(size, real.data(), cplx.data(),
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
  // FFTW_PRESERVE_INPUT keeps the spectrum intact across the c2r transform
  // (the default c2r behavior destroys its input).
  p.inv = fftwf_plan_dft_c2r_1d(size, cplx.data(), real.data(),
                                FFTW_ESTIMATE | FFTW_UNALIGNED |
                                    FFTW_PRESERVE_INPUT);
  if (p.fwd == nullptr || p.inv == nullptr)
    throw std::runtime_error("fft: plan creation failed");
  cache.emplace(size, p);
  return p;
}

}  // namespace

void forward_r2c(int size, const float* in, std::complex<float>* out) {
  PlanPair p = plans_for(size);
  fftwf_execute_dft_r2c(p.fwd, const_cast<float*>(in),
                        reinterpret_cast<fftwf_complex*>(out));
}

void inverse_c2r(int size, const std::complex<float>* in, float* out) {
  PlanPair p = plans_for(size);
  fftwf_execute_dft_c2r(
      p.inv,
      reinterpret_cast<fftwf_complex*>(const_cast<std::complex<float>*>(in)),
      out);
}

}  // namespace qnc::fft
