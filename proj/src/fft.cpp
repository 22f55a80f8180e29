#include "tcbm/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "tcbm/errors.hpp"

namespace tcbm {
namespace {

struct PlanPair {
  fftw_plan backward;
  fftw_plan forward;
};

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

// Plans live for the whole process.
PlanPair plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto* in = fftw_alloc_complex(n);
  auto* out = fftw_alloc_complex(n);
  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p{fftw_plan_dft_1d(len, in, out, FFTW_BACKWARD, flags),
             fftw_plan_dft_1d(len, in, out, FFTW_FORWARD, flags)};
  fftw_free(in);
  fftw_free(out);
  if (p.backward == nullptr || p.forward == nullptr) throw NumericError("FFTW plan creation failed");
  cache.emplace(n, p);
  return p;
}

void run(void* plan, std::span<const std::complex<double>> in, std::span<std::complex<double>> out,
         std::size_t n) {
  if (in.size() != n || out.size() != n) throw DomainError("FFT buffer size mismatch");
  // FFTW never writes the input of an out-of-place c2c transform.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(static_cast<fftw_plan>(plan), src, dst);
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0 || (n & (n - 1)) != 0) throw DomainError("FFT length must be a power of two");
  const PlanPair p = plans_for(n);
  backward_plan_ = p.backward;
  forward_plan_ = p.forward;
}

void Fft::backward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const {
  run(backward_plan_, in, out, n_);
}

void Fft::forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const {
  run(forward_plan_, in, out, n_);
}

}  // namespace tcbm
