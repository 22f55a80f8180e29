#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace tcbm {

// Thin wrapper over cached FFTW plans. Plans are created once per length
// under a lock; execution is thread-safe for distinct buffers.
class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const noexcept { return n_; }

  // out[l] = sum_k in[k] exp(+2 pi i k l / n)
  void backward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const;
  // out[l] = sum_k in[k] exp(-2 pi i k l / n)
  void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const;

 private:
  std::size_t n_;
  void* backward_plan_;
  void* forward_plan_;
};

}  // namespace tcbm
