#pragma once

#include <complex>
#include <cstddef>
#include <memory>

namespace breather {

/// In-place 1-D complex FFT of fixed length (unnormalized both ways).
/// Plans use FFTW_ESTIMATE so results are reproducible run to run.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;

  std::size_t size() const { return n_; }
  std::complex<double>* data();

  void forward();
  void backward();

 private:
  struct Impl;
  std::size_t n_ = 0;
  std::unique_ptr<Impl> impl_;
};

}  // namespace breather
