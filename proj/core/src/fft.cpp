#include "breather/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <new>

namespace breather {
namespace {
// FFTW's planner is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Fft::Impl {
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
  }
};

Fft::Fft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->buf = fftw_alloc_complex(n);
  if (!impl_->buf) throw std::bad_alloc();
  const int ni = static_cast<int>(n);
  impl_->fwd = fftw_plan_dft_1d(ni, impl_->buf, impl_->buf, FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_dft_1d(ni, impl_->buf, impl_->buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  for (std::size_t i = 0; i < n; ++i) impl_->buf[i][0] = impl_->buf[i][1] = 0.0;
}

Fft::~Fft() = default;
Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

std::complex<double>* Fft::data() { return reinterpret_cast<std::complex<double>*>(impl_->buf); }

void Fft::forward() { fftw_execute(impl_->fwd); }
void Fft::backward() { fftw_execute(impl_->bwd); }

}  // namespace breather
