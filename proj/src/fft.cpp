#include "detail/fft.hpp"

#include <mutex>
#include <stdexcept>

namespace conoflow::detail {

namespace {
std::mutex planner_mutex;  // the FFTW planner is not thread-safe
}

FftPlan::FftPlan(std::vector<int> shape) {
  for (int n : shape) size_ *= static_cast<std::size_t>(n);
  std::lock_guard<std::mutex> lock(planner_mutex);
  auto* buffer = fftw_alloc_complex(size_);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  const int rank = static_cast<int>(shape.size());
  forward_ = fftw_plan_dft(rank, shape.data(), buffer, buffer, FFTW_FORWARD, flags);
  backward_ = fftw_plan_dft(rank, shape.data(), buffer, buffer, FFTW_BACKWARD, flags);
  fftw_free(buffer);
  if (!forward_ || !backward_) throw std::runtime_error("FFTW planning failed");
}

FftPlan::~FftPlan() {
  std::lock_guard<std::mutex> lock(planner_mutex);
  if (forward_) fftw_destroy_plan(forward_);
  if (backward_) fftw_destroy_plan(backward_);
}

void FftPlan::forward(std::complex<double>* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(forward_, p, p);
}

void FftPlan::backward(std::complex<double>* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(backward_, p, p);
}

}  // namespace conoflow::detail
