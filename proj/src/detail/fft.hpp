#pragma once

#include <complex>
#include <vector>

#include <fftw3.h>

namespace conoflow::detail {

/// In-place complex FFT of fixed shape. Planned with FFTW_ESTIMATE so the
/// same shape always yields the same plan and bit-identical output.
/// execute() may be called concurrently on distinct buffers.
class FftPlan {
 public:
  explicit FftPlan(std::vector<int> shape);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  /// Unnormalised: backward(forward(a)) = size() * a.
  void forward(std::complex<double>* data) const;
  void backward(std::complex<double>* data) const;
  std::size_t size() const { return size_; }

 private:
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
  std::size_t size_ = 1;
};

}  // namespace conoflow::detail
