#include "fhlab/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace fhlab::fft {

bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (!is_power_of_two(n) || n < 2) throw std::invalid_argument("FftPlan: n must be a power of two >= 2");
  rev_.resize(n);
  std::size_t lg = 0;
  while ((std::size_t{1} << lg) < n) ++lg;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < lg; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (lg - 1 - b);
    rev_[i] = r;
  }
  tw_.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double ang = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
    tw_[k] = std::complex<double>(std::cos(ang), std::sin(ang));
  }
}

void FftPlan::transform(std::complex<double>* a, bool inv) const {
  for (std::size_t i = 0; i < n_; ++i)
    if (rev_[i] > i) std::swap(a[i], a[rev_[i]]);
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> w = tw_[k * stride];
        if (inv) w = std::conj(w);
        const std::complex<double> u = a[start + k];
        const std::complex<double> v = a[start + k + len / 2] * w;
        a[start + k] = u + v;
        a[start + k + len / 2] = u - v;
      }
    }
  }
  if (inv) {
    const double s = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) a[i] *= s;
  }
}

void FftPlan::forward(std::complex<double>* a) const { transform(a, false); }
void FftPlan::inverse(std::complex<double>* a) const { transform(a, true); }

DstPlan::DstPlan(std::size_t n_interior) : n_(n_interior) {
  if (n_ < 1) throw std::invalid_argument("DstPlan: need n >= 1");
  const std::size_t period = 2 * (n_ + 1);
  sin_.resize(period);
  for (std::size_t j = 0; j < period; ++j)
    sin_[j] = std::sin(M_PI * static_cast<double>(j) / static_cast<double>(n_ + 1));
}

void DstPlan::apply(const std::vector<double>& in, std::vector<double>& out) const {
  if (in.size() != n_) throw std::invalid_argument("DstPlan: input size mismatch");
  out.assign(n_, 0.0);
  const std::size_t period = 2 * (n_ + 1);
  for (std::size_t k = 1; k <= n_; ++k) {
    double s = 0.0;
    for (std::size_t i = 1; i <= n_; ++i) s += in[i - 1] * sin_[(k * i) % period];
    out[k - 1] = s;
  }
}

}  // namespace fhlab::fft
