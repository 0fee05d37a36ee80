#pragma once

// Radix-2 FFT with a reusable plan (precomputed bit-reversal permutation and
// twiddle table) plus a DST-I helper for the Dirichlet sine basis.  Kept
// in-tree so spectral arithmetic is bit-identical across thread counts and
// platforms with the same libm.

#include <complex>
#include <cstddef>
#include <vector>

namespace fhlab::fft {

class FftPlan {
 public:
  explicit FftPlan(std::size_t n);  // n must be a power of two, n >= 2
  std::size_t size() const { return n_; }
  void forward(std::complex<double>* a) const;  // sum_j a_j e^{-2 pi i jk/n}
  void inverse(std::complex<double>* a) const;  // (1/n) sum_k a_k e^{+2 pi i jk/n}

 private:
  void transform(std::complex<double>* a, bool inv) const;
  std::size_t n_ = 0;
  std::vector<std::size_t> rev_;
  std::vector<std::complex<double>> tw_;  // e^{-2 pi i k / n}, k = 0..n/2-1
};

bool is_power_of_two(std::size_t n);

// DST-I: out_k = sum_{i=1}^{n} in_i sin(pi k i / (n+1)), k = 1..n.
// Vectors are length n (interior points only).  O(n^2) with a cached sine
// table; used for the Dirichlet semigroup where n stays small.
class DstPlan {
 public:
  explicit DstPlan(std::size_t n_interior);
  std::size_t size() const { return n_; }
  void apply(const std::vector<double>& in, std::vector<double>& out) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> sin_;  // sin(pi j / (n+1)) for j in [0, 2(n+1))
};

}  // namespace fhlab::fft
