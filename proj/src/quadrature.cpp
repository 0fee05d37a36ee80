#include "fhlab/quadrature.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace fhlab::quad {

namespace {

GlRule build_rule(int n) {
  if (n < 2) throw std::invalid_argument("gauss_legendre: need at least 2 points");
  GlRule r;
  r.x.resize(n);
  r.w.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on the Legendre recurrence.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        // one polishing pass after convergence
        double q0 = 1.0, q1 = x;
        for (int k = 2; k <= n; ++k) {
          const double q2 = ((2.0 * k - 1.0) * x * q1 - (k - 1.0) * q0) / k;
          q0 = q1;
          q1 = q2;
        }
        dp = n * (x * q1 - q0) / (x * x - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.x[i] = -x;
    r.w[i] = w;
    r.x[n - 1 - i] = x;
    r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

}  // namespace

const GlRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GlRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

CubicSpline::CubicSpline(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  const std::size_t n = xs_.size();
  if (n < 3 || ys_.size() != n) throw std::invalid_argument("CubicSpline: need >= 3 points");
  for (std::size_t i = 1; i < n; ++i)
    if (!(xs_[i] > xs_[i - 1])) throw std::invalid_argument("CubicSpline: x not increasing");
  // Natural spline: solve tridiagonal system for second derivatives.
  m_.assign(n, 0.0);
  std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
  diag[0] = 1.0;
  diag[n - 1] = 1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = xs_[i] - xs_[i - 1];
    const double h1 = xs_[i + 1] - xs_[i];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((ys_[i + 1] - ys_[i]) / h1 - (ys_[i] - ys_[i - 1]) / h0);
  }
  // Forward elimination (lower entry at row i is h0 = xs_[i]-xs_[i-1]).
  std::vector<double> d(diag), r(rhs);
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double h0 = xs_[i] - xs_[i - 1];
    const double f = h0 / d[i - 1];
    d[i] -= f * upper[i - 1];
    r[i] -= f * r[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m_[i] = (r[i] - upper[i] * m_[i + 1]) / d[i];
    if (i == 1) break;
  }
}

double CubicSpline::operator()(double x) const {
  const std::size_t n = xs_.size();
  if (x <= xs_.front()) x = xs_.front();
  if (x >= xs_.back()) x = xs_.back();
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  std::size_t i = (it == xs_.begin()) ? 0 : static_cast<std::size_t>(it - xs_.begin()) - 1;
  if (i >= n - 1) i = n - 2;
  const double h = xs_[i + 1] - xs_[i];
  const double a = (xs_[i + 1] - x) / h;
  const double b = (x - xs_[i]) / h;
  return a * ys_[i] + b * ys_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

}  // namespace fhlab::quad
