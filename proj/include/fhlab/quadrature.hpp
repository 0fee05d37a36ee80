#pragma once

// Quadrature primitives shared by the kernel and report modules:
//   - cached Gauss-Legendre rules (panel integration of smooth integrands),
//   - tanh-sinh (double exponential) rule for integrable endpoint
//     singularities such as |x|^{2a-1} branch points,
//   - natural cubic spline for tabulated smooth profiles,
//   - Kahan compensated accumulation for long panel sums.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fhlab::quad {

struct GlRule {
  std::vector<double> x;  // nodes on (-1, 1)
  std::vector<double> w;
};

// Cached per point count; thread-safe.
const GlRule& gauss_legendre(int n);

template <class F>
double gl_integrate(F&& f, double a, double b, const GlRule& rule) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * f(c + h * rule.x[i]);
  return s * h;
}

// Kahan-Babuska-Neumaier variant: unlike classic Kahan it keeps the
// compensation when a later addend cancels the accumulator itself.
struct Kahan {
  double sum = 0.0, carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

// Double-exponential rule on [a, b].  Handles integrable algebraic
// singularities at either endpoint; nodes are generated as offsets from the
// endpoints so that f is never called exactly at a or b.
template <class F>
double tanh_sinh(F&& f, double a, double b, double eps_abs, int max_level = 10) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  constexpr double kPiHalf = 1.5707963267948966;
  constexpr double kTMax = 6.1;

  // Returns weight and node positions (built from the distance to the
  // endpoint, which stays accurate when tanh saturates).
  auto eval_pair = [&](double t, double& contrib) -> bool {
    const double u = kPiHalf * std::sinh(t);
    const double e2 = std::exp(-2.0 * u);
    const double dist = 2.0 * e2 / (1.0 + e2);  // 1 - tanh(u)
    const double sech = 2.0 / (std::exp(u) + std::exp(-u));
    const double w = kPiHalf * std::cosh(t) * sech * sech;
    if (w * half == 0.0 || dist * half == 0.0) return false;
    const double xr = b - half * dist;
    const double xl = a + half * dist;
    // Once the offset is below one ulp of an endpoint the node rounds onto
    // it; evaluating a singular integrand there would poison the sum, and the
    // true contribution beyond that point is below double precision anyway.
    // Each side is dropped independently: one endpoint collapsing must not
    // discard the still-resolvable nodes approaching the other one.
    contrib = 0.0;
    bool any = false;
    if (xr < b) {
      contrib += w * f(xr);
      any = true;
    }
    if (xl > a) {
      contrib += w * f(xl);
      any = true;
    }
    return any;
  };

  double h = 1.0;
  Kahan acc;
  {
    const double u0 = 0.0;
    (void)u0;
    acc.add(kPiHalf * f(mid));  // t = 0 node: weight pi/2, x = mid
    for (int j = 1; j * h <= kTMax; ++j) {
      double contrib = 0.0;
      if (eval_pair(j * h, contrib)) acc.add(contrib);
    }
  }
  double prev = acc.value() * h * half;
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    for (int j = 1; j * h <= kTMax; j += 2) {
      double contrib = 0.0;
      if (eval_pair(j * h, contrib)) acc.add(contrib);
    }
    const double cur = acc.value() * h * half;
    if (level >= 3 && std::abs(cur - prev) <= std::max(eps_abs, 1e-15 * std::abs(cur)))
      return cur;
    prev = cur;
  }
  return prev;
}

class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> xs, std::vector<double> ys);
  double operator()(double x) const;
  double x_min() const { return xs_.front(); }
  double x_max() const { return xs_.back(); }

 private:
  std::vector<double> xs_, ys_, m_;  // m_ = second derivatives (natural BCs)
};

}  // namespace fhlab::quad
