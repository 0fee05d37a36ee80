#include "fhlab/linear_fit.hpp"

#include <cmath>
#include <stdexcept>

namespace fhlab::fit {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  const int n = static_cast<int>(x.size());
  if (n < 2) throw std::invalid_argument("fit_line: need at least 2 points");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.n_points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
  f.slope_stderr = (n > 2) ? std::sqrt(std::max(ss_res, 0.0) / ((n - 2) * sxx)) : 0.0;
  return f;
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
  LogLogFit out;
  std::vector<double> lx, ly;
  lx.reserve(x.size());
  ly.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    } else {
      ++out.dropped;
    }
  }
  out.line = fit_line(lx, ly);
  return out;
}

}  // namespace fhlab::fit
