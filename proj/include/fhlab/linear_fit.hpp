#pragma once

// Ordinary least squares line fits, used everywhere a scaling exponent is
// extracted from (scale, statistic) pairs on log-log axes.

#include <vector>

namespace fhlab::fit {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;  // OLS standard error of the slope
  int n_points = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct LogLogFit {
  LineFit line;
  int dropped = 0;  // points skipped because x or y was not positive
};

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fhlab::fit
