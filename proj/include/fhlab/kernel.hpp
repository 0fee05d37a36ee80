#pragma once

// Fractional heat kernel: pointwise evaluation (closed forms for the Gaussian
// and Cauchy cases, radial Fourier inversion of exp(-t|xi|^{2a}) otherwise),
// spatial derivatives, mass and L^q norms, two-sided bound certification, and
// the weighted-difference integral bounds used by the moment theory.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fhlab/linear_fit.hpp"

namespace fhlab::kernel {

struct KernelSpec {
  double alpha = 1.0;        // in (0, 1]
  int dim = 1;               // 1 or 2
  double fourier_cutoff = 0.0;  // truncation radius in rescaled frequency; 0 = automatic
  int quad_points = 24;      // Gauss-Legendre points per quadrature panel
};

// Raised when the oscillatory-integral engine cannot certify convergence
// (estimated oscillation/panel count exceeds its budget).
struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double auto_cutoff(double alpha);
KernelSpec make_spec(double alpha, int dim, double fourier_cutoff = 0.0, int quad_points = 24);
void validate(const KernelSpec& spec);

// K(t, x); for dim = 2, x is the radius |x|.  Closed forms for alpha = 1 and
// alpha = 1/2; multiplier inversion otherwise.
double eval_kernel(const KernelSpec& spec, double t, double x);
// Always the multiplier-inversion path (used to cross-check closed forms).
double eval_kernel_quadrature(const KernelSpec& spec, double t, double x);

// m-th spatial derivative (multiplier (i xi)^m), dim = 1 only, 0 <= m <= 4.
double deriv_kernel(const KernelSpec& spec, int m, double t, double x);

double kernel_mass(const KernelSpec& spec, double t);
double lq_norm(const KernelSpec& spec, double t, double q);

// min(t / |x|^{d+2a}, t^{-d/(2a)}) — the two-sided envelope (alpha < 1).
double sharp_bound(const KernelSpec& spec, double t, double x);
// |x| * min(t / |x|^{d+2+2a}, t^{-(d+2)/(2a)}) — first-derivative envelope.
double deriv_envelope(const KernelSpec& spec, double t, double x);

struct BoundRatioReport {
  std::vector<double> ts, xs;       // sampled grid
  std::vector<double> kernel_vals;  // row-major over (t, x)
  std::vector<double> bound_vals;
  std::vector<double> ratios;      // kernel / bound
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

BoundRatioReport sharp_bound_ratio(const KernelSpec& spec, const std::vector<double>& ts,
                                   const std::vector<double>& xs);
// Ratio |d_x K| / deriv_envelope; xs must stay away from 0 (derivative root).
BoundRatioReport deriv_envelope_ratio(const KernelSpec& spec, const std::vector<double>& ts,
                                      const std::vector<double>& xs);

struct MassScanReport {
  std::vector<double> ts;
  std::vector<double> masses;
  double worst_abs_err = 0.0;
};
MassScanReport mass_scan(const KernelSpec& spec, const std::vector<double>& ts);

struct SelfSimilarityReport {
  std::vector<double> ts;
  std::vector<double> profile_xs;  // rescaled offsets; physical x = u * t^{1/(2a)}
  std::vector<double> rel_errs;    // row-major over (t, u)
  double max_rel_err = 0.0;
};
SelfSimilarityReport self_similarity_scan(const KernelSpec& spec, const std::vector<double>& ts,
                                          const std::vector<double>& profile_xs);

struct LqScalingReport {
  double q = 2.0;
  std::vector<double> ts;
  std::vector<double> norms;
  fit::LineFit fit;              // log norm vs log t
  double expected_slope = 0.0;   // -d(q-1)/(2 a q)
};
LqScalingReport lq_norm_scaling(const KernelSpec& spec, double q, const std::vector<double>& ts);

// Weighted moments of the |xi|^eps-gradient kernel profile Phi (t = 1 slice):
//   a_const = ∫ |Phi|(w) dw  over R^d,   b_const = ∫ |Phi|(w) |w|^beta dw.
struct ProfileMoments {
  double a_const = 0.0;
  double b_const = 0.0;
};
ProfileMoments profile_moments(const KernelSpec& spec, double eps, double beta);

// L^1 distance between the lag-lambda and lag-1 profiles (lambda >= 1):
//   ∫ |K_eps(lambda, z) - K_eps(1, z)| (1, |z|^beta) dz  after rescaling.
std::pair<double, double> profile_distance(const KernelSpec& spec, double eps, double beta,
                                           double lambda);

struct IntegralBoundReport {
  double epsilon = 0.0;
  double beta = 0.0;
  double gamma_theory = 0.0;  // (alpha - eps) / alpha
  std::vector<double> s_values, t_values;
  std::vector<double> lhs_time_diff;  // ∫_0^s [∫|K_eps(t-r) - K_eps(s-r)|(1+|z|^b)]^2 dr
  std::vector<double> lhs_weighted;   // ∫_0^s [∫|K_eps(s-r)|(1+|z|^b)]^2 dr
  std::vector<double> lhs_recent;     // ∫_s^t [∫|K_eps(t-r)|(1+|z|^b)]^2 dr
  double a_const = 0.0, b_const = 0.0;
  double gamma_hat_diff = 0.0;
  double gamma_hat_recent = 0.0;
  double gamma_hat = 0.0;  // min of the two fits
  double c0_hat = 0.0;     // sup over pairs of lhs_weighted
  double c_hat = 0.0;      // sup of max(diff, recent) / (t-s)^gamma_theory
};

IntegralBoundReport integral_conditions(const KernelSpec& spec, double eps, double beta,
                                        const std::vector<std::pair<double, double>>& pairs);

}  // namespace fhlab::kernel
