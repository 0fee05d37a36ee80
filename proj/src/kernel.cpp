#include "fhlab/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fhlab/quadrature.hpp"

namespace fhlab::kernel {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Oscillation budget (periods) for the direct path; beyond it the rotated
// contour is cheaper and better conditioned.
constexpr double kDirectOscBudget = 450.0;
// Cost ceilings before the engine refuses and reports failure.
constexpr double kRotatedOscBudget = 5.0e4;
constexpr long kMaxPanels = 400000;

double budget(const KernelSpec& spec) {
  const double cut = spec.fourier_cutoff > 0.0 ? spec.fourier_cutoff : auto_cutoff(spec.alpha);
  return std::pow(cut, 2.0 * spec.alpha);
}

// Largest X with t*X^{2a} - pw*log(1+X) = amax (integrand magnitude there is
// exp(-amax) relative to its scale); unique positive root.
double solve_truncation(double t, double two_a, double pw, double amax) {
  if (pw == 0.0) return std::pow(amax / t, 1.0 / two_a);
  auto f = [&](double x) { return t * std::pow(x, two_a) - pw * std::log1p(x) - amax; };
  double hi = std::max(1.0, std::pow(amax / t, 1.0 / two_a));
  int guard = 0;
  while (f(hi) < 0.0 && guard++ < 300) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct Cplx {
  double re = 0.0;
  double im = 0.0;
};

// ---- direct path: C = int_0^Xi xi^pw exp(-t xi^{2a}) exp(i x xi) dxi ----

Cplx direct_ray(double two_a, double t, double x, double pw, const quad::GlRule& rule,
                double amax) {
  const double xi_max = solve_truncation(t, two_a, pw, amax);
  const double scale = std::pow(t, -1.0 / two_a);
  const double h_osc = x > 0.0 ? 0.9 * kPi / x : kInf;
  const double h0 = std::min({xi_max, h_osc, scale / 4.0});

  // First panel by double-exponential quadrature: handles the xi^pw factor and
  // the unbounded amplitude slope of exp(-t xi^{2a}) near 0 when 2a < 1.
  const double eps_ts = 1e-13 * std::pow(h0, pw + 1.0) / (pw + 1.0);
  quad::Kahan re_acc, im_acc;
  auto amp = [&](double xi) {
    return (pw == 0.0 ? 1.0 : std::pow(xi, pw)) * std::exp(-t * std::pow(xi, two_a));
  };
  re_acc.add(quad::tanh_sinh([&](double xi) { return amp(xi) * std::cos(x * xi); }, 0.0, h0,
                             eps_ts));
  if (x > 0.0) {
    im_acc.add(quad::tanh_sinh([&](double xi) { return amp(xi) * std::sin(x * xi); }, 0.0, h0,
                               eps_ts));
  }

  double e = h0;
  long panels = 0;
  while (e < xi_max * (1.0 - 1e-12)) {
    const double aslope = two_a * t * std::pow(e, two_a - 1.0);
    const double h_amp = aslope > 0.0 ? 0.6 / aslope : kInf;
    const double h =
        std::min({h_osc, std::max(scale / 4.0, std::min(2.0 * e, h_amp)), xi_max - e});
    const double hm = 0.5 * h, mid = e + hm;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const double xi = mid + hm * rule.x[i];
      const double w = hm * rule.w[i];
      const double a = amp(xi);
      re_acc.add(w * a * std::cos(x * xi));
      if (x > 0.0) im_acc.add(w * a * std::sin(x * xi));
    }
    e += h;
    if (++panels > kMaxPanels) {
      throw QuadratureError("direct frequency integration exceeded its panel budget");
    }
  }
  return {re_acc.value(), im_acc.value()};
}

// ---- rotated path: integrate along xi = s exp(i phi) so the e^{ix xi} factor
// decays like exp(-x s sin(phi)); valid while cos(2a phi) > 0 keeps the
// multiplier decaying on the sector. ----

Cplx rotated_ray(double two_a, double t, double x, double pw, const quad::GlRule& rule,
                 double amax) {
  const double alpha = 0.5 * two_a;
  const double phi_max = 0.999 * std::min(kPi / 2.0, kPi / (4.0 * alpha));

  double best_cost = kInf, phi = 0.0, support = 0.0;
  for (double frac : {1.0, 0.75, 0.5, 0.25}) {
    const double ph = phi_max * frac;
    const double c2 = std::cos(two_a * ph), s2 = std::sin(two_a * ph);
    const double sp = std::sin(ph), cp = std::cos(ph);
    if (c2 <= 0.0) continue;
    auto f = [&](double s) {
      return t * c2 * std::pow(s, two_a) + x * sp * s - pw * std::log1p(s) - amax;
    };
    double hi = std::max(1.0, amax / (x * sp));
    int guard = 0;
    while (f(hi) < 0.0 && guard++ < 300) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < 0.0 ? lo : hi) = mid;
    }
    const double s_end = 0.5 * (lo + hi);
    const double cost = (x * cp * s_end + t * std::abs(s2) * std::pow(s_end, two_a)) / (2.0 * kPi);
    if (cost < best_cost) {
      best_cost = cost;
      phi = ph;
      support = s_end;
    }
  }
  if (!(best_cost < kRotatedOscBudget)) {
    throw QuadratureError("rotated-contour integration cost exceeds budget");
  }

  const double c2 = std::cos(two_a * phi), s2 = std::sin(two_a * phi);
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double scale = std::pow(t, -1.0 / two_a);
  auto f_re = [&](double s) {
    const double a = std::pow(s, pw) * std::exp(-(t * c2 * std::pow(s, two_a) + x * sp * s));
    return a * std::cos(x * cp * s - t * s2 * std::pow(s, two_a));
  };
  auto f_im = [&](double s) {
    const double a = std::pow(s, pw) * std::exp(-(t * c2 * std::pow(s, two_a) + x * sp * s));
    return a * std::sin(x * cp * s - t * s2 * std::pow(s, two_a));
  };

  double h0 = std::min({support / 8.0, scale / 4.0});
  if (x * cp > 0.0) h0 = std::min(h0, 0.9 * kPi / (x * cp));
  if (t * s2 > 0.0) h0 = std::min(h0, std::pow(0.9 * kPi / (t * s2), 1.0 / two_a));
  const double eps_ts = 1e-13 * std::pow(h0, pw + 1.0) / (pw + 1.0);
  quad::Kahan re_acc, im_acc;
  re_acc.add(quad::tanh_sinh(f_re, 0.0, h0, eps_ts));
  im_acc.add(quad::tanh_sinh(f_im, 0.0, h0, eps_ts));

  auto omega = [&](double s) {
    return std::abs(x * cp - two_a * t * s2 * std::pow(s, two_a - 1.0));
  };
  const double h_floor = support * 1e-4;
  double e = h0;
  long panels = 0;
  while (e < support * (1.0 - 1e-12)) {
    const double aslope = x * sp + two_a * t * c2 * std::pow(e, two_a - 1.0);
    double h = std::max(h_floor, std::min(2.0 * e, 0.6 / aslope));
    const double w1 = omega(e);
    if (w1 > 0.0) h = std::min(h, 0.9 * kPi / w1);
    const double w2 = omega(std::min(e + h, support));
    if (w2 > 0.0) h = std::min(h, 0.9 * kPi / w2);
    h = std::max(h, h_floor);
    h = std::min(h, support - e);
    const double hm = 0.5 * h, mid = e + hm;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const double s = mid + hm * rule.x[i];
      const double w = hm * rule.w[i];
      re_acc.add(w * f_re(s));
      im_acc.add(w * f_im(s));
    }
    e += h;
    if (++panels > kMaxPanels) {
      throw QuadratureError("rotated-contour integration exceeded its panel budget");
    }
  }

  const double theta = phi * (pw + 1.0);
  const double cr = std::cos(theta), sr = std::sin(theta);
  const double re = re_acc.value(), im = im_acc.value();
  return {re * cr - im * sr, re * sr + im * cr};
}

Cplx invert_ray(double two_a, double t, double x, double pw, const quad::GlRule& rule,
                double amax) {
  const double xi_max = solve_truncation(t, two_a, pw, amax);
  if (x * xi_max / kPi <= kDirectOscBudget) return direct_ray(two_a, t, x, pw, rule, amax);
  return rotated_ray(two_a, t, x, pw, rule, amax);
}

// ---- dim 2: H = int_0^Xi xi^{1+pw} exp(-t xi^{2a}) J0(r xi) dxi ----

double bessel_ray(double two_a, double t, double r, double pw, const quad::GlRule& rule,
                  double amax) {
  const double xi_max = solve_truncation(t, two_a, pw + 1.0, amax);
  if (r * xi_max / kPi > 2.0e5) {
    throw QuadratureError("radial Bessel integration cost exceeds budget");
  }
  const double scale = std::pow(t, -1.0 / two_a);
  const double h_osc = r > 0.0 ? 0.9 * kPi / r : kInf;
  const double h0 = std::min({xi_max, h_osc, scale / 4.0});
  auto f = [&](double xi) {
    return std::pow(xi, 1.0 + pw) * std::exp(-t * std::pow(xi, two_a)) *
           std::cyl_bessel_j(0.0, r * xi);
  };
  const double eps_ts = 1e-13 * std::pow(h0, pw + 2.0) / (pw + 2.0);
  quad::Kahan acc;
  acc.add(quad::tanh_sinh(f, 0.0, h0, eps_ts));
  double e = h0;
  long panels = 0;
  while (e < xi_max * (1.0 - 1e-12)) {
    const double aslope = two_a * t * std::pow(e, two_a - 1.0);
    const double h_amp = aslope > 0.0 ? 0.6 / aslope : kInf;
    const double h =
        std::min({h_osc, std::max(scale / 4.0, std::min(2.0 * e, h_amp)), xi_max - e});
    const double hm = 0.5 * h, mid = e + hm;
    for (std::size_t i = 0; i < rule.x.size(); ++i) acc.add(hm * rule.w[i] * f(mid + hm * rule.x[i]));
    e += h;
    if (++panels > kMaxPanels) {
      throw QuadratureError("radial Bessel integration exceeded its panel budget");
    }
  }
  return acc.value();
}

const quad::GlRule& panel_rule(const KernelSpec& spec) {
  return quad::gauss_legendre(spec.quad_points);
}

bool is_gaussian(double alpha) { return std::abs(alpha - 1.0) < 1e-12; }
bool is_cauchy(double alpha) { return std::abs(alpha - 0.5) < 1e-12; }

void require_time(double t) {
  if (!(t > 0.0)) throw std::invalid_argument("kernel evaluation requires t > 0");
}

// Geometric panel sweep of f over [0, far], first panel width a0, ratio 1.7.
template <class F>
double geometric_panels(F&& f, double a0, double far, const quad::GlRule& rule) {
  quad::Kahan acc;
  double lo = 0.0, hi = std::min(a0, far);
  while (lo < far * (1.0 - 1e-14)) {
    acc.add(quad::gl_integrate(f, lo, hi, rule));
    lo = hi;
    hi = std::min(far, hi * 1.7);
  }
  return acc.value();
}

// Solve the 3x3 system M c = y (partial pivoting); used for algebraic tail
// completion of dim-2 radial integrals.
std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> m, std::array<double, 3> y) {
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    }
    std::swap(m[col], m[piv]);
    std::swap(y[col], y[piv]);
    if (m[col][col] == 0.0) throw std::runtime_error("singular tail-completion system");
    for (int r = col + 1; r < 3; ++r) {
      const double fac = m[r][col] / m[col][col];
      for (int c = col; c < 3; ++c) m[r][c] -= fac * m[col][c];
      y[r] -= fac * y[col];
    }
  }
  std::array<double, 3> c{};
  for (int r = 2; r >= 0; --r) {
    double s = y[r];
    for (int cc = r + 1; cc < 3; ++cc) s -= m[r][cc] * c[cc];
    c[r] = s / m[r][r];
  }
  return c;
}

// Far radius (in units of t^{1/(2a)}) past which the algebraic kernel tail
// contributes less than ~1e-11 to the mass; alpha < 1.
double mass_far_radius(double alpha) {
  const double two_a = 2.0 * alpha;
  const double c = 3.0 * std::tgamma(1.0 + two_a) * std::sin(kPi * alpha) / kPi;
  return std::pow(std::max(c, 1e-3) / (two_a * 1e-11), 1.0 / two_a);
}

double tail_coefficient(double alpha) {
  const double two_a = 2.0 * alpha;
  return 3.0 * std::tgamma(1.0 + two_a) * std::sin(kPi * alpha) / kPi;
}

// ---- scaled profile of the |xi|^eps-weighted kernel at t = 1, with an
// algebraic two-term tail fitted past the spline window ----

struct Profile {
  int dim = 1;
  double two_a = 2.0;
  double eps = 0.0;
  double window = 20.0;
  double c1 = 0.0, c2 = 0.0;  // tail: c1 w^{-q1} + c2 w^{-q2} on [window, inf)
  double q1 = 0.0, q2 = 0.0;
  double surf = 2.0;  // boundary measure of the unit sphere: 2 (d=1), 2*pi (d=2)
  std::vector<double> zeros;  // sign changes of the spline on (0, window)
  quad::CubicSpline spline;

  double value(double w) const {
    if (w <= window) return spline(w);
    return c1 * std::pow(w, -q1) + c2 * std::pow(w, -q2);
  }
};

double profile_engine(const KernelSpec& spec, double eps, double w) {
  const double two_a = 2.0 * spec.alpha;
  const double amax = budget(spec);
  const quad::GlRule& rule = panel_rule(spec);
  if (spec.dim == 1) return invert_ray(two_a, 1.0, w, eps, rule, amax).re / kPi;
  return bessel_ray(two_a, 1.0, w, eps, rule, amax) / (2.0 * kPi);
}

// Least-squares fit of v ~ c1 w^{-q1} + c2 w^{-q2} over the sample points.
std::pair<double, double> fit_tail(const std::vector<double>& ws, const std::vector<double>& vs,
                                   double q1, double q2) {
  double m11 = 0, m12 = 0, m22 = 0, y1 = 0, y2 = 0, vmax = 0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const double f1 = std::pow(ws[i], -q1), f2 = std::pow(ws[i], -q2);
    m11 += f1 * f1;
    m12 += f1 * f2;
    m22 += f2 * f2;
    y1 += f1 * vs[i];
    y2 += f2 * vs[i];
    vmax = std::max(vmax, std::abs(vs[i]));
  }
  const double det = m11 * m22 - m12 * m12;
  if (vmax < 1e-280 || std::abs(det) < 1e-300) return {0.0, 0.0};
  return {(y1 * m22 - y2 * m12) / det, (m11 * y2 - m12 * y1) / det};
}

Profile build_profile(const KernelSpec& spec, double eps) {
  const double two_a = 2.0 * spec.alpha;
  const double mu1 = eps > 0.0 ? eps : two_a;
  const double q1 = spec.dim + mu1, q2 = q1 + two_a;

  double window = 20.0;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const int n = 2001;
    std::vector<double> ws(n), vals(n);
    for (int i = 0; i < n; ++i) {
      ws[i] = window * i / (n - 1);
      vals[i] = profile_engine(spec, eps, ws[i]);
    }
    std::vector<double> tws = {window, 1.3 * window, 1.69 * window, 2.2 * window};
    std::vector<double> tvs(tws.size());
    for (std::size_t i = 0; i < tws.size(); ++i) tvs[i] = profile_engine(spec, eps, tws[i]);
    auto [c1, c2] = fit_tail(tws, tvs, q1, q2);

    // If the subleading tail term still dominates near the window edge the fit
    // is extrapolating; widen the window once and refit.
    if (attempt == 0 && c1 != 0.0 && c2 != 0.0) {
      const double crossover = std::pow(std::abs(c2 / c1), 1.0 / (q2 - q1));
      if (crossover > 0.8 * window) {
        window *= 1.6;
        continue;
      }
    }

    Profile p{spec.dim, two_a, eps,  window, c1, c2, q1, q2, spec.dim == 1 ? 2.0 : 2.0 * kPi,
              {},       quad::CubicSpline(ws, vals)};
    for (int i = 1; i < n; ++i) {
      if (!(vals[i - 1] * vals[i] < 0.0)) continue;
      double lo = ws[i - 1], hi = ws[i];
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (p.spline(lo) * p.spline(mid) <= 0.0 ? hi : lo) = mid;
      }
      p.zeros.push_back(0.5 * (lo + hi));
    }
    return p;
  }
  throw std::logic_error("unreachable");
}

// integral over [from, inf) of |d1 w^{-q1} + d2 w^{-q2}| w^{dim-1+extra} dw,
// splitting at the sign change if one lies beyond `from`.
double abs_tail_integral(const Profile& p, double d1, double d2, double from, double extra) {
  const double e1 = p.q1 - p.dim - extra, e2 = p.q2 - p.dim - extra;
  if (!(e1 > 0.0) || !(e2 > 0.0)) {
    throw std::invalid_argument("weighted tail integral diverges for this weight exponent");
  }
  auto piece = [&](double a) {  // signed integral over [a, inf)
    return d1 * std::pow(a, -e1) / e1 + d2 * std::pow(a, -e2) / e2;
  };
  double cross = 0.0;
  if (d1 * d2 < 0.0) cross = std::pow(std::abs(d2 / d1), 1.0 / (p.q2 - p.q1));
  if (cross > from) {
    // |d1|-dominated beyond the crossing, |d2|-dominated before it.
    const double inner = piece(from) - piece(cross);
    const double outer = piece(cross);
    return std::abs(inner) + std::abs(outer);
  }
  return std::abs(piece(from));
}

// integral of |g| * w^{dim-1} and |g| * w^{dim-1+beta} over [0, hi] where g is
// smooth per panel; panel edges include detected sign changes of g.
struct AbsAccumulator {
  quad::Kahan plain, weighted;
};

template <class G>
void abs_panels(const G& g, const Profile& p, double beta, double lo_all, double hi_all,
                const std::vector<double>& edges, const quad::GlRule& rule,
                AbsAccumulator& out) {
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    double a = edges[k], b = edges[k + 1];
    if (b <= lo_all || a >= hi_all) continue;
    a = std::max(a, lo_all);
    b = std::min(b, hi_all);
    // locate an interior sign change (endpoints + midpoint probe)
    std::array<double, 3> probes = {a, 0.5 * (a + b), b};
    std::vector<double> cuts = {a};
    for (int seg = 0; seg < 2; ++seg) {
      double u = probes[seg], v = probes[seg + 1];
      if (g(u) * g(v) < 0.0) {
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (u + v);
          (g(u) * g(mid) <= 0.0 ? v : u) = mid;
        }
        cuts.push_back(0.5 * (u + v));
      }
    }
    cuts.push_back(b);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double hm = 0.5 * (cuts[s + 1] - cuts[s]), mid = 0.5 * (cuts[s] + cuts[s + 1]);
      if (!(hm > 0.0)) continue;
      for (std::size_t i = 0; i < rule.x.size(); ++i) {
        const double w = mid + hm * rule.x[i];
        const double gv = std::abs(g(w)) * hm * rule.w[i];
        const double base = p.dim == 1 ? 1.0 : w;
        out.plain.add(gv * base);
        out.weighted.add(gv * base * std::pow(w, beta));
      }
    }
  }
}

std::vector<double> base_edges(const Profile& p, double hi) {
  std::vector<double> edges;
  const double fine_end = std::min(hi, 4.0 * p.window);
  for (double e = 0.0; e < fine_end; e += 0.25) edges.push_back(e);
  edges.push_back(fine_end);
  double e = fine_end;
  while (e < hi * (1.0 - 1e-14)) {
    e = std::min(hi, std::max(e * 1.3, e + 0.25));
    edges.push_back(e);
  }
  return edges;
}

ProfileMoments profile_moments_impl(const Profile& p, double beta) {
  const quad::GlRule& rule = quad::gauss_legendre(16);
  std::vector<double> edges = base_edges(p, p.window);
  edges.insert(edges.end(), p.zeros.begin(), p.zeros.end());
  std::sort(edges.begin(), edges.end());
  AbsAccumulator acc;
  auto g = [&](double w) { return p.spline(w); };
  abs_panels(g, p, beta, 0.0, p.window, edges, rule, acc);
  const double tail0 = abs_tail_integral(p, p.c1, p.c2, p.window, 0.0);
  const double tailb = abs_tail_integral(p, p.c1, p.c2, p.window, beta);
  return {p.surf * (acc.plain.value() + tail0), p.surf * (acc.weighted.value() + tailb)};
}

std::pair<double, double> profile_distance_impl(const Profile& p, double beta, double lambda) {
  if (!(lambda > 1.0 + 1e-14)) return {0.0, 0.0};
  const double arg_scale = std::pow(lambda, -1.0 / p.two_a);
  const double amp_scale = std::pow(lambda, -(p.dim + p.eps) / p.two_a);
  const double w_hi = p.window / arg_scale;  // both factors algebraic beyond here
  auto g = [&](double w) { return amp_scale * p.value(w * arg_scale) - p.value(w); };

  const quad::GlRule& rule = quad::gauss_legendre(12);
  std::vector<double> edges = base_edges(p, w_hi);
  for (double z : p.zeros) {
    edges.push_back(z);
    edges.push_back(z / arg_scale);
  }
  std::sort(edges.begin(), edges.end());
  AbsAccumulator acc;
  abs_panels(g, p, beta, 0.0, w_hi, edges, rule, acc);

  const double k1 = (p.q1 - p.dim - p.eps) / p.two_a;
  const double k2 = (p.q2 - p.dim - p.eps) / p.two_a;
  const double d1 = p.c1 * (std::pow(lambda, k1) - 1.0);
  const double d2 = p.c2 * (std::pow(lambda, k2) - 1.0);
  const double tail0 = abs_tail_integral(p, d1, d2, w_hi, 0.0);
  const double tailb = abs_tail_integral(p, d1, d2, w_hi, beta);
  return {p.surf * (acc.plain.value() + tail0), p.surf * (acc.weighted.value() + tailb)};
}

// Distance table over u = log(lambda): makes the time-difference integrals
// cheap for arbitrarily many (s, t) pairs.
struct DistTable {
  double two_a = 2.0, eps = 0.0, beta = 0.5;
  double a_const = 0.0, b_const = 0.0;
  double lam_max = 1e6;
  quad::CubicSpline d0, db;

  std::pair<double, double> eval(double lambda) const {
    if (!(lambda > 1.0)) return {0.0, 0.0};
    if (lambda >= lam_max) {
      return {a_const * (1.0 + std::pow(lambda, -eps / two_a)),
              b_const * (std::pow(lambda, (beta - eps) / two_a) + 1.0)};
    }
    const double u = std::log(lambda);
    return {d0(u), db(u)};
  }
};

DistTable build_dist_table(const Profile& p, double beta, const ProfileMoments& mom) {
  const int n = 385;
  const double u_max = std::log(1e6);
  std::vector<double> us(n), v0(n), vb(n);
  for (int i = 0; i < n; ++i) {
    us[i] = u_max * i / (n - 1);
    if (i == 0) continue;
    auto [a, b] = profile_distance_impl(p, beta, std::exp(us[i]));
    v0[i] = a;
    vb[i] = b;
  }
  return {p.two_a, p.eps,         beta, mom.a_const, mom.b_const, 1e6,
          quad::CubicSpline(us, v0), quad::CubicSpline(us, vb)};
}

void validate_weight_params(const KernelSpec& spec, double eps, double beta) {
  if (!(eps >= 0.0 && eps < spec.alpha)) {
    throw std::invalid_argument("frequency weight exponent must satisfy 0 <= eps < alpha");
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("spatial weight exponent must satisfy 0 < beta < 1");
  }
  const double mu1 = eps > 0.0 ? eps : 2.0 * spec.alpha;
  if (!(beta < mu1 - 1e-12)) {
    throw std::invalid_argument(
        "weighted profile moment diverges: require beta < eps (or beta < 2*alpha when eps = 0)");
  }
}

}  // namespace

double auto_cutoff(double alpha) { return std::pow(44.0, 1.0 / (2.0 * alpha)); }

KernelSpec make_spec(double alpha, int dim, double fourier_cutoff, int quad_points) {
  KernelSpec spec{alpha, dim, fourier_cutoff, quad_points};
  validate(spec);
  return spec;
}

void validate(const KernelSpec& spec) {
  if (!(spec.alpha > 0.0 && spec.alpha <= 1.0)) {
    throw std::invalid_argument("kernel order alpha must lie in (0, 1]");
  }
  if (spec.dim != 1 && spec.dim != 2) {
    throw std::invalid_argument("kernel dimension must be 1 or 2");
  }
  if (spec.fourier_cutoff < 0.0 || !std::isfinite(spec.fourier_cutoff)) {
    throw std::invalid_argument("fourier_cutoff must be >= 0 (0 selects it automatically)");
  }
  if (spec.quad_points < 4 || spec.quad_points > 128) {
    throw std::invalid_argument("quad_points must lie in [4, 128]");
  }
}

double eval_kernel_quadrature(const KernelSpec& spec, double t, double x) {
  validate(spec);
  require_time(t);
  const double ax = std::abs(x);
  const double two_a = 2.0 * spec.alpha;
  if (spec.dim == 1) return invert_ray(two_a, t, ax, 0.0, panel_rule(spec), budget(spec)).re / kPi;
  return bessel_ray(two_a, t, ax, 0.0, panel_rule(spec), budget(spec)) / (2.0 * kPi);
}

double eval_kernel(const KernelSpec& spec, double t, double x) {
  validate(spec);
  require_time(t);
  const double ax = std::abs(x);
  if (is_gaussian(spec.alpha)) {
    const double arg = ax * ax / (4.0 * t);
    if (spec.dim == 1) return std::exp(-arg) / std::sqrt(4.0 * kPi * t);
    return std::exp(-arg) / (4.0 * kPi * t);
  }
  if (is_cauchy(spec.alpha)) {
    if (spec.dim == 1) return t / (kPi * (t * t + ax * ax));
    return t / (2.0 * kPi * std::pow(t * t + ax * ax, 1.5));
  }
  return eval_kernel_quadrature(spec, t, x);
}

double deriv_kernel(const KernelSpec& spec, int m, double t, double x) {
  validate(spec);
  require_time(t);
  if (spec.dim != 1) {
    throw std::invalid_argument("spatial derivatives are provided in dimension 1 only");
  }
  if (m < 0 || m > 4) throw std::invalid_argument("derivative order must lie in [0, 4]");
  if (m == 0) return eval_kernel(spec, t, x);
  const double ax = std::abs(x);
  const Cplx c = invert_ray(2.0 * spec.alpha, t, ax, static_cast<double>(m), panel_rule(spec),
                            budget(spec));
  double v = 0.0;
  switch (m % 4) {  // real part of i^m C
    case 0: v = c.re; break;
    case 1: v = -c.im; break;
    case 2: v = -c.re; break;
    default: v = c.im; break;
  }
  v /= kPi;
  if (x < 0.0 && (m & 1)) v = -v;
  return v;
}

double kernel_mass(const KernelSpec& spec, double t) {
  validate(spec);
  require_time(t);
  const double two_a = 2.0 * spec.alpha;
  const double sl = std::pow(t, 1.0 / two_a);
  const quad::GlRule& rule = quad::gauss_legendre(32);
  auto k = [&](double x) { return eval_kernel(spec, t, x); };

  if (spec.dim == 1) {
    const double u_far = is_gaussian(spec.alpha) ? 14.0 : mass_far_radius(spec.alpha);
    return 2.0 * geometric_panels(k, 0.5 * sl, u_far * sl, rule);
  }

  auto k2 = [&](double r) { return 2.0 * kPi * r * eval_kernel(spec, t, r); };
  if (is_gaussian(spec.alpha)) return geometric_panels(k2, 0.5 * sl, 14.0 * sl, rule);

  const double big_r = 20.0 * sl;
  const double core = geometric_panels(k2, 0.5 * sl, big_r, rule);
  const std::array<double, 3> rs = {big_r, 1.3 * big_r, 1.7 * big_r};
  std::array<double, 3> exps{}, vals{};
  for (int j = 0; j < 3; ++j) exps[j] = spec.dim + two_a * (j + 1);
  std::array<std::array<double, 3>, 3> m{};
  for (int i = 0; i < 3; ++i) {
    vals[i] = eval_kernel(spec, t, rs[i]);
    for (int j = 0; j < 3; ++j) m[i][j] = std::pow(rs[i], -exps[j]);
  }
  const std::array<double, 3> c = solve3(m, vals);
  double tail = 0.0;
  for (int j = 0; j < 3; ++j) {
    tail += c[j] * 2.0 * kPi * std::pow(big_r, 2.0 - exps[j]) / (exps[j] - 2.0);
  }
  return core + tail;
}

double lq_norm(const KernelSpec& spec, double t, double q) {
  validate(spec);
  require_time(t);
  if (!(q >= 1.0)) throw std::invalid_argument("lq_norm requires q >= 1");
  const double two_a = 2.0 * spec.alpha;
  const double sl = std::pow(t, 1.0 / two_a);
  const quad::GlRule& rule = quad::gauss_legendre(32);
  auto kq = [&](double x) { return std::pow(std::abs(eval_kernel(spec, t, x)), q); };

  if (spec.dim == 1) {
    double u_far;
    if (is_gaussian(spec.alpha)) {
      u_far = std::sqrt(180.0 / q) + 2.0;
    } else {
      const double c = std::max(tail_coefficient(spec.alpha), 1e-3);
      u_far = std::pow(std::pow(c, q) / 1e-12, 1.0 / (q * (1.0 + two_a) - 1.0));
      u_far = std::min(u_far, 1e30);
    }
    return std::pow(2.0 * geometric_panels(kq, 0.5 * sl, u_far * sl, rule), 1.0 / q);
  }

  auto kq2 = [&](double r) { return 2.0 * kPi * r * kq(r); };
  if (is_gaussian(spec.alpha)) {
    const double u_far = std::sqrt(180.0 / q) + 2.0;
    return std::pow(geometric_panels(kq2, 0.5 * sl, u_far * sl, rule), 1.0 / q);
  }
  const double big_r = 20.0 * sl;
  const double core = geometric_panels(kq2, 0.5 * sl, big_r, rule);
  const std::array<double, 3> rs = {big_r, 1.3 * big_r, 1.7 * big_r};
  std::array<double, 3> exps{}, vals{};
  for (int j = 0; j < 3; ++j) exps[j] = q * (spec.dim + two_a) + two_a * j;
  std::array<std::array<double, 3>, 3> m{};
  for (int i = 0; i < 3; ++i) {
    vals[i] = kq(rs[i]);
    for (int j = 0; j < 3; ++j) m[i][j] = std::pow(rs[i], -exps[j]);
  }
  const std::array<double, 3> c = solve3(m, vals);
  double tail = 0.0;
  for (int j = 0; j < 3; ++j) {
    tail += c[j] * 2.0 * kPi * std::pow(big_r, 2.0 - exps[j]) / (exps[j] - 2.0);
  }
  return std::pow(core + tail, 1.0 / q);
}

double sharp_bound(const KernelSpec& spec, double t, double x) {
  validate(spec);
  require_time(t);
  if (spec.alpha > 1.0 - 1e-9) {
    throw std::invalid_argument(
        "the algebraic two-sided envelope holds for alpha < 1 only (the alpha = 1 kernel decays "
        "faster than any power)");
  }
  const double ax = std::abs(x);
  const double diag = std::pow(t, -spec.dim / (2.0 * spec.alpha));
  if (ax == 0.0) return diag;
  return std::min(t / std::pow(ax, spec.dim + 2.0 * spec.alpha), diag);
}

double deriv_envelope(const KernelSpec& spec, double t, double x) {
  validate(spec);
  require_time(t);
  if (spec.alpha > 1.0 - 1e-9) {
    throw std::invalid_argument(
        "the algebraic derivative envelope holds for alpha < 1 only (the alpha = 1 kernel decays "
        "faster than any power)");
  }
  const double ax = std::abs(x);
  const double dd = spec.dim + 2.0;
  const double diag = std::pow(t, -dd / (2.0 * spec.alpha));
  if (ax == 0.0) return 0.0;
  return ax * std::min(t / std::pow(ax, dd + 2.0 * spec.alpha), diag);
}

namespace {

template <class KernelFn, class BoundFn>
BoundRatioReport ratio_report(const std::vector<double>& ts, const std::vector<double>& xs,
                              KernelFn&& kf, BoundFn&& bf) {
  if (ts.empty() || xs.empty()) throw std::invalid_argument("ratio scan needs nonempty grids");
  BoundRatioReport rep;
  rep.ts = ts;
  rep.xs = xs;
  rep.min_ratio = kInf;
  rep.max_ratio = -kInf;
  for (double t : ts) {
    for (double x : xs) {
      const double k = kf(t, x);
      const double b = bf(t, x);
      if (!(b > 0.0)) throw std::invalid_argument("envelope vanishes on the requested grid");
      const double r = k / b;
      rep.kernel_vals.push_back(k);
      rep.bound_vals.push_back(b);
      rep.ratios.push_back(r);
      rep.min_ratio = std::min(rep.min_ratio, r);
      rep.max_ratio = std::max(rep.max_ratio, r);
    }
  }
  return rep;
}

}  // namespace

BoundRatioReport sharp_bound_ratio(const KernelSpec& spec, const std::vector<double>& ts,
                                   const std::vector<double>& xs) {
  return ratio_report(
      ts, xs, [&](double t, double x) { return eval_kernel(spec, t, x); },
      [&](double t, double x) { return sharp_bound(spec, t, x); });
}

BoundRatioReport deriv_envelope_ratio(const KernelSpec& spec, const std::vector<double>& ts,
                                      const std::vector<double>& xs) {
  return ratio_report(
      ts, xs, [&](double t, double x) { return std::abs(deriv_kernel(spec, 1, t, x)); },
      [&](double t, double x) { return deriv_envelope(spec, t, x); });
}

MassScanReport mass_scan(const KernelSpec& spec, const std::vector<double>& ts) {
  if (ts.empty()) throw std::invalid_argument("mass scan needs a nonempty time grid");
  MassScanReport rep;
  rep.ts = ts;
  for (double t : ts) {
    rep.masses.push_back(kernel_mass(spec, t));
    rep.worst_abs_err = std::max(rep.worst_abs_err, std::abs(rep.masses.back() - 1.0));
  }
  return rep;
}

SelfSimilarityReport self_similarity_scan(const KernelSpec& spec, const std::vector<double>& ts,
                                          const std::vector<double>& profile_xs) {
  if (ts.empty() || profile_xs.empty()) {
    throw std::invalid_argument("self-similarity scan needs nonempty grids");
  }
  SelfSimilarityReport rep;
  rep.ts = ts;
  rep.profile_xs = profile_xs;
  const double two_a = 2.0 * spec.alpha;
  for (double t : ts) {
    const double sl = std::pow(t, 1.0 / two_a);
    const double amp = std::pow(t, -spec.dim / two_a);
    for (double u : profile_xs) {
      const double lhs = eval_kernel(spec, t, u * sl);
      const double rhs = amp * eval_kernel(spec, 1.0, u);
      const double rel = std::abs(lhs - rhs) / std::abs(rhs);
      rep.rel_errs.push_back(rel);
      rep.max_rel_err = std::max(rep.max_rel_err, rel);
    }
  }
  return rep;
}

LqScalingReport lq_norm_scaling(const KernelSpec& spec, double q, const std::vector<double>& ts) {
  if (ts.size() < 2) throw std::invalid_argument("norm scaling fit needs at least two times");
  LqScalingReport rep;
  rep.q = q;
  rep.ts = ts;
  for (double t : ts) rep.norms.push_back(lq_norm(spec, t, q));
  rep.fit = fit::fit_loglog(ts, rep.norms).line;
  rep.expected_slope = -spec.dim * (q - 1.0) / (2.0 * spec.alpha * q);
  return rep;
}

ProfileMoments profile_moments(const KernelSpec& spec, double eps, double beta) {
  validate(spec);
  validate_weight_params(spec, eps, beta);
  const Profile p = build_profile(spec, eps);
  return profile_moments_impl(p, beta);
}

std::pair<double, double> profile_distance(const KernelSpec& spec, double eps, double beta,
                                           double lambda) {
  validate(spec);
  validate_weight_params(spec, eps, beta);
  if (!(lambda >= 1.0)) throw std::invalid_argument("profile distance requires lambda >= 1");
  const Profile p = build_profile(spec, eps);
  return profile_distance_impl(p, beta, lambda);
}

IntegralBoundReport integral_conditions(const KernelSpec& spec, double eps, double beta,
                                        const std::vector<std::pair<double, double>>& pairs) {
  validate(spec);
  validate_weight_params(spec, eps, beta);
  if (pairs.size() < 3) {
    throw std::invalid_argument("integral-condition scan needs at least 3 (s, t) pairs");
  }
  for (auto& [s, t] : pairs) {
    if (!(0.0 < s && s < t)) {
      throw std::invalid_argument("each (s, t) pair must satisfy 0 < s < t");
    }
  }

  const double alpha = spec.alpha;
  const double two_a = 2.0 * alpha;
  const Profile prof = build_profile(spec, eps);
  const ProfileMoments mom = profile_moments_impl(prof, beta);
  const DistTable table = build_dist_table(prof, beta, mom);
  const double a2 = mom.a_const * mom.a_const, b2 = mom.b_const * mom.b_const;
  const double ab = mom.a_const * mom.b_const;

  // closed form of int_0^s [A u^{-eps/2a} + B u^{(beta-eps)/2a}]^2 du
  const double e1 = 1.0 - eps / alpha;
  const double e2 = 1.0 + (beta - 2.0 * eps) / two_a;
  const double e3 = 1.0 + (beta - eps) / alpha;
  auto weighted_window = [&](double s) {
    return a2 * std::pow(s, e1) / e1 + 2.0 * ab * std::pow(s, e2) / e2 +
           b2 * std::pow(s, e3) / e3;
  };

  IntegralBoundReport rep;
  rep.epsilon = eps;
  rep.beta = beta;
  rep.gamma_theory = (alpha - eps) / alpha;
  rep.a_const = mom.a_const;
  rep.b_const = mom.b_const;

  std::vector<double> deltas;
  const double eps_abs = 1e-10 * (1.0 + a2 + b2);
  for (auto& [s, t] : pairs) {
    rep.s_values.push_back(s);
    rep.t_values.push_back(t);
    const double delta = t - s;
    deltas.push_back(delta);

    auto j_sq = [&](double r) {
      const double b = s - r;
      auto [d0, db] = table.eval((t - r) / b);
      const double j = std::pow(b, -eps / two_a) * (d0 + std::pow(b, beta / two_a) * db);
      return j * j;
    };
    rep.lhs_time_diff.push_back(quad::tanh_sinh(j_sq, 0.0, s, eps_abs));
    rep.lhs_weighted.push_back(weighted_window(s));
    rep.lhs_recent.push_back(weighted_window(delta));
  }

  rep.gamma_hat_diff = fit::fit_loglog(deltas, rep.lhs_time_diff).line.slope;
  rep.gamma_hat_recent = fit::fit_loglog(deltas, rep.lhs_recent).line.slope;
  rep.gamma_hat = std::min(rep.gamma_hat_diff, rep.gamma_hat_recent);
  rep.c0_hat = *std::max_element(rep.lhs_weighted.begin(), rep.lhs_weighted.end());
  rep.c_hat = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double num = std::max(rep.lhs_time_diff[i], rep.lhs_recent[i]);
    rep.c_hat = std::max(rep.c_hat, num / std::pow(deltas[i], rep.gamma_theory));
  }
  return rep;
}

}  // namespace fhlab::kernel
