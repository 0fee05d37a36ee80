#include "fhlab/seminorms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fhlab/philox.hpp"

namespace fhlab::seminorms {
namespace {

double interval_overlap(double a_lo, double a_hi, double b_lo, double b_hi) {
  return std::max(0.0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
}

void require_radii(const DomainSpec& domain, const std::vector<double>& radii) {
  if (radii.empty()) throw std::invalid_argument("at least one radius is required");
  for (double r : radii) {
    if (!(r > 0.0)) throw std::invalid_argument("radii must be positive");
    if (r > domain.diameter() * (1.0 + 1e-12)) {
      throw std::invalid_argument("radii must not exceed the domain diameter");
    }
  }
}

}  // namespace

double parabolic_dist(const ParabolicPoint& a, const ParabolicPoint& b) {
  return std::max(std::abs(a.x - b.x), std::sqrt(std::abs(a.t - b.t)));
}

bool Cylinder::contains(const ParabolicPoint& y) const {
  return parabolic_dist(center, y) < radius;
}

double Cylinder::measure() const { return 2.0 * radius * radius * (2.0 * radius); }

Cylinder cylinder(const ParabolicPoint& center, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("cylinder radius must be positive");
  return {center, c};
}

double DomainSpec::diameter() const {
  return std::max(x_max - x_min, std::sqrt(std::max(0.0, t_max - t_min)));
}

DomainSpec domain_of(const fields::FieldSample& field) {
  DomainSpec d;
  d.t_min = 0.0;
  d.t_max = field.grid.t_max;
  d.x_min = -0.5 * field.grid.domain_len;
  d.x_max = 0.5 * field.grid.domain_len - field.grid.dx();
  return d;
}

SeminormReport campanato_seminorm(const fields::FieldSample& field, const DomainSpec& domain,
                                  double p, double theta,
                                  const std::vector<ParabolicPoint>& centers,
                                  const std::vector<double>& radii) {
  fields::validate_sample(field);
  if (!(p >= 1.0)) throw std::invalid_argument("campanato_seminorm requires p >= 1");
  if (centers.empty()) throw std::invalid_argument("at least one center is required");
  require_radii(domain, radii);

  const int rows = field.stored_rows();
  const int nx = field.grid.nx;
  const double h_t = field.store_every * field.grid.dt();
  const double dx = field.grid.dx();
  const std::vector<double> xs = field.grid.xs();

  SeminormReport rep;
  rep.p = p;
  rep.theta = theta;
  rep.resolution = *std::min_element(radii.begin(), radii.end());

  for (const ParabolicPoint& c : centers) {
    for (double rho : radii) {
      const double a_t = std::max(domain.t_min, c.t - rho * rho);
      const double b_t = std::min(domain.t_max, c.t + rho * rho);
      const double a_x = std::max(domain.x_min, c.x - rho);
      const double b_x = std::min(domain.x_max, c.x + rho);
      if (!(b_t > a_t) || !(b_x > a_x)) {
        ++rep.skipped;
        continue;
      }
      const double measure = (b_t - a_t) * (b_x - a_x);

      // participating cell ranges
      int r_lo = static_cast<int>(std::floor((a_t - 0.5 * h_t) / h_t));
      int r_hi = static_cast<int>(std::ceil((b_t + 0.5 * h_t) / h_t));
      r_lo = std::max(r_lo, 0);
      r_hi = std::min(r_hi, rows - 1);
      int j_lo = static_cast<int>(std::ceil((a_x - xs[0]) / dx - 1e-12));
      int j_hi = static_cast<int>(std::floor((b_x - xs[0]) / dx + 1e-12));
      j_lo = std::max(j_lo, 0);
      j_hi = std::min(j_hi, nx - 1);
      if (r_lo > r_hi || j_lo > j_hi) {
        ++rep.skipped;
        continue;
      }

      double wsum = 0.0, usum = 0.0;
      std::vector<double> wts(r_hi - r_lo + 1);
      for (int r = r_lo; r <= r_hi; ++r) {
        const double tr = r * h_t;
        wts[r - r_lo] = interval_overlap(tr - 0.5 * h_t, tr + 0.5 * h_t, a_t, b_t);
      }
      for (int r = r_lo; r <= r_hi; ++r) {
        const double w = wts[r - r_lo];
        if (w == 0.0) continue;
        for (int j = j_lo; j <= j_hi; ++j) {
          wsum += w * dx;
          usum += w * dx * field.at(r, j);
        }
      }
      if (!(wsum > 0.0)) {
        ++rep.skipped;
        continue;
      }
      const double mean = usum / wsum;
      double ip = 0.0;
      for (int r = r_lo; r <= r_hi; ++r) {
        const double w = wts[r - r_lo];
        if (w == 0.0) continue;
        for (int j = j_lo; j <= j_hi; ++j) {
          ip += w * dx * std::pow(std::abs(field.at(r, j) - mean), p);
        }
      }
      ++rep.evaluated;
      const double cand = std::pow(std::pow(measure, -theta) * ip, 1.0 / p);
      if (cand > rep.value) {
        rep.value = cand;
        rep.witness_a = c;
        rep.witness_radius = rho;
      }
    }
  }
  return rep;
}

SeminormReport holder_seminorm(const fields::FieldSample& field, const DomainSpec& domain,
                               double gamma_exp, int extra_random_pairs,
                               std::uint64_t pair_seed) {
  fields::validate_sample(field);
  if (!(gamma_exp > 0.0 && gamma_exp <= 1.0)) {
    throw std::invalid_argument("holder_seminorm requires gamma in (0, 1]");
  }
  const int rows = field.stored_rows();
  const int nx = field.grid.nx;
  const double h_t = field.store_every * field.grid.dt();
  const double dx = field.grid.dx();
  const std::vector<double> xs = field.grid.xs();

  SeminormReport rep;
  rep.gamma_exp = gamma_exp;
  rep.resolution = std::min(dx, std::sqrt(h_t));

  auto in_domain = [&](int r, int j) {
    const double t = r * h_t, x = xs[j];
    return t >= domain.t_min - 1e-12 && t <= domain.t_max + 1e-12 &&
           x >= domain.x_min - 1e-12 && x <= domain.x_max + 1e-12;
  };
  auto consider = [&](int ra, int ja, int rb, int jb) {
    if (ra == rb && ja == jb) return;
    if (!in_domain(ra, ja) || !in_domain(rb, jb)) return;
    const ParabolicPoint a{ra * h_t, xs[ja]}, b{rb * h_t, xs[jb]};
    const double dist = parabolic_dist(a, b);
    if (!(dist > 0.0)) return;
    const double cand = std::abs(field.at(ra, ja) - field.at(rb, jb)) /
                        std::pow(dist, gamma_exp);
    ++rep.evaluated;
    if (cand > rep.value) {
      rep.value = cand;
      rep.witness_a = a;
      rep.witness_b = b;
    }
  };

  // all dyadic index lags in space, time, and jointly
  for (int lag = 1; lag < nx; lag *= 2) {
    for (int r = 0; r < rows; ++r) {
      for (int j = 0; j + lag < nx; ++j) consider(r, j, r, j + lag);
    }
  }
  for (int lag = 1; lag < rows; lag *= 2) {
    for (int r = 0; r + lag < rows; ++r) {
      for (int j = 0; j < nx; ++j) consider(r, j, r + lag, j);
    }
  }
  for (int lag = 1; lag < std::min(rows, nx); lag *= 2) {
    for (int r = 0; r + lag < rows; ++r) {
      for (int j = 0; j + lag < nx; ++j) consider(r, j, r + lag, j + lag);
    }
  }
  // uniform random pairs
  for (int i = 0; i < extra_random_pairs; ++i) {
    double u1, u2, u3, u4;
    rng::uniform_pair(pair_seed, rng::Stream::pair_sampling, 0, 2 * i, u1, u2);
    rng::uniform_pair(pair_seed, rng::Stream::pair_sampling, 0, 2 * i + 1, u3, u4);
    consider(static_cast<int>(u1 * rows) % rows, static_cast<int>(u2 * nx) % nx,
             static_cast<int>(u3 * rows) % rows, static_cast<int>(u4 * nx) % nx);
  }
  return rep;
}

double atype_constant(const DomainSpec& domain, const std::vector<ParabolicPoint>& centers,
                      const std::vector<double>& radii) {
  if (centers.empty()) throw std::invalid_argument("at least one center is required");
  require_radii(domain, radii);
  double worst = 1.0;
  for (const ParabolicPoint& c : centers) {
    for (double rho : radii) {
      const double t_ov =
          interval_overlap(c.t - rho * rho, c.t + rho * rho, domain.t_min, domain.t_max);
      const double x_ov = interval_overlap(c.x - rho, c.x + rho, domain.x_min, domain.x_max);
      const double ratio = (t_ov * x_ov) / (2.0 * rho * rho * 2.0 * rho);
      worst = std::min(worst, ratio);
    }
  }
  return worst;
}

double embedding_gamma(double p, double theta, int d) {
  if (!(p >= 1.0)) throw std::invalid_argument("embedding_gamma requires p >= 1");
  if (d < 1) throw std::invalid_argument("embedding_gamma requires d >= 1");
  if (!(theta > 1.0 && theta <= 1.0 + p / (d + 2))) {
    throw std::invalid_argument("embedding exponent requires 1 < theta <= 1 + p/(d+2)");
  }
  return (d + 2) * (theta - 1.0) / p;
}

std::vector<ParabolicPoint> grid_centers(const fields::FieldSample& field,
                                         const DomainSpec& domain, int stride_t, int stride_x) {
  if (stride_t < 1 || stride_x < 1) throw std::invalid_argument("strides must be >= 1");
  const double h_t = field.store_every * field.grid.dt();
  const std::vector<double> xs = field.grid.xs();
  std::vector<ParabolicPoint> out;
  for (int r = 0; r < field.stored_rows(); r += stride_t) {
    const double t = r * h_t;
    if (t < domain.t_min || t > domain.t_max) continue;
    for (int j = 0; j < field.grid.nx; j += stride_x) {
      if (xs[j] < domain.x_min || xs[j] > domain.x_max) continue;
      out.push_back({t, xs[j]});
    }
  }
  return out;
}

std::vector<double> dyadic_radii(const DomainSpec& domain, int levels) {
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  std::vector<double> out;
  for (int j = 0; j < levels; ++j) out.push_back(domain.diameter() * std::pow(2.0, -j));
  return out;
}

double spatial_holder_seminorm(const std::vector<double>& values, double dx, double beta,
                               double period) {
  if (values.size() < 2) throw std::invalid_argument("row too short for a seminorm");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0, 1]");
  const int n = static_cast<int>(values.size());
  double best = 0.0;
  for (int lag = 1; lag < n; lag *= 2) {
    double h = lag * dx;
    if (period > 0.0) h = std::min(h, period - h);
    if (!(h > 0.0)) continue;
    const double denom = std::pow(h, beta);
    if (period > 0.0) {
      for (int i = 0; i < n; ++i) {
        best = std::max(best, std::abs(values[(i + lag) % n] - values[i]) / denom);
      }
    } else {
      for (int i = 0; i + lag < n; ++i) {
        best = std::max(best, std::abs(values[i + lag] - values[i]) / denom);
      }
    }
  }
  return best;
}

double spatial_holder_norm(const std::vector<double>& values, double dx, double beta,
                           double period) {
  double sup = 0.0;
  for (double v : values) sup = std::max(sup, std::abs(v));
  return sup + spatial_holder_seminorm(values, dx, beta, period);
}

}  // namespace fhlab::seminorms
