#pragma once

// Parabolic metric geometry and the associated integral (Campanato) and
// pointwise (Hölder) seminorms over sampled space-time fields, plus the
// domain-regularity constant and the embedding exponent arithmetic.

#include <cstdint>
#include <vector>

#include "fhlab/fields.hpp"

namespace fhlab::seminorms {

struct ParabolicPoint {
  double t = 0.0;
  double x = 0.0;
};

// max(|x - y|, sqrt(|t - s|))
double parabolic_dist(const ParabolicPoint& a, const ParabolicPoint& b);

struct Cylinder {
  ParabolicPoint center;
  double radius = 1.0;  // (t - c^2, t + c^2) x (x - c, x + c)

  bool contains(const ParabolicPoint& y) const;
  double measure() const;  // 2 c^2 * (2 c)^d with d = 1
};

Cylinder cylinder(const ParabolicPoint& center, double c);

// Axis-aligned space-time box [t_min, t_max] x [x_min, x_max].
struct DomainSpec {
  double t_min = 0.0;
  double t_max = 1.0;
  double x_min = -0.5;
  double x_max = 0.5;
  double atype_constant_hat = 1.0;  // filled in by atype_constant

  double diameter() const;  // parabolic diameter
};

DomainSpec domain_of(const fields::FieldSample& field);

struct SeminormReport {
  double p = 2.0;
  double theta = 0.0;      // Campanato normalization exponent
  double gamma_exp = 0.0;  // Hölder exponent
  double value = 0.0;
  // argmax witness: cylinder (Campanato) or point pair (Hölder)
  ParabolicPoint witness_a, witness_b;
  double witness_radius = 0.0;
  int evaluated = 0;
  int skipped = 0;     // sampled cylinders with empty domain intersection
  double resolution = 0.0;  // finest sampled scale
};

// Discrete sup over the supplied (center, radius) samples of
//   [ |D(X,rho)|^{-theta} * integral_{D(X,rho)} |u - mean|^p ]^{1/p},
// with D(X,rho) the intersection of the domain box and the cylinder; cell
// weights are fractional-overlap in time and center-rule in space.
SeminormReport campanato_seminorm(const fields::FieldSample& field, const DomainSpec& domain,
                                  double p, double theta,
                                  const std::vector<ParabolicPoint>& centers,
                                  const std::vector<double>& radii);

// sup over sampled pairs of |u(X) - u(Y)| / dist(X,Y)^gamma; pairs are all
// dyadic-separated grid pairs plus `extra_random_pairs` uniform pairs.
SeminormReport holder_seminorm(const fields::FieldSample& field, const DomainSpec& domain,
                               double gamma_exp, int extra_random_pairs = 20000,
                               std::uint64_t pair_seed = 2024);

// min over sampled (center, radius) of |domain ∩ cylinder| / |cylinder|
// (exact product of interval overlaps).
double atype_constant(const DomainSpec& domain, const std::vector<ParabolicPoint>& centers,
                      const std::vector<double>& radii);

// (d+2)(theta-1)/p, defined for 1 < theta <= 1 + p/(d+2).
double embedding_gamma(double p, double theta, int d);

// Helper center/radius samplers for the discretized sups.
std::vector<ParabolicPoint> grid_centers(const fields::FieldSample& field,
                                         const DomainSpec& domain, int stride_t, int stride_x);
std::vector<double> dyadic_radii(const DomainSpec& domain, int levels);

// Spatial Hölder seminorm of a single row: sup over dyadic index lags of
// |u(x+h) - u(x)| / h^beta; period > 0 treats the row as periodic with that
// period (distances wrap).
double spatial_holder_seminorm(const std::vector<double>& values, double dx, double beta,
                               double period);
// sup|u| + seminorm
double spatial_holder_norm(const std::vector<double>& values, double dx, double beta,
                           double period);

}  // namespace fhlab::seminorms
