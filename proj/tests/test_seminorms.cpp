#include "doctest.h"

#include "fhlab/fields.hpp"
#include "fhlab/philox.hpp"
#include "fhlab/seminorms.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

using namespace fhlab;

namespace {

// t-constant synthetic field u(t, x) = f(x) on a centered torus grid
fields::FieldSample profile_field(double t_max, int nt, double len, int nx,
                                  double (*f)(double)) {
    fields::FieldSample s;
    s.grid.t_max = t_max;
    s.grid.nt = nt;
    s.grid.domain_len = len;
    s.grid.nx = nx;
    s.store_every = 1;
    auto xs = s.grid.xs();
    s.values.resize(static_cast<std::size_t>(nt + 1) * nx);
    for (int r = 0; r <= nt; ++r) {
        for (int j = 0; j < nx; ++j) {
            s.values[static_cast<std::size_t>(r) * nx + j] = f(xs[j]);
        }
    }
    return s;
}

// Campanato value of u = |x|^gamma at the matched normalization is
// radius-free: 2^{1-theta} sqrt(1/(2g+1) - 1/(g+1)^2) for p = 2.
double cusp_oracle(double gamma) {
    double theta = 1.0 + 2.0 * gamma / 3.0;
    double c0 = 1.0 / (2.0 * gamma + 1.0) - 1.0 / ((gamma + 1.0) * (gamma + 1.0));
    return std::pow(2.0, 1.0 - theta) * std::sqrt(c0);
}

double cusp03(double x) { return std::pow(std::abs(x), 0.3); }
double cusp05(double x) { return std::pow(std::abs(x), 0.5); }
double cusp07(double x) { return std::pow(std::abs(x), 0.7); }
double linear(double x) { return x; }

}  // namespace

TEST_CASE("parabolic distance takes the max of space and sqrt-time separations") {
    seminorms::ParabolicPoint a{0.0, 0.0}, b{0.09, 0.2};
    CHECK(seminorms::parabolic_dist(a, b) == doctest::Approx(0.3));
    CHECK(seminorms::parabolic_dist(b, a) == doctest::Approx(0.3));
    seminorms::ParabolicPoint c{0.01, 0.5};
    CHECK(seminorms::parabolic_dist(a, c) == doctest::Approx(0.5));
}

TEST_CASE("cylinders have measure 4 c^3 and the right membership") {
    auto cyl = seminorms::cylinder({1.0, 0.0}, 0.5);
    CHECK(cyl.measure() == doctest::Approx(4.0 * 0.125));
    CHECK(cyl.contains({1.0, 0.0}));
    CHECK(cyl.contains({1.2, 0.4}));
    CHECK_FALSE(cyl.contains({1.3, 0.0}));
    CHECK_FALSE(cyl.contains({1.0, 0.6}));
}

TEST_CASE("domain of a sample matches its grid box") {
    auto field = profile_field(2.0, 4, 4.0, 64, linear);
    auto dom = seminorms::domain_of(field);
    CHECK(dom.t_min == doctest::Approx(0.0));
    CHECK(dom.t_max == doctest::Approx(2.0));
    CHECK(dom.x_min == doctest::Approx(-2.0));
    CHECK(dom.x_max == doctest::Approx(2.0 - 4.0 / 64));
    CHECK(dom.diameter() == doctest::Approx(std::max(4.0 - 4.0 / 64, std::sqrt(2.0))));
}

TEST_CASE("regularity constant of a corner cylinder is exactly one quarter") {
    seminorms::DomainSpec dom;
    dom.t_min = 0.0;
    dom.t_max = 1.0;
    dom.x_min = 0.0;
    dom.x_max = 1.0;
    // centered at the parabolic corner: half the space range, half the time range survive
    double a = seminorms::atype_constant(dom, {{0.0, 0.0}}, {0.5});
    CHECK(a == doctest::Approx(0.25).epsilon(1e-12));
    // interior cylinder is untouched
    double b = seminorms::atype_constant(dom, {{0.5, 0.5}}, {0.2});
    CHECK(b == doctest::Approx(1.0).epsilon(1e-12));
    // boxes at least as long as their squared diameter stay above 2^{-(d+2)}
    auto field = profile_field(1.0, 16, 1.0, 64, linear);
    auto fdom = seminorms::domain_of(field);
    auto centers = seminorms::grid_centers(field, fdom, 2, 4);
    auto radii = seminorms::dyadic_radii(fdom, 4);
    double worst = seminorms::atype_constant(fdom, centers, radii);
    CHECK(worst >= 0.125 - 1e-12);
    CHECK(worst <= 1.0);
}

TEST_CASE("cusp fields reproduce the radius-free integral seminorm value") {
    // u = |x|^gamma with the normalization matched to the cusp: the sampled
    // sup is then scale-invariant and equals the closed-form constant.
    struct Case { double (*f)(double); double gamma; };
    for (auto [f, gamma] : {Case{cusp03, 0.3}, Case{cusp05, 0.5}, Case{cusp07, 0.7}}) {
        auto field = profile_field(1.0, 64, 4.0, 512, f);
        auto dom = seminorms::domain_of(field);
        double theta = 1.0 + 2.0 * gamma / 3.0;
        std::vector<seminorms::ParabolicPoint> centers{{0.5, 0.0}};
        std::vector<double> radii{0.25, 0.125};
        auto rep = seminorms::campanato_seminorm(field, dom, 2.0, theta, centers, radii);
        CHECK(rep.value == doctest::Approx(cusp_oracle(gamma)).epsilon(0.08));
        CHECK(rep.evaluated == 2);
        CHECK(rep.skipped == 0);
        // the witness is one of the requested cylinders at the cusp
        CHECK(std::abs(rep.witness_a.x) < 1e-12);
    }
}

TEST_CASE("off-cusp cylinders see a smooth field and contribute less") {
    auto field = profile_field(1.0, 64, 4.0, 512, cusp05);
    auto dom = seminorms::domain_of(field);
    double theta = 1.0 + 2.0 * 0.5 / 3.0;
    std::vector<double> radii{0.125};
    auto at_cusp = seminorms::campanato_seminorm(field, dom, 2.0, theta, {{0.5, 0.0}}, radii);
    auto away = seminorms::campanato_seminorm(field, dom, 2.0, theta, {{0.5, 1.5}}, radii);
    CHECK(away.value < at_cusp.value);
}

TEST_CASE("integral seminorm vanishes on constants and flags empty samples") {
    auto field = profile_field(1.0, 8, 2.0, 64, [](double) { return 3.25; });
    auto dom = seminorms::domain_of(field);
    auto rep = seminorms::campanato_seminorm(field, dom, 2.0, 1.4, {{0.5, 0.0}}, {0.2});
    CHECK(rep.value == doctest::Approx(0.0).epsilon(1e-12));

    // a center far outside the box contributes a skip, not a crash
    auto rep2 = seminorms::campanato_seminorm(field, dom, 2.0, 1.4, {{40.0, 30.0}}, {0.2});
    CHECK(rep2.skipped == 1);
    CHECK(rep2.evaluated == 0);
    CHECK(rep2.value == 0.0);
}

TEST_CASE("pointwise seminorm of a linear profile is exactly one") {
    auto field = profile_field(1.0, 16, 4.0, 128, linear);
    auto dom = seminorms::domain_of(field);
    auto rep = seminorms::holder_seminorm(field, dom, 1.0, 500, 99);
    CHECK(rep.value == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rep.gamma_exp == doctest::Approx(1.0));
    CHECK(rep.evaluated > 0);
}

TEST_CASE("pointwise seminorm sees pure time variation through the sqrt metric") {
    fields::FieldSample s;
    s.grid.t_max = 1.0;
    s.grid.nt = 64;
    s.grid.domain_len = 2.0;
    s.grid.nx = 8;
    s.store_every = 1;
    s.values.resize(static_cast<std::size_t>(65) * 8);
    for (int r = 0; r <= 64; ++r) {
        for (int j = 0; j < 8; ++j) {
            s.values[static_cast<std::size_t>(r) * 8 + j] = r / 64.0;  // u = t
        }
    }
    auto dom = seminorms::domain_of(s);
    // |t - s| / max(|dx|, sqrt|t-s|)^gamma with gamma = 1 peaks at the full range
    auto rep = seminorms::holder_seminorm(s, dom, 1.0, 500, 7);
    CHECK(rep.value == doctest::Approx(1.0).epsilon(1e-10));
    // exponents beyond the metric-Lipschitz window are rejected
    CHECK_THROWS_AS((void)seminorms::holder_seminorm(s, dom, 2.0, 500, 7),
                    std::invalid_argument);
}

TEST_CASE("cusp fields have pointwise seminorm one at their own exponent") {
    // | |x|^g - |y|^g | <= |x - y|^g with equality as y -> 0
    auto field = profile_field(1.0, 8, 4.0, 512, cusp05);
    auto dom = seminorms::domain_of(field);
    auto rep = seminorms::holder_seminorm(field, dom, 0.5, 2000, 11);
    CHECK(rep.value == doctest::Approx(1.0).epsilon(1e-9));
    // Campanato-to-pointwise comparison stays within a factor of 10
    double camp = cusp_oracle(0.5);
    CHECK(rep.value / camp < 10.0);
    CHECK(rep.value / camp > 0.1);
}

TEST_CASE("witnesses are reproducible and locate the singularity") {
    auto field = profile_field(1.0, 32, 4.0, 256, cusp05);
    auto dom = seminorms::domain_of(field);
    auto r1 = seminorms::holder_seminorm(field, dom, 0.5, 3000, 2024);
    auto r2 = seminorms::holder_seminorm(field, dom, 0.5, 3000, 2024);
    CHECK(r1.value == r2.value);
    CHECK(r1.witness_a.x == r2.witness_a.x);
    CHECK(r1.witness_b.x == r2.witness_b.x);
    // the extremal pair straddles the cusp
    CHECK(std::min(std::abs(r1.witness_a.x), std::abs(r1.witness_b.x)) < 0.1);
}

TEST_CASE("over-normalized scans diverge under refinement, matched ones stay put") {
    // bounded sign data: the integral seminorm at normalization theta scales
    // like r^{3(1-theta)/2} at radius r, so scanning radii tied to the mesh
    // grows without bound once theta exceeds the bounded-data ceiling
    auto stripes = [](double x) { return std::sin(64.0 * x) >= 0.0 ? 1.0 : -1.0; };
    double prev_value = 0.0;
    for (int sweep = 0; sweep < 3; ++sweep) {
        int nx = 128 << sweep;
        fields::FieldSample s;
        s.grid.t_max = 1.0;
        s.grid.nt = 32 << sweep;
        s.grid.domain_len = 4.0;
        s.grid.nx = nx;
        s.store_every = 1;
        auto xs = s.grid.xs();
        s.values.resize(static_cast<std::size_t>(s.grid.nt + 1) * nx);
        for (int r = 0; r <= s.grid.nt; ++r) {
            for (int j = 0; j < nx; ++j) {
                s.values[static_cast<std::size_t>(r) * nx + j] = stripes(xs[j]);
            }
        }
        auto dom = seminorms::domain_of(s);
        double radius = 16.0 * s.grid.dx();  // shrinks with the mesh
        auto rep = seminorms::campanato_seminorm(s, dom, 2.0, 1.9, {{0.5, 0.3}}, {radius});
        if (sweep > 0) CHECK(rep.value > 2.0 * prev_value);
        prev_value = rep.value;
    }

    // matched normalization on a Hölder field: stable under the same refinement
    double prev_stable = -1.0;
    for (int sweep = 0; sweep < 3; ++sweep) {
        int nx = 128 << sweep;
        auto field = profile_field(1.0, 32 << sweep, 4.0, nx, cusp05);
        auto dom = seminorms::domain_of(field);
        double radius = 32.0 * field.grid.dx();
        auto rep = seminorms::campanato_seminorm(field, dom, 2.0, 1.0 + 1.0 / 3.0,
                                                 {{0.5, 0.0}}, {radius});
        if (sweep > 0) {
            CHECK(rep.value < 2.0 * prev_stable);
            CHECK(rep.value > 0.5 * prev_stable);
        }
        prev_stable = rep.value;
    }
}

TEST_CASE("embedding exponent arithmetic and its admissible window") {
    CHECK(seminorms::embedding_gamma(3.0, 1.3, 1) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(seminorms::embedding_gamma(2.0, 1.5, 1) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(seminorms::embedding_gamma(4.0, 2.0, 2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS((void)seminorms::embedding_gamma(3.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)seminorms::embedding_gamma(3.0, 0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)seminorms::embedding_gamma(3.0, 2.1, 1), std::invalid_argument);
}

TEST_CASE("sampler helpers produce in-domain centers and shrinking radii") {
    auto field = profile_field(1.0, 32, 4.0, 128, linear);
    auto dom = seminorms::domain_of(field);
    auto centers = seminorms::grid_centers(field, dom, 4, 8);
    CHECK(!centers.empty());
    for (auto& c : centers) {
        CHECK(c.t >= dom.t_min);
        CHECK(c.t <= dom.t_max);
        CHECK(c.x >= dom.x_min);
        CHECK(c.x <= dom.x_max);
    }
    auto radii = seminorms::dyadic_radii(dom, 4);
    REQUIRE(radii.size() == 4);
    for (std::size_t i = 1; i < radii.size(); ++i) {
        CHECK(radii[i] == doctest::Approx(0.5 * radii[i - 1]));
    }
    CHECK(radii.front() <= dom.diameter());
}

TEST_CASE("row-wise spatial seminorm matches hand values") {
    // u(x) = x on four points of a periodic row: lag-1 quotient dx/dx^beta
    std::vector<double> row{0.0, 1.0, 2.0, 3.0};
    double dx = 1.0;
    CHECK(seminorms::spatial_holder_seminorm(row, dx, 1.0, 0.0) == doctest::Approx(1.0));
    // beta = 0.5: lags are scanned dyadically (1, 2), so the widest probed
    // pair is |u(0)-u(2)| / 2^0.5 = sqrt(2)
    CHECK(seminorms::spatial_holder_seminorm(row, dx, 0.5, 0.0) ==
          doctest::Approx(std::sqrt(2.0)));
    // periodic wrap: distance from index 0 to 3 becomes 1
    CHECK(seminorms::spatial_holder_seminorm(row, dx, 0.5, 4.0) == doctest::Approx(3.0));
    CHECK(seminorms::spatial_holder_norm(row, dx, 0.5, 0.0) ==
          doctest::Approx(3.0 + std::sqrt(2.0)));
}
