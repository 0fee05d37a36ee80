#include "doctest.h"

#include "fhlab/fields.hpp"
#include "fhlab/philox.hpp"
#include "fhlab/regularity.hpp"
#include "fhlab/solver.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

using namespace fhlab;

namespace {

fields::FieldSample ramp_in_time(int nt, int nx, double t_max) {
    fields::FieldSample s;
    s.grid.t_max = t_max;
    s.grid.nt = nt;
    s.grid.domain_len = 1.0;
    s.grid.nx = nx;
    s.store_every = 1;
    s.values.resize(static_cast<std::size_t>(nt + 1) * nx);
    for (int r = 0; r <= nt; ++r) {
        for (int j = 0; j < nx; ++j) {
            s.values[static_cast<std::size_t>(r) * nx + j] = r * (t_max / nt);  // u = t
        }
    }
    return s;
}

}  // namespace

TEST_CASE("exponent plans fill in the derived quantities") {
    auto plan = regularity::make_plan(8.0, 0.75, 1, regularity::NoiseRegime::single_bm, 0.5, 1.0);
    CHECK(plan.beta_max == doctest::Approx(0.625).epsilon(1e-14));
    CHECK(plan.theta == doctest::Approx(1.0 + 0.5 * 8.0 / 3.0).epsilon(1e-14));
    CHECK(plan.beta_star == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(plan.q > 0.0);
    CHECK(plan.r > 0.0);
    CHECK(plan.r < plan.q);

    auto wn = regularity::make_plan(10.0, 1.0, 1, regularity::NoiseRegime::spacetime_white,
                                    0.4, 1.0);
    CHECK(wn.beta_max == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(wn.beta_star == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("admissible ceilings increase with the moment order") {
    double prev_bm = 0.0, prev_wn = 0.0;
    for (double p : {4.0, 8.0, 16.0}) {
        auto bm = regularity::make_plan(p, 0.75, 1, regularity::NoiseRegime::single_bm,
                                        0.1, 0.1);
        CHECK(bm.beta_max > prev_bm);
        prev_bm = bm.beta_max;
        auto wn = regularity::make_plan(p, 1.0, 1, regularity::NoiseRegime::spacetime_white,
                                        0.1, 0.1);
        CHECK(wn.beta_max > prev_wn);
        prev_wn = wn.beta_max;
    }
}

TEST_CASE("plan arithmetic is exact over a parameter sweep") {
    for (double alpha : {0.5, 0.75, 1.0}) {
        for (double p : {4.0, 8.0, 16.0}) {
            double bmax = alpha - 1.0 / p;
            double beta = 0.9 * bmax;
            double delta = 0.2 * beta * p;
            auto plan = regularity::make_plan(p, alpha, 1, regularity::NoiseRegime::single_bm,
                                              beta, delta);
            CHECK(plan.beta_max == bmax);
            CHECK(plan.theta == 1.0 + beta * p / (1 + 2));
            CHECK(plan.beta_star == beta - 2.0 * delta / p);
        }
    }
    for (double alpha : {0.75, 1.0}) {
        for (double p : {6.0, 8.0, 16.0}) {
            double bmax = (2.0 * alpha - 1.0) / 2.0 - 1.0 / p;
            double beta = 0.9 * bmax;
            double delta = 0.2 * beta * p;
            auto plan = regularity::make_plan(p, alpha, 1,
                                              regularity::NoiseRegime::spacetime_white,
                                              beta, delta);
            CHECK(plan.beta_max == bmax);
            CHECK(plan.theta == 1.0 + beta * p / (1 + 2));
            CHECK(plan.beta_star == beta - 2.0 * delta / p);
        }
    }
}

TEST_CASE("inadmissible plans are rejected with named violations") {
    using regularity::NoiseRegime;
    // moment order too small: p alpha <= d
    CHECK_THROWS_WITH_AS((void)regularity::make_plan(1.0, 0.5, 1, NoiseRegime::single_bm,
                                                     0.1, 0.01),
                         doctest::Contains("moment order too small"), std::invalid_argument);
    // target index above the ceiling
    CHECK_THROWS_WITH_AS((void)regularity::make_plan(4.0, 0.5, 1, NoiseRegime::single_bm,
                                                     0.3, 0.1),
                         doctest::Contains("ceiling"), std::invalid_argument);
    // white noise only exists in dimension one here
    CHECK_THROWS_WITH_AS((void)regularity::make_plan(8.0, 1.0, 2,
                                                     NoiseRegime::spacetime_white, 0.2, 0.1),
                         doctest::Contains("dimension 1"), std::invalid_argument);
    // white noise needs dissipation stronger than 1/2
    CHECK_THROWS_AS((void)regularity::make_plan(8.0, 0.5, 1, NoiseRegime::spacetime_white,
                                                0.1, 0.1),
                    std::invalid_argument);
    // slack parameter window (0, beta p/2)
    CHECK_THROWS_WITH_AS((void)regularity::make_plan(4.0, 0.75, 1, NoiseRegime::single_bm,
                                                     0.4, 2.0),
                         doctest::Contains("slack"), std::invalid_argument);
    CHECK_THROWS_AS((void)regularity::make_plan(4.0, 0.75, 1, NoiseRegime::single_bm,
                                                0.4, 0.0),
                    std::invalid_argument);
}

TEST_CASE("increment scan recovers an exact ramp exponent with zero spread") {
    auto plan = regularity::make_plan(4.0, 0.75, 1, regularity::NoiseRegime::single_bm,
                                      0.4, 0.4);
    auto proto = ramp_in_time(64, 8, 1.0);

    regularity::ProbeSpec probe;
    probe.cls = regularity::PairClass::pure_time;
    probe.scale = regularity::ScaleKind::raw_time;
    probe.shells = 4;
    probe.pairs_per_shell = 32;
    probe.anchor_t_frac = 0.0;

    regularity::IncrementScan scan(plan, proto, probe);
    CHECK(scan.usable_shells() == 4);
    for (int s = 0; s < scan.usable_shells(); ++s) {
        auto [row_lag, col_lag] = scan.shell_lags(s);
        CHECK(col_lag == 0);
        CHECK(row_lag == (1 << s));
        CHECK(scan.shell_scales()[s] == doctest::Approx(row_lag / 64.0));
    }

    // |u(t+h) - u(t)|^p = h^p exactly, independent of the replicate
    for (int r = 0; r < 20; ++r) scan.add_replicate(proto);
    auto fit = scan.finish();
    CHECK(fit.slope == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.conf_half_width == doctest::Approx(0.0).epsilon(1e-10));
    CHECK_FALSE(fit.degenerate);
    CHECK_FALSE(fit.out_of_regime);
    CHECK(fit.dropped_shells == 0);

    // the ensemble-vector wrapper agrees
    std::vector<fields::FieldSample> ens{proto, proto};
    auto fit2 = regularity::moment_increment_scan(ens, plan, probe);
    CHECK(fit2.slope == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("increment scan rejects inconsistent probe geometry") {
    auto plan = regularity::make_plan(4.0, 0.75, 1, regularity::NoiseRegime::single_bm,
                                      0.4, 0.4);
    auto proto = ramp_in_time(16, 8, 1.0);
    regularity::ProbeSpec probe;
    probe.cls = regularity::PairClass::pure_time;
    probe.scale = regularity::ScaleKind::raw_space;  // mismatched axes
    CHECK_THROWS_AS(regularity::IncrementScan(plan, proto, probe), std::invalid_argument);
    probe.cls = regularity::PairClass::pure_space;
    probe.scale = regularity::ScaleKind::raw_time;
    CHECK_THROWS_AS(regularity::IncrementScan(plan, proto, probe), std::invalid_argument);

    // a grid too coarse for every shell refuses to fit
    probe.cls = regularity::PairClass::pure_time;
    probe.scale = regularity::ScaleKind::raw_time;
    probe.shells = 12;  // needs 2^11 stored rows
    probe.anchor_t_frac = 0.9;
    auto tiny = ramp_in_time(4, 8, 1.0);
    CHECK_THROWS_AS(regularity::IncrementScan(plan, tiny, probe), std::invalid_argument);
}

TEST_CASE("fractional Brownian ensembles recover p times the Hurst exponent") {
    fields::GridSpec grid;
    grid.t_max = 1.0;
    grid.nt = 64;
    grid.domain_len = 1.0;
    grid.nx = 4;

    // p = 2 keeps the fitted slope equal to 2H; the target index must stay
    // below the admissible ceiling alpha - d/p = 0.25 for this combination
    auto plan = regularity::make_plan(2.0, 0.75, 1, regularity::NoiseRegime::single_bm,
                                      0.2, 0.15);
    regularity::ProbeSpec probe;
    probe.cls = regularity::PairClass::pure_time;
    probe.scale = regularity::ScaleKind::raw_time;
    probe.shells = 4;
    probe.pairs_per_shell = 48;
    probe.anchor_t_frac = 0.25;

    for (double hurst : {0.3, 0.7}) {
        regularity::IncrementScan scan(plan, regularity::make_fbm_sample(grid, 1, hurst, 5, 0),
                                       probe);
        const int reps = 500;
        for (int r = 0; r < reps; ++r) {
            scan.add_replicate(regularity::make_fbm_sample(grid, 1, hurst, 5, r));
        }
        auto fit = scan.finish();
        // E|B_{t+h} - B_t|^2 = h^{2H} exactly; Monte Carlo noise only
        CHECK(fit.slope == doctest::Approx(2.0 * hurst).epsilon(0.05 / (2.0 * hurst)));
        CHECK(fit.conf_half_width > 0.0);
        CHECK(fit.conf_half_width < 0.1);
        CHECK_FALSE(fit.degenerate);
    }
}

TEST_CASE("fractional Brownian samples have the exact marginal variance") {
    fields::GridSpec grid;
    grid.t_max = 1.0;
    grid.nt = 32;
    grid.domain_len = 1.0;
    grid.nx = 4;
    const double hurst = 0.4;
    const int reps = 600;
    double acc = 0.0;
    for (int r = 0; r < reps; ++r) {
        auto s = regularity::make_fbm_sample(grid, 1, hurst, 99, r);
        double v = s.at(s.stored_rows() - 1, 0);
        acc += v * v;
        // starts at zero, constant across the row
        CHECK(s.at(0, 0) == 0.0);
        CHECK(s.at(s.stored_rows() - 1, 3) == v);
    }
    // Var B_1 = 1 for every Hurst index
    CHECK(acc / reps == doctest::Approx(1.0).epsilon(0.25));

    CHECK_THROWS_AS((void)regularity::make_fbm_sample(grid, 1, 1.5, 99, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)regularity::make_fbm_sample(grid, 3, 0.5, 99, 0),
                    std::invalid_argument);
}

TEST_CASE("chaining bound on a linear path: every level contributes equally") {
    const int levels = 5;
    const int n = (1 << levels) + 1;
    std::vector<double> path(n);
    for (int k = 0; k < n; ++k) path[k] = static_cast<double>(k) / (n - 1);

    auto rep = regularity::chaining_bound(path, 1.0, levels);
    CHECK(rep.pass);
    REQUIRE(rep.k_values.size() == levels + 1);
    for (int i = 0; i <= levels; ++i) {
        CHECK(rep.k_values[i] == doctest::Approx(std::pow(2.0, -i)).epsilon(1e-12));
    }
    CHECK(rep.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.rhs == doctest::Approx(2.0 * (levels + 1)).epsilon(1e-12));
}

TEST_CASE("chaining bound holds pathwise on rough random paths") {
    const int levels = 6;
    const int n = (1 << levels) + 1;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> path(n);
        for (int k = 0; k < n; ++k) {
            path[k] = rng::normal(k ^ 0xabcd, rng::Stream::generic,
                                  static_cast<std::uint64_t>(trial),
                                  static_cast<std::uint64_t>(k));
        }
        for (double alpha_exp : {0.25, 0.5, 0.9, 1.0}) {
            auto rep = regularity::chaining_bound(path, alpha_exp, levels);
            CHECK(rep.pass);
            CHECK(rep.lhs <= rep.rhs * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("chaining bound is degenerate-safe and validates its inputs") {
    std::vector<double> flat((1 << 4) + 1, 2.0);
    auto rep = regularity::chaining_bound(flat, 0.5, 4);
    CHECK(rep.pass);
    CHECK(rep.lhs == 0.0);
    CHECK(rep.rhs == 0.0);

    std::vector<double> wrong(10, 0.0);
    CHECK_THROWS_AS((void)regularity::chaining_bound(wrong, 0.5, 4), std::invalid_argument);
    std::vector<double> ok((1 << 3) + 1, 0.0);
    CHECK_THROWS_AS((void)regularity::chaining_bound(ok, 1.5, 3), std::invalid_argument);
    CHECK_THROWS_AS((void)regularity::chaining_bound(ok, 0.0, 3), std::invalid_argument);
}

TEST_CASE("tail split on a two-point sample matches hand arithmetic") {
    std::vector<double> samples{1.0, 3.0};
    auto rep = regularity::tail_moment_split(samples, 2.0, 2.0);
    // E|X|^2 = (1 + 9)/2 = 5, layer-cake identity exact on finite samples
    CHECK(rep.moment_direct == doctest::Approx(5.0).epsilon(1e-13));
    CHECK(rep.moment_layer_cake == doctest::Approx(5.0).epsilon(1e-12));
    // M^p + E[(|X|^p - M^p)_+] = 4 + (9 - 4)/2 = 6.5
    CHECK(rep.split_bound == doctest::Approx(6.5).epsilon(1e-13));
    CHECK(rep.identity_ok);
    CHECK(rep.bound_ok);
    CHECK(rep.identity_rel_err < 1e-12);
}

TEST_CASE("layer-cake identity holds to near machine precision on Gaussians") {
    std::vector<double> samples;
    for (int i = 0; i < 4000; ++i) {
        samples.push_back(rng::normal(777, rng::Stream::generic, 1,
                                      static_cast<std::uint64_t>(i)));
    }
    for (double threshold : {0.5, 1.0, 2.0}) {
        auto rep = regularity::tail_moment_split(samples, threshold, 4.0);
        CHECK(rep.identity_rel_err < 1e-10);
        CHECK(rep.identity_ok);
        CHECK(rep.bound_ok);
        CHECK(rep.split_bound >= rep.moment_direct);
    }
    // fourth moment of a standard normal is 3
    auto rep = regularity::tail_moment_split(samples, 1.0, 4.0);
    CHECK(rep.moment_direct == doctest::Approx(3.0).epsilon(0.15));
}

TEST_CASE("rough initial data is deterministic and genuinely multi-scale") {
    auto plan = regularity::make_plan(4.0, 0.5, 1, regularity::NoiseRegime::single_bm,
                                      0.2, 0.2);
    fields::GridSpec grid;
    grid.t_max = 1.0;
    grid.nt = 8;
    grid.domain_len = 16.0;
    grid.nx = 2048;
    auto rho = regularity::make_rough_initial(plan, grid, 31, false);
    REQUIRE(rho.size() == 2048);
    auto again = regularity::make_rough_initial(plan, grid, 31, false);
    CHECK(rho == again);
    double sup = 0.0;
    int nonzero = 0;
    for (double v : rho) {
        sup = std::max(sup, std::abs(v));
        if (v != 0.0) ++nonzero;
    }
    CHECK(sup > 0.0);
    CHECK(nonzero > 16);
    CHECK(nonzero < 2048);

    // damped variant reduces the fine-scale heights
    auto damped = regularity::make_rough_initial(plan, grid, 31, true);
    double sup_damped = 0.0;
    for (double v : damped) sup_damped = std::max(sup_damped, std::abs(v));
    CHECK(sup_damped <= sup + 1e-12);
}

TEST_CASE("Hölder-norm decay of smoothed rough data sits on the predicted slope") {
    auto plan = regularity::make_plan(8.0, 1.0, 1, regularity::NoiseRegime::single_bm,
                                      0.3, 0.4);
    fields::GridSpec grid;
    grid.t_max = 1.0;
    grid.nt = 8;
    grid.domain_len = 16.0;
    grid.nx = 4096;
    auto rho0 = regularity::make_rough_initial(plan, grid, 7, false);

    // The clean scaling window is bounded below by the finest spike width
    // (the decay is flat while the diffusion length is under it) and above by
    // the coarsest one, so the fit is pinned inside that band.
    std::vector<double> ts;
    for (int k = 0; k < 12; ++k) ts.push_back(1e-3 * std::pow(250.0, k / 11.0));
    auto rep = regularity::holder_norm_decay(plan, rho0, grid, ts);
    // -(beta + d/p)/(2 alpha) = -(0.3 + 0.125)/2
    CHECK(rep.expected_slope == doctest::Approx(-0.2125).epsilon(1e-12));
    CHECK(rep.fit.slope == doctest::Approx(rep.expected_slope).epsilon(0.5));
    CHECK(std::abs(rep.fit.slope - rep.expected_slope) < 0.1);
    CHECK(rep.pass);
}

TEST_CASE("fixed-lag time increments of tuned data decay at the predicted rate") {
    // alpha = 1 gives the widest clean scaling decade between the finest and
    // coarsest spike widths; the lag sits well below the first sample time so
    // every point is in the fixed-lag regime.
    auto plan = regularity::make_plan(4.0, 1.0, 1, regularity::NoiseRegime::single_bm,
                                      0.2, 0.2);
    fields::GridSpec grid;
    grid.t_max = 1.0;
    grid.nt = 8;
    grid.domain_len = 16.0;
    grid.nx = 4096;
    auto rho0 = regularity::make_rough_initial(plan, grid, 1234, true);

    std::vector<double> ts;
    for (int k = 0; k < 12; ++k)
        ts.push_back(5.3e-4 * std::pow(0.04 / 5.3e-4, k / 11.0));
    auto rep = regularity::verify_smoothing(plan, rho0, grid, 5e-5, ts);
    // -beta - d/(2 p alpha) = -0.2 - 0.125
    CHECK(rep.expected_slope == doctest::Approx(-0.325).epsilon(1e-12));
    CHECK(std::abs(rep.fit.slope - rep.expected_slope) < 0.1);
    CHECK(rep.pass);
    CHECK(rep.lag == doctest::Approx(5e-5));
}

TEST_CASE("a single eigenmode decays super-algebraically and is flagged") {
    auto plan = regularity::make_plan(4.0, 1.0, 1, regularity::NoiseRegime::single_bm,
                                      0.3, 0.2);
    fields::GridSpec grid;
    grid.t_max = 1.0;
    grid.nt = 8;
    grid.domain_len = 2.0 * M_PI;
    grid.nx = 128;
    auto xs = grid.xs();
    std::vector<double> rho0(grid.nx);
    for (int j = 0; j < grid.nx; ++j) rho0[j] = std::sin(xs[j]);

    std::vector<double> ts;
    for (int k = 0; k < 8; ++k) ts.push_back(0.25 * std::pow(48.0, k / 7.0));
    auto rep = regularity::holder_norm_decay(plan, rho0, grid, ts);
    // exponential decay: either the tail accelerates out of the algebraic
    // regime or the fit is declared degenerate; it must not silently pass
    CHECK_FALSE(rep.pass);
    CHECK((rep.fit.out_of_regime || rep.fit.degenerate));
}
