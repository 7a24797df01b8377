#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mgpert/analytic.hpp"
#include "mgpert/heat_kernel.hpp"

using namespace mgpert;

namespace {

const MgParams kStatic{1.5, 0.08, 1.5, -0.5, 1.0, 0.0};

struct Scenario {
    MgParams mg;
    PerturbParams pert;
    DerivedParams d;
};

Scenario make(double sigma, double r = 0.0, double v0 = 1.0) {
    MgParams mg = kStatic;
    mg.r = r;
    const PerturbParams pert = PerturbParams::from_mg(mg, sigma, v0);
    return {mg, pert, derive_params(mg, pert)};
}

// Lighter grid for unit tests; acceptance runs the defaults.
QuadratureConfig light() {
    QuadratureConfig c;
    c.nodes_x = 64;
    c.nodes_y = 64;
    c.time_slices = 32;
    return c;
}

}  // namespace

TEST(Psi0, BoundaryAtExpiry) {
    const Scenario s = make(0.2, 0.03);
    EXPECT_EQ(psi0({-0.1, 0.3, 0.0}, s.d).value, 0.0);
    EXPECT_EQ(psi0({0.0, 0.3, 0.0}, s.d).value, 0.0);
    const double x = 0.2, y = -0.4;
    const double expect = std::exp(0.5 * (s.d.r2 - 1.0) * y) *
                          (std::exp(0.5 * (s.d.r1 + 1.0) * x) - std::exp(0.5 * (s.d.r1 - 1.0) * x));
    EXPECT_EQ(psi0({x, y, 0.0}, s.d).value, expect);
    EXPECT_THROW(psi0({0.0, 0.0, -1.0}, s.d), ValidationError);
}

TEST(Psi0, TiltReproducesBlackScholes) {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const Scenario s = make(0.1 + 0.3 * u(gen), 0.05 * u(gen), 0.1 + 2.0 * u(gen));
        const OptionSpec opt{100, 85 + 30 * u(gen), 0.02 + 0.5 * u(gen), OptionKind::Call, 0.01 + 0.2 * u(gen)};
        const HeatCoords hc = to_heat_coords(opt, s.pert);
        const double c0 = price_symmetric(opt, s.pert, s.mg.r);
        const double via = opt.strike * tilt(hc, s.d) * psi0(hc, s.d).value;
        EXPECT_NEAR(via, c0, 1e-9 * std::max(c0, 1e-2)) << "draw " << i;
    }
}

TEST(Psi0, YFactorizes) {
    const Scenario s = make(0.25);
    for (double delta : {-1.0, 0.3, 2.0}) {
        const double a = psi0({0.05, 0.1, 0.02}, s.d).value;
        const double b = psi0({0.05, 0.1 + delta, 0.02}, s.d).value;
        EXPECT_NEAR(b / a, std::exp(0.5 * (s.d.r2 - 1.0) * delta), 1e-12 * b / a);
    }
}

TEST(Psi0, NonNegative) {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Scenario s = make(0.3, 0.02);
    for (int i = 0; i < 2000; ++i)
        EXPECT_GE(psi0({-3.0 + 6.0 * u(gen), -3.0 + 6.0 * u(gen), 0.2 * u(gen)}, s.d).value, 0.0);
}

TEST(HeatGreen, Normalised) {
    const double s = 0.013;
    const double half = 8.0 * std::sqrt(2.0 * s);
    const GaussLegendreRule r = gauss_legendre(64);
    const double total = integrate(r, 0.3 - half, 0.3 + half, [&](double xp) {
        return integrate(r, -0.2 - half, -0.2 + half, [&](double yp) { return heat_green(0.3, -0.2, s, xp, yp, 0.0); });
    });
    EXPECT_NEAR(total, 1.0, 1e-8);
}

TEST(HeatGreen, SymmetryAndPrefactor) {
    EXPECT_EQ(heat_green(0.1, 0.2, 0.5, -0.3, 0.4, 0.1), heat_green(-0.3, 0.4, 0.5, 0.1, 0.2, 0.1));
    EXPECT_NEAR(heat_green(0.7, 0.7, 1.0 / (4.0 * std::numbers::pi), 0.7, 0.7, 0.0), 1.0, 1e-15);
    EXPECT_EQ(heat_green(0.0, 0.0, 0.1, 0.0, 0.0, 0.1), 0.0);
    EXPECT_EQ(heat_green(0.0, 0.0, 0.1, 0.0, 0.0, 0.2), 0.0);
}

TEST(BreakingOperator, OnlyC1Survives) {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        MgParams mg = kStatic;
        mg.rho = -1.0 + 2.0 * u(gen);
        mg.alpha = 0.5 + u(gen);
        mg.theta = 0.01 + 0.2 * u(gen);
        const PerturbParams pert = PerturbParams::from_mg(mg, 0.1 + 0.3 * u(gen), 0.2 + 3.0 * u(gen));
        const DerivedParams d = derive_params(mg, pert);
        const HeatCoords hc{-0.3 + 0.6 * u(gen), -1.0 + 2.0 * u(gen), 0.001 + 0.02 * u(gen)};
        const BreakingTerms t = breaking_terms(hc, mg, pert, d);
        const double ref = std::fabs(t.c1);
        EXPECT_LE(std::fabs(t.c2), 1e-6 * ref);
        EXPECT_LE(std::fabs(t.c3), 1e-6 * ref);
        EXPECT_LE(std::fabs(t.c4), 1e-6 * ref);
        EXPECT_EQ(apply_breaking_operator(hc, mg, pert, d, BreakingFlags::only_c1()), t.c1);
    }
}

TEST(BreakingOperator, FiniteDifferenceCrossCheck) {
    // Every derivative differenced: the non-c1 terms shrink like h^2, so they
    // are truncation error and not a missed contribution.
    MgParams mg = kStatic;
    mg.alpha = 0.8;
    const PerturbParams pert = PerturbParams::from_mg(mg, 0.2, 0.5);
    const DerivedParams d = derive_params(mg, pert);
    for (double x : {-0.1, 0.0, 0.07}) {
        const HeatCoords hc{x, 0.3, 0.01};
        const double h = 1e-3;
        const BreakingTerms a = breaking_terms(hc, mg, pert, d, h, DerivativeMode::FiniteDifference);
        const BreakingTerms b = breaking_terms(hc, mg, pert, d, h / 2, DerivativeMode::FiniteDifference);
        const BreakingTerms fac = breaking_terms(hc, mg, pert, d, h / 2, DerivativeMode::Factorized);
        EXPECT_NEAR(b.c1, fac.c1, 1e-9 * std::fabs(fac.c1));
        for (auto [ca, cb] : {std::pair{a.c2, b.c2}, std::pair{a.c3, b.c3}, std::pair{a.c4, b.c4}}) {
            const double ratio = ca / cb;
            EXPECT_GT(ratio, 3.5) << "x " << x;
            EXPECT_LT(ratio, 4.5) << "x " << x;
        }
    }
}

TEST(Psi1Quadrature, MatchesClosedForm) {
    const Scenario s = make(0.25);
    for (double k : {92.0, 100.0, 106.0}) {
        const OptionSpec opt{100, k, 30.0 / 365.0, OptionKind::Call, 0.0625};
        const HeatCoords hc = to_heat_coords(opt, s.pert);
        const Psi1Quadrature q = psi1_quadrature(hc, s.mg, s.pert, s.d, light());
        const double quad = opt.strike * tilt(hc, s.d) * q.value;
        const double cf = perturb_correction(opt, s.pert, s.d, s.mg.r);
        EXPECT_LE(std::fabs(quad - cf), std::max(1e-3 * std::fabs(cf), 5e-3)) << "K " << k;
        EXPECT_NEAR(q.value, psi1_closed_form(hc, s.pert, s.d), 1e-3 * std::fabs(q.value) + 1e-9);
        ASSERT_EQ(q.levels.size(), 2u);
    }
}

TEST(Psi1Quadrature, AllTermsEqualC1Only) {
    const Scenario s = make(0.2);
    const HeatCoords hc = to_heat_coords({100, 97, 30.0 / 365.0, OptionKind::Call, 0.04}, s.pert);
    const double only = psi1_quadrature(hc, s.mg, s.pert, s.d, light()).value;
    const double all = psi1_quadrature(hc, s.mg, s.pert, s.d, light(), BreakingFlags::all()).value;
    EXPECT_LE(std::fabs(all - only), 1e-6 * std::fabs(only));
}

TEST(Psi1Quadrature, V0Invariance) {
    const OptionSpec opt{100, 103, 30.0 / 365.0, OptionKind::Call, 0.05};
    double prev = NAN;
    for (double v0 : {0.5, 1.0, 10.0}) {
        const Scenario s = make(0.22, 0.0, v0);
        const HeatCoords hc = to_heat_coords(opt, s.pert);
        const double c1 = opt.strike * tilt(hc, s.d) * psi1_quadrature(hc, s.mg, s.pert, s.d, light()).value;
        if (!std::isnan(prev)) {
            EXPECT_NEAR(c1, prev, 1e-4 * std::fabs(prev));
        }
        prev = c1;
    }
}

TEST(Psi1Quadrature, ForcedNonConvergence) {
    const Scenario s = make(0.2);
    QuadratureConfig cfg;
    cfg.nodes_x = 8;
    cfg.nodes_y = 8;
    cfg.time_slices = 4;
    cfg.grade_kink = false;
    const HeatCoords hc = to_heat_coords({100, 100, 0.5, OptionKind::Call, 0.04}, s.pert);
    EXPECT_THROW(psi1_quadrature(hc, s.mg, s.pert, s.d, cfg), QuadratureNotConverged);
}

TEST(Psi1Quadrature, ThreadCountDoesNotChangeResult) {
    const Scenario s = make(0.2);
    const HeatCoords hc = to_heat_coords({100, 101, 30.0 / 365.0, OptionKind::Call, 0.04}, s.pert);
    QuadratureConfig a = light(), b = light();
    a.threads = 1;
    b.threads = 4;
    EXPECT_EQ(psi1_quadrature(hc, s.mg, s.pert, s.d, a).value, psi1_quadrature(hc, s.mg, s.pert, s.d, b).value);
}

TEST(Psi1Quadrature, ConfigValidation) {
    const Scenario s = make(0.2);
    const HeatCoords hc{0.0, 0.0, 0.01};
    QuadratureConfig c;
    c.half_width_sigmas = 5.0;
    EXPECT_THROW(psi1_quadrature(hc, s.mg, s.pert, s.d, c), ValidationError);
    c = {};
    c.fd_step = 1e-2;
    EXPECT_THROW(psi1_quadrature(hc, s.mg, s.pert, s.d, c), ValidationError);
    EXPECT_THROW(psi1_quadrature({0.0, 0.0, 0.0}, s.mg, s.pert, s.d, {}), ValidationError);
}

TEST(ReconstructPsi0, MatchesClosedForm) {
    const Scenario s = make(0.3, 0.02);
    for (double x : {-0.1, 0.0, 0.05, 0.2}) {
        const HeatCoords hc{x, 0.4, 0.006};
        const double closed = psi0(hc, s.d).value;
        EXPECT_NEAR(reconstruct_psi0(hc, s.d, {}), closed, 1e-5 * std::max(closed, 1e-3));
    }
}

namespace {

// Observed order from residuals at h and h/2, aggregated as RMS over points.
template <class Residual>
double observed_order(Residual&& res, int n_points, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const HeatCoords hc{-0.2 + 0.4 * u(gen), -0.5 + u(gen), 0.004 + 0.01 * u(gen)};
        const double h = 0.1 * std::sqrt(2.0 * hc.tau), ht = 0.1 * hc.tau;
        const double r1 = res(hc, h, ht), r2 = res(hc, h / 2.0, ht / 2.0);
        s1 += r1 * r1;
        s2 += r2 * r2;
    }
    return 0.5 * std::log2(s1 / s2);
}

}  // namespace

TEST(HeatResidual, Psi0SecondOrder) {
    const Scenario s = make(0.25, 0.01);
    const double p = observed_order([&](const HeatCoords& hc, double h, double ht) { return heat_residual_psi0(hc, s.d, h, ht); },
                                    50, 3);
    EXPECT_GE(p, 1.9);
}

TEST(HeatResidual, Psi1SecondOrder) {
    const Scenario s = make(0.25);
    const double p = observed_order(
        [&](const HeatCoords& hc, double h, double ht) { return heat_residual_psi1(hc, s.mg, s.pert, s.d, h, ht, h); }, 50, 4);
    EXPECT_GE(p, 1.9);
}
