#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mgpert/model.hpp"

using namespace mgpert;

TEST(DeriveParams, ReferenceScenario) {
    const PerturbParams pert{0.2865, 1.5, 1.0};
    const DerivedParams d = derive_params(1.5, 0.0, pert);
    EXPECT_NEAR(d.gamma, -3.75, 1e-14);
    EXPECT_NEAR(d.r1, 0.0, 1e-15);
    // Frozen from an independent evaluation of 1 + sqrt(2) gamma / (sigma xi0).
    EXPECT_NEAR(d.r2, -11.34043248144062, 1e-12);
    // Published rounding is -11.339.
    EXPECT_NEAR(d.r2, -11.339, 2e-3);
}

TEST(DeriveParams, OmegaZeroForcesAZero) {
    const PerturbParams pert{0.3, 1.0, 1.0};
    const DerivedParams d = derive_params(2.0, 0.5 * 0.09, pert);
    EXPECT_NEAR(d.omega, 0.0, 1e-16);
    EXPECT_NEAR(d.r1, 1.0, 1e-15);
    EXPECT_NEAR(d.a, 0.0, 1e-15);
}

TEST(DeriveParams, TiltConstantsMatchDefinitions) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const PerturbParams pert{0.05 + 0.9 * u(gen), 0.1 + 2.0 * u(gen), 0.1 + 5.0 * u(gen)};
        const double kappa = 0.1 + 5.0 * u(gen), r = 0.1 * u(gen);
        const DerivedParams d = derive_params(kappa, r, pert);
        EXPECT_LT(d.gamma, 0.0);
        EXPECT_LT(d.r2, 1.0);
        EXPECT_NEAR(d.a, -(d.r1 - 1.0) / 2.0, 1e-15 * (1.0 + std::fabs(d.a)));
        EXPECT_NEAR(d.b, -(d.r2 - 1.0) / 2.0, 1e-15 * (1.0 + std::fabs(d.b)));
        const double c = -((d.r2 - 1.0) * (d.r2 - 1.0) + (d.r1 + 1.0) * (d.r1 + 1.0)) / 4.0;
        EXPECT_NEAR(d.c, c, 1e-15 * std::fabs(c));
        EXPECT_NEAR(d.eta, 2.0 * pert.xi0 * pert.xi0 / (pert.sigma * pert.sigma), 1e-14 * d.eta);
    }
}

TEST(DeriveParams, IndependentOfV0) {
    const DerivedParams d1 = derive_params(1.5, 0.01, {0.2, 1.5, 1.0});
    const DerivedParams d2 = derive_params(1.5, 0.01, {0.2, 1.5, 37.0});
    EXPECT_EQ(d1.r2, d2.r2);
    EXPECT_EQ(d1.a, d2.a);
    EXPECT_EQ(d1.b, d2.b);
    EXPECT_EQ(d1.c, d2.c);
    EXPECT_EQ(d1.gamma, d2.gamma);
}

TEST(DeriveParams, DegenerateR2Rejected) {
    // R2 = 0 when kappa = sigma xi0 / sqrt(2) - xi0^2.
    const double sigma = 1.0, xi0 = 0.5;
    const double kappa = sigma * xi0 / std::sqrt(2.0) - xi0 * xi0;
    EXPECT_THROW(derive_params(kappa, 0.0, {sigma, xi0, 1.0}), DegenerateParams);
    EXPECT_NO_THROW(derive_params(kappa * 1.01, 0.0, {sigma, xi0, 1.0}));
}

TEST(DeriveParams, DimensionalConsistency) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double k = 0.1 + 10.0 * u(gen);
        const OptionSpec opt{100.0, 80.0 + 40.0 * u(gen), 0.5 * u(gen) + 0.01, OptionKind::Call,
                             0.01 + 0.2 * u(gen)};
        const PerturbParams pert{0.1 + 0.4 * u(gen), 0.5 + u(gen), 0.5 + u(gen)};
        const double kappa = 0.5 + 2.0 * u(gen), r = 0.05 * u(gen);
        // Time x k; every rate (and squared volatility) / k.
        const OptionSpec opt_k{opt.spot, opt.strike, opt.tau_cal * k, opt.kind, opt.variance / k};
        const PerturbParams pert_k{pert.sigma / std::sqrt(k), pert.xi0 / std::sqrt(k), pert.v0 / k};
        const DerivedParams d = derive_params(kappa, r, pert), dk = derive_params(kappa / k, r / k, pert_k);
        const HeatCoords h = to_heat_coords(opt, pert), hk = to_heat_coords(opt_k, pert_k);
        const auto rel = [](double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(a)); };
        EXPECT_TRUE(rel(h.x, hk.x));
        EXPECT_TRUE(rel(h.y, hk.y));
        EXPECT_TRUE(rel(h.tau, hk.tau));
        EXPECT_TRUE(rel(d.r1, dk.r1));
        EXPECT_TRUE(rel(d.r2, dk.r2));
        EXPECT_TRUE(rel(d.a, dk.a));
        EXPECT_TRUE(rel(d.b, dk.b));
        EXPECT_TRUE(rel(d.c, dk.c));
    }
}

TEST(HeatCoords, Examples) {
    const PerturbParams pert{0.2, 1.0, 0.04};
    const HeatCoords h0 = to_heat_coords({100.0, 100.0, 0.0, OptionKind::Call, 0.04}, pert);
    EXPECT_EQ(h0.x, 0.0);
    EXPECT_EQ(h0.y, 0.0);
    EXPECT_EQ(h0.tau, 0.0);

    const HeatCoords h1 = to_heat_coords({110.0, 100.0, 1.0, OptionKind::Call, 0.04}, pert);
    EXPECT_NEAR(h1.x, 0.09531017980432493, 1e-15);
    EXPECT_NEAR(h1.tau, 0.02, 1e-16);

    const HeatCoords h2 = to_heat_coords({90.0, 100.0, 1.0, OptionKind::Call, 0.04}, pert);
    const HeatCoords h3 = to_heat_coords({100.0, 90.0, 1.0, OptionKind::Call, 0.04}, pert);
    EXPECT_LT(h2.x, 0.0);
    EXPECT_NEAR(h2.x, -h3.x, 1e-15);
}

TEST(HeatCoords, RoundTrip) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const OptionSpec opt{50.0 + 100.0 * u(gen), 50.0 + 100.0 * u(gen), u(gen), OptionKind::Put,
                             1e-4 + u(gen)};
        const PerturbParams pert{0.3, 1.0, 0.01 + 10.0 * u(gen)};
        const HeatCoords h = to_heat_coords(opt, pert);
        EXPECT_NEAR(std::exp(h.x) * opt.strike, opt.spot, 1e-14 * opt.spot);
        EXPECT_NEAR(std::exp(h.y) * pert.v0, opt.variance, 1e-14 * opt.variance);
    }
}

TEST(HeatCoords, NonpositiveVariance) {
    EXPECT_THROW(to_heat_coords({100.0, 100.0, 0.1, OptionKind::Call, 0.0}, {0.2, 1.0, 1.0}), NonpositiveVariance);
}

TEST(Validation, Invariants) {
    MgParams mg;
    EXPECT_NO_THROW(mg.validate());
    mg.rho = 1.5;
    EXPECT_THROW(mg.validate(), ValidationError);
    mg = MgParams{};
    mg.kappa = 0.0;
    EXPECT_THROW(mg.validate(), ValidationError);
    mg = MgParams{};
    mg.xi = 0.0;
    EXPECT_THROW(mg.validate(), ValidationError);
    EXPECT_NO_THROW(mg.validate_for_simulation());
    mg.r = -0.01;
    EXPECT_THROW(mg.validate_for_simulation(), ValidationError);

    EXPECT_THROW((PerturbParams{0.0, 1.0, 1.0}.validate()), ValidationError);
    EXPECT_THROW((PerturbParams{0.2, 1.0, -1.0}.validate()), ValidationError);
    EXPECT_THROW((OptionSpec{100.0, -1.0, 0.1, OptionKind::Call, 0.04}.validate()), ValidationError);
    EXPECT_THROW((OptionSpec{100.0, 100.0, -0.1, OptionKind::Call, 0.04}.validate()), ValidationError);
    EXPECT_THROW((OptionSpec{100.0, 100.0, 0.1, OptionKind::Call, -0.04}.validate()), ValidationError);
}

TEST(PerturbParams, Linkage) {
    MgParams mg;
    mg.xi = 1.2;
    mg.alpha = 0.75;
    const PerturbParams p = PerturbParams::from_mg(mg, 0.3);
    EXPECT_NEAR(p.xi0, 1.2 * std::pow(0.3, -0.5), 1e-14);
    mg.alpha = 1.0;
    EXPECT_EQ(PerturbParams::from_mg(mg, 0.3).xi0, 1.2);
}
