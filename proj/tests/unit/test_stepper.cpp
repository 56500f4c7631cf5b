#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ballistic/analytic.hpp"
#include "ballistic/grid.hpp"
#include "ballistic/stepper.hpp"

using namespace ballistic;

namespace {

std::vector<double> as_vector(const Field& f) { return {f.values().begin(), f.values().end()}; }

double discrete_mass(const Field& f, double dx) { return f.mass(dx); }

}  // namespace

TEST(FdStep, UniformFieldInteriorUnchanged) {
    const Field f(0.0, std::vector<double>(7, 0.3));
    const auto out = fd_step(f, 0.37);
    for (std::size_t i = 1; i + 1 < out.size(); ++i) EXPECT_EQ(out[i], 0.3);
    EXPECT_EQ(out[0], 0.0);
    EXPECT_EQ(out[6], 0.0);
}

TEST(FdStep, StencilArithmetic) {
    EXPECT_EQ(as_vector(fd_step(Field(0.0, {0, 1, 0}), 0.25)), (std::vector<double>{0, 0.5, 0}));
    EXPECT_EQ(as_vector(fd_step(Field(0.0, {0, 0, 1, 0, 0}), 0.5)), (std::vector<double>{0, 0.5, 0, 0.5, 0}));
}

TEST(FdStep, RejectsOutOfRangeCourant) {
    const Field f(0.0, {0, 1, 0});
    EXPECT_THROW(fd_step(f, 0.51), StabilityError);
    EXPECT_THROW(fd_step(f, -0.01), StabilityError);
    EXPECT_THROW(fd_step(f, 0.45, 0.4), StabilityError);
    EXPECT_THROW(fd_step(Field(0.0, {1, 1}), 0.1), ValidationError);
}

TEST(FdStep, ConservesMassAndSignForRandomFields) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(40);
        for (auto& x : v) x = u(rng);
        // Two zero cells at each end keep the boundary flux at zero.
        v[0] = v[1] = v[38] = v[39] = 0.0;
        const Field f(0.0, v);
        const double nu = 0.5 * u(rng);
        const auto out = fd_step(f, nu);
        EXPECT_NEAR(discrete_mass(out, 1.0), discrete_mass(f, 1.0), 1e-13);
        for (double x : out.values()) EXPECT_GE(x, 0.0);
    }
}

TEST(CourantNumber, EndTimeConvention) {
    const Grid1D g(0.0, 0.1, 11, 0.001, 10);
    EXPECT_EQ(courant_number(0.0, g, 1.0, 1.0), 0.0);
    EXPECT_NEAR(courant_number(1.0, g, 1.0, 1.0), 0.1, 1e-15);
    EXPECT_NEAR(courant_number(10.0, g, 1.0, 1.0), 1.0, 1e-14);
}

TEST(SecondMomentSigma, SampledGaussian) {
    const Grid1D g(-10.0, 0.01, 2001, 0.1, 1);
    const auto f = sample_gaussian(g, GaussianState(1.0, 0.0));
    EXPECT_NEAR(second_moment_sigma(f, g), 1.0, 1e-6);
}

TEST(SecondMomentSigma, SymmetricTwoPoint) {
    const Grid1D g(-2.0, 0.5, 9, 0.1, 1);
    std::vector<double> v(9, 0.0);
    v[1] = v[7] = 1.0;  // x = -1.5 and +1.5
    EXPECT_DOUBLE_EQ(second_moment_sigma(Field(0.0, v), g), 1.5);
}

TEST(SecondMomentSigma, UniformField) {
    const double L = 10.0;
    const std::size_t n = 1001;
    const Grid1D g(-L / 2, L / (n - 1), n, 0.1, 1);
    const Field f(0.0, std::vector<double>(n, 0.1));
    EXPECT_NEAR(second_moment_sigma(f, g), L / std::sqrt(12.0), g.dx());
}

TEST(SecondMomentSigma, ZeroMassRejected) {
    const Grid1D g(0.0, 1.0, 3, 0.1, 1);
    EXPECT_THROW(second_moment_sigma(Field(0.0, {0, 0, 0}), g), ValidationError);
}

TEST(SampleGaussian, DiscreteMassIsOne) {
    const Grid1D g(-6.0, 0.05, 241, 0.1, 1);
    const auto f = sample_gaussian(g, GaussianState(0.7, 0.3));
    EXPECT_NEAR(f.mass(g.dx()), 1.0, 1e-14);
}

class EvolveGaussian : public ::testing::Test {
protected:
    const PhysicalParams params = make_physical_params(1.0, 1.0);  // D = 0.5
    const GaussianState state{1.0, 0.0};
};

TEST_F(EvolveGaussian, MatchesSpreadingLawAtTwo) {
    const auto grid = auto_grid_with_spacing(state, params, 2.0, 0.01, 0.02, 10);
    const std::vector<double> times{0.5, 1.0, 1.5, 2.0};
    const auto r = evolve(sample_gaussian(grid, state), grid, state, params, times);
    ASSERT_EQ(r.snapshots.size(), 4u);
    EXPECT_DOUBLE_EQ(analytic_sigma(2.0, 1.0, 0.5), std::sqrt(2.0));
    for (const auto& f : r.snapshots) {
        const double exact = analytic_sigma(f.time(), 1.0, 0.5);
        EXPECT_NEAR(second_moment_sigma(f, grid), exact, 0.005 * exact) << "t = " << f.time();
    }
    for (const auto& f : r.snapshots) EXPECT_NEAR(f.mass(grid.dx()), 1.0, 1e-9);
    EXPECT_LT(r.report.boundary_leak, 1e-12);
    EXPECT_LE(r.report.mass_drift, 1e-9);
    EXPECT_LE(r.report.max_courant, 0.4);
}

TEST_F(EvolveGaussian, SnapshotAtZeroIsInitialField) {
    const auto grid = auto_grid(state, params, 1.0, 0.01, 10, 10);
    const auto initial = sample_gaussian(grid, state);
    const std::vector<double> times{0.0};
    const auto r = evolve(initial, grid, state, params, times);
    ASSERT_EQ(r.snapshots.size(), 1u);
    EXPECT_EQ(r.snapshots[0], initial);
    EXPECT_EQ(r.report.macro_steps, 0u);
}

TEST_F(EvolveGaussian, SnapshotTimesSnapToMacroSteps) {
    const auto grid = auto_grid(state, params, 1.0, 0.1, 10, 10);
    const std::vector<double> times{0.0, 0.26, 0.5, 1.0};
    const auto r = evolve(sample_gaussian(grid, state), grid, state, params, times);
    EXPECT_NEAR(r.snapshots[1].time(), 0.3, 1e-15);
    EXPECT_NEAR(r.snapshots[2].time(), 0.5, 1e-15);
}

TEST_F(EvolveGaussian, SubstepsKeepCourantBelowLimit) {
    // nu(t) = D_t(t) dt / dx^2 = 0.121 t, which exceeds 0.4 from t ~ 3.3 on.
    const auto p = make_physical_params(1.1, 0.5);
    const auto grid = auto_grid(state, p, 12.0, 0.001, 10, 10);
    const std::vector<double> times{12.0};
    const auto r = evolve(sample_gaussian(grid, state), grid, state, p, times);
    std::size_t expected = 0;
    for (std::size_t k = 1; k <= grid.n_steps(); ++k) {
        const long double nu = 1.21L * (0.001L * k) * 0.001L / (0.1L * 0.1L);
        expected += static_cast<std::size_t>(std::max(1.0L, std::ceil(nu / 0.4L)));
    }
    EXPECT_EQ(r.report.macro_steps, 12000u);
    EXPECT_EQ(r.report.total_substeps, expected);
    EXPECT_LE(r.report.max_courant, 0.4);
    EXPECT_GT(r.report.max_courant, 0.35);
}

TEST_F(EvolveGaussian, NonNegativeAndMirrorSymmetric) {
    const auto grid = auto_grid(state, params, 3.0, 0.01, 10, 10);
    const std::vector<double> times{0.5, 1.0, 2.0, 3.0};
    const auto r = evolve(sample_gaussian(grid, state), grid, state, params, times);
    for (const auto& f : r.snapshots) {
        const std::size_t n = f.size();
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_GE(f[i], 0.0);
            EXPECT_NEAR(f[i], f[n - 1 - i], 1e-12);
        }
    }
}

TEST_F(EvolveGaussian, SecondOrderInSpace) {
    auto linf = [&](double dx, double dt) {
        const auto grid = auto_grid_with_spacing(state, params, 1.0, dt, dx, 10);
        const std::vector<double> times{1.0};
        const auto r = evolve(sample_gaussian(grid, state), grid, state, params, times);
        const double sigma = analytic_sigma(1.0, 1.0, 0.5);
        double err = 0.0;
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            err = std::max(err, std::abs(r.snapshots[0][i] - gaussian_pdf(grid.x(i), 0.0, sigma)));
        }
        return err;
    };
    const double ratio = linf(0.1, 0.01) / linf(0.05, 0.0025);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST_F(EvolveGaussian, RejectsBadInputs) {
    const auto grid = auto_grid(state, params, 1.0, 0.01, 10, 10);
    const auto f = sample_gaussian(grid, state);
    std::vector<double> doubled(f.values().begin(), f.values().end());
    for (auto& x : doubled) x *= 2.0;
    const std::vector<double> times{1.0};
    EXPECT_THROW(evolve(Field(0.0, doubled), grid, state, params, times), ValidationError);
    const std::vector<double> unsorted{0.5, 0.2};
    EXPECT_THROW(evolve(f, grid, state, params, unsorted), ValidationError);
    const std::vector<double> late{2.0};
    EXPECT_THROW(evolve(f, grid, state, params, late), ValidationError);
}

TEST_F(EvolveGaussian, SmallDomainRaisesWithTime) {
    const Grid1D grid(-3.0, 0.1, 61, 0.01, 400);
    const std::vector<double> times{0.5, 1.0, 2.0, 4.0};
    try {
        evolve(sample_gaussian(grid, state), grid, state, params, times);
        FAIL() << "expected DomainTooSmallError";
    } catch (const DomainTooSmallError& e) {
        EXPECT_GT(e.time(), 0.0);
        EXPECT_NE(std::string(e.what()).find("t = "), std::string::npos);
    }
}
