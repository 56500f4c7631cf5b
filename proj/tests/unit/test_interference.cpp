#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ballistic/interference.hpp"

using namespace ballistic;

namespace {
const PhysicalParams kNatural = make_physical_params(1.0, 1.0);
constexpr double kPi = std::numbers::pi;
}  // namespace

TEST(Phase, LinearOddInPosition) {
    EXPECT_EQ(phase(0.0, 1.0, kNatural), 0.0);
    EXPECT_DOUBLE_EQ(phase(kPi, 1.0, kNatural), kPi);
    EXPECT_DOUBLE_EQ(phase(-2.0, 0.5, make_physical_params(1.0, 2.0)), -2.0);
    EXPECT_DOUBLE_EQ(phase(-1.3, 0.7, kNatural), -phase(1.3, 0.7, kNatural));
}

TEST(ComposeIntensity, TwoWaveRule) {
    EXPECT_DOUBLE_EQ(compose_intensity(1, 1, 0), 4.0);
    EXPECT_NEAR(compose_intensity(1, 1, kPi), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(compose_intensity(1, 0, 1.234), 1.0);
    EXPECT_NEAR(compose_intensity(4, 1, kPi / 2), 5.0, 1e-15);
    EXPECT_THROW(compose_intensity(-1e-3, 1, 0), ValidationError);
    EXPECT_THROW(compose_intensity(1, -1, 0), ValidationError);
}

TEST(ComposeIntensity, NonNegativeAndWithinEnvelope) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> p(0.0, 10.0);
    std::uniform_real_distribution<double> a(-50.0, 50.0);
    for (int i = 0; i < 20000; ++i) {
        const double p1 = p(rng) * (i % 7 == 0 ? 1e-12 : 1.0);
        const double p2 = p(rng);
        const double phi = a(rng);
        const double total = compose_intensity(p1, p2, phi);
        EXPECT_GE(total, 0.0);
        EXPECT_LE(std::abs(total - p1 - p2), 2.0 * std::sqrt(p1 * p2) * (1 + 1e-12) + 1e-14);
    }
    // Exact destructive interference of equal beams.
    EXPECT_GE(compose_intensity(0.3, 0.3, kPi), 0.0);
}

class DoubleSlit : public ::testing::Test {
protected:
    static std::vector<double> times() { return {0.0, 1.0, 2.0, 3.0}; }

    static IntensityMap run(const SlitConfig& s, double dx = 0.1) {
        const auto grid = auto_grid_double_slit(s, kNatural, 3.0, 0.01, dx, 10);
        return simulate_double_slit(s, grid, kNatural, times());
    }
};

TEST_F(DoubleSlit, CoincidentBeamsQuadruple) {
    const auto map = run(SlitConfig(0.0, 1.0, 0.2, 0.2));
    for (std::size_t s = 0; s < map.times.size(); ++s) {
        for (std::size_t i = 0; i < map.x_axis.size(); ++i) {
            EXPECT_NEAR(map.p_total[s][i], 4.0 * map.p1[s][i], 1e-12 * (1.0 + map.p1[s][i]));
        }
    }
}

TEST_F(DoubleSlit, ZeroVelocityDifferenceIsCoherentSum) {
    const auto map = run(SlitConfig(8.0, 1.0, 0.0, 0.0));
    const std::size_t mid = (map.x_axis.size() - 1) / 2;
    ASSERT_NEAR(map.x_axis[mid], 0.0, 1e-12);
    for (std::size_t s = 0; s < map.times.size(); ++s) {
        for (std::size_t i = 0; i < map.x_axis.size(); ++i) {
            const double coherent = std::pow(std::sqrt(map.p1[s][i]) + std::sqrt(map.p2[s][i]), 2);
            EXPECT_NEAR(map.p_total[s][i], coherent, 1e-12);
        }
        // Equal tails at the midpoint.
        EXPECT_NEAR(map.p_total[s][mid], 4.0 * map.p1[s][mid], 1e-12);
    }
}

TEST_F(DoubleSlit, MirrorSymmetricConfigurationGivesEvenIntensity) {
    const auto map = run(SlitConfig::symmetric(3.0, 1.0, 1.3));
    const std::size_t n = map.x_axis.size();
    for (std::size_t s = 0; s < map.times.size(); ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(map.p_total[s][i], map.p_total[s][n - 1 - i], 1e-12);
        }
    }
}

TEST_F(DoubleSlit, EachBeamStaysNormalised) {
    const auto map = run(SlitConfig(4.0, 1.0, 0.3, -0.9));
    const double dx = map.x_axis[1] - map.x_axis[0];
    for (std::size_t s = 0; s < map.times.size(); ++s) {
        double m1 = 0.0;
        double m2 = 0.0;
        for (std::size_t i = 0; i < map.x_axis.size(); ++i) {
            m1 += map.p1[s][i] * dx;
            m2 += map.p2[s][i] * dx;
        }
        EXPECT_NEAR(m1, 1.0, 1e-9);
        EXPECT_NEAR(m2, 1.0, 1e-9);
    }
}

TEST_F(DoubleSlit, DriftMovesBeamCentres) {
    const SlitConfig s(4.0, 1.0, 0.5, -0.25);
    const auto map = run(s);
    const std::size_t last = map.times.size() - 1;
    double c1 = 0.0;
    double c2 = 0.0;
    for (std::size_t i = 0; i < map.x_axis.size(); ++i) {
        c1 += map.p1[last][i] * map.x_axis[i] * 0.1;
        c2 += map.p2[last][i] * map.x_axis[i] * 0.1;
    }
    EXPECT_NEAR(c1, -2.0 + 0.5 * 3.0, 1e-9);
    EXPECT_NEAR(c2, 2.0 - 0.25 * 3.0, 1e-9);
}

TEST_F(DoubleSlit, FringeMaximaSitOnClosedFormPositions) {
    for (double sigma0 : {0.8, 1.5}) {
        for (double separation : {2.0, 5.0}) {
            const auto s = SlitConfig::symmetric(separation, sigma0, 2.0);
            const auto map = run(s, sigma0 / 10);
            const auto maxima = detect_fringe_maxima(map, map.times.size() - 1, s.dvx(), kNatural);
            ASSERT_GE(maxima.size(), 3u);
            const double dx = sigma0 / 10;
            for (const auto& m : maxima) {
                EXPECT_NEAR(m.x_detected, 2.0 * kPi * m.n / 2.0, dx);
                EXPECT_LE(m.error_cells, 1.0);
            }
            EXPECT_NEAR(measured_fringe_spacing(maxima), fringe_spacing(2.0, kNatural), dx);
        }
    }
}

TEST_F(DoubleSlit, BeamEscapingDomainIsReported) {
    const SlitConfig s(2.0, 1.0, 6.0, -6.0);
    const Grid1D small(-20.0, 0.1, 401, 0.01, 300);
    const std::vector<double> t{0.0, 3.0};
    EXPECT_THROW(simulate_double_slit(s, small, kNatural, t), DomainTooSmallError);
}

TEST(FringeSpacing, InverselyProportionalToVelocityDifference) {
    EXPECT_DOUBLE_EQ(fringe_spacing(1.0, kNatural), 2.0 * kPi);
    EXPECT_DOUBLE_EQ(fringe_spacing(0.5, kNatural), 2.0 * fringe_spacing(1.0, kNatural));
    EXPECT_THROW(fringe_spacing(0.0, kNatural), ValidationError);
}
