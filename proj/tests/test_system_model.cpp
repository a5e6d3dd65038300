#include <cmath>
#include <limits>
#include <stdexcept>

#include <gtest/gtest.h>

#include "noma/system_model.hpp"

namespace {

using noma::Duplex;
using noma::SystemConfig;

TEST(SystemConfig, DefaultsAreValid) {
    SystemConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_TRUE(c.is_full_duplex());
    EXPECT_EQ(c.switching_factor(), 1.0);
    c.duplex = Duplex::half;
    EXPECT_EQ(c.switching_factor(), 0.0);
}

TEST(SystemConfig, RejectsBadParameters) {
    auto expect_bad = [](auto mutate) {
        SystemConfig c;
        mutate(c);
        EXPECT_THROW(c.validate(), std::invalid_argument);
    };
    expect_bad([](SystemConfig& c) { c.a1 = 0.5; c.a2 = 0.5; });  // needs a2 > a1
    expect_bad([](SystemConfig& c) { c.a1 = 0.3; c.a2 = 0.8; });  // must sum to 1
    expect_bad([](SystemConfig& c) { c.omega0 = 0.0; });
    expect_bad([](SystemConfig& c) { c.omega1 = -1.0; });
    expect_bad([](SystemConfig& c) { c.omega_li = -0.1; });
    expect_bad([](SystemConfig& c) { c.kappa = -0.5; });
    expect_bad([](SystemConfig& c) { c.r1 = 0.0; });
    expect_bad([](SystemConfig& c) { c.omega2 = std::numeric_limits<double>::infinity(); });
}

TEST(Geometry, PathLossGains) {
    const auto g = noma::geometry_gains(0.3, 2.0);
    EXPECT_NEAR(g.omega1, 1.0 / 0.09, 1e-12);
    EXPECT_NEAR(g.omega2, 1.0 / 0.49, 1e-12);
    EXPECT_THROW(noma::geometry_gains(1.0, 2.0), std::invalid_argument);
    EXPECT_THROW(noma::geometry_gains(0.3, 0.0), std::invalid_argument);
}

TEST(Thresholds, FullAndHalfDuplexTargets) {
    SystemConfig c;
    c.r1 = 3.0;
    c.r2 = 0.5;
    EXPECT_NEAR(noma::target_sinr(c, 3.0), 7.0, 1e-12);
    c.duplex = Duplex::half;
    EXPECT_NEAR(noma::target_sinr(c, 3.0), 63.0, 1e-12);
    c.hd_threshold_convention = noma::HdThresholdConvention::paper_literal;
    EXPECT_NEAR(noma::target_sinr(c, 3.0), 32.0, 1e-12);
}

TEST(Thresholds, TauBetaTheta) {
    SystemConfig c;
    c.r1 = 1.0;
    c.r2 = 1.0;
    const double rho = 100.0;
    const auto t = noma::derive_thresholds(c, rho);
    EXPECT_TRUE(t.feasible);
    EXPECT_NEAR(t.tau, 1.0 / (rho * (0.8 - 0.2)), 1e-15);
    EXPECT_NEAR(t.beta, 1.0 / (0.2 * rho), 1e-15);
    EXPECT_EQ(t.theta, std::max(t.tau, t.beta));
}

TEST(Thresholds, InfeasiblePowerSplit) {
    SystemConfig c;
    c.r2 = 2.0;  // gamma_th2 = 3, a2 - a1 gamma = 0.2
    EXPECT_TRUE(noma::derive_thresholds(c, 10.0).feasible);
    c.r2 = 2.5;  // gamma_th2 ~ 4.66 > a2/a1 = 4
    const auto t = noma::derive_thresholds(c, 10.0);
    EXPECT_FALSE(t.feasible);
    EXPECT_TRUE(std::isinf(t.tau));
}

TEST(Thresholds, RejectsNonPositiveSnr) {
    SystemConfig c;
    EXPECT_THROW(noma::derive_thresholds(c, 0.0), std::invalid_argument);
    EXPECT_THROW(noma::derive_thresholds(c, -1.0), std::invalid_argument);
}

TEST(Decibels, RoundTrip) {
    EXPECT_NEAR(noma::db_to_linear(-15.0), std::pow(10.0, -1.5), 1e-15);
    EXPECT_NEAR(noma::linear_to_db(noma::db_to_linear(37.0)), 37.0, 1e-12);
}

TEST(Sinr, LoopInterferenceOnlyInFullDuplex) {
    SystemConfig c;
    c.omega_li = 0.1;
    const noma::ChannelDraw d{0.5, 2.0, 1.5, 0.3};
    const double rho = 10.0;
    const double fd = noma::sinr_d1_detect_x2(d, c, rho);
    EXPECT_NEAR(fd, 2.0 * 0.8 * 10 / (2.0 * 0.2 * 10 + 0.3 * 10 + 1), 1e-14);
    c.duplex = Duplex::half;
    EXPECT_NEAR(noma::sinr_d1_detect_x2(d, c, rho), 2.0 * 0.8 * 10 / (2.0 * 0.2 * 10 + 1), 1e-14);
    EXPECT_NEAR(noma::sinr_d1_own(d, c, rho), 2.0 * 0.2 * 10, 1e-14);
}

TEST(Sinr, MrcAndResidualInterference) {
    SystemConfig c;
    c.kappa = 0.5;
    const noma::ChannelDraw d{0.5, 2.0, 1.5, 0.0};
    const double rho = 10.0;
    const double direct = 0.5 * 0.8 * 10 / (0.5 * 0.2 * 10 + 1);
    EXPECT_NEAR(noma::sinr_d2_direct_ub(d, c, rho), direct, 1e-14);
    EXPECT_NEAR(noma::sinr_d2_mrc(d, c, rho), direct + 15.0, 1e-14);
    EXPECT_NEAR(noma::sinr_d2_direct_ri(d, c, rho), 0.5 * 0.8 * 10 / (0.5 * 0.2 * 10 + 0.5 * 1.5 * 10 + 1), 1e-14);
    EXPECT_NEAR(noma::sinr_d2_relay_ri(d, c, rho), 15.0 / (0.5 * 0.5 * 10 + 1), 1e-14);
    c.kappa = 0.0;
    EXPECT_NEAR(noma::sinr_d2_direct_ri(d, c, rho), direct, 1e-14);
}

}  // namespace
