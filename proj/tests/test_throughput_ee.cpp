#include <cmath>

#include <gtest/gtest.h>

#include "noma/sweep.hpp"
#include "noma/throughput_ee.hpp"

namespace {

TEST(Throughput, DelayLimitedFromOutage) {
    const noma::SystemConfig c = noma::relay_only_config(-15.0);
    const double rho = 1000.0;
    const double expected = (1 - noma::outage_d1(c, rho).probability) * c.r1 +
                            (1 - noma::outage_d2_nodir(c, rho).probability) * c.r2;
    EXPECT_NEAR(noma::throughput_delay_limited(c, rho).rate, expected, 1e-14);
}

TEST(Throughput, DelayLimitedIsBoundedByTargetRates) {
    for (bool dir : {false, true}) {
        noma::SystemConfig c = dir ? noma::direct_link_config(-15.0) : noma::relay_only_config(-15.0);
        for (auto d : {noma::Duplex::full, noma::Duplex::half}) {
            c.duplex = d;
            noma::McControl mc;
            mc.samples = 100000;
            const double t = noma::throughput_delay_limited(c, 1e4, mc).rate;
            EXPECT_GE(t, 0.0);
            EXPECT_LE(t, c.r1 + c.r2 + 1e-12);
        }
    }
}

TEST(Throughput, HalfDuplexDirectLinkIsSimulated) {
    noma::SystemConfig c = noma::direct_link_config(-15.0);
    c.duplex = noma::Duplex::half;
    noma::McControl mc;
    mc.samples = 100000;
    const auto r = noma::throughput_delay_limited(c, 100.0, mc);
    EXPECT_EQ(r.method, noma::RateMethod::monte_carlo);
    EXPECT_GT(r.error_bound, 0.0);
}

TEST(Throughput, DelayTolerantIsSumOfRates) {
    const noma::SystemConfig c = noma::relay_only_config(-10.0);
    EXPECT_NEAR(noma::throughput_delay_tolerant(c, 100.0).rate,
                noma::rate_d1(c, 100.0).rate + noma::rate_d2_nodir(c, 100.0).rate, 1e-14);
}

TEST(EnergyEfficiency, HalfDuplexDoublesNumerator) {
    const noma::PowerBudget b{10.0, 10.0, 1.0};
    EXPECT_NEAR(noma::energy_efficiency_from_throughput(2.0, noma::Duplex::full, b), 0.1, 1e-15);
    EXPECT_NEAR(noma::energy_efficiency_from_throughput(2.0, noma::Duplex::half, b), 0.2, 1e-15);
    const noma::PowerBudget longer{10.0, 30.0, 2.0};
    EXPECT_NEAR(noma::energy_efficiency_from_throughput(2.0, noma::Duplex::full, longer), 2.0 / 80.0, 1e-15);
}

TEST(EnergyEfficiency, SnrAndWattsAreIndependentInputs) {
    const noma::SystemConfig c = noma::relay_only_config(-15.0);
    const double a = noma::energy_efficiency(c, 100.0, {10, 10, 1}, noma::TransmissionMode::limited);
    const double b = noma::energy_efficiency(c, 100.0, {20, 20, 1}, noma::TransmissionMode::limited);
    EXPECT_NEAR(a, 2.0 * b, 1e-14);
}

TEST(EnergyEfficiency, RejectsBadBudget) {
    EXPECT_THROW(noma::energy_efficiency_from_throughput(1.0, noma::Duplex::full, {0.0, 1.0, 1.0}),
                 std::invalid_argument);
    EXPECT_THROW(noma::energy_efficiency_from_throughput(1.0, noma::Duplex::full, {1.0, 1.0, -1.0}),
                 std::invalid_argument);
}

}  // namespace
