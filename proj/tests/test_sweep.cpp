#include <cmath>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "noma/sweep.hpp"

namespace {

TEST(ConfigParser, ParsesKeysCommentsAndDecibels) {
    const auto p = noma::parse_config(R"(# network
a1 = 0.25
a2 = 0.75
omega_li_db = -15   # loop interference
d = 0.3
alpha = 2
r1 = 3
r2 = 0.5
duplex = hd
direct_link = true
hd_threshold_convention = paper_literal
ps = 5
)");
    EXPECT_EQ(p.system.a1, 0.25);
    EXPECT_NEAR(p.system.omega_li, std::pow(10.0, -1.5), 1e-15);
    EXPECT_NEAR(p.system.omega1, 1 / 0.09, 1e-12);
    EXPECT_EQ(p.system.duplex, noma::Duplex::half);
    EXPECT_TRUE(p.system.direct_link);
    EXPECT_EQ(p.system.hd_threshold_convention, noma::HdThresholdConvention::paper_literal);
    EXPECT_EQ(p.budget.ps, 5.0);
    EXPECT_EQ(p.budget.pr, 10.0);
}

TEST(ConfigParser, RejectsBadInput) {
    EXPECT_THROW(noma::parse_config("nonsense = 1"), noma::usage_error);
    EXPECT_THROW(noma::parse_config("a1 0.2"), noma::usage_error);
    EXPECT_THROW(noma::parse_config("r1 = abc"), noma::usage_error);
    EXPECT_THROW(noma::parse_config("r1 = 1\nr1 = 2"), noma::usage_error);
    EXPECT_THROW(noma::parse_config("omega1 = 2\nomega1_db = 3"), noma::usage_error);
    EXPECT_THROW(noma::parse_config("d = 0.3"), noma::usage_error);
    EXPECT_THROW(noma::parse_config("a1 = 0.6\na2 = 0.4"), noma::usage_error);
    EXPECT_THROW(noma::parse_config("duplex = both"), noma::usage_error);
}

TEST(ConfigParser, SecondCoefficientDefaultsToComplement) {
    EXPECT_DOUBLE_EQ(noma::parse_config("a1 = 0.3").system.a2, 0.7);
    EXPECT_EQ(noma::parse_config("").system.a2, 0.8);
}

TEST(ConfigParser, OverridesReplaceKeysAndTwins) {
    const std::string text = "omega_li = 0.1\nr1 = 3\nd = 0.3\nalpha = 2\n";
    const auto p = noma::parse_config(text, {"r1=2", "omega_li_db=-20"});
    EXPECT_EQ(p.system.r1, 2.0);
    EXPECT_NEAR(p.system.omega_li, 0.01, 1e-15);
    const auto q = noma::parse_config(text, {"d = 0.5"});
    EXPECT_NEAR(q.system.omega1, 4.0, 1e-12);
    EXPECT_THROW(noma::parse_config(text, {"r1"}), noma::usage_error);
}

TEST(SnrGrid, RangeListAndErrors) {
    EXPECT_EQ(noma::parse_snr_grid("0:5:40").size(), 9u);
    EXPECT_EQ(noma::parse_snr_grid("0:0.1:1").size(), 11u);
    EXPECT_EQ(noma::parse_snr_grid("0,10,20"), (std::vector<double>{0, 10, 20}));
    EXPECT_EQ(noma::parse_snr_grid("35"), (std::vector<double>{35}));
    EXPECT_THROW(noma::parse_snr_grid("10:5:0"), noma::usage_error);
    EXPECT_THROW(noma::parse_snr_grid("0:0:10"), noma::usage_error);
    EXPECT_THROW(noma::parse_snr_grid("10,5"), noma::usage_error);
    EXPECT_THROW(noma::parse_snr_grid(""), noma::usage_error);
}

TEST(Registry, IdsAreUniqueAndEveryMetricEvaluates) {
    std::set<std::string> ids;
    noma::SweepContext ctx;
    ctx.system = noma::relay_only_config(-15.0);
    noma::McControl mc;
    mc.samples = 2000;
    ctx.mc = mc;
    const std::vector<double> grid = {10.0, 30.0};
    for (const auto& m : noma::metric_registry()) {
        EXPECT_TRUE(ids.insert(m.id).second) << m.id;
        EXPECT_TRUE(m.analytic || m.simulate) << m.id;
        const auto rows = noma::evaluate_metric(m.id, ctx, grid);
        ASSERT_EQ(rows.size(), 2u) << m.id;
        for (const auto& r : rows) {
            EXPECT_EQ(r.metric, m.id);
            EXPECT_TRUE(r.analytic || r.mc_mean) << m.id;
            EXPECT_FALSE(r.method.empty());
        }
    }
}

TEST(Sweep, AnalyticOnlyLeavesSimulationFieldsEmpty) {
    noma::SweepSpec spec;
    spec.snr_db = {0, 20};
    spec.metrics = {"outage_d1_fd", "rate_d2_dir_fd"};
    spec.context.system = noma::direct_link_config(-15.0);
    const auto rows = noma::run_sweep(spec);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_TRUE(rows[0].analytic.has_value());
    EXPECT_FALSE(rows[0].mc_mean.has_value());
    // Simulation-only metrics always simulate.
    EXPECT_FALSE(rows[2].analytic.has_value());
    EXPECT_EQ(rows[2].samples, noma::default_mc_samples);
}

TEST(Sweep, UnknownOrMissingMetrics) {
    noma::SweepSpec spec;
    spec.snr_db = {0};
    EXPECT_THROW(noma::run_sweep(spec), noma::usage_error);
    spec.metrics = {"outage_d1_fd", "bogus"};
    EXPECT_THROW(noma::run_sweep(spec), noma::usage_error);
}

TEST(Sweep, InfeasibleConfigIsFlagged) {
    noma::SystemConfig c = noma::relay_only_config(-15.0);
    EXPECT_TRUE(noma::infeasible_modes(c).empty());
    c.r2 = 1.0;  // gamma_th2 = 3 in half duplex, a2/a1 = 4: still feasible
    EXPECT_TRUE(noma::infeasible_modes(c).empty());
    c.r2 = 1.5;  // half duplex needs gamma 7 > 4
    EXPECT_EQ(noma::infeasible_modes(c), (std::vector<std::string>{"hd"}));
}

TEST(Serialization, CsvHasFixedColumnsAndEmptyFields) {
    std::vector<noma::SweepRow> rows(1);
    rows[0].snr_db = 10;
    rows[0].metric = "outage_d1_fd";
    rows[0].analytic = 0.25;
    rows[0].method = "exact_closed_form";
    EXPECT_EQ(noma::to_csv(rows),
              "snr_db,metric,analytic,mc_mean,mc_se,method,samples\n10,outage_d1_fd,0.25,,,exact_closed_form,\n");
}

TEST(Serialization, JsonRoundTrip) {
    noma::SweepContext ctx;
    ctx.system = noma::relay_only_config(-15.0);
    noma::McControl mc;
    mc.samples = 5000;
    ctx.mc = mc;
    auto rows = noma::evaluate_metric("outage_d2_nodir_hd", ctx, std::vector<double>{0.0, 12.5});
    const auto more = noma::evaluate_metric("outage_asym_d1_hd", ctx, std::vector<double>{40.0});
    rows.insert(rows.end(), more.begin(), more.end());
    const auto text = noma::to_json(rows).dump();
    EXPECT_EQ(noma::rows_from_json(nlohmann::json::parse(text)), rows);
}

TEST(Figures, EveryPresetBuildsAndIsStable) {
    for (const auto& id : noma::figure_ids()) {
        const auto a = noma::figure_preset(id);
        EXPECT_EQ(a, noma::figure_preset(id));
        EXPECT_FALSE(a.curves.empty()) << id;
        EXPECT_EQ(a.snr_db.front(), 0.0);
        EXPECT_EQ(a.snr_db.back(), 40.0);
        for (const auto& c : a.curves) {
            EXPECT_NE(noma::find_metric(c.metric), nullptr) << c.metric;
            EXPECT_EQ(c.label.find(','), std::string::npos);
        }
    }
    EXPECT_THROW(noma::figure_preset("fig1"), noma::usage_error);
}

TEST(Figures, LoopInterferenceVariantsAreLabelled) {
    const auto f = noma::figure_preset("fig6");
    std::set<std::string> labels;
    for (const auto& c : f.curves)
        labels.insert(c.label);
    EXPECT_TRUE(labels.count("outage_d2_dir_fd:li_db=-20"));
    EXPECT_TRUE(labels.count("outage_d2_dir_fd:li_db=-10"));
}

TEST(Figures, RunProducesOneRowPerCurveAndSnr) {
    const auto f = noma::figure_preset("fig3");
    const auto rows = noma::run_figure(f, std::nullopt);
    EXPECT_EQ(rows.size(), f.curves.size() * f.snr_db.size());
}

TEST(Validation, PassesAndCatchesInjectedFault) {
    noma::ValidationOptions opt;
    opt.samples = 1000000;
    opt.snr_db = {0, 20, 40};
    const auto good = noma::run_validation(opt);
    EXPECT_TRUE(good.all_pass()) << good.text();
    EXPECT_EQ(good.checks.size(), 30u);
    opt.corrupt_omega1 = true;
    const auto bad = noma::run_validation(opt);
    EXPECT_FALSE(bad.all_pass());
    for (const auto& c : bad.checks)
        if (c.name != "outage_d1_fd")
            EXPECT_TRUE(c.pass) << c.name;
}

TEST(Validation, ZeroVarianceChecksUseBinomialFloor) {
    const noma::McEstimate all_fail{1.0, 0.0, 1000000};
    EXPECT_NEAR(noma::outage_check_error(all_fail, 0.9999), std::sqrt(0.9999 * 0.0001 / 1e6), 1e-15);
    const noma::McEstimate noisy{0.5, 0.01, 100};
    EXPECT_EQ(noma::outage_check_error(noisy, 0.5), std::sqrt(0.25 / 100));
}

}  // namespace
