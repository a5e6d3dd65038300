#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

namespace {

struct Run {
    int exit_code;
    std::string out;
};

Run run(const std::string& args, const std::string& env = {}) {
    const std::string cmd = env + " " + NOMA_CLI_PATH + " " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe)
        throw std::runtime_error("popen failed");
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0)
        out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

TEST(Cli, SweepWritesCsv) {
    const auto r = run("sweep --metrics outage_d1_fd,rate_d1_hd --snr 0:10:20");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.out.rfind("snr_db,metric,analytic,mc_mean,mc_se,method,samples\n", 0), 0u);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 7);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("sweep --metrics not_a_metric").exit_code, 2);
    EXPECT_EQ(run("sweep --metrics ,").exit_code, 2);
    EXPECT_EQ(run("figure fig11").exit_code, 2);
    EXPECT_EQ(run("sweep --metrics outage_d1_fd --snr 5:1:0").exit_code, 2);
    EXPECT_EQ(run("sweep --metrics outage_d1_fd --set bogus=1").exit_code, 2);
    EXPECT_EQ(run("frobnicate").exit_code, 2);
}

TEST(Cli, ConfigFileAndOverrides) {
    const auto path = std::filesystem::temp_directory_path() / "noma_cli_test.cfg";
    std::ofstream(path) << "d = 0.3\nalpha = 2\nomega_li_db = -15\nr1 = 3\nr2 = 0.5\n";
    const auto a = run("sweep --config " + path.string() + " --metrics outage_d1_fd --snr 20");
    const auto b = run("sweep --config " + path.string() + " --set r1=2 --metrics outage_d1_fd --snr 20");
    EXPECT_EQ(a.exit_code, 0);
    EXPECT_EQ(b.exit_code, 0);
    EXPECT_NE(a.out, b.out);
    EXPECT_EQ(run("sweep --config /nonexistent/x.cfg --metrics outage_d1_fd").exit_code, 2);
    std::filesystem::remove(path);
}

TEST(Cli, JsonFormat) {
    const auto r = run("sweep --metrics outage_d1_hd --snr 10 --format json");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("\"metric\": \"outage_d1_hd\""), std::string::npos);
}

TEST(Cli, OutputIsIndependentOfThreadCount) {
    const std::string args = "sweep --metrics outage_d2_dir_fd,rate_d2_dir_fd --snr 0:20:40 --mc-samples 300000 --seed 5 --threads 4";
    const auto one = run(args, "NOMA_THREADS=1");
    const auto four = run(args, "NOMA_THREADS=4");
    EXPECT_EQ(one.exit_code, 0);
    EXPECT_EQ(one.out, four.out);
    EXPECT_EQ(one.out, run(args, "NOMA_THREADS=3").out);
}

TEST(Cli, ValidateReportIsDeterministicAndFaultIsCaught) {
    const auto a = run("validate --samples 100000 --seed 3 --threads 4", "NOMA_THREADS=1");
    const auto b = run("validate --samples 100000 --seed 3 --threads 4", "NOMA_THREADS=4");
    EXPECT_EQ(a.exit_code, 0) << a.out;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(run("validate --samples 100000 --seed 3 --inject-fault").exit_code, 1);
}

TEST(Cli, FigureUnknownAndKnown) {
    const auto r = run("figure fig2");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("outage_asym_d2_nodir_hd"), std::string::npos);
}

TEST(Cli, MetricsListing) {
    const auto r = run("metrics");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("outage_d2_dir_fd_gc"), std::string::npos);
}

}  // namespace
