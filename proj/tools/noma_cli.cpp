// Command-line front end: parameter sweeps, figure presets and the
// analytic-versus-simulation validation suite.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "noma/noma.hpp"

namespace {

constexpr int exit_usage = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw noma::usage_error(fmt::format("cannot open '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error(fmt::format("cannot write '{}'", path));
    out << text;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find(',', pos), text.size());
        const std::string item(noma::detail::trim(std::string_view(text).substr(pos, end - pos)));
        if (!item.empty())
            out.push_back(item);
        pos = end + 1;
    }
    return out;
}

std::string render(const std::vector<noma::SweepRow>& rows, const std::string& format) {
    if (format == "json")
        return noma::to_json(rows).dump(2) + "\n";
    return noma::to_csv(rows);
}

void warn_infeasible(const noma::SystemConfig& cfg, std::string_view where) {
    for (const auto& mode : noma::infeasible_modes(cfg))
        std::cerr << fmt::format(
            "warning: {}: a2 <= a1 * gamma_th2 in {} mode; D2 outage is 1 for every SNR\n", where, mode);
}

struct McOptions {
    std::uint64_t samples = 0;
    std::uint64_t seed = 1;
    unsigned threads = 0;

    std::optional<noma::McControl> control() const {
        if (samples == 0)
            return std::nullopt;
        noma::McControl mc;
        mc.samples = samples;
        mc.seed = seed;
        mc.threads = threads;
        return mc;
    }
};

void add_mc_options(CLI::App* cmd, McOptions& mc) {
    cmd->add_option("--mc-samples", mc.samples, "Monte Carlo samples per SNR point (0: analytic only)");
    cmd->add_option("--seed", mc.seed, "Monte Carlo seed");
    cmd->add_option("--threads", mc.threads, "worker threads (0: hardware concurrency)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative NOMA with a full/half-duplex user relay: outage, rates, throughput, energy efficiency"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string snr_text = "0:5:40";
    std::string metrics_text;
    std::string format = "csv";
    std::string out_path;
    McOptions mc;

    auto* sweep = app.add_subcommand("sweep", "evaluate metrics over an SNR grid");
    sweep->add_option("--config", config_path, "key = value config file");
    sweep->add_option("--set", overrides, "config override key=value (repeatable)");
    sweep->add_option("--snr,--snr-db", snr_text, "SNR grid in dB: a:step:b or a comma list");
    sweep->add_option("--metrics", metrics_text, "comma-separated metric ids (see `metrics`)")->required();
    sweep->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sweep->add_option("--out", out_path, "output file (default stdout)");
    add_mc_options(sweep, mc);

    std::string figure_id;
    auto* figure = app.add_subcommand("figure", "regenerate a figure preset (fig2..fig10)");
    figure->add_option("id", figure_id, "figure id")->required();
    figure->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    figure->add_option("--out", out_path, "output file (default stdout)");
    add_mc_options(figure, mc);

    std::string validate_snr = "0:10:40";
    noma::ValidationOptions vopt;
    auto* validate = app.add_subcommand("validate", "compare every closed form with simulation");
    validate->add_option("--snr,--grid", validate_snr, "SNR grid in dB");
    validate->add_option("--samples", vopt.samples, "Monte Carlo samples per SNR point");
    validate->add_option("--seed", vopt.seed, "Monte Carlo seed");
    validate->add_option("--threads", vopt.threads, "worker threads (0: hardware concurrency)");
    validate->add_option("--out", out_path, "report file (default stdout)");
    validate->add_flag("--inject-fault", vopt.corrupt_omega1, "test hook: corrupt Omega1 in one analytic path")
        ->group("");

    auto* metrics = app.add_subcommand("metrics", "list metric ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (sweep->parsed()) {
            const std::string text = config_path.empty() ? std::string() : read_file(config_path);
            const noma::ParsedConfig parsed = noma::parse_config(text, overrides);
            noma::SweepSpec spec;
            spec.snr_db = noma::parse_snr_grid(snr_text);
            spec.metrics = split_list(metrics_text);
            spec.context.system = parsed.system;
            spec.context.budget = parsed.budget;
            spec.context.mc = mc.control();
            if (spec.metrics.empty())
                throw noma::usage_error("--metrics lists no metric ids");
            for (const auto& m : spec.metrics)
                if (!noma::find_metric(m))
                    throw noma::usage_error(fmt::format("unknown metric '{}' (run `metrics` for the list)", m));
            warn_infeasible(parsed.system, "config");
            write_output(render(noma::run_sweep(spec), format), out_path);
        } else if (figure->parsed()) {
            const noma::FigurePreset preset = noma::figure_preset(figure_id);
            write_output(render(noma::run_figure(preset, mc.control()), format), out_path);
        } else if (validate->parsed()) {
            vopt.snr_db = noma::parse_snr_grid(validate_snr);
            const noma::ValidationReport report = noma::run_validation(vopt);
            write_output(report.text(), out_path);
            return report.all_pass() ? 0 : 1;
        } else if (metrics->parsed()) {
            for (const auto& m : noma::metric_registry())
                std::cout << fmt::format("{:<30} {}\n", m.id, m.description);
        }
    } catch (const noma::usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
