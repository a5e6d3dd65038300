#pragma once

// SNR sweeps over a registry of named metrics, figure presets, the
// analytic-versus-simulation validation suite, and CSV/JSON serialization.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "noma/analytic_outage.hpp"
#include "noma/analytic_rate.hpp"
#include "noma/montecarlo.hpp"
#include "noma/special_math.hpp"
#include "noma/system_model.hpp"
#include "noma/throughput_ee.hpp"

namespace noma {

/// Bad user input (config text, grid, metric or figure name).
class usage_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Config file

struct ParsedConfig {
    SystemConfig system;
    PowerBudget budget;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view text, std::string_view what) {
    text = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value))
        throw usage_error(fmt::format("{}: '{}' is not a finite number", what, text));
    return value;
}

inline std::uint64_t parse_count(std::string_view text, std::string_view what) {
    text = trim(text);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw usage_error(fmt::format("{}: '{}' is not a non-negative integer", what, text));
    return value;
}

inline bool parse_bool(std::string_view text, std::string_view what) {
    text = trim(text);
    if (text == "true" || text == "1" || text == "yes")
        return true;
    if (text == "false" || text == "0" || text == "no")
        return false;
    throw usage_error(fmt::format("{}: '{}' is not a boolean", what, text));
}

}  // namespace detail

using ConfigEntries = std::map<std::string, std::string, std::less<>>;

/// Splits flat `key = value` text, one entry per line, `#` starts a comment.
inline ConfigEntries parse_config_entries(std::string_view text) {
    ConfigEntries entries;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw usage_error(fmt::format("config line {}: expected key = value", line_no));
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty())
            throw usage_error(fmt::format("config line {}: empty key", line_no));
        if (!entries.emplace(key, value).second)
            throw usage_error(fmt::format("config line {}: duplicate key '{}'", line_no, key));
    }
    return entries;
}

/// Applies `key=value` overrides. An override replaces the key and its
/// linear/dB twin (omega1 and omega1_db), and d/alpha replace omega1/omega2.
inline void apply_overrides(ConfigEntries& entries, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto parsed = parse_config_entries(o);
        if (parsed.size() != 1)
            throw usage_error(fmt::format("override '{}': expected key=value", o));
        const auto& [key, value] = *parsed.begin();
        const bool is_db = key.size() > 3 && key.ends_with("_db");
        entries.erase(is_db ? key.substr(0, key.size() - 3) : key + "_db");
        if (key == "d" || key == "alpha")
            for (const char* k : {"omega1", "omega1_db", "omega2", "omega2_db"})
                entries.erase(k);
        entries[key] = value;
    }
}

/// Builds the configuration from entries. Keys mirror SystemConfig and
/// PowerBudget fields. Average gains may instead be given in dB with a
/// `_db` suffix (omega0_db, omega1_db, omega2_db, omega_li_db), or
/// omega1/omega2 derived from `d` and `alpha`.
inline ParsedConfig config_from_entries(ConfigEntries entries) {
    ParsedConfig out;
    SystemConfig& c = out.system;

    auto take = [&](std::string_view key) -> std::optional<std::string> {
        const auto it = entries.find(key);
        if (it == entries.end())
            return std::nullopt;
        std::string v = it->second;
        entries.erase(it);
        return v;
    };
    auto number = [&](std::string_view key, double& field) {
        auto v = take(key);
        if (v)
            field = detail::parse_double(*v, key);
        return v.has_value();
    };
    // A linear gain and its dB twin are mutually exclusive.
    auto gain = [&](std::string_view key, double& field) {
        const std::string db_key = std::string(key) + "_db";
        auto linear = take(key);
        auto db = take(db_key);
        if (linear && db)
            throw usage_error(fmt::format("config: give either {} or {}, not both", key, db_key));
        if (linear)
            field = detail::parse_double(*linear, key);
        if (db)
            field = db_to_linear(detail::parse_double(*db, db_key));
        return linear.has_value() || db.has_value();
    };

    const bool has_a1 = number("a1", c.a1);
    if (!number("a2", c.a2) && has_a1)
        c.a2 = 1.0 - c.a1;
    gain("omega0", c.omega0);
    const bool explicit_o1 = gain("omega1", c.omega1);
    const bool explicit_o2 = gain("omega2", c.omega2);
    gain("omega_li", c.omega_li);
    number("kappa", c.kappa);
    number("r1", c.r1);
    number("r2", c.r2);
    if (auto v = take("duplex")) {
        if (*v == "fd" || *v == "full")
            c.duplex = Duplex::full;
        else if (*v == "hd" || *v == "half")
            c.duplex = Duplex::half;
        else
            throw usage_error(fmt::format("config: duplex must be fd or hd (got '{}')", *v));
    }
    if (auto v = take("direct_link"))
        c.direct_link = detail::parse_bool(*v, "direct_link");
    if (auto v = take("hd_threshold_convention")) {
        if (*v == "standard")
            c.hd_threshold_convention = HdThresholdConvention::standard;
        else if (*v == "paper_literal")
            c.hd_threshold_convention = HdThresholdConvention::paper_literal;
        else
            throw usage_error(fmt::format("config: unknown hd_threshold_convention '{}'", *v));
    }
    auto d = take("d");
    auto alpha = take("alpha");
    if (d.has_value() != alpha.has_value())
        throw usage_error("config: d and alpha must be given together");
    if (d) {
        if (explicit_o1 || explicit_o2)
            throw usage_error("config: d/alpha conflict with explicit omega1/omega2");
        try {
            const Geometry g = geometry_gains(detail::parse_double(*d, "d"), detail::parse_double(*alpha, "alpha"));
            c.omega1 = g.omega1;
            c.omega2 = g.omega2;
        } catch (const usage_error&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw usage_error(e.what());
        }
    }
    number("ps", out.budget.ps);
    number("pr", out.budget.pr);
    number("t", out.budget.t);
    if (!entries.empty())
        throw usage_error(fmt::format("config: unknown key '{}'", entries.begin()->first));
    try {
        c.validate();
        out.budget.validate();
    } catch (const std::invalid_argument& e) {
        throw usage_error(e.what());
    }
    return out;
}

inline ParsedConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {}) {
    ConfigEntries entries = parse_config_entries(text);
    apply_overrides(entries, overrides);
    return config_from_entries(std::move(entries));
}

/// `a:step:b` (inclusive), a comma-separated list, or a single value, in dB.
inline std::vector<double> parse_snr_grid(std::string_view text) {
    text = detail::trim(text);
    std::vector<double> grid;
    if (text.find(':') != std::string_view::npos) {
        const auto c1 = text.find(':');
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string_view::npos || text.find(':', c2 + 1) != std::string_view::npos)
            throw usage_error(fmt::format("SNR grid '{}': expected a:step:b", text));
        const double a = detail::parse_double(text.substr(0, c1), "SNR grid start");
        const double step = detail::parse_double(text.substr(c1 + 1, c2 - c1 - 1), "SNR grid step");
        const double b = detail::parse_double(text.substr(c2 + 1), "SNR grid end");
        if (!(step > 0.0) || b < a)
            throw usage_error(fmt::format("SNR grid '{}': need step > 0 and end >= start", text));
        const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
        if (count > 100000)
            throw usage_error("SNR grid has too many points");
        for (std::size_t i = 0; i < count; ++i)
            grid.push_back(a + static_cast<double>(i) * step);
    } else {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto end = std::min(text.find(',', pos), text.size());
            grid.push_back(detail::parse_double(text.substr(pos, end - pos), "SNR value"));
            pos = end + 1;
        }
    }
    if (grid.empty())
        throw usage_error("SNR grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw usage_error("SNR grid must be strictly increasing");
    return grid;
}

// ---------------------------------------------------------------------------
// Rows and serialization

struct SweepRow {
    double snr_db = 0.0;
    std::string metric;
    std::optional<double> analytic;
    std::optional<double> mc_mean;
    std::optional<double> mc_se;
    std::string method;
    std::optional<std::uint64_t> samples;

    bool operator==(const SweepRow&) const = default;
};

inline constexpr std::string_view csv_header = "snr_db,metric,analytic,mc_mean,mc_se,method,samples";

namespace detail {

template <class T>
std::string optional_field(const std::optional<T>& v) {
    return v ? fmt::format("{}", *v) : std::string();
}

}  // namespace detail

inline std::string to_csv(const std::vector<SweepRow>& rows) {
    std::string out(csv_header);
    out += '\n';
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{},{},{},{}\n", r.snr_db, r.metric, detail::optional_field(r.analytic),
                           detail::optional_field(r.mc_mean), detail::optional_field(r.mc_se), r.method,
                           detail::optional_field(r.samples));
    return out;
}

inline nlohmann::json to_json(const std::vector<SweepRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    for (const auto& r : rows)
        arr.push_back({{"snr_db", r.snr_db},
                       {"metric", r.metric},
                       {"analytic", opt(r.analytic)},
                       {"mc_mean", opt(r.mc_mean)},
                       {"mc_se", opt(r.mc_se)},
                       {"method", r.method},
                       {"samples", opt(r.samples)}});
    return arr;
}

inline std::vector<SweepRow> rows_from_json(const nlohmann::json& arr) {
    std::vector<SweepRow> rows;
    for (const auto& o : arr) {
        SweepRow r;
        r.snr_db = o.at("snr_db").get<double>();
        r.metric = o.at("metric").get<std::string>();
        if (!o.at("analytic").is_null())
            r.analytic = o.at("analytic").get<double>();
        if (!o.at("mc_mean").is_null())
            r.mc_mean = o.at("mc_mean").get<double>();
        if (!o.at("mc_se").is_null())
            r.mc_se = o.at("mc_se").get<double>();
        r.method = o.at("method").get<std::string>();
        if (!o.at("samples").is_null())
            r.samples = o.at("samples").get<std::uint64_t>();
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Metric registry

struct SweepContext {
    SystemConfig system;
    PowerBudget budget;
    std::optional<McControl> mc;  // simulate alongside the analytic value when set
    QuadratureControl quadrature;
    SeriesControl series;
};

/// Used for simulation-only metrics when no McControl was requested.
inline constexpr std::uint64_t default_mc_samples = 1'000'000;

struct AnalyticValue {
    double value;
    std::string method;
};

struct MetricDef {
    std::string id;
    std::string description;
    std::optional<Duplex> duplex;  // overrides the config when set
    std::optional<bool> direct_link;
    std::function<AnalyticValue(const SystemConfig&, const SweepContext&, double rho)> analytic;
    std::function<std::vector<McEstimate>(const SystemConfig&, const SweepContext&, std::span<const double>,
                                          const McControl&)>
        simulate;
};

namespace detail {

inline McControl mc_or_default(const SweepContext& ctx) {
    if (ctx.mc)
        return *ctx.mc;
    McControl mc;
    mc.samples = default_mc_samples;
    return mc;
}

inline std::vector<McEstimate> scaled(std::vector<McEstimate> v, double factor) {
    for (auto& e : v) {
        e.mean *= factor;
        e.std_error *= std::abs(factor);
    }
    return v;
}

inline std::vector<MetricDef> build_registry() {
    std::vector<MetricDef> reg;
    const Duplex modes[] = {Duplex::full, Duplex::half};
    auto mc_outage = [](OutageKind kind) {
        return [kind](const SystemConfig& c, const SweepContext&, std::span<const double> rhos, const McControl& mc) {
            return estimate_outage(c, rhos, kind, mc);
        };
    };
    auto mc_rate = [](RateKind kind) {
        return [kind](const SystemConfig& c, const SweepContext&, std::span<const double> rhos, const McControl& mc) {
            return estimate_ergodic(c, rhos, kind, mc);
        };
    };
    auto outage_value = [](auto fn) {
        return [fn](const SystemConfig& c, const SweepContext&, double rho) {
            const OutageResult r = fn(c, rho);
            return AnalyticValue{r.probability, std::string(to_string(r.method))};
        };
    };
    auto rate_value = [](auto fn) {
        return [fn](const SystemConfig& c, const SweepContext& ctx, double rho) {
            const RateResult r = fn(c, ctx, rho);
            return AnalyticValue{r.rate, std::string(to_string(r.method))};
        };
    };

    for (Duplex m : modes) {
        const std::string sfx = m == Duplex::full ? "_fd" : "_hd";
        const std::string mode_name = m == Duplex::full ? "full duplex" : "half duplex";
        reg.push_back({"outage_d1" + sfx, "D1 outage probability, " + mode_name, m, std::nullopt,
                       outage_value([](const SystemConfig& c, double r) { return outage_d1(c, r); }),
                       mc_outage(OutageKind::d1)});
        reg.push_back({"outage_d2_nodir" + sfx, "D2 outage without direct link, " + mode_name, m, false,
                       outage_value([](const SystemConfig& c, double r) { return outage_d2_nodir(c, r); }),
                       mc_outage(OutageKind::d2_nodir)});
        const AsymptoticOutage a1 = m == Duplex::full ? AsymptoticOutage::d1_fd : AsymptoticOutage::d1_hd;
        const AsymptoticOutage a2 = m == Duplex::full ? AsymptoticOutage::d2_nodir_fd : AsymptoticOutage::d2_nodir_hd;
        reg.push_back({"outage_asym_d1" + sfx, "high-SNR D1 outage, " + mode_name, m, std::nullopt,
                       outage_value([a1](const SystemConfig& c, double r) { return asymptotic_outage(c, r, a1); }),
                       nullptr});
        reg.push_back({"outage_asym_d2_nodir" + sfx, "high-SNR D2 outage without direct link, " + mode_name, m, false,
                       outage_value([a2](const SystemConfig& c, double r) { return asymptotic_outage(c, r, a2); }),
                       nullptr});

        reg.push_back({"rate_d1" + sfx, "D1 ergodic rate, " + mode_name, m, std::nullopt,
                       rate_value([](const SystemConfig& c, const SweepContext&, double r) { return rate_d1(c, r); }),
                       mc_rate(RateKind::d1)});
        reg.push_back({"rate_d1_asym" + sfx, "high-SNR D1 ergodic rate, " + mode_name, m, std::nullopt,
                       rate_value([](const SystemConfig& c, const SweepContext&, double r) { return rate_d1_asym(c, r); }),
                       nullptr});
        reg.push_back({"rate_d2_nodir" + sfx, "D2 ergodic rate without direct link, " + mode_name, m, false,
                       rate_value([](const SystemConfig& c, const SweepContext& ctx, double r) {
                           return rate_d2_nodir(c, r, ctx.quadrature);
                       }),
                       mc_rate(RateKind::d2_nodir)});
        reg.push_back({"rate_d2_nodir_asym" + sfx, "high-SNR D2 ergodic rate without direct link, " + mode_name, m,
                       false,
                       rate_value([](const SystemConfig& c, const SweepContext&, double r) {
                           return rate_d2_nodir_asym(c, r);
                       }),
                       nullptr});
        reg.push_back({"rate_d2_dir_asym" + sfx, "high-SNR D2 ergodic rate with direct link, " + mode_name, m, true,
                       rate_value([](const SystemConfig& c, const SweepContext&, double r) {
                           return rate_d2_dir_asym(c, r);
                       }),
                       nullptr});

        for (Scenario sc : {Scenario::nodir, Scenario::dir}) {
            const bool dir = sc == Scenario::dir;
            const std::string tag = std::string(to_string(sc));
            const std::string link = dir ? "with direct link" : "without direct link";
            reg.push_back({"sum_rate_asym_" + tag + sfx, "high-SNR ergodic sum rate " + link + ", " + mode_name, m, dir,
                           rate_value([sc](const SystemConfig& c, const SweepContext&, double r) {
                               return sum_rate_asym(c, r, sc);
                           }),
                           nullptr});
            auto limited = [](const SystemConfig& c, const SweepContext& ctx, double r) {
                return throughput_delay_limited(c, r, mc_or_default(ctx));
            };
            auto tolerant = [](const SystemConfig& c, const SweepContext& ctx, double r) {
                return throughput_delay_tolerant(c, r, mc_or_default(ctx), ctx.quadrature);
            };
            auto mc_limited = [](const SystemConfig& c, const SweepContext&, std::span<const double> rhos,
                                 const McControl& mc) { return estimate_throughput_delay_limited(c, rhos, mc); };
            const RateKind sum_kind = dir ? RateKind::sum_dir : RateKind::sum_nodir;
            reg.push_back({"throughput_limited_" + tag + sfx, "delay-limited throughput " + link + ", " + mode_name, m,
                           dir, rate_value(limited), mc_limited});
            reg.push_back({"throughput_tolerant_" + tag + sfx, "delay-tolerant throughput " + link + ", " + mode_name,
                           m, dir, rate_value(tolerant), mc_rate(sum_kind)});

            const double ee_factor_mode = m == Duplex::full ? 1.0 : 2.0;
            auto ee_of = [ee_factor_mode](auto throughput_fn) {
                return [ee_factor_mode, throughput_fn](const SystemConfig& c, const SweepContext& ctx, double r) {
                    const RateResult t = throughput_fn(c, ctx, r);
                    return AnalyticValue{energy_efficiency_from_throughput(t.rate, c.duplex, ctx.budget),
                                         std::string(to_string(t.method))};
                };
            };
            auto ee_mc = [ee_factor_mode](auto mc_fn) {
                return [ee_factor_mode, mc_fn](const SystemConfig& c, const SweepContext& ctx,
                                               std::span<const double> rhos, const McControl& mc) {
                    ctx.budget.validate();
                    const double f = ee_factor_mode / (ctx.budget.t * ctx.budget.ps + ctx.budget.t * ctx.budget.pr);
                    return scaled(mc_fn(c, ctx, rhos, mc), f);
                };
            };
            reg.push_back({"ee_limited_" + tag + sfx, "energy efficiency, delay-limited, " + link + ", " + mode_name,
                           m, dir, ee_of(limited), ee_mc(mc_limited)});
            reg.push_back({"ee_tolerant_" + tag + sfx, "energy efficiency, delay-tolerant, " + link + ", " + mode_name,
                           m, dir, ee_of(tolerant), ee_mc(mc_rate(sum_kind))});
            reg.push_back({"ee_tolerant_asym_" + tag + sfx,
                           "energy efficiency from the high-SNR sum rate " + link + ", " + mode_name, m, dir,
                           ee_of([sc](const SystemConfig& c, const SweepContext&, double r) {
                               return sum_rate_asym(c, r, sc);
                           }),
                           nullptr});
        }
    }

    reg.push_back({"outage_d2_dir_fd", "D2 outage with direct link, full duplex (series)", Duplex::full, true,
                   [](const SystemConfig& c, const SweepContext& ctx, double r) {
                       const OutageResult o = outage_d2_dir_fd(c, r, ctx.series);
                       return AnalyticValue{o.probability, std::string(to_string(o.method))};
                   },
                   mc_outage(OutageKind::d2_dir_ub)});
    reg.push_back({"outage_d2_dir_fd_gc", "D2 outage with direct link, full duplex (Gauss-Chebyshev, high SNR)",
                   Duplex::full, true,
                   [](const SystemConfig& c, const SweepContext& ctx, double r) {
                       const OutageResult o = outage_d2_dir_fd_gc(c, r, ctx.quadrature);
                       return AnalyticValue{o.probability, std::string(to_string(o.method))};
                   },
                   mc_outage(OutageKind::d2_dir_ub)});
    reg.push_back({"outage_d2_dir_hd", "D2 outage with direct link, half duplex (simulation)", Duplex::half, true,
                   nullptr, mc_outage(OutageKind::d2_dir_hd)});
    reg.push_back({"outage_d2_dir_ri_fd", "D2 outage with direct link and residual interference kappa (simulation)",
                   Duplex::full, true, nullptr, mc_outage(OutageKind::d2_dir_ri)});
    reg.push_back({"outage_oma_d1", "orthogonal baseline, D1 outage (three slots, simulation)", std::nullopt,
                   std::nullopt, nullptr, mc_outage(OutageKind::oma_d1)});
    reg.push_back({"outage_oma_d2_nodir", "orthogonal baseline, D2 outage without direct link (simulation)",
                   std::nullopt, false, nullptr, mc_outage(OutageKind::oma_d2_nodir)});
    reg.push_back({"outage_oma_d2_dir", "orthogonal baseline, D2 outage with direct link and MRC (simulation)",
                   std::nullopt, true, nullptr, mc_outage(OutageKind::oma_d2_dir)});
    reg.push_back({"rate_d2_dir_fd", "D2 ergodic rate with direct link, full duplex (simulation)", Duplex::full, true,
                   nullptr, mc_rate(RateKind::d2_dir_ub)});
    reg.push_back({"rate_d2_dir_hd", "D2 ergodic rate with direct link, half duplex (nested quadrature)", Duplex::half,
                   true,
                   [](const SystemConfig& c, const SweepContext& ctx, double r) {
                       const RateResult q = rate_d2_dir_hd_quadrature(c, r, ctx.quadrature);
                       return AnalyticValue{q.rate, std::string(to_string(q.method))};
                   },
                   mc_rate(RateKind::d2_dir_ub)});
    reg.push_back({"rate_d2_dir_ri_fd", "D2 ergodic rate with direct link and residual interference (simulation)",
                   Duplex::full, true, nullptr, mc_rate(RateKind::d2_dir_ri)});
    return reg;
}

}  // namespace detail

inline const std::vector<MetricDef>& metric_registry() {
    static const std::vector<MetricDef> registry = detail::build_registry();
    return registry;
}

inline const MetricDef* find_metric(std::string_view id) {
    for (const auto& m : metric_registry())
        if (m.id == id)
            return &m;
    return nullptr;
}

/// One row per SNR point. Simulation runs once over the whole grid with
/// common random numbers. `label` replaces the metric id in the rows.
inline std::vector<SweepRow> evaluate_metric(std::string_view id, const SweepContext& ctx,
                                             std::span<const double> snr_db, std::string_view label = {}) {
    const MetricDef* def = find_metric(id);
    if (!def)
        throw usage_error(fmt::format("unknown metric '{}'", id));
    SystemConfig cfg = ctx.system;
    if (def->duplex)
        cfg.duplex = *def->duplex;
    if (def->direct_link)
        cfg.direct_link = *def->direct_link;
    cfg.validate();

    std::vector<double> rhos;
    for (double db : snr_db)
        rhos.push_back(db_to_linear(db));

    std::vector<McEstimate> sim;
    const bool simulate = def->simulate && (ctx.mc || !def->analytic);
    if (simulate)
        sim = def->simulate(cfg, ctx, rhos, detail::mc_or_default(ctx));

    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        SweepRow row;
        row.snr_db = snr_db[i];
        row.metric = label.empty() ? def->id : std::string(label);
        if (def->analytic) {
            const AnalyticValue v = def->analytic(cfg, ctx, rhos[i]);
            row.analytic = v.value;
            row.method = v.method;
        } else {
            row.method = "monte_carlo";
        }
        if (simulate) {
            row.mc_mean = sim[i].mean;
            row.mc_se = sim[i].std_error;
            row.samples = sim[i].samples;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

struct SweepSpec {
    std::vector<double> snr_db;
    std::vector<std::string> metrics;
    SweepContext context;
};

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    if (spec.metrics.empty())
        throw usage_error("no metrics requested");
    if (spec.snr_db.empty())
        throw usage_error("SNR grid is empty");
    for (const auto& m : spec.metrics)
        if (!find_metric(m))
            throw usage_error(fmt::format("unknown metric '{}'", m));
    std::vector<SweepRow> rows;
    for (const auto& m : spec.metrics) {
        auto part = evaluate_metric(m, spec.context, spec.snr_db);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

/// Names of duplex modes whose power split cannot meet D2's target rate.
inline std::vector<std::string> infeasible_modes(const SystemConfig& cfg) {
    std::vector<std::string> out;
    for (Duplex m : {Duplex::full, Duplex::half}) {
        if (!derive_thresholds(detail::with_duplex(cfg, m), 1.0).feasible)
            out.emplace_back(to_string(m));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Figure presets

struct FigureCurve {
    std::string label;
    std::string metric;
    SystemConfig system;
    PowerBudget budget;
};

struct FigurePreset {
    std::string id;
    std::string title;
    std::vector<double> snr_db;
    std::vector<FigureCurve> curves;

    bool operator==(const FigurePreset& other) const {
        if (id != other.id || title != other.title || snr_db != other.snr_db || curves.size() != other.curves.size())
            return false;
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const auto& a = curves[i];
            const auto& b = other.curves[i];
            const auto& x = a.system;
            const auto& y = b.system;
            if (a.label != b.label || a.metric != b.metric || x.a1 != y.a1 || x.a2 != y.a2 || x.omega0 != y.omega0 ||
                x.omega1 != y.omega1 || x.omega2 != y.omega2 || x.omega_li != y.omega_li || x.kappa != y.kappa ||
                x.r1 != y.r1 || x.r2 != y.r2 || x.duplex != y.duplex || x.direct_link != y.direct_link ||
                x.hd_threshold_convention != y.hd_threshold_convention || a.budget.ps != b.budget.ps ||
                a.budget.pr != b.budget.pr || a.budget.t != b.budget.t)
                return false;
        }
        return true;
    }
};

/// Reference network: D1 at normalized distance 0.3, path-loss exponent 2,
/// a1 = 0.2, BS->D2 gain 1.
inline SystemConfig reference_config(double r1, double r2, double omega_li_db, bool direct_link) {
    SystemConfig c;
    const Geometry g = geometry_gains(0.3, 2.0);
    c.a1 = 0.2;
    c.a2 = 0.8;
    c.omega0 = 1.0;
    c.omega1 = g.omega1;
    c.omega2 = g.omega2;
    c.omega_li = db_to_linear(omega_li_db);
    c.r1 = r1;
    c.r2 = r2;
    c.direct_link = direct_link;
    return c;
}

inline SystemConfig relay_only_config(double omega_li_db) { return reference_config(3.0, 0.5, omega_li_db, false); }

inline SystemConfig direct_link_config(double omega_li_db) { return reference_config(2.0, 1.0, omega_li_db, true); }

inline const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids = {"fig2", "fig3", "fig4", "fig5", "fig6",
                                                 "fig7", "fig8", "fig9", "fig10"};
    return ids;
}

inline FigurePreset figure_preset(std::string_view id) {
    FigurePreset f;
    f.id = std::string(id);
    f.snr_db = {0, 5, 10, 15, 20, 25, 30, 35, 40};
    const PowerBudget budget{10.0, 10.0, 1.0};
    auto add = [&](std::string metric, SystemConfig cfg, std::string variant = {}) {
        std::string label = variant.empty() ? metric : metric + ":" + variant;
        f.curves.push_back({std::move(label), std::move(metric), cfg, budget});
    };
    auto li_tag = [](double db) { return fmt::format("li_db={}", db); };
    auto with_kappa = [](SystemConfig c, double k) {
        c.kappa = k;
        return c;
    };
    const double li_sweep[] = {-20.0, -15.0, -10.0};

    if (id == "fig2") {
        f.title = "Outage probability without direct link";
        const auto c = relay_only_config(-15.0);
        for (const char* m : {"outage_d1_fd", "outage_d1_hd", "outage_d2_nodir_fd", "outage_d2_nodir_hd",
                              "outage_asym_d1_hd", "outage_asym_d2_nodir_hd", "outage_oma_d1", "outage_oma_d2_nodir"})
            add(m, c);
    } else if (id == "fig3") {
        f.title = "Delay-limited throughput without direct link";
        for (double li : li_sweep)
            add("throughput_limited_nodir_fd", relay_only_config(li), li_tag(li));
        add("throughput_limited_nodir_hd", relay_only_config(-15.0));
    } else if (id == "fig4") {
        f.title = "Ergodic rates without direct link";
        const auto c = relay_only_config(-10.0);
        for (const char* m : {"rate_d1_fd", "rate_d1_hd", "rate_d2_nodir_fd", "rate_d2_nodir_hd",
                              "sum_rate_asym_nodir_fd", "sum_rate_asym_nodir_hd", "throughput_tolerant_nodir_fd",
                              "throughput_tolerant_nodir_hd"})
            add(m, c);
    } else if (id == "fig5") {
        f.title = "Outage probability with direct link";
        const auto c = direct_link_config(-15.0);
        for (const char* m : {"outage_d1_fd", "outage_d1_hd", "outage_d2_dir_fd", "outage_d2_dir_fd_gc",
                              "outage_d2_dir_hd", "outage_oma_d2_dir"})
            add(m, c);
        for (double k : {0.5, 1.0})
            add("outage_d2_dir_ri_fd", with_kappa(c, k), fmt::format("kappa={}", k));
    } else if (id == "fig6") {
        f.title = "Outage probability with direct link for several loop-interference levels";
        for (double li : li_sweep) {
            add("outage_d1_fd", direct_link_config(li), li_tag(li));
            add("outage_d2_dir_fd", direct_link_config(li), li_tag(li));
        }
        add("outage_d1_hd", direct_link_config(-15.0));
        add("outage_d2_dir_hd", direct_link_config(-15.0));
    } else if (id == "fig7") {
        f.title = "Delay-limited throughput with direct link";
        for (double li : li_sweep)
            add("throughput_limited_dir_fd", direct_link_config(li), li_tag(li));
        add("throughput_limited_dir_hd", direct_link_config(-15.0));
    } else if (id == "fig8") {
        f.title = "Ergodic rates with direct link";
        const auto c = direct_link_config(-10.0);
        for (const char* m : {"rate_d1_fd", "rate_d1_hd", "rate_d2_dir_fd", "rate_d2_dir_hd", "sum_rate_asym_dir_fd",
                              "sum_rate_asym_dir_hd", "throughput_tolerant_dir_fd", "throughput_tolerant_dir_hd"})
            add(m, c);
        for (double k : {0.5, 1.0})
            add("rate_d2_dir_ri_fd", with_kappa(c, k), fmt::format("kappa={}", k));
    } else if (id == "fig9") {
        f.title = "Energy efficiency, delay-limited (Ps = Pr = 10 W, T = 1)";
        for (const char* m : {"ee_limited_nodir_fd", "ee_limited_nodir_hd"})
            add(m, relay_only_config(-15.0));
        for (const char* m : {"ee_limited_dir_fd", "ee_limited_dir_hd"})
            add(m, direct_link_config(-15.0));
    } else if (id == "fig10") {
        f.title = "Energy efficiency, delay-tolerant (Ps = Pr = 10 W, T = 1)";
        for (const char* m : {"ee_tolerant_asym_nodir_fd", "ee_tolerant_asym_nodir_hd", "ee_tolerant_nodir_fd",
                              "ee_tolerant_nodir_hd"})
            add(m, relay_only_config(-10.0));
        for (const char* m : {"ee_tolerant_asym_dir_fd", "ee_tolerant_asym_dir_hd", "ee_tolerant_dir_fd",
                              "ee_tolerant_dir_hd"})
            add(m, direct_link_config(-10.0));
    } else {
        throw usage_error(fmt::format("unknown figure '{}' (expected fig2..fig10)", id));
    }
    return f;
}

inline std::vector<SweepRow> run_figure(const FigurePreset& fig, const std::optional<McControl>& mc) {
    std::vector<SweepRow> rows;
    for (const auto& curve : fig.curves) {
        SweepContext ctx;
        ctx.system = curve.system;
        ctx.budget = curve.budget;
        ctx.mc = mc;
        auto part = evaluate_metric(curve.metric, ctx, fig.snr_db, curve.label);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Validation suite

struct ValidationOptions {
    std::vector<double> snr_db = {0, 10, 20, 30, 40};
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool corrupt_omega1 = false;  // fault injection: wrong Omega1 in the D1 full-duplex formula
};

struct ValidationCheck {
    std::string name;
    double snr_db = 0.0;
    double analytic = 0.0;
    McEstimate mc;
    double tolerance = 0.0;  // 3 standard errors
    bool pass = false;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
    }

    std::string text() const {
        std::string out = fmt::format("{:<22} {:>7} {:>14} {:>14} {:>11} {:>9}  {}\n", "check", "snr_db", "analytic",
                                      "mc_mean", "3se", "diff/3se", "result");
        std::size_t failed = 0;
        for (const auto& c : checks) {
            const double ratio = std::abs(c.analytic - c.mc.mean) / c.tolerance;
            out += fmt::format("{:<22} {:>7} {:>14.7e} {:>14.7e} {:>11.3e} {:>9.3f}  {}\n", c.name, c.snr_db,
                               c.analytic, c.mc.mean, c.tolerance, ratio, c.pass ? "PASS" : "FAIL");
            failed += c.pass ? 0 : 1;
        }
        out += fmt::format("{} checks, {} failed\n", checks.size(), failed);
        return out;
    }
};

/// Standard error used to judge an outage check. A frequency of exactly 0
/// or 1 has zero sample variance, so the binomial error at the analytic
/// probability is used as a floor.
inline double outage_check_error(const McEstimate& mc, double analytic) {
    const double p = std::clamp(analytic, 0.0, 1.0);
    const double binomial = std::sqrt(p * (1.0 - p) / static_cast<double>(mc.samples));
    return std::max(mc.std_error, binomial);
}

inline ValidationReport run_validation(const ValidationOptions& opt) {
    if (opt.snr_db.empty())
        throw usage_error("validation grid is empty");
    McControl mc;
    mc.samples = opt.samples;
    mc.seed = opt.seed;
    mc.threads = opt.threads;
    mc.validate();
    std::vector<double> rhos;
    for (double db : opt.snr_db)
        rhos.push_back(db_to_linear(db));

    ValidationReport report;
    auto add = [&](const std::string& name, const std::vector<McEstimate>& sim, auto analytic, bool is_outage) {
        for (std::size_t i = 0; i < rhos.size(); ++i) {
            ValidationCheck c;
            c.name = name;
            c.snr_db = opt.snr_db[i];
            c.analytic = analytic(rhos[i]);
            c.mc = sim[i];
            const double se = is_outage ? outage_check_error(sim[i], c.analytic) : sim[i].std_error;
            c.tolerance = 3.0 * se;
            c.pass = std::abs(c.analytic - c.mc.mean) <= c.tolerance;
            report.checks.push_back(std::move(c));
        }
    };

    const SystemConfig relay_fd = relay_only_config(-15.0);
    const SystemConfig relay_hd = detail::with_duplex(relay_fd, Duplex::half);
    SystemConfig relay_fd_analytic = relay_fd;
    if (opt.corrupt_omega1)
        relay_fd_analytic.omega1 *= 1.5;
    const SystemConfig direct_fd = direct_link_config(-15.0);
    const SystemConfig rate_fd = relay_only_config(-10.0);
    const SystemConfig rate_hd = detail::with_duplex(rate_fd, Duplex::half);
    SystemConfig rate_dir_hd = direct_link_config(-10.0);
    rate_dir_hd.duplex = Duplex::half;

    add("outage_d1_fd", estimate_outage(relay_fd, rhos, OutageKind::d1, mc),
        [&](double r) { return outage_d1(relay_fd_analytic, r).probability; }, true);
    add("outage_d1_hd", estimate_outage(relay_hd, rhos, OutageKind::d1, mc),
        [&](double r) { return outage_d1(relay_hd, r).probability; }, true);
    add("outage_d2_nodir_fd", estimate_outage(relay_fd, rhos, OutageKind::d2_nodir, mc),
        [&](double r) { return outage_d2_nodir(relay_fd, r).probability; }, true);
    add("outage_d2_nodir_hd", estimate_outage(relay_hd, rhos, OutageKind::d2_nodir, mc),
        [&](double r) { return outage_d2_nodir(relay_hd, r).probability; }, true);
    add("outage_d2_dir_fd", estimate_outage(direct_fd, rhos, OutageKind::d2_dir_ub, mc),
        [&](double r) { return outage_d2_dir_fd(direct_fd, r).probability; }, true);
    add("rate_d1_fd", estimate_ergodic(rate_fd, rhos, RateKind::d1, mc),
        [&](double r) { return rate_d1(rate_fd, r).rate; }, false);
    add("rate_d1_hd", estimate_ergodic(rate_hd, rhos, RateKind::d1, mc),
        [&](double r) { return rate_d1(rate_hd, r).rate; }, false);
    add("rate_d2_nodir_fd", estimate_ergodic(rate_fd, rhos, RateKind::d2_nodir, mc),
        [&](double r) { return rate_d2_nodir(rate_fd, r).rate; }, false);
    add("rate_d2_nodir_hd", estimate_ergodic(rate_hd, rhos, RateKind::d2_nodir, mc),
        [&](double r) { return rate_d2_nodir(rate_hd, r).rate; }, false);
    add("rate_d2_dir_hd", estimate_ergodic(rate_dir_hd, rhos, RateKind::d2_dir_ub, mc),
        [&](double r) { return rate_d2_dir_hd_quadrature(rate_dir_hd, r).rate; }, false);
    return report;
}

}  // namespace noma
