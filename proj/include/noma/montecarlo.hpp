#pragma once

// Monte Carlo channel simulator. Samples are split into fixed-size chunks;
// each chunk owns an engine seeded from (seed, chunk index) and its moments
// are merged in chunk order, so results do not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "noma/system_model.hpp"

namespace noma {

struct McControl {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 1;
    std::uint64_t chunk_size = 1u << 16;
    unsigned threads = 0;  // 0: all hardware threads

    void validate() const {
        if (samples < 1)
            throw std::invalid_argument("McControl: samples must be >= 1");
        if (chunk_size < 1)
            throw std::invalid_argument("McControl: chunk_size must be >= 1");
    }
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

enum class OutageKind { d1, d2_nodir, d2_dir_ub, d2_dir_ri, d2_dir_hd, oma_d1, oma_d2_nodir, oma_d2_dir };

enum class RateKind { d1, d2_nodir, d2_dir_ub, d2_dir_ri, sum_nodir, sum_dir };

inline std::string_view to_string(OutageKind k) {
    switch (k) {
    case OutageKind::d1: return "d1";
    case OutageKind::d2_nodir: return "d2_nodir";
    case OutageKind::d2_dir_ub: return "d2_dir_ub";
    case OutageKind::d2_dir_ri: return "d2_dir_ri";
    case OutageKind::d2_dir_hd: return "d2_dir_hd";
    case OutageKind::oma_d1: return "oma_d1";
    case OutageKind::oma_d2_nodir: return "oma_d2_nodir";
    case OutageKind::oma_d2_dir: return "oma_d2_dir";
    }
    return "unknown";
}

inline std::string_view to_string(RateKind k) {
    switch (k) {
    case RateKind::d1: return "d1";
    case RateKind::d2_nodir: return "d2_nodir";
    case RateKind::d2_dir_ub: return "d2_dir_ub";
    case RateKind::d2_dir_ri: return "d2_dir_ri";
    case RateKind::sum_nodir: return "sum_nodir";
    case RateKind::sum_dir: return "sum_dir";
    }
    return "unknown";
}

/// Running mean and sum of squared deviations (Welford), mergeable.
struct Moments {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const Moments& other) {
        if (other.count == 0)
            return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double n_a = static_cast<double>(count);
        const double n_b = static_cast<double>(other.count);
        const double total = n_a + n_b;
        const double delta = other.mean - mean;
        mean += delta * n_b / total;
        m2 += other.m2 + delta * delta * n_a * n_b / total;
        count += other.count;
    }

    McEstimate estimate() const {
        if (count < 2)
            return {mean, 0.0, count};
        const double n = static_cast<double>(count);
        const double variance = std::max(m2, 0.0) / (n - 1.0);
        return {mean, std::sqrt(variance / n), count};
    }
};

/// Engine for one chunk. std::seed_seq and mt19937_64 are fully specified by
/// the standard, so streams are identical on every conforming platform.
inline std::mt19937_64 chunk_engine(std::uint64_t seed, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32),
                      0x6e6f6d61u};
    return std::mt19937_64(seq);
}

/// Uniform variate on (0, 1] with 53 random bits.
template <class Engine>
double uniform_open_closed(Engine& engine) {
    return static_cast<double>((engine() >> 11) + 1) * 0x1.0p-53;
}

/// One joint draw of the four channel power gains, always in the order
/// g0, g1, g2, gli so that streams stay aligned across scenarios.
template <class Engine>
ChannelDraw draw_channels(const SystemConfig& cfg, Engine& engine) {
    ChannelDraw d;
    d.g0 = -cfg.omega0 * std::log(uniform_open_closed(engine));
    d.g1 = -cfg.omega1 * std::log(uniform_open_closed(engine));
    d.g2 = -cfg.omega2 * std::log(uniform_open_closed(engine));
    d.gli = -cfg.omega_li * std::log(uniform_open_closed(engine));
    return d;
}

/// Worker count: the request (or hardware concurrency), capped by the
/// NOMA_THREADS environment variable and by the number of chunks.
inline unsigned worker_count(const McControl& ctl, std::uint64_t chunks) {
    unsigned n = ctl.threads != 0 ? ctl.threads : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NOMA_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap > 0)
            n = std::min(n, static_cast<unsigned>(cap));
    }
    return static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(n, chunks)));
}

/// Runs `evaluate(draw, out)` for every sample, where `out` has `outputs`
/// slots, and returns one estimate per slot.
template <class Evaluate>
std::vector<McEstimate> run_monte_carlo(const SystemConfig& cfg, std::size_t outputs, const McControl& ctl,
                                        Evaluate&& evaluate) {
    ctl.validate();
    const std::uint64_t chunks = (ctl.samples + ctl.chunk_size - 1) / ctl.chunk_size;
    std::vector<std::vector<Moments>> per_chunk(chunks, std::vector<Moments>(outputs));
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        std::vector<double> out(outputs);
        try {
            for (std::uint64_t chunk = next++; chunk < chunks; chunk = next++) {
                auto engine = chunk_engine(ctl.seed, chunk);
                const std::uint64_t begin = chunk * ctl.chunk_size;
                const std::uint64_t end = std::min(ctl.samples, begin + ctl.chunk_size);
                auto& acc = per_chunk[chunk];
                for (std::uint64_t i = begin; i < end; ++i) {
                    const ChannelDraw draw = draw_channels(cfg, engine);
                    evaluate(draw, std::span<double>(out));
                    for (std::size_t k = 0; k < outputs; ++k)
                        acc[k].add(out[k]);
                }
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure)
                failure = std::current_exception();
            next = chunks;
        }
    };

    const unsigned workers = worker_count(ctl, chunks);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
    }
    if (failure)
        std::rethrow_exception(failure);

    std::vector<McEstimate> result;
    result.reserve(outputs);
    for (std::size_t k = 0; k < outputs; ++k) {
        Moments total;
        for (const auto& chunk : per_chunk)
            total.merge(chunk[k]);
        result.push_back(total.estimate());
    }
    return result;
}

namespace detail {

inline void require_snr_grid(std::span<const double> rhos, const char* where) {
    if (rhos.empty())
        throw std::invalid_argument(fmt::format("{}: empty SNR list", where));
    for (double rho : rhos)
        require_positive_snr(rho, where);
}

// Outage of a two-path scheme: relay decodes and the combined SINR fails, or
// the relay fails and the direct path alone fails.
inline bool cooperative_outage(bool relay_decodes, double combined, double direct, double threshold) {
    return relay_decodes ? combined < threshold : direct < threshold;
}

}  // namespace detail

/// Outage frequency at every SNR in `rhos` using common random numbers.
inline std::vector<McEstimate> estimate_outage(const SystemConfig& cfg, std::span<const double> rhos, OutageKind kind,
                                               const McControl& ctl) {
    cfg.validate();
    detail::require_snr_grid(rhos, "estimate_outage");
    SystemConfig model = cfg;
    if (kind == OutageKind::d2_dir_hd)
        model.duplex = Duplex::half;
    std::vector<Thresholds> th;
    for (double rho : rhos)
        th.push_back(derive_thresholds(model, rho));
    // Orthogonal baselines: full power in every slot, rate targets scaled by
    // the number of slots.
    const double oma3_th1 = std::exp2(3.0 * cfg.r1) - 1.0;
    const double oma3_th2 = std::exp2(3.0 * cfg.r2) - 1.0;
    const double oma2_th2 = std::exp2(2.0 * cfg.r2) - 1.0;

    auto evaluate = [&](const ChannelDraw& d, std::span<double> out) {
        for (std::size_t i = 0; i < rhos.size(); ++i) {
            const double rho = rhos[i];
            const double g1 = th[i].gamma_th1;
            const double g2 = th[i].gamma_th2;
            bool outage = false;
            switch (kind) {
            case OutageKind::d1:
                outage = !(sinr_d1_detect_x2(d, model, rho) >= g2 && sinr_d1_own(d, model, rho) >= g1);
                break;
            case OutageKind::d2_nodir:
                outage = !(sinr_d1_detect_x2(d, model, rho) >= g2 && sinr_d2_relay_ub(d, model, rho) >= g2);
                break;
            case OutageKind::d2_dir_ub:
            case OutageKind::d2_dir_hd:
                outage = detail::cooperative_outage(sinr_d1_detect_x2(d, model, rho) >= g2,
                                                    sinr_d2_mrc(d, model, rho), sinr_d2_direct_ub(d, model, rho), g2);
                break;
            case OutageKind::d2_dir_ri: {
                const double direct = sinr_d2_direct_ri(d, model, rho);
                outage = detail::cooperative_outage(sinr_d1_detect_x2(d, model, rho) >= g2,
                                                    direct + sinr_d2_relay_ri(d, model, rho), direct, g2);
                break;
            }
            case OutageKind::oma_d1:
                outage = d.g1 * rho < oma3_th1;
                break;
            case OutageKind::oma_d2_nodir:
                outage = !(d.g1 * rho >= oma3_th2 && d.g2 * rho >= oma3_th2);
                break;
            case OutageKind::oma_d2_dir:
                outage = detail::cooperative_outage(d.g1 * rho >= oma2_th2, (d.g0 + d.g2) * rho, d.g0 * rho, oma2_th2);
                break;
            }
            out[i] = outage ? 1.0 : 0.0;
        }
    };
    return run_monte_carlo(model, rhos.size(), ctl, evaluate);
}

inline McEstimate estimate_outage(const SystemConfig& cfg, double rho, OutageKind kind, const McControl& ctl) {
    return estimate_outage(cfg, std::span<const double>(&rho, 1), kind, ctl).front();
}

/// Mean instantaneous rate log2(1 + SINR) in bits per channel use; half in
/// half-duplex mode.
inline std::vector<McEstimate> estimate_ergodic(const SystemConfig& cfg, std::span<const double> rhos, RateKind kind,
                                                const McControl& ctl) {
    cfg.validate();
    detail::require_snr_grid(rhos, "estimate_ergodic");
    const double scale = cfg.is_full_duplex() ? 1.0 : 0.5;
    auto evaluate = [&](const ChannelDraw& d, std::span<double> out) {
        for (std::size_t i = 0; i < rhos.size(); ++i) {
            const double rho = rhos[i];
            auto d1 = [&] { return std::log2(1.0 + sinr_d1_own(d, cfg, rho)); };
            auto relay = [&] { return sinr_d1_detect_x2(d, cfg, rho); };
            double bits = 0.0;
            switch (kind) {
            case RateKind::d1:
                bits = d1();
                break;
            case RateKind::d2_nodir:
                bits = std::log2(1.0 + std::min(relay(), sinr_d2_relay_ub(d, cfg, rho)));
                break;
            case RateKind::d2_dir_ub:
                bits = std::log2(1.0 + std::min(relay(), sinr_d2_mrc(d, cfg, rho)));
                break;
            case RateKind::d2_dir_ri:
                bits = std::log2(
                    1.0 + std::min(relay(), sinr_d2_direct_ri(d, cfg, rho) + sinr_d2_relay_ri(d, cfg, rho)));
                break;
            case RateKind::sum_nodir:
                bits = d1() + std::log2(1.0 + std::min(relay(), sinr_d2_relay_ub(d, cfg, rho)));
                break;
            case RateKind::sum_dir:
                bits = d1() + std::log2(1.0 + std::min(relay(), sinr_d2_mrc(d, cfg, rho)));
                break;
            }
            out[i] = scale * bits;
        }
    };
    return run_monte_carlo(cfg, rhos.size(), ctl, evaluate);
}

inline McEstimate estimate_ergodic(const SystemConfig& cfg, double rho, RateKind kind, const McControl& ctl) {
    return estimate_ergodic(cfg, std::span<const double>(&rho, 1), kind, ctl).front();
}

/// Delay-limited throughput R1 * 1{D1 decodes} + R2 * 1{D2 decodes}, averaged.
/// D2's event follows cfg.direct_link (resolvable copies with MRC).
inline std::vector<McEstimate> estimate_throughput_delay_limited(const SystemConfig& cfg, std::span<const double> rhos,
                                                                 const McControl& ctl) {
    cfg.validate();
    detail::require_snr_grid(rhos, "estimate_throughput_delay_limited");
    std::vector<Thresholds> th;
    for (double rho : rhos)
        th.push_back(derive_thresholds(cfg, rho));
    auto evaluate = [&](const ChannelDraw& d, std::span<double> out) {
        for (std::size_t i = 0; i < rhos.size(); ++i) {
            const double rho = rhos[i];
            const double g2 = th[i].gamma_th2;
            const bool relay_ok = sinr_d1_detect_x2(d, cfg, rho) >= g2;
            const bool d1_ok = relay_ok && sinr_d1_own(d, cfg, rho) >= th[i].gamma_th1;
            const bool d2_ok =
                cfg.direct_link
                    ? !detail::cooperative_outage(relay_ok, sinr_d2_mrc(d, cfg, rho), sinr_d2_direct_ub(d, cfg, rho), g2)
                    : relay_ok && sinr_d2_relay_ub(d, cfg, rho) >= g2;
            out[i] = (d1_ok ? cfg.r1 : 0.0) + (d2_ok ? cfg.r2 : 0.0);
        }
    };
    return run_monte_carlo(cfg, rhos.size(), ctl, evaluate);
}

}  // namespace noma
