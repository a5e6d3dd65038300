#pragma once

// Network parameters, target-SINR thresholds and the instantaneous SINR
// expressions shared by the analytic and Monte Carlo paths.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include <fmt/format.h>

namespace noma {

enum class Duplex { full, half };

/// How half-duplex target rates map to target SINRs. `standard` is 2^{2R}-1
/// (two slots per symbol); `paper_literal` is 2^{2R-1}.
enum class HdThresholdConvention { standard, paper_literal };

inline std::string_view to_string(Duplex d) { return d == Duplex::full ? "fd" : "hd"; }

inline std::string_view to_string(HdThresholdConvention c) {
    return c == HdThresholdConvention::standard ? "standard" : "paper_literal";
}

struct SystemConfig {
    double a1 = 0.2;      // power fraction of the near user D1
    double a2 = 0.8;      // power fraction of the far user D2
    double omega0 = 1.0;  // BS -> D2
    double omega1 = 1.0;  // BS -> D1
    double omega2 = 1.0;  // D1 -> D2
    double omega_li = 0.0;
    double kappa = 0.0;
    double r1 = 1.0;  // target rates, bits per channel use
    double r2 = 1.0;
    Duplex duplex = Duplex::full;
    bool direct_link = false;
    HdThresholdConvention hd_threshold_convention = HdThresholdConvention::standard;

    /// Throws std::invalid_argument naming the first violated invariant.
    /// omega_li = 0 is accepted (an ideal FD relay).
    void validate() const {
        auto fail = [](std::string msg) { throw std::invalid_argument("SystemConfig: " + msg); };
        if (!(a1 > 0.0) || !(a2 > 0.0))
            fail("a1 and a2 must be positive");
        if (std::abs(a1 + a2 - 1.0) > 1e-12)
            fail(fmt::format("a1 + a2 must equal 1 (got {})", a1 + a2));
        if (!(a1 < a2))
            fail("a1 must be smaller than a2");
        for (double omega : {omega0, omega1, omega2})
            if (!(omega > 0.0) || !std::isfinite(omega))
                fail("omega0, omega1 and omega2 must be finite and positive");
        if (!(omega_li >= 0.0) || !std::isfinite(omega_li))
            fail("omega_li must be finite and non-negative");
        if (!(kappa >= 0.0) || !std::isfinite(kappa))
            fail("kappa must be finite and non-negative");
        if (!(r1 > 0.0) || !(r2 > 0.0) || !std::isfinite(r1) || !std::isfinite(r2))
            fail("r1 and r2 must be finite and positive");
    }

    /// Switching factor: 1 in full duplex, 0 in half duplex.
    double switching_factor() const { return duplex == Duplex::full ? 1.0 : 0.0; }

    bool is_full_duplex() const { return duplex == Duplex::full; }
};

/// Average gains from normalized distances: BS->D2 distance is 1, BS->D1 is d.
struct Geometry {
    double omega1;
    double omega2;
};

inline Geometry geometry_gains(double d, double pathloss_exponent) {
    if (!(d > 0.0 && d < 1.0))
        throw std::invalid_argument("geometry_gains: d must lie in (0, 1)");
    if (!(pathloss_exponent > 0.0))
        throw std::invalid_argument("geometry_gains: pathloss exponent must be positive");
    return {std::pow(d, -pathloss_exponent), std::pow(1.0 - d, -pathloss_exponent)};
}

struct Thresholds {
    double gamma_th1 = 0.0;
    double gamma_th2 = 0.0;
    double tau = 0.0;  // +inf when infeasible
    double beta = 0.0;
    double theta = 0.0;
    bool feasible = false;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double value) { return 10.0 * std::log10(value); }

/// Target SINR for a target rate under the configured duplex mode.
inline double target_sinr(const SystemConfig& cfg, double rate) {
    if (cfg.is_full_duplex())
        return std::exp2(rate) - 1.0;
    if (cfg.hd_threshold_convention == HdThresholdConvention::standard)
        return std::exp2(2.0 * rate) - 1.0;
    return std::exp2(2.0 * rate - 1.0);
}

inline void require_positive_snr(double rho, const char* where) {
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw std::invalid_argument(fmt::format("{}: rho must be finite and positive (got {})", where, rho));
}

inline Thresholds derive_thresholds(const SystemConfig& cfg, double rho) {
    require_positive_snr(rho, "derive_thresholds");
    Thresholds t;
    t.gamma_th1 = target_sinr(cfg, cfg.r1);
    t.gamma_th2 = target_sinr(cfg, cfg.r2);
    const double margin = cfg.a2 - cfg.a1 * t.gamma_th2;
    t.feasible = margin > 0.0;
    t.tau = t.feasible ? t.gamma_th2 / (rho * margin) : std::numeric_limits<double>::infinity();
    t.beta = t.gamma_th1 / (cfg.a1 * rho);
    t.theta = std::max(t.tau, t.beta);
    return t;
}

struct ChannelDraw {
    double g0 = 0.0;   // |h0|^2, BS -> D2
    double g1 = 0.0;   // |h1|^2, BS -> D1
    double g2 = 0.0;   // |h2|^2, D1 -> D2
    double gli = 0.0;  // |h_LI|^2, loop interference at D1
};

/// SINR at D1 when decoding D2's message (first SIC stage).
inline double sinr_d1_detect_x2(const ChannelDraw& draw, const SystemConfig& cfg, double rho) {
    return draw.g1 * cfg.a2 * rho /
           (draw.g1 * cfg.a1 * rho + cfg.switching_factor() * draw.gli * rho + 1.0);
}

/// SINR at D1 for its own message after SIC.
inline double sinr_d1_own(const ChannelDraw& draw, const SystemConfig& cfg, double rho) {
    return draw.g1 * cfg.a1 * rho / (cfg.switching_factor() * draw.gli * rho + 1.0);
}

/// Direct-link SINR at D2 with residual interference from the relayed copy.
inline double sinr_d2_direct_ri(const ChannelDraw& draw, const SystemConfig& cfg, double rho) {
    return draw.g0 * cfg.a2 * rho / (draw.g0 * cfg.a1 * rho + cfg.kappa * draw.g2 * rho + 1.0);
}

/// Relay-link SINR at D2 with residual interference from the direct copy.
inline double sinr_d2_relay_ri(const ChannelDraw& draw, const SystemConfig& cfg, double rho) {
    return draw.g2 * rho / (cfg.kappa * draw.g0 * rho + 1.0);
}

/// Direct-link SINR at D2 with the two copies fully resolvable.
inline double sinr_d2_direct_ub(const ChannelDraw& draw, const SystemConfig& cfg, double rho) {
    return draw.g0 * cfg.a2 * rho / (draw.g0 * cfg.a1 * rho + 1.0);
}

/// Relay-link SINR at D2 with the two copies fully resolvable.
inline double sinr_d2_relay_ub(const ChannelDraw& draw, const SystemConfig& /*cfg*/, double rho) {
    return draw.g2 * rho;
}

/// Maximal-ratio combination of the resolvable direct and relayed copies.
inline double sinr_d2_mrc(const ChannelDraw& draw, const SystemConfig& cfg, double rho) {
    return sinr_d2_relay_ub(draw, cfg, rho) + sinr_d2_direct_ub(draw, cfg, rho);
}

}  // namespace noma
