#pragma once

// Closed-form, series and asymptotic outage probabilities of both users.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string_view>

#include <fmt/format.h>

#include "noma/special_math.hpp"
#include "noma/system_model.hpp"

namespace noma {

enum class OutageMethod { exact_closed_form, series_truncated, gauss_chebyshev, asymptotic };

inline std::string_view to_string(OutageMethod m) {
    switch (m) {
    case OutageMethod::exact_closed_form: return "exact_closed_form";
    case OutageMethod::series_truncated: return "series_truncated";
    case OutageMethod::gauss_chebyshev: return "gauss_chebyshev";
    case OutageMethod::asymptotic: return "asymptotic";
    }
    return "unknown";
}

struct OutageResult {
    double probability = 1.0;
    OutageMethod method = OutageMethod::exact_closed_form;
    int terms_used = 0;
};

namespace detail {

// Round-off may push an exact expression a hair outside [0, 1]; anything
// larger is a formula bug and must not be hidden.
inline double checked_probability(double raw, const char* where) {
    constexpr double slack = 1e-9;
    if (!(raw >= -slack && raw <= 1.0 + slack))
        throw std::logic_error(fmt::format("{}: probability {} outside [0, 1]", where, raw));
    return std::clamp(raw, 0.0, 1.0);
}

// 1 - chi * exp(-x) written as a sum of non-negative parts, chi in (0, 1].
inline double one_minus_scaled_exp(double chi, double x) {
    return (1.0 - chi) + chi * -std::expm1(-x);
}

// Omega1 / (Omega1 + rho t Omega_LI); exactly 1 in half duplex or with no LI.
inline double li_factor(const SystemConfig& cfg, double rho, double t) {
    if (!cfg.is_full_duplex() || cfg.omega_li == 0.0)
        return 1.0;
    return cfg.omega1 / (cfg.omega1 + rho * t * cfg.omega_li);
}

inline SystemConfig with_duplex(SystemConfig cfg, Duplex d) {
    cfg.duplex = d;
    return cfg;
}

inline void require_fd_direct(const SystemConfig& cfg, const char* where) {
    if (!cfg.is_full_duplex() || !cfg.direct_link)
        throw std::invalid_argument(fmt::format("{}: requires full duplex with the direct link", where));
}

}  // namespace detail

/// Outage probability of the near user D1 (either duplex mode).
inline OutageResult outage_d1(const SystemConfig& cfg, double rho) {
    cfg.validate();
    const Thresholds th = derive_thresholds(cfg, rho);
    if (!th.feasible)
        return {1.0, OutageMethod::exact_closed_form, 0};
    const double chi = detail::li_factor(cfg, rho, th.theta);
    const double p = detail::one_minus_scaled_exp(chi, th.theta / cfg.omega1);
    return {detail::checked_probability(p, "outage_d1"), OutageMethod::exact_closed_form, 0};
}

/// Outage probability of the far user D2 served only through the relay.
inline OutageResult outage_d2_nodir(const SystemConfig& cfg, double rho) {
    cfg.validate();
    const Thresholds th = derive_thresholds(cfg, rho);
    if (!th.feasible)
        return {1.0, OutageMethod::exact_closed_form, 0};
    const double chi = detail::li_factor(cfg, rho, th.tau);
    const double x = th.tau / cfg.omega1 + th.gamma_th2 / (rho * cfg.omega2);
    const double p = detail::one_minus_scaled_exp(chi, x);
    return {detail::checked_probability(p, "outage_d2_nodir"), OutageMethod::exact_closed_form, 0};
}

namespace detail {

struct DirectLinkTerms {
    double tau;
    double chi;
    double relay_ok;   // chi * exp(-tau / Omega1)
    double direct_bad; // 1 - exp(-tau / Omega0)
};

inline DirectLinkTerms direct_link_terms(const SystemConfig& cfg, double rho, const Thresholds& th) {
    const double chi = li_factor(cfg, rho, th.tau);
    return {th.tau, chi, chi * std::exp(-th.tau / cfg.omega1), -std::expm1(-th.tau / cfg.omega0)};
}

// P = J11 * relay_ok + (1 - relay_ok) * direct_bad, with J11 = direct_bad - theta1.
inline double assemble_direct_link(const DirectLinkTerms& t, double theta1) {
    return (t.direct_bad - theta1) * t.relay_ok + (1.0 - t.relay_ok) * t.direct_bad;
}

}  // namespace detail

/// Theta_1 = int_0^tau e^{-y/Omega0}/Omega0 * exp(-(g/rho - y a2/(y a1 rho + 1))/Omega2) dy
/// in closed form: an outer alternating series with an inner finite sum of
/// exponential-integral terms.
struct DirectLinkSeries {
    double theta1 = 0.0;
    int terms_used = 0;
    bool converged = false;
};

inline DirectLinkSeries direct_link_theta1_series(const SystemConfig& cfg, double rho, const SeriesControl& ctl) {
    ctl.validate();
    const Thresholds th = derive_thresholds(cfg, rho);
    const double g = th.gamma_th2;
    const double a1 = cfg.a1;
    const double a2 = cfg.a2;
    const double phi1 = -a2 / (a1 * rho * cfg.omega2);
    const double phi2 = a1 * rho * cfg.omega0;
    const double upper = 1.0 + a1 * rho * th.tau;
    const double psi = phi1 / upper;
    const double varphi = 1.0 / (rho * a1 * cfg.omega0) - g / (rho * cfg.omega2) - phi1;

    const double ei_gap = expint_ei(phi1) - expint_ei(psi);
    const double e_psi = std::exp(psi);
    const double e_phi1 = std::exp(phi1);

    double sum = 0.0;
    double previous_magnitude = std::numeric_limits<double>::infinity();
    double phi1_pow = phi1;       // phi1^{n+1}
    double upper_pow = upper;     // upper^{n+1}
    double n_factorial = 1.0;     // n!
    double phi2_pow = phi2;       // phi2^{n+1}
    for (int n = 0; n < ctl.max_outer_terms; ++n) {
        // Theta_2(n) = int_1^upper x^n e^{phi1/x} dx
        double theta2 = phi1_pow / (n_factorial * (n + 1)) * ei_gap;
        double psi_pow = 1.0;
        double phi1_pow_k = 1.0;
        double falling = n + 1.0;  // (n+1)!/(n-k)! at k = 0
        for (int k = 0; k <= n; ++k) {
            theta2 += (upper_pow * e_psi * psi_pow - e_phi1 * phi1_pow_k) / falling;
            psi_pow *= psi;
            phi1_pow_k *= phi1;
            falling *= (n - k);
        }
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        const double term = sign * theta2 / (n_factorial * phi2_pow);
        sum += term;
        const double magnitude = std::abs(term);
        if (magnitude <= ctl.rel_tail_tol * std::abs(sum) && magnitude <= previous_magnitude)
            return {std::exp(varphi) * sum, n + 1, true};
        previous_magnitude = magnitude;
        phi1_pow *= phi1;
        upper_pow *= upper;
        n_factorial *= (n + 1);
        phi2_pow *= phi2;
    }
    return {std::exp(varphi) * sum, ctl.max_outer_terms, false};
}

/// Outage probability of D2 with the direct link in full duplex, evaluated
/// through the truncated series for Theta_1.
inline OutageResult outage_d2_dir_fd(const SystemConfig& cfg, double rho, const SeriesControl& ctl = {}) {
    cfg.validate();
    detail::require_fd_direct(cfg, "outage_d2_dir_fd");
    const Thresholds th = derive_thresholds(cfg, rho);
    if (!th.feasible)
        return {1.0, OutageMethod::series_truncated, 0};
    const auto terms = detail::direct_link_terms(cfg, rho, th);
    const DirectLinkSeries series = direct_link_theta1_series(cfg, rho, ctl);
    const double raw = detail::assemble_direct_link(terms, series.theta1);
    if (!series.converged)
        throw accuracy_error(
            fmt::format("outage_d2_dir_fd: series did not converge within {} terms at rho = {}",
                        ctl.max_outer_terms, rho),
            raw, std::numeric_limits<double>::quiet_NaN(), series.terms_used);
    return {detail::checked_probability(raw, "outage_d2_dir_fd"), OutageMethod::series_truncated,
            series.terms_used};
}

/// High-SNR Gauss-Chebyshev approximation of the full-duplex direct-link
/// outage of D2. Not a probability at low SNR; reported unclamped.
inline OutageResult outage_d2_dir_fd_gc(const SystemConfig& cfg, double rho, const QuadratureControl& ctl = {}) {
    cfg.validate();
    ctl.validate();
    detail::require_fd_direct(cfg, "outage_d2_dir_fd_gc");
    const Thresholds th = derive_thresholds(cfg, rho);
    if (!th.feasible)
        return {1.0, OutageMethod::gauss_chebyshev, ctl.gc_points};
    const double tau = th.tau;
    const double o0 = cfg.omega0;
    const double o2 = cfg.omega2;
    const int n = ctl.gc_points;
    double sum = 0.0;
    for (const auto& [s, w] : gauss_chebyshev_nodes(n)) {
        const double shifted = (s + 1.0) * tau;
        sum += (1.0 + shifted * cfg.a2 / (o2 * (shifted * cfg.a1 * rho + 2.0)) - s * tau / (2.0 * o0)) * w;
    }
    const double prefactor =
        1.0 - (o2 * tau + 2.0 * o0 * tau * (cfg.a2 - cfg.a1 * th.gamma_th2)) / (2.0 * o0 * o2);
    const double bracket = tau / o0 - prefactor * tau * std::numbers::pi / (2.0 * n * o0) * sum;
    const double chi = detail::li_factor(cfg, rho, tau);
    return {bracket * chi + (1.0 - chi) * tau / o0, OutageMethod::gauss_chebyshev, n};
}

enum class AsymptoticOutage { d1_fd, d1_hd, d2_nodir_fd, d2_nodir_hd };

inline std::string_view to_string(AsymptoticOutage a) {
    switch (a) {
    case AsymptoticOutage::d1_fd: return "d1_fd";
    case AsymptoticOutage::d1_hd: return "d1_hd";
    case AsymptoticOutage::d2_nodir_fd: return "d2_nodir_fd";
    case AsymptoticOutage::d2_nodir_hd: return "d2_nodir_hd";
    }
    return "unknown";
}

/// High-SNR outage expansions. The duplex mode is taken from `which`, not
/// from cfg.duplex. Values are reported raw.
inline OutageResult asymptotic_outage(const SystemConfig& cfg, double rho, AsymptoticOutage which) {
    cfg.validate();
    const bool fd = which == AsymptoticOutage::d1_fd || which == AsymptoticOutage::d2_nodir_fd;
    const SystemConfig mode_cfg = detail::with_duplex(cfg, fd ? Duplex::full : Duplex::half);
    const Thresholds th = derive_thresholds(mode_cfg, rho);
    if (!th.feasible)
        return {1.0, OutageMethod::asymptotic, 0};
    const double o1 = cfg.omega1;
    const double o2 = cfg.omega2;
    double value = 0.0;
    switch (which) {
    case AsymptoticOutage::d1_fd:
        value = 1.0 - o1 / (o1 + rho * th.theta * cfg.omega_li);
        break;
    case AsymptoticOutage::d1_hd:
        value = th.theta / o1;
        break;
    case AsymptoticOutage::d2_nodir_fd:
        value = 1.0 - (o1 * o2 * rho - o1 * th.gamma_th2 - th.tau * rho * o2) /
                          (o2 * rho * (o1 + th.tau * rho * cfg.omega_li));
        break;
    case AsymptoticOutage::d2_nodir_hd:
        value = th.gamma_th2 / (rho * o2) + th.tau / o1;
        break;
    }
    return {value, OutageMethod::asymptotic, 0};
}

struct CurvePoint {
    double rho = 0.0;  // linear SNR
    double value = 0.0;
};

namespace detail {

inline void require_increasing_curve(std::span<const CurvePoint> curve, const char* where) {
    if (curve.size() < 2)
        throw std::invalid_argument(fmt::format("{}: need at least two points", where));
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (!(curve[i].rho > 0.0))
            throw std::invalid_argument(fmt::format("{}: SNR values must be positive", where));
        if (i > 0 && !(curve[i].rho > curve[i - 1].rho))
            throw std::invalid_argument(fmt::format("{}: SNR values must be strictly increasing", where));
    }
}

}  // namespace detail

/// Negative log-log slope of outage versus SNR over the last two points.
inline double diversity_order_estimate(std::span<const CurvePoint> curve) {
    detail::require_increasing_curve(curve, "diversity_order_estimate");
    const CurvePoint& lo = curve[curve.size() - 2];
    const CurvePoint& hi = curve[curve.size() - 1];
    if (!(lo.value > 0.0) || !(hi.value > 0.0))
        throw std::domain_error("diversity_order_estimate: probabilities must be positive");
    return -(std::log(hi.value) - std::log(lo.value)) / (std::log(hi.rho) - std::log(lo.rho));
}

}  // namespace noma
