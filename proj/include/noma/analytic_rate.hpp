#pragma once

// Ergodic rates: closed forms, quadrature of the integral-only expressions,
// high-SNR asymptotes and the sum rates built from them.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string_view>

#include <fmt/format.h>

#include "noma/analytic_outage.hpp"
#include "noma/montecarlo.hpp"
#include "noma/special_math.hpp"
#include "noma/system_model.hpp"

namespace noma {

enum class RateMethod { closed_form, quadrature, asymptotic, monte_carlo };

inline std::string_view to_string(RateMethod m) {
    switch (m) {
    case RateMethod::closed_form: return "closed_form";
    case RateMethod::quadrature: return "quadrature";
    case RateMethod::asymptotic: return "asymptotic";
    case RateMethod::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

struct RateResult {
    double rate = 0.0;  // bits per channel use
    RateMethod method = RateMethod::closed_form;
    double error_bound = 0.0;  // quadrature error estimate, or standard error for monte_carlo
};

namespace detail {

inline constexpr double ln2 = std::numbers::ln2;

// Several expressions divide by (Omega_LI - a1 Omega1) or (a2 Omega1 - xi)
// although their limits are finite. Within 1e-7 (relative) of such a point,
// average the expression at Omega_LI = point * (1 +- 1e-6).
template <class F>
double across_removable(double omega_li, std::span<const double> singular_points, F&& expr) {
    for (double point : singular_points) {
        if (std::abs(omega_li - point) < 1e-7 * point) {
            const double h = 1e-6 * point;
            return 0.5 * (expr(point + h) + expr(point - h));
        }
    }
    return expr(omega_li);
}

// e^{x} Ei(-x) for x > 0, the recurring building block.
inline double exp_ei_neg(double x) { return expint_ei_scaled(x, -x); }

}  // namespace detail

/// Ergodic rate of D1. Half duplex carries the 1/2 two-slot factor.
inline RateResult rate_d1(const SystemConfig& cfg, double rho) {
    cfg.validate();
    require_positive_snr(rho, "rate_d1");
    const double u = 1.0 / (cfg.a1 * rho * cfg.omega1);
    if (!cfg.is_full_duplex())
        return {-detail::exp_ei_neg(u) / (2.0 * detail::ln2), RateMethod::closed_form, 0.0};
    if (cfg.omega_li == 0.0)
        return {-detail::exp_ei_neg(u) / detail::ln2, RateMethod::closed_form, 0.0};
    const double a1o1 = cfg.a1 * cfg.omega1;
    auto expr = [&](double oli) {
        const double v = 1.0 / (rho * oli);
        return a1o1 / (detail::ln2 * (oli - a1o1)) * (detail::exp_ei_neg(u) - detail::exp_ei_neg(v));
    };
    const double singular[] = {a1o1};
    return {detail::across_removable(cfg.omega_li, singular, expr), RateMethod::closed_form, 0.0};
}

/// High-SNR expansion of the D1 rate, using Ei(-x) ~ ln x + C. Full duplex
/// needs Omega_LI > 0.
inline RateResult rate_d1_asym(const SystemConfig& cfg, double rho) {
    cfg.validate();
    require_positive_snr(rho, "rate_d1_asym");
    constexpr double euler = std::numbers::egamma;
    const double u = 1.0 / (cfg.a1 * rho * cfg.omega1);
    const double u_part = (1.0 + u) * (std::log(u) + euler);
    if (!cfg.is_full_duplex())
        return {-u_part / (2.0 * detail::ln2), RateMethod::asymptotic, 0.0};
    if (cfg.omega_li == 0.0)
        throw std::domain_error("rate_d1_asym: the full-duplex expansion requires omega_li > 0");
    const double a1o1 = cfg.a1 * cfg.omega1;
    auto expr = [&](double oli) {
        const double v = 1.0 / (rho * oli);
        return a1o1 / (detail::ln2 * (oli - a1o1)) * (u_part - (1.0 + v) * (std::log(v) + euler));
    };
    const double singular[] = {a1o1};
    return {detail::across_removable(cfg.omega_li, singular, expr), RateMethod::asymptotic, 0.0};
}

/// Ergodic rate of D2 served only through the relay, by quadrature of the
/// complementary CDF of min(SINR at D1 for x2, relay-link SINR).
inline RateResult rate_d2_nodir(const SystemConfig& cfg, double rho, const QuadratureControl& ctl = {}) {
    cfg.validate();
    require_positive_snr(rho, "rate_d2_nodir");
    const double a1 = cfg.a1;
    const double a2 = cfg.a2;
    const bool fd = cfg.is_full_duplex();
    auto integrand = [&](double y) {
        const double margin = a2 - a1 * y;
        if (!(margin > 0.0))
            return 0.0;
        const double t = y / (rho * margin);
        const double li = fd && cfg.omega_li > 0.0 ? cfg.omega1 / (cfg.omega1 + rho * t * cfg.omega_li) : 1.0;
        return li * std::exp(-t / cfg.omega1 - y / (rho * cfg.omega2)) / (1.0 + y);
    };
    const QuadratureResult q = integrate_finite(integrand, 0.0, a2 / a1, ctl);
    const double scale = (fd ? 1.0 : 0.5) / detail::ln2;
    return {scale * q.value_or_throw("rate_d2_nodir"), RateMethod::quadrature, scale * q.error_estimate};
}

/// High-SNR closed form of the relay-only D2 rate.
inline RateResult rate_d2_nodir_asym(const SystemConfig& cfg, double rho) {
    cfg.validate();
    require_positive_snr(rho, "rate_d2_nodir_asym");
    const double a1 = cfg.a1;
    const double a2 = cfg.a2;
    const double o1 = cfg.omega1;
    const double e = 1.0 / (rho * cfg.omega2);
    const double ei_gap = expint_ei_scaled(e, -e / a1) - expint_ei_scaled(e, -e);
    if (!cfg.is_full_duplex())
        return {ei_gap / (2.0 * detail::ln2), RateMethod::asymptotic, 0.0};

    auto expr = [&](double oli) {
        const double xi = oli - a1 * o1;
        const double denom = a2 * o1 - xi;
        const double first = ei_gap * o1 / denom;
        if (oli == 0.0)
            return first / detail::ln2;  // second term vanishes as Omega_LI ln(Omega_LI)
        const double c = a2 * o1 / (rho * cfg.omega2 * xi);
        const double b = a2 / (rho * a1 * cfg.omega2);
        const double bracket = expint_ei_scaled(c, -b - c) - expint_ei_scaled(c, -c);
        const double second = bracket / xi * (a1 * a2 * o1 * o1 + a2 * o1 * xi) / denom;
        return (first - second) / detail::ln2;
    };
    const double singular[] = {a1 * o1, o1};
    return {detail::across_removable(cfg.omega_li, singular, expr), RateMethod::asymptotic, 0.0};
}

/// Which reading of the half-duplex direct-link rate double integral to use.
/// `corrected` uses the integration variable in the inner exponent and the
/// 1/(2 ln 2) prefactor, which is what the rate definition implies;
/// `as_printed` substitutes the HD target SINR there and omits the prefactor.
enum class HdDirectRateForm { corrected, as_printed };

/// Half-duplex direct-link D2 rate by nested quadrature.
inline RateResult rate_d2_dir_hd_quadrature(const SystemConfig& cfg, double rho, const QuadratureControl& ctl = {},
                                            HdDirectRateForm form = HdDirectRateForm::corrected) {
    cfg.validate();
    require_positive_snr(rho, "rate_d2_dir_hd_quadrature");
    const double a1 = cfg.a1;
    const double a2 = cfg.a2;
    const double o0 = cfg.omega0;
    const double o1 = cfg.omega1;
    const double o2 = cfg.omega2;
    const double hd_target = target_sinr(detail::with_duplex(cfg, Duplex::half), cfg.r2);
    // The inner integrand carries e^{-x/Omega0}; beyond 60 Omega0 it is
    // below e^{-60} of its peak.
    const double inner_cap = 60.0 * o0;

    auto both_links = [&](double y) {
        const double margin = a2 - a1 * y;
        if (!(margin > 0.0))
            return 0.0;
        return std::exp(-y * (o0 + o1) / (rho * margin * o0 * o1)) / (1.0 + y);
    };
    auto relay_needed = [&](double y) {
        const double margin = a2 - a1 * y;
        if (!(margin > 0.0))
            return 0.0;
        const double t0 = y / (rho * margin);
        const double relay_term = y / (rho * margin * o1);
        const double level = form == HdDirectRateForm::corrected ? y : hd_target;
        auto inner = [&](double x) {
            const double d = x * a1 * rho + 1.0;
            return std::exp(-x / o0 - (level * d - x * a2 * rho) / (rho * d * o2) - relay_term) / o0;
        };
        const QuadratureResult q = integrate_finite(inner, 0.0, std::min(t0, inner_cap), ctl);
        return q.value_or_throw("rate_d2_dir_hd_quadrature (inner)") / (1.0 + y);
    };
    const QuadratureResult qa = integrate_finite(both_links, 0.0, a2 / a1, ctl);
    const QuadratureResult qb = integrate_finite(relay_needed, 0.0, a2 / a1, ctl);
    const double scale = form == HdDirectRateForm::corrected ? 1.0 / (2.0 * detail::ln2) : 1.0;
    const double value = qa.value_or_throw("rate_d2_dir_hd_quadrature") + qb.value_or_throw("rate_d2_dir_hd_quadrature");
    return {scale * value, RateMethod::quadrature, scale * (qa.error_estimate + qb.error_estimate)};
}

/// D2 rate with the direct link. Half duplex: nested quadrature. Full duplex:
/// the MRC sum inside the minimum has no product-form CDF, so the rate is
/// estimated by Monte Carlo and error_bound holds the standard error.
inline RateResult rate_d2_dir(const SystemConfig& cfg, double rho, const McControl& mc,
                              const QuadratureControl& ctl = {}) {
    cfg.validate();
    require_positive_snr(rho, "rate_d2_dir");
    if (!cfg.is_full_duplex())
        return rate_d2_dir_hd_quadrature(cfg, rho, ctl);
    const McEstimate est = estimate_ergodic(cfg, rho, RateKind::d2_dir_ub, mc);
    return {est.mean, RateMethod::monte_carlo, est.std_error};
}

/// High-SNR limit of the direct-link D2 rate (a constant in rho).
inline RateResult rate_d2_dir_asym(const SystemConfig& cfg, double rho) {
    cfg.validate();
    require_positive_snr(rho, "rate_d2_dir_asym");
    const double a1 = cfg.a1;
    const double a2 = cfg.a2;
    if (!cfg.is_full_duplex())
        return {0.5 * std::log2(1.0 + a2 / a1), RateMethod::asymptotic, 0.0};
    const double o1 = cfg.omega1;
    auto expr = [&](double oli) {
        const double xi = oli - a1 * o1;
        const double denom = a2 * o1 - xi;
        const double first = std::log1p(a2 / a1) * o1 / denom;
        if (oli == 0.0)
            return first / detail::ln2;
        const double second = std::log1p(xi / (a1 * o1)) / xi * (a2 * o1 * xi + a1 * a2 * o1 * o1) / denom;
        return (first - second) / detail::ln2;
    };
    const double singular[] = {a1 * o1, o1};
    return {detail::across_removable(cfg.omega_li, singular, expr), RateMethod::asymptotic, 0.0};
}

enum class Scenario { nodir, dir };

inline std::string_view to_string(Scenario s) { return s == Scenario::nodir ? "nodir" : "dir"; }

/// Asymptotic ergodic sum rate: the D1 expansion plus the D2 asymptote of
/// the chosen scenario, in the duplex mode of cfg.
inline RateResult sum_rate_asym(const SystemConfig& cfg, double rho, Scenario scenario) {
    const double d1 = rate_d1_asym(cfg, rho).rate;
    const double d2 = scenario == Scenario::nodir ? rate_d2_nodir_asym(cfg, rho).rate : rate_d2_dir_asym(cfg, rho).rate;
    return {d1 + d2, RateMethod::asymptotic, 0.0};
}

/// Rate increase per doubling of SNR over the last two points.
inline double snr_slope_estimate(std::span<const CurvePoint> curve) {
    detail::require_increasing_curve(curve, "snr_slope_estimate");
    const CurvePoint& lo = curve[curve.size() - 2];
    const CurvePoint& hi = curve[curve.size() - 1];
    return (hi.value - lo.value) / (std::log2(hi.rho) - std::log2(lo.rho));
}

}  // namespace noma
