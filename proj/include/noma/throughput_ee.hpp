#pragma once

// Delay-limited and delay-tolerant system throughput, and energy efficiency.
//
// The SNR rho and the wattages Ps, Pr are independent inputs: the outage and
// rate expressions see only rho, while the energy budget only divides the
// resulting throughput. Changing Ps here does not change rho.

#include <stdexcept>
#include <string_view>

#include "noma/analytic_outage.hpp"
#include "noma/analytic_rate.hpp"
#include "noma/montecarlo.hpp"
#include "noma/system_model.hpp"

namespace noma {

struct PowerBudget {
    double ps = 10.0;  // BS transmit power, W
    double pr = 10.0;  // relay (D1) transmit power, W
    double t = 1.0;    // transmission time, s

    void validate() const {
        if (!(ps > 0.0) || !(pr > 0.0) || !(t > 0.0))
            throw std::invalid_argument("PowerBudget: ps, pr and t must be positive");
    }
};

enum class TransmissionMode { limited, tolerant };

inline std::string_view to_string(TransmissionMode m) { return m == TransmissionMode::limited ? "limited" : "tolerant"; }

/// (1 - P_D1) R1 + (1 - P_D2) R2. The half-duplex direct-link D2 outage has
/// no analytic form here and is estimated by Monte Carlo with `mc`.
inline RateResult throughput_delay_limited(const SystemConfig& cfg, double rho, const McControl& mc = {}) {
    cfg.validate();
    const double p1 = outage_d1(cfg, rho).probability;
    double p2 = 1.0;
    RateMethod method = RateMethod::closed_form;
    double error = 0.0;
    if (!cfg.direct_link) {
        p2 = outage_d2_nodir(cfg, rho).probability;
    } else if (cfg.is_full_duplex()) {
        p2 = outage_d2_dir_fd(cfg, rho).probability;
    } else {
        const McEstimate est = estimate_outage(cfg, rho, OutageKind::d2_dir_hd, mc);
        p2 = est.mean;
        method = RateMethod::monte_carlo;
        error = cfg.r2 * est.std_error;
    }
    return {(1.0 - p1) * cfg.r1 + (1.0 - p2) * cfg.r2, method, error};
}

/// Sum of the D1 and D2 ergodic rates for the configured scenario.
inline RateResult throughput_delay_tolerant(const SystemConfig& cfg, double rho, const McControl& mc = {},
                                            const QuadratureControl& ctl = {}) {
    cfg.validate();
    const RateResult d1 = rate_d1(cfg, rho);
    const RateResult d2 = cfg.direct_link ? rate_d2_dir(cfg, rho, mc, ctl) : rate_d2_nodir(cfg, rho, ctl);
    return {d1.rate + d2.rate, d2.method, d1.error_bound + d2.error_bound};
}

/// Bits per joule from a throughput figure. Half duplex doubles the rate in
/// the numerator, as in the two-slot normalization of the EE definition.
inline double energy_efficiency_from_throughput(double throughput, Duplex duplex, const PowerBudget& budget) {
    budget.validate();
    const double factor = duplex == Duplex::full ? 1.0 : 2.0;
    return factor * throughput / (budget.t * budget.ps + budget.t * budget.pr);
}

inline double energy_efficiency(const SystemConfig& cfg, double rho, const PowerBudget& budget, TransmissionMode mode,
                                const McControl& mc = {}, const QuadratureControl& ctl = {}) {
    const RateResult r = mode == TransmissionMode::limited ? throughput_delay_limited(cfg, rho, mc)
                                                           : throughput_delay_tolerant(cfg, rho, mc, ctl);
    return energy_efficiency_from_throughput(r.rate, cfg.duplex, budget);
}

}  // namespace noma
