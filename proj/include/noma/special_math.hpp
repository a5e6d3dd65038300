#pragma once

// Exponential integral, Gauss-Chebyshev nodes and adaptive quadrature used by
// the closed-form outage and ergodic-rate expressions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace noma {

/// Raised when a series or adaptive rule stops before reaching its tolerance.
/// Carries the best available estimate so callers can decide what to do.
class accuracy_error : public std::runtime_error {
public:
    accuracy_error(const std::string& what, double estimate, double error_bound, int terms = 0)
        : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound), terms_(terms) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }
    int terms() const noexcept { return terms_; }

private:
    double estimate_;
    double error_bound_;
    int terms_;
};

/// An integrand returned a non-finite value.
class evaluation_error : public std::runtime_error {
public:
    evaluation_error(const std::string& what, double abscissa)
        : std::runtime_error(what), abscissa_(abscissa) {}

    double abscissa() const noexcept { return abscissa_; }

private:
    double abscissa_;
};

/// Truncation policy for the outer series of the direct-link outage expression.
struct SeriesControl {
    int max_outer_terms = 60;
    double rel_tail_tol = 1e-12;

    void validate() const {
        if (max_outer_terms < 1)
            throw std::invalid_argument("SeriesControl: max_outer_terms must be >= 1");
        if (!(rel_tail_tol > 0.0 && rel_tail_tol < 1.0))
            throw std::invalid_argument("SeriesControl: rel_tail_tol must lie in (0, 1)");
    }
};

struct QuadratureControl {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 2000;
    int gc_points = 100;  // Gauss-Chebyshev order

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw std::invalid_argument("QuadratureControl: tolerances must be strictly positive");
        if (max_subdivisions < 1)
            throw std::invalid_argument("QuadratureControl: max_subdivisions must be >= 1");
        if (gc_points < 1)
            throw std::invalid_argument("QuadratureControl: gc_points must be >= 1");
    }
};

namespace detail {

inline constexpr double euler_gamma = std::numbers::egamma;

// Below this magnitude the negative-axis power series is used; the alternating
// terms cancel badly further out, so the continued fraction takes over.
inline constexpr double e1_series_limit = 1.0;
// Above this the positive-axis asymptotic expansion is accurate to ~1e-16.
inline constexpr double ei_asymptotic_limit = 40.0;

// gamma + ln|x| + sum_{k>=1} x^k / (k k!)
inline double ei_power_series(double x) {
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= x / k;
        const double add = term / k;
        sum += add;
        if (std::abs(add) <= 1e-17 * std::abs(sum))
            break;
    }
    return euler_gamma + std::log(std::abs(x)) + sum;
}

// e^z E1(z) for z > 0.
inline double e1_scaled(double z) {
    if (z <= e1_series_limit)
        return -std::exp(z) * ei_power_series(-z);

    // Modified Lentz evaluation of the continued fraction for E1.
    constexpr double tiny = 1e-300;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double b = z + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) <= eps)
            break;
    }
    return h;
}

// e^{-x} Ei(x) for x > 0.
inline double ei_positive_scaled(double x) {
    if (x <= ei_asymptotic_limit)
        return std::exp(-x) * ei_power_series(x);
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double next = term * k / x;
        if (next >= term)
            break;
        term = next;
        sum += term;
        if (term <= 1e-17 * sum)
            break;
    }
    return sum / x;
}

// e^{-x} Ei(x) for any x != 0.
inline double ei_scaled_by_exp(double x) {
    return x < 0.0 ? -e1_scaled(-x) : ei_positive_scaled(x);
}

}  // namespace detail

/// Exponential integral Ei(x) = -PV int_{-x}^inf e^{-t}/t dt.
///
/// Throws std::domain_error at x = 0 (logarithmic singularity) and
/// std::overflow_error when the result is not representable; use
/// expint_ei_scaled() for products with large exponentials.
inline double expint_ei(double x) {
    if (x == 0.0 || std::isnan(x))
        throw std::domain_error("expint_ei: argument must be nonzero and finite");
    if (x < 0.0) {
        const double z = -x;
        if (z <= detail::e1_series_limit)
            return detail::ei_power_series(x);
        return -std::exp(-z) * detail::e1_scaled(z);
    }
    if (x <= detail::ei_asymptotic_limit)
        return detail::ei_power_series(x);
    const double scaled = detail::ei_positive_scaled(x);
    const double log_value = x + std::log(scaled);
    if (!(log_value < std::log(std::numeric_limits<double>::max())))
        throw std::overflow_error(
            fmt::format("expint_ei({}) overflows; use expint_ei_scaled for e^a*Ei(x) products", x));
    return std::exp(log_value);
}

/// e^a * Ei(x), evaluated without forming e^a or Ei(x) separately.
inline double expint_ei_scaled(double a, double x) {
    if (x == 0.0 || std::isnan(x) || std::isnan(a))
        throw std::domain_error("expint_ei_scaled: x must be nonzero and arguments finite");
    const double result = std::exp(a + x) * detail::ei_scaled_by_exp(x);
    if (!std::isfinite(result))
        throw std::overflow_error(fmt::format("expint_ei_scaled({}, {}) overflows", a, x));
    return result;
}

struct ChebyshevNode {
    double node;           // s_n = cos((2n-1)pi/(2N))
    double weight_factor;  // sqrt(1 - s_n^2)
};

/// First-kind Chebyshev nodes in descending order. Computed through sines of
/// the complementary angle so the set is exactly antisymmetric.
inline std::vector<ChebyshevNode> gauss_chebyshev_nodes(int n) {
    if (n < 1)
        throw std::invalid_argument("gauss_chebyshev_nodes: N must be >= 1");
    std::vector<ChebyshevNode> nodes;
    nodes.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        const double angle = static_cast<double>(n - 2 * i + 1) * std::numbers::pi / (2.0 * n);
        nodes.push_back({std::sin(angle), std::cos(angle)});
    }
    return nodes;
}

/// int_a^b f(x) dx ~ (b-a)/2 * pi/N * sum f(x_n) sqrt(1 - s_n^2).
template <class F>
double gauss_chebyshev_integrate(F&& f, double a, double b, int n) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (const auto& [s, w] : gauss_chebyshev_nodes(n))
        sum += f(mid + half * s) * w;
    return half * std::numbers::pi / n * sum;
}

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int subdivisions = 0;
    bool converged = false;

    /// The value, or accuracy_error carrying the best estimate.
    double value_or_throw(const char* context) const {
        if (!converged)
            throw accuracy_error(
                fmt::format("{}: quadrature tolerance not reached (estimate {}, error bound {})",
                            context, value, error_estimate),
                value, error_estimate, subdivisions);
        return value;
    }
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule.
inline constexpr double gk15_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double gk15_kronrod_weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gk15_gauss_weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
double checked_eval(F& f, double x) {
    const double y = f(x);
    if (!std::isfinite(y))
        throw evaluation_error(fmt::format("integrand is not finite at x = {}", x), x);
    return y;
}

template <class F>
Segment gk15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = checked_eval(f, center);
    double kronrod = fc * gk15_kronrod_weights[7];
    double gauss = fc * gk15_gauss_weights[3];
    double abs_sum = std::abs(kronrod);
    double fv1[7];
    double fv2[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * gk15_nodes[j];
        fv1[j] = checked_eval(f, center - dx);
        fv2[j] = checked_eval(f, center + dx);
        kronrod += gk15_kronrod_weights[j] * (fv1[j] + fv2[j]);
        abs_sum += gk15_kronrod_weights[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
        if (j % 2 == 1)
            gauss += gk15_gauss_weights[j / 2] * (fv1[j] + fv2[j]);
    }
    const double mean = 0.5 * kronrod;
    double asc = gk15_kronrod_weights[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        asc += gk15_kronrod_weights[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));

    const double scale = std::abs(half);
    const double result = kronrod * half;
    asc *= scale;
    abs_sum *= scale;
    double err = std::abs((kronrod - gauss) * half);
    // QUADPACK error heuristic
    if (asc != 0.0 && err != 0.0)
        err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(50.0 * eps * abs_sum, err);
    return {a, b, result, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration over [a, b]. The rule
/// never samples the endpoints, so integrable endpoint singularities are fine.
template <class F>
QuadratureResult integrate_finite(F&& f, double a, double b, const QuadratureControl& ctl = {}) {
    ctl.validate();
    if (a == b)
        return {0.0, 0.0, 0, true};
    std::priority_queue<detail::Segment> heap;
    heap.push(detail::gk15(f, a, b));
    double total = heap.top().value;
    double total_err = heap.top().error;
    int subdivisions = 1;
    while (total_err > std::max(ctl.abs_tol, ctl.rel_tol * std::abs(total)) &&
           subdivisions < ctl.max_subdivisions) {
        const detail::Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= std::min(worst.a, worst.b) || mid >= std::max(worst.a, worst.b)) {
            heap.push(worst);
            break;  // interval can no longer be split in double precision
        }
        const detail::Segment left = detail::gk15(f, worst.a, mid);
        const detail::Segment right = detail::gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++subdivisions;
    }
    // Resum from the segments so the reported value carries no drift from the
    // running updates.
    double value = 0.0;
    double err = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    const bool ok = err <= std::max(ctl.abs_tol, ctl.rel_tol * std::abs(value));
    return {value, err, subdivisions, ok};
}

/// int_a^inf f(x) dx through the map x = a + t/(1-t) onto (0, 1).
template <class F>
QuadratureResult integrate_semi_infinite(F&& f, double a, const QuadratureControl& ctl = {}) {
    auto mapped = [&f, a](double t) {
        const double one_minus = 1.0 - t;
        const double x = a + t / one_minus;
        const double y = f(x);
        if (!std::isfinite(y))
            throw evaluation_error(fmt::format("integrand is not finite at x = {}", x), x);
        return y == 0.0 ? 0.0 : y / (one_minus * one_minus);
    };
    return integrate_finite(mapped, 0.0, 1.0, ctl);
}

}  // namespace noma
