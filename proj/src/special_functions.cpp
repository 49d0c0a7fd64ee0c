#include "noma_ec/special_functions.hpp"

#include "noma_ec/errors.hpp"
#include "noma_ec/quadrature.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace noma_ec::special {

namespace {

constexpr double inner_rel_tol = 1e-13;

quad::Options tight()
{
    quad::Options opt;
    opt.rel_tol = inner_rel_tol;
    opt.max_intervals = 6000;
    return opt;
}

void check_arg(double v, const char* name)
{
    if (std::isnan(v)) {
        throw domain_error(std::string(name) + " is NaN");
    }
}

} // namespace

Evaluation hyp_u_checked(double a, double b, double z)
{
    check_arg(a, "a");
    check_arg(b, "b");
    check_arg(z, "z");
    if (!(a > 0.0)) {
        throw domain_error("hyp_u: requires a > 0");
    }
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw domain_error("hyp_u: requires finite z > 0");
    }

    // t = s / z puts the exponential on unit scale for every z.
    const double power = b - a - 1.0;
    auto integrand = [&](double s) {
        double log_f = -s + power * std::log1p(s / z);
        if (a != 1.0) {
            log_f += (a - 1.0) * std::log(s);
        }
        return std::exp(log_f);
    };
    const double scale = power < 0.0 ? std::min(1.0, z / -power) : 1.0;
    const auto r = quad::integrate_to_infinity(integrand, 0.0, scale, tight());

    const double factor = std::exp(-a * std::log(z) - std::lgamma(a));
    Evaluation out;
    out.value = factor * r.value;
    out.abs_error = factor * r.abs_error;
    out.within_tolerance = std::isfinite(out.value) &&
                           out.abs_error <= target_rel_tol * std::abs(out.value);
    return out;
}

double hyp_u(double a, double b, double z)
{
    const auto e = hyp_u_checked(a, b, z);
    if (!e.within_tolerance) {
        throw convergence_error("hyp_u: quadrature missed tolerance");
    }
    return e.value;
}

Evaluation log_upper_gamma_checked(double s, double x)
{
    check_arg(s, "s");
    check_arg(x, "x");
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw domain_error("upper_gamma: requires finite x > 0");
    }
    if (!std::isfinite(s)) {
        throw domain_error("upper_gamma: s must be finite");
    }

    // Integrate t^{s-1} e^{-t} scaled by its maximum on [x, inf).
    const double peak = (s > 1.0) ? std::max(x, s - 1.0) : x;
    const double log_peak = (s - 1.0) * std::log(peak) - peak;
    auto integrand = [&](double t) { return std::exp((s - 1.0) * std::log(t) - t - log_peak); };

    double total = 0.0;
    double err = 0.0;
    auto add = [&](const quad::Result& r) {
        total += r.value;
        err += r.abs_error;
    };

    if (peak > x) {
        const double width = std::max(1.0, std::sqrt(s - 1.0));
        const double near = std::max(x, peak - 20.0 * width);
        if (near > x) {
            add(quad::integrate(integrand, x, near, tight()));
        }
        add(quad::integrate(integrand, near, peak, tight()));
        add(quad::integrate_to_infinity(integrand, peak, width, tight()));
    } else {
        // Log-slope of the integrand at x; flat when s - 1 is close to x.
        const double decay_rate = 1.0 + (1.0 - s) / x;
        const double width = std::max(1.0, std::sqrt(std::max(s - 1.0, 0.0)));
        const double scale = decay_rate > 1.0 / width ? 1.0 / decay_rate : width;
        add(quad::integrate_to_infinity(integrand, x, scale, tight()));
    }

    Evaluation out;
    out.value = log_peak + std::log(total);
    out.abs_error = total > 0.0 ? err / total : std::numeric_limits<double>::infinity();
    out.within_tolerance = std::isfinite(out.value) && out.abs_error <= target_rel_tol;
    return out;
}

double log_upper_gamma(double s, double x)
{
    const auto e = log_upper_gamma_checked(s, x);
    if (!e.within_tolerance) {
        throw convergence_error("upper_gamma: quadrature missed tolerance");
    }
    return e.value;
}

double upper_gamma(double s, double x)
{
    return std::exp(log_upper_gamma(s, x));
}

double whittaker_w_reduced(double u, double z)
{
    check_arg(u, "u");
    check_arg(z, "z");
    if (!(z > 0.0)) {
        throw domain_error("whittaker_w_reduced: requires z > 0");
    }
    return std::exp(0.5 * z + (0.5 - u) * std::log(z) + log_upper_gamma(2.0 * u, z));
}

double order_coefficient(int m, int big_m)
{
    if (m < 1 || m > big_m) {
        throw domain_error("order_coefficient: requires 1 <= m <= M");
    }
    // M * C(M-1, m-1); exact in integers while C(M-1, k) * (M-1) fits.
    if (big_m <= 60) {
        const std::uint64_t n = static_cast<std::uint64_t>(big_m - 1);
        const std::uint64_t k = static_cast<std::uint64_t>(std::min(m - 1, big_m - m));
        std::uint64_t c = 1;
        for (std::uint64_t i = 0; i < k; ++i) {
            c = c * (n - i) / (i + 1);
        }
        return static_cast<double>(big_m) * static_cast<double>(c);
    }
    return std::exp(std::lgamma(big_m + 1.0) - std::lgamma(static_cast<double>(m)) -
                    std::lgamma(big_m - m + 1.0));
}

namespace {

struct SignedLog {
    double log_abs;
    int sign;
};

// Gamma(1+A+b, c) - c^{1+b} Gamma(A, c), in sign/log form.
SignedLog moment_difference(double b, double big_a, double c)
{
    const double first = log_upper_gamma(1.0 + big_a + b, c);
    const double second = (1.0 + b) * std::log(c) + log_upper_gamma(big_a, c);
    if (first >= second) {
        return {first + std::log(-std::expm1(second - first)), 1};
    }
    return {second + std::log(-std::expm1(first - second)), -1};
}

void check_moment_args(double b, double big_a, double c)
{
    check_arg(b, "b");
    check_arg(big_a, "A");
    check_arg(c, "c");
    if (b == -1.0) {
        throw domain_error("gamma_moment_integral: singular at b = -1");
    }
    if (!(c > 0.0)) {
        throw domain_error("gamma_moment_integral: requires c > 0");
    }
}

} // namespace

double gamma_moment_integral(double b, double big_a, double c)
{
    check_moment_args(b, big_a, c);
    const auto d = moment_difference(b, big_a, c);
    return d.sign * std::exp(d.log_abs) / (1.0 + b);
}

double log_gamma_moment_integral(double b, double big_a, double c)
{
    check_moment_args(b, big_a, c);
    const auto d = moment_difference(b, big_a, c);
    const int expected_sign = (1.0 + b) > 0.0 ? 1 : -1;
    if (d.sign != expected_sign) {
        return -std::numeric_limits<double>::infinity();
    }
    return d.log_abs - std::log(std::abs(1.0 + b));
}

} // namespace noma_ec::special
