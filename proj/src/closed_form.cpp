#include "noma_ec/closed_form.hpp"

#include "noma_ec/errors.hpp"
#include "noma_ec/quadrature.hpp"
#include "noma_ec/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace noma_ec::closed {

namespace {

constexpr double ln2 = std::numbers::ln2;
constexpr double series_rel_tol = 1e-10;
constexpr double error_budget = 1e-6;

void check_beta(double beta)
{
    if (std::isnan(beta) || !(beta < 0.0)) {
        throw domain_error("closed form: beta must be < 0");
    }
}

void check_rho(TransmitSnr rho)
{
    if (!(rho.linear() > 0.0)) {
        throw domain_error("closed form: requires rho > 0");
    }
}

double log_binomial(int n, int k)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

} // namespace

ClosedFormResult ec1_noma_closed(double p1, double beta1, TransmitSnr rho)
{
    check_beta(beta1);
    check_rho(rho);
    if (!(p1 > 0.0 && p1 < 1.0)) {
        throw domain_error("ec1_noma_closed: P1 must lie in (0, 1)");
    }
    const double z = 2.0 / (rho.linear() * p1);
    const auto u = special::hyp_u_checked(1.0, 2.0 + beta1, z);
    const double moment = z * u.value;

    ClosedFormResult out;
    out.value = std::log(moment) / (beta1 * ln2);
    out.terms_used = 1;
    out.rel_error = u.abs_error / u.value;
    out.converged = u.within_tolerance;
    if (!out.converged) {
        out.note = "U(1,b,z) quadrature missed tolerance";
    }
    return out;
}

ClosedFormResult ec2_noma_closed(const PowerAllocation& p, double beta2, TransmitSnr rho, int k_max)
{
    check_beta(beta2);
    check_rho(rho);
    if (p.size() != 2) {
        throw domain_error("ec2_noma_closed: two-user allocation required");
    }
    if (beta2 != std::floor(beta2)) {
        throw unsupported_mode("ec2_noma_closed: the binomial expansion needs an integer beta2; "
                               "use ec::ec2_quadrature for non-integer exponents");
    }
    if (k_max < 1) {
        throw domain_error("ec2_noma_closed: k_max must be >= 1");
    }

    const double r = rho.linear();
    const double p1 = p[0];
    const double p2 = p[1];
    const int n = static_cast<int>(-beta2);
    const double c = 1.0 / (r * p2);
    const double shape = 1.0 + beta2;
    const double delta = p2 - p1;

    const double log_prefactor = std::log(2.0) + (1.0 - beta2) * std::log(p2) +
                                 beta2 * std::log(r * p2) + c - (p1 - p2) * c;

    // Per-term relative error: quadrature (~1e-12) amplified by the
    // cancellation inside Gamma(1+A+b, c) - c^{1+b} Gamma(A, c) (~c).
    const double term_rel_error = 1e-12 * (1.0 + c);

    const double log_ref = special::log_gamma_moment_integral(0.0, shape, c);
    double sum = 0.0;
    double comp = 0.0;
    double abs_sum = 0.0;
    double previous = std::numeric_limits<double>::infinity();
    bool stopped = false;
    bool lost_digits = !std::isfinite(log_ref);
    int k = 0;

    for (; k <= k_max && !lost_digits; ++k) {
        if (delta == 0.0 && k > 0) {
            // 0^0 = 1: only the k = 0 term survives.
            stopped = true;
            break;
        }
        const double log_k = (k == 0 ? 0.0 : k * std::log(std::abs(delta))) - std::lgamma(k + 1.0);
        const double sign = (delta > 0.0 && k % 2 == 1) ? -1.0 : 1.0;
        double step = 0.0;
        for (int j = 0; j <= n; ++j) {
            const double log_moment = special::log_gamma_moment_integral(j + k, shape, c);
            if (!std::isfinite(log_moment)) {
                lost_digits = true;
                break;
            }
            const double log_term =
                log_binomial(n, j) + (j == 0 ? 0.0 : j * std::log(r * p1)) + log_k + log_moment - log_ref;
            const double term = sign * std::exp(log_term);
            if (!std::isfinite(term)) {
                lost_digits = true;
                break;
            }
            step += term;
            abs_sum += std::abs(term);
        }
        const double t = sum + step;
        comp += std::abs(sum) >= std::abs(step) ? (sum - t) + step : (step - t) + sum;
        sum = t;

        const double total = sum + comp;
        if (k >= 1 && std::abs(step) <= series_rel_tol * std::abs(total) &&
            std::abs(step) <= previous) {
            stopped = true;
            ++k;
            break;
        }
        previous = std::abs(step);
    }

    const double total = sum + comp;
    ClosedFormResult out;
    out.terms_used = k;
    out.rel_error = total > 0.0 ? term_rel_error * abs_sum / total
                                : std::numeric_limits<double>::infinity();
    out.value = (log_prefactor + log_ref + std::log(total)) / (beta2 * ln2);
    out.converged = stopped && !lost_digits && total > 0.0 && out.rel_error <= error_budget;
    if (lost_digits) {
        out.note = "incomplete-gamma moments lost all significant digits";
    } else if (!stopped) {
        out.note = "series hit k_max before reaching tolerance";
    } else if (!(out.rel_error <= error_budget)) {
        out.note = "alternating series cancellation exceeds the error budget";
    }
    return out;
}

ClosedFormResult ec_oma_closed(int m, int big_m, double beta, TransmitSnr rho, OmaVariant variant)
{
    check_beta(beta);
    check_rho(rho);
    if (m < 1 || m > big_m) {
        throw index_error("ec_oma_closed: user index out of range");
    }
    const double r = rho.linear();
    const double b = variant == OmaVariant::appendix_b ? 2.0 + 2.0 / big_m * beta : 2.0 + beta / big_m;
    const double psi = special::order_coefficient(m, big_m);

    double sum = 0.0;
    double abs_sum = 0.0;
    double err = 0.0;
    bool ok = true;
    for (int k = 0; k <= m - 1; ++k) {
        const auto u = special::hyp_u_checked(1.0, b, (big_m - m + 1.0 + k) / r);
        const double coeff = std::exp(log_binomial(m - 1, k)) * (k % 2 == 0 ? 1.0 : -1.0);
        sum += coeff * u.value;
        abs_sum += std::abs(coeff * u.value);
        err += std::abs(coeff) * u.abs_error;
        ok = ok && u.within_tolerance;
    }
    const double moment = psi / r * sum;

    ClosedFormResult out;
    out.terms_used = m;
    out.rel_error = sum > 0.0 ? (err + 1e-16 * abs_sum) / sum : std::numeric_limits<double>::infinity();
    out.value = std::log(moment) / (beta * ln2);
    out.converged = ok && sum > 0.0 && out.rel_error <= error_budget;
    if (!out.converged) {
        out.note = "U(1,b,z) evaluation or alternating sum missed tolerance";
    }
    return out;
}

double ec2_high_snr_limit_quadrature(const PowerAllocation& p, double beta2)
{
    check_beta(beta2);
    if (p.size() != 2) {
        throw domain_error("ec2_high_snr_limit: two-user allocation required");
    }
    const double ratio = p[1] / p[0];
    quad::Options inner_opt;
    inner_opt.rel_tol = 1e-11;
    quad::Options outer_opt;
    outer_opt.rel_tol = 1e-10;

    bool inner_ok = true;
    auto outer = [&](double x1) {
        if (x1 == 0.0) {
            return 0.0;
        }
        auto inner = [&](double v) {
            return std::exp(beta2 * std::log1p(ratio * (x1 + v) / x1) - v);
        };
        const auto ri = quad::integrate_to_infinity(inner, 0.0, 1.0, inner_opt);
        inner_ok = inner_ok && ri.converged;
        return 2.0 * std::exp(-2.0 * x1) * ri.value;
    };
    const auto ro = quad::integrate_to_infinity(outer, 0.0, 0.5, outer_opt);
    if (!ro.converged || !inner_ok) {
        throw convergence_error("ec2_high_snr_limit: quadrature did not converge");
    }
    return std::log(ro.value) / (beta2 * ln2);
}

ec::EcEstimate ec2_high_snr_limit_mc(const PowerAllocation& p, double beta2, std::size_t samples,
                                     std::uint64_t seed)
{
    check_beta(beta2);
    if (p.size() != 2) {
        throw domain_error("ec2_high_snr_limit: two-user allocation required");
    }
    const double ratio = p[1] / p[0];
    ec::MomentAccumulator acc(beta2);
    channel::stream_ordered(2, samples, seed, [&](std::span<const double> row) {
        acc.add_log(beta2 * std::log1p(ratio * row[1] / row[0]));
    });
    return acc.finish(seed);
}

} // namespace noma_ec::closed
