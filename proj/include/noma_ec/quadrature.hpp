#ifndef NOMA_EC_QUADRATURE_HPP
#define NOMA_EC_QUADRATURE_HPP

// Globally adaptive Gauss-Kronrod (7/15) integration, QUADPACK-style error
// heuristic. Semi-infinite ranges are mapped onto [0, 1) with
// x = a + scale * t / (1 - t).

#include "noma_ec/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

namespace noma_ec::quad {

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct Options {
    double abs_tol = 0.0;
    double rel_tol = 1e-12;
    int max_intervals = 4000;
};

namespace detail {

inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for kronrod_nodes[1], [3], [5], [7].
inline constexpr std::array<double, 4> gauss_weights = {
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
Segment apply_rule(F& f, double a, double b, int& evaluations)
{
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    std::array<double, 7> f1{};
    std::array<double, 7> f2{};
    const double fc = f(center);
    double kronrod = fc * kronrod_weights[7];
    double gauss = fc * gauss_weights[3];
    double abs_sum = std::abs(kronrod);
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kronrod_nodes[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double pair = f1[j] + f2[j];
        kronrod += kronrod_weights[j] * pair;
        abs_sum += kronrod_weights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) {
            gauss += gauss_weights[j / 2] * pair;
        }
    }
    evaluations += 15;

    const double mean = 0.5 * kronrod;
    double asc = kronrod_weights[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) {
        asc += kronrod_weights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    }

    const double value = kronrod * half;
    double error = std::abs((kronrod - gauss) * half);
    const double res_asc = asc * std::abs(half);
    const double res_abs = abs_sum * std::abs(half);
    if (res_asc != 0.0 && error != 0.0) {
        error = res_asc * std::min(1.0, std::pow(200.0 * error / res_asc, 1.5));
    }
    if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        error = std::max(50.0 * eps * res_abs, error);
    }
    if (!std::isfinite(value) || !std::isfinite(error)) {
        return {a, b, value, std::numeric_limits<double>::infinity()};
    }
    return {a, b, value, error};
}

} // namespace detail

/// Integrates f over the finite interval [a, b].
template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {})
{
    constexpr double eps = std::numeric_limits<double>::epsilon();
    Result out;
    if (a == b) {
        out.converged = true;
        return out;
    }

    std::priority_queue<detail::Segment> heap;
    auto first = detail::apply_rule(f, a, b, out.evaluations);
    double total = first.value;
    double total_error = first.error;
    heap.push(first);

    // Segments too narrow to split further; their error is frozen.
    double frozen_error = 0.0;
    int intervals = 1;
    auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };

    while (total_error > tolerance() && intervals < opt.max_intervals && !heap.empty()) {
        auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (std::abs(worst.b - worst.a) <= 100.0 * eps * std::max(std::abs(mid), 1e-300)) {
            frozen_error += worst.error;
            continue;
        }
        auto left = detail::apply_rule(f, worst.a, mid, out.evaluations);
        auto right = detail::apply_rule(f, mid, worst.b, out.evaluations);
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }

    // Re-sum from the segment list so the running update's roundoff is discarded.
    double sum = 0.0;
    double comp = 0.0;
    double err = frozen_error;
    while (!heap.empty()) {
        const auto& s = heap.top();
        const double y = s.value - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        err += s.error;
        heap.pop();
    }
    out.value = sum;
    out.abs_error = err;
    out.converged = std::isfinite(sum) && err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(sum));
    return out;
}

/// Integrates f over [a, inf) via x = a + scale * t / (1 - t).
template <class F>
Result integrate_to_infinity(F&& f, double a, double scale, const Options& opt = {})
{
    auto mapped = [&](double t) {
        const double one_minus = 1.0 - t;
        const double x = a + scale * t / one_minus;
        const double jac = scale / (one_minus * one_minus);
        if (!std::isfinite(x)) {
            return 0.0;
        }
        const double fx = f(x);
        return fx == 0.0 ? 0.0 : fx * jac;
    };
    return integrate(mapped, 0.0, 1.0, opt);
}

/// Throws convergence_error when a result missed its tolerance.
inline const Result& require_converged(const Result& r, const std::string& what)
{
    if (!r.converged) {
        throw convergence_error(what + ": quadrature did not converge (estimated error " +
                                std::to_string(r.abs_error) + ")");
    }
    return r;
}

} // namespace noma_ec::quad

#endif
