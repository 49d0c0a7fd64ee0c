#include "noma_ec/channel_model.hpp"

#include "noma_ec/errors.hpp"
#include "noma_ec/quadrature.hpp"
#include "noma_ec/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace noma_ec::channel {

namespace {

void check_rank(int m, int big_m)
{
    if (big_m < 1 || m < 1 || m > big_m) {
        throw domain_error("order statistic requires 1 <= m <= M");
    }
}

void check_gain(double x)
{
    if (std::isnan(x) || x < 0.0) {
        throw domain_error("gain must be >= 0");
    }
}

// ln of (1 - e^{-x}) / x, which tends to 0 as x -> 0.
double log_one_minus_exp_over_x(double x)
{
    if (x < 1e-300) {
        return 0.0;
    }
    return std::log(-std::expm1(-x) / x);
}

} // namespace

PdfCdf marginal_pdf_cdf(double x)
{
    check_gain(x);
    return {std::exp(-x), -std::expm1(-x)};
}

double ordered_pdf(int m, int big_m, double x)
{
    check_rank(m, big_m);
    check_gain(x);
    const double psi = special::order_coefficient(m, big_m);
    double log_tail = -(big_m - m + 1.0) * x;
    if (m > 1) {
        if (x == 0.0) {
            return 0.0;
        }
        log_tail += (m - 1.0) * std::log(-std::expm1(-x));
    }
    return psi * std::exp(log_tail);
}

double joint_pdf_two(double x1, double x2)
{
    if (std::isnan(x1) || std::isnan(x2)) {
        throw domain_error("joint_pdf_two: NaN argument");
    }
    if (x1 < 0.0 || x2 < x1) {
        return 0.0;
    }
    return 2.0 * std::exp(-x1 - x2);
}

double joint_ordered_pdf(int a, int b, int big_m, double x, double y)
{
    check_rank(a, big_m);
    check_rank(b, big_m);
    if (a >= b) {
        throw domain_error("joint_ordered_pdf: requires a < b");
    }
    if (x < 0.0 || y < x) {
        return 0.0;
    }
    const double log_coeff = std::lgamma(big_m + 1.0) - std::lgamma(static_cast<double>(a)) -
                             std::lgamma(static_cast<double>(b - a)) - std::lgamma(big_m - b + 1.0);
    const double fx = -std::expm1(-x);
    const double between = std::exp(-x) - std::exp(-y);
    if ((a > 1 && fx == 0.0) || (b - a > 1 && between <= 0.0)) {
        return 0.0;
    }
    double log_density = log_coeff - x - y - (big_m - b) * y;
    if (a > 1) {
        log_density += (a - 1.0) * std::log(fx);
    }
    if (b - a > 1) {
        log_density += (b - a - 1.0) * std::log(between);
    }
    return std::exp(log_density);
}

double ordered_moment(int m, int big_m, double power)
{
    check_rank(m, big_m);
    if (std::isnan(power)) {
        throw domain_error("ordered_moment: power is NaN");
    }
    if (!(power > -m)) {
        throw domain_error("ordered_moment: E[x^p] diverges for p <= -m (m = " + std::to_string(m) +
                           ")");
    }

    const double log_psi = std::log(special::order_coefficient(m, big_m));
    const double rate = big_m - m + 1.0;
    quad::Options opt;
    opt.rel_tol = 1e-12;

    quad::Result r;
    if (power >= 0.0) {
        auto integrand = [&](double x) {
            if (x == 0.0) {
                return 0.0;
            }
            double log_f = log_psi - rate * x + power * std::log(x);
            if (m > 1) {
                log_f += (m - 1.0) * std::log(-std::expm1(-x));
            }
            return std::exp(log_f);
        };
        r = quad::integrate_to_infinity(integrand, 0.0, 1.0 / rate, opt);
    } else {
        // x = y^q with q = 1 / (p + m) absorbs the x^{p+m-1} behaviour at 0.
        const double q = 1.0 / (power + m);
        auto integrand = [&](double y) {
            const double x = std::pow(y, q);
            double log_f = log_psi - rate * x + std::log(q);
            if (m > 1) {
                log_f += (m - 1.0) * log_one_minus_exp_over_x(x);
            }
            return std::exp(log_f);
        };
        r = quad::integrate_to_infinity(integrand, 0.0, std::pow(1.0 / rate, 1.0 / q), opt);
    }
    quad::require_converged(r, "ordered_moment");
    return r.value;
}

OrderedGainSample::OrderedGainSample(std::vector<double> gains) : gains_(std::move(gains))
{
    if (gains_.empty()) {
        throw domain_error("OrderedGainSample: empty");
    }
    for (double g : gains_) {
        check_gain(g);
    }
    if (!std::is_sorted(gains_.begin(), gains_.end())) {
        throw domain_error("OrderedGainSample: gains must be sorted ascending");
    }
}

double OrderedGainSample::rank(int m) const
{
    if (m < 1 || static_cast<std::size_t>(m) > gains_.size()) {
        throw index_error("OrderedGainSample: rank out of range");
    }
    return gains_[static_cast<std::size_t>(m - 1)];
}

GainBatch::GainBatch(int users, std::uint64_t seed, std::vector<double> data)
    : users_(users), seed_(seed), data_(std::move(data))
{
    if (users_ < 1) {
        throw domain_error("GainBatch: M must be >= 1");
    }
    if (data_.size() % static_cast<std::size_t>(users_) != 0) {
        throw domain_error("GainBatch: data length not a multiple of M");
    }
}

OrderedGainSample GainBatch::sample(std::size_t i) const
{
    auto r = row(i);
    return OrderedGainSample({r.begin(), r.end()});
}

GainBatch GainBatch::constant(std::span<const double> gains, std::size_t count)
{
    OrderedGainSample checked({gains.begin(), gains.end()});
    std::vector<double> data;
    data.reserve(count * gains.size());
    for (std::size_t i = 0; i < count; ++i) {
        data.insert(data.end(), gains.begin(), gains.end());
    }
    return GainBatch(static_cast<int>(gains.size()), 0, std::move(data));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace detail {

void fill_chunk(int big_m, std::uint64_t seed, std::size_t chunk, std::size_t rows, double* out)
{
    constexpr double two_pow_minus_53 = 1.0 / 9007199254740992.0;
    const auto m = static_cast<std::size_t>(big_m);
    std::mt19937_64 engine(derive_seed(seed, chunk));
    for (std::size_t i = 0; i < rows; ++i) {
        double* row = out + i * m;
        for (std::size_t k = 0; k < m; ++k) {
            const double u = static_cast<double>(engine() >> 11) * two_pow_minus_53;
            row[k] = -std::log1p(-u);
        }
        std::sort(row, row + m);
    }
}

} // namespace detail

GainBatch sample_ordered(int big_m, std::size_t count, std::uint64_t seed)
{
    if (big_m < 1) {
        throw domain_error("sample_ordered: M must be >= 1");
    }
    if (count < 1) {
        throw domain_error("sample_ordered: count must be >= 1");
    }
    const auto m = static_cast<std::size_t>(big_m);
    std::vector<double> data(count * m);
    for (std::size_t chunk = 0; chunk * sampling_chunk < count; ++chunk) {
        const std::size_t begin = chunk * sampling_chunk;
        const std::size_t rows = std::min(sampling_chunk, count - begin);
        detail::fill_chunk(big_m, seed, chunk, rows, data.data() + begin * m);
    }
    return GainBatch(big_m, seed, std::move(data));
}

} // namespace noma_ec::channel
