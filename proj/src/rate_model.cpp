#include "noma_ec/rate_model.hpp"

#include "noma_ec/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace noma_ec {

TransmitSnr TransmitSnr::from_db(double db)
{
    if (std::isnan(db) || db == std::numeric_limits<double>::infinity()) {
        throw domain_error("TransmitSnr: dB value must be finite or -inf");
    }
    return TransmitSnr(std::pow(10.0, db / 10.0));
}

TransmitSnr TransmitSnr::from_linear(double linear)
{
    if (!(linear >= 0.0) || !std::isfinite(linear)) {
        throw domain_error("TransmitSnr: linear SNR must be finite and >= 0");
    }
    return TransmitSnr(linear);
}

double TransmitSnr::db() const
{
    return 10.0 * std::log10(linear_);
}

PowerAllocation::PowerAllocation(std::vector<double> fractions) : fractions_(std::move(fractions))
{
    if (fractions_.size() < 2) {
        throw domain_error("PowerAllocation: needs at least two users");
    }
    double sum = 0.0;
    for (double f : fractions_) {
        if (!(f > 0.0 && f < 1.0)) {
            throw domain_error("PowerAllocation: each fraction must lie in (0, 1)");
        }
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw domain_error("PowerAllocation: fractions must sum to 1");
    }
}

PowerAllocation PowerAllocation::two_user(double p1)
{
    return PowerAllocation({p1, 1.0 - p1});
}

double PowerAllocation::user(int m) const
{
    if (m < 1 || static_cast<std::size_t>(m) > fractions_.size()) {
        throw index_error("PowerAllocation: user index out of range");
    }
    return fractions_[static_cast<std::size_t>(m - 1)];
}

namespace rate {

namespace {

constexpr double inv_ln2 = 1.0 / std::numbers::ln2;

void check_index(int m, std::size_t size)
{
    if (m < 1 || static_cast<std::size_t>(m) > size) {
        throw index_error("user index " + std::to_string(m) + " out of range 1.." +
                          std::to_string(size));
    }
}

void check_total(int total_users)
{
    if (total_users < 2 || total_users % 2 != 0) {
        throw domain_error("pair rates need an even total user count >= 2");
    }
}

} // namespace

double sinr_noma(int m, std::span<const double> gains, const PowerAllocation& p, TransmitSnr rho)
{
    check_index(m, gains.size());
    if (p.size() != gains.size()) {
        throw domain_error("rate_noma: power allocation and gain vector sizes differ");
    }
    const double r = rho.linear();
    double interference = 0.0;
    for (int l = 1; l < m; ++l) {
        interference += p.user(l) * gains[static_cast<std::size_t>(l - 1)];
    }
    return r * p.user(m) * gains[static_cast<std::size_t>(m - 1)] / (1.0 + r * interference);
}

double rate_noma(int m, const channel::OrderedGainSample& gains, const PowerAllocation& p,
                 TransmitSnr rho)
{
    return std::log1p(sinr_noma(m, gains.gains(), p, rho)) * inv_ln2;
}

double rate_oma(int m, const channel::OrderedGainSample& gains, TransmitSnr rho, int big_m)
{
    if (big_m < 1) {
        throw domain_error("rate_oma: M must be >= 1");
    }
    check_index(m, gains.size());
    return std::log1p(rho.linear() * gains.rank(m)) * inv_ln2 / big_m;
}

double rate_pair(PairRole role, const channel::OrderedGainSample& pair_gains,
                 const PowerAllocation& p, TransmitSnr rho, int total_users)
{
    check_total(total_users);
    if (pair_gains.size() != 2 || p.size() != 2) {
        throw domain_error("rate_pair: a pair has exactly two users");
    }
    const int m = role == PairRole::weak ? 1 : 2;
    return 2.0 / total_users * std::log1p(sinr_noma(m, pair_gains.gains(), p, rho)) * inv_ln2;
}

double rate_pair_oma(double gain, TransmitSnr rho, int total_users)
{
    check_total(total_users);
    if (std::isnan(gain) || gain < 0.0) {
        throw domain_error("rate_pair_oma: gain must be >= 0");
    }
    return std::log1p(rho.linear() * gain) * inv_ln2 / total_users;
}

} // namespace rate
} // namespace noma_ec
