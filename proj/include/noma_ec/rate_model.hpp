#ifndef NOMA_EC_RATE_MODEL_HPP
#define NOMA_EC_RATE_MODEL_HPP

// Instantaneous achievable rates (b/s/Hz) for uplink NOMA with SIC, TDMA-style
// OMA, and NOMA pairs time-shared across groups.

#include "noma_ec/channel_model.hpp"

#include <span>
#include <vector>

namespace noma_ec {

/// Transmit SNR rho = 1/sigma^2, held linear.
class TransmitSnr {
public:
    static TransmitSnr from_db(double db);
    /// rho = 0 is accepted as the no-signal limit.
    static TransmitSnr from_linear(double linear);

    double linear() const { return linear_; }
    double db() const;

private:
    explicit TransmitSnr(double linear) : linear_(linear) {}
    double linear_;
};

/// Per-user power fractions P_1..P_M, ordered weak to strong, summing to 1.
class PowerAllocation {
public:
    explicit PowerAllocation(std::vector<double> fractions);
    /// Two-user allocation (P1, 1 - P1).
    static PowerAllocation two_user(double p1);

    std::span<const double> fractions() const { return fractions_; }
    std::size_t size() const { return fractions_.size(); }
    double operator[](std::size_t i) const { return fractions_[i]; }
    /// 1-based user index.
    double user(int m) const;

private:
    std::vector<double> fractions_;
};

namespace rate {

enum class PairRole { weak, strong };

/// SINR of user m under SIC (strongest decoded first): interference from l < m only.
double sinr_noma(int m, std::span<const double> gains, const PowerAllocation& p, TransmitSnr rho);

/// log2(1 + rho P_m x_m / (1 + rho sum_{l<m} P_l x_l)).
double rate_noma(int m, const channel::OrderedGainSample& gains, const PowerAllocation& p,
                 TransmitSnr rho);

/// (1/M) log2(1 + rho x_m), full power in a 1/M time slot.
double rate_oma(int m, const channel::OrderedGainSample& gains, TransmitSnr rho, int big_m);

/// Rate of one member of a NOMA pair that owns 2/M of the frame.
double rate_pair(PairRole role, const channel::OrderedGainSample& pair_gains,
                 const PowerAllocation& p, TransmitSnr rho, int total_users);

/// Per-user TDMA rate when each of M users owns one slot: (1/M) log2(1 + rho x).
double rate_pair_oma(double gain, TransmitSnr rho, int total_users);

} // namespace rate
} // namespace noma_ec

#endif
