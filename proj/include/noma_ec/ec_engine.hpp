#ifndef NOMA_EC_EC_ENGINE_HPP
#define NOMA_EC_EC_ENGINE_HPP

// Effective capacity E_c = (1/beta) log2 E[2^{beta R}] estimated by Monte
// Carlo over a GainBatch, or by nested quadrature for the two-user strong
// NOMA user.

#include "noma_ec/channel_model.hpp"
#include "noma_ec/rate_model.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>

namespace noma_ec::ec {

/// Normalized QoS exponent beta = -theta T_f B / ln 2 (always negative).
class DelayProfile {
public:
    static DelayProfile from_beta(double beta);
    static DelayProfile from_qos(double theta, double frame_time_s, double bandwidth_hz);

    double beta() const { return beta_; }
    std::optional<double> theta() const { return theta_; }
    std::optional<double> frame_time() const { return frame_time_; }
    std::optional<double> bandwidth() const { return bandwidth_; }

private:
    explicit DelayProfile(double beta) : beta_(beta) {}
    double beta_;
    std::optional<double> theta_;
    std::optional<double> frame_time_;
    std::optional<double> bandwidth_;
};

struct EcEstimate {
    double value = 0.0;     ///< b/s/Hz
    double std_error = 0.0; ///< b/s/Hz, delta method
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

enum class Scheme { noma, oma, pair };

/// Which rate process to evaluate on each sample of a batch.
class RateSpec {
public:
    /// User m of an M-user NOMA uplink; M is taken from the allocation.
    static RateSpec noma(int m, PowerAllocation p);
    /// User m of M-user TDMA; M is taken from the batch.
    static RateSpec oma(int m);
    /// Member of the NOMA pair formed by global ranks (weak_rank, strong_rank).
    static RateSpec pair(rate::PairRole role, int weak_rank, int strong_rank, PowerAllocation p);

    Scheme scheme() const { return scheme_; }
    int user() const { return user_; }

    /// Fraction of the frame the user transmits in, for a batch of M users.
    double time_share(int big_m) const;
    /// ln(1 + SINR) on one sorted gain row.
    double log1p_sinr(std::span<const double> row, TransmitSnr rho) const;
    /// Instantaneous rate in b/s/Hz.
    double rate(std::span<const double> row, TransmitSnr rho) const;

    /// Throws domain_error if the spec cannot be evaluated on M-user rows.
    void check_compatible(int big_m) const;

private:
    RateSpec(Scheme s, int user) : scheme_(s), user_(user) {}
    Scheme scheme_;
    int user_;
    int weak_rank_ = 0;
    int strong_rank_ = 0;
    rate::PairRole role_ = rate::PairRole::weak;
    std::optional<PowerAllocation> power_;
};

/// (1/beta) log2 of the sample mean of (1 + SINR)^{beta * share}.
EcEstimate ec_monte_carlo(const RateSpec& spec, const DelayProfile& delay, TransmitSnr rho,
                          const channel::GainBatch& batch);

/// Sample mean of the rate: the theta -> 0 limit of the effective capacity.
EcEstimate ergodic_mc(const RateSpec& spec, TransmitSnr rho, const channel::GainBatch& batch);

/// Strong-user EC of the two-user NOMA uplink by nested adaptive quadrature
/// over the ordered joint density 2 e^{-x1-x2}.
double ec2_quadrature(const PowerAllocation& p, double beta2, TransmitSnr rho);

/// Estimate of (1/beta) log2 E[Y] from running sums of Y - 1 = expm1(beta ln(1+S)).
/// Exposed for callers that stream samples instead of holding a batch.
class MomentAccumulator {
public:
    explicit MomentAccumulator(double beta) : beta_(beta) {}
    /// Adds one sample given beta_eff * ln(1 + SINR) = ln Y.
    void add_log(double log_y);
    EcEstimate finish(std::uint64_t seed) const;
    std::size_t count() const { return n_; }

private:
    double beta_;
    std::size_t n_ = 0;
    double max_log_ = -std::numeric_limits<double>::infinity();
    // Neumaier sums of expm1(log_y) and its square.
    double sum_ = 0.0, comp_ = 0.0;
    double sum_sq_ = 0.0, comp_sq_ = 0.0;
    // Running log-sum-exp for the regime where Y underflows.
    double lse_scaled_ = 0.0, lse_sq_scaled_ = 0.0;
};

} // namespace noma_ec::ec

#endif
