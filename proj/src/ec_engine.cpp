#include "noma_ec/ec_engine.hpp"

#include "noma_ec/errors.hpp"
#include "noma_ec/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace noma_ec::ec {

namespace {

constexpr double ln2 = std::numbers::ln2;

void check_beta(double beta)
{
    if (std::isnan(beta) || !(beta < 0.0) || !std::isfinite(beta)) {
        throw domain_error("QoS exponent beta must be finite and < 0 (use ergodic_mc for theta -> 0)");
    }
}

void neumaier_add(double& sum, double& comp, double x)
{
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
        comp += (sum - t) + x;
    } else {
        comp += (x - t) + sum;
    }
    sum = t;
}

} // namespace

DelayProfile DelayProfile::from_beta(double beta)
{
    check_beta(beta);
    return DelayProfile(beta);
}

DelayProfile DelayProfile::from_qos(double theta, double frame_time_s, double bandwidth_hz)
{
    if (!(theta > 0.0) || !(frame_time_s > 0.0) || !(bandwidth_hz > 0.0)) {
        throw domain_error("DelayProfile: theta, frame time and bandwidth must be > 0");
    }
    DelayProfile d(-theta * frame_time_s * bandwidth_hz / ln2);
    check_beta(d.beta_);
    d.theta_ = theta;
    d.frame_time_ = frame_time_s;
    d.bandwidth_ = bandwidth_hz;
    return d;
}

RateSpec RateSpec::noma(int m, PowerAllocation p)
{
    if (m < 1 || static_cast<std::size_t>(m) > p.size()) {
        throw index_error("RateSpec::noma: user index out of range");
    }
    RateSpec s(Scheme::noma, m);
    s.power_ = std::move(p);
    return s;
}

RateSpec RateSpec::oma(int m)
{
    if (m < 1) {
        throw index_error("RateSpec::oma: user index out of range");
    }
    return RateSpec(Scheme::oma, m);
}

RateSpec RateSpec::pair(rate::PairRole role, int weak_rank, int strong_rank, PowerAllocation p)
{
    if (weak_rank < 1 || strong_rank <= weak_rank) {
        throw domain_error("RateSpec::pair: requires 1 <= weak_rank < strong_rank");
    }
    if (p.size() != 2) {
        throw domain_error("RateSpec::pair: pair allocation must have two users");
    }
    RateSpec s(Scheme::pair, role == rate::PairRole::weak ? weak_rank : strong_rank);
    s.role_ = role;
    s.weak_rank_ = weak_rank;
    s.strong_rank_ = strong_rank;
    s.power_ = std::move(p);
    return s;
}

void RateSpec::check_compatible(int big_m) const
{
    switch (scheme_) {
    case Scheme::noma:
        if (static_cast<int>(power_->size()) != big_m) {
            throw domain_error("RateSpec: NOMA allocation size differs from batch M");
        }
        break;
    case Scheme::oma:
        if (user_ > big_m) {
            throw index_error("RateSpec: OMA user index exceeds batch M");
        }
        break;
    case Scheme::pair:
        if (strong_rank_ > big_m || big_m % 2 != 0) {
            throw domain_error("RateSpec: pair ranks need an even batch M covering them");
        }
        break;
    }
}

double RateSpec::time_share(int big_m) const
{
    switch (scheme_) {
    case Scheme::noma:
        return 1.0;
    case Scheme::oma:
        return 1.0 / big_m;
    case Scheme::pair:
        return 2.0 / big_m;
    }
    return 1.0;
}

double RateSpec::log1p_sinr(std::span<const double> row, TransmitSnr rho) const
{
    const double r = rho.linear();
    switch (scheme_) {
    case Scheme::noma:
        return std::log1p(rate::sinr_noma(user_, row, *power_, rho));
    case Scheme::oma:
        return std::log1p(r * row[static_cast<std::size_t>(user_ - 1)]);
    case Scheme::pair: {
        const double weak = row[static_cast<std::size_t>(weak_rank_ - 1)];
        const double p1 = (*power_)[0];
        if (role_ == rate::PairRole::weak) {
            return std::log1p(r * p1 * weak);
        }
        const double strong = row[static_cast<std::size_t>(strong_rank_ - 1)];
        return std::log1p(r * (*power_)[1] * strong / (1.0 + r * p1 * weak));
    }
    }
    return 0.0;
}

double RateSpec::rate(std::span<const double> row, TransmitSnr rho) const
{
    return time_share(static_cast<int>(row.size())) * log1p_sinr(row, rho) / ln2;
}

void MomentAccumulator::add_log(double log_y)
{
    ++n_;
    const double g = std::expm1(log_y);
    neumaier_add(sum_, comp_, g);
    neumaier_add(sum_sq_, comp_sq_, g * g);

    if (log_y == -std::numeric_limits<double>::infinity()) {
        return;
    }
    if (log_y > max_log_) {
        if (std::isfinite(max_log_)) {
            const double shift = std::exp(max_log_ - log_y);
            lse_scaled_ *= shift;
            lse_sq_scaled_ *= shift * shift;
        }
        max_log_ = log_y;
    }
    const double y = std::exp(log_y - max_log_);
    lse_scaled_ += y;
    lse_sq_scaled_ += y * y;
}

EcEstimate MomentAccumulator::finish(std::uint64_t seed) const
{
    if (n_ == 0) {
        throw domain_error("effective capacity of an empty batch");
    }
    const double n = static_cast<double>(n_);
    const double scale = 1.0 / (std::abs(beta_) * ln2);
    EcEstimate out;
    out.n_samples = n_;
    out.seed = seed;

    const double mean_g = (sum_ + comp_) / n;
    if (mean_g > -0.75) {
        const double mean_y = 1.0 + mean_g;
        out.value = std::log1p(mean_g) / (beta_ * ln2);
        if (n_ > 1) {
            const double var = std::max(0.0, ((sum_sq_ + comp_sq_) / n - mean_g * mean_g) * n / (n - 1.0));
            out.std_error = std::sqrt(var / n) / mean_y * scale;
        }
    } else {
        const double mean_s = lse_scaled_ / n;
        out.value = (max_log_ + std::log(mean_s)) / (beta_ * ln2);
        if (n_ > 1) {
            const double var = std::max(0.0, (lse_sq_scaled_ / n - mean_s * mean_s) * n / (n - 1.0));
            out.std_error = std::sqrt(var / n) / mean_s * scale;
        }
    }
    if (!std::isfinite(out.value)) {
        throw convergence_error("effective capacity estimate is not finite");
    }
    return out;
}

EcEstimate ec_monte_carlo(const RateSpec& spec, const DelayProfile& delay, TransmitSnr rho,
                          const channel::GainBatch& batch)
{
    const double beta = delay.beta();
    check_beta(beta);
    if (batch.size() == 0) {
        throw domain_error("ec_monte_carlo: empty batch");
    }
    spec.check_compatible(batch.users());
    const double exponent = beta * spec.time_share(batch.users());
    MomentAccumulator acc(beta);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        acc.add_log(exponent * spec.log1p_sinr(batch.row(i), rho));
    }
    return acc.finish(batch.seed());
}

EcEstimate ergodic_mc(const RateSpec& spec, TransmitSnr rho, const channel::GainBatch& batch)
{
    if (batch.size() == 0) {
        throw domain_error("ergodic_mc: empty batch");
    }
    spec.check_compatible(batch.users());
    const double share = spec.time_share(batch.users()) / ln2;
    double sum = 0.0, comp = 0.0, sum_sq = 0.0, comp_sq = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double r = share * spec.log1p_sinr(batch.row(i), rho);
        neumaier_add(sum, comp, r);
        neumaier_add(sum_sq, comp_sq, r * r);
    }
    const double n = static_cast<double>(batch.size());
    EcEstimate out;
    out.n_samples = batch.size();
    out.seed = batch.seed();
    out.value = (sum + comp) / n;
    if (batch.size() > 1) {
        const double var = std::max(0.0, ((sum_sq + comp_sq) / n - out.value * out.value) * n / (n - 1.0));
        out.std_error = std::sqrt(var / n);
    }
    return out;
}

double ec2_quadrature(const PowerAllocation& p, double beta2, TransmitSnr rho)
{
    check_beta(beta2);
    if (p.size() != 2) {
        throw domain_error("ec2_quadrature: two-user allocation required");
    }
    if (!(rho.linear() > 0.0)) {
        throw domain_error("ec2_quadrature: requires rho > 0");
    }
    const double r = rho.linear();
    const double p1 = p[0];
    const double p2 = p[1];

    quad::Options inner_opt;
    inner_opt.rel_tol = 1e-11;
    quad::Options outer_opt;
    outer_opt.rel_tol = 1e-10;

    bool inner_ok = true;
    // E[Y] - 1 with Y = (1 + rho P2 x2 / (1 + rho P1 x1))^beta; x2 = x1 + v.
    auto outer = [&](double x1) {
        const double interference = 1.0 + r * p1 * x1;
        auto inner = [&](double v) {
            const double sinr = r * p2 * (x1 + v) / interference;
            return std::expm1(beta2 * std::log1p(sinr)) * std::exp(-v);
        };
        const auto ri = quad::integrate_to_infinity(inner, 0.0, 1.0, inner_opt);
        inner_ok = inner_ok && ri.converged;
        return 2.0 * std::exp(-2.0 * x1) * ri.value;
    };
    const auto ro = quad::integrate_to_infinity(outer, 0.0, 0.5, outer_opt);
    if (!ro.converged || !inner_ok || ro.abs_error > 1e-6) {
        throw convergence_error("ec2_quadrature: nested quadrature did not converge");
    }
    return std::log1p(ro.value) / (beta2 * ln2);
}

} // namespace noma_ec::ec
