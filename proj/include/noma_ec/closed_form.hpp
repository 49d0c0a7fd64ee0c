#ifndef NOMA_EC_CLOSED_FORM_HPP
#define NOMA_EC_CLOSED_FORM_HPP

// Closed-form effective capacities of the two-user uplink: NOMA users 1 and 2,
// TDMA users, and the interference-limited plateau of the strong NOMA user.

#include "noma_ec/ec_engine.hpp"
#include "noma_ec/rate_model.hpp"

#include <cstdint>
#include <string>

namespace noma_ec::closed {

struct ClosedFormResult {
    double value = 0.0;  ///< b/s/Hz
    int terms_used = 0;  ///< series length (k terms for the strong user)
    bool converged = false;
    /// Estimated relative error of the quantity inside the logarithm.
    double rel_error = 0.0;
    std::string note;
};

/// E_c^1 = (1/beta1) log2( 2/(rho P1) U(1, 2 + beta1, 2/(rho P1)) ).
ClosedFormResult ec1_noma_closed(double p1, double beta1, TransmitSnr rho);

inline constexpr int default_k_max = 500;

/// Strong-user closed form: binomial sum over j = 0..-beta2 of a Taylor
/// series in (P2 - P1) whose terms are incomplete-gamma moments. Needs an
/// integer beta2 <= -1; other exponents raise unsupported_mode.
///
/// At low SNR the k-series alternates with terms near (c(P2-P1))^k / k!,
/// c = 1/(rho P2), so double precision loses about 2c(P2-P1)/ln 10 digits.
/// `converged` is false once that loss exceeds the error budget.
ClosedFormResult ec2_noma_closed(const PowerAllocation& p, double beta2, TransmitSnr rho,
                                 int k_max = default_k_max);

/// How the TDMA closed form places the exponent inside U(1, b, z).
enum class OmaVariant {
    /// b = 2 + (2/M) beta, exactly as printed in the source derivation.
    appendix_b,
    /// b = 2 + beta/M, which follows from E[(1 + rho x_m)^{beta/M}].
    consistent_exponent,
};

/// The variant validated against Monte Carlo (see tests/unit/test_closed_form.cpp).
inline constexpr OmaVariant default_oma_variant = OmaVariant::consistent_exponent;

/// TDMA user m of M: (1/beta) log2( psi_m/rho sum_k C(m-1,k) (-1)^k U(1, b, (M-m+1+k)/rho) ).
ClosedFormResult ec_oma_closed(int m, int big_m, double beta, TransmitSnr rho,
                               OmaVariant variant = default_oma_variant);

/// rho -> inf limit of E_c^2: (1/beta2) log2 E[(1 + P2 x2 / (P1 x1))^beta2],
/// by 2-D quadrature over the ordered pair.
double ec2_high_snr_limit_quadrature(const PowerAllocation& p, double beta2);

/// Same limit by streaming Monte Carlo.
ec::EcEstimate ec2_high_snr_limit_mc(const PowerAllocation& p, double beta2, std::size_t samples,
                                     std::uint64_t seed);

} // namespace noma_ec::closed

#endif
