#ifndef NOMA_EC_SPECIAL_FUNCTIONS_HPP
#define NOMA_EC_SPECIAL_FUNCTIONS_HPP

// Special functions behind the closed-form effective capacities. Each one is
// evaluated from its defining integral (or an exact identity over one), so
// every value can be traced back to a quadrature.

namespace noma_ec::special {

/// A value together with the quadrature's error estimate.
/// `within_tolerance` is false when the estimate exceeds the routine's target.
struct Evaluation {
    double value = 0.0;
    double abs_error = 0.0;
    bool within_tolerance = false;
};

/// Target relative accuracy of every routine in this header.
inline constexpr double target_rel_tol = 1e-10;

/// Confluent hypergeometric function of the second kind,
/// U(a,b,z) = 1/Gamma(a) * int_0^inf e^{-zt} t^{a-1} (1+t)^{b-a-1} dt.
/// Requires a > 0 and z > 0.
Evaluation hyp_u_checked(double a, double b, double z);

/// As hyp_u_checked, throwing convergence_error when the target is missed.
double hyp_u(double a, double b, double z);

/// ln Gamma(s, x) for any real s and x > 0. Works where Gamma(s, x) itself
/// would overflow or underflow. abs_error is the error in the logarithm.
Evaluation log_upper_gamma_checked(double s, double x);

double log_upper_gamma(double s, double x);

/// Upper incomplete gamma Gamma(s, x) = int_x^inf t^{s-1} e^{-t} dt.
double upper_gamma(double s, double x);

/// Whittaker W_{u-1/2,u}(z) = e^{z/2} z^{1/2-u} Gamma(2u, z).
double whittaker_w_reduced(double u, double z);

/// psi_m = 1/B(m, M-m+1) = M! / ((m-1)! (M-m)!).
double order_coefficient(int m, int big_m);

/// Closed form of int_c^inf y^b Gamma(A, y) dy:
/// (Gamma(1+A+b, c) - c^{1+b} Gamma(A, c)) / (1 + b).
double gamma_moment_integral(double b, double big_a, double c);

/// Natural log of gamma_moment_integral; the integral is always positive.
/// Returns -inf when cancellation leaves no significant digits.
double log_gamma_moment_integral(double b, double big_a, double c);

} // namespace noma_ec::special

#endif
