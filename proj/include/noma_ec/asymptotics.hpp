#ifndef NOMA_EC_ASYMPTOTICS_HPP
#define NOMA_EC_ASYMPTOTICS_HPP

// Numerical checks of the two-user limit and slope claims: behaviour as
// rho -> 0 and rho -> inf, finite-difference slopes, NOMA-OMA gap crossings,
// and the total ECs V_N, V_O.

#include "noma_ec/ec_engine.hpp"
#include "noma_ec/rate_model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace noma_ec::lab {

/// Central difference (f(rho(1+h)) - f(rho(1-h))) / (2 rho h); with
/// `richardson`, combines steps h and h/2 to cancel the O(h^2) term.
double finite_diff_slope(const std::function<double(double)>& f, double rho_linear, double rel_step,
                         bool richardson = false);

/// How the four two-user ECs are evaluated.
enum class EcMethod {
    /// Closed forms for E_c^1 and TDMA, nested quadrature for E_c^2.
    numeric,
    /// Monte Carlo on one shared batch (common random numbers).
    monte_carlo,
};

struct LabConfig {
    double p1 = 0.2;
    double beta1 = -1.0;
    double beta2 = -1.0;
    EcMethod method = EcMethod::numeric;
    std::size_t mc_samples = 1'000'000;
    /// Samples behind the strong-user plateau oracle.
    std::size_t limit_samples = 10'000'000;
    std::uint64_t seed = 1;

    double low_db = -50.0;        ///< rho -> 0 proxy
    double high_db = 50.0;        ///< rho -> inf proxy
    double low_slope_db = -40.0;  ///< where small-rho slopes are measured
    std::vector<double> high_slope_db{40.0, 50.0};
    std::vector<double> grid_db;  ///< slope-sign grid; empty means -50:5:50
    double rel_step = 1e-2;

    double ergodic_db = 10.0;
    double ergodic_beta = -1e-3;

    PowerAllocation power() const { return PowerAllocation::two_user(p1); }
    std::string snapshot() const;
};

/// How `pass` is decided from predicted, measured and tolerance.
enum class ClaimKind {
    value,    ///< |predicted - measured| <= tolerance
    at_least, ///< measured >= predicted - tolerance
    at_most,  ///< measured <= predicted + tolerance
    greater,  ///< measured > predicted
    less,     ///< measured < predicted
    ratio,    ///< measured / predicted in [1/(1+tolerance), 1+tolerance]
};

bool claim_holds(ClaimKind kind, double predicted, double measured, double tolerance);

struct LemmaReport {
    std::string lemma_id;
    std::string claim;
    std::string scheme; ///< noma, oma, gap, total_noma, ...
    int user = 0;       ///< 0 when the claim spans both users
    double beta = 0.0;
    double rho_db = 0.0;
    ClaimKind kind = ClaimKind::value;
    double predicted = 0.0;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    /// Set when the measured side is a Monte Carlo estimate.
    std::optional<double> std_error;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    /// Competing prediction, reported but not judged.
    std::optional<double> alternative;
    std::string note;
    std::string config;
};

/// Lemma identifiers accepted by check_lemma, in report order.
const std::vector<std::string>& lemma_ids();

/// Runs every sub-claim of `id` ("1a".."5d", or "all"). A failed claim is a
/// report with pass = false, never an exception.
std::vector<LemmaReport> check_lemma(const std::string& id, const LabConfig& config);

/// The four ECs of the two-user system under one evaluation method.
class TwoUserModel {
public:
    explicit TwoUserModel(const LabConfig& config);

    /// NOMA E_c^user or TDMA E~_c^user at linear SNR rho.
    double noma(int user, double rho) const;
    double oma(int user, double rho) const;
    double gap(int user, double rho) const { return noma(user, rho) - oma(user, rho); }
    double total(ec::Scheme scheme, double rho) const;

    const LabConfig& config() const { return config_; }

private:
    double beta(int user) const;
    LabConfig config_;
    std::optional<channel::GainBatch> batch_;
};

/// rho_dB where E_c^user - E~_c^user changes sign inside [lo_db, hi_db],
/// by bisection to `tol_db`. Throws domain_error if the ends share a sign.
double gap_zero_crossing(int user, const LabConfig& config, double lo_db, double hi_db,
                         double tol_db = 0.1);

/// V_N = E_c^1 + E_c^2 or V_O = E~_c^1 + E~_c^2.
double total_ec(ec::Scheme scheme, const LabConfig& config, TransmitSnr rho);

} // namespace noma_ec::lab

#endif
