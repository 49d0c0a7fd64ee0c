#include "noma_ec/asymptotics.hpp"

#include "noma_ec/channel_model.hpp"
#include "noma_ec/closed_form.hpp"
#include "noma_ec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace noma_ec::lab {

namespace {

constexpr double ln2 = std::numbers::ln2;

double to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Relative accuracy assumed for one EC evaluation when judging whether a
// finite difference carries signal.
double noise_rel(EcMethod m) { return m == EcMethod::numeric ? 1e-10 : 1e-12; }

double require(const closed::ClosedFormResult& r, const char* what)
{
    if (!r.converged) {
        throw convergence_error(std::string(what) + ": " + r.note);
    }
    return r.value;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace

double finite_diff_slope(const std::function<double(double)>& f, double rho_linear, double rel_step,
                         bool richardson)
{
    if (!(rho_linear > 0.0) || !std::isfinite(rho_linear)) {
        throw domain_error("finite_diff_slope: requires finite rho > 0");
    }
    if (!(rel_step > 0.0 && rel_step <= 0.5)) {
        throw domain_error("finite_diff_slope: rel_step must lie in (0, 0.5]");
    }
    auto central = [&](double h) {
        return (f(rho_linear * (1.0 + h)) - f(rho_linear * (1.0 - h))) / (2.0 * rho_linear * h);
    };
    const double d1 = central(rel_step);
    if (!richardson) {
        return d1;
    }
    const double d2 = central(0.5 * rel_step);
    return (4.0 * d2 - d1) / 3.0;
}

bool claim_holds(ClaimKind kind, double predicted, double measured, double tolerance)
{
    if (std::isnan(measured) || std::isnan(predicted)) {
        return false;
    }
    switch (kind) {
    case ClaimKind::value:
        return std::abs(predicted - measured) <= tolerance;
    case ClaimKind::at_least:
        return measured >= predicted - tolerance;
    case ClaimKind::at_most:
        return measured <= predicted + tolerance;
    case ClaimKind::greater:
        return measured > predicted;
    case ClaimKind::less:
        return measured < predicted;
    case ClaimKind::ratio: {
        if (predicted == 0.0) {
            return false;
        }
        const double q = measured / predicted;
        return q >= 1.0 / (1.0 + tolerance) && q <= 1.0 + tolerance;
    }
    }
    return false;
}

std::string LabConfig::snapshot() const
{
    std::ostringstream os;
    os << "p1=" << fmt(p1) << ";beta1=" << fmt(beta1) << ";beta2=" << fmt(beta2)
       << ";method=" << (method == EcMethod::numeric ? "numeric" : "monte_carlo")
       << ";mc_samples=" << mc_samples << ";limit_samples=" << limit_samples << ";seed=" << seed
       << ";rel_step=" << fmt(rel_step);
    return os.str();
}

TwoUserModel::TwoUserModel(const LabConfig& config) : config_(config)
{
    PowerAllocation::two_user(config.p1);
    ec::DelayProfile::from_beta(config.beta1);
    ec::DelayProfile::from_beta(config.beta2);
    if (config.method == EcMethod::monte_carlo) {
        batch_ = channel::sample_ordered(2, config.mc_samples, config.seed);
    }
}

double TwoUserModel::beta(int user) const
{
    if (user == 1) {
        return config_.beta1;
    }
    if (user == 2) {
        return config_.beta2;
    }
    throw index_error("two-user model: user must be 1 or 2");
}

double TwoUserModel::noma(int user, double rho) const
{
    const double b = beta(user);
    const auto snr = TransmitSnr::from_linear(rho);
    if (batch_) {
        return ec::ec_monte_carlo(ec::RateSpec::noma(user, config_.power()), ec::DelayProfile::from_beta(b),
                                  snr, *batch_)
            .value;
    }
    if (user == 1) {
        return require(closed::ec1_noma_closed(config_.p1, b, snr), "E_c^1 closed form");
    }
    return ec::ec2_quadrature(config_.power(), b, snr);
}

double TwoUserModel::oma(int user, double rho) const
{
    const double b = beta(user);
    const auto snr = TransmitSnr::from_linear(rho);
    if (batch_) {
        return ec::ec_monte_carlo(ec::RateSpec::oma(user), ec::DelayProfile::from_beta(b), snr, *batch_).value;
    }
    return require(closed::ec_oma_closed(user, 2, b, snr), "TDMA closed form");
}

double TwoUserModel::total(ec::Scheme scheme, double rho) const
{
    switch (scheme) {
    case ec::Scheme::noma:
        return noma(1, rho) + noma(2, rho);
    case ec::Scheme::oma:
        return oma(1, rho) + oma(2, rho);
    case ec::Scheme::pair:
        break;
    }
    throw unsupported_mode("total_ec: scheme must be noma or oma");
}

double total_ec(ec::Scheme scheme, const LabConfig& config, TransmitSnr rho)
{
    return TwoUserModel(config).total(scheme, rho.linear());
}

double gap_zero_crossing(int user, const LabConfig& config, double lo_db, double hi_db, double tol_db)
{
    if (!(lo_db < hi_db) || !(tol_db > 0.0)) {
        throw domain_error("gap_zero_crossing: need lo < hi and tol > 0");
    }
    const TwoUserModel model(config);
    auto g = [&](double db) { return model.gap(user, to_linear(db)); };
    double g_lo = g(lo_db);
    const double g_hi = g(hi_db);
    if (g_lo == 0.0) {
        return lo_db;
    }
    if (g_hi == 0.0) {
        return hi_db;
    }
    if ((g_lo > 0.0) == (g_hi > 0.0)) {
        throw domain_error("gap_zero_crossing: gap has no sign change in the bracket");
    }
    while (hi_db - lo_db > tol_db) {
        const double mid = 0.5 * (lo_db + hi_db);
        const double g_mid = g(mid);
        if (g_mid == 0.0) {
            return mid;
        }
        if ((g_mid > 0.0) == (g_lo > 0.0)) {
            lo_db = mid;
            g_lo = g_mid;
        } else {
            hi_db = mid;
        }
    }
    return 0.5 * (lo_db + hi_db);
}

const std::vector<std::string>& lemma_ids()
{
    static const std::vector<std::string> ids{"1a", "1b", "2a", "2b", "2c", "3a", "3b", "3c", "4a", "4b",
                                              "4c", "4d", "4e", "4f", "5a", "5b", "5c", "5d"};
    return ids;
}

namespace {

class LemmaRunner {
public:
    explicit LemmaRunner(const LabConfig& config) : cfg_(config), model_(config) {}

    std::vector<LemmaReport> run(const std::string& id)
    {
        out_.clear();
        id_ = id;
        if (id == "1a") {
            lemma_1a();
        } else if (id == "1b") {
            lemma_1b();
        } else if (id == "2a" || id == "3a") {
            slope_signs_user(id == "2a" ? 1 : 2);
        } else if (id == "2b" || id == "3b") {
            low_gap_slope(id == "2b" ? 1 : 2);
        } else if (id == "2c" || id == "3c") {
            high_gap_slope(id == "2c" ? 1 : 2);
        } else if (id == "4a" || id == "4d") {
            total_slope_sign(id == "4a" ? ec::Scheme::noma : ec::Scheme::oma);
        } else if (id == "4b" || id == "4e") {
            total_low(id == "4b" ? ec::Scheme::noma : ec::Scheme::oma);
        } else if (id == "4c" || id == "4f") {
            total_high(id == "4c" ? ec::Scheme::noma : ec::Scheme::oma);
        } else if (id == "5a" || id == "5c") {
            ergodic_limit(id == "5a" ? 1 : 2);
        } else if (id == "5b" || id == "5d") {
            ergodic_high(id == "5b" ? 1 : 2);
        } else {
            throw domain_error("check_lemma: unknown lemma id '" + id + "'");
        }
        return out_;
    }

private:
    LemmaReport& add(std::string claim, std::string scheme, int user, double rho_db, ClaimKind kind,
                     double predicted, double measured, double tolerance)
    {
        LemmaReport r;
        r.lemma_id = id_;
        r.claim = std::move(claim);
        r.scheme = std::move(scheme);
        r.user = user;
        r.beta = user == 2 ? cfg_.beta2 : cfg_.beta1;
        r.rho_db = rho_db;
        r.kind = kind;
        r.predicted = predicted;
        r.measured = measured;
        r.tolerance = tolerance;
        r.pass = claim_holds(kind, predicted, measured, tolerance);
        r.seed = cfg_.seed;
        if (cfg_.method == EcMethod::monte_carlo) {
            r.n_samples = cfg_.mc_samples;
        }
        r.config = cfg_.snapshot();
        out_.push_back(std::move(r));
        return out_.back();
    }

    std::vector<double> grid() const
    {
        if (!cfg_.grid_db.empty()) {
            return cfg_.grid_db;
        }
        std::vector<double> g;
        for (int db = -50; db <= 50; db += 5) {
            g.push_back(db);
        }
        return g;
    }

    double slope(const std::function<double(double)>& f, double db) const
    {
        return finite_diff_slope(f, to_linear(db), cfg_.rel_step, true);
    }

    // Minimum slope of f over the grid, skipping differences inside the noise floor.
    void slope_sign(const std::string& claim, const std::string& scheme, int user,
                    const std::function<double(double)>& f)
    {
        double worst = std::numeric_limits<double>::infinity();
        double worst_db = 0.0;
        int skipped = 0;
        for (double db : grid()) {
            const double rho = to_linear(db);
            const double up = f(rho * (1.0 + cfg_.rel_step));
            const double down = f(rho * (1.0 - cfg_.rel_step));
            const double floor = noise_rel(cfg_.method) * (std::abs(up) + std::abs(down)) + 1e-300;
            if (std::abs(up - down) <= 3.0 * floor) {
                ++skipped;
                continue;
            }
            const double s = (up - down) / (2.0 * rho * cfg_.rel_step);
            if (s < worst) {
                worst = s;
                worst_db = db;
            }
        }
        const bool any = std::isfinite(worst);
        auto& r = add(claim, scheme, user, any ? worst_db : 0.0, ClaimKind::at_least, 0.0,
                      any ? worst : std::numeric_limits<double>::quiet_NaN(), 0.0);
        r.note = "minimum slope over " + std::to_string(grid().size()) + " grid points; " +
                 std::to_string(skipped) + " skipped below noise floor";
    }

    void lemma_1a()
    {
        const double db = cfg_.low_db;
        const double rho = to_linear(db);
        const double tol = 0.01;
        for (int u : {1, 2}) {
            add("ec_to_zero", "noma", u, db, ClaimKind::at_most, 0.0, std::abs(model_.noma(u, rho)), tol);
            add("ec_to_zero", "oma", u, db, ClaimKind::at_most, 0.0, std::abs(model_.oma(u, rho)), tol);
            add("gap_to_zero", "gap", u, db, ClaimKind::at_most, 0.0, std::abs(model_.gap(u, rho)), tol);
        }
    }

    void lemma_1b()
    {
        const double db = cfg_.high_db;
        const double rho = to_linear(db);
        const double rho_before = to_linear(db - 10.0);
        const auto limit = closed::ec2_high_snr_limit_mc(cfg_.power(), cfg_.beta2, cfg_.limit_samples, cfg_.seed);
        auto& r = add("ec2_plateau", "noma", 2, db, ClaimKind::value, limit.value, model_.noma(2, rho), 0.02);
        r.alternative = closed::ec2_high_snr_limit_quadrature(cfg_.power(), cfg_.beta2);
        r.note = "predicted is the Monte Carlo limit (" + std::to_string(limit.n_samples) +
                 " samples, std_error " + fmt(limit.std_error) + "); alternative is its quadrature value";

        auto grows = [&](const std::string& claim, const std::string& scheme, int user,
                         const std::function<double(double)>& f, bool up) {
            auto& g = add(claim, scheme, user, db, up ? ClaimKind::greater : ClaimKind::less, 0.0,
                          f(rho) - f(rho_before), 0.0);
            g.note = "measured is the change from " + fmt(db - 10.0) + " dB";
        };
        grows("ec1_unbounded", "noma", 1, [&](double x) { return model_.noma(1, x); }, true);
        grows("ec_unbounded", "oma", 1, [&](double x) { return model_.oma(1, x); }, true);
        grows("ec_unbounded", "oma", 2, [&](double x) { return model_.oma(2, x); }, true);
        grows("gap_to_plus_inf", "gap", 1, [&](double x) { return model_.gap(1, x); }, true);
        grows("gap_to_minus_inf", "gap", 2, [&](double x) { return model_.gap(2, x); }, false);
    }

    void slope_signs_user(int u)
    {
        slope_sign("slope_nonnegative", "noma", u, [&](double x) { return model_.noma(u, x); });
        slope_sign("slope_nonnegative", "oma", u, [&](double x) { return model_.oma(u, x); });
    }

    void low_gap_slope(int u)
    {
        const double p = u == 1 ? cfg_.p1 : 1.0 - cfg_.p1;
        const double predicted = (p - 0.5) / ln2 * channel::ordered_moment(u, 2, 1.0);
        const double db = cfg_.low_slope_db;
        const double measured = slope([&](double x) { return model_.gap(u, x); }, db);
        add("gap_slope_low_snr", "gap", u, db, ClaimKind::value, predicted, measured, 0.1 * std::abs(predicted));
    }

    void high_gap_slope(int u)
    {
        const double sign = u == 1 ? 1.0 : -1.0;
        for (double db : cfg_.high_slope_db) {
            const double rho = to_linear(db);
            const double predicted = sign / (2.0 * rho * ln2);
            const double measured = slope([&](double x) { return model_.gap(u, x); }, db);
            auto& r = add("gap_slope_high_snr", "gap", u, db, ClaimKind::ratio, predicted, measured, 0.25);
            r.note = "measured/predicted = " + fmt(measured / predicted);
        }
    }

    static const char* total_name(ec::Scheme s) { return s == ec::Scheme::noma ? "total_noma" : "total_oma"; }

    void total_slope_sign(ec::Scheme s)
    {
        slope_sign("slope_nonnegative", total_name(s), 0, [&](double x) { return model_.total(s, x); });
    }

    void total_low(ec::Scheme s)
    {
        const double e1 = channel::ordered_moment(1, 2, 1.0);
        const double e2 = channel::ordered_moment(2, 2, 1.0);
        add("total_to_zero", total_name(s), 0, cfg_.low_db, ClaimKind::at_most, 0.0,
            std::abs(model_.total(s, to_linear(cfg_.low_db))), 0.01);

        double predicted = 0.0;
        std::optional<double> alternative;
        if (s == ec::Scheme::noma) {
            predicted = (cfg_.p1 * e1 + (1.0 - cfg_.p1) * e2) / ln2;
        } else {
            predicted = (e1 + e2) / (2.0 * ln2);
            alternative = e1 / (2.0 * ln2) + 2.0 * e2 / ln2;
        }
        const double db = cfg_.low_slope_db;
        const double measured = slope([&](double x) { return model_.total(s, x); }, db);
        auto& r = add("total_slope_low_snr", total_name(s), 0, db, ClaimKind::value, predicted, measured,
                      0.1 * std::abs(predicted));
        if (alternative) {
            r.alternative = alternative;
            const bool alt_ok = claim_holds(ClaimKind::value, *alternative, measured, 0.1 * std::abs(*alternative));
            r.note = std::string("predicted uses E[x1]/(2 ln2) + E[x2]/(2 ln2); alternative E[x1]/(2 ln2) + "
                                 "2 E[x2]/ln2 ") +
                     (alt_ok ? "also matches" : "does not match");
        }
    }

    void total_high(ec::Scheme s)
    {
        const double db = cfg_.high_db;
        const double rho = to_linear(db);
        const double measured = slope([&](double x) { return model_.total(s, x); }, db);
        add("total_slope_vanishes", total_name(s), 0, db, ClaimKind::at_most, 0.0, std::abs(measured), 0.01);
        auto& r = add("total_unbounded", total_name(s), 0, db, ClaimKind::greater, 0.0,
                      model_.total(s, rho) - model_.total(s, to_linear(db - 10.0)), 0.0);
        r.note = "measured is the change from " + fmt(db - 10.0) + " dB";
    }

    const channel::GainBatch& batch()
    {
        if (!batch_) {
            batch_ = channel::sample_ordered(2, cfg_.mc_samples, cfg_.seed);
        }
        return *batch_;
    }

    LemmaReport& add_mc(std::string claim, std::string scheme, int user, double rho_db, ClaimKind kind,
                        double predicted, double measured, double tolerance, double std_error)
    {
        auto& r = add(std::move(claim), std::move(scheme), user, rho_db, kind, predicted, measured, tolerance);
        r.std_error = std_error;
        r.n_samples = cfg_.mc_samples;
        return r;
    }

    void ergodic_limit(int u)
    {
        const double db = cfg_.ergodic_db;
        const auto snr = TransmitSnr::from_db(db);
        const auto delay = ec::DelayProfile::from_beta(cfg_.ergodic_beta);
        const auto& b = batch();
        const auto noma_spec = ec::RateSpec::noma(u, cfg_.power());
        const auto oma_spec = ec::RateSpec::oma(u);

        const auto ec_n = ec::ec_monte_carlo(noma_spec, delay, snr, b);
        const auto ec_o = ec::ec_monte_carlo(oma_spec, delay, snr, b);
        const auto erg_n = ec::ergodic_mc(noma_spec, snr, b);
        const auto erg_o = ec::ergodic_mc(oma_spec, snr, b);

        const std::string note = "EC at beta = " + fmt(cfg_.ergodic_beta) + " against the ergodic rate";
        add_mc("ec_equals_ergodic", "noma", u, db, ClaimKind::value, erg_n.value, ec_n.value, 0.02, ec_n.std_error)
            .note = note;
        add_mc("ec_equals_ergodic", "oma", u, db, ClaimKind::value, erg_o.value, ec_o.value, 0.02, ec_o.std_error)
            .note = note;
        add_mc("gap_equals_ergodic_gap", "gap", u, db, ClaimKind::value, erg_n.value - erg_o.value,
               ec_n.value - ec_o.value, 0.02, std::hypot(ec_n.std_error, ec_o.std_error))
            .note = note;
    }

    void ergodic_high(int u)
    {
        const double db = cfg_.high_db;
        const auto hi = TransmitSnr::from_db(db);
        const auto lo = TransmitSnr::from_db(db - 10.0);
        const auto& b = batch();
        const auto noma_spec = ec::RateSpec::noma(u, cfg_.power());
        const auto oma_spec = ec::RateSpec::oma(u);

        const auto n_hi = ec::ergodic_mc(noma_spec, hi, b);
        const auto n_lo = ec::ergodic_mc(noma_spec, lo, b);
        const auto o_hi = ec::ergodic_mc(oma_spec, hi, b);
        const auto o_lo = ec::ergodic_mc(oma_spec, lo, b);
        const std::string change = "measured is the change from " + fmt(db - 10.0) + " dB";

        if (u == 1) {
            add_mc("ergodic_unbounded", "noma", 1, db, ClaimKind::greater, 0.0, n_hi.value - n_lo.value, 0.0,
                   std::hypot(n_hi.std_error, n_lo.std_error))
                .note = change;
        } else {
            // Interference-limited ceiling E[log2(1 + P2 x2 / (P1 x1))].
            const double ratio = (1.0 - cfg_.p1) / cfg_.p1;
            double sum = 0.0;
            for (std::size_t i = 0; i < b.size(); ++i) {
                const auto row = b.row(i);
                sum += std::log1p(ratio * row[1] / row[0]);
            }
            const double ceiling = sum / static_cast<double>(b.size()) / ln2;
            add_mc("ergodic_plateau", "noma", 2, db, ClaimKind::value, ceiling, n_hi.value, 0.02, n_hi.std_error)
                .note = "predicted is E[log2(1 + P2 x2/(P1 x1))] on the same batch";
        }
        add_mc("ergodic_unbounded", "oma", u, db, ClaimKind::greater, 0.0, o_hi.value - o_lo.value, 0.0,
               std::hypot(o_hi.std_error, o_lo.std_error))
            .note = change;
        add_mc(u == 1 ? "ergodic_gap_to_plus_inf" : "ergodic_gap_to_minus_inf", "gap", u, db,
               u == 1 ? ClaimKind::greater : ClaimKind::less, 0.0,
               (n_hi.value - o_hi.value) - (n_lo.value - o_lo.value), 0.0,
               std::hypot(std::hypot(n_hi.std_error, n_lo.std_error), std::hypot(o_hi.std_error, o_lo.std_error)))
            .note = change;
    }

    LabConfig cfg_;
    TwoUserModel model_;
    std::optional<channel::GainBatch> batch_;
    std::string id_;
    std::vector<LemmaReport> out_;
};

} // namespace

std::vector<LemmaReport> check_lemma(const std::string& id, const LabConfig& config)
{
    LemmaRunner runner(config);
    if (id != "all") {
        return runner.run(id);
    }
    std::vector<LemmaReport> all;
    for (const auto& each : lemma_ids()) {
        auto part = runner.run(each);
        all.insert(all.end(), part.begin(), part.end());
    }
    return all;
}

} // namespace noma_ec::lab
