#include "noma_ec/pairing.hpp"

#include "noma_ec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace noma_ec::pairing {

namespace {

constexpr double ln2 = std::numbers::ln2;

double to_linear(double db) { return std::pow(10.0, db / 10.0); }

void check_even(int big_m)
{
    if (big_m < 2 || big_m % 2 != 0) {
        throw domain_error("pairing: M must be even and >= 2");
    }
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace

PairingLayout::PairingLayout(int big_m, std::vector<PairSpec> pairs) : big_m_(big_m), pairs_(std::move(pairs))
{
    check_even(big_m);
    if (pairs_.size() != static_cast<std::size_t>(big_m / 2)) {
        throw domain_error("PairingLayout: need exactly M/2 pairs");
    }
    std::vector<bool> seen(static_cast<std::size_t>(big_m) + 1, false);
    for (const auto& p : pairs_) {
        if (p.weak < 1 || p.strong > big_m || p.weak >= p.strong) {
            throw domain_error("PairingLayout: each pair needs 1 <= weak < strong <= M");
        }
        for (int r : {p.weak, p.strong}) {
            if (seen[static_cast<std::size_t>(r)]) {
                throw domain_error("PairingLayout: rank " + std::to_string(r) + " appears twice");
            }
            seen[static_cast<std::size_t>(r)] = true;
        }
        if (!(p.p1 > 0.0 && p.p1 <= 0.5)) {
            throw domain_error("PairingLayout: pair P1 must lie in (0, 1/2]");
        }
        if (!(p.beta_weak < 0.0) || !(p.beta_strong < 0.0) || !std::isfinite(p.beta_weak) ||
            !std::isfinite(p.beta_strong)) {
            throw domain_error("PairingLayout: betas must be finite and < 0");
        }
    }
}

PairingLayout PairingLayout::uniform(int big_m, const std::vector<std::pair<int, int>>& ranks, double p1,
                                     double beta)
{
    std::vector<PairSpec> pairs;
    pairs.reserve(ranks.size());
    for (const auto& [a, b] : ranks) {
        pairs.push_back({a, b, p1, beta, beta});
    }
    return PairingLayout(big_m, std::move(pairs));
}

PairingLayout PairingLayout::parse(const std::string& text, int big_m, double p1, double beta)
{
    std::vector<std::pair<int, int>> ranks;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, '|')) {
        int a = 0, b = 0;
        char dash = 0;
        std::istringstream pin(item);
        if (!(pin >> a >> dash >> b) || dash != '-' || !(pin >> std::ws).eof()) {
            throw domain_error("PairingLayout: cannot parse pair '" + item + "' (expected a-b)");
        }
        ranks.emplace_back(std::min(a, b), std::max(a, b));
    }
    return uniform(big_m, ranks, p1, beta);
}

double PairingLayout::beta_of_rank(int m) const
{
    for (const auto& p : pairs_) {
        if (p.weak == m) {
            return p.beta_weak;
        }
        if (p.strong == m) {
            return p.beta_strong;
        }
    }
    throw index_error("PairingLayout: rank out of range");
}

std::string PairingLayout::to_string() const
{
    std::string s;
    for (const auto& p : pairs_) {
        if (!s.empty()) {
            s += '|';
        }
        s += std::to_string(p.weak) + "-" + std::to_string(p.strong);
    }
    return s;
}

PairTotals total_ec_pairs(const PairingLayout& layout, TransmitSnr rho, const channel::GainBatch& batch)
{
    if (batch.users() != layout.users()) {
        throw domain_error("total_ec_pairs: batch M differs from layout M");
    }
    PairTotals t;
    t.n_samples = batch.size();
    t.seed = batch.seed();
    double var_n = 0.0;
    double var_o = 0.0;
    for (const auto& p : layout.pairs()) {
        const auto power = PowerAllocation::two_user(p.p1);
        const auto weak = ec::ec_monte_carlo(ec::RateSpec::pair(rate::PairRole::weak, p.weak, p.strong, power),
                                             ec::DelayProfile::from_beta(p.beta_weak), rho, batch);
        const auto strong = ec::ec_monte_carlo(ec::RateSpec::pair(rate::PairRole::strong, p.weak, p.strong, power),
                                               ec::DelayProfile::from_beta(p.beta_strong), rho, batch);
        t.w_n += weak.value + strong.value;
        var_n += weak.std_error * weak.std_error + strong.std_error * strong.std_error;
    }
    for (int m = 1; m <= layout.users(); ++m) {
        const auto e = ec::ec_monte_carlo(ec::RateSpec::oma(m), ec::DelayProfile::from_beta(layout.beta_of_rank(m)),
                                          rho, batch);
        t.w_o += e.value;
        var_o += e.std_error * e.std_error;
    }
    t.w_n_std_error = std::sqrt(var_n);
    t.w_o_std_error = std::sqrt(var_o);
    t.diff = t.w_n - t.w_o;
    t.diff_std_error = std::sqrt(var_n + var_o);
    return t;
}

double q_moment_terms(const PairingLayout& layout, QVariant variant)
{
    const int big_m = layout.users();
    const double m = big_m;

    auto moment = [&](int rank, double power) {
        if (!(power > -rank)) {
            throw domain_error("q_constant: E[x_" + std::to_string(rank) + ":" + std::to_string(big_m) + "^" +
                               fmt(power) + "] diverges");
        }
        return channel::ordered_moment(rank, big_m, power);
    };

    double q = 0.0;
    for (const auto& p : layout.pairs()) {
        const double b1 = p.beta_weak;
        const double b2 = p.beta_strong;
        double weak = 2.0 * b1 / m * std::log2(p.p1);
        if (variant == QVariant::derived) {
            weak += std::log2(moment(p.weak, 2.0 * b1 / m)) - std::log2(moment(p.weak, b1 / m));
        } else {
            weak += std::log2(moment(p.weak, b1 / m));
        }
        q += weak / b1;
        q -= std::log2(moment(p.strong, b2 / m)) / b2;
    }
    return q;
}

QEstimate q_constant(const PairingLayout& layout, std::size_t samples, std::uint64_t seed, QVariant variant)
{
    if (samples < 2) {
        throw domain_error("q_constant: need at least two samples");
    }
    const int big_m = layout.users();
    const double m = big_m;
    double q = q_moment_terms(layout, variant);

    // (1/beta2) log2 E[(1 + P2 x_b / (P1 x_a))^{2 beta2/M}] per pair, one pass.
    std::vector<ec::MomentAccumulator> acc;
    for (const auto& p : layout.pairs()) {
        acc.emplace_back(p.beta_strong);
    }
    const auto& pairs = layout.pairs();
    channel::stream_ordered(big_m, samples, seed, [&](std::span<const double> row) {
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto& p = pairs[i];
            const double ratio = (1.0 - p.p1) / p.p1;
            const double xa = row[static_cast<std::size_t>(p.weak - 1)];
            const double xb = row[static_cast<std::size_t>(p.strong - 1)];
            acc[i].add_log(2.0 * p.beta_strong / m * std::log1p(ratio * xb / xa));
        }
    });
    double var = 0.0;
    for (const auto& a : acc) {
        const auto e = a.finish(seed);
        q += e.value;
        var += e.std_error * e.std_error;
    }

    QEstimate out;
    out.value = q;
    out.std_error = std::sqrt(var);
    out.n_samples = samples;
    out.seed = seed;
    return out;
}

std::vector<std::vector<std::pair<int, int>>> enumerate_pairings(int big_m)
{
    check_even(big_m);
    if (big_m > max_enumeration_users) {
        throw domain_error("enumerate_pairings: M above the enumeration bound of " +
                           std::to_string(max_enumeration_users));
    }
    std::vector<std::vector<std::pair<int, int>>> out;
    std::vector<std::pair<int, int>> current;
    std::vector<bool> used(static_cast<std::size_t>(big_m) + 1, false);

    // Pair the smallest free rank with each larger free rank, in order.
    auto recurse = [&](auto& self) -> void {
        int first = 0;
        for (int r = 1; r <= big_m; ++r) {
            if (!used[static_cast<std::size_t>(r)]) {
                first = r;
                break;
            }
        }
        if (first == 0) {
            out.push_back(current);
            return;
        }
        used[static_cast<std::size_t>(first)] = true;
        for (int r = first + 1; r <= big_m; ++r) {
            if (used[static_cast<std::size_t>(r)]) {
                continue;
            }
            used[static_cast<std::size_t>(r)] = true;
            current.emplace_back(first, r);
            self(self);
            current.pop_back();
            used[static_cast<std::size_t>(r)] = false;
        }
        used[static_cast<std::size_t>(first)] = false;
    };
    recurse(recurse);
    return out;
}

BestPairing best_pairing(int big_m, double p1, double beta, TransmitSnr rho, const channel::GainBatch& batch)
{
    const auto layouts = enumerate_pairings(big_m);
    std::vector<std::pair<PairingLayout, PairTotals>> all;
    all.reserve(layouts.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < layouts.size(); ++i) {
        auto layout = PairingLayout::uniform(big_m, layouts[i], p1, beta);
        auto totals = total_ec_pairs(layout, rho, batch);
        if (i == 0 || totals.w_n > all[best].second.w_n) {
            best = i;
        }
        all.emplace_back(std::move(layout), totals);
    }
    return {all[best].first, all[best].second.w_n, std::move(all)};
}

std::vector<lab::LemmaReport> check_lemma6(const PairingLayout& layout, const Lemma6Config& config)
{
    const auto batch = channel::sample_ordered(layout.users(), config.mc_samples, config.seed);
    const std::string snapshot = "layout=" + layout.to_string() + ";M=" + std::to_string(layout.users()) +
                                 ";mc_samples=" + std::to_string(config.mc_samples) +
                                 ";q_samples=" + std::to_string(config.q_samples) +
                                 ";seed=" + std::to_string(config.seed);
    std::vector<lab::LemmaReport> out;
    auto add = [&](std::string claim, double rho_db, lab::ClaimKind kind, double predicted, double measured,
                   double tolerance, double std_error) -> lab::LemmaReport& {
        lab::LemmaReport r;
        r.lemma_id = "6";
        r.claim = std::move(claim);
        r.scheme = "pairs";
        r.beta = layout.pairs().front().beta_weak;
        r.rho_db = rho_db;
        r.kind = kind;
        r.predicted = predicted;
        r.measured = measured;
        r.tolerance = tolerance;
        r.pass = lab::claim_holds(kind, predicted, measured, tolerance);
        r.std_error = std_error;
        r.n_samples = config.mc_samples;
        r.seed = config.seed;
        r.config = snapshot;
        out.push_back(std::move(r));
        return out.back();
    };
    auto diff_at = [&](double rho) { return total_ec_pairs(layout, TransmitSnr::from_linear(rho), batch).diff; };

    std::vector<double> grid = config.grid_db;
    if (grid.empty()) {
        for (int db = -10; db <= 40; ++db) {
            grid.push_back(db);
        }
    }
    for (double db : grid) {
        const auto t = total_ec_pairs(layout, TransmitSnr::from_db(db), batch);
        add("noma_pairs_not_worse", db, lab::ClaimKind::at_least, 0.0, t.diff, 3.0 * t.diff_std_error,
            t.diff_std_error)
            .note = "tolerance is 3 std_error";
    }

    // Low-SNR slope: sum_i (2 P1 - 1)/(M ln2) (E[x_a] - E[x_b]).
    double predicted = 0.0;
    for (const auto& p : layout.pairs()) {
        predicted += (2.0 * p.p1 - 1.0) / (layout.users() * ln2) *
                     (channel::ordered_moment(p.weak, layout.users(), 1.0) -
                      channel::ordered_moment(p.strong, layout.users(), 1.0));
    }
    const double low_slope = lab::finite_diff_slope(diff_at, to_linear(config.low_slope_db), config.rel_step, true);
    add("diff_slope_low_snr", config.low_slope_db, lab::ClaimKind::value, predicted, low_slope,
        0.15 * std::abs(predicted), 0.0)
        .std_error.reset();
    add("diff_slope_low_snr_nonnegative", config.low_slope_db, lab::ClaimKind::at_least, 0.0, low_slope, 0.0, 0.0)
        .std_error.reset();

    const auto q = q_constant(layout, config.q_samples, config.seed);
    const auto high = total_ec_pairs(layout, TransmitSnr::from_db(config.high_db), batch);
    auto& r = add("diff_to_q", config.high_db, lab::ClaimKind::value, q.value, high.diff, 0.05, high.diff_std_error);
    r.alternative = q.value - q_moment_terms(layout, QVariant::derived) + q_moment_terms(layout, QVariant::printed);
    r.note = "predicted is Q with the derived weak-user term (std_error " + fmt(q.std_error) +
             "); alternative is the printed form";
    const double high_slope = lab::finite_diff_slope(diff_at, to_linear(config.high_db), config.rel_step, true);
    add("diff_slope_vanishes", config.high_db, lab::ClaimKind::at_most, 0.0, std::abs(high_slope), 0.01, 0.0)
        .std_error.reset();
    return out;
}

} // namespace noma_ec::pairing
