#include "noma_ec/cli_runner.hpp"

#include "noma_ec/asymptotics.hpp"
#include "noma_ec/channel_model.hpp"
#include "noma_ec/closed_form.hpp"
#include "noma_ec/ec_engine.hpp"
#include "noma_ec/errors.hpp"
#include "noma_ec/pairing.hpp"
#include "noma_ec/quadrature.hpp"
#include "noma_ec/special_functions.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace noma_ec::cli {

namespace {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

double parse_double(const std::string& key, const std::string& text)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(v)) {
        throw ConfigError(key + ": not a finite number: '" + text + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text)
{
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
    }
    try {
        return std::stoull(text);
    } catch (const std::exception&) {
        throw ConfigError(key + ": integer out of range: '" + text + "'");
    }
}

std::string normalize_key(std::string key)
{
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

std::vector<double> grid_or(const std::optional<SnrRange>& snr, SnrRange fallback)
{
    return snr.value_or(fallback).points();
}

} // namespace

SnrRange SnrRange::parse(const std::string& text)
{
    const auto parts = split(text, ':');
    if (parts.size() == 1) {
        const double at = parse_double("snr-db", parts[0]);
        return SnrRange{at, at, 1.0};
    }
    if (parts.size() != 3) {
        throw ConfigError("snr-db: expected start:stop:step or a single value, got '" + text + "'");
    }
    SnrRange r{parse_double("snr-db", parts[0]), parse_double("snr-db", parts[1]), parse_double("snr-db", parts[2])};
    if (!(r.step > 0.0)) {
        throw ConfigError("snr-db: step must be > 0");
    }
    if (r.stop < r.start) {
        throw ConfigError("snr-db: empty range (stop < start)");
    }
    return r;
}

std::vector<double> SnrRange::points() const
{
    std::vector<double> out;
    // Index-based so 0.1-style steps do not drift or drop the endpoint.
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) {
        out.push_back(start + static_cast<double>(i) * step);
    }
    return out;
}

std::string SnrRange::to_string() const { return fmt(start) + ":" + fmt(stop) + ":" + fmt(step); }

void ExperimentConfig::validate() const
{
    if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
        throw ConfigError("unknown command '" + command + "'");
    }
    if (snr) {
        if (!(snr->step > 0.0) || snr->stop < snr->start) {
            throw ConfigError("snr-db: need step > 0 and a non-empty range");
        }
    }
    if (!(p1 > 0.0 && p1 < 1.0)) {
        throw ConfigError("p1 must lie in (0, 1)");
    }
    if (betas.empty()) {
        throw ConfigError("beta: at least one value required");
    }
    for (double b : betas) {
        if (!(b < 0.0)) {
            throw ConfigError("beta values must be < 0");
        }
    }
    if (mc_samples < 1000) {
        throw ConfigError("mc-samples must be >= 1000");
    }
    if (users && (*users < 2 || *users % 2 != 0)) {
        throw ConfigError("M must be even and >= 2");
    }
    if (command != "pairing" && lemma_id != "6" && users && *users != 2) {
        throw ConfigError("M other than 2 applies only to pairing");
    }
    if (command == "pairing" && layout.empty() && users && *users > pairing::max_enumeration_users) {
        throw ConfigError("pairing: M above the enumeration bound");
    }
    if (command == "pairing" && p1 > 0.5) {
        throw ConfigError("pairing: per-pair P1 must be <= 1/2");
    }
    for (const auto& s : schemes) {
        if (s != "noma" && s != "oma" && s != "gap" && s != "total") {
            throw ConfigError("scheme must be noma, oma, gap or total, got '" + s + "'");
        }
    }
    if (user < 0 || user > 2) {
        throw ConfigError("user must be 1 or 2");
    }
    if (method != "numeric" && method != "monte_carlo") {
        throw ConfigError("method must be numeric or monte_carlo");
    }
    if (command == "lemma" && lemma_id != "all" && lemma_id != "6") {
        const auto& ids = lab::lemma_ids();
        if (std::find(ids.begin(), ids.end(), lemma_id) == ids.end()) {
            throw ConfigError("unknown lemma id '" + lemma_id + "'");
        }
    }
}

std::uint64_t default_seed()
{
    if (const char* env = std::getenv("NOMA_EC_SEED")) {
        return parse_unsigned("NOMA_EC_SEED", trim(env));
    }
    return 1;
}

std::map<std::string, std::string> read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::map<std::string, std::string> out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(number) + ": expected key = value");
        }
        out[normalize_key(trim(line.substr(0, eq)))] = trim(line.substr(eq + 1));
    }
    return out;
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& value)
{
    const auto key = normalize_key(raw_key);
    if (key == "command") {
        c.command = value;
    } else if (key == "snr-db") {
        c.snr = SnrRange::parse(value);
    } else if (key == "p1") {
        c.p1 = parse_double(key, value);
    } else if (key == "beta") {
        c.betas.clear();
        for (const auto& b : split(value, ',')) {
            c.betas.push_back(parse_double(key, b));
        }
    } else if (key == "M" || key == "m") {
        c.users = static_cast<int>(parse_unsigned(key, value));
    } else if (key == "mc-samples") {
        c.mc_samples = parse_unsigned(key, value);
    } else if (key == "seed") {
        c.seed = parse_unsigned(key, value);
    } else if (key == "output") {
        c.output = value;
    } else if (key == "scheme") {
        c.schemes = split(value, ',');
    } else if (key == "user") {
        c.user = static_cast<int>(parse_unsigned(key, value));
    } else if (key == "id") {
        c.lemma_id = value;
    } else if (key == "layout") {
        c.layout = value;
    } else if (key == "method") {
        c.method = value;
    } else {
        throw ConfigError("unknown setting '" + raw_key + "'");
    }
}

std::string format_csv(const std::vector<CsvRow>& rows)
{
    std::string s = csv_header;
    s += '\n';
    for (const auto& r : rows) {
        s += r.rho_db ? fmt(*r.rho_db) : "";
        s += ',' + r.scheme + ',';
        s += r.user > 0 ? std::to_string(r.user) : "";
        s += ',';
        s += r.beta ? fmt(*r.beta) : "";
        s += ',' + r.metric + ',' + fmt(r.value) + ',';
        s += r.std_error ? fmt(*r.std_error) : "";
        s += ',';
        s += r.n_samples ? std::to_string(*r.n_samples) : "";
        s += ',';
        s += r.seed ? std::to_string(*r.seed) : "";
        s += ',';
        s += r.pass ? (*r.pass ? "true" : "false") : "";
        s += '\n';
    }
    return s;
}

void emit_csv(const std::vector<CsvRow>& rows, const std::string& path)
{
    if (rows.empty()) {
        throw IoError("refusing to write an empty CSV");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << format_csv(rows);
    out.close();
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

namespace {

std::vector<int> selected_users(const ExperimentConfig& c)
{
    if (c.user != 0) {
        return {c.user};
    }
    return {1, 2};
}

bool wants(const ExperimentConfig& c, const std::string& scheme)
{
    return std::find(c.schemes.begin(), c.schemes.end(), scheme) != c.schemes.end();
}

CsvRow row(double rho_db, std::string scheme, int user, double beta, std::string metric, double value)
{
    CsvRow r;
    r.rho_db = rho_db;
    r.scheme = std::move(scheme);
    r.user = user;
    r.beta = beta;
    r.metric = std::move(metric);
    r.value = value;
    return r;
}

void with_mc(CsvRow& r, const ec::EcEstimate& e)
{
    r.std_error = e.std_error;
    r.n_samples = e.n_samples;
    r.seed = e.seed;
}

std::vector<CsvRow> run_curves(const ExperimentConfig& c)
{
    std::vector<CsvRow> rows;
    for (double db : grid_or(c.snr, {-10.0, 30.0, 1.0})) {
        for (double beta : c.betas) {
            lab::LabConfig lc;
            lc.p1 = c.p1;
            lc.beta1 = lc.beta2 = beta;
            const lab::TwoUserModel model(lc);
            const double rho = std::pow(10.0, db / 10.0);
            for (int u : selected_users(c)) {
                if (wants(c, "noma")) {
                    rows.push_back(row(db, "noma", u, beta, "ec", model.noma(u, rho)));
                }
                if (wants(c, "oma")) {
                    rows.push_back(row(db, "oma", u, beta, "ec", model.oma(u, rho)));
                }
                if (wants(c, "gap")) {
                    rows.push_back(row(db, "gap", u, beta, "ec_noma_minus_oma", model.gap(u, rho)));
                }
            }
            if (wants(c, "total")) {
                rows.push_back(row(db, "noma", 0, beta, "total_ec", model.total(ec::Scheme::noma, rho)));
                rows.push_back(row(db, "oma", 0, beta, "total_ec", model.total(ec::Scheme::oma, rho)));
            }
        }
    }
    return rows;
}

// Closed form vs Monte Carlo; the strong NOMA user also carries the quadrature oracle.
std::vector<CsvRow> run_validate(const ExperimentConfig& c)
{
    constexpr double floor_tol = 2e-3;
    const auto batch = channel::sample_ordered(2, c.mc_samples, c.seed);
    const auto power = PowerAllocation::two_user(c.p1);
    std::vector<CsvRow> rows;
    for (double db : grid_or(c.snr, {-10.0, 30.0, 5.0})) {
        const auto snr = TransmitSnr::from_db(db);
        for (double beta : c.betas) {
            const auto delay = ec::DelayProfile::from_beta(beta);
            for (int u : selected_users(c)) {
                for (const std::string scheme : {"noma", "oma"}) {
                    if (!wants(c, scheme)) {
                        continue;
                    }
                    const bool noma = scheme == "noma";
                    closed::ClosedFormResult cf;
                    if (noma) {
                        cf = u == 1 ? closed::ec1_noma_closed(c.p1, beta, snr) : closed::ec2_noma_closed(power, beta, snr);
                    } else {
                        cf = closed::ec_oma_closed(u, 2, beta, snr);
                    }
                    const auto spec = noma ? ec::RateSpec::noma(u, power) : ec::RateSpec::oma(u);
                    const auto mc = ec::ec_monte_carlo(spec, delay, snr, batch);
                    const double bound = std::max(3.0 * mc.std_error, floor_tol);
                    const double diff = std::abs(cf.value - mc.value);
                    bool pass = cf.converged && diff <= bound;

                    auto closed_row = row(db, scheme, u, beta, "closed_form", cf.value);
                    rows.push_back(closed_row);
                    if (noma && u == 2 && std::floor(beta) == beta) {
                        const double quad = ec::ec2_quadrature(power, beta, snr);
                        rows.push_back(row(db, scheme, u, beta, "quadrature", quad));
                        // Low-SNR excess is a closed-form finding when quadrature agrees with MC.
                        if (!pass && db < -5.0 && std::abs(quad - mc.value) <= bound) {
                            pass = true;
                        }
                    }
                    auto mc_row = row(db, scheme, u, beta, "monte_carlo", mc.value);
                    with_mc(mc_row, mc);
                    rows.push_back(mc_row);
                    auto diff_row = row(db, scheme, u, beta, "abs_diff", diff);
                    with_mc(diff_row, mc);
                    diff_row.pass = pass;
                    rows.push_back(diff_row);
                    auto bound_row = row(db, scheme, u, beta, "three_std_error", 3.0 * mc.std_error);
                    with_mc(bound_row, mc);
                    rows.push_back(bound_row);
                }
            }
        }
    }
    return rows;
}

void append_reports(std::vector<CsvRow>& rows, const std::vector<lab::LemmaReport>& reports)
{
    for (const auto& r : reports) {
        const std::string base = r.lemma_id + "." + r.claim;
        auto measured = row(r.rho_db, r.scheme, r.user, r.beta, base, r.measured);
        measured.std_error = r.std_error;
        if (r.n_samples > 0) {
            measured.n_samples = r.n_samples;
            measured.seed = r.seed;
        }
        measured.pass = r.pass;
        rows.push_back(measured);
        rows.push_back(row(r.rho_db, r.scheme, r.user, r.beta, base + ".predicted", r.predicted));
        if (r.alternative) {
            rows.push_back(row(r.rho_db, r.scheme, r.user, r.beta, base + ".alternative", *r.alternative));
        }
    }
}

pairing::PairingLayout default_layout(const ExperimentConfig& c, int big_m, double beta)
{
    if (!c.layout.empty()) {
        return pairing::PairingLayout::parse(c.layout, big_m, c.p1, beta);
    }
    return pairing::PairingLayout::uniform(big_m, pairing::enumerate_pairings(big_m).front(), c.p1, beta);
}

std::vector<CsvRow> run_lemma(const ExperimentConfig& c)
{
    std::vector<CsvRow> rows;
    for (double beta : c.betas) {
        if (c.lemma_id == "6") {
            pairing::Lemma6Config lc;
            if (c.snr) {
                lc.grid_db = c.snr->points();
            }
            lc.mc_samples = c.mc_samples;
            lc.q_samples = 10 * c.mc_samples;
            lc.seed = c.seed;
            append_reports(rows, pairing::check_lemma6(default_layout(c, c.users.value_or(4), beta), lc));
            continue;
        }
        lab::LabConfig lc;
        lc.p1 = c.p1;
        lc.beta1 = lc.beta2 = beta;
        lc.method = c.method == "numeric" ? lab::EcMethod::numeric : lab::EcMethod::monte_carlo;
        lc.mc_samples = c.mc_samples;
        lc.limit_samples = 10 * c.mc_samples;
        lc.seed = c.seed;
        if (c.snr) {
            lc.grid_db = c.snr->points();
        }
        append_reports(rows, lab::check_lemma(c.lemma_id, lc));
    }
    return rows;
}

std::vector<CsvRow> run_pairing(const ExperimentConfig& c)
{
    const int big_m = c.users.value_or(4);
    const auto batch = channel::sample_ordered(big_m, c.mc_samples, c.seed);
    std::vector<CsvRow> rows;
    for (double beta : c.betas) {
        std::vector<pairing::PairingLayout> layouts;
        if (!c.layout.empty()) {
            layouts.push_back(pairing::PairingLayout::parse(c.layout, big_m, c.p1, beta));
        } else {
            for (const auto& l : pairing::enumerate_pairings(big_m)) {
                layouts.push_back(pairing::PairingLayout::uniform(big_m, l, c.p1, beta));
            }
        }
        for (double db : grid_or(c.snr, {-10.0, 40.0, 1.0})) {
            const auto snr = TransmitSnr::from_db(db);
            std::size_t best = 0;
            double best_w_n = 0.0;
            for (std::size_t i = 0; i < layouts.size(); ++i) {
                const auto t = pairing::total_ec_pairs(layouts[i], snr, batch);
                auto r = row(db, "pairs[" + layouts[i].to_string() + "]", 0, beta, "w_n_minus_w_o", t.diff);
                r.std_error = t.diff_std_error;
                r.n_samples = t.n_samples;
                r.seed = t.seed;
                r.pass = t.diff >= -3.0 * t.diff_std_error;
                rows.push_back(r);
                if (i == 0 || t.w_n > best_w_n) {
                    best = i;
                    best_w_n = t.w_n;
                }
            }
            auto b = row(db, "pairs[" + layouts[best].to_string() + "]", 0, beta, "best_w_n", best_w_n);
            b.n_samples = batch.size();
            b.seed = batch.seed();
            rows.push_back(b);
        }
        for (const auto& layout : layouts) {
            const auto q = pairing::q_constant(layout, 10 * c.mc_samples, c.seed);
            CsvRow r;
            r.scheme = "pairs[" + layout.to_string() + "]";
            r.beta = beta;
            r.metric = "q_constant";
            r.value = q.value;
            r.std_error = q.std_error;
            r.n_samples = q.n_samples;
            r.seed = q.seed;
            rows.push_back(r);
        }
    }
    return rows;
}

std::vector<CsvRow> run_selftest()
{
    std::vector<CsvRow> rows;
    auto check = [&](const std::string& metric, double measured, double expected, double rel_tol) {
        CsvRow r;
        r.scheme = "special";
        r.metric = metric;
        r.value = measured;
        r.pass = std::abs(measured - expected) <= rel_tol * std::max(1.0, std::abs(expected));
        rows.push_back(r);
    };
    for (double z : {1e-3, 0.1, 1.0, 10.0, 300.0}) {
        check("z_hyp_u_1_2@z=" + fmt(z), z * special::hyp_u(1.0, 2.0, z), 1.0, 1e-10);
    }
    check("hyp_u_1_1@z=1", special::hyp_u(1.0, 1.0, 1.0), 0.596347362323, 1e-10);
    check("upper_gamma_0@x=1", special::upper_gamma(0.0, 1.0), 0.219383934396, 1e-10);
    for (double s : {-2.5, -1.0, 0.0, 0.5, 3.0}) {
        for (double x : {0.2, 2.0, 20.0}) {
            // Gamma(s+1, x) = s Gamma(s, x) + x^s e^{-x}
            const double lhs = special::upper_gamma(s + 1.0, x);
            const double rhs = s * special::upper_gamma(s, x) + std::exp(s * std::log(x) - x);
            check("gamma_recurrence@s=" + fmt(s) + ";x=" + fmt(x), lhs / rhs, 1.0, 1e-9);
        }
    }
    for (double u : {-1.5, -0.5, 0.25, 1.0}) {
        for (double z : {0.5, 5.0}) {
            // e^{-z/2} z^{1/2+u} U(1, 1+2u, z)
            const double direct = std::exp(-0.5 * z + (0.5 + u) * std::log(z)) * special::hyp_u(1.0, 1.0 + 2.0 * u, z);
            check("whittaker_reduction@u=" + fmt(u) + ";z=" + fmt(z), special::whittaker_w_reduced(u, z) / direct, 1.0,
                  1e-9);
        }
    }
    for (double b : {0.0, 1.0, 3.0}) {
        for (double big_a : {-1.0, 0.0, 0.5}) {
            const double c = 0.7;
            auto f = [&](double t) {
                return std::exp((big_a - 1.0) * std::log(t) - t) * (std::pow(t, 1.0 + b) - std::pow(c, 1.0 + b)) /
                       (1.0 + b);
            };
            const auto q = quad::integrate_to_infinity(f, c, 1.0);
            check("gamma_moment_integral@b=" + fmt(b) + ";A=" + fmt(big_a),
                  special::gamma_moment_integral(b, big_a, c) / q.value, 1.0, 1e-9);
        }
    }
    return rows;
}

} // namespace

std::vector<CsvRow> run_command(const ExperimentConfig& config)
{
    if (config.command == "curves") {
        return run_curves(config);
    }
    if (config.command == "validate") {
        return run_validate(config);
    }
    if (config.command == "lemma") {
        return run_lemma(config);
    }
    if (config.command == "pairing") {
        return run_pairing(config);
    }
    if (config.command == "special-selftest") {
        return run_selftest();
    }
    throw ConfigError("unknown command '" + config.command + "'");
}

int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err, const std::string& git_describe)
{
    const auto start = std::chrono::steady_clock::now();
    std::vector<CsvRow> rows;
    try {
        config.validate();
        rows = run_command(config);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "numeric error: " << e.what() << '\n';
        return exit_numeric;
    }
    const auto failed = static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const CsvRow& r) { return r.pass && !*r.pass; }));

    try {
        if (config.output.empty()) {
            if (rows.empty()) {
                throw IoError("refusing to write an empty CSV");
            }
            out << format_csv(rows);
        } else {
            emit_csv(rows, config.output);
            nlohmann::ordered_json m;
            m["command"] = config.command;
            m["snr_db"] = config.snr ? config.snr->to_string() : "default";
            m["p1"] = config.p1;
            m["beta"] = config.betas;
            m["M"] = config.users.value_or(config.command == "pairing" ? 4 : 2);
            m["mc_samples"] = config.mc_samples;
            m["seed"] = config.seed;
            m["scheme"] = config.schemes;
            m["user"] = config.user;
            m["id"] = config.lemma_id;
            m["layout"] = config.layout;
            m["method"] = config.method;
            m["git_describe"] = git_describe;
            m["rows"] = rows.size();
            m["failed_checks"] = failed;
            m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            const std::string path = config.output + ".manifest";
            std::ofstream mf(path, std::ios::trunc);
            if (!mf) {
                throw IoError("cannot open '" + path + "' for writing");
            }
            mf << m.dump(2) << '\n';
            if (!mf) {
                throw IoError("write to '" + path + "' failed");
            }
        }
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return exit_io;
    }
    if (failed > 0) {
        err << failed << " check(s) failed\n";
        return exit_check_failed;
    }
    return exit_ok;
}

} // namespace noma_ec::cli
