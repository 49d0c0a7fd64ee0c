#ifndef NOMA_EC_CLI_RUNNER_HPP
#define NOMA_EC_CLI_RUNNER_HPP

// Batch driver behind the noma_ec command-line tool: configuration, command
// dispatch, CSV rows and the run manifest.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace noma_ec::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_check_failed = 2,
    exit_config = 64,
    exit_numeric = 70,
    exit_io = 74,
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inclusive dB grid start:stop:step; a lone value is a one-point grid.
struct SnrRange {
    double start = -10.0;
    double stop = 30.0;
    double step = 1.0;

    static SnrRange parse(const std::string& text);
    std::vector<double> points() const;
    std::string to_string() const;
};

struct ExperimentConfig {
    std::string command;
    std::optional<SnrRange> snr; ///< unset means the command's default grid
    double p1 = 0.2;
    std::vector<double> betas{-1.0};
    std::optional<int> users; ///< M; 2 for two-user commands, 4 for pairing
    std::size_t mc_samples = 1'000'000;
    std::uint64_t seed = 1;
    std::string output; ///< empty writes the CSV to stdout and skips the manifest
    std::vector<std::string> schemes{"noma", "oma"};
    int user = 0; ///< 0 selects every user
    std::string lemma_id = "all";
    std::string layout; ///< pairing: empty enumerates every layout
    std::string method = "numeric";

    /// Throws ConfigError on any invariant violation.
    void validate() const;
};

inline const std::vector<std::string>& commands()
{
    static const std::vector<std::string> c{"curves", "validate", "lemma", "pairing", "special-selftest"};
    return c;
}

/// Default seed: NOMA_EC_SEED if set (ConfigError unless an unsigned integer), else 1.
std::uint64_t default_seed();

/// Flat "key = value" text; '#' starts a comment. Keys match the long flag
/// names, with '-' or '_' accepted interchangeably.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies one key/value pair to `config`; unknown keys are a ConfigError.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

struct CsvRow {
    std::optional<double> rho_db;
    std::string scheme;
    int user = 0; ///< 0 prints an empty cell
    std::optional<double> beta;
    std::string metric;
    double value = 0.0;
    std::optional<double> std_error;
    std::optional<std::size_t> n_samples;
    std::optional<std::uint64_t> seed;
    std::optional<bool> pass;
};

inline constexpr const char* csv_header = "rho_db,scheme,user,beta,metric,value,std_error,n_samples,seed,pass";

std::string format_csv(const std::vector<CsvRow>& rows);
/// Writes header and rows; IoError on failure or an empty row set.
void emit_csv(const std::vector<CsvRow>& rows, const std::string& path);

/// Computes the rows of one command. Numeric failures propagate.
std::vector<CsvRow> run_command(const ExperimentConfig& config);

/// Full run: rows, CSV, manifest, exit status. Errors are reported on `err`.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err,
        const std::string& git_describe = "unknown");

} // namespace noma_ec::cli

#endif
