#ifndef NOMA_EC_PAIRING_HPP
#define NOMA_EC_PAIRING_HPP

// M users split into M/2 NOMA pairs that share the frame by TDMA. Users are
// ranked globally by gain on every block; pair (a, b) takes ranks a < b.

#include "noma_ec/asymptotics.hpp"
#include "noma_ec/channel_model.hpp"
#include "noma_ec/ec_engine.hpp"
#include "noma_ec/rate_model.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace noma_ec::pairing {

struct PairSpec {
    int weak = 0;   ///< global rank of the weak member
    int strong = 0; ///< global rank of the strong member
    double p1 = 0.2;
    double beta_weak = -1.0;
    double beta_strong = -1.0;
};

class PairingLayout {
public:
    /// Validates that pairs partition 1..M, weak < strong, 0 < P1 <= 1/2, beta < 0.
    PairingLayout(int big_m, std::vector<PairSpec> pairs);

    /// Every pair uses the same P1 and beta.
    static PairingLayout uniform(int big_m, const std::vector<std::pair<int, int>>& ranks, double p1,
                                 double beta);
    /// Parses "1-2|3-4" (pair members in either order).
    static PairingLayout parse(const std::string& text, int big_m, double p1, double beta);

    int users() const { return big_m_; }
    const std::vector<PairSpec>& pairs() const { return pairs_; }
    /// beta of the user holding global rank m.
    double beta_of_rank(int m) const;
    /// "1-2|3-4", pairs in stored order.
    std::string to_string() const;

private:
    int big_m_;
    std::vector<PairSpec> pairs_;
};

struct PairTotals {
    double w_n = 0.0;
    double w_o = 0.0;
    double w_n_std_error = 0.0;
    double w_o_std_error = 0.0;
    /// W_N - W_O and its error, summing per-user errors in quadrature.
    double diff = 0.0;
    double diff_std_error = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

/// W_N sums pair ECs with exponent 2 beta/M; W_O sums TDMA ECs with beta/M.
PairTotals total_ec_pairs(const PairingLayout& layout, TransmitSnr rho, const channel::GainBatch& batch);

/// Which expression the weak-user term of Q follows.
enum class QVariant {
    /// (1/beta1)[log2(P1^{2beta1/M} E[x_a^{2beta1/M}]) - log2 E[x_a^{beta1/M}]],
    /// the rho -> inf limit of the pair EC minus the TDMA EC.
    derived,
    /// (1/beta1) log2(P1^{2beta1/M} E[x_a^{beta1/M}]) as printed in the source.
    printed,
};

inline constexpr QVariant default_q_variant = QVariant::derived;

struct QEstimate {
    double value = 0.0;
    double std_error = 0.0; ///< from the two-dimensional Monte Carlo term only
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

inline constexpr std::size_t default_q_samples = 10'000'000;

/// The part of Q built from one-dimensional rank moments (no sampling).
double q_moment_terms(const PairingLayout& layout, QVariant variant = default_q_variant);

/// High-SNR limit of W_N - W_O. One-dimensional moments come from
/// ordered_moment; E[(1 + P2 x_b/(P1 x_a))^{2 beta2/M}] from streaming Monte Carlo.
/// Throws domain_error if a needed moment diverges (power <= -rank).
QEstimate q_constant(const PairingLayout& layout, std::size_t samples = default_q_samples,
                     std::uint64_t seed = 1, QVariant variant = default_q_variant);

inline constexpr int max_enumeration_users = 12;

/// All (M-1)!! perfect matchings of 1..M in lexicographic order, each pair
/// as (lower rank, higher rank).
std::vector<std::vector<std::pair<int, int>>> enumerate_pairings(int big_m);

struct BestPairing {
    PairingLayout layout;
    double w_n;
    /// Totals of every enumerated layout, in enumeration order.
    std::vector<std::pair<PairingLayout, PairTotals>> all;
};

/// Exhaustive argmax of W_N with the same P1 and beta in every pair; the
/// first layout in enumeration order wins ties.
BestPairing best_pairing(int big_m, double p1, double beta, TransmitSnr rho, const channel::GainBatch& batch);

struct Lemma6Config {
    std::vector<double> grid_db; ///< empty means -10:1:40
    double low_slope_db = -40.0;
    double high_db = 50.0;
    double rel_step = 1e-2;
    std::size_t mc_samples = 1'000'000;
    std::size_t q_samples = default_q_samples;
    std::uint64_t seed = 1;
};

/// W_N - W_O >= -3 std_error on the grid, low-SNR slope within 15% of the
/// rank-moment formula, and the 50 dB value within 0.05 of Q with a vanishing slope.
std::vector<lab::LemmaReport> check_lemma6(const PairingLayout& layout, const Lemma6Config& config);

} // namespace noma_ec::pairing

#endif
