#ifndef NOMA_EC_CHANNEL_MODEL_HPP
#define NOMA_EC_CHANNEL_MODEL_HPP

// Rayleigh block fading with unit-mean exponential squared gains, their order
// statistics, and reproducible sampling of sorted gain vectors.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace noma_ec::channel {

struct PdfCdf {
    double pdf;
    double cdf;
};

/// Exp(1) density and distribution at x >= 0.
PdfCdf marginal_pdf_cdf(double x);

/// Density of the m-th smallest of M i.i.d. Exp(1) gains.
double ordered_pdf(int m, int big_m, double x);

/// Joint density of (x1, x2) = (min, max) of two Exp(1) gains; zero off the wedge.
double joint_pdf_two(double x1, double x2);

/// Joint density of the a-th and b-th order statistics (a < b) of M gains.
double joint_ordered_pdf(int a, int b, int big_m, double x, double y);

/// E[x_{m:M}^power] by quadrature. Finite iff power > -m.
double ordered_moment(int m, int big_m, double power);

/// Sorted gains x_1 <= ... <= x_M of one fading block.
class OrderedGainSample {
public:
    explicit OrderedGainSample(std::vector<double> gains);

    std::span<const double> gains() const { return gains_; }
    std::size_t size() const { return gains_.size(); }
    /// 1-based rank access, matching user indices.
    double rank(int m) const;

    bool operator==(const OrderedGainSample&) const = default;

private:
    std::vector<double> gains_;
};

/// A batch of sorted gain vectors stored row-major, one row per sample.
class GainBatch {
public:
    GainBatch(int users, std::uint64_t seed, std::vector<double> data);

    int users() const { return users_; }
    std::size_t size() const { return data_.size() / static_cast<std::size_t>(users_); }
    std::uint64_t seed() const { return seed_; }

    std::span<const double> row(std::size_t i) const
    {
        return {data_.data() + i * static_cast<std::size_t>(users_), static_cast<std::size_t>(users_)};
    }
    OrderedGainSample sample(std::size_t i) const;

    /// Batch whose every sample is the same gain vector (degenerate fading).
    static GainBatch constant(std::span<const double> gains, std::size_t count);

    bool operator==(const GainBatch&) const = default;

private:
    int users_;
    std::uint64_t seed_;
    std::vector<double> data_;
};

/// Samples per independently seeded chunk. Chunk k draws from a generator
/// seeded by mix(seed, k), so chunks can be produced in any order.
inline constexpr std::size_t sampling_chunk = 1 << 16;

/// Visits the same rows sample_ordered(M, count, seed) would hold, without
/// materializing them. `visit` receives each row as std::span<const double>.
template <class Visit>
void stream_ordered(int big_m, std::size_t count, std::uint64_t seed, Visit&& visit);

/// `count` sorted vectors of M i.i.d. Exp(1) draws; deterministic in (M, count, seed).
GainBatch sample_ordered(int big_m, std::size_t count, std::uint64_t seed);

/// Derives the seed of stream `index` from a master seed (SplitMix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

namespace detail {
void fill_chunk(int big_m, std::uint64_t seed, std::size_t chunk, std::size_t rows, double* out);
} // namespace detail

template <class Visit>
void stream_ordered(int big_m, std::size_t count, std::uint64_t seed, Visit&& visit)
{
    const auto m = static_cast<std::size_t>(big_m);
    std::vector<double> buffer(sampling_chunk * m);
    for (std::size_t chunk = 0; chunk * sampling_chunk < count; ++chunk) {
        const std::size_t rows = std::min(sampling_chunk, count - chunk * sampling_chunk);
        detail::fill_chunk(big_m, seed, chunk, rows, buffer.data());
        for (std::size_t i = 0; i < rows; ++i) {
            visit(std::span<const double>(buffer.data() + i * m, m));
        }
    }
}

} // namespace noma_ec::channel

#endif
