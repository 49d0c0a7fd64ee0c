#include "noma_ec/pairing.hpp"

#include "noma_ec/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace noma_ec;
using doctest::Approx;

namespace {

const channel::GainBatch& batch_four()
{
    static const auto b = channel::sample_ordered(4, 1'000'000, 1);
    return b;
}

pairing::PairingLayout four(const std::string& text)
{
    return pairing::PairingLayout::parse(text, 4, 0.2, -1.0);
}

} // namespace

TEST_SUITE("pairing")
{
    TEST_CASE("enumeration counts and order")
    {
        CHECK(pairing::enumerate_pairings(2).size() == 1);
        CHECK(pairing::enumerate_pairings(4).size() == 3);
        CHECK(pairing::enumerate_pairings(6).size() == 15);
        CHECK(pairing::enumerate_pairings(8).size() == 105);
        const auto l = pairing::enumerate_pairings(4);
        using P = std::vector<std::pair<int, int>>;
        CHECK(l[0] == P{{1, 2}, {3, 4}});
        CHECK(l[1] == P{{1, 3}, {2, 4}});
        CHECK(l[2] == P{{1, 4}, {2, 3}});
        CHECK_THROWS_AS(pairing::enumerate_pairings(3), domain_error);
        CHECK_THROWS_AS(pairing::enumerate_pairings(0), domain_error);
        CHECK_THROWS_AS(pairing::enumerate_pairings(14), domain_error);
    }

    TEST_CASE("layout validation and text round trip")
    {
        const auto l = pairing::PairingLayout::parse("2-1|4-3", 4, 0.2, -1.0);
        CHECK(l.to_string() == "1-2|3-4");
        CHECK(l.pairs()[1].weak == 3);
        CHECK(l.beta_of_rank(4) == -1.0);
        CHECK_THROWS_AS(l.beta_of_rank(5), index_error);
        CHECK_THROWS_AS(pairing::PairingLayout::parse("1-2|2-3", 4, 0.2, -1.0), domain_error);
        CHECK_THROWS_AS(pairing::PairingLayout::parse("1-2", 4, 0.2, -1.0), domain_error);
        CHECK_THROWS_AS(pairing::PairingLayout::parse("1-5|2-3", 4, 0.2, -1.0), domain_error);
        CHECK_THROWS_AS(pairing::PairingLayout::parse("1x2|3-4", 4, 0.2, -1.0), domain_error);
        CHECK_THROWS_AS(pairing::PairingLayout::parse("1-2|3-4", 4, 0.7, -1.0), domain_error);
        CHECK_THROWS_AS(pairing::PairingLayout::parse("1-2|3-4", 4, 0.2, 0.0), domain_error);
        CHECK_THROWS_AS(pairing::PairingLayout::parse("1-2|3-4", 3, 0.2, -1.0), domain_error);
    }

    TEST_CASE("M = 2 reduces to the two-user totals")
    {
        lab::LabConfig cfg;
        cfg.method = lab::EcMethod::monte_carlo;
        cfg.mc_samples = 300'000;
        cfg.seed = 5;
        const lab::TwoUserModel model(cfg);
        const auto batch = channel::sample_ordered(2, 300'000, 5);
        const auto layout = pairing::PairingLayout::parse("1-2", 2, 0.2, -1.0);
        for (double db : {-5.0, 15.0, 35.0}) {
            const double rho = std::pow(10.0, db / 10.0);
            const auto t = pairing::total_ec_pairs(layout, TransmitSnr::from_linear(rho), batch);
            CHECK(t.w_n == Approx(model.total(ec::Scheme::noma, rho)).epsilon(1e-10));
            CHECK(t.w_o == Approx(model.total(ec::Scheme::oma, rho)).epsilon(1e-10));
        }
    }

    TEST_CASE("difference vanishes as rho -> 0")
    {
        for (const auto& text : {"1-2|3-4", "1-3|2-4", "1-4|2-3"}) {
            const auto t = pairing::total_ec_pairs(four(text), TransmitSnr::from_db(-50.0), batch_four());
            CHECK(std::abs(t.diff) < 1e-4);
        }
    }

    TEST_CASE("difference is within 0.05 of Q at 50 dB")
    {
        for (const auto& text : {"1-2|3-4", "1-3|2-4", "1-4|2-3"}) {
            const auto l = four(text);
            const auto q = pairing::q_constant(l, 2'000'000, 2);
            const auto t40 = pairing::total_ec_pairs(l, TransmitSnr::from_db(40.0), batch_four());
            const auto t50 = pairing::total_ec_pairs(l, TransmitSnr::from_db(50.0), batch_four());
            CAPTURE(text);
            CHECK(std::abs(t50.diff - q.value) < 0.05);
            // Approach from above: the residual shrinks with rho.
            CHECK(std::abs(t50.diff - q.value) < std::abs(t40.diff - q.value));
        }
    }

    // The 40 dB version of the check misses by about 0.064: the rank-1 moment
    // E[(1 + rho P1 x)^{-1/2}] reaches its rho^{-1/2} asymptote only with a
    // relative correction of order rho^{-1/2}. Kept at the stated tolerance.
    TEST_CASE("difference is within 0.05 of Q at 40 dB" * doctest::may_fail())
    {
        for (const auto& text : {"1-2|3-4", "1-3|2-4", "1-4|2-3"}) {
            const auto l = four(text);
            const auto q = pairing::q_constant(l, 2'000'000, 2);
            const auto t40 = pairing::total_ec_pairs(l, TransmitSnr::from_db(40.0), batch_four());
            CAPTURE(text);
            CHECK(std::abs(t40.diff - q.value) < 0.05);
        }
    }

    TEST_CASE("derived Q matches the simulated limit; the printed form does not")
    {
        const auto l = four("1-4|2-3");
        const auto derived = pairing::q_constant(l, 2'000'000, 2, pairing::QVariant::derived);
        const auto printed = pairing::q_constant(l, 2'000'000, 2, pairing::QVariant::printed);
        const double diff = pairing::total_ec_pairs(l, TransmitSnr::from_db(50.0), batch_four()).diff;
        CHECK(derived.value > 0.0);
        CHECK(std::abs(diff - derived.value) < 0.05);
        CHECK(std::abs(diff - printed.value) > 0.1);
        CHECK(printed.value - derived.value ==
              Approx(pairing::q_moment_terms(l, pairing::QVariant::printed) - pairing::q_moment_terms(l, pairing::QVariant::derived))
                  .epsilon(1e-12));
    }

    TEST_CASE("doubling strong-user betas changes only the strong-user terms")
    {
        auto base = four("1-4|2-3");
        std::vector<pairing::PairSpec> doubled = base.pairs();
        for (auto& p : doubled) {
            p.beta_strong *= 2.0;
        }
        const pairing::PairingLayout l2(4, doubled);
        double expected = 0.0;
        for (const auto& p : base.pairs()) {
            const double b = p.beta_strong;
            expected += -std::log2(channel::ordered_moment(p.strong, 4, 2.0 * b / 4.0)) / (2.0 * b) +
                        std::log2(channel::ordered_moment(p.strong, 4, b / 4.0)) / b;
        }
        CHECK(pairing::q_moment_terms(l2) - pairing::q_moment_terms(base) == Approx(expected).epsilon(1e-10));
    }

    TEST_CASE("divergent rank moments are rejected")
    {
        // 2 beta / M = -1 at rank 1: E[x_1^{-1}] is infinite.
        const auto l = pairing::PairingLayout::parse("1-2|3-4", 4, 0.2, -2.0);
        CHECK_THROWS_AS(pairing::q_moment_terms(l), domain_error);
        CHECK_THROWS_AS(pairing::q_constant(l, 1000), domain_error);
        CHECK_NOTHROW(pairing::q_moment_terms(pairing::PairingLayout::parse("1-2|3-4", 4, 0.2, -1.9)));
        CHECK_THROWS_AS(pairing::q_constant(four("1-2|3-4"), 1), domain_error);
    }

    TEST_CASE("best pairing")
    {
        const auto rho = TransmitSnr::from_db(20.0);
        const auto b2 = channel::sample_ordered(2, 10'000, 1);
        const auto one = pairing::best_pairing(2, 0.2, -1.0, rho, b2);
        CHECK(one.layout.to_string() == "1-2");
        CHECK(one.all.size() == 1);

        const auto a = pairing::best_pairing(4, 0.2, -1.0, rho, batch_four());
        const auto other = pairing::best_pairing(4, 0.2, -1.0, rho, channel::sample_ordered(4, 1'000'000, 2));
        CHECK(a.layout.to_string() == other.layout.to_string());
        CHECK(a.all.size() == 3);
        for (const auto& [layout, t] : a.all) {
            CHECK(t.w_n <= a.w_n);
        }
        const auto again = pairing::best_pairing(4, 0.2, -1.0, rho, batch_four());
        CHECK(again.w_n == a.w_n);
        CHECK(again.layout.to_string() == a.layout.to_string());

        // Constant gains make every layout tie; the first one wins.
        const std::vector<double> g{1.0, 1.0, 1.0, 1.0};
        const auto tie = pairing::best_pairing(4, 0.2, -1.0, rho, channel::GainBatch::constant(g, 10));
        CHECK(tie.layout.to_string() == "1-2|3-4");
    }

    TEST_CASE("totals: error propagation and batch checks")
    {
        const auto t = pairing::total_ec_pairs(four("1-3|2-4"), TransmitSnr::from_db(10.0), batch_four());
        CHECK(t.diff == Approx(t.w_n - t.w_o).epsilon(1e-15));
        CHECK(t.diff_std_error == Approx(std::hypot(t.w_n_std_error, t.w_o_std_error)).epsilon(1e-12));
        CHECK(t.n_samples == 1'000'000);
        CHECK_THROWS_AS(pairing::total_ec_pairs(four("1-2|3-4"), TransmitSnr::from_db(0.0), channel::sample_ordered(2, 10, 1)),
                        domain_error);
    }

    TEST_CASE("lemma 6 low-SNR slope on every M = 4 layout")
    {
        pairing::Lemma6Config cfg;
        cfg.grid_db = {-10.0, 10.0, 30.0};
        cfg.mc_samples = 300'000;
        cfg.q_samples = 1'000'000;
        for (const auto& text : {"1-2|3-4", "1-3|2-4", "1-4|2-3"}) {
            const auto rs = pairing::check_lemma6(four(text), cfg);
            CHECK(rs.size() == 7);
            for (const auto& r : rs) {
                CAPTURE(text);
                CAPTURE(r.claim);
                CHECK(r.lemma_id == "6");
                if (r.claim == "diff_slope_low_snr" || r.claim == "diff_slope_low_snr_nonnegative") {
                    CHECK(r.pass);
                }
            }
        }
    }
}
