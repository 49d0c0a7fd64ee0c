#include "noma_ec/closed_form.hpp"

#include "noma_ec/ec_engine.hpp"
#include "noma_ec/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <iostream>

using namespace noma_ec;
using doctest::Approx;

namespace {

const channel::GainBatch& batch_two()
{
    static const auto b = channel::sample_ordered(2, 1'000'000, 1);
    return b;
}

} // namespace

TEST_SUITE("closed_form")
{
    TEST_CASE("ec1 examples and the E1 identity")
    {
        const double v0 = closed::ec1_noma_closed(0.2, -1.0, TransmitSnr::from_db(0.0)).value;
        CHECK(v0 == Approx(-std::log2(10.0 * std::exp(10.0) * boost::math::expint(1, 10.0))).epsilon(1e-10));
        CHECK(v0 == Approx(0.127).epsilon(5e-3));
        const double v30 = closed::ec1_noma_closed(0.2, -1.0, TransmitSnr::from_db(30.0)).value;
        CHECK(v30 == Approx(-std::log2(0.01 * std::exp(0.01) * boost::math::expint(1, 0.01))).epsilon(1e-10));
        CHECK(v30 == Approx(4.62).epsilon(2e-3));
        CHECK(std::abs(closed::ec1_noma_closed(0.2, -1.0, TransmitSnr::from_linear(1e-8)).value) < 1e-8);
        CHECK(closed::ec1_noma_closed(0.2, -1.0, TransmitSnr::from_db(10.0)).converged);
    }

    TEST_CASE("ec1 against the Boost oracle")
    {
        for (double p1 : {0.1, 0.2, 0.4}) {
            for (double beta : {-0.3, -1.0, -2.0, -4.5}) {
                for (double db : {-10.0, 0.0, 15.0, 35.0}) {
                    const double rho = std::pow(10.0, db / 10.0);
                    CAPTURE(p1);
                    CAPTURE(beta);
                    CAPTURE(db);
                    CHECK(closed::ec1_noma_closed(p1, beta, TransmitSnr::from_linear(rho)).value ==
                          Approx(oracle::ec1(p1, beta, rho)).epsilon(1e-8));
                }
            }
        }
    }

    TEST_CASE("ec2 closed form equals quadrature within 1e-3 wherever it converges")
    {
        int skipped = 0;
        for (double p1 : {0.2, 0.4}) {
            for (double beta : {-1.0, -2.0}) {
                for (double db = -10.0; db <= 30.0; db += 5.0) {
                    const auto p = PowerAllocation::two_user(p1);
                    const auto rho = TransmitSnr::from_db(db);
                    const auto cf = closed::ec2_noma_closed(p, beta, rho, beta == -2.0 ? 200 : closed::default_k_max);
                    CAPTURE(p1);
                    CAPTURE(beta);
                    CAPTURE(db);
                    if (!cf.converged) {
                        ++skipped;
                        MESSAGE("ec2 closed form flagged non-converged: " << cf.note);
                        continue;
                    }
                    CHECK(cf.value == Approx(ec::ec2_quadrature(p, beta, rho)).epsilon(1e-3));
                    CHECK(cf.value == Approx(oracle::ec2(p1, beta, rho.linear())).epsilon(1e-3));
                }
            }
        }
        // Only the low-SNR end may be flagged.
        CHECK(skipped <= 8);
        const auto p = PowerAllocation::two_user(0.2);
        const auto at10 = closed::ec2_noma_closed(p, -1.0, TransmitSnr::from_db(10.0));
        REQUIRE(at10.converged);
        CHECK(std::abs(at10.value - ec::ec2_quadrature(p, -1.0, TransmitSnr::from_db(10.0))) < 1e-3);
    }

    TEST_CASE("ec2 closed form reports its low-SNR failure instead of returning noise")
    {
        const auto cf = closed::ec2_noma_closed(PowerAllocation::two_user(0.2), -1.0, TransmitSnr::from_linear(1e-6));
        CHECK_FALSE(cf.converged);
        CHECK_FALSE(cf.note.empty());
    }

    TEST_CASE("ec2 equal powers: only the k = 0 term survives")
    {
        const auto p = PowerAllocation::two_user(0.5);
        for (double db : {0.0, 20.0}) {
            const auto rho = TransmitSnr::from_db(db);
            const auto cf = closed::ec2_noma_closed(p, -1.0, rho);
            CHECK(cf.converged);
            CHECK(cf.terms_used == 1);
            CHECK(cf.value == Approx(ec::ec2_quadrature(p, -1.0, rho)).epsilon(1e-6));
        }
    }

    TEST_CASE("ec2 near the plateau")
    {
        const auto p = PowerAllocation::two_user(0.2);
        const auto cf = closed::ec2_noma_closed(p, -1.0, TransmitSnr::from_db(40.0));
        REQUIRE(cf.converged);
        CHECK(std::abs(cf.value - closed::ec2_high_snr_limit_quadrature(p, -1.0)) < 0.01);
    }

    TEST_CASE("ec2 closed form errors")
    {
        const auto p = PowerAllocation::two_user(0.2);
        const auto rho = TransmitSnr::from_db(10.0);
        CHECK_THROWS_AS(closed::ec2_noma_closed(p, -1.5, rho), unsupported_mode);
        CHECK_THROWS_AS(closed::ec2_noma_closed(p, 1.0, rho), domain_error);
        CHECK_THROWS_AS(closed::ec2_noma_closed(p, -1.0, TransmitSnr::from_linear(0.0)), domain_error);
        CHECK_THROWS_AS(closed::ec2_noma_closed(PowerAllocation({0.2, 0.3, 0.5}), -1.0, rho), domain_error);
        CHECK_THROWS_AS(closed::ec1_noma_closed(1.0, -1.0, rho), domain_error);
    }

    TEST_CASE("OMA variant is decided by Monte Carlo")
    {
        const auto rho = TransmitSnr::from_db(10.0);
        const auto d = ec::DelayProfile::from_beta(-1.0);
        for (int m : {1, 2}) {
            const auto e = ec::ec_monte_carlo(ec::RateSpec::oma(m), d, rho, batch_two());
            const double consistent = closed::ec_oma_closed(m, 2, -1.0, rho, closed::OmaVariant::consistent_exponent).value;
            const double printed = closed::ec_oma_closed(m, 2, -1.0, rho, closed::OmaVariant::appendix_b).value;
            CAPTURE(m);
            CHECK(std::abs(consistent - e.value) <= 3.0 * e.std_error);
            CHECK(std::abs(printed - e.value) > 3.0 * e.std_error);
        }
        CHECK(closed::default_oma_variant == closed::OmaVariant::consistent_exponent);
    }

    TEST_CASE("OMA closed form vs the Boost oracle")
    {
        for (int m : {1, 2}) {
            for (double beta : {-0.5, -1.0, -3.0}) {
                for (double db : {-10.0, 5.0, 30.0}) {
                    const double rho = std::pow(10.0, db / 10.0);
                    CAPTURE(m);
                    CAPTURE(beta);
                    CAPTURE(db);
                    CHECK(closed::ec_oma_closed(m, 2, beta, TransmitSnr::from_linear(rho)).value ==
                          Approx(oracle::oma(m, beta, rho)).epsilon(1e-8));
                }
            }
        }
        CHECK(std::abs(closed::ec_oma_closed(1, 2, -1.0, TransmitSnr::from_linear(1e-8)).value) < 1e-8);
        CHECK_THROWS_AS(closed::ec_oma_closed(3, 2, -1.0, TransmitSnr::from_db(0.0)), index_error);
    }

    TEST_CASE("OMA strong user beats NOMA strong user at 30 dB")
    {
        const auto rho = TransmitSnr::from_db(30.0);
        const auto p = PowerAllocation::two_user(0.2);
        const double oma = closed::ec_oma_closed(2, 2, -1.0, rho).value;
        CHECK(std::isfinite(oma));
        CHECK(oma > closed::ec2_noma_closed(p, -1.0, rho).value);
        const auto d = ec::DelayProfile::from_beta(-1.0);
        CHECK(ec::ec_monte_carlo(ec::RateSpec::oma(2), d, rho, batch_two()).value >
              ec::ec_monte_carlo(ec::RateSpec::noma(2, p), d, rho, batch_two()).value);
    }

    TEST_CASE("high-SNR limit: quadrature, MC and the Boost oracle")
    {
        for (double p1 : {0.2, 0.4}) {
            for (double beta : {-1.0, -2.0}) {
                const auto p = PowerAllocation::two_user(p1);
                const double q = closed::ec2_high_snr_limit_quadrature(p, beta);
                CAPTURE(p1);
                CAPTURE(beta);
                CHECK(q == Approx(oracle::ec2_limit(p1, beta)).epsilon(1e-8));
                const auto mc = closed::ec2_high_snr_limit_mc(p, beta, 1'000'000, 3);
                CHECK(std::abs(mc.value - q) <= 3.0 * mc.std_error);
            }
        }
    }

    TEST_CASE("high-SNR limit: ordering and monotone approach from below")
    {
        const double strong = closed::ec2_high_snr_limit_quadrature(PowerAllocation::two_user(0.2), -1.0);
        const double equal = closed::ec2_high_snr_limit_quadrature(PowerAllocation::two_user(0.5), -1.0);
        CHECK(strong > 0.0);
        CHECK(equal < strong);
        const auto p = PowerAllocation::two_user(0.2);
        double prev = 0.0;
        for (double db = 10.0; db <= 50.0; db += 5.0) {
            const double v = ec::ec2_quadrature(p, -1.0, TransmitSnr::from_db(db));
            CHECK(v > prev);
            CHECK(v < strong);
            prev = v;
        }
    }

    TEST_CASE("weak-user EC grows without bound at beta = -0.5")
    {
        // For beta > -1 the weak user keeps a log2(rho)-type slope, unlike the strong user's plateau.
        double prev = 0.0;
        for (double db = 20.0; db <= 60.0; db += 10.0) {
            const double v = closed::ec1_noma_closed(0.2, -0.5, TransmitSnr::from_db(db)).value;
            if (db > 20.0) {
                CHECK(v - prev > 0.8 * std::log2(10.0));
            }
            prev = v;
        }
        const double limit = closed::ec2_high_snr_limit_quadrature(PowerAllocation::two_user(0.2), -0.5);
        CHECK(ec::ec2_quadrature(PowerAllocation::two_user(0.2), -0.5, TransmitSnr::from_db(60.0)) < limit);
    }
}
