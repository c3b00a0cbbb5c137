#include "doctest.h"

#include <cmath>

#include "wgmopo/opo.hpp"

using namespace wgmopo;

TEST_SUITE("opo") {

TEST_CASE("lorentzian response") {
    CHECK(lorentzian_response(0.0) == 1.0);
    CHECK(lorentzian_response(0.5) == doctest::Approx(0.5));
    CHECK(lorentzian_response(-0.5) == doctest::Approx(0.5));
    CHECK(lorentzian_response(1.0) == doctest::Approx(0.2));
}

TEST_CASE("threshold") {
    CHECK(threshold(3e-6, 0.0, 0.0) == doctest::Approx(3e-6));
    CHECK(threshold(3e-6, 0.5, 1.0) == doctest::Approx(12e-6));
    CHECK_THROWS_AS(threshold(0.0, 0.0, 0.0), std::domain_error);
    // minimum only at zero detuning and zero mismatch
    for (double dp : {-0.4, -0.1, 0.0, 0.2, 0.7}) {
        for (double mm : {-2.0, -0.3, 0.0, 0.3, 2.0}) {
            const double p = threshold(3e-6, dp, mm);
            if (dp == 0.0 && mm == 0.0)
                CHECK(p == doctest::Approx(3e-6));
            else
                CHECK(p > 3e-6);
        }
    }
}

TEST_CASE("pair rate below threshold") {
    // suppression ratio between the resonant and the mismatched channel
    const double mismatch = 224e6 / 6.6e6;
    const double p0 = 2e-6;
    const double pp = 1e-8;
    const auto resonant = pair_rate_internal(6.6e6, 6.6e6, pp, threshold(p0, 0.0, 0.0));
    const auto detuned = pair_rate_internal(6.6e6, 6.6e6, pp, threshold(p0, 0.0, mismatch));
    const double ratio = resonant.pairs_per_s / detuned.pairs_per_s;
    CHECK(std::abs(ratio - 1152.9) / 1152.9 < 1e-3);

    // linear in pump power
    const auto doubled = pair_rate_internal(6.6e6, 6.6e6, 2 * pp, threshold(p0, 0.0, 0.0));
    CHECK(doubled.pairs_per_s == doctest::Approx(2.0 * resonant.pairs_per_s));

    // equal bandwidths collapse the prefactor to pi*gamma
    const auto equal = pair_rate_internal(5e6, 5e6, pp, 1.0);
    CHECK(equal.pairs_per_s == doctest::Approx(M_PI * 5e6 * pp).epsilon(1e-12));

    // symmetry in the bandwidths
    const auto ab = pair_rate_internal(4e6, 9e6, pp, 1.0);
    const auto ba = pair_rate_internal(9e6, 4e6, pp, 1.0);
    CHECK(ab.pairs_per_s == ba.pairs_per_s);

    CHECK_FALSE(resonant.validity_warning);
    CHECK(pair_rate_internal(6.6e6, 6.6e6, p0 / 2.0, p0).validity_warning);
    CHECK_THROWS_AS(pair_rate_internal(0.0, 6.6e6, pp, p0), std::domain_error);
}

TEST_CASE("external rates") {
    const auto r = external_rates(1000.0, 0.5, 0.5);
    CHECK(r.signal_per_s == doctest::Approx(500.0));
    CHECK(r.idler_per_s == doctest::Approx(500.0));
    CHECK(r.pair_per_s == doctest::Approx(250.0));
    const auto lim = external_rates(1000.0, 1.0 - 1e-12, 1.0 - 1e-12);
    CHECK(lim.pair_per_s == doctest::Approx(1000.0).epsilon(1e-9));
    for (double ks : {0.1, 0.4, 0.9}) {
        for (double ki : {0.2, 0.6, 0.95}) {
            const auto e = external_rates(1000.0, ks, ki);
            CHECK(e.pair_per_s <= std::min(e.signal_per_s, e.idler_per_s));
        }
    }
    CHECK_THROWS_AS(external_rates(1000.0, 0.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(external_rates(1000.0, 0.5, 1.0), std::domain_error);
}

TEST_CASE("output power onset and continuity") {
    const double p0 = 3e-6;
    const double nu_s = 3.35e14, nu_p = 5.64e14;
    // exactly at threshold the bracket vanishes
    const auto at = output_power(threshold(p0, 0.0, 0.0), p0, 0.0, 0.0, 0.5, 0.5, nu_s, nu_p);
    CHECK(at.watts == doctest::Approx(0.0).epsilon(1e-12));
    // continuity across threshold for detuned operation
    for (auto [dp, mm] : {std::pair{0.0, 0.0}, std::pair{0.3, 0.5}, std::pair{-0.2, 0.8}}) {
        const double pth = threshold(p0, dp, mm);
        const auto below = output_power(pth * (1.0 - 1e-9), p0, dp, mm, 0.5, 0.5, nu_s, nu_p);
        const auto above = output_power(pth * (1.0 + 1e-9), p0, dp, mm, 0.5, 0.5, nu_s, nu_p);
        CHECK(below.below_threshold);
        CHECK(std::abs(above.watts - below.watts) < 1e-9 * p0 + 1e-15);
    }
    // even in the mismatch at zero pump detuning
    const auto plus = output_power(20 * p0, p0, 0.0, 1.3, 0.5, 0.5, nu_s, nu_p);
    const auto minus = output_power(20 * p0, p0, 0.0, -1.3, 0.5, 0.5, nu_s, nu_p);
    CHECK(plus.watts == doctest::Approx(minus.watts).epsilon(1e-12));
}

TEST_CASE("maximum conversion efficiency at four times the minimal threshold") {
    const double p0 = 3e-6;
    const double nu_s = 3.35e14, nu_p = 5.64e14;
    // grid-search oracle over pump power
    double best_x = 0.0, best_eta = -1.0;
    for (double x = 1.0; x <= 20.0; x += 1e-3) {
        const auto out = output_power(x * p0, p0, 0.0, 0.0, 0.5, 0.5, nu_s, nu_p);
        const double eta = out.watts / (x * p0);
        if (eta > best_eta) {
            best_eta = eta;
            best_x = x;
        }
    }
    CHECK(best_x == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("photon-number bookkeeping for equal couplings") {
    const double p0 = 3e-6;
    const double nu_p = 5.64e14, nu_s = 3.35e14, nu_i = nu_p - nu_s;
    const auto ps = output_power(9 * p0, p0, 0.0, 0.0, 0.5, 0.6, nu_s, nu_p);
    const auto pi = output_power(9 * p0, p0, 0.0, 0.0, 0.5, 0.6, nu_i, nu_p);
    CHECK(ps.watts / nu_s == doctest::Approx(pi.watts / nu_i).epsilon(1e-12));
}

TEST_CASE("oscillation condition locks the joint detuning") {
    OperatingPoint op;
    op.mismatch = 1.4;
    op.delta_s = op.delta_i = op.oscillation_detuning();
    CHECK(op.delta_s == doctest::Approx(0.7));
    CHECK(op.delta_s == op.delta_i);
}

TEST_CASE("cavity mode bookkeeping") {
    CavityMode m{3e14, 4e6, 2e6};
    CHECK(m.bandwidth_hz() == doctest::Approx(6e6));
    CHECK(m.coupling_ratio() == doctest::Approx(4.0 / 6.0));
    CHECK(m.detuning(3e14 + 3e6) == doctest::Approx(0.5));
    CavityMode bad{3e14, 1e6, 0.0};
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

}
