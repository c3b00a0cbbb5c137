#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "wgmopo/correlation.hpp"

using namespace wgmopo;

namespace {

// composite Simpson on [a, b]
template <typename F>
double simpson(F&& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double heralded_integral(double t1, double t2) {
    const double neg = simpson([&](double t) { return heralded_density(t, t1, t2); },
                               -45.0 * t1, 0.0, 40000);
    const double pos = simpson([&](double t) { return heralded_density(t, t1, t2); }, 0.0,
                               45.0 * std::max(t1, t2), 60000);
    return neg + pos;
}

Histogram synth_heralded(double t1, double t2, double peak, double bg, unsigned seed,
                         double lo_ns = -60.0, double hi_ns = 250.0) {
    Histogram h;
    h.bin_width_s = 1e-9;
    std::mt19937_64 rng(seed);
    const double amp = peak / heralded_density(0.0, t1, t2);
    for (double t = lo_ns; t <= hi_ns; t += 1.0) {
        const double mu = amp * heralded_density(t * 1e-9, t1, t2) + bg;
        std::poisson_distribution<long> pois(mu);
        h.bin_centers_s.push_back(t * 1e-9);
        h.counts.push_back(static_cast<double>(pois(rng)));
    }
    return h;
}

} // namespace

TEST_SUITE("correlation") {

TEST_CASE("pair density") {
    const double t1 = 24e-9;
    CHECK(pair_density(0.0, t1) == doctest::Approx(1.0 / (2.0 * t1)).epsilon(1e-15));
    for (double t : {3e-9, 17e-9, 120e-9})
        CHECK(pair_density(t, t1) == doctest::Approx(pair_density(-t, t1)).epsilon(1e-15));
    const double integral =
        simpson([&](double t) { return pair_density(t, t1); }, -20.0 * t1, 20.0 * t1, 40000);
    CHECK(std::abs(integral - 1.0) < 1e-6);
    CHECK_THROWS_AS(pair_density(0.0, 0.0), std::domain_error);
}

TEST_CASE("heralded density branch continuity at zero") {
    const double t1 = 7.4e-9, t2 = 37e-9;
    // both closed-form branches evaluated at zero delay
    const double branch_neg = 0.5 * std::exp(0.0 / t1) / (t1 + t2);
    const double branch_pos = 0.5 * (std::exp(0.0) / (t1 + t2) + 0.0);
    CHECK(std::abs(branch_neg - branch_pos) / branch_neg < 1e-12);
    CHECK(heralded_density(0.0, t1, t2) == doctest::Approx(branch_neg).epsilon(1e-12));
    // one-sided derivatives agree: the density stays smooth through zero
    const double eps = 1e-13;
    const double dleft = (heralded_density(0.0, t1, t2) - heralded_density(-eps, t1, t2)) / eps;
    const double dright = (heralded_density(eps, t1, t2) - heralded_density(0.0, t1, t2)) / eps;
    CHECK(dleft == doctest::Approx(dright).epsilon(1e-4));
}

TEST_CASE("heralded density normalization") {
    CHECK(std::abs(heralded_integral(7.4e-9, 37e-9) - 1.0) < 1e-6);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ut(1e-9, 100e-9);
    for (int k = 0; k < 20; ++k) {
        const double t1 = ut(rng), t2 = ut(rng);
        CHECK(std::abs(heralded_integral(t1, t2) - 1.0) < 1e-6);
    }
}

TEST_CASE("heralded density nonnegative, pure exponential on the negative side") {
    const double t1 = 7.4e-9, t2 = 37e-9;
    for (double t = -80e-9; t <= 300e-9; t += 0.5e-9)
        CHECK(heralded_density(t, t1, t2) >= 0.0);
    // log-slope 1/t1 identifies t1 on the negative branch
    const double a = heralded_density(-5e-9, t1, t2);
    const double b = heralded_density(-25e-9, t1, t2);
    CHECK(std::log(a / b) == doctest::Approx(20e-9 / t1).epsilon(1e-12));
}

TEST_CASE("degenerate lifetimes: removable singularity") {
    const double t1 = 10e-9;
    // analytic limit: P(dt) = exp(-dt/t1)/2 * (1/(2 t1) + dt/t1^2)
    for (double dt : {0.0, 2e-9, 10e-9, 50e-9}) {
        const double limit = 0.5 * std::exp(-dt / t1) * (0.5 / t1 + dt / (t1 * t1));
        CHECK(heralded_density(dt, t1, t1) == doctest::Approx(limit).epsilon(1e-12));
        // approaching the diagonal is smooth
        CHECK(heralded_density(dt, t1, t1 * (1.0 + 1e-9))
              == doctest::Approx(limit).epsilon(1e-7));
        CHECK(heralded_density(dt, t1, t1 * (1.0 - 1e-9))
              == doctest::Approx(limit).epsilon(1e-7));
    }
}

TEST_CASE("heralded converges to the pair density as t2 vanishes") {
    const double t1 = 20e-9;
    const double t2 = t1 / 1e3;
    double sup = 0.0;
    for (double t = -5.0 * t1; t <= 5.0 * t1; t += t1 / 50.0)
        sup = std::max(sup, std::abs(heralded_density(t, t1, t2) - pair_density(t, t1)));
    CHECK(sup < 1e-3 * pair_density(0.0, t1));
}

TEST_CASE("bandwidth conversions") {
    CHECK(bandwidth_from_time(7.4e-9) == doctest::Approx(21.5e6).epsilon(0.005));
    CHECK(bandwidth_from_time(37e-9) == doctest::Approx(4.3e6).epsilon(0.005));
    CHECK(time_from_bandwidth(bandwidth_from_time(13e-9)) == doctest::Approx(13e-9));
    CHECK_THROWS_AS(bandwidth_from_time(0.0), std::domain_error);
}

TEST_CASE("histogram parsing accepts csv and whitespace text") {
    const Histogram a = Histogram::from_text("time_ns,counts\n0,5\n1,7\n2,6\n");
    CHECK(a.bin_width_s == doctest::Approx(1e-9));
    CHECK(a.counts == std::vector<double>{5, 7, 6});
    const Histogram b = Histogram::from_text("# comment\n-1 4\n0 9\n1 5\n");
    CHECK(b.bin_centers_s[0] == doctest::Approx(-1e-9));
    CHECK_THROWS(Histogram::from_text("0,1\n0.5,2\n2,3\n")); // non-uniform
    CHECK_THROWS(Histogram::from_text("just text\n"));
}

TEST_CASE("fit recovers heralded parameters from synthetic data") {
    const Histogram h = synth_heralded(7.4e-9, 37e-9, 1e4, 40.0, 2024);
    const FitResult fit = fit_histogram(h, CorrelationFamily::Heralded);
    CHECK(fit.status == FitStatus::Converged);
    CHECK(fit.model.t1_s == doctest::Approx(7.4e-9).epsilon(0.05));
    CHECK(fit.model.t2_s == doctest::Approx(37e-9).epsilon(0.05));
    CHECK(fit.model.background == doctest::Approx(40.0).epsilon(0.25));
    CHECK(fit.n_bins == static_cast<int>(h.counts.size()));
    CHECK(fit.chi2 > 0.0);

    // swapped initial guess converges to the same parameter set
    CorrelationModel swapped;
    swapped.t1_s = 37e-9;
    swapped.t2_s = 7.4e-9;
    const FitResult fit2 = fit_histogram(h, CorrelationFamily::Heralded, swapped);
    CHECK(fit2.model.t1_s == doctest::Approx(fit.model.t1_s).epsilon(1e-3));
    CHECK(fit2.model.t2_s == doctest::Approx(fit.model.t2_s).epsilon(1e-3));
}

TEST_CASE("fit recovers pair parameters and the quoted bandwidth") {
    const double t1 = 24e-9; // 6.6 MHz ring-down
    Histogram h;
    h.bin_width_s = 1e-9;
    std::mt19937_64 rng(77);
    const double amp = 8e3 / pair_density(0.0, t1);
    for (double t = -150.0; t <= 150.0; t += 1.0) {
        const double mu = amp * pair_density(t * 1e-9, t1) + 25.0;
        std::poisson_distribution<long> pois(mu);
        h.bin_centers_s.push_back(t * 1e-9);
        h.counts.push_back(static_cast<double>(pois(rng)));
    }
    const FitResult fit = fit_histogram(h, CorrelationFamily::Pair);
    CHECK(fit.status == FitStatus::Converged);
    CHECK(fit.model.t1_s == doctest::Approx(t1).epsilon(0.05));
    CHECK(bandwidth_from_time(fit.model.t1_s) == doctest::Approx(6.6e6).epsilon(0.05));
    // standard errors are reported and small for this statistics level
    REQUIRE(fit.std_errors.size() == 4);
    CHECK(fit.std_errors[0] > 0.0);
    CHECK(fit.std_errors[0] < 0.05 * fit.model.t1_s);
}

TEST_CASE("fit preconditions and degenerate data") {
    Histogram tiny;
    tiny.bin_width_s = 1e-9;
    for (int i = 0; i < 10; ++i) {
        tiny.bin_centers_s.push_back(i * 1e-9);
        tiny.counts.push_back(5.0);
    }
    CHECK_THROWS_AS(fit_histogram(tiny, CorrelationFamily::Pair), std::domain_error);

    Histogram flat;
    flat.bin_width_s = 1e-9;
    for (int i = 0; i < 64; ++i) {
        flat.bin_centers_s.push_back(i * 1e-9);
        flat.counts.push_back(7.0);
    }
    const FitResult fit = fit_histogram(flat, CorrelationFamily::Pair);
    CHECK(fit.status == FitStatus::FlatData);
    CHECK(fit.model.background == doctest::Approx(7.0));
}

TEST_CASE("fit is unbiased over repeated synthetic draws") {
    const double t1 = 7.4e-9, t2 = 37e-9;
    std::vector<double> t1s, t2s;
    for (unsigned rep = 0; rep < 50; ++rep) {
        const Histogram h = synth_heralded(t1, t2, 2000.0, 10.0, 9000 + rep);
        const FitResult fit = fit_histogram(h, CorrelationFamily::Heralded);
        if (fit.status != FitStatus::Converged) continue;
        t1s.push_back(fit.model.t1_s);
        t2s.push_back(fit.model.t2_s);
    }
    REQUIRE(t1s.size() >= 45);
    const auto mean_se = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= v.size();
        double s2 = 0.0;
        for (double x : v) s2 += (x - m) * (x - m);
        s2 /= (v.size() - 1);
        return std::pair{m, std::sqrt(s2 / v.size())};
    };
    const auto [m1, se1] = mean_se(t1s);
    const auto [m2, se2] = mean_se(t2s);
    CHECK(std::abs(m1 - t1) < 2.0 * se1 + 1e-12);
    CHECK(std::abs(m2 - t2) < 2.0 * se2 + 1e-12);
}

}
