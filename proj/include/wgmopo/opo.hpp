#pragma once

#include <cmath>
#include <stdexcept>

namespace wgmopo {

// One cavity resonance: position plus the coupling/loss split of its width.
struct CavityMode {
    double nu_res_hz = 0.0;
    double gamma_coupling_hz = 0.0; // gamma'
    double gamma_loss_hz = 0.0;     // gamma''

    double bandwidth_hz() const { return gamma_coupling_hz + gamma_loss_hz; }
    double coupling_ratio() const { return gamma_coupling_hz / bandwidth_hz(); }
    double detuning(double nu_hz) const { return (nu_hz - nu_res_hz) / bandwidth_hz(); }

    void validate() const {
        if (gamma_coupling_hz < 0.0) throw std::domain_error("coupling rate gamma' must be >= 0");
        if (!(gamma_loss_hz > 0.0)) throw std::domain_error("loss rate gamma'' must be > 0");
    }
};

struct OperatingPoint {
    double delta_p = 0.0;
    double delta_s = 0.0;
    double delta_i = 0.0;
    double mismatch = 0.0; // dimensionless PDC mismatch Delta
    double pump_power_w = 0.0;
    double minimal_threshold_w = 0.0; // P_0

    // Above threshold the oscillation condition locks the joint parametric
    // detuning to half the mismatch.
    double oscillation_detuning() const { return mismatch / 2.0; }
};

inline double lorentzian_response(double delta) { return 1.0 / (1.0 + 4.0 * delta * delta); }

inline double threshold(double p0_w, double delta_p, double mismatch) {
    if (!(p0_w > 0.0)) throw std::domain_error("minimal threshold P_0 must be positive");
    return p0_w * (1.0 + 4.0 * delta_p * delta_p) * (1.0 + mismatch * mismatch);
}

struct PairRate {
    double pairs_per_s = 0.0;
    // Set when P_p is not far below threshold (P_p >= P_th / 10), where the
    // low-gain expression stops being trustworthy.
    bool validity_warning = false;
};

inline PairRate pair_rate_internal(double gamma_s_hz, double gamma_i_hz, double pump_power_w,
                                   double threshold_w) {
    if (!(gamma_s_hz > 0.0) || !(gamma_i_hz > 0.0))
        throw std::domain_error("signal/idler bandwidths must be positive");
    if (!(threshold_w > 0.0)) throw std::domain_error("threshold power must be positive");
    PairRate r;
    r.pairs_per_s = 2.0 * M_PI * (gamma_s_hz * gamma_i_hz / (gamma_s_hz + gamma_i_hz))
                    * (pump_power_w / threshold_w);
    r.validity_warning = pump_power_w >= threshold_w / 10.0;
    return r;
}

struct ExternalRates {
    double signal_per_s = 0.0;
    double idler_per_s = 0.0;
    double pair_per_s = 0.0;
};

inline ExternalRates external_rates(double pair_rate_internal_per_s, double kappa_s,
                                    double kappa_i) {
    if (!(kappa_s > 0.0 && kappa_s < 1.0) || !(kappa_i > 0.0 && kappa_i < 1.0))
        throw std::domain_error("coupling ratios kappa must lie in (0, 1)");
    return {kappa_s * pair_rate_internal_per_s, kappa_i * pair_rate_internal_per_s,
            kappa_s * kappa_i * pair_rate_internal_per_s};
}

struct OutputPower {
    double watts = 0.0;
    bool below_threshold = false;
};

// Bright output power above threshold; clamps to zero (flagged) below it so
// threshold sweeps cross cleanly instead of throwing.
inline OutputPower output_power(double pump_power_w, double p0_w, double delta_p,
                                double mismatch, double kappa_p, double kappa_si,
                                double nu_si_hz, double nu_p_hz) {
    if (!(p0_w > 0.0)) throw std::domain_error("minimal threshold P_0 must be positive");
    const double radicand = pump_power_w / p0_w
                            - (mismatch + 2.0 * delta_p) * (mismatch + 2.0 * delta_p);
    OutputPower out;
    if (radicand < 0.0) {
        out.below_threshold = true;
        return out;
    }
    const double bracket = std::sqrt(radicand) - 1.0 + 2.0 * delta_p * mismatch;
    if (bracket <= 0.0) {
        out.below_threshold = true;
        return out;
    }
    out.watts = 4.0 * kappa_p * kappa_si * p0_w * (nu_si_hz / nu_p_hz) * bracket;
    return out;
}

} // namespace wgmopo
