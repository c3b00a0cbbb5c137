#pragma once

// Test-side re-implementation of the eigenfrequency evaluation, kept
// independent of DispersionModel: long-double accumulation, reversed term
// order, and a wavelength-domain fixed point instead of the frequency one.

#include <cmath>

#include "wgmopo/dispersion.hpp"

namespace oracle {

inline long double airy_root_ld(int q) {
    return powl(4.712388980384689858L * (q - 0.25L), 2.0L / 3.0L); // 3*pi/2 = 4.712...
}

inline double mode_frequency(const wgmopo::DispersionModel& model, const wgmopo::ModeIndex& idx,
                             double temperature_c) {
    const auto& mat = model.material();
    const auto& g = model.geometry();
    const long double c = 2.99792458e8L;
    const long double R =
        mat.radius_at_temperature(g.major_radius_m, g.reference_temperature_c, temperature_c);
    const long double rho =
        mat.radius_at_temperature(g.rim_curvature_m, g.reference_temperature_c, temperature_c);
    const long double rr = sqrtl(R / rho);
    const long double l = static_cast<long double>(idx.m) + idx.p;
    const long double aq = model.options().exact_airy
                               ? static_cast<long double>(wgmopo::airy_root_exact(idx.q))
                               : airy_root_ld(idx.q);

    long double lambda = 532e-9L * 64756.0L / static_cast<long double>(idx.m + idx.p);
    // crude seed; wavelength-domain iteration to machine precision
    lambda = 2.0L * 3.14159265358979323846L * 2.2L * R / l;
    for (int it = 0; it < 400; ++it) {
        const long double n =
            mat.refractive_index(wgmopo::axis_for(idx.pol), static_cast<double>(lambda),
                                 temperature_c);
        // reversed term order relative to the library implementation
        long double bracket = 0.5L * rr;
        bracket -= (idx.pol == wgmopo::Polarization::TE)
                       ? n / sqrtl(n * n - 1.0L)
                       : 1.0L / (n * sqrtl(n * n - 1.0L));
        bracket += idx.p * (rr - 1.0L);
        bracket += aq * cbrtl(l / 2.0L);
        bracket += l;
        const long double nu = c * bracket / (2.0L * 3.14159265358979323846L * n * R);
        const long double next = c / nu;
        if (fabsl(next - lambda) < 1e-22L * lambda + 1e-30L) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return static_cast<double>(c / lambda);
}

} // namespace oracle
