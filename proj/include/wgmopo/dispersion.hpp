#pragma once

#include <utility>

#include "wgmopo/material.hpp"

namespace wgmopo {

struct ResonatorGeometry {
    double major_radius_m = 0.0;   // R
    double rim_curvature_m = 0.0;  // rho
    double thickness_m = 0.0;      // h, used by electro-optics only
    double reference_temperature_c = 25.0; // temperature at which R, rho are quoted

    void validate() const;
};

struct ModeIndex {
    long m = 1;                    // azimuthal, >= 1
    int q = 1;                     // radial, >= 1
    int p = 0;                     // angular, >= 0
    Polarization pol = Polarization::TE;

    long polar_l() const { return m + p; }
    void validate() const;
};

// q-th Airy root, closed-form approximation [3pi/2 (q - 1/4)]^(2/3).
double airy_root(int q);
// Exact magnitudes of the first zeros of Ai, q <= 20.
double airy_root_exact(int q);

struct DispersionOptions {
    bool exact_airy = false;
    double convergence_tol_hz = 1e3;
    int max_iterations = 100;
};

// Eigenfrequencies of the spheroidal resonator from the asymptotic
// dispersion relation, self-consistent in n(lambda = c/nu, T).
class DispersionModel {
public:
    DispersionModel(ResonatorGeometry geom, MaterialModel material,
                    DispersionOptions options = {});

    double mode_frequency(const ModeIndex& idx, double temperature_c) const;
    // Continuous azimuthal number; used by phase-match seeding.
    double mode_frequency_continuous(double m, int q, int p, Polarization pol,
                                     double temperature_c) const;
    // Continuous m solving the dispersion relation for a given frequency.
    double azimuthal_number_continuous(double nu_hz, int q, int p, Polarization pol,
                                       double temperature_c) const;
    std::pair<long, double> find_azimuthal_number(double nu_target_hz, int q, int p,
                                                  Polarization pol, double temperature_c) const;
    double free_spectral_range(const ModeIndex& idx, double temperature_c) const;

    static double effective_index(double m, double nu_hz, double radius_m);

    double radius(double temperature_c) const;
    double rim_curvature(double temperature_c) const;
    const ResonatorGeometry& geometry() const { return geom_; }
    const MaterialModel& material() const { return material_; }
    const DispersionOptions& options() const { return options_; }

private:
    double alpha_q(int q) const;
    double bracket(double l, int q, int p, Polarization pol, double n,
                   double temperature_c) const;

    ResonatorGeometry geom_;
    MaterialModel material_;
    DispersionOptions options_;
};

} // namespace wgmopo
