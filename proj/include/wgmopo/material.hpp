#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace wgmopo {

inline constexpr double speed_of_light = 2.99792458e8; // m/s
inline constexpr char version_string[] = "0.1.0";

enum class Polarization { TE, TM };
enum class OpticalAxis { Ordinary, Extraordinary };

// z-cut crystal, optic axis along the resonator symmetry axis:
// TE modes see the extraordinary index, TM modes the ordinary one.
inline OpticalAxis axis_for(Polarization pol) {
    return pol == Polarization::TE ? OpticalAxis::Extraordinary : OpticalAxis::Ordinary;
}

// One UV-side Sellmeier pole whose resonance wavelength shifts with the
// phonon occupancy measure F(T): lambda0(T) = lambda0 + thermal_shift * F(T).
struct SellmeierPole {
    double amplitude_per_m2 = 0.0;
    double wavelength_m = 0.0;
    double thermal_shift_m_per_K2 = 0.0;
};

struct SellmeierAxis {
    std::vector<SellmeierPole> poles;
    double ir_amplitude_per_m2 = 0.0; // subtractive lambda^2 tail
    double constant = 0.0;            // plasmonic offset in n^2
};

struct ThermalExpansion {
    double linear_per_K = 0.0;
    double quadratic_per_K2 = 0.0;
    double reference_temperature_c = 25.0;
    double relative_change(double temperature_c) const {
        const double d = temperature_c - reference_temperature_c;
        return linear_per_K * d + quadratic_per_K2 * d * d;
    }
};

struct ElectroOpticCoefficients {
    double r_extraordinary_m_per_v = 0.0;
    double r_ordinary_m_per_v = 0.0;
};

// Affine map from solver temperatures to the empirical device scale.
struct TemperatureCalibration {
    double slope = 1.0;
    double offset_c = 0.0;
    double apply(double t_raw_c) const { return slope * t_raw_c + offset_c; }
    double invert(double t_cal_c) const { return (t_cal_c - offset_c) / slope; }
};

class MaterialModel {
public:
    static constexpr double min_wavelength_m = 0.40e-6;
    static constexpr double max_wavelength_m = 2.60e-6;
    static constexpr double min_temperature_c = 20.0;
    static constexpr double max_temperature_c = 250.0;

    MaterialModel() = default;
    MaterialModel(SellmeierAxis ordinary, SellmeierAxis extraordinary,
                  ThermalExpansion expansion, ElectroOpticCoefficients electrooptic,
                  TemperatureCalibration calibration, double mgo_fraction_percent,
                  std::string name);

    // Built-in coefficient set for the 5.8% MgO-doped congruent lithium
    // niobate resonator host (identical to assets/mgo_linbo3.material).
    static MaterialModel default_mg_linbo3();
    static MaterialModel from_file(const std::filesystem::path& path);

    double refractive_index(OpticalAxis axis, double wavelength_m, double temperature_c) const;
    double refractive_index(Polarization pol, double wavelength_m, double temperature_c) const {
        return refractive_index(axis_for(pol), wavelength_m, temperature_c);
    }

    // Analytic partials of the Sellmeier form, same domain checks.
    double dn_dwavelength(OpticalAxis axis, double wavelength_m, double temperature_c) const;
    double dn_dtemperature(OpticalAxis axis, double wavelength_m, double temperature_c) const;
    double group_index(OpticalAxis axis, double wavelength_m, double temperature_c) const;

    double radius_at_temperature(double r_ref_m, double t_ref_c, double temperature_c) const;

    // Linear electro-optic index change for a bias applied across thickness h.
    double electrooptic_index_shift(OpticalAxis axis, double wavelength_m,
                                    double temperature_c, double u_bias_v,
                                    double h_m, double fringe_factor = 1.0) const;
    double electrooptic_index_shift(Polarization pol, double wavelength_m,
                                    double temperature_c, double u_bias_v,
                                    double h_m, double fringe_factor = 1.0) const {
        return electrooptic_index_shift(axis_for(pol), wavelength_m, temperature_c,
                                        u_bias_v, h_m, fringe_factor);
    }

    double calibrate_temperature(double t_raw_c) const { return calibration_.apply(t_raw_c); }
    double uncalibrate_temperature(double t_cal_c) const { return calibration_.invert(t_cal_c); }

    const TemperatureCalibration& calibration() const { return calibration_; }
    const ElectroOpticCoefficients& electrooptic() const { return electrooptic_; }
    const ThermalExpansion& expansion() const { return expansion_; }
    double mgo_fraction_percent() const { return mgo_fraction_percent_; }
    const std::string& name() const { return name_; }

    static void check_domain(double wavelength_m, double temperature_c);

private:
    const SellmeierAxis& axis(OpticalAxis a) const {
        return a == OpticalAxis::Ordinary ? ordinary_ : extraordinary_;
    }
    SellmeierAxis ordinary_;
    SellmeierAxis extraordinary_;
    ThermalExpansion expansion_;
    ElectroOpticCoefficients electrooptic_;
    TemperatureCalibration calibration_;
    double mgo_fraction_percent_ = 0.0;
    std::string name_;
};

// Phonon occupancy measure used by the thermal Sellmeier shift, in K^2,
// referenced to 24.5 C so F(24.5 C) = 0.
double phonon_measure(double temperature_c);

} // namespace wgmopo
