#include "wgmopo/material.hpp"

#include <cmath>
#include <sstream>

#include "wgmopo/config.hpp"
#include "wgmopo/errors.hpp"

namespace wgmopo {

namespace {

constexpr double phonon_theta_k = 261.6;      // effective phonon temperature
constexpr double phonon_weight_k2 = 4.0238e5; // occupancy weight
constexpr double phonon_ref_c = 24.5;

double phonon_raw(double temperature_c) {
    const double th = temperature_c + 273.16;
    return th * th + phonon_weight_k2 * (1.0 / std::tanh(phonon_theta_k / th) - 1.0);
}

double dphonon_dT(double temperature_c) {
    const double th = temperature_c + 273.16;
    const double s = std::sinh(phonon_theta_k / th);
    return 2.0 * th + phonon_weight_k2 * phonon_theta_k / (th * th * s * s);
}

} // namespace

double phonon_measure(double temperature_c) {
    static const double ref = phonon_raw(phonon_ref_c);
    return phonon_raw(temperature_c) - ref;
}

MaterialModel::MaterialModel(SellmeierAxis ordinary, SellmeierAxis extraordinary,
                             ThermalExpansion expansion, ElectroOpticCoefficients electrooptic,
                             TemperatureCalibration calibration, double mgo_fraction_percent,
                             std::string name)
    : ordinary_(std::move(ordinary)),
      extraordinary_(std::move(extraordinary)),
      expansion_(expansion),
      electrooptic_(electrooptic),
      calibration_(calibration),
      mgo_fraction_percent_(mgo_fraction_percent),
      name_(std::move(name)) {
    if (expansion_.linear_per_K <= 0.0)
        throw std::domain_error("thermal expansion coefficient must be positive");
    if (calibration_.slope <= 0.0)
        throw std::domain_error("temperature calibration must be strictly increasing");
}

void MaterialModel::check_domain(double wavelength_m, double temperature_c) {
    std::ostringstream msg;
    if (!(wavelength_m >= min_wavelength_m)) {
        msg << "wavelength " << wavelength_m * 1e6 << " um below valid minimum "
            << min_wavelength_m * 1e6 << " um";
        throw std::domain_error(msg.str());
    }
    if (!(wavelength_m <= max_wavelength_m)) {
        msg << "wavelength " << wavelength_m * 1e6 << " um above valid maximum "
            << max_wavelength_m * 1e6 << " um";
        throw std::domain_error(msg.str());
    }
    if (!(temperature_c >= min_temperature_c)) {
        msg << "temperature " << temperature_c << " C below valid minimum "
            << min_temperature_c << " C";
        throw std::domain_error(msg.str());
    }
    if (!(temperature_c <= max_temperature_c)) {
        msg << "temperature " << temperature_c << " C above valid maximum "
            << max_temperature_c << " C";
        throw std::domain_error(msg.str());
    }
}

double MaterialModel::refractive_index(OpticalAxis a, double wavelength_m,
                                       double temperature_c) const {
    check_domain(wavelength_m, temperature_c);
    const SellmeierAxis& ax = axis(a);
    const double F = phonon_measure(temperature_c);
    const double inv_l2 = 1.0 / (wavelength_m * wavelength_m);
    double n2 = ax.constant - ax.ir_amplitude_per_m2 * wavelength_m * wavelength_m;
    for (const auto& p : ax.poles) {
        const double l0 = p.wavelength_m + p.thermal_shift_m_per_K2 * F;
        n2 += p.amplitude_per_m2 / (1.0 / (l0 * l0) - inv_l2);
    }
    if (!(n2 > 1.0))
        throw NumericalError("refractive index model left physical range (n^2 <= 1)");
    return std::sqrt(n2);
}

double MaterialModel::dn_dwavelength(OpticalAxis a, double wavelength_m,
                                     double temperature_c) const {
    const double n = refractive_index(a, wavelength_m, temperature_c);
    const SellmeierAxis& ax = axis(a);
    const double F = phonon_measure(temperature_c);
    const double inv_l2 = 1.0 / (wavelength_m * wavelength_m);
    double dn2 = -2.0 * ax.ir_amplitude_per_m2 * wavelength_m;
    for (const auto& p : ax.poles) {
        const double l0 = p.wavelength_m + p.thermal_shift_m_per_K2 * F;
        const double denom = 1.0 / (l0 * l0) - inv_l2;
        dn2 -= p.amplitude_per_m2 * 2.0 / (wavelength_m * wavelength_m * wavelength_m)
               / (denom * denom);
    }
    return dn2 / (2.0 * n);
}

double MaterialModel::dn_dtemperature(OpticalAxis a, double wavelength_m,
                                      double temperature_c) const {
    const double n = refractive_index(a, wavelength_m, temperature_c);
    const SellmeierAxis& ax = axis(a);
    const double F = phonon_measure(temperature_c);
    const double dF = dphonon_dT(temperature_c);
    const double inv_l2 = 1.0 / (wavelength_m * wavelength_m);
    double dn2 = 0.0;
    for (const auto& p : ax.poles) {
        if (p.thermal_shift_m_per_K2 == 0.0) continue;
        const double l0 = p.wavelength_m + p.thermal_shift_m_per_K2 * F;
        const double denom = 1.0 / (l0 * l0) - inv_l2;
        // d/dT [A / (l0(T)^-2 - l^-2)] = A * 2 l0^-3 * dl0/dT / denom^2
        dn2 += p.amplitude_per_m2 * 2.0 / (l0 * l0 * l0) * p.thermal_shift_m_per_K2 * dF
               / (denom * denom);
    }
    return dn2 / (2.0 * n);
}

double MaterialModel::group_index(OpticalAxis a, double wavelength_m,
                                  double temperature_c) const {
    return refractive_index(a, wavelength_m, temperature_c)
           - wavelength_m * dn_dwavelength(a, wavelength_m, temperature_c);
}

double MaterialModel::radius_at_temperature(double r_ref_m, double t_ref_c,
                                            double temperature_c) const {
    return r_ref_m * (1.0 + expansion_.relative_change(temperature_c))
           / (1.0 + expansion_.relative_change(t_ref_c));
}

double MaterialModel::electrooptic_index_shift(OpticalAxis a, double wavelength_m,
                                               double temperature_c, double u_bias_v,
                                               double h_m, double fringe_factor) const {
    if (!(h_m > 0.0)) throw std::domain_error("electrode spacing h must be positive");
    if (!(fringe_factor > 0.0 && fringe_factor <= 1.0))
        throw std::domain_error("fringe_factor must lie in (0, 1]");
    const double r = a == OpticalAxis::Extraordinary ? electrooptic_.r_extraordinary_m_per_v
                                                     : electrooptic_.r_ordinary_m_per_v;
    const double n = refractive_index(a, wavelength_m, temperature_c);
    return -0.5 * r * n * n * n * (u_bias_v / h_m) * fringe_factor;
}

namespace {

SellmeierAxis load_axis(const IniConfig& cfg, const std::string& section) {
    SellmeierAxis ax;
    const long count = cfg.get_long(section + ".pole_count");
    for (long i = 1; i <= count; ++i) {
        const std::string p = section + ".pole" + std::to_string(i);
        SellmeierPole pole;
        pole.amplitude_per_m2 = cfg.get_double(p + "_amplitude_per_m2");
        pole.wavelength_m = cfg.get_double(p + "_wavelength_m");
        pole.thermal_shift_m_per_K2 = cfg.get_double(p + "_thermal_shift_m_per_K2", 0.0);
        ax.poles.push_back(pole);
    }
    ax.ir_amplitude_per_m2 = cfg.get_double(section + ".ir_amplitude_per_m2", 0.0);
    ax.constant = cfg.get_double(section + ".constant");
    return ax;
}

} // namespace

MaterialModel MaterialModel::from_file(const std::filesystem::path& path) {
    const IniConfig cfg = IniConfig::from_file(path);
    ThermalExpansion exp{};
    exp.linear_per_K = cfg.get_double("expansion.linear_per_K");
    exp.quadratic_per_K2 = cfg.get_double("expansion.quadratic_per_K2", 0.0);
    exp.reference_temperature_c = cfg.get_double("expansion.reference_temperature_C", 25.0);
    ElectroOpticCoefficients eo{};
    eo.r_extraordinary_m_per_v = cfg.get_double("electrooptic.r_extraordinary_m_per_V");
    eo.r_ordinary_m_per_v = cfg.get_double("electrooptic.r_ordinary_m_per_V");
    TemperatureCalibration cal{};
    cal.slope = cfg.get_double("calibration.slope");
    cal.offset_c = cfg.get_double("calibration.offset_C");
    return MaterialModel(load_axis(cfg, "sellmeier.ordinary"),
                         load_axis(cfg, "sellmeier.extraordinary"), exp, eo, cal,
                         cfg.get_double("mgo_fraction_percent", 0.0),
                         cfg.get_string("name", path.filename().string()));
}

MaterialModel MaterialModel::default_mg_linbo3() {
    SellmeierAxis e;
    e.poles.push_back({3.76875742e13, 2.18225154e-7, 7.77596713e-15});
    e.poles.push_back({1.01737839e12, 1.20e-7, 0.0});
    e.ir_amplitude_per_m2 = 4.15075658e10;
    e.constant = 2.6613;
    SellmeierAxis o;
    o.poles.push_back({4.21255875e13, 2.22855493e-7, 1.29005026e-15});
    o.poles.push_back({1.39103432e12, 1.20e-7, 0.0});
    o.ir_amplitude_per_m2 = 2.25843680e10;
    o.constant = 2.6613;
    ThermalExpansion exp{1.54e-5, 5.3e-9, 25.0};
    ElectroOpticCoefficients eo{31e-12, 8e-12};
    TemperatureCalibration cal{1.22, 11.0};
    return MaterialModel(o, e, exp, eo, cal, 5.8, "MgO:LiNbO3 (5.8% nominal)");
}

} // namespace wgmopo
