#include "wgmopo/dispersion.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "wgmopo/errors.hpp"

namespace wgmopo {

void ResonatorGeometry::validate() const {
    if (!(major_radius_m > 0.0)) throw std::domain_error("major radius R must be positive");
    if (!(rim_curvature_m > 0.0)) throw std::domain_error("rim curvature rho must be positive");
    if (!(major_radius_m >= rim_curvature_m))
        throw std::domain_error("expected R/rho >= 1 for a spheroidal rim");
}

void ModeIndex::validate() const {
    if (m < 1) throw std::domain_error("azimuthal number m must be >= 1");
    if (q < 1) throw std::domain_error("radial number q must be >= 1");
    if (p < 0) throw std::domain_error("angular number p must be >= 0");
}

double airy_root(int q) {
    if (q < 1) throw std::domain_error("airy_root requires q >= 1");
    return std::pow(1.5 * M_PI * (q - 0.25), 2.0 / 3.0);
}

double airy_root_exact(int q) {
    static constexpr std::array<double, 20> zeros = {
        2.33810741045977, 4.08794944413097, 5.52055982809555, 6.78670809007176,
        7.94413358712085, 9.02265085334098, 10.0401743415581, 11.0085243037332,
        11.9360155632362, 12.8287767528657, 13.6914890352107, 14.5278299517753,
        15.3407551359779, 16.1326851569457, 16.9056339974299, 17.6613001056970,
        18.4011325992071, 19.1263804742469, 19.8381298917214, 20.5373329076775};
    if (q < 1 || q > static_cast<int>(zeros.size()))
        throw std::domain_error("airy_root_exact supports 1 <= q <= 20");
    return zeros[static_cast<size_t>(q - 1)];
}

DispersionModel::DispersionModel(ResonatorGeometry geom, MaterialModel material,
                                 DispersionOptions options)
    : geom_(geom), material_(std::move(material)), options_(options) {
    geom_.validate();
}

double DispersionModel::radius(double t_c) const {
    return material_.radius_at_temperature(geom_.major_radius_m, geom_.reference_temperature_c, t_c);
}

double DispersionModel::rim_curvature(double t_c) const {
    return material_.radius_at_temperature(geom_.rim_curvature_m, geom_.reference_temperature_c, t_c);
}

double DispersionModel::alpha_q(int q) const {
    return options_.exact_airy ? airy_root_exact(q) : airy_root(q);
}

double DispersionModel::bracket(double l, int q, int p, Polarization pol, double n,
                                double t_c) const {
    const double rr = std::sqrt(radius(t_c) / rim_curvature(t_c));
    const double chi_term = pol == Polarization::TE ? n / std::sqrt(n * n - 1.0)
                                                    : 1.0 / (n * std::sqrt(n * n - 1.0));
    return l + alpha_q(q) * std::cbrt(l / 2.0) + p * (rr - 1.0) - chi_term + 0.5 * rr;
}

double DispersionModel::mode_frequency_continuous(double m, int q, int p, Polarization pol,
                                                  double t_c) const {
    if (!(m >= 1.0)) throw std::domain_error("azimuthal number m must be >= 1");
    const double l = m + p;
    const double R = radius(t_c);
    const OpticalAxis axis = axis_for(pol);
    double nu = speed_of_light * l / (2.0 * M_PI * 2.2 * R);
    double residual = 0.0;
    for (int it = 0; it < options_.max_iterations; ++it) {
        const double n = material_.refractive_index(axis, speed_of_light / nu, t_c);
        const double next = speed_of_light * bracket(l, q, p, pol, n, t_c) / (2.0 * M_PI * n * R);
        residual = next - nu;
        nu = next;
        if (std::abs(residual) < options_.convergence_tol_hz) return nu;
    }
    std::ostringstream msg;
    msg << "mode frequency iteration did not converge after " << options_.max_iterations
        << " steps, last residual " << residual << " Hz";
    throw NumericalError(msg.str());
}

double DispersionModel::mode_frequency(const ModeIndex& idx, double t_c) const {
    idx.validate();
    return mode_frequency_continuous(static_cast<double>(idx.m), idx.q, idx.p, idx.pol, t_c);
}

double DispersionModel::azimuthal_number_continuous(double nu_hz, int q, int p, Polarization pol,
                                                    double t_c) const {
    if (!(nu_hz > 0.0)) throw std::domain_error("frequency must be positive");
    const OpticalAxis axis = axis_for(pol);
    const double n = material_.refractive_index(axis, speed_of_light / nu_hz, t_c);
    const double R = radius(t_c);
    const double target = 2.0 * M_PI * n * R * nu_hz / speed_of_light;
    const double rr = std::sqrt(radius(t_c) / rim_curvature(t_c));
    const double chi_term = pol == Polarization::TE ? n / std::sqrt(n * n - 1.0)
                                                    : 1.0 / (n * std::sqrt(n * n - 1.0));
    double l = target;
    for (int it = 0; it < 100; ++it) {
        const double next =
            target - alpha_q(q) * std::cbrt(l / 2.0) - p * (rr - 1.0) + chi_term - 0.5 * rr;
        if (std::abs(next - l) < 1e-10) { l = next; break; }
        l = next;
    }
    return l - p;
}

std::pair<long, double> DispersionModel::find_azimuthal_number(double nu_target_hz, int q, int p,
                                                               Polarization pol,
                                                               double t_c) const {
    const double m_cont = azimuthal_number_continuous(nu_target_hz, q, p, pol, t_c);
    const long m0 = std::lround(m_cont);
    long best_m = 0;
    double best_r = 0.0;
    bool first = true;
    for (long m = m0 - 1; m <= m0 + 1; ++m) {
        if (m < 1) continue;
        const double r = mode_frequency_continuous(static_cast<double>(m), q, p, pol, t_c)
                         - nu_target_hz;
        if (first || std::abs(r) < std::abs(best_r)) {
            best_m = m;
            best_r = r;
            first = false;
        }
    }
    return {best_m, best_r};
}

double DispersionModel::free_spectral_range(const ModeIndex& idx, double t_c) const {
    ModeIndex up = idx;
    up.m += 1;
    return mode_frequency(up, t_c) - mode_frequency(idx, t_c);
}

double DispersionModel::effective_index(double m, double nu_hz, double radius_m) {
    if (!(nu_hz > 0.0)) throw std::domain_error("frequency must be positive");
    if (!(radius_m > 0.0)) throw std::domain_error("radius must be positive");
    return speed_of_light * m / (2.0 * M_PI * radius_m * nu_hz);
}

} // namespace wgmopo
