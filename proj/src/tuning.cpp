#include "wgmopo/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wgmopo/config.hpp"
#include "wgmopo/errors.hpp"

namespace wgmopo {

void ShiftMechanism::validate() const {
    if (!(control_min < control_max)) throw std::domain_error("empty mechanism control range");
    if (!std::isfinite(rate_pump_hz_per_unit) || !std::isfinite(rate_signal_hz_per_unit) ||
        !std::isfinite(rate_idler_hz_per_unit))
        throw std::domain_error("mechanism rates must be finite");
}

ShiftMechanism ShiftMechanism::from_file(const std::filesystem::path& path) {
    const IniConfig cfg = IniConfig::from_file(path);
    ShiftMechanism m;
    const std::string kind = cfg.get_string("mechanism.kind", "custom");
    if (kind == "electrooptic") m.kind = MechanismKind::ElectroOptic;
    else if (kind == "substrate") m.kind = MechanismKind::Substrate;
    else m.kind = MechanismKind::Custom;
    m.rate_pump_hz_per_unit = cfg.get_double("mechanism.rate_pump_hz_per_unit");
    m.rate_signal_hz_per_unit = cfg.get_double("mechanism.rate_signal_hz_per_unit");
    m.rate_idler_hz_per_unit = cfg.get_double("mechanism.rate_idler_hz_per_unit");
    m.control_min = cfg.get_double("mechanism.control_min");
    m.control_max = cfg.get_double("mechanism.control_max");
    m.control_unit = cfg.get_string("mechanism.control_unit", "unit");
    m.validate();
    return m;
}

ShiftMechanism electrooptic_mechanism(const DispersionModel& disp,
                                      const PhaseMatchSolution& base, double fringe_factor,
                                      double bias_range_v) {
    const double h = disp.geometry().thickness_m;
    if (!(h > 0.0)) throw std::domain_error("geometry thickness h must be positive");
    const MaterialModel& mat = disp.material();
    const double T = base.temperature_raw_c;
    const auto rate = [&](double nu_hz, Polarization pol) {
        const double lam = speed_of_light / nu_hz;
        const double n = mat.refractive_index(pol, lam, T);
        const double dn = mat.electrooptic_index_shift(pol, lam, T, 1.0, h, fringe_factor);
        return -nu_hz * dn / n;
    };
    ShiftMechanism m;
    m.kind = MechanismKind::ElectroOptic;
    m.rate_pump_hz_per_unit = rate(base.nu_p_hz, Polarization::TE);
    m.rate_signal_hz_per_unit = rate(base.nu_s_hz, Polarization::TM);
    m.rate_idler_hz_per_unit = rate(base.nu_i_hz, Polarization::TM);
    m.control_min = -bias_range_v;
    m.control_max = bias_range_v;
    m.control_unit = "V";
    m.validate();
    return m;
}

namespace {

struct SystemState {
    double f_energy = 0.0; // nu_p - nu_s - nu_i with shifts
    double f_target = 0.0; // nu_s shift from base minus target
};

} // namespace

RetuneResult retune(const PhaseMatcher& pm, const PhaseMatchSolution& base,
                    const ShiftMechanism& mech, double target_signal_offset_hz) {
    mech.validate();
    const DispersionModel& disp = pm.dispersion();
    const ModeTriplet& t = base.triplet;

    const auto eval = [&](double T, double u) {
        SystemState s;
        const double nu_p = disp.mode_frequency(t.pump, T) + mech.rate_pump_hz_per_unit * u;
        const double nu_s = disp.mode_frequency(t.signal, T) + mech.rate_signal_hz_per_unit * u;
        const double nu_i = disp.mode_frequency(t.idler, T) + mech.rate_idler_hz_per_unit * u;
        s.f_energy = nu_p - nu_s - nu_i;
        s.f_target = nu_s - (base.nu_s_hz + target_signal_offset_hz);
        return s;
    };

    const double u_span = mech.control_max - mech.control_min;
    const double dT = 1e-3;
    const double du = 1e-3 * u_span;
    const double tol = 1e4;

    double T = base.temperature_raw_c;
    double u = 0.0;
    SystemState s = eval(T, u);
    bool ok = false;
    for (int it = 0; it < 100; ++it) {
        if (std::abs(s.f_energy) < tol && std::abs(s.f_target) < tol) {
            ok = true;
            break;
        }
        const SystemState sT = eval(T + dT, u);
        const SystemState su = eval(T, u + du);
        const double j11 = (sT.f_energy - s.f_energy) / dT;
        const double j12 = (su.f_energy - s.f_energy) / du;
        const double j21 = (sT.f_target - s.f_target) / dT;
        const double j22 = (su.f_target - s.f_target) / du;
        const double det = j11 * j22 - j12 * j21;
        if (!(std::abs(det) > 1e-30)) {
            throw RangeError("tuning mechanism is degenerate with temperature tuning; "
                             "no independent control of the signal frequency",
                             0.0);
        }
        double step_T = -(j22 * s.f_energy - j12 * s.f_target) / det;
        double step_u = -(-j21 * s.f_energy + j11 * s.f_target) / det;
        // damped update
        double scale = 1.0;
        for (int half = 0; half < 25; ++half) {
            const double Tn = T + scale * step_T;
            const double un = u + scale * step_u;
            if (Tn < MaterialModel::min_temperature_c || Tn > MaterialModel::max_temperature_c ||
                std::abs(un) > 50.0 * std::max(std::abs(mech.control_min),
                                               std::abs(mech.control_max))) {
                scale *= 0.5;
                continue;
            }
            const SystemState sn = eval(Tn, un);
            if (std::abs(sn.f_energy) + std::abs(sn.f_target) <
                std::abs(s.f_energy) + std::abs(s.f_target)) {
                T = Tn;
                u = un;
                s = sn;
                break;
            }
            scale *= 0.5;
            if (half == 24) throw NumericalError("retune Newton iteration stalled");
        }
    }
    if (!ok) throw NumericalError("retune did not converge in 100 iterations");

    if (u < mech.control_min || u > mech.control_max) {
        // report the reachable extremum on the boundary nearest the target
        const double ub = u > mech.control_max ? mech.control_max : mech.control_min;
        double Tb = base.temperature_raw_c;
        // one-dimensional re-solve of energy conservation at clamped control
        for (int it = 0; it < 100; ++it) {
            const SystemState sb = eval(Tb, ub);
            if (std::abs(sb.f_energy) < tol) break;
            const double d = (eval(Tb + dT, ub).f_energy - sb.f_energy) / dT;
            Tb -= sb.f_energy / d;
            Tb = std::clamp(Tb, MaterialModel::min_temperature_c,
                            MaterialModel::max_temperature_c);
        }
        const double nu_s_b =
            disp.mode_frequency(t.signal, Tb) + mech.rate_signal_hz_per_unit * ub;
        const double achievable = nu_s_b - base.nu_s_hz;
        std::ostringstream msg;
        msg << "target signal offset " << target_signal_offset_hz
            << " Hz outside mechanism range; achievable extremum " << achievable << " Hz";
        throw RangeError(msg.str(), achievable);
    }

    RetuneResult out;
    out.control_value = u;
    out.temperature_raw_c = T;
    out.temperature_cal_c = disp.material().calibrate_temperature(T);
    PhaseMatchSolution sol;
    sol.triplet = t;
    sol.temperature_raw_c = T;
    sol.temperature_cal_c = out.temperature_cal_c;
    sol.nu_p_hz = disp.mode_frequency(t.pump, T) + mech.rate_pump_hz_per_unit * u;
    sol.nu_s_hz = disp.mode_frequency(t.signal, T) + mech.rate_signal_hz_per_unit * u;
    sol.nu_i_hz = disp.mode_frequency(t.idler, T) + mech.rate_idler_hz_per_unit * u;
    sol.residual_hz = sol.nu_p_hz - sol.nu_s_hz - sol.nu_i_hz;
    out.solution = sol;
    out.pump_frequency_hz = sol.nu_p_hz;
    return out;
}

} // namespace wgmopo
