#pragma once

#include <filesystem>
#include <string>

#include "wgmopo/phasematch.hpp"

namespace wgmopo {

enum class MechanismKind { ElectroOptic, Substrate, Custom };

// Second, temperature-independent frequency-shift mechanism: linear
// per-mode rates over a bounded control variable.
struct ShiftMechanism {
    MechanismKind kind = MechanismKind::Custom;
    double rate_pump_hz_per_unit = 0.0;
    double rate_signal_hz_per_unit = 0.0;
    double rate_idler_hz_per_unit = 0.0;
    double control_min = -1.0;
    double control_max = 1.0;
    std::string control_unit = "unit";

    static ShiftMechanism from_file(const std::filesystem::path& path);
    void validate() const;
};

// Electro-optic mechanism for the triplet of a phase-match solution:
// rate = -nu * dn(per volt) / n per mode, fringe-reduced plate field.
ShiftMechanism electrooptic_mechanism(const DispersionModel& disp,
                                      const PhaseMatchSolution& base, double fringe_factor,
                                      double bias_range_v = 500.0);

struct RetuneResult {
    double control_value = 0.0;
    double temperature_raw_c = 0.0;
    double temperature_cal_c = 0.0;
    // Shifted frequencies at the new operating point; pump value is the
    // frequency the pump laser must be re-locked to.
    PhaseMatchSolution solution;
    double pump_frequency_hz = 0.0;
};

// Moves the signal frequency by `target_signal_offset_hz` while restoring
// energy conservation: damped-Newton solve of the (temperature, control)
// system. Throws RangeError with the achievable extremum when the target
// lies outside the mechanism range.
RetuneResult retune(const PhaseMatcher& pm, const PhaseMatchSolution& base,
                    const ShiftMechanism& mechanism, double target_signal_offset_hz);

} // namespace wgmopo
