#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "wgmopo/dispersion.hpp"
#include "wgmopo/opo.hpp"

namespace wgmopo {

struct ModeTriplet {
    ModeIndex pump;   // TE
    ModeIndex signal; // TM
    ModeIndex idler;  // TM
};

// Azimuthal sum rule, angular-momentum triangle, and parity.
bool momentum_conserved(const ModeTriplet& t);

// Cluster number a = p_s + p_i - p_p of near-degenerate angular channels.
inline int cluster_number(const ModeTriplet& t) {
    return t.signal.p + t.idler.p - t.pump.p;
}

struct PhaseMatchSolution {
    ModeTriplet triplet;
    double temperature_raw_c = 0.0;
    double temperature_cal_c = 0.0;
    double nu_p_hz = 0.0;
    double nu_s_hz = 0.0;
    double nu_i_hz = 0.0;
    double residual_hz = 0.0;
};

// One parametric conversion channel: radial/angular numbers of the
// parametric pair (the pump family is configured separately).
struct Channel {
    int q_s = 1;
    int q_i = 1;
    int p_s = 0;
    int p_i = 0;
    std::string name = "q111";
};

struct ChannelSample {
    double t_raw_c = 0.0;
    double t_cal_c = 0.0;
    long m_p = 0, m_s = 0, m_i = 0;
    double lambda_s_m = 0.0;
    double lambda_i_m = 0.0;
    double residual_hz = 0.0; // nu_p - nu_s - nu_i at the sample temperature
    bool valid = false;
};

struct ChannelCurve {
    Channel channel;
    std::vector<ChannelSample> samples;
};

enum class StepMethod { Coarse, FineSignal, FineIdler };

struct StepEntry {
    StepMethod method;
    int direction = 0; // +1 / -1
    bool valid = false; // false -> gap (neighbor not phase-matchable in range)
    PhaseMatchSolution solution;
    double delta_nu_s_hz = 0.0;
    double delta_nu_i_hz = 0.0;
    double delta_t_c = 0.0;
};

struct TargetLine {
    std::string name;
    double wavelength_m = 0.0;
};

struct TargetCrossing {
    std::string target;
    double target_wavelength_m = 0.0;
    bool found = false;
    double t_raw_c = 0.0;
    double t_cal_c = 0.0;
    double lambda_s_m = 0.0;
    double lambda_i_m = 0.0;
};

struct MapPoint {
    double parameter = 0.0; // radius (m) or pump wavelength (m)
    bool degenerate_found = false;
    double degeneracy_t_raw_c = 0.0;
    double degeneracy_t_cal_c = 0.0;
    std::vector<TargetCrossing> crossings;
    // coarse envelope curve (temperature, lambda_s, lambda_i)
    std::vector<std::array<double, 3>> curve;
};

enum class MapMode { ByRadius, ByPumpWavelength };

struct MapScan {
    MapMode mode = MapMode::ByRadius;
    std::vector<MapPoint> points;
};

class PhaseMatcher {
public:
    explicit PhaseMatcher(DispersionModel dispersion, double residual_tol_hz = 1e4)
        : disp_(std::move(dispersion)), residual_tol_hz_(residual_tol_hz) {}

    const DispersionModel& dispersion() const { return disp_; }

    static double pdc_mismatch(double nu_p_hz, const CavityMode& signal,
                               const CavityMode& idler);

    // Temperature at which the triplet conserves energy; nullopt when the
    // residual does not change sign inside [t_lo, t_hi].
    std::optional<PhaseMatchSolution> find_phasematch_temperature(const ModeTriplet& triplet,
                                                                  double t_lo_c,
                                                                  double t_hi_c) const;

    struct ContinuousSeed {
        double m_p = 0.0, m_s = 0.0, m_i = 0.0;
        double nu_s_hz = 0.0;
    };
    // Continuous-m energy-conservation seed at fixed pump wavelength.
    std::optional<ContinuousSeed> seed_continuous(double lambda_p_m, double t_c,
                                                  const Channel& ch, int q_p = 1,
                                                  int p_p = 0) const;
    // Integer triplet from the continuous seed, rounded under momentum
    // conservation (signal adjusted first, idler compensating).
    std::optional<ModeTriplet> seed_triplet(double lambda_p_m, double t_c, const Channel& ch,
                                            int q_p = 1, int p_p = 0) const;

    // Temperature at which the continuous channel envelope reaches a signal
    // wavelength; the integer solution nearby refines it.
    std::optional<double> channel_crossing_temperature(double lambda_p_m,
                                                       double lambda_s_target_m,
                                                       const Channel& ch, double t_lo_c,
                                                       double t_hi_c, int q_p = 1,
                                                       int p_p = 0) const;
    std::optional<double> degeneracy_temperature(double lambda_p_m, double t_lo_c,
                                                 double t_hi_c, const Channel& ch = {},
                                                 int q_p = 1, int p_p = 0) const;
    std::optional<double> envelope_lambda_s(double lambda_p_m, double t_c, const Channel& ch,
                                            int q_p = 1, int p_p = 0) const;

    // Fig.-7-style temperature scan of one channel: integer triplets with the
    // pump azimuthal number stepped to keep its resonance within one FSR of
    // the nominal pump frequency.
    ChannelCurve scan_channel(double lambda_p_m, const Channel& ch, double t_lo_c,
                              double t_hi_c, double dt_c, int q_p = 1, int p_p = 0) const;
    std::vector<ChannelCurve> scan_channels(double lambda_p_m, const std::vector<Channel>& chs,
                                            double t_lo_c, double t_hi_c, double dt_c,
                                            int threads = 0, int q_p = 1, int p_p = 0) const;
    // Serial reference for the parallel scan; kept for testing and benchmarks.
    std::vector<ChannelCurve> scan_channels_serial(double lambda_p_m,
                                                   const std::vector<Channel>& chs,
                                                   double t_lo_c, double t_hi_c, double dt_c,
                                                   int q_p = 1, int p_p = 0) const;

    std::vector<StepEntry> step_tuning(const PhaseMatchSolution& base, StepMethod method,
                                       double t_halfwidth_c = 6.0) const;

    double residual_tolerance_hz() const { return residual_tol_hz_; }

    // Energy-conservation residual of an integer triplet at a temperature.
    double residual(const ModeTriplet& t, double t_c) const;

private:
    ChannelSample scan_sample_(double lambda_p_m, const Channel& ch, double t_c, int q_p,
                               int p_p) const;
    DispersionModel disp_;
    double residual_tol_hz_ = 1e4;
};

// Radius / pump-wavelength maps for the fundamental channel. The rim
// curvature scales with the radius (constant aspect ratio) when scanning R.
MapScan scan_radius_wavelength(const MaterialModel& material, const ResonatorGeometry& base,
                               MapMode mode, const std::vector<double>& parameters,
                               double fixed_lambda_p_m, const std::vector<TargetLine>& targets,
                               double t_lo_c, double t_hi_c, int threads = 0,
                               int curve_points = 0);

} // namespace wgmopo
