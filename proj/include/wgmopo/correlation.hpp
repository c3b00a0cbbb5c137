#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wgmopo {

// Signal-idler correlation densities. t1 is the resonator ring-down time,
// t2 the atomic excited-state lifetime of the scattering stage.
double pair_density(double t_s, double t1_s);
double heralded_density(double dt_s, double t1_s, double t2_s);

inline double bandwidth_from_time(double t_s);
inline double time_from_bandwidth(double gamma_hz);

struct CorrelationModel {
    double t1_s = 0.0;
    double t2_s = 0.0;        // unused by the pair family
    double amplitude = 1.0;   // counts scale
    double background = 0.0;  // counts per bin
};

struct Histogram {
    double bin_width_s = 0.0;
    std::vector<double> bin_centers_s;
    std::vector<double> counts;

    static Histogram from_csv(const std::filesystem::path& path);
    static Histogram from_text(const std::string& text, const std::string& origin = "<text>");
    void validate() const;
};

enum class CorrelationFamily { Pair, Heralded };

enum class FitStatus { Converged, MaxIterations, FlatData };

struct FitResult {
    CorrelationModel model;
    double t0_s = 0.0; // fitted time origin
    std::vector<double> std_errors; // same order as parameter vector
    std::vector<std::string> parameter_names;
    double chi2 = 0.0;
    int n_bins = 0;
    int iterations = 0;
    FitStatus status = FitStatus::Converged;
};

FitResult fit_histogram(const Histogram& hist, CorrelationFamily family,
                        std::optional<CorrelationModel> init = std::nullopt);

inline double bandwidth_from_time(double t_s) {
    if (!(t_s > 0.0)) throw std::domain_error("time constant must be positive");
    return 1.0 / (2.0 * M_PI * t_s);
}

inline double time_from_bandwidth(double gamma_hz) {
    if (!(gamma_hz > 0.0)) throw std::domain_error("bandwidth must be positive");
    return 1.0 / (2.0 * M_PI * gamma_hz);
}

} // namespace wgmopo
