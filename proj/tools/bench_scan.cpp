// Benchmark of the OpenMP channel-scan kernels against the serial reference.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wgmopo/phasematch.hpp"

using namespace wgmopo;

namespace {

template <typename F>
double time_run(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    double t_lo = 90.0, t_hi = 112.0, dt = 0.05;
    if (argc > 1) dt = std::atof(argv[1]);

    PhaseMatcher pm{DispersionModel(ResonatorGeometry{2.5e-3, 0.58e-3, 0.5e-3, 100.0},
                                    MaterialModel::default_mg_linbo3())};
    const std::vector<Channel> channels = {Channel{},
                                           Channel{2, 2, 0, 0, "q122"},
                                           Channel{3, 3, 0, 0, "q133"},
                                           Channel{1, 1, 1, 1, "p11"},
                                           Channel{1, 1, 2, 2, "p22"}};
    const int samples = static_cast<int>((t_hi - t_lo) / dt) + 1;
    std::printf("channel scan: %zu channels x %d samples\n", channels.size(), samples);

    std::vector<ChannelCurve> reference;
    const double t_serial = time_run([&] {
        reference = pm.scan_channels_serial(532e-9, channels, t_lo, t_hi, dt);
    });
    std::printf("%-18s %8.3f s\n", "serial reference", t_serial);

#ifdef _OPENMP
    for (int threads : {1, 2, 4, omp_get_max_threads()}) {
        std::vector<ChannelCurve> result;
        const double t_par = time_run([&] {
            result = pm.scan_channels(532e-9, channels, t_lo, t_hi, dt, threads);
        });
        // verify against the reference while timing
        long mismatches = 0;
        for (size_t c = 0; c < result.size(); ++c)
            for (size_t k = 0; k < result[c].samples.size(); ++k) {
                const auto& a = result[c].samples[k];
                const auto& b = reference[c].samples[k];
                if (a.valid != b.valid || a.m_s != b.m_s || a.lambda_s_m != b.lambda_s_m)
                    ++mismatches;
            }
        std::printf("openmp %2d threads  %8.3f s  speedup %5.2fx  mismatches %ld\n", threads,
                    t_par, t_serial / t_par, mismatches);
        if (mismatches) return 1;
    }
#else
    std::printf("openmp unavailable in this build\n");
#endif
    return 0;
}
