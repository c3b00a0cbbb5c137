#include "wgmopo/phasematch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wgmopo/errors.hpp"

namespace wgmopo {

bool momentum_conserved(const ModeTriplet& t) {
    if (t.pump.m != t.signal.m + t.idler.m) return false;
    const long ls = t.signal.m + t.signal.p;
    const long li = t.idler.m + t.idler.p;
    const long lp = t.pump.m + t.pump.p;
    if (!(std::labs(ls - li) <= lp && lp <= ls + li)) return false;
    const long total = t.pump.m + t.signal.m + t.idler.m + t.pump.p + t.signal.p + t.idler.p;
    return total % 2 == 0;
}

double PhaseMatcher::pdc_mismatch(double nu_p_hz, const CavityMode& signal,
                                  const CavityMode& idler) {
    signal.validate();
    idler.validate();
    const double mean_bw = 0.5 * (signal.bandwidth_hz() + idler.bandwidth_hz());
    return (nu_p_hz - signal.nu_res_hz - idler.nu_res_hz) / mean_bw;
}

double PhaseMatcher::residual(const ModeTriplet& t, double t_c) const {
    return disp_.mode_frequency(t.pump, t_c) - disp_.mode_frequency(t.signal, t_c)
           - disp_.mode_frequency(t.idler, t_c);
}

std::optional<PhaseMatchSolution> PhaseMatcher::find_phasematch_temperature(
    const ModeTriplet& triplet, double t_lo_c, double t_hi_c) const {
    if (!momentum_conserved(triplet))
        throw std::domain_error("triplet does not satisfy momentum conservation");
    if (!(t_lo_c < t_hi_c)) throw std::domain_error("empty temperature interval");
    MaterialModel::check_domain(1e-6, t_lo_c);
    MaterialModel::check_domain(1e-6, t_hi_c);

    const auto f = [&](double T) { return residual(triplet, T); };

    // coarse bracket at 0.05 C resolution
    const double step = 0.05;
    double a = t_lo_c;
    double fa = f(a);
    double b = a;
    double fb = fa;
    bool bracketed = std::abs(fa) < residual_tol_hz_;
    const int nsteps = static_cast<int>(std::ceil((t_hi_c - t_lo_c) / step));
    for (int k = 1; k <= nsteps && !bracketed; ++k) {
        b = std::min(t_lo_c + k * step, t_hi_c);
        fb = f(b);
        if (std::abs(fb) < residual_tol_hz_) {
            a = b;
            fa = fb;
            bracketed = true;
            break;
        }
        if (std::signbit(fa) != std::signbit(fb)) {
            bracketed = true;
            break;
        }
        a = b;
        fa = fb;
    }
    if (!bracketed) return std::nullopt;

    double m = a, fm = fa;
    for (int it = 0; it < 200 && std::abs(fm) >= residual_tol_hz_; ++it) {
        // secant candidate, bisection fallback
        m = (std::abs(fb - fa) > 0.0) ? (a * fb - b * fa) / (fb - fa) : 0.5 * (a + b);
        if (!(m > a && m < b)) m = 0.5 * (a + b);
        fm = f(m);
        if (std::signbit(fm) == std::signbit(fa)) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
        if (b - a < 1e-12) {
            std::ostringstream msg;
            msg << "phase-match refinement stagnated in [" << a << ", " << b
                << "] C with residual " << fm << " Hz";
            throw NumericalError(msg.str());
        }
    }
    if (std::abs(fm) >= residual_tol_hz_) {
        std::ostringstream msg;
        msg << "phase-match refinement did not reach tolerance in [" << a << ", " << b
            << "] C; residual " << fm << " Hz";
        throw NumericalError(msg.str());
    }

    PhaseMatchSolution sol;
    sol.triplet = triplet;
    sol.temperature_raw_c = m;
    sol.temperature_cal_c = disp_.material().calibrate_temperature(m);
    sol.nu_p_hz = disp_.mode_frequency(triplet.pump, m);
    sol.nu_s_hz = disp_.mode_frequency(triplet.signal, m);
    sol.nu_i_hz = disp_.mode_frequency(triplet.idler, m);
    sol.residual_hz = sol.nu_p_hz - sol.nu_s_hz - sol.nu_i_hz;
    return sol;
}

namespace {

// Signal-branch solution of nu_s(m_s) + nu_i(m_p - m_s) = nu_p with
// continuous azimuthal numbers; nullopt when the branch leaves the
// transparency band or no crossing exists (past degeneracy).
std::optional<double> solve_signal_continuous(const DispersionModel& disp, double m_p,
                                              double nu_p, const Channel& ch, double t_c) {
    const auto g = [&](double m_s) -> std::optional<double> {
        const double nu_s = disp.mode_frequency_continuous(m_s, ch.q_s, ch.p_s,
                                                           Polarization::TM, t_c);
        const double nu_i_req = nu_p - nu_s;
        if (nu_i_req <= 0.0 || speed_of_light / nu_i_req > 2.50e-6) return std::nullopt;
        const double m_i = m_p - m_s;
        if (m_i < 1.0) return std::nullopt;
        return nu_s + disp.mode_frequency_continuous(m_i, ch.q_i, ch.p_i, Polarization::TM, t_c)
               - nu_p;
    };
    try {
        double lo = disp.azimuthal_number_continuous(nu_p / 2.0, ch.q_s, ch.p_s,
                                                     Polarization::TM, t_c);
        auto glo = g(lo);
        if (!glo || *glo <= 0.0) return std::nullopt;
        double step = 64.0;
        double hi = lo;
        std::optional<double> ghi;
        bool found = false;
        for (int it = 0; it < 4000; ++it) {
            hi = lo + step;
            const double nu_probe = disp.mode_frequency_continuous(hi, ch.q_s, ch.p_s,
                                                                   Polarization::TM, t_c);
            if (speed_of_light / nu_probe < 0.46e-6) return std::nullopt;
            ghi = g(hi);
            if (!ghi) return std::nullopt;
            if (*ghi <= 0.0) {
                found = true;
                break;
            }
            lo = hi;
            glo = ghi;
            step = std::min(step * 2.0, 4096.0);
        }
        if (!found) return std::nullopt;
        // bisection with a secant nudge
        double a = lo, fa = *glo, b = hi, fb = *ghi;
        for (int it = 0; it < 120 && b - a > 1e-7; ++it) {
            double mid = (it % 3 == 2 && fb != fa) ? (a * fb - b * fa) / (fb - fa)
                                                   : 0.5 * (a + b);
            if (!(mid > a && mid < b)) mid = 0.5 * (a + b);
            const auto fm = g(mid);
            if (!fm) return std::nullopt;
            if (*fm > 0.0) {
                a = mid;
                fa = *fm;
            } else {
                b = mid;
                fb = *fm;
            }
        }
        return 0.5 * (a + b);
    } catch (const std::domain_error&) {
        return std::nullopt; // band edge reached while marching
    }
}

void validate_channel_parity(const Channel& ch, int p_p) {
    if ((ch.p_s + ch.p_i + p_p) % 2 != 0)
        throw std::domain_error("channel (p_s + p_i + p_p) parity is odd; no azimuthal "
                                "assignment can conserve momentum");
}

} // namespace

std::optional<PhaseMatcher::ContinuousSeed> PhaseMatcher::seed_continuous(double lambda_p_m,
                                                                          double t_c,
                                                                          const Channel& ch,
                                                                          int q_p,
                                                                          int p_p) const {
    validate_channel_parity(ch, p_p);
    const double nu_p = speed_of_light / lambda_p_m;
    const double m_p = disp_.azimuthal_number_continuous(nu_p, q_p, p_p, Polarization::TE, t_c);
    const auto m_s = solve_signal_continuous(disp_, m_p, nu_p, ch, t_c);
    if (!m_s) return std::nullopt;
    ContinuousSeed seed;
    seed.m_p = m_p;
    seed.m_s = *m_s;
    seed.m_i = m_p - *m_s;
    seed.nu_s_hz = disp_.mode_frequency_continuous(*m_s, ch.q_s, ch.p_s, Polarization::TM, t_c);
    return seed;
}

std::optional<double> PhaseMatcher::envelope_lambda_s(double lambda_p_m, double t_c,
                                                      const Channel& ch, int q_p,
                                                      int p_p) const {
    const auto seed = seed_continuous(lambda_p_m, t_c, ch, q_p, p_p);
    if (!seed) return std::nullopt;
    return speed_of_light / seed->nu_s_hz;
}

std::optional<ModeTriplet> PhaseMatcher::seed_triplet(double lambda_p_m, double t_c,
                                                      const Channel& ch, int q_p,
                                                      int p_p) const {
    validate_channel_parity(ch, p_p);
    const double nu_p_nominal = speed_of_light / lambda_p_m;
    const double m_p_cont =
        disp_.azimuthal_number_continuous(nu_p_nominal, q_p, p_p, Polarization::TE, t_c);
    const long m_p = std::lround(m_p_cont);
    ModeIndex pump{m_p, q_p, p_p, Polarization::TE};
    const double nu_p = disp_.mode_frequency(pump, t_c);
    const auto m_s_cont = solve_signal_continuous(disp_, static_cast<double>(m_p), nu_p, ch, t_c);
    if (!m_s_cont) return std::nullopt;
    const long m_s0 = std::lround(*m_s_cont);
    // deterministic rounding repair: adjust m_s, idler compensates through
    // the sum rule; smallest energy residual wins
    ModeTriplet best;
    double best_res = 0.0;
    bool have = false;
    for (long ds = -1; ds <= 1; ++ds) {
        const long m_s = m_s0 + ds;
        const long m_i = m_p - m_s;
        if (m_s < 1 || m_i < 1) continue;
        ModeTriplet t{pump,
                      ModeIndex{m_s, ch.q_s, ch.p_s, Polarization::TM},
                      ModeIndex{m_i, ch.q_i, ch.p_i, Polarization::TM}};
        if (!momentum_conserved(t)) continue;
        double r;
        try {
            r = residual(t, t_c);
        } catch (const std::domain_error&) {
            continue;
        }
        if (!have || std::abs(r) < std::abs(best_res)) {
            best = t;
            best_res = r;
            have = true;
        }
    }
    if (!have) return std::nullopt;
    return best;
}

namespace {

// root of h(T) over [lo, hi] from a coarse scan; h may be unevaluable at
// some temperatures (treated as gaps)
template <typename H>
std::optional<double> scan_root(H&& h, double t_lo, double t_hi, int coarse_points) {
    double prev_t = 0.0, prev_v = 0.0;
    bool have_prev = false;
    std::optional<std::pair<double, double>> bracket_lo, bracket_hi;
    const int n = std::max(coarse_points, 4);
    for (int k = 0; k < n; ++k) {
        const double T = t_lo + (t_hi - t_lo) * k / (n - 1.0);
        std::optional<double> v;
        try {
            v = h(T);
        } catch (const std::domain_error&) {
            v = std::nullopt;
        }
        if (!v) {
            have_prev = false;
            continue;
        }
        if (have_prev && std::signbit(*v) != std::signbit(prev_v)) {
            bracket_lo = {prev_t, prev_v};
            bracket_hi = {T, *v};
            break;
        }
        prev_t = T;
        prev_v = *v;
        have_prev = true;
    }
    if (!bracket_lo) return std::nullopt;
    auto [a, fa] = *bracket_lo;
    auto [b, fb] = *bracket_hi;
    for (int it = 0; it < 200 && b - a > 1e-5; ++it) {
        double m = (it % 3 == 2 && fb != fa) ? (a * fb - b * fa) / (fb - fa) : 0.5 * (a + b);
        if (!(m > a && m < b)) m = 0.5 * (a + b);
        std::optional<double> fm;
        try {
            fm = h(m);
        } catch (const std::domain_error&) {
            fm = std::nullopt;
        }
        if (!fm) return std::nullopt;
        if (std::signbit(*fm) == std::signbit(fa)) {
            a = m;
            fa = *fm;
        } else {
            b = m;
            fb = *fm;
        }
    }
    return 0.5 * (a + b);
}

} // namespace

std::optional<double> PhaseMatcher::channel_crossing_temperature(double lambda_p_m,
                                                                 double lambda_s_target_m,
                                                                 const Channel& ch,
                                                                 double t_lo_c, double t_hi_c,
                                                                 int q_p, int p_p) const {
    validate_channel_parity(ch, p_p);
    const double nu_p = speed_of_light / lambda_p_m;
    const double nu_s = speed_of_light / lambda_s_target_m;
    const double nu_i = nu_p - nu_s;
    if (nu_i <= 0.0) throw std::domain_error("signal target must lie below the pump frequency");
    const auto h = [&](double T) {
        const double mp = disp_.azimuthal_number_continuous(nu_p, q_p, p_p, Polarization::TE, T);
        const double ms = disp_.azimuthal_number_continuous(nu_s, ch.q_s, ch.p_s,
                                                            Polarization::TM, T);
        const double mi = disp_.azimuthal_number_continuous(nu_i, ch.q_i, ch.p_i,
                                                            Polarization::TM, T);
        return mp - ms - mi;
    };
    return scan_root(h, t_lo_c, t_hi_c, 80);
}

std::optional<double> PhaseMatcher::degeneracy_temperature(double lambda_p_m, double t_lo_c,
                                                           double t_hi_c, const Channel& ch,
                                                           int q_p, int p_p) const {
    const double nu_p = speed_of_light / lambda_p_m;
    const auto h = [&](double T) {
        const double mp = disp_.azimuthal_number_continuous(nu_p, q_p, p_p, Polarization::TE, T);
        const double ms = disp_.azimuthal_number_continuous(nu_p / 2.0, ch.q_s, ch.p_s,
                                                            Polarization::TM, T);
        const double mi = disp_.azimuthal_number_continuous(nu_p / 2.0, ch.q_i, ch.p_i,
                                                            Polarization::TM, T);
        return mp - ms - mi;
    };
    return scan_root(h, t_lo_c, t_hi_c, 80);
}

ChannelSample PhaseMatcher::scan_sample_(double lambda_p_m, const Channel& ch, double T,
                                         int q_p, int p_p) const {
    ChannelSample s;
    s.t_raw_c = T;
    s.t_cal_c = disp_.material().calibrate_temperature(T);
    try {
        const double nu_nominal = speed_of_light / lambda_p_m;
        const auto [m_p, pump_res] =
            disp_.find_azimuthal_number(nu_nominal, q_p, p_p, Polarization::TE, T);
        (void)pump_res;
        ModeIndex pump{m_p, q_p, p_p, Polarization::TE};
        const double nu_p = disp_.mode_frequency(pump, T);
        const auto m_s_cont = solve_signal_continuous(disp_, static_cast<double>(m_p), nu_p,
                                                      ch, T);
        if (!m_s_cont) return s;
        const long m_s0 = std::lround(*m_s_cont);
        bool have = false;
        for (long ds = -1; ds <= 1; ++ds) {
            const long m_s = m_s0 + ds;
            const long m_i = m_p - m_s;
            if (m_s < 1 || m_i < 1) continue;
            ModeTriplet t{pump,
                          ModeIndex{m_s, ch.q_s, ch.p_s, Polarization::TM},
                          ModeIndex{m_i, ch.q_i, ch.p_i, Polarization::TM}};
            if (!momentum_conserved(t)) continue;
            double nu_s, nu_i;
            try {
                nu_s = disp_.mode_frequency(t.signal, T);
                nu_i = disp_.mode_frequency(t.idler, T);
            } catch (const std::domain_error&) {
                continue;
            }
            const double r = nu_p - nu_s - nu_i;
            if (!have || std::abs(r) < std::abs(s.residual_hz)) {
                s.m_p = m_p;
                s.m_s = m_s;
                s.m_i = m_i;
                s.lambda_s_m = speed_of_light / nu_s;
                s.lambda_i_m = speed_of_light / nu_i;
                s.residual_hz = r;
                have = true;
            }
        }
        s.valid = have;
    } catch (const std::domain_error&) {
        s.valid = false;
    }
    return s;
}

ChannelCurve PhaseMatcher::scan_channel(double lambda_p_m, const Channel& ch, double t_lo_c,
                                        double t_hi_c, double dt_c, int q_p, int p_p) const {
    validate_channel_parity(ch, p_p);
    if (!(dt_c > 0.0)) throw std::domain_error("scan step must be positive");
    ChannelCurve curve;
    curve.channel = ch;
    const int n = static_cast<int>(std::floor((t_hi_c - t_lo_c) / dt_c)) + 1;
    curve.samples.resize(std::max(n, 0));
    for (int k = 0; k < n; ++k)
        curve.samples[k] = scan_sample_(lambda_p_m, ch, t_lo_c + k * dt_c, q_p, p_p);
    return curve;
}

std::vector<ChannelCurve> PhaseMatcher::scan_channels_serial(double lambda_p_m,
                                                             const std::vector<Channel>& chs,
                                                             double t_lo_c, double t_hi_c,
                                                             double dt_c, int q_p,
                                                             int p_p) const {
    std::vector<ChannelCurve> out;
    out.reserve(chs.size());
    for (const auto& ch : chs)
        out.push_back(scan_channel(lambda_p_m, ch, t_lo_c, t_hi_c, dt_c, q_p, p_p));
    return out;
}

std::vector<ChannelCurve> PhaseMatcher::scan_channels(double lambda_p_m,
                                                      const std::vector<Channel>& chs,
                                                      double t_lo_c, double t_hi_c, double dt_c,
                                                      int threads, int q_p, int p_p) const {
    for (const auto& ch : chs) validate_channel_parity(ch, p_p);
    if (!(dt_c > 0.0)) throw std::domain_error("scan step must be positive");
    const int n = static_cast<int>(std::floor((t_hi_c - t_lo_c) / dt_c)) + 1;
    std::vector<ChannelCurve> out(chs.size());
    for (size_t c = 0; c < chs.size(); ++c) {
        out[c].channel = chs[c];
        out[c].samples.resize(std::max(n, 0));
    }
    const long total = static_cast<long>(chs.size()) * std::max(n, 0);
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#pragma omp parallel for schedule(dynamic, 4)
#else
    (void)threads;
#endif
    for (long w = 0; w < total; ++w) {
        const size_t c = static_cast<size_t>(w) / std::max(n, 1);
        const int k = static_cast<int>(w % std::max(n, 1));
        out[c].samples[k] =
            scan_sample_(lambda_p_m, chs[c], t_lo_c + k * dt_c, q_p, p_p);
    }
    return out;
}

std::vector<StepEntry> PhaseMatcher::step_tuning(const PhaseMatchSolution& base,
                                                 StepMethod method,
                                                 double t_halfwidth_c) const {
    std::vector<StepEntry> out;
    for (int dir : {+1, -1}) {
        StepEntry e;
        e.method = method;
        e.direction = dir;
        ModeTriplet t = base.triplet;
        switch (method) {
            case StepMethod::Coarse:
                t.signal.m += dir;
                t.idler.m -= dir;
                break;
            case StepMethod::FineSignal:
                t.pump.m += dir;
                t.idler.m += dir;
                break;
            case StepMethod::FineIdler:
                t.pump.m += dir;
                t.signal.m += dir;
                break;
        }
        const double lo = std::max(base.temperature_raw_c - t_halfwidth_c,
                                   MaterialModel::min_temperature_c);
        const double hi = std::min(base.temperature_raw_c + t_halfwidth_c,
                                   MaterialModel::max_temperature_c);
        std::optional<PhaseMatchSolution> sol;
        try {
            sol = find_phasematch_temperature(t, lo, hi);
        } catch (const std::domain_error&) {
            sol = std::nullopt;
        }
        if (sol) {
            e.valid = true;
            e.solution = *sol;
            e.delta_nu_s_hz = sol->nu_s_hz - base.nu_s_hz;
            e.delta_nu_i_hz = sol->nu_i_hz - base.nu_i_hz;
            e.delta_t_c = sol->temperature_raw_c - base.temperature_raw_c;
        }
        out.push_back(e);
    }
    return out;
}

MapScan scan_radius_wavelength(const MaterialModel& material, const ResonatorGeometry& base,
                               MapMode mode, const std::vector<double>& parameters,
                               double fixed_lambda_p_m, const std::vector<TargetLine>& targets,
                               double t_lo_c, double t_hi_c, int threads, int curve_points) {
    MapScan scan;
    scan.mode = mode;
    scan.points.resize(parameters.size());
    const long total = static_cast<long>(parameters.size());
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#pragma omp parallel for schedule(dynamic)
#else
    (void)threads;
#endif
    for (long i = 0; i < total; ++i) {
        const double param = parameters[static_cast<size_t>(i)];
        ResonatorGeometry geom = base;
        double lambda_p = fixed_lambda_p_m;
        if (mode == MapMode::ByRadius) {
            geom.major_radius_m = param;
            geom.rim_curvature_m = base.rim_curvature_m * (param / base.major_radius_m);
        } else {
            lambda_p = param;
        }
        MapPoint pt;
        pt.parameter = param;
        try {
            PhaseMatcher pm(DispersionModel(geom, material));
            const Channel fundamental{};
            if (auto td = pm.degeneracy_temperature(lambda_p, t_lo_c, t_hi_c)) {
                pt.degenerate_found = true;
                pt.degeneracy_t_raw_c = *td;
                pt.degeneracy_t_cal_c = material.calibrate_temperature(*td);
            }
            for (const auto& target : targets) {
                TargetCrossing cr;
                cr.target = target.name;
                cr.target_wavelength_m = target.wavelength_m;
                double lambda_s_target = 0.0;
                const double lam_deg = 2.0 * lambda_p;
                if (target.wavelength_m > lambda_p && target.wavelength_m <= lam_deg) {
                    lambda_s_target = target.wavelength_m;
                } else if (target.wavelength_m > lam_deg) {
                    // idler-side target; solve for its signal partner
                    const double inv = 1.0 / lambda_p - 1.0 / target.wavelength_m;
                    lambda_s_target = 1.0 / inv;
                }
                if (lambda_s_target >= MaterialModel::min_wavelength_m &&
                    lambda_s_target > 0.0) {
                    if (auto tc = pm.channel_crossing_temperature(lambda_p, lambda_s_target,
                                                                  fundamental, t_lo_c, t_hi_c)) {
                        cr.found = true;
                        cr.t_raw_c = *tc;
                        cr.t_cal_c = material.calibrate_temperature(*tc);
                        cr.lambda_s_m = lambda_s_target;
                        cr.lambda_i_m = 1.0 / (1.0 / lambda_p - 1.0 / lambda_s_target);
                    }
                }
                pt.crossings.push_back(cr);
            }
            for (int k = 0; k < curve_points; ++k) {
                const double T = t_lo_c + (t_hi_c - t_lo_c) * k / std::max(curve_points - 1, 1);
                try {
                    if (auto ls = pm.envelope_lambda_s(lambda_p, T, fundamental)) {
                        const double li = 1.0 / (1.0 / lambda_p - 1.0 / *ls);
                        pt.curve.push_back({T, *ls, li});
                    }
                } catch (const std::domain_error&) {
                }
            }
        } catch (const std::domain_error&) {
            // geometry or wavelength outside the validated window: empty point
        }
        scan.points[static_cast<size_t>(i)] = std::move(pt);
    }
    return scan;
}

} // namespace wgmopo
