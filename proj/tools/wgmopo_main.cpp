// Batch front end: loads a run configuration, executes one scan or fit
// subcommand, and emits CSV/JSON result files with provenance headers.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "wgmopo/config.hpp"
#include "wgmopo/correlation.hpp"
#include "wgmopo/emit.hpp"
#include "wgmopo/errors.hpp"
#include "wgmopo/opo.hpp"
#include "wgmopo/phasematch.hpp"
#include "wgmopo/tuning.hpp"

using json = nlohmann::ordered_json;
using namespace wgmopo;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;
constexpr int exit_notfound = 4;

struct Context {
    IniConfig cfg;
    MaterialModel material = MaterialModel::default_mg_linbo3();
    ResonatorGeometry geometry;
    DispersionOptions disp_options;
    std::filesystem::path out_dir = ".";
    int threads = 0;
    bool emit_csv = true;
    bool emit_json = true;
    long seed = 1;
    Provenance prov;

    DispersionModel dispersion() const {
        return DispersionModel(geometry, material, disp_options);
    }
    PhaseMatcher matcher() const { return PhaseMatcher(dispersion()); }

    json meta() const {
        json m;
        m["tool"] = prov.tool;
        m["version"] = prov.version;
        std::ostringstream h;
        h << std::hex << prov.config_hash;
        m["config_hash"] = h.str();
        m["seed"] = seed;
        return m;
    }
    void write_csv(const std::string& name, const CsvBuilder& csv) const {
        if (emit_csv) write_file_atomic(out_dir / name, csv.str());
    }
    void write_json(const std::string& name, const json& j) const {
        if (emit_json) write_file_atomic(out_dir / name, j.dump(2) + "\n");
    }
};

struct CommonOpts {
    std::string config_path;
    std::string material_path;
    std::string out_dir = ".";
    int threads = 0;
    std::string format = "both";
};

Context load_context(const CommonOpts& opts) {
    Context ctx;
    std::string hashed;
    if (!opts.config_path.empty()) {
        ctx.cfg = IniConfig::from_file(opts.config_path);
        hashed += ctx.cfg.text();
    }
    std::string material_path = opts.material_path;
    if (material_path.empty())
        material_path = ctx.cfg.get_string("material.file", "");
    if (!material_path.empty()) {
        ctx.material = MaterialModel::from_file(material_path);
        std::ifstream m(material_path);
        std::stringstream ss;
        ss << m.rdbuf();
        hashed += ss.str();
    } else {
        hashed += "builtin:mgo_linbo3";
    }

    ctx.geometry.major_radius_m = ctx.cfg.get_double("geometry.R_mm", 2.5) * 1e-3;
    ctx.geometry.rim_curvature_m = ctx.cfg.get_double("geometry.rho_mm", 0.58) * 1e-3;
    ctx.geometry.thickness_m = ctx.cfg.get_double("geometry.h_mm", 0.5) * 1e-3;
    ctx.geometry.reference_temperature_c =
        ctx.cfg.get_double("geometry.reference_temperature_C", 25.0);
    ctx.geometry.validate();
    ctx.disp_options.exact_airy = ctx.cfg.get_bool("dispersion.exact_airy", false);
    ctx.out_dir = opts.out_dir;
    std::filesystem::create_directories(ctx.out_dir);
    ctx.threads = opts.threads;
    ctx.seed = ctx.cfg.get_long("rng.seed", 1);
    ctx.emit_csv = opts.format == "csv" || opts.format == "both";
    ctx.emit_json = opts.format == "json" || opts.format == "both";
    if (!ctx.emit_csv && !ctx.emit_json)
        throw ConfigError("format must be csv, json, or both");
    ctx.prov = Provenance{"wgmopo", version_string, fnv1a_hash(hashed)};
    return ctx;
}

double pump_wavelength(const Context& ctx) {
    return ctx.cfg.get_double("pump.wavelength_nm", 532.0) * 1e-9;
}

struct ScanWindow {
    double t_lo, t_hi, dt;
};

ScanWindow scan_window(const Context& ctx) {
    ScanWindow w;
    w.t_lo = ctx.cfg.get_double("scan.T_min_C", 95.0);
    w.t_hi = ctx.cfg.get_double("scan.T_max_C", 115.0);
    w.dt = ctx.cfg.get_double("scan.T_step_C", 0.25);
    return w;
}

std::vector<Channel> parse_channels(const Context& ctx) {
    std::vector<Channel> out;
    const std::string raw = ctx.cfg.get_string("channels.list", "1,1,0,0,q111");
    std::istringstream groups(raw);
    std::string group;
    while (std::getline(groups, group, ';')) {
        if (group.find_first_not_of(" \t") == std::string::npos) continue;
        std::istringstream fields(group);
        std::string f;
        std::vector<std::string> cells;
        while (std::getline(fields, f, ',')) {
            f.erase(0, f.find_first_not_of(" \t"));
            f.erase(f.find_last_not_of(" \t") + 1);
            cells.push_back(f);
        }
        if (cells.size() < 4)
            throw ConfigError("channels.list entries need q_s,q_i,p_s,p_i[,name]");
        Channel ch;
        try {
            ch.q_s = std::stoi(cells[0]);
            ch.q_i = std::stoi(cells[1]);
            ch.p_s = std::stoi(cells[2]);
            ch.p_i = std::stoi(cells[3]);
        } catch (const std::exception&) {
            throw ConfigError("channels.list entries must be integers");
        }
        ch.name = cells.size() > 4 ? cells[4]
                                   : "q" + cells[0] + cells[1] + "p" + cells[2] + cells[3];
        out.push_back(ch);
    }
    if (out.empty()) throw ConfigError("channels.list is empty");
    return out;
}

std::vector<TargetLine> parse_targets(const Context& ctx) {
    std::vector<TargetLine> out;
    const std::string raw = ctx.cfg.get_string(
        "targets.lines", "cs_d1:894.593; rb_d1:794.979; telecom_c:1550.0");
    std::istringstream groups(raw);
    std::string group;
    while (std::getline(groups, group, ';')) {
        const auto colon = group.find(':');
        if (colon == std::string::npos) continue;
        TargetLine t;
        t.name = group.substr(0, colon);
        t.name.erase(0, t.name.find_first_not_of(" \t"));
        t.name.erase(t.name.find_last_not_of(" \t") + 1);
        try {
            t.wavelength_m = std::stod(group.substr(colon + 1)) * 1e-9;
        } catch (const std::exception&) {
            throw ConfigError("targets.lines wavelengths must be numeric (nm)");
        }
        out.push_back(t);
    }
    return out;
}

json solution_json(const PhaseMatchSolution& sol) {
    json j;
    j["m_p"] = sol.triplet.pump.m;
    j["m_s"] = sol.triplet.signal.m;
    j["m_i"] = sol.triplet.idler.m;
    j["q"] = {sol.triplet.pump.q, sol.triplet.signal.q, sol.triplet.idler.q};
    j["p"] = {sol.triplet.pump.p, sol.triplet.signal.p, sol.triplet.idler.p};
    j["T_raw_C"] = sol.temperature_raw_c;
    j["T_cal_C"] = sol.temperature_cal_c;
    j["nu_p_Hz"] = sol.nu_p_hz;
    j["nu_s_Hz"] = sol.nu_s_hz;
    j["nu_i_Hz"] = sol.nu_i_hz;
    j["lambda_s_nm"] = speed_of_light / sol.nu_s_hz * 1e9;
    j["lambda_i_nm"] = speed_of_light / sol.nu_i_hz * 1e9;
    j["residual_Hz"] = sol.residual_hz;
    return j;
}

// ------------------------------------------------------------------ spectrum
int cmd_spectrum(const Context& ctx) {
    const double t_c = ctx.cfg.get_double("spectrum.T_C", 100.0);
    const int q_max = static_cast<int>(ctx.cfg.get_long("spectrum.q_max", 3));
    const int p_max = static_cast<int>(ctx.cfg.get_long("spectrum.p_max", 3));
    const std::string pol_s = ctx.cfg.get_string("spectrum.polarization", "TE");
    if (pol_s != "TE" && pol_s != "TM") throw ConfigError("spectrum.polarization must be TE|TM");
    const Polarization pol = pol_s == "TE" ? Polarization::TE : Polarization::TM;

    const DispersionModel disp = ctx.dispersion();
    const double nu0 = speed_of_light / pump_wavelength(ctx);
    const auto [m0, r0] = disp.find_azimuthal_number(nu0, 1, 0, pol, t_c);
    const double fsr = disp.free_spectral_range({m0, 1, 0, pol}, t_c);
    const double lo = nu0 - fsr / 2.0, hi = nu0 + fsr / 2.0;

    struct Row {
        double nu;
        long m;
        int q, p;
    };
    std::vector<Row> rows;
    for (int q = 1; q <= q_max; ++q) {
        for (int p = 0; p <= p_max; ++p) {
            const auto [mc, rc] = disp.find_azimuthal_number(nu0, q, p, pol, t_c);
            for (long m = mc - 2; m <= mc + 2; ++m) {
                if (m < 1) continue;
                const double nu = disp.mode_frequency({m, q, p, pol}, t_c);
                if (nu >= lo && nu < hi) rows.push_back({nu, m, q, p});
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.nu < b.nu; });

    CsvBuilder csv(ctx.prov, "nu_Hz,lambda_nm,m,q,p,pol");
    json jrows = json::array();
    for (const auto& r : rows) {
        csv.row({format_double(r.nu), format_double(speed_of_light / r.nu * 1e9),
                 std::to_string(r.m), std::to_string(r.q), std::to_string(r.p), pol_s});
        json jr;
        jr["nu_Hz"] = r.nu;
        jr["lambda_nm"] = speed_of_light / r.nu * 1e9;
        jr["m"] = r.m;
        jr["q"] = r.q;
        jr["p"] = r.p;
        jr["pol"] = pol_s;
        jrows.push_back(jr);
    }
    ctx.write_csv("spectrum.csv", csv);
    json j;
    j["meta"] = ctx.meta();
    j["T_C"] = t_c;
    j["fsr_Hz"] = fsr;
    j["modes"] = jrows;
    ctx.write_json("spectrum.json", j);
    return exit_ok;
}

// ------------------------------------------------------------------ channels
int cmd_channels(const Context& ctx) {
    const auto window = scan_window(ctx);
    const auto channels = parse_channels(ctx);
    const PhaseMatcher pm = ctx.matcher();
    const auto curves = pm.scan_channels(pump_wavelength(ctx), channels, window.t_lo,
                                         window.t_hi, window.dt, ctx.threads);

    CsvBuilder csv(ctx.prov,
                   "channel,q_s,q_i,p_s,p_i,m_p,m_s,m_i,T_raw_C,T_cal_C,lambda_s_nm,"
                   "lambda_i_nm,residual_Hz");
    json jchannels = json::array();
    for (const auto& curve : curves) {
        json jc;
        jc["channel"] = curve.channel.name;
        jc["q_s"] = curve.channel.q_s;
        jc["q_i"] = curve.channel.q_i;
        jc["p_s"] = curve.channel.p_s;
        jc["p_i"] = curve.channel.p_i;
        json samples = json::array();
        for (const auto& s : curve.samples) {
            if (!s.valid) continue; // not-found points appear as gaps
            csv.row({curve.channel.name, std::to_string(curve.channel.q_s),
                     std::to_string(curve.channel.q_i), std::to_string(curve.channel.p_s),
                     std::to_string(curve.channel.p_i), std::to_string(s.m_p),
                     std::to_string(s.m_s), std::to_string(s.m_i), format_double(s.t_raw_c),
                     format_double(s.t_cal_c), format_double(s.lambda_s_m * 1e9),
                     format_double(s.lambda_i_m * 1e9), format_double(s.residual_hz)});
            json js;
            js["m_p"] = s.m_p;
            js["m_s"] = s.m_s;
            js["m_i"] = s.m_i;
            js["T_raw_C"] = s.t_raw_c;
            js["T_cal_C"] = s.t_cal_c;
            js["lambda_s_nm"] = s.lambda_s_m * 1e9;
            js["lambda_i_nm"] = s.lambda_i_m * 1e9;
            js["residual_Hz"] = s.residual_hz;
            samples.push_back(js);
        }
        jc["samples"] = samples;
        jchannels.push_back(jc);
    }
    ctx.write_csv("channels.csv", csv);
    json j;
    j["meta"] = ctx.meta();
    j["channels"] = jchannels;
    ctx.write_json("channels.json", j);
    return exit_ok;
}

// ------------------------------------------------------------------ map
int cmd_map(const Context& ctx) {
    const std::string mode_s = ctx.cfg.get_string("map.mode", "radius");
    MapMode mode;
    if (mode_s == "radius") mode = MapMode::ByRadius;
    else if (mode_s == "pump_wavelength") mode = MapMode::ByPumpWavelength;
    else throw ConfigError("map.mode must be radius|pump_wavelength");

    std::vector<double> params;
    if (mode == MapMode::ByRadius) {
        const double lo = ctx.cfg.get_double("map.radius_min_mm", 0.2) * 1e-3;
        const double hi = ctx.cfg.get_double("map.radius_max_mm", 5.0) * 1e-3;
        const long n = ctx.cfg.get_long("map.points", 25);
        for (long i = 0; i < n; ++i)
            params.push_back(lo + (hi - lo) * i / std::max<long>(n - 1, 1));
    } else {
        const double lo = ctx.cfg.get_double("map.lambda_min_nm", 500.0) * 1e-9;
        const double hi = ctx.cfg.get_double("map.lambda_max_nm", 560.0) * 1e-9;
        const long n = ctx.cfg.get_long("map.points", 25);
        for (long i = 0; i < n; ++i)
            params.push_back(lo + (hi - lo) * i / std::max<long>(n - 1, 1));
    }
    const double t_lo = ctx.cfg.get_double("map.T_min_C", 21.0);
    const double t_hi = ctx.cfg.get_double("map.T_max_C", 245.0);
    const int curve_points = static_cast<int>(ctx.cfg.get_long("map.curve_points", 0));
    const auto targets = parse_targets(ctx);

    const MapScan scan =
        scan_radius_wavelength(ctx.material, ctx.geometry, mode, params, pump_wavelength(ctx),
                               targets, t_lo, t_hi, ctx.threads, curve_points);

    CsvBuilder csv(ctx.prov, "parameter,kind,name,T_raw_C,T_cal_C,lambda_s_nm,lambda_i_nm");
    json jpoints = json::array();
    for (const auto& p : scan.points) {
        json jp;
        jp["parameter"] = p.parameter;
        if (p.degenerate_found) {
            csv.row({format_double(p.parameter), "degeneracy", "signal=idler",
                     format_double(p.degeneracy_t_raw_c), format_double(p.degeneracy_t_cal_c),
                     "", ""});
            jp["degeneracy_T_raw_C"] = p.degeneracy_t_raw_c;
            jp["degeneracy_T_cal_C"] = p.degeneracy_t_cal_c;
        }
        json jcross = json::array();
        for (const auto& c : p.crossings) {
            if (!c.found) continue;
            csv.row({format_double(p.parameter), "crossing", c.target,
                     format_double(c.t_raw_c), format_double(c.t_cal_c),
                     format_double(c.lambda_s_m * 1e9), format_double(c.lambda_i_m * 1e9)});
            json jc;
            jc["target"] = c.target;
            jc["T_raw_C"] = c.t_raw_c;
            jc["T_cal_C"] = c.t_cal_c;
            jc["lambda_s_nm"] = c.lambda_s_m * 1e9;
            jc["lambda_i_nm"] = c.lambda_i_m * 1e9;
            jcross.push_back(jc);
        }
        jp["crossings"] = jcross;
        json jcurve = json::array();
        for (const auto& row : p.curve)
            jcurve.push_back({row[0], row[1] * 1e9, row[2] * 1e9});
        jp["curve_T_lambda_s_lambda_i"] = jcurve;
        jpoints.push_back(jp);
    }
    ctx.write_csv("map.csv", csv);
    json j;
    j["meta"] = ctx.meta();
    j["mode"] = mode_s;
    j["points"] = jpoints;
    ctx.write_json("map.json", j);
    return exit_ok;
}

// ------------------------------------------------------------------ triplet
int cmd_triplet(const Context& ctx) {
    const auto targets = parse_targets(ctx);
    const std::string name = ctx.cfg.get_string("triplet.target", "cs_d1");
    double lambda_target = ctx.cfg.get_double("triplet.target_nm", 0.0) * 1e-9;
    if (lambda_target <= 0.0) {
        for (const auto& t : targets)
            if (t.name == name) lambda_target = t.wavelength_m;
    }
    if (lambda_target <= 0.0)
        throw ConfigError("triplet.target does not name a known target line");
    Channel ch;
    if (ctx.cfg.has("triplet.channel")) {
        const auto v = ctx.cfg.get_doubles("triplet.channel");
        if (v.size() != 4) throw ConfigError("triplet.channel must be q_s,q_i,p_s,p_i");
        ch.q_s = static_cast<int>(v[0]);
        ch.q_i = static_cast<int>(v[1]);
        ch.p_s = static_cast<int>(v[2]);
        ch.p_i = static_cast<int>(v[3]);
    }
    const auto window = scan_window(ctx);
    const PhaseMatcher pm = ctx.matcher();
    const double lambda_p = pump_wavelength(ctx);

    const auto t_env =
        pm.channel_crossing_temperature(lambda_p, lambda_target, ch, window.t_lo, window.t_hi);
    if (!t_env) {
        std::cerr << "no phase-matched crossing of " << lambda_target * 1e9
                  << " nm inside the temperature window\n";
        return exit_notfound;
    }
    const auto seed = pm.seed_triplet(lambda_p, *t_env, ch);
    if (!seed) {
        std::cerr << "no integer mode triplet near the envelope crossing\n";
        return exit_notfound;
    }
    const auto sol = pm.find_phasematch_temperature(
        *seed, std::max(*t_env - 3.0, MaterialModel::min_temperature_c),
        std::min(*t_env + 3.0, MaterialModel::max_temperature_c));
    if (!sol) {
        std::cerr << "integer triplet did not phase-match near the envelope crossing\n";
        return exit_notfound;
    }

    json j;
    j["meta"] = ctx.meta();
    j["target"] = name;
    j["target_nm"] = lambda_target * 1e9;
    j["envelope_T_raw_C"] = *t_env;
    j["solution"] = solution_json(*sol);
    json steps = json::array();
    CsvBuilder csv(ctx.prov,
                   "method,direction,T_raw_C,T_cal_C,delta_nu_s_Hz,delta_nu_i_Hz,delta_T_C");
    const std::pair<StepMethod, std::string> methods[] = {
        {StepMethod::Coarse, "coarse"},
        {StepMethod::FineSignal, "fine-signal"},
        {StepMethod::FineIdler, "fine-idler"}};
    for (const auto& [method, mname] : methods) {
        for (const auto& e : pm.step_tuning(*sol, method)) {
            json je;
            je["method"] = mname;
            je["direction"] = e.direction;
            je["valid"] = e.valid;
            if (e.valid) {
                je["T_raw_C"] = e.solution.temperature_raw_c;
                je["T_cal_C"] = e.solution.temperature_cal_c;
                je["delta_nu_s_Hz"] = e.delta_nu_s_hz;
                je["delta_nu_i_Hz"] = e.delta_nu_i_hz;
                je["delta_T_C"] = e.delta_t_c;
                csv.row({mname, std::to_string(e.direction),
                         format_double(e.solution.temperature_raw_c),
                         format_double(e.solution.temperature_cal_c),
                         format_double(e.delta_nu_s_hz), format_double(e.delta_nu_i_hz),
                         format_double(e.delta_t_c)});
            } else {
                csv.row({mname, std::to_string(e.direction), "", "", "", "", ""});
            }
            steps.push_back(je);
        }
    }
    j["steps"] = steps;
    ctx.write_json("triplet.json", j);
    ctx.write_csv("steps.csv", csv);
    return exit_ok;
}

// ------------------------------------------------------------------ opo
int cmd_opo(const Context& ctx) {
    const double p0 = ctx.cfg.get_double("opo.P0_uW", 3.0) * 1e-6;
    const double gamma_s = ctx.cfg.get_double("opo.gamma_s_MHz", 6.6) * 1e6;
    const double gamma_i = ctx.cfg.get_double("opo.gamma_i_MHz", 6.6) * 1e6;
    const double kappa_p = ctx.cfg.get_double("opo.kappa_p", 0.5);
    const double kappa_s = ctx.cfg.get_double("opo.kappa_s", 0.5);
    const double kappa_i = ctx.cfg.get_double("opo.kappa_i", 0.5);
    const double delta_p = ctx.cfg.get_double("opo.delta_p", 0.0);
    const double mismatch = ctx.cfg.get_double("opo.mismatch", 0.0);
    const double lambda_s = ctx.cfg.get_double("opo.lambda_s_nm", 894.593) * 1e-9;
    const double nu_p = speed_of_light / pump_wavelength(ctx);
    const double nu_s = speed_of_light / lambda_s;
    const double nu_i = nu_p - nu_s;
    if (nu_i <= 0.0) throw ConfigError("opo.lambda_s_nm must lie below the pump frequency");

    const double p_lo = ctx.cfg.get_double("opo.P_min_uW", 0.0) * 1e-6;
    const double p_hi = ctx.cfg.get_double("opo.P_max_uW", 30.0) * 1e-6;
    const long n = ctx.cfg.get_long("opo.points", 61);
    const double pth = threshold(p0, delta_p, mismatch);

    CsvBuilder csv(ctx.prov,
                   "P_pump_W,P_threshold_W,pair_rate_internal_per_s,rate_warning,"
                   "R_s_per_s,R_i_per_s,R_si_per_s,P_s_W,P_i_W,below_threshold");
    json jrows = json::array();
    for (long k = 0; k < n; ++k) {
        const double pp = p_lo + (p_hi - p_lo) * k / std::max<long>(n - 1, 1);
        const PairRate rate = pair_rate_internal(gamma_s, gamma_i, pp, pth);
        const ExternalRates ext = external_rates(rate.pairs_per_s, kappa_s, kappa_i);
        const OutputPower ps = output_power(pp, p0, delta_p, mismatch, kappa_p, kappa_s,
                                            nu_s, nu_p);
        const OutputPower pi = output_power(pp, p0, delta_p, mismatch, kappa_p, kappa_i,
                                            nu_i, nu_p);
        csv.row({format_double(pp), format_double(pth), format_double(rate.pairs_per_s),
                 rate.validity_warning ? "1" : "0", format_double(ext.signal_per_s),
                 format_double(ext.idler_per_s), format_double(ext.pair_per_s),
                 format_double(ps.watts), format_double(pi.watts),
                 ps.below_threshold ? "1" : "0"});
        json jr;
        jr["P_pump_W"] = pp;
        jr["P_threshold_W"] = pth;
        jr["pair_rate_internal_per_s"] = rate.pairs_per_s;
        jr["rate_warning"] = rate.validity_warning;
        jr["R_s_per_s"] = ext.signal_per_s;
        jr["R_i_per_s"] = ext.idler_per_s;
        jr["R_si_per_s"] = ext.pair_per_s;
        jr["P_s_W"] = ps.watts;
        jr["P_i_W"] = pi.watts;
        jr["below_threshold"] = ps.below_threshold;
        jrows.push_back(jr);
    }
    ctx.write_csv("opo.csv", csv);
    json j;
    j["meta"] = ctx.meta();
    j["P0_W"] = p0;
    j["P_threshold_W"] = pth;
    j["sweep"] = jrows;
    ctx.write_json("opo.json", j);
    return exit_ok;
}

// ------------------------------------------------------------------ tune
int cmd_tune(const Context& ctx, const std::string& mechanism_path_cli) {
    const auto window = scan_window(ctx);
    const PhaseMatcher pm = ctx.matcher();
    const double lambda_p = pump_wavelength(ctx);
    const auto targets = parse_targets(ctx);
    const std::string name = ctx.cfg.get_string("tune.target", "cs_d1");
    double lambda_target = 0.0;
    for (const auto& t : targets)
        if (t.name == name) lambda_target = t.wavelength_m;
    if (lambda_target <= 0.0) throw ConfigError("tune.target does not name a target line");

    const auto t_env = pm.channel_crossing_temperature(lambda_p, lambda_target, Channel{},
                                                       window.t_lo, window.t_hi);
    if (!t_env) {
        std::cerr << "no phase-matched base point inside the temperature window\n";
        return exit_notfound;
    }
    const auto seed = pm.seed_triplet(lambda_p, *t_env, Channel{});
    if (!seed) return exit_notfound;
    const auto base = pm.find_phasematch_temperature(
        *seed, std::max(*t_env - 3.0, MaterialModel::min_temperature_c),
        std::min(*t_env + 3.0, MaterialModel::max_temperature_c));
    if (!base) return exit_notfound;

    ShiftMechanism mech;
    std::string mechanism_path = mechanism_path_cli;
    if (mechanism_path.empty())
        mechanism_path = ctx.cfg.get_string("tune.mechanism_file", "");
    const std::string kind = ctx.cfg.get_string("tune.mechanism", "substrate");
    if (!mechanism_path.empty()) {
        mech = ShiftMechanism::from_file(mechanism_path);
    } else if (kind == "electrooptic") {
        mech = electrooptic_mechanism(pm.dispersion(), *base,
                                      ctx.cfg.get_double("tune.fringe_factor", 1.0),
                                      ctx.cfg.get_double("tune.bias_range_V", 10.0));
    } else {
        throw ConfigError("tune needs --mechanism FILE or tune.mechanism = electrooptic");
    }

    const double target_hz = ctx.cfg.get_double("tune.target_offset_MHz", 0.0) * 1e6;
    json j;
    j["meta"] = ctx.meta();
    j["base"] = solution_json(*base);
    j["mechanism"] = {{"rate_pump_Hz_per_unit", mech.rate_pump_hz_per_unit},
                      {"rate_signal_Hz_per_unit", mech.rate_signal_hz_per_unit},
                      {"rate_idler_Hz_per_unit", mech.rate_idler_hz_per_unit},
                      {"control_min", mech.control_min},
                      {"control_max", mech.control_max},
                      {"control_unit", mech.control_unit}};
    j["target_offset_Hz"] = target_hz;
    try {
        const RetuneResult r = retune(pm, *base, mech, target_hz);
        j["control_value"] = r.control_value;
        j["T_raw_C"] = r.temperature_raw_c;
        j["T_cal_C"] = r.temperature_cal_c;
        j["pump_relock_Hz"] = r.pump_frequency_hz;
        j["solution"] = solution_json(r.solution);
        ctx.write_json("tune.json", j);
        return exit_ok;
    } catch (const RangeError& e) {
        j["error"] = e.what();
        j["achievable_offset_Hz"] = e.achievable_hz;
        ctx.write_json("tune.json", j);
        std::cerr << e.what() << "\n";
        return exit_notfound;
    }
}

// ------------------------------------------------------------------ corrfit
int cmd_corrfit(const Context& ctx, const std::string& histogram_path,
                const std::string& family_s) {
    CorrelationFamily family;
    if (family_s == "pair") family = CorrelationFamily::Pair;
    else if (family_s == "heralded") family = CorrelationFamily::Heralded;
    else throw ConfigError("corrfit family must be pair|heralded");

    const Histogram hist = Histogram::from_csv(histogram_path);
    const FitResult fit = fit_histogram(hist, family);

    json j;
    j["meta"] = ctx.meta();
    j["family"] = family_s;
    j["t1_ns"] = fit.model.t1_s * 1e9;
    if (family == CorrelationFamily::Heralded) j["t2_ns"] = fit.model.t2_s * 1e9;
    j["gamma_s_MHz"] = bandwidth_from_time(fit.model.t1_s) / 1e6;
    if (family == CorrelationFamily::Heralded)
        j["gamma_atom_MHz"] = bandwidth_from_time(fit.model.t2_s) / 1e6;
    j["amplitude"] = fit.model.amplitude;
    j["background"] = fit.model.background;
    j["t0_ns"] = fit.t0_s * 1e9;
    json errors;
    for (size_t k = 0; k < fit.parameter_names.size(); ++k) {
        double scale = 1.0;
        if (fit.parameter_names[k] == "t1_s" || fit.parameter_names[k] == "t2_s" ||
            fit.parameter_names[k] == "t0_s")
            scale = 1e9;
        const std::string name = fit.parameter_names[k] == "t1_s"   ? "t1_ns"
                                 : fit.parameter_names[k] == "t2_s" ? "t2_ns"
                                 : fit.parameter_names[k] == "t0_s" ? "t0_ns"
                                                                    : fit.parameter_names[k];
        errors[name] = fit.std_errors[k] * scale;
    }
    j["errors"] = errors;
    j["chi2"] = fit.chi2;
    j["n_bins"] = fit.n_bins;
    j["status"] = fit.status == FitStatus::Converged      ? "converged"
                  : fit.status == FitStatus::MaxIterations ? "max_iterations"
                                                           : "flat_data";
    ctx.write_json("corrfit.json", j);
    return fit.status == FitStatus::MaxIterations ? exit_numerical : exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"whispering-gallery parametric oscillator simulation toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    app.add_option("--config", opts.config_path, "run configuration file")
        ->envname("WGMOPO_CONFIG");
    app.add_option("--material", opts.material_path, "material asset file")
        ->envname("WGMOPO_MATERIAL");
    app.add_option("--out", opts.out_dir, "output directory")->envname("WGMOPO_OUT");
    app.add_option("--threads", opts.threads, "worker threads (0 = library default)")
        ->envname("WGMOPO_THREADS");
    app.add_option("--format", opts.format, "csv|json|both")->envname("WGMOPO_FORMAT");

    auto* spectrum = app.add_subcommand("spectrum", "mode spectrum over one pump FSR");
    auto* channels = app.add_subcommand("channels", "temperature scan of conversion channels");
    auto* map = app.add_subcommand("map", "radius / pump-wavelength phase-matching maps");
    auto* triplet = app.add_subcommand("triplet", "phase-matched triplet at a target line");
    auto* opo = app.add_subcommand("opo", "threshold, pair-rate and output-power sweep");
    auto* tune = app.add_subcommand("tune", "continuous retuning with a second mechanism");
    std::string mechanism_path;
    tune->add_option("--mechanism", mechanism_path, "mechanism spec file");
    auto* corrfit = app.add_subcommand("corrfit", "fit a coincidence histogram");
    std::string histogram_path, family = "heralded";
    corrfit->add_option("histogram", histogram_path, "CSV/text histogram file")->required();
    corrfit->add_option("--family", family, "pair|heralded");

    CLI11_PARSE(app, argc, argv);

    try {
        const Context ctx = load_context(opts);
        if (spectrum->parsed()) return cmd_spectrum(ctx);
        if (channels->parsed()) return cmd_channels(ctx);
        if (map->parsed()) return cmd_map(ctx);
        if (triplet->parsed()) return cmd_triplet(ctx);
        if (opo->parsed()) return cmd_opo(ctx);
        if (tune->parsed()) return cmd_tune(ctx, mechanism_path);
        if (corrfit->parsed()) return cmd_corrfit(ctx, histogram_path, family);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_ok;
}
