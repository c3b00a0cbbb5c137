#include "wgmopo/correlation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "wgmopo/errors.hpp"
#include "wgmopo/fitting.hpp"

namespace wgmopo {

double pair_density(double t_s, double t1_s) {
    if (!(t1_s > 0.0)) throw std::domain_error("ring-down time t1 must be positive");
    return 0.5 / t1_s * std::exp(-std::abs(t_s) / t1_s);
}

double heralded_density(double dt_s, double t1_s, double t2_s) {
    if (!(t1_s > 0.0) || !(t2_s > 0.0))
        throw std::domain_error("time constants t1, t2 must be positive");
    if (dt_s < 0.0) return 0.5 * std::exp(dt_s / t1_s) / (t1_s + t2_s);
    // (exp(-dt/t1) - exp(-dt/t2)) / (t1 - t2) has a removable singularity at
    // t1 == t2; rewrite with x = dt (t2 - t1)/(t1 t2):
    //   term = exp(-dt/t1) * (dt/(t1 t2)) * expm1(x)/x
    // and use the series of expm1(x)/x when x is small.
    const double x = dt_s * (t2_s - t1_s) / (t1_s * t2_s);
    double term;
    if (std::abs(x) < 1e-3) {
        const double phi = 1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0;
        term = std::exp(-dt_s / t1_s) * (dt_s / (t1_s * t2_s)) * phi;
    } else {
        term = (std::exp(-dt_s / t1_s) - std::exp(-dt_s / t2_s)) / (t1_s - t2_s);
    }
    return 0.5 * (std::exp(-dt_s / t2_s) / (t1_s + t2_s) + term);
}

void Histogram::validate() const {
    if (bin_centers_s.size() < 2) throw std::domain_error("histogram needs at least two bins");
    if (bin_centers_s.size() != counts.size())
        throw std::domain_error("histogram centers/counts size mismatch");
    if (!(bin_width_s > 0.0)) throw std::domain_error("bin width must be positive");
    for (size_t i = 1; i < bin_centers_s.size(); ++i) {
        const double d = bin_centers_s[i] - bin_centers_s[i - 1];
        if (std::abs(d - bin_width_s) > 1e-6 * bin_width_s)
            throw std::domain_error("histogram bins are not uniform");
    }
    for (double c : counts)
        if (c < 0.0) throw std::domain_error("histogram counts must be nonnegative");
}

Histogram Histogram::from_text(const std::string& text, const std::string& origin) {
    Histogram h;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double t_ns, c;
        if (!(ls >> t_ns >> c)) {
            // tolerate a header line or blank line
            std::string word;
            std::istringstream probe(line);
            if (probe >> word && std::isdigit(static_cast<unsigned char>(word[0])))
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": malformed histogram row");
            continue;
        }
        h.bin_centers_s.push_back(t_ns * 1e-9);
        h.counts.push_back(c);
    }
    if (h.bin_centers_s.size() < 2)
        throw ConfigError(origin + ": histogram needs at least two rows");
    h.bin_width_s = h.bin_centers_s[1] - h.bin_centers_s[0];
    h.validate();
    return h;
}

Histogram Histogram::from_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open histogram file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str(), path.string());
}

namespace {

double density_value(CorrelationFamily family, double t, double t1, double t2) {
    return family == CorrelationFamily::Pair ? pair_density(t, t1)
                                             : heralded_density(t, t1, t2);
}

} // namespace

FitResult fit_histogram(const Histogram& hist, CorrelationFamily family,
                        std::optional<CorrelationModel> init) {
    hist.validate();
    const int n = static_cast<int>(hist.counts.size());
    const int nonzero = static_cast<int>(
        std::count_if(hist.counts.begin(), hist.counts.end(), [](double c) { return c > 0.0; }));
    if (nonzero < 20)
        throw std::domain_error("histogram fit needs at least 20 bins with nonzero counts");

    FitResult out;
    out.n_bins = n;

    const double cmax = *std::max_element(hist.counts.begin(), hist.counts.end());
    const double cmin = *std::min_element(hist.counts.begin(), hist.counts.end());
    if (cmax == cmin) {
        out.status = FitStatus::FlatData;
        out.model.amplitude = 0.0;
        out.model.background = cmax;
        out.model.t1_s = hist.bin_width_s;
        out.model.t2_s = hist.bin_width_s;
        return out;
    }

    // initial guesses
    std::vector<double> sorted = hist.counts;
    std::sort(sorted.begin(), sorted.end());
    double bg0 = 0.0;
    const int decile = std::max(n / 10, 1);
    for (int i = 0; i < decile; ++i) bg0 += sorted[static_cast<size_t>(i)];
    bg0 /= decile;

    const auto imax = std::distance(hist.counts.begin(),
                                    std::max_element(hist.counts.begin(), hist.counts.end()));
    double t0_0 = hist.bin_centers_s[static_cast<size_t>(imax)];

    double t1_0, t2_0;
    if (init) {
        t1_0 = init->t1_s;
        t2_0 = init->t2_s > 0.0 ? init->t2_s : init->t1_s;
        if (init->background > 0.0) bg0 = init->background;
    } else {
        // crude width estimate from the excess-count second moment
        double w2 = 0.0, norm = 0.0;
        for (int i = 0; i < n; ++i) {
            const double exc = std::max(hist.counts[static_cast<size_t>(i)] - bg0, 0.0);
            const double dt = hist.bin_centers_s[static_cast<size_t>(i)] - t0_0;
            w2 += exc * dt * dt;
            norm += exc;
        }
        const double w = norm > 0.0 ? std::sqrt(w2 / norm) : hist.bin_width_s;
        if (family == CorrelationFamily::Pair) {
            t1_0 = std::max(w / std::sqrt(2.0), hist.bin_width_s);
            t2_0 = t1_0;
        } else {
            t1_0 = std::max(w / 2.0, hist.bin_width_s);
            t2_0 = std::max(w / 1.5, hist.bin_width_s);
        }
    }
    double amp0;
    if (init && init->amplitude > 0.0) {
        amp0 = init->amplitude;
    } else {
        const double peak0 = density_value(family, 0.0, t1_0, t2_0);
        amp0 = std::max((cmax - bg0) / peak0, 1e-30);
    }

    const bool heralded = family == CorrelationFamily::Heralded;
    const int npar = heralded ? 5 : 4;
    Eigen::VectorXd x0(npar);
    if (heralded)
        x0 << std::log(t1_0), std::log(t2_0), amp0, bg0, t0_0;
    else
        x0 << std::log(t1_0), amp0, bg0, t0_0;

    const auto residuals = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(n);
        const double t1 = std::exp(x[0]);
        const double t2 = heralded ? std::exp(x[1]) : 0.0;
        const double amp = x[heralded ? 2 : 1];
        const double bg = x[heralded ? 3 : 2];
        const double t0 = x[heralded ? 4 : 3];
        for (int i = 0; i < n; ++i) {
            const double t = hist.bin_centers_s[static_cast<size_t>(i)] - t0;
            const double model = amp * (heralded ? heralded_density(t, t1, t2)
                                                 : pair_density(t, t1)) + bg;
            r[i] = model - hist.counts[static_cast<size_t>(i)];
        }
        return r;
    };

    LMOptions opt;
    opt.diff_step = 1e-7;
    const LMResult lm = levenberg_marquardt(residuals, x0, opt);

    out.model.t1_s = std::exp(lm.parameters[0]);
    out.model.t2_s = heralded ? std::exp(lm.parameters[1]) : 0.0;
    out.model.amplitude = lm.parameters[heralded ? 2 : 1];
    out.model.background = lm.parameters[heralded ? 3 : 2];
    out.t0_s = lm.parameters[heralded ? 4 : 3];
    out.chi2 = lm.chi2;
    out.iterations = lm.iterations;
    out.status = lm.converged ? FitStatus::Converged : FitStatus::MaxIterations;

    // back-transform standard errors of log-parameters
    out.parameter_names = heralded
        ? std::vector<std::string>{"t1_s", "t2_s", "amplitude", "background", "t0_s"}
        : std::vector<std::string>{"t1_s", "amplitude", "background", "t0_s"};
    out.std_errors.resize(static_cast<size_t>(npar));
    for (int j = 0; j < npar; ++j) {
        double se = std::sqrt(std::max(lm.covariance(j, j), 0.0));
        if (j == 0) se *= out.model.t1_s;
        if (heralded && j == 1) se *= out.model.t2_s;
        out.std_errors[static_cast<size_t>(j)] = se;
    }
    return out;
}

} // namespace wgmopo
