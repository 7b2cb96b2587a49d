#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lcf2pa/lcf2pa.hpp"

namespace fs = std::filesystem;
using namespace lcf2pa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct Grid {
    double start;
    double stop;
    std::size_t points;
    bool log;
};

std::vector<std::string> split_colon(const std::string& s)
{
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':'))
        parts.push_back(item);
    return parts;
}

/// START:STOP:POINTS[:log|lin], log by default.
Grid parse_power_grid(const std::string& spec)
{
    const auto p = split_colon(spec);
    if (p.size() < 3 || p.size() > 4)
        throw ConfigError("--power-grid: expected START:STOP:POINTS[:log|lin], got '" + spec + "'");
    Grid g{csv::to_number(p[0], "--power-grid START"), csv::to_number(p[1], "--power-grid STOP"), 0, true};
    const double n = csv::to_number(p[2], "--power-grid POINTS");
    if (!(n >= 2.0) || n != std::floor(n))
        throw ConfigError("--power-grid: POINTS must be an integer >= 2");
    g.points = static_cast<std::size_t>(n);
    if (p.size() == 4) {
        if (p[3] == "lin")
            g.log = false;
        else if (p[3] != "log")
            throw ConfigError("--power-grid: spacing must be 'log' or 'lin'");
    }
    if (!(g.start > 0.0 && g.stop > g.start))
        throw ConfigError("--power-grid: need 0 < START < STOP");
    return g;
}

std::vector<double> grid_values(const Grid& g)
{
    std::vector<double> v(g.points);
    for (std::size_t i = 0; i < g.points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(g.points - 1);
        v[i] = g.log ? g.start * std::pow(g.stop / g.start, t) : g.start + t * (g.stop - g.start);
    }
    v.back() = g.stop;
    return v;
}

/// START:STOP:STEP in cm, inclusive of STOP.
std::vector<double> parse_z_range(const std::string& spec)
{
    const auto p = split_colon(spec);
    if (p.size() != 3)
        throw ConfigError("--z-range: expected START:STOP:STEP (cm), got '" + spec + "'");
    const double a = csv::to_number(p[0], "--z-range START");
    const double b = csv::to_number(p[1], "--z-range STOP");
    const double h = csv::to_number(p[2], "--z-range STEP");
    if (!(a >= 0.0) || !(b >= a) || !(h > 0.0))
        throw ConfigError("--z-range: need 0 <= START <= STOP and STEP > 0");
    std::vector<double> z;
    for (std::size_t k = 0;; ++k) {
        const double v = a + static_cast<double>(k) * h;
        if (v > b + 1e-9 * h)
            break;
        z.push_back(v);
    }
    if (z.back() < b - 1e-9 * h)
        z.push_back(b);
    return z;
}

fs::path out_path(const std::string& dir, const std::string& file)
{
    fs::create_directories(dir);
    return fs::path(dir) / file;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write " + path.string());
    out << text;
    if (!out)
        throw DataError("failed writing " + path.string());
}

std::string fmt(double v, int precision = 6)
{
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

// simulate-c2pef ------------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::string grid = "1e-9:1e-6:16:log";
    std::optional<double> sigma_gm;
    std::string out = ".";
};

int cmd_simulate(const SimulateArgs& a)
{
    const auto rc = load_run_config(a.config);
    auto e = rc.experiment;
    if (e.source.kind != propagation::SourceKind::laser)
        throw WrongModelError("simulate-c2pef needs a laser source (source.kind = \"laser\")");
    double sigma = 0.0;
    if (a.sigma_gm) {
        if (!(*a.sigma_gm >= 0.0))
            throw ConfigError("--sigma-gm must be non-negative");
        sigma = from_gm(*a.sigma_gm);
    } else if (rc.measurement.fc_per_w0sq_per_uW2) {
        sigma = report::sigma_c_from_fit(*rc.measurement.fc_per_w0sq_per_uW2, e, rc.quadrature);
    } else {
        throw ConfigError("simulate-c2pef: give --sigma-gm or measurement.fc_per_w0sq_cnt_per_s_per_uW2 in the config");
    }
    const auto grid = grid_values(parse_power_grid(a.grid));
    const auto path = out_path(a.out, "c2pef.csv");
    csv::Writer w(path.string(), {"input_power_W", "fc_cnt_per_s"});
    std::vector<frames::PowerPoint> pts;
    const auto factors = c2pa::c2pef_factors(e, rc.quadrature);
    for (double p : grid) {
        const double fc = factors.prefactor * sigma * e.number_density_per_cm3() * p * p * factors.z_integral;
        w.row({p, fc});
        if (fc > 0.0)
            pts.push_back({p, fc, fc * 1e-3});
    }
    w.close();
    std::cout << "sigma_C: " << fmt(to_gm(sigma)) << " GM\n";
    std::cout << "F_C/W0^2: "
              << fmt(factors.prefactor * sigma * e.number_density_per_cm3() * factors.z_integral * 1e-12)
              << " cnt s^-1 uW^-2\n";
    if (pts.size() >= 3)
        std::cout << "log-log slope: " << fmt(frames::fit_power_law(pts).slope, 12) << '\n';
    std::cout << "wrote " << path.string() << '\n';
    return kExitOk;
}

// invert-c2pa -----------------------------------------------------------------------

struct InvertArgs {
    std::vector<std::string> configs;
    std::optional<double> coefficient;
    std::string out;
};

int cmd_invert(const InvertArgs& a)
{
    if (a.coefficient && a.configs.size() != 1)
        throw ConfigError("--coefficient applies to a single --config");
    std::ostringstream rep;
    rep << std::setprecision(6);
    double sum = 0.0, sum_u2 = 0.0;
    bool all_u = true;
    for (const auto& path : a.configs) {
        const auto rc = load_run_config(path);
        const auto coef = a.coefficient ? a.coefficient : rc.measurement.fc_per_w0sq_per_uW2;
        if (!coef)
            throw ConfigError(path + ": measurement.fc_per_w0sq_cnt_per_s_per_uW2 is missing (or pass --coefficient)");
        const double s = to_gm(report::sigma_c_from_fit(*coef, rc.experiment, rc.quadrature));
        rep << rc.name << ": F_C/W0^2 = " << *coef << " cnt s^-1 uW^-2, sigma_C = " << s << " GM";
        if (rc.measurement.budget_csv) {
            const auto inputs = uncertainty::read_budget_csv(*rc.measurement.budget_csv);
            const auto b = uncertainty::propagate(inputs, 2.0);
            const double u = s * b.expanded_rel;
            rep << " +/- " << u << " GM (expanded, k = " << b.coverage_k << ", " << 100.0 * b.expanded_rel << "%)";
            sum_u2 += u * u;
        } else {
            all_u = false;
        }
        rep << "  [" << to_string(rc.experiment.spectral_mode()) << "]\n";
        sum += s;
    }
    if (a.configs.size() > 1) {
        const double n = static_cast<double>(a.configs.size());
        rep << "average: sigma_C = " << sum / n << " GM";
        if (all_u)
            rep << " +/- " << std::sqrt(sum_u2) / n << " GM";
        rep << '\n';
    }
    std::cout << rep.str();
    if (!a.out.empty())
        write_text(out_path(a.out, "invert-c2pa.txt"), rep.str());
    return kExitOk;
}

// e2pa-bound ------------------------------------------------------------------------

struct BoundArgs {
    std::string config;
    double flb = 1.0;
    bool flb_given = false;
    std::string out;
};

int cmd_bound(const BoundArgs& a)
{
    const auto rc = load_run_config(a.config);
    if (!rc.pair_source)
        throw ConfigError(a.config + ": pair_source section is required for e2pa-bound");
    if (!rc.te_model)
        throw ConfigError(a.config + ": te_model.te0_fs and te_model.s0 are required for e2pa-bound");
    const auto& e = rc.experiment;
    const double flb = a.flb_given ? a.flb : rc.measurement.fluorescence_lower_bound;
    const auto& p = *rc.pair_source;
    const auto& te = *rc.te_model;
    const double ub = e2pa::sigma_e_upper_bound(flb, e, p, te, rc.quadrature);
    const double t0 = te(0.0);
    std::ostringstream rep;
    rep << std::setprecision(6);
    rep << "run: " << rc.name << '\n';
    rep << "spectral mode: " << to_string(e.spectral_mode()) << '\n';
    rep << "F_LB: " << flb << " cnt s^-1\n";
    rep << "eta_K: " << p.klyshko() << ", Q(0): " << p.single_rate_per_s << " photons s^-1, pair rate z=0: "
        << e2pa::pair_rate(p, e.attenuation, e.source.wavelength_nm, 0.0) << " pairs s^-1\n";
    rep << "T_e(0): " << t0 << " fs, T_e(l): " << te(e.fiber.length_cm) << " fs (T_e0 = " << te.te0_fs
        << " fs, S0 = " << te.s0 << ", D0 = " << te.gdd_fs2 << " fs^2, beta = " << te.gvd_fs2_per_cm << " fs^2 cm^-1)\n";
    rep << "sigma_E upper bound: " << ub << " cm^2\n";
    rep << "entanglement area interval: [" << p.entanglement_area.low_um2 << ", " << p.entanglement_area.high_um2
        << "] um^2\n";
    rep << "  sigma_E^UB T_e(0) A_e: [" << to_gm(ub * t0 * kFemtosecond * p.entanglement_area.low_um2 * kCm2PerUm2)
        << ", " << to_gm(ub * t0 * kFemtosecond * p.entanglement_area.high_um2 * kCm2PerUm2) << "] GM\n";
    if (rc.comparison) {
        const auto& c = *rc.comparison;
        const double this_te = c.this_te_fs.value_or(t0);
        rep << "R_UB vs reference (" << c.sigma_e_ub_cm2 << " cm^2, " << c.te_fs << " fs, " << c.area_um2
            << " um^2), this area " << c.this_area_um2 << " um^2: "
            << e2pa::upper_bound_ratio(ub, this_te, c.this_area_um2, c.sigma_e_ub_cm2, c.te_fs, c.area_um2) << '\n';
        if (c.this_sigma_e_ub_cm2)
            rep << "R_UB using the stated bound " << *c.this_sigma_e_ub_cm2 << " cm^2: "
                << e2pa::upper_bound_ratio(*c.this_sigma_e_ub_cm2, this_te, c.this_area_um2, c.sigma_e_ub_cm2,
                                           c.te_fs, c.area_um2)
                << '\n';
    }
    std::cout << rep.str();
    if (!a.out.empty())
        write_text(out_path(a.out, "e2pa-bound.txt"), rep.str());
    return kExitOk;
}

// entanglement-time ----------------------------------------------------------------

struct TeArgs {
    std::string config;
    std::string jsi;
    std::optional<double> gdd;
    std::optional<double> gvd;
    std::optional<double> length;
    std::optional<double> te0;
    std::optional<double> s0;
    std::string z_range;
    int pad = 4;
    std::string out = ".";
};

int cmd_entanglement_time(const TeArgs& a)
{
    std::optional<RunConfig> rc;
    if (!a.config.empty())
        rc = load_run_config(a.config);
    const double gdd = a.gdd ? *a.gdd : (rc ? rc->experiment.source.pre_fiber_gdd_fs2 : 0.0);
    const double gvd = a.gvd ? *a.gvd : (rc ? rc->experiment.fiber.gvd_fs2_per_cm : 0.0);
    const double length = a.length ? *a.length : (rc ? rc->experiment.fiber.length_cm : 0.0);
    std::string jsi_path = a.jsi;
    if (jsi_path.empty() && rc && rc->jsi_csv)
        jsi_path = *rc->jsi_csv;

    std::vector<double> z;
    if (!a.z_range.empty()) {
        z = parse_z_range(a.z_range);
    } else {
        if (!(length > 0.0))
            throw ConfigError("entanglement-time: give --z-range or a fiber length (--length-cm or --config)");
        z = jsi::z_grid(length, rc ? rc->te_z_step_cm : 1.0);
    }
    const double l = length > 0.0 ? length : z.back();

    std::vector<e2pa::TeSample> samples;
    if (!jsi_path.empty()) {
        const auto js = jsi::read_csv(jsi_path);
        jsi::validate(js);
        const double ridge = jsi::ridge_offset_steps(js);
        if (std::abs(ridge) > 5.0)
            std::cerr << "warning: joint spectrum centroid lies " << ridge
                      << " frequency steps from omega_s + omega_i = omega_p\n";
        samples = jsi::entanglement_time_profile(js, gdd, gvd, z, l, a.pad);
    } else {
        e2pa::EntanglementTimeModel m;
        if (a.te0 && a.s0)
            m = {*a.te0, *a.s0, gdd, gvd};
        else if (rc && rc->te_model)
            m = {rc->te_model->te0_fs, rc->te_model->s0, gdd, gvd};
        else
            throw ConfigError("entanglement-time: give --jsi, or --te0-fs and --s0, or a config with te_model");
        e2pa::validate(m);
        for (double v : z) {
            if (v < 0.0 || v > l)
                throw DomainError("entanglement-time: z must lie within [0, fiber length]");
            samples.push_back({v, m(v)});
        }
    }

    const auto path = out_path(a.out, "te_profile.csv");
    csv::Writer w(path.string(), {"z_cm", "te_fs"});
    for (const auto& s : samples)
        w.row({s.z_cm, s.te_fs});
    w.close();
    std::cout << std::setprecision(6);
    for (const auto& s : samples)
        std::cout << "z = " << s.z_cm << " cm: T_e = " << s.te_fs << " fs\n";
    if (samples.size() >= 4) {
        try {
            const auto fit = e2pa::fit_te_model(samples, gdd, gvd);
            std::cout << "fit: T_e0 = " << fit.model.te0_fs << " fs, S0 = " << fit.model.s0
                      << ", max relative residual = " << fit.max_relative_residual << ", rms residual = "
                      << fit.rms_residual_fs << " fs\n";
            write_text(out_path(a.out, "te_fit.json"),
                       jsonio::json{{"te0_fs", fit.model.te0_fs},
                                    {"s0", fit.model.s0},
                                    {"gdd_fs2", gdd},
                                    {"gvd_fs2_per_cm", gvd},
                                    {"max_relative_residual", fit.max_relative_residual},
                                    {"rms_residual_fs", fit.rms_residual_fs}}
                               .dump(1) +
                           "\n");
        } catch (const NumericalError& err) {
            std::cerr << "fit skipped: " << err.what() << '\n';
        }
    } else {
        std::cout << "fit skipped: at least 4 z samples are needed\n";
    }
    std::cout << "wrote " << path.string() << '\n';
    return kExitOk;
}

// analyze-frames ----------------------------------------------------------------------

struct AnalyzeArgs {
    std::string manifest;
    std::string scaling;
    double cic_k = 5.0;
    double allan_factor = 1.25;
    std::string out = ".";
};

frames::Scaling parse_scaling(const std::string& s)
{
    if (s == "quadratic")
        return frames::Scaling::quadratic;
    if (s == "linear")
        return frames::Scaling::linear;
    throw ConfigError("--scaling: expected 'linear' or 'quadratic'");
}

int cmd_analyze(const AnalyzeArgs& a)
{
    const auto loaded = frames::read_series(a.manifest);
    frames::AnalysisOptions opt;
    opt.scaling = a.scaling.empty() ? frames::default_scaling(loaded.series.source_kind) : parse_scaling(a.scaling);
    opt.cic_threshold_k = a.cic_k;
    opt.allan.factor = a.allan_factor;
    const auto res = frames::analyze_series(loaded.series, loaded.camera, opt);

    const auto rates_path = out_path(a.out, "rates.csv");
    {
        csv::Writer w(rates_path.string(), {"frame", "rate_cnt_per_s", "normalized_rate_cnt_per_s", "kept", "w_out_W"});
        for (std::size_t i = 0; i < res.rates.rates.size(); ++i)
            w.row({static_cast<double>(i), res.rates.rates[i], res.rates.normalized[i], res.rates.kept[i] ? 1.0 : 0.0,
                   res.rates.w_out_W[i]});
        w.close();
    }
    const auto allan_path = out_path(a.out, "allan.csv");
    {
        csv::Writer w(allan_path.string(), {"m_frames", "allan_raw_cnt_per_s", "allan_normalized_cnt_per_s"});
        for (std::size_t i = 0; i < res.allan_normalized.points.size(); ++i)
            w.row({static_cast<double>(res.allan_normalized.points[i].m), res.allan_raw.points[i].deviation,
                   res.allan_normalized.points[i].deviation});
        w.close();
    }
    std::ostringstream rep;
    rep << std::setprecision(6);
    rep << "frames: " << res.rates.rates.size() << ", rejected (CIC): " << 100.0 * res.rejected_fraction << "%\n";
    rep << "scaling: " << frames::to_string(opt.scaling) << '\n';
    rep << "raw rate: " << res.mean_raw_rate << " +/- " << res.allan_raw.selected_deviation << " cnt s^-1 (m = "
        << res.allan_raw.selected_m << ")\n";
    rep << "normalized rate: " << res.mean_rate << " +/- " << res.allan_normalized.selected_deviation
        << " cnt s^-1 (m = " << res.allan_normalized.selected_m << ")\n";
    std::cout << rep.str() << "wrote " << rates_path.string() << ", " << allan_path.string() << '\n';
    write_text(out_path(a.out, "summary.txt"), rep.str());
    return kExitOk;
}

// synth-frames --------------------------------------------------------------------------

struct SynthArgs {
    std::string config;
    double truth_rate = 1.6;
    long long n = 2058;
    std::uint64_t seed = 1;
    bool seed_given = false;
    double cic_probability = 0.0;
    std::string drift = "none";
    double drift_amount = 0.0;
    std::string kind;
    double nominal_power = 1e-9;
    std::string encoding = "f64";
    std::string out = "frames";
};

int cmd_synth(const SynthArgs& a)
{
    frames::CameraConfig cam;
    frames::SynthesisOptions opt;
    if (!a.config.empty()) {
        const auto rc = load_run_config(a.config);
        if (rc.camera)
            cam = *rc.camera;
        opt.source_kind = rc.experiment.source.kind;
        opt.seed = rc.seed;
    }
    if (a.n < 1)
        throw ConfigError("synth-frames: --n must be at least 1");
    opt.n_frames = static_cast<std::size_t>(a.n);
    opt.truth_rate = a.truth_rate;
    if (a.seed_given)
        opt.seed = a.seed;
    opt.cic_probability = a.cic_probability;
    opt.nominal_power_W = a.nominal_power;
    if (a.drift == "none")
        opt.drift.model = frames::DriftModel::none;
    else if (a.drift == "linear")
        opt.drift.model = frames::DriftModel::linear;
    else if (a.drift == "random_walk")
        opt.drift.model = frames::DriftModel::random_walk;
    else
        throw ConfigError("--drift: expected none, linear or random_walk");
    opt.drift.amount = a.drift_amount;
    if (a.kind == "laser")
        opt.source_kind = propagation::SourceKind::laser;
    else if (a.kind == "spdc")
        opt.source_kind = propagation::SourceKind::spdc;
    else if (!a.kind.empty())
        throw ConfigError("--kind: expected laser or spdc");
    frames::ImageEncoding enc;
    if (a.encoding == "f64")
        enc = frames::ImageEncoding::f64;
    else if (a.encoding == "csv")
        enc = frames::ImageEncoding::csv;
    else
        throw ConfigError("--encoding: expected f64 or csv");
    const auto series = frames::synthesize_series(opt, cam);
    frames::write_series(series, cam, a.out, enc);
    std::cout << "wrote " << series.frames.size() << " frames (seed " << opt.seed << ") to "
              << (fs::path(a.out) / "manifest.json").string() << '\n';
    return kExitOk;
}

// report ----------------------------------------------------------------------------------

struct ReportArgs {
    std::string config;
    std::string out;
};

int cmd_report(const ReportArgs& a)
{
    const auto rc = load_run_config(a.config);
    const auto r = report::build(rc);
    std::string text = report::render(r, rc.name);
    if (r.budget)
        text += "\n" + uncertainty::budget_report(
            *r.budget, (r.quantities.count("sigma_e_ub_cm2") ? "sigma_E upper bound (" : "sigma_C (") + rc.name + ")");
    std::cout << text;
    if (!a.out.empty()) {
        write_text(out_path(a.out, "report.txt"), text);
        write_text(out_path(a.out, "resolved.json"), resolved_json(rc).dump(1) + "\n");
    }
    return kExitOk;
}

// profile / fit-scatter ---------------------------------------------------------------------

struct ProfileArgs {
    std::string config;
    double step = 1.0;
    std::string out = ".";
};

int cmd_profile(const ProfileArgs& a)
{
    const auto rc = load_run_config(a.config);
    const auto& e = rc.experiment;
    const auto z = jsi::z_grid(e.fiber.length_cm, a.step);
    const auto prof = propagation::profile(e.source, e.fiber, e.attenuation, z);
    const auto path = out_path(a.out, "profile.csv");
    csv::Writer w(path.string(),
                  {"z_cm", "power_W", "photon_rate_per_s", "pulse_fwhm_fs", "peak_flux_per_cm2_s", "emission_integral"});
    const c2pa::EmissionKernel emission(e);
    for (const auto& p : prof)
        w.row({p.z_cm, p.power_W, p.photon_rate_per_s, p.pulse_fwhm_fs, p.peak_flux_per_cm2_s, emission(p.z_cm)});
    w.close();
    std::cout << "wrote " << path.string() << '\n';
    return kExitOk;
}

struct ScatterArgs {
    std::string csv_path;
};

int cmd_fit_scatter(const ScatterArgs& a)
{
    const auto doc = csv::read(a.csv_path);
    std::vector<propagation::ScatterSample> s;
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto where = a.csv_path + ":" + std::to_string(r + 2);
        if (doc.rows[r].size() < 2)
            throw DataError(where + ": expected z_cm,intensity");
        s.push_back({csv::to_number(doc.rows[r][0], where), csv::to_number(doc.rows[r][1], where)});
    }
    const auto fit = propagation::fit_exponential_decay(s);
    std::cout << std::setprecision(6) << "coefficient: " << fit.coefficient_per_cm << " +/- " << fit.coefficient_stderr
              << " cm^-1\namplitude: " << fit.amplitude << "\nrms log residual: " << fit.rms_log_residual << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Liquid-core fiber two-photon absorption toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "lcf2pa 1.0");

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate-c2pef", "Forward laser-excited fluorescence over a power grid");
    c_sim->add_option("--config", sim.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    c_sim->add_option("--power-grid", sim.grid, "START:STOP:POINTS[:log|lin] in W")->capture_default_str();
    c_sim->add_option("--sigma-gm", sim.sigma_gm, "Cross-section in GM (default: inverted from the config)");
    c_sim->add_option("--out", sim.out, "Output directory")->capture_default_str();

    InvertArgs inv;
    auto* c_inv = app.add_subcommand("invert-c2pa", "Cross-section from a fitted F_C/W0^2; several configs are averaged");
    c_inv->add_option("--config", inv.configs, "Run configuration(s)")->required()->check(CLI::ExistingFile);
    c_inv->add_option("--coefficient", inv.coefficient, "F_C/W0^2 in cnt s^-1 uW^-2 (overrides the config)");
    c_inv->add_option("--out", inv.out, "Output directory");

    BoundArgs bnd;
    auto* c_bnd = app.add_subcommand("e2pa-bound", "Upper bound on the entangled cross-section");
    c_bnd->add_option("--config", bnd.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    auto* flb_opt = c_bnd->add_option("--flb", bnd.flb, "Fluorescence lower bound, cnt s^-1")->capture_default_str();
    c_bnd->add_option("--out", bnd.out, "Output directory");

    TeArgs te;
    auto* c_te = app.add_subcommand("entanglement-time", "Entanglement time along the fiber and (T_e0, S0) fit");
    c_te->add_option("--config", te.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
    c_te->add_option("--jsi", te.jsi, "Joint spectral intensity grid (CSV)")->check(CLI::ExistingFile);
    c_te->add_option("--gdd-fs2", te.gdd, "Pre-fiber GDD D0");
    c_te->add_option("--gvd-fs2-per-cm", te.gvd, "Fiber GVD beta");
    c_te->add_option("--length-cm", te.length, "Fiber length");
    c_te->add_option("--te0-fs", te.te0, "Model T_e0 (without --jsi)");
    c_te->add_option("--s0", te.s0, "Model S0 (without --jsi)");
    c_te->add_option("--z-range", te.z_range, "START:STOP:STEP in cm");
    c_te->add_option("--pad", te.pad, "Zero-padding factor")->capture_default_str();
    c_te->add_option("--out", te.out, "Output directory")->capture_default_str();

    AnalyzeArgs an;
    auto* c_an = app.add_subcommand("analyze-frames", "Rates, CIC rejection, normalization and Allan deviation");
    c_an->add_option("--manifest", an.manifest, "Frame-series manifest.json")->required();
    c_an->add_option("--scaling", an.scaling, "linear or quadratic (default from source kind)");
    c_an->add_option("--cic-k", an.cic_k, "CIC threshold in robust deviations")->capture_default_str();
    c_an->add_option("--allan-factor", an.allan_factor, "Allowed excess over the 1/sqrt(m) trend")->capture_default_str();
    c_an->add_option("--out", an.out, "Output directory")->capture_default_str();

    SynthArgs syn;
    auto* c_syn = app.add_subcommand("synth-frames", "Synthesize a camera frame series");
    c_syn->add_option("--config", syn.config, "Run configuration (camera section used if present)")
        ->check(CLI::ExistingFile);
    c_syn->add_option("--truth-rate", syn.truth_rate, "Detected rate at nominal power, cnt s^-1")->capture_default_str();
    c_syn->add_option("--n", syn.n, "Number of frames")->capture_default_str();
    auto* seed_opt = c_syn->add_option("--seed", syn.seed, "Noise seed");
    c_syn->add_option("--cic-prob", syn.cic_probability, "CIC spike probability per frame")->capture_default_str();
    c_syn->add_option("--drift", syn.drift, "none, linear or random_walk")->capture_default_str();
    c_syn->add_option("--drift-amount", syn.drift_amount, "Drift size (fractional)")->capture_default_str();
    c_syn->add_option("--kind", syn.kind, "laser or spdc (default from config, else laser)");
    c_syn->add_option("--nominal-power-W", syn.nominal_power, "Nominal output power")->capture_default_str();
    c_syn->add_option("--encoding", syn.encoding, "f64 or csv")->capture_default_str();
    c_syn->add_option("--out", syn.out, "Output directory")->capture_default_str();

    ReportArgs rep;
    auto* c_rep = app.add_subcommand("report", "Consolidated report of all derived quantities");
    c_rep->add_option("--config", rep.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    c_rep->add_option("--out", rep.out, "Output directory");

    ProfileArgs prof;
    auto* c_prof = app.add_subcommand("profile", "Power, pulse width and peak flux along the fiber");
    c_prof->add_option("--config", prof.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    c_prof->add_option("--step-cm", prof.step, "z step")->capture_default_str();
    c_prof->add_option("--out", prof.out, "Output directory")->capture_default_str();

    ScatterArgs sc;
    auto* c_sc = app.add_subcommand("fit-scatter", "Exponential decay fit of side-scatter intensity");
    c_sc->add_option("--csv", sc.csv_path, "CSV with z_cm,intensity")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (c_sim->parsed())
            return cmd_simulate(sim);
        if (c_inv->parsed())
            return cmd_invert(inv);
        if (c_bnd->parsed()) {
            bnd.flb_given = flb_opt->count() > 0;
            return cmd_bound(bnd);
        }
        if (c_te->parsed())
            return cmd_entanglement_time(te);
        if (c_an->parsed())
            return cmd_analyze(an);
        if (c_syn->parsed()) {
            syn.seed_given = seed_opt->count() > 0;
            return cmd_synth(syn);
        }
        if (c_rep->parsed())
            return cmd_report(rep);
        if (c_prof->parsed())
            return cmd_profile(prof);
        if (c_sc->parsed())
            return cmd_fit_scatter(sc);
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const lcf2pa::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}
