#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lcf2pa/c2pa.hpp"
#include "lcf2pa/csv.hpp"
#include "lcf2pa/e2pa.hpp"
#include "lcf2pa/error.hpp"
#include "lcf2pa/frames.hpp"
#include "lcf2pa/frames_io.hpp"
#include "lcf2pa/jsonio.hpp"
#include "lcf2pa/optics.hpp"
#include "lcf2pa/propagation.hpp"
#include "lcf2pa/quadrature.hpp"

// Run configuration: one JSON file per experiment, unit-suffixed keys.
namespace lcf2pa {

/// Measured quantities that feed the inversions and the bookkeeping report.
struct Measurement {
    /// Fitted F_C / W0^2
    std::optional<double> fc_per_w0sq_per_uW2;
    /// eta_T at the excitation wavelength
    std::optional<double> total_transmission;
    /// Q_out / Q_in^mm
    std::optional<double> multimode_throughput;
    double fluorescence_lower_bound = 1.0;
    std::optional<std::string> budget_csv;
    std::optional<double> pump_power_mW;
    std::optional<double> spdc_rate_per_s_per_mW;
    std::optional<double> photons_per_pulse_total;
};

/// Reference experiment for the cross-experiment upper-bound ratio.
struct Comparison {
    double sigma_e_ub_cm2;
    double te_fs;
    double area_um2;
    /// Entanglement area of this experiment used in the ratio
    double this_area_um2;
    /// T_e of this experiment; the model value at z = 0 when absent
    std::optional<double> this_te_fs;
    /// Stated bound of this experiment, for reproducing a published ratio
    std::optional<double> this_sigma_e_ub_cm2;
};

/// Passes when |actual - expected| <= rel_tol |expected|, or, for a factor check,
/// when expected / factor <= actual <= expected * factor.
struct ReferenceCheck {
    std::string quantity;
    double expected;
    double rel_tol = 0.0;
    std::optional<double> factor;

    [[nodiscard]] bool passes(double actual) const
    {
        if (factor)
            return actual >= expected / *factor && actual <= expected * *factor;
        return std::abs(actual - expected) <= rel_tol * std::abs(expected);
    }
};

struct RunConfig {
    std::string name;
    std::string base_dir;
    Experiment experiment;
    std::optional<e2pa::PairSource> pair_source;
    std::optional<e2pa::EntanglementTimeModel> te_model;
    std::optional<std::string> jsi_csv;
    double te_z_step_cm = 1.0;
    std::optional<frames::CameraConfig> camera;
    Measurement measurement;
    std::optional<Comparison> comparison;
    std::vector<ReferenceCheck> checks;
    std::uint64_t seed = 1;
    QuadratureOptions quadrature;
};

namespace config_detail {

using jsonio::Field;
using jsonio::Section;

inline optics::MaterialDispersion material(const Section& s, const std::string& key,
                                           const optics::MaterialDispersion& fallback)
{
    if (!s.has(key))
        return fallback;
    const auto& v = s.raw(key);
    if (v.is_string()) {
        const auto name = v.get<std::string>();
        if (name == "toluene")
            return optics::toluene();
        if (name == "silica")
            return optics::fused_silica();
        throw ConfigError(s.where(key) + ": unknown material '" + name + "' (use toluene, silica or a Sellmeier object)");
    }
    const auto m = s.child(key, {{"name", ""}, {"sellmeier_terms", "um2"}, {"min", "nm"}, {"max", "nm"}});
    optics::MaterialDispersion out;
    out.name = m.text("name", key);
    out.form = optics::DispersionForm::sellmeier;
    out.min_nm = m.number("min_nm");
    out.max_nm = m.number("max_nm");
    const auto& terms = m.raw("sellmeier_terms_um2");
    if (!terms.is_array() || terms.empty())
        throw ConfigError(m.where("sellmeier_terms_um2") + ": expected a list of [B, C] pairs (C in um^2)");
    for (const auto& t : terms) {
        if (!t.is_array() || t.size() != 2 || !t[0].is_number() || !t[1].is_number())
            throw ConfigError(m.where("sellmeier_terms_um2") + ": each term must be [B, C_um2]");
        out.terms.push_back({t[0].get<double>(), t[1].get<double>()});
    }
    return out;
}

inline std::uint64_t count(const Section& s, const std::string& key, std::uint64_t fallback)
{
    if (!s.has(key))
        return fallback;
    const double v = s.number(key);
    if (!(v >= 0.0) || v != std::floor(v))
        throw ConfigError(s.where(key) + ": expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

} // namespace config_detail

inline RunConfig parse_run_config(const jsonio::json& root, const std::filesystem::path& base_dir)
{
    using jsonio::Section;
    using config_detail::count;
    const Section top(root, "",
                      {{"name", ""},
                       {"fiber", ""},
                       {"source", ""},
                       {"attenuation", ""},
                       {"fluorophore", ""},
                       {"detection", ""},
                       {"pair_source", ""},
                       {"te_model", ""},
                       {"camera", ""},
                       {"measurement", ""},
                       {"comparison", ""},
                       {"checks", ""},
                       {"seed", ""},
                       {"quadrature_rel_tol", ""}});
    RunConfig rc;
    rc.base_dir = base_dir.string();
    rc.name = top.text("name", "run");
    rc.seed = count(top, "seed", rc.seed);
    rc.quadrature.rel_tol = top.number("quadrature_rel_tol", rc.quadrature.rel_tol);
    if (!(rc.quadrature.rel_tol > 0.0))
        throw ConfigError("quadrature_rel_tol: must be positive");

    auto& e = rc.experiment;
    {
        const auto f = top.child("fiber", {{"core_diameter", "um"},
                                           {"length", "cm"},
                                           {"core_material", ""},
                                           {"clad_material", ""},
                                           {"mode_fwhm", "um"},
                                           {"effective_mode_area", "um2"},
                                           {"gvd", "fs2_per_cm"},
                                           {"scatter", "per_cm"}});
        e.fiber.core_diameter_um = f.number("core_diameter_um");
        e.fiber.length_cm = f.number("length_cm");
        e.fiber.core = config_detail::material(f, "core_material", e.fiber.core);
        e.fiber.clad = config_detail::material(f, "clad_material", e.fiber.clad);
        e.fiber.gvd_fs2_per_cm = f.number("gvd_fs2_per_cm", e.fiber.gvd_fs2_per_cm);
        e.fiber.scatter_per_cm = f.table("scatter_per_cm", e.fiber.scatter_per_cm);
        if (f.has("effective_mode_area_um2") && f.has("mode_fwhm_um"))
            throw ConfigError("fiber: give either mode_fwhm_um or effective_mode_area_um2, not both");
        if (f.has("effective_mode_area_um2"))
            e.fiber = optics::with_mode_area(e.fiber, f.number("effective_mode_area_um2"));
        else
            e.fiber.mode_fwhm_um = f.number("mode_fwhm_um", e.fiber.mode_fwhm_um);
    }
    {
        const auto s = top.child("source", {{"kind", ""},
                                            {"wavelength", "nm"},
                                            {"photon_energy", "J"},
                                            {"rep_rate", "Hz"},
                                            {"pulse_fwhm", "fs"},
                                            {"pre_fiber_gdd", "fs2"},
                                            {"input_power", "W"},
                                            {"effective_pulse_fwhm", "fs"}});
        const auto kind = s.text("kind", "laser");
        if (kind == "laser")
            e.source.kind = propagation::SourceKind::laser;
        else if (kind == "spdc")
            e.source.kind = propagation::SourceKind::spdc;
        else
            throw ConfigError("source.kind: expected 'laser' or 'spdc'");
        e.source.wavelength_nm = s.number("wavelength_nm", e.source.wavelength_nm);
        e.source.photon_energy_J = s.number("photon_energy_J", e.source.photon_energy_J);
        e.source.rep_rate_hz = s.number("rep_rate_Hz", e.source.rep_rate_hz);
        e.source.pulse_fwhm_fs = s.number("pulse_fwhm_fs", e.source.pulse_fwhm_fs);
        e.source.pre_fiber_gdd_fs2 = s.number("pre_fiber_gdd_fs2", e.source.pre_fiber_gdd_fs2);
        e.source.input_power_W = s.number("input_power_W", e.source.input_power_W);
        e.source.spdc_pulse_fwhm_fs = s.optional_number("effective_pulse_fwhm_fs");
    }
    {
        const auto a = top.child("attenuation", {{"solvent_absorption", "per_cm"},
                                                 {"extinction", "per_M_per_cm"},
                                                 {"extinction_convention", ""},
                                                 {"concentration", "M"}});
        e.attenuation.solvent_absorption_per_cm = a.table("solvent_absorption_per_cm");
        e.attenuation.extinction_per_M_per_cm = a.table("extinction_per_M_per_cm", Table::constant(0.0));
        const auto conv = a.text("extinction_convention", "decadic");
        if (conv == "decadic")
            e.attenuation.convention = propagation::ExtinctionConvention::decadic;
        else if (conv == "napierian")
            e.attenuation.convention = propagation::ExtinctionConvention::napierian;
        else
            throw ConfigError("attenuation.extinction_convention: expected 'decadic' or 'napierian'");
        e.attenuation.concentration_M = a.number("concentration_M");
        e.attenuation.scatter_per_cm = e.fiber.scatter_per_cm;
    }
    if (top.has("fluorophore")) {
        const auto f = top.child("fluorophore", {{"quantum_yield", ""}, {"emission_peak", "nm"}, {"emission_spectrum_csv", ""}});
        e.fluorophore.quantum_yield = f.number("quantum_yield", e.fluorophore.quantum_yield);
        e.fluorophore.emission_peak_nm = f.number("emission_peak_nm", e.fluorophore.emission_peak_nm);
        if (f.has("emission_spectrum_csv"))
            e.fluorophore = with_emission_shape(e.fluorophore, csv::read_table(f.file("emission_spectrum_csv", base_dir)));
    }
    if (top.has("detection")) {
        const auto d = top.child("detection", {{"gamma0", ""}, {"band_min", "nm"}, {"band_max", "nm"}});
        e.detection.gamma0 = d.table("gamma0", e.detection.gamma0);
        e.detection.band_min_nm = d.number("band_min_nm", e.detection.band_min_nm);
        e.detection.band_max_nm = d.number("band_max_nm", e.detection.band_max_nm);
    }
    if (top.has("pair_source")) {
        const auto p = top.child("pair_source", {{"effective_klyshko", ""},
                                                 {"free_space_transmission", ""},
                                                 {"coupling", ""},
                                                 {"klyshko", ""},
                                                 {"single_rate", "per_s"},
                                                 {"spatial_modes", ""},
                                                 {"entanglement_area_low", "um2"},
                                                 {"entanglement_area_high", "um2"}});
        e2pa::PairSource ps;
        ps.effective_klyshko = p.number("effective_klyshko", ps.effective_klyshko);
        ps.free_space_transmission = p.number("free_space_transmission", ps.free_space_transmission);
        ps.coupling = p.number("coupling", ps.coupling);
        ps.single_rate_per_s = p.number("single_rate_per_s");
        ps.spatial_modes = p.number("spatial_modes", ps.spatial_modes);
        ps.entanglement_area.low_um2 = p.number("entanglement_area_low_um2", ps.entanglement_area.low_um2);
        ps.entanglement_area.high_um2 = p.number("entanglement_area_high_um2", ps.entanglement_area.high_um2);
        e2pa::validate(ps);
        if (p.has("klyshko") && std::abs(p.number("klyshko") - ps.klyshko()) > 1e-9)
            throw ConfigError("pair_source.klyshko: must equal effective_klyshko * free_space_transmission * coupling "
                              "(" + std::to_string(ps.klyshko()) + ")");
        e.source.input_rate_per_s = ps.single_rate_per_s;
        rc.pair_source = ps;
    }
    if (top.has("te_model")) {
        const auto t = top.child("te_model", {{"te0", "fs"}, {"s0", ""}, {"jsi_csv", ""}, {"z_step", "cm"}});
        if (t.has("te0_fs") || t.has("s0")) {
            e2pa::EntanglementTimeModel m{t.number("te0_fs"), t.number("s0"), e.source.pre_fiber_gdd_fs2,
                                          e.fiber.gvd_fs2_per_cm};
            e2pa::validate(m);
            rc.te_model = m;
        }
        if (t.has("jsi_csv"))
            rc.jsi_csv = t.file("jsi_csv", base_dir);
        rc.te_z_step_cm = t.number("z_step_cm", rc.te_z_step_cm);
    }
    if (top.has("camera"))
        rc.camera = frames::read_camera(top.raw("camera"), "camera");
    if (top.has("measurement")) {
        const auto m = top.child("measurement", {{"fc_per_w0sq", "cnt_per_s_per_uW2"},
                                                 {"total_transmission", ""},
                                                 {"multimode_throughput", ""},
                                                 {"fluorescence_lower_bound", "cnt_per_s"},
                                                 {"budget_csv", ""},
                                                 {"pump_power", "mW"},
                                                 {"spdc_rate", "per_s_per_mW"},
                                                 {"photons_per_pulse_total", ""}});
        auto& ms = rc.measurement;
        ms.fc_per_w0sq_per_uW2 = m.optional_number("fc_per_w0sq_cnt_per_s_per_uW2");
        ms.total_transmission = m.optional_number("total_transmission");
        ms.multimode_throughput = m.optional_number("multimode_throughput");
        ms.fluorescence_lower_bound = m.number("fluorescence_lower_bound_cnt_per_s", ms.fluorescence_lower_bound);
        if (m.has("budget_csv"))
            ms.budget_csv = m.file("budget_csv", base_dir);
        ms.pump_power_mW = m.optional_number("pump_power_mW");
        ms.spdc_rate_per_s_per_mW = m.optional_number("spdc_rate_per_s_per_mW");
        ms.photons_per_pulse_total = m.optional_number("photons_per_pulse_total");
    }
    if (top.has("comparison")) {
        const auto c = top.child("comparison", {{"sigma_e_ub", "cm2"},
                                                {"te", "fs"},
                                                {"area", "um2"},
                                                {"this_area", "um2"},
                                                {"this_te", "fs"},
                                                {"this_sigma_e_ub", "cm2"}});
        rc.comparison = Comparison{c.number("sigma_e_ub_cm2"), c.number("te_fs"), c.number("area_um2"),
                                   c.number("this_area_um2"), c.optional_number("this_te_fs"),
                                   c.optional_number("this_sigma_e_ub_cm2")};
    }
    if (top.has("checks")) {
        const auto& arr = top.raw("checks");
        if (!arr.is_array())
            throw ConfigError("checks: expected a list");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const jsonio::Section c(arr[i], "checks[" + std::to_string(i) + "]",
                                    {{"quantity", ""}, {"expected", ""}, {"rel_tol", ""}, {"factor", ""}});
            if (c.has("rel_tol") == c.has("factor"))
                throw ConfigError(c.path() + ": give exactly one of rel_tol and factor");
            ReferenceCheck chk{c.text("quantity"), c.number("expected"), c.number("rel_tol", 0.0),
                               c.optional_number("factor")};
            if (chk.factor && !(*chk.factor >= 1.0))
                throw ConfigError(c.path() + ".factor: must be at least 1");
            rc.checks.push_back(chk);
        }
    }
    try {
        validate(e);
    } catch (const ConfigError& err) {
        throw ConfigError(std::string("invalid configuration: ") + err.what());
    }
    return rc;
}

inline RunConfig load_run_config(const std::string& path)
{
    const auto root = jsonio::load(path);
    return parse_run_config(root, std::filesystem::path(path).parent_path());
}

inline jsonio::json material_json(const optics::MaterialDispersion& m)
{
    jsonio::json terms = jsonio::json::array();
    for (const auto& t : m.terms)
        terms.push_back({t.first, t.second});
    return {{"name", m.name}, {"sellmeier_terms_um2", terms}, {"min_nm", m.min_nm}, {"max_nm", m.max_nm}};
}

/// Every parameter the run uses, after defaults are applied.
inline jsonio::json resolved_json(const RunConfig& rc)
{
    using jsonio::json;
    using jsonio::table_json;
    const auto& e = rc.experiment;
    json j;
    j["name"] = rc.name;
    j["seed"] = rc.seed;
    j["quadrature_rel_tol"] = rc.quadrature.rel_tol;
    j["spectral_mode"] = to_string(e.spectral_mode());
    j["fiber"] = {{"core_diameter_um", e.fiber.core_diameter_um},
                  {"length_cm", e.fiber.length_cm},
                  {"core_material", material_json(e.fiber.core)},
                  {"clad_material", material_json(e.fiber.clad)},
                  {"mode_fwhm_um", e.fiber.mode_fwhm_um},
                  {"gvd_fs2_per_cm", e.fiber.gvd_fs2_per_cm},
                  {"scatter_per_cm", table_json(e.fiber.scatter_per_cm)}};
    j["source"] = {{"kind", propagation::to_string(e.source.kind)},
                   {"wavelength_nm", e.source.wavelength_nm},
                   {"photon_energy_J", e.source.photon_energy_J},
                   {"rep_rate_Hz", e.source.rep_rate_hz},
                   {"pulse_fwhm_fs", e.source.pulse_fwhm_fs},
                   {"pre_fiber_gdd_fs2", e.source.pre_fiber_gdd_fs2},
                   {"input_power_W", e.source.input_power_W}};
    if (e.source.spdc_pulse_fwhm_fs)
        j["source"]["effective_pulse_fwhm_fs"] = *e.source.spdc_pulse_fwhm_fs;
    j["attenuation"] = {{"solvent_absorption_per_cm", table_json(e.attenuation.solvent_absorption_per_cm)},
                        {"extinction_per_M_per_cm", table_json(e.attenuation.extinction_per_M_per_cm)},
                        {"extinction_convention", e.attenuation.convention == propagation::ExtinctionConvention::decadic
                                                      ? "decadic"
                                                      : "napierian"},
                        {"concentration_M", e.attenuation.concentration_M}};
    j["fluorophore"] = {{"quantum_yield", e.fluorophore.quantum_yield},
                        {"emission_peak_nm", e.fluorophore.emission_peak_nm}};
    j["detection"] = {{"gamma0", table_json(e.detection.gamma0)},
                      {"band_min_nm", e.detection.band_min_nm},
                      {"band_max_nm", e.detection.band_max_nm}};
    if (rc.pair_source) {
        const auto& p = *rc.pair_source;
        j["pair_source"] = {{"effective_klyshko", p.effective_klyshko},
                            {"free_space_transmission", p.free_space_transmission},
                            {"coupling", p.coupling},
                            {"klyshko", p.klyshko()},
                            {"single_rate_per_s", p.single_rate_per_s},
                            {"spatial_modes", p.spatial_modes},
                            {"entanglement_area_low_um2", p.entanglement_area.low_um2},
                            {"entanglement_area_high_um2", p.entanglement_area.high_um2}};
    }
    if (rc.te_model)
        j["te_model"] = {{"te0_fs", rc.te_model->te0_fs},
                         {"s0", rc.te_model->s0},
                         {"gdd_fs2", rc.te_model->gdd_fs2},
                         {"gvd_fs2_per_cm", rc.te_model->gvd_fs2_per_cm}};
    if (rc.camera)
        j["camera"] = frames::camera_json(*rc.camera);
    return j;
}

} // namespace lcf2pa
