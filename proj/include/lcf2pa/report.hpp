#pragma once

#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lcf2pa/c2pa.hpp"
#include "lcf2pa/config.hpp"
#include "lcf2pa/constants.hpp"
#include "lcf2pa/e2pa.hpp"
#include "lcf2pa/optics.hpp"
#include "lcf2pa/propagation.hpp"
#include "lcf2pa/uncertainty.hpp"

// Consolidated run report: every derived quantity a configuration supports.
namespace lcf2pa::report {

struct Line {
    std::string key;
    double value;
    std::string unit;
};

struct Block {
    std::string title;
    std::vector<Line> lines;
    std::vector<std::string> notes;
};

struct CheckResult {
    ReferenceCheck check;
    std::optional<double> actual;
    bool pass;
};

struct Report {
    std::vector<Block> blocks;
    std::map<std::string, double> quantities;
    std::vector<CheckResult> checks;
    std::optional<uncertainty::Budget> budget;

    [[nodiscard]] bool all_checks_pass() const
    {
        for (const auto& c : checks)
            if (!c.pass)
                return false;
        return true;
    }
};

namespace detail {

class Builder {
public:
    explicit Builder(Report& r) : r_(r) {}
    void block(const std::string& title) { r_.blocks.push_back({title, {}, {}}); }
    void add(const std::string& key, double value, const std::string& unit)
    {
        r_.blocks.back().lines.push_back({key, value, unit});
        r_.quantities[key] = value;
    }
    void note(const std::string& text) { r_.blocks.back().notes.push_back(text); }

private:
    Report& r_;
};

} // namespace detail

/// Sigma_C in cm^4 s from F_C / W0^2 given per uW^2.
inline double sigma_c_from_fit(double fc_per_w0sq_per_uW2, const Experiment& e, const QuadratureOptions& q = {})
{
    const double per_w2 = fc_per_w0sq_per_uW2 / (kWattsPerMicrowatt * kWattsPerMicrowatt);
    return c2pa::invert_sigma_c(per_w2, e, q);
}

/// Sections that cannot be computed from the configuration are omitted.
inline Report build(const RunConfig& rc)
{
    Report r;
    detail::Builder b(r);
    const auto& e = rc.experiment;
    const auto& f = e.fiber;
    const auto& att = e.attenuation;
    const double le = e.source.wavelength_nm;
    const double lf = e.fluorophore.emission_peak_nm;

    b.block("guidance");
    for (auto [lam, tag] : {std::pair{le, "excitation"}, std::pair{lf, "emission"}}) {
        try {
            const auto v = optics::v_number(f, lam);
            b.add(std::string("v_number_") + tag, v.v_number, "");
            b.add(std::string("modes_") + tag, v.mode_count, "");
        } catch (const DomainError& err) {
            b.note(std::string(tag) + ": " + err.what());
        }
    }
    try {
        b.add("kappa_emission", optics::collection_efficiency(f, lf), "");
    } catch (const DomainError& err) {
        b.note(err.what());
    }

    b.block("propagation");
    {
        propagation::AttenuationModel solvent = att;
        solvent.concentration_M = 0.0;
        b.add("loss_excitation", 1.0 - propagation::transmission(att, le, f.length_cm), "");
        b.add("loss_emission_no_sample", 1.0 - propagation::transmission(solvent, lf, f.length_cm), "");
        b.add("loss_emission", 1.0 - propagation::transmission(att, lf, f.length_cm), "");
        b.add("mode_area_um2", optics::mode_area_from_fwhm(f.mode_fwhm_um), "um^2");
    }
    std::optional<double> coupling;
    if (rc.measurement.total_transmission) {
        const double ea = propagation::absorption_efficiency(att, le, f.length_cm);
        const double es = propagation::scatter_efficiency(att, le, f.length_cm);
        b.add("eta_total", *rc.measurement.total_transmission, "");
        b.add("eta_absorption", ea, "");
        b.add("eta_scatter", es, "");
        coupling = propagation::efficiency_components(*rc.measurement.total_transmission, ea, es);
        b.add("coupling_efficiency", *coupling, "");
    }

    if (e.source.kind == propagation::SourceKind::laser) {
        b.block("classical excitation");
        b.add("pulse_fwhm_z0_fs", propagation::pulse_duration(e.source, f, 0.0), "fs");
        b.add("pulse_fwhm_end_fs", propagation::pulse_duration(e.source, f, f.length_cm), "fs");
        if (e.source.input_power_W > 0.0) {
            b.add("input_power_nW", e.source.input_power_W * 1e9, "nW");
            b.add("peak_flux_z0_per_cm2_s", propagation::peak_flux(e.source, f, att, 0.0), "photons cm^-2 s^-1");
        }
        if (rc.measurement.fc_per_w0sq_per_uW2 && e.number_density_per_cm3() > 0.0) {
            const double s = sigma_c_from_fit(*rc.measurement.fc_per_w0sq_per_uW2, e, rc.quadrature);
            b.add("fc_per_w0sq_cnt_per_s_per_uW2", *rc.measurement.fc_per_w0sq_per_uW2, "cnt s^-1 uW^-2");
            b.add("sigma_c_GM", to_gm(s), "GM");
            b.note(std::string("spectral mode: ") + to_string(e.spectral_mode()));
        }
    }

    if (rc.measurement.budget_csv) {
        const auto inputs = uncertainty::read_budget_csv(*rc.measurement.budget_csv);
        r.budget = uncertainty::propagate(inputs, 2.0);
        b.block("uncertainty");
        b.add("combined_rel", r.budget->combined_rel, "");
        b.add("expanded_rel", r.budget->expanded_rel, "");
        if (r.quantities.count("sigma_c_GM"))
            b.add("sigma_c_expanded_GM", r.quantities["sigma_c_GM"] * r.budget->expanded_rel, "GM");
    }

    if (rc.pair_source) {
        const auto& p = *rc.pair_source;
        b.block("photon pairs");
        b.add("klyshko", p.klyshko(), "");
        b.add("spdc_prefiber_loss", 1.0 - p.free_space_transmission * p.coupling, "");
        b.add("single_rate_z0_per_s", p.single_rate_per_s, "photons s^-1");
        b.add("spdc_power_z0_pW", p.single_rate_per_s * e.source.photon_energy_J * 1e12, "pW");
        b.add("pair_rate_z0_per_s", e2pa::pair_rate(p, att, le, 0.0), "pairs s^-1");
        b.add("photons_per_pulse_fiber", p.single_rate_per_s / e.source.rep_rate_hz, "photons pulse^-1");
        if (rc.measurement.pump_power_mW && rc.measurement.spdc_rate_per_s_per_mW)
            b.add("spdc_generated_rate_per_s", *rc.measurement.pump_power_mW * *rc.measurement.spdc_rate_per_s_per_mW,
                  "photons s^-1");
        if (rc.measurement.multimode_throughput) {
            const double m = e2pa::spatial_mode_count(*rc.measurement.multimode_throughput, coupling.value_or(p.coupling),
                                                      propagation::absorption_efficiency(att, le, f.length_cm),
                                                      propagation::scatter_efficiency(att, le, f.length_cm));
            b.add("spatial_modes_estimate", m, "");
            if (rc.measurement.photons_per_pulse_total)
                b.add("photons_per_pulse_per_mode", *rc.measurement.photons_per_pulse_total / m,
                      "photons pulse^-1 mode^-1");
        }
        if (e.source.spdc_pulse_fwhm_fs) {
            propagation::SourceSpec s = e.source;
            b.add("peak_flux_z0_per_cm2_s", propagation::peak_flux(s, f, att, 0.0), "photons cm^-2 s^-1");
        } else {
            b.note("peak flux omitted: source.effective_pulse_fwhm_fs is not set");
        }
        if (rc.te_model) {
            const auto& te = *rc.te_model;
            b.add("te_z0_fs", te(0.0), "fs");
            b.add("te_end_fs", te(f.length_cm), "fs");
            if (e.source.kind == propagation::SourceKind::spdc && e.number_density_per_cm3() > 0.0) {
                const double ub = e2pa::sigma_e_upper_bound(rc.measurement.fluorescence_lower_bound, e, p, te,
                                                            rc.quadrature);
                b.add("fluorescence_lower_bound_cnt_per_s", rc.measurement.fluorescence_lower_bound, "cnt s^-1");
                b.add("sigma_e_ub_cm2", ub, "cm^2");
                // Classical-equivalent bound sigma_E T_e A_e over the entanglement-area interval.
                const double t0 = te(0.0) * kFemtosecond;
                b.add("sigma_e_ub_te_ae_low_GM", to_gm(ub * t0 * p.entanglement_area.low_um2 * kCm2PerUm2), "GM");
                b.add("sigma_e_ub_te_ae_high_GM", to_gm(ub * t0 * p.entanglement_area.high_um2 * kCm2PerUm2), "GM");
                b.note(std::string("spectral mode: ") + to_string(e.spectral_mode()));
                if (rc.comparison) {
                    const auto& c = *rc.comparison;
                    const double this_te = c.this_te_fs.value_or(te(0.0));
                    b.add("r_ub_this_sigma", e2pa::upper_bound_ratio(ub, this_te, c.this_area_um2, c.sigma_e_ub_cm2,
                                                                     c.te_fs, c.area_um2),
                          "");
                }
            }
        }
    }
    if (rc.comparison) {
        b.block("comparison");
        const auto& c = *rc.comparison;
        b.add("reference_sigma_e_ub_cm2", c.sigma_e_ub_cm2, "cm^2");
        b.add("reference_te_fs", c.te_fs, "fs");
        b.add("reference_area_um2", c.area_um2, "um^2");
        if (c.this_sigma_e_ub_cm2 && (c.this_te_fs || rc.te_model)) {
            const double this_te = c.this_te_fs ? *c.this_te_fs : (*rc.te_model)(0.0);
            b.add("r_ub", e2pa::upper_bound_ratio(*c.this_sigma_e_ub_cm2, this_te, c.this_area_um2, c.sigma_e_ub_cm2,
                                                  c.te_fs, c.area_um2),
                  "");
            b.note("r_ub uses the stated bound of this experiment; r_ub_this_sigma uses the bound computed above");
        }
    }

    for (const auto& chk : rc.checks) {
        CheckResult res{chk, std::nullopt, false};
        if (auto it = r.quantities.find(chk.quantity); it != r.quantities.end()) {
            res.actual = it->second;
            res.pass = chk.passes(it->second);
        }
        r.checks.push_back(res);
    }
    return r;
}

inline std::string render(const Report& r, const std::string& name)
{
    std::ostringstream out;
    out << "run: " << name << '\n';
    out << std::setprecision(6);
    for (const auto& blk : r.blocks) {
        if (blk.lines.empty() && blk.notes.empty())
            continue;
        out << "\n[" << blk.title << "]\n";
        for (const auto& l : blk.lines) {
            out << "  " << std::left << std::setw(36) << l.key << std::right << ' ' << l.value;
            if (!l.unit.empty())
                out << ' ' << l.unit;
            out << '\n';
        }
        for (const auto& n : blk.notes)
            out << "  # " << n << '\n';
    }
    if (!r.checks.empty()) {
        out << "\n[reference checks]\n";
        for (const auto& c : r.checks) {
            out << "  " << (c.pass ? "PASS " : "FAIL ") << std::left << std::setw(36) << c.check.quantity << std::right;
            if (c.actual)
                out << " actual " << *c.actual;
            else
                out << " not computed";
            out << "  expected " << c.check.expected;
            if (c.check.factor)
                out << " within a factor of " << *c.check.factor << '\n';
            else
                out << " +/- " << 100.0 * c.check.rel_tol << "%\n";
        }
    }
    return out.str();
}

} // namespace lcf2pa::report
