#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lcf2pa/constants.hpp"
#include "lcf2pa/error.hpp"
#include "lcf2pa/optics.hpp"
#include "lcf2pa/table.hpp"

// Power, photon rate, pulse duration and peak flux along the filled fiber.
namespace lcf2pa::propagation {

using optics::FiberSpec;

enum class SourceKind { laser, spdc };

inline const char* to_string(SourceKind k) { return k == SourceKind::laser ? "laser" : "spdc"; }

struct SourceSpec {
    SourceKind kind = SourceKind::laser;
    double wavelength_nm = 810.0;
    double photon_energy_J = 2.45e-19;
    double rep_rate_hz = 8e7;
    /// Transform-limited FWHM at the laser output (laser sources).
    double pulse_fwhm_fs = 110.0;
    double pre_fiber_gdd_fs2 = 0.0;
    /// W0, average power at z = 0 (laser).
    double input_power_W = 0.0;
    /// Q(0), single-photon rate at z = 0 (spdc).
    double input_rate_per_s = 0.0;
    /// Only used for peak-flux reporting of pair sources; there is no default.
    std::optional<double> spdc_pulse_fwhm_fs;
};

inline void validate(const SourceSpec& s)
{
    if (!(s.rep_rate_hz > 0.0))
        throw ConfigError("source: repetition rate must be positive");
    if (!(s.wavelength_nm > 0.0))
        throw ConfigError("source: wavelength must be positive");
    if (s.kind == SourceKind::laser && !(s.pulse_fwhm_fs > 0.0))
        throw ConfigError("source: pulse FWHM must be positive");
    if (s.input_power_W < 0.0 || s.input_rate_per_s < 0.0)
        throw ConfigError("source: input power and photon rate must be non-negative");
    const double expected = photon_energy_J(s.wavelength_nm);
    if (std::abs(s.photon_energy_J - expected) > 1e-3 * expected) {
        std::ostringstream msg;
        msg << "source: photon energy " << s.photon_energy_J << " J inconsistent with " << s.wavelength_nm
            << " nm (expected " << expected << " J within 0.1%)";
        throw ConfigError(msg.str());
    }
    if (s.spdc_pulse_fwhm_fs && !(*s.spdc_pulse_fwhm_fs > 0.0))
        throw ConfigError("source: effective pair pulse FWHM must be positive");
}

enum class ExtinctionConvention {
    /// epsilon is a base-10 molar coefficient; multiplied by ln 10 in the exponent
    decadic,
    /// epsilon enters the natural exponential directly
    napierian,
};

struct AttenuationModel {
    Table solvent_absorption_per_cm = Table::constant(0.0);
    Table extinction_per_M_per_cm = Table::constant(0.0);
    ExtinctionConvention convention = ExtinctionConvention::decadic;
    double concentration_M = 0.0;
    Table scatter_per_cm = Table::constant(0.0);
};

inline void validate(const AttenuationModel& a)
{
    if (a.solvent_absorption_per_cm.min_value() < 0.0)
        throw ConfigError("attenuation: solvent absorption must be non-negative");
    if (a.extinction_per_M_per_cm.min_value() < 0.0)
        throw ConfigError("attenuation: extinction coefficient must be non-negative");
    if (a.scatter_per_cm.min_value() < 0.0)
        throw ConfigError("attenuation: scattering coefficient must be non-negative");
    if (a.concentration_M < 0.0)
        throw ConfigError("attenuation: concentration must be non-negative");
}

/// Solvent plus sample absorption coefficient (cm^-1) at a wavelength.
inline double absorption_coefficient(const AttenuationModel& a, double wavelength_nm)
{
    const double base = a.convention == ExtinctionConvention::decadic ? kLn10 : 1.0;
    return a.solvent_absorption_per_cm(wavelength_nm) +
           base * a.extinction_per_M_per_cm(wavelength_nm) * a.concentration_M;
}

inline double scatter_coefficient(const AttenuationModel& a, double wavelength_nm)
{
    return a.scatter_per_cm(wavelength_nm);
}

inline double total_coefficient(const AttenuationModel& a, double wavelength_nm)
{
    return absorption_coefficient(a, wavelength_nm) + scatter_coefficient(a, wavelength_nm);
}

inline void require_non_negative_z(double z_cm, const char* op)
{
    if (!(z_cm >= 0.0))
        throw DomainError(std::string(op) + ": position z must be non-negative");
}

/// eta_A(lambda, z)
inline double absorption_efficiency(const AttenuationModel& a, double wavelength_nm, double z_cm)
{
    require_non_negative_z(z_cm, "absorption_efficiency");
    return std::exp(-absorption_coefficient(a, wavelength_nm) * z_cm);
}

/// eta_S(lambda, z)
inline double scatter_efficiency(const AttenuationModel& a, double wavelength_nm, double z_cm)
{
    require_non_negative_z(z_cm, "scatter_efficiency");
    return std::exp(-scatter_coefficient(a, wavelength_nm) * z_cm);
}

inline double transmission(const AttenuationModel& a, double wavelength_nm, double z_cm)
{
    require_non_negative_z(z_cm, "transmission");
    return std::exp(-total_coefficient(a, wavelength_nm) * z_cm);
}

/// Average power at z = 0; for pair sources derived from the photon rate.
inline double initial_power_W(const SourceSpec& s)
{
    return s.kind == SourceKind::laser ? s.input_power_W : s.input_rate_per_s * s.photon_energy_J;
}

inline double power_at(const SourceSpec& s, const AttenuationModel& a, double z_cm)
{
    require_non_negative_z(z_cm, "power_at");
    if (z_cm == 0.0)
        return initial_power_W(s);
    return initial_power_W(s) * transmission(a, s.wavelength_nm, z_cm);
}

inline double photon_rate(const SourceSpec& s, const AttenuationModel& a, double z_cm)
{
    return power_at(s, a, z_cm) / s.photon_energy_J;
}

/// Coupling efficiency from a measured total transmission: eta_C = eta_T / (eta_A eta_S).
inline double efficiency_components(double eta_total, double eta_absorption, double eta_scatter)
{
    for (double v : {eta_total, eta_absorption, eta_scatter})
        if (!(v > 0.0 && v <= 1.0))
            throw DomainError("efficiency_components: efficiencies must lie in (0, 1]");
    const double coupling = eta_total / (eta_absorption * eta_scatter);
    if (coupling > 1.0) {
        std::ostringstream msg;
        msg << "inconsistent measurement: implied coupling efficiency " << coupling
            << " exceeds 1 (transmission larger than modelled propagation loss allows)";
        throw DataError(msg.str());
    }
    return coupling;
}

/// Pulse FWHM that enters the flux model: the laser FWHM, or the effective pair pulse.
inline double reference_pulse_fwhm_fs(const SourceSpec& s)
{
    if (s.kind == SourceKind::laser)
        return s.pulse_fwhm_fs;
    if (!s.spdc_pulse_fwhm_fs)
        throw ConfigError("source.effective_pulse_fwhm_fs is required for pair-source flux reporting and has no "
                          "default");
    return *s.spdc_pulse_fwhm_fs;
}

/// Gaussian pulse FWHM after accumulating GDD D0 + beta z.
inline double pulse_duration_fs(double tau0_fs, double gdd_fs2)
{
    const double chirp = 4.0 * kLn2 * gdd_fs2;
    return std::sqrt(tau0_fs * tau0_fs * tau0_fs * tau0_fs + chirp * chirp) / tau0_fs;
}

inline double pulse_duration(const SourceSpec& s, const FiberSpec& f, double z_cm)
{
    require_non_negative_z(z_cm, "pulse_duration");
    return pulse_duration_fs(reference_pulse_fwhm_fs(s), s.pre_fiber_gdd_fs2 + f.gvd_fs2_per_cm * z_cm);
}

/// Peak photon flux (photons cm^-2 s^-1) of the Gaussian pulse train at z.
inline double peak_flux(const SourceSpec& s, const FiberSpec& f, const AttenuationModel& a, double z_cm)
{
    const double tau_s = pulse_duration(s, f, z_cm) * kFemtosecond;
    const double d0_cm = f.mode_fwhm_um * kCmPerUm;
    return std::pow(4.0 * kLn2 / kPi, 1.5) * power_at(s, a, z_cm) /
           (s.photon_energy_J * s.rep_rate_hz * d0_cm * d0_cm * tau_s);
}

struct ProfileSample {
    double z_cm;
    double power_W;
    double photon_rate_per_s;
    double pulse_fwhm_fs;
    double peak_flux_per_cm2_s;
};

inline std::vector<ProfileSample> profile(const SourceSpec& s, const FiberSpec& f, const AttenuationModel& a,
                                          std::span<const double> z_cm)
{
    std::vector<ProfileSample> out;
    out.reserve(z_cm.size());
    for (std::size_t i = 0; i < z_cm.size(); ++i) {
        if (i > 0 && !(z_cm[i] > z_cm[i - 1]))
            throw DataError("profile: z grid must be strictly increasing");
        const double z = z_cm[i];
        out.push_back({z, power_at(s, a, z), photon_rate(s, a, z), pulse_duration(s, f, z), peak_flux(s, f, a, z)});
    }
    return out;
}

struct ScatterSample {
    double z_cm;
    double intensity;
};

struct DecayFit {
    double coefficient_per_cm;
    double coefficient_stderr;
    double amplitude;
    /// RMS of ln-intensity residuals.
    double rms_log_residual;
};

/// Fits I(z) = I0 exp(-k z) by ordinary least squares on ln I.
inline DecayFit fit_exponential_decay(std::span<const ScatterSample> samples)
{
    const std::size_t n = samples.size();
    if (n < 3)
        throw DataError("fit_exponential_decay: at least 3 points are required");
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && !(samples[i].z_cm > samples[i - 1].z_cm))
            throw DataError("fit_exponential_decay: z must be strictly increasing");
        if (!(samples[i].intensity > 0.0))
            throw DataError("fit_exponential_decay: intensities must be positive (log undefined)");
        sx += samples[i].z_cm;
        sy += std::log(samples[i].intensity);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : samples) {
        const double dx = p.z_cm - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(p.intensity) - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssr = 0.0;
    for (const auto& p : samples) {
        const double r = std::log(p.intensity) - (intercept + slope * p.z_cm);
        ssr += r * r;
    }
    const double s2 = n > 2 ? ssr / static_cast<double>(n - 2) : 0.0;
    return {-slope, std::sqrt(s2 / sxx), std::exp(intercept), std::sqrt(ssr / n)};
}

} // namespace lcf2pa::propagation
