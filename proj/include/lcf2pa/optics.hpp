#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "lcf2pa/constants.hpp"
#include "lcf2pa/error.hpp"
#include "lcf2pa/table.hpp"

// Material dispersion, guided-mode counting and acceptance-cone collection for a
// liquid-filled capillary.
namespace lcf2pa::optics {

enum class DispersionForm {
    /// n^2 = 1 + sum_k B_k lambda^2 / (lambda^2 - C_k), lambda in um, pairs (B_k, C_k [um^2])
    sellmeier,
    /// n = sum_k a_k lambda^p_k, lambda in um, pairs (a_k, p_k)
    power_series,
};

struct DispersionTerm {
    double first;
    double second;
};

struct MaterialDispersion {
    std::string name;
    DispersionForm form = DispersionForm::sellmeier;
    std::vector<DispersionTerm> terms;
    double min_nm = 0.0;
    double max_nm = 0.0;
};

/// Fused silica, Malitson three-term Sellmeier (0.21-3.71 um).
inline MaterialDispersion fused_silica()
{
    return {"silica",
            DispersionForm::sellmeier,
            {{0.6961663, 0.0684043 * 0.0684043}, {0.4079426, 0.1162414 * 0.1162414}, {0.8974794, 9.896161 * 9.896161}},
            210.0,
            3710.0};
}

/// Toluene at room temperature, one-term Sellmeier over the visible/NIR.
inline MaterialDispersion toluene()
{
    return {"toluene", DispersionForm::sellmeier, {{1.1631816549841723, 0.018389854524714876}}, 400.0, 1100.0};
}

inline double refractive_index(const MaterialDispersion& m, double wavelength_nm)
{
    if (!(wavelength_nm >= m.min_nm && wavelength_nm <= m.max_nm)) {
        std::ostringstream msg;
        msg << "refractive index of '" << m.name << "' requested at " << wavelength_nm << " nm, outside its valid range ["
            << m.min_nm << ", " << m.max_nm << "] nm";
        throw RangeError(msg.str());
    }
    const double um = wavelength_nm * 1e-3;
    const double um2 = um * um;
    switch (m.form) {
    case DispersionForm::sellmeier: {
        double n2 = 1.0;
        for (const auto& t : m.terms)
            n2 += t.first * um2 / (um2 - t.second);
        return std::sqrt(n2);
    }
    case DispersionForm::power_series: {
        double n = 0.0;
        for (const auto& t : m.terms)
            n += t.first * std::pow(um, t.second);
        return n;
    }
    }
    throw ConfigError("unknown dispersion form for '" + m.name + "'");
}

struct FiberSpec {
    double core_diameter_um = 5.0;
    double length_cm = 37.0;
    MaterialDispersion core = toluene();
    MaterialDispersion clad = fused_silica();
    /// Fiber scattering coefficient mu(lambda), nm -> cm^-1.
    Table scatter_per_cm = Table::constant(0.0);
    double mode_fwhm_um = 2.42;
    double gvd_fs2_per_cm = 1034.0;
    double effective_mode_area_um2 = 0.0;
};

/// Effective-area to FWHM conversion for a Gaussian fundamental mode.
inline double mode_fwhm_from_area(double area_um2)
{
    if (!(area_um2 > 0.0))
        throw DomainError("mode_fwhm_from_area: effective mode area must be positive");
    return std::sqrt(2.0 * kLn2 * area_um2 / kPi);
}

inline double mode_area_from_fwhm(double fwhm_um)
{
    if (!(fwhm_um > 0.0))
        throw DomainError("mode_area_from_fwhm: mode FWHM must be positive");
    return kPi * fwhm_um * fwhm_um / (2.0 * kLn2);
}

/// Sets both the mode area and the FWHM derived from it.
inline FiberSpec with_mode_area(FiberSpec f, double area_um2)
{
    f.effective_mode_area_um2 = area_um2;
    f.mode_fwhm_um = mode_fwhm_from_area(area_um2);
    return f;
}

inline void validate(const FiberSpec& f)
{
    if (!(f.core_diameter_um > 0.0))
        throw ConfigError("fiber: core diameter must be positive");
    if (!(f.length_cm > 0.0))
        throw ConfigError("fiber: length must be positive");
    if (!(f.mode_fwhm_um > 0.0))
        throw ConfigError("fiber: mode FWHM must be positive");
    if (!f.scatter_per_cm.empty() && f.scatter_per_cm.min_value() < 0.0)
        throw ConfigError("fiber: scattering coefficient must be non-negative");
    if (f.effective_mode_area_um2 > 0.0) {
        const double d0 = mode_fwhm_from_area(f.effective_mode_area_um2);
        if (std::abs(d0 - f.mode_fwhm_um) > 1e-12 * d0)
            throw ConfigError("fiber: mode FWHM and effective mode area are inconsistent");
    }
}

struct ModeEstimate {
    double v_number;
    /// V^2/2, not rounded
    double mode_count;
};

inline ModeEstimate v_number(const FiberSpec& f, double wavelength_nm)
{
    const double nc = refractive_index(f.core, wavelength_nm);
    const double ncl = refractive_index(f.clad, wavelength_nm);
    if (!(nc > ncl)) {
        std::ostringstream msg;
        msg << "no guidance at " << wavelength_nm << " nm: core index " << nc << " does not exceed cladding index "
            << ncl;
        throw GuidanceError(msg.str());
    }
    const double v = kPi * (f.core_diameter_um * 1e3) / wavelength_nm * std::sqrt(nc * nc - ncl * ncl);
    return {v, 0.5 * v * v};
}

/// Fraction of isotropic emission inside the guided cone travelling toward one fiber end.
inline double collection_efficiency(double n_core, double n_clad)
{
    if (n_core < n_clad)
        throw GuidanceError("collection efficiency: core index below cladding index");
    const double sin_half_angle = std::sqrt(n_core * n_core - n_clad * n_clad) / n_core;
    return 0.5 * (1.0 - std::cos(std::asin(sin_half_angle)));
}

inline double collection_efficiency(const FiberSpec& f, double wavelength_nm)
{
    return collection_efficiency(refractive_index(f.core, wavelength_nm), refractive_index(f.clad, wavelength_nm));
}

} // namespace lcf2pa::optics
