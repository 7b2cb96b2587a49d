#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcf2pa/constants.hpp"
#include "lcf2pa/error.hpp"
#include "lcf2pa/optics.hpp"
#include "lcf2pa/propagation.hpp"
#include "lcf2pa/quadrature.hpp"
#include "lcf2pa/table.hpp"

namespace lcf2pa {

struct FluorophoreSpec {
    /// Total fluorescence quantum yield, photons per excitation.
    double quantum_yield = 0.67;
    /// Peak emission wavelength; the single line used when no spectrum is tabulated.
    double emission_peak_nm = 451.0;
    /// Differential yield Phi(lambda) (per nm), normalized to integrate to quantum_yield.
    std::optional<Table> emission;
};

/// Normalizes an emission shape so that its trapezoid integral equals the quantum yield.
inline FluorophoreSpec with_emission_shape(FluorophoreSpec fl, const Table& shape)
{
    if (shape.size() < 2)
        throw DataError("emission spectrum needs at least two samples");
    if (shape.min_value() < 0.0)
        throw DataError("emission spectrum must be non-negative");
    const double area = trapezoid(shape.x(), shape.y());
    if (!(area > 0.0))
        throw DataError("emission spectrum integrates to zero");
    fl.emission = shape.scaled(fl.quantum_yield / area);
    return fl;
}

struct DetectionChain {
    /// Product of optic transmittances and camera quantum efficiency, gamma_0(lambda).
    Table gamma0 = Table::constant(0.63);
    double band_min_nm = 400.0;
    double band_max_nm = 700.0;
};

enum class SpectralMode { single_line, tabulated };

inline const char* to_string(SpectralMode m) { return m == SpectralMode::single_line ? "single-line" : "tabulated"; }

/// Everything that determines the fluorescence collected from one filled fiber.
struct Experiment {
    optics::FiberSpec fiber;
    propagation::SourceSpec source;
    propagation::AttenuationModel attenuation;
    FluorophoreSpec fluorophore;
    DetectionChain detection;

    [[nodiscard]] SpectralMode spectral_mode() const
    {
        return fluorophore.emission ? SpectralMode::tabulated : SpectralMode::single_line;
    }
    [[nodiscard]] double number_density_per_cm3() const
    {
        return lcf2pa::number_density_per_cm3(attenuation.concentration_M);
    }
};

inline void validate(const Experiment& e)
{
    optics::validate(e.fiber);
    propagation::validate(e.source);
    propagation::validate(e.attenuation);
    const auto& d = e.detection;
    if (!(d.band_min_nm < d.band_max_nm))
        throw ConfigError("detection: band minimum must be below band maximum");
    if (!(d.gamma0.min_value() > 0.0) || *std::max_element(d.gamma0.y().begin(), d.gamma0.y().end()) > 1.0)
        throw ConfigError("detection: gamma0 must lie in (0, 1]");
    if (e.fluorophore.quantum_yield < 0.0)
        throw ConfigError("fluorophore: quantum yield must be non-negative");
    if (e.fluorophore.emission) {
        const auto& x = e.fluorophore.emission->x();
        if (x.front() < d.band_min_nm || x.back() > d.band_max_nm)
            throw ConfigError("detection: band must span the tabulated emission spectrum");
    }
}

namespace c2pa {

inline void require_in_fiber(const optics::FiberSpec& f, double z_cm, const char* op)
{
    if (!(z_cm >= 0.0 && z_cm <= f.length_cm))
        throw DomainError(std::string(op) + ": z must lie within [0, fiber length]");
}

/// gamma(z, lambda) = eta_A(lambda, z) eta_S(lambda, z) gamma_0(lambda)
inline double detection_efficiency(const Table& gamma0, const propagation::AttenuationModel& att,
                                   const optics::FiberSpec& f, double z_cm, double wavelength_nm)
{
    require_in_fiber(f, z_cm, "detection_efficiency");
    if (z_cm == 0.0)
        return gamma0(wavelength_nm);
    return propagation::transmission(att, wavelength_nm, z_cm) * gamma0(wavelength_nm);
}

/// Precomputed spectral quadrature for the inner emission integral.
///
/// Each node carries gamma_0 kappa Phi times its quadrature weight, and the
/// total attenuation coefficient at its wavelength, so that evaluating at z is a
/// sum of exponentials.
class EmissionKernel {
public:
    explicit EmissionKernel(const Experiment& e) : length_cm_(e.fiber.length_cm)
    {
        const auto& det = e.detection;
        if (!e.fluorophore.emission) {
            const double lf = e.fluorophore.emission_peak_nm;
            add(lf, det.gamma0(lf) * optics::collection_efficiency(e.fiber, lf) * e.fluorophore.quantum_yield,
                e.attenuation);
            return;
        }
        const Table& phi = *e.fluorophore.emission;
        std::vector<double> lam;
        if (phi.x().front() < det.band_min_nm)
            lam.push_back(det.band_min_nm);
        for (double x : phi.x())
            if (x >= det.band_min_nm && x <= det.band_max_nm)
                lam.push_back(x);
        if (phi.x().back() > det.band_max_nm)
            lam.push_back(det.band_max_nm);
        for (std::size_t i = 1; i < lam.size(); ++i)
            if (!(lam[i] > lam[i - 1]))
                throw DataError("emission spectrum grid is not strictly increasing");
        for (std::size_t i = 0; i < lam.size(); ++i) {
            const double left = i > 0 ? lam[i] - lam[i - 1] : 0.0;
            const double right = i + 1 < lam.size() ? lam[i + 1] - lam[i] : 0.0;
            const double w = 0.5 * (left + right);
            const double l = lam[i];
            add(l, w * det.gamma0(l) * optics::collection_efficiency(e.fiber, l) * phi(l), e.attenuation);
        }
    }

    /// Detected photons per excitation at position z.
    [[nodiscard]] double operator()(double z_cm) const
    {
        if (!(z_cm >= 0.0 && z_cm <= length_cm_))
            throw DomainError("emission_integral: z must lie within [0, fiber length]");
        double s = 0.0;
        for (std::size_t i = 0; i < weight_.size(); ++i)
            s += weight_[i] * std::exp(-coefficient_[i] * z_cm);
        return s;
    }

private:
    void add(double wavelength_nm, double weight, const propagation::AttenuationModel& att)
    {
        weight_.push_back(weight);
        coefficient_.push_back(propagation::total_coefficient(att, wavelength_nm));
    }

    double length_cm_;
    std::vector<double> weight_;
    std::vector<double> coefficient_;
};

/// Integral over the emission band of gamma(z, lambda) kappa(lambda) Phi(lambda).
inline double emission_integral(const Experiment& e, double z_cm)
{
    return EmissionKernel(e)(z_cm);
}

/// Parts of the laser-excited fluorescence model that do not depend on sigma_C, n or W0.
struct C2pefFactors {
    /// sqrt(2) (ln2/pi)^{3/2} / (g (h nu)^2 d0^2), with d0 in cm.
    double prefactor;
    /// integral_0^l eta_A^2 eta_S^2 (lambda_e, z) / tau(z) * emission_integral(z) dz, tau in s.
    double z_integral;
};

inline C2pefFactors c2pef_factors(const Experiment& e, const QuadratureOptions& q = {})
{
    if (e.source.kind != propagation::SourceKind::laser)
        throw WrongModelError("the classical two-photon model needs a laser source; use the entangled-pair model for "
                              "photon-pair excitation");
    const auto& s = e.source;
    const double d0_cm = e.fiber.mode_fwhm_um * kCmPerUm;
    const double prefactor =
        std::sqrt(2.0) * std::pow(kLn2 / kPi, 1.5) / (s.rep_rate_hz * s.photon_energy_J * s.photon_energy_J * d0_cm * d0_cm);
    const EmissionKernel emission(e);
    const double alpha_e = propagation::total_coefficient(e.attenuation, s.wavelength_nm);
    auto integrand = [&](double z) {
        const double tau_s = propagation::pulse_duration(s, e.fiber, z) * kFemtosecond;
        return std::exp(-2.0 * alpha_e * z) / tau_s * emission(z);
    };
    return {prefactor, integrate(integrand, 0.0, e.fiber.length_cm, q)};
}

/// Detected fluorescence rate (cnt s^-1) for cross-section sigma_C (cm^4 s photon^-1).
inline double forward_c2pef(double sigma_cm4_s, const Experiment& e, const QuadratureOptions& q = {})
{
    const auto f = c2pef_factors(e, q);
    const double w0 = e.source.input_power_W;
    return f.prefactor * sigma_cm4_s * e.number_density_per_cm3() * w0 * w0 * f.z_integral;
}

/// sigma_C (cm^4 s photon^-1) from the fitted quadratic coefficient F_C / W0^2 in cnt s^-1 W^-2.
inline double invert_sigma_c(double fc_per_w0sq, const Experiment& e, const QuadratureOptions& q = {})
{
    if (!(fc_per_w0sq > 0.0))
        throw DomainError("invert_sigma_c: the fitted coefficient must be positive");
    const double n = e.number_density_per_cm3();
    if (!(n > 0.0))
        throw ConfigError("invert_sigma_c: sample concentration must be positive");
    const auto f = c2pef_factors(e, q);
    return fc_per_w0sq / (f.prefactor * n * f.z_integral);
}

struct ConcentrationPoint {
    double concentration_M;
    double fc_per_concentration;
};

/// F_C / c at fixed input power over a concentration grid, with sample reabsorption active.
inline std::vector<ConcentrationPoint> conc_normalized_curve(const Experiment& base, double sigma_cm4_s,
                                                             std::span<const double> concentrations_M,
                                                             double input_power_W = 100e-9)
{
    std::vector<ConcentrationPoint> out;
    out.reserve(concentrations_M.size());
    Experiment e = base;
    e.source.input_power_W = input_power_W;
    for (std::size_t i = 0; i < concentrations_M.size(); ++i) {
        const double c = concentrations_M[i];
        if (!(c > 0.0) || (i > 0 && !(c > concentrations_M[i - 1])))
            throw DataError("conc_normalized_curve: concentrations must be positive and ascending");
        e.attenuation.concentration_M = c;
        out.push_back({c, forward_c2pef(sigma_cm4_s, e) / c});
    }
    return out;
}

} // namespace c2pa
} // namespace lcf2pa
