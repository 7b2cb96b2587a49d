#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include "lcf2pa/c2pa.hpp"
#include "lcf2pa/constants.hpp"
#include "lcf2pa/error.hpp"
#include "lcf2pa/propagation.hpp"
#include "lcf2pa/quadrature.hpp"

// Entangled-pair excitation: pair bookkeeping, entanglement-time model, and the
// cross-section upper bound from a null fluorescence measurement.
namespace lcf2pa::e2pa {

struct AreaInterval {
    double low_um2 = 2.1;
    double high_um2 = 18.0;
};

struct PairSource {
    /// eta'_K, overlap-integral (theoretical) Klyshko efficiency
    double effective_klyshko = 0.94;
    /// eta_F, crystal-to-fiber free-space transmission
    double free_space_transmission = 0.565;
    /// eta_C, single-mode coupling efficiency
    double coupling = 0.48;
    /// Q(0), single-photon rate at the fiber entrance
    double single_rate_per_s = 1.49e8;
    double spatial_modes = 740.0;
    AreaInterval entanglement_area;

    [[nodiscard]] double klyshko() const { return effective_klyshko * free_space_transmission * coupling; }
};

inline void validate(const PairSource& p)
{
    for (double v : {p.effective_klyshko, p.free_space_transmission, p.coupling})
        if (!(v > 0.0 && v <= 1.0))
            throw ConfigError("pair_source: efficiencies must lie in (0, 1]");
    if (p.single_rate_per_s < 0.0)
        throw ConfigError("pair_source: single-photon rate must be non-negative");
    if (!(p.spatial_modes >= 1.0))
        throw ConfigError("pair_source: spatial mode count must be at least 1");
    if (!(p.entanglement_area.low_um2 > 0.0 && p.entanglement_area.low_um2 <= p.entanglement_area.high_um2))
        throw ConfigError("pair_source: entanglement area interval must satisfy 0 < low <= high");
}

/// eta_K = eta'_K eta_F eta_C
inline double klyshko_efficiency(double effective_klyshko, double free_space_transmission, double coupling)
{
    for (double v : {effective_klyshko, free_space_transmission, coupling})
        if (!(v > 0.0 && v <= 1.0))
            throw DomainError("klyshko_efficiency: efficiencies must lie in (0, 1]");
    return effective_klyshko * free_space_transmission * coupling;
}

/// Number of incident spatial modes from the single-mode transmission and the measured
/// multimode throughput Q_out / Q_in^mm.
inline double spatial_mode_count(double multimode_throughput, double coupling, double eta_absorption,
                                 double eta_scatter)
{
    if (!(multimode_throughput > 0.0))
        throw DomainError("spatial_mode_count: throughput ratio must be positive");
    const double m = coupling * eta_absorption * eta_scatter / multimode_throughput;
    if (m < 1.0 - 1e-12) {
        std::ostringstream msg;
        msg << "inconsistent measurement: implied spatial mode count " << m << " is below 1";
        throw DataError(msg.str());
    }
    return m;
}

/// Intact photon pairs per second at z: eta_K (eta_A eta_S)^2 Q(0) / 2.
inline double pair_rate(const PairSource& p, const propagation::AttenuationModel& att, double wavelength_nm,
                        double z_cm)
{
    const double t = propagation::transmission(att, wavelength_nm, z_cm);
    return p.klyshko() * t * t * p.single_rate_per_s / 2.0;
}

/// T_e(z) = 2 sqrt(2 ln2) sqrt(T_e0^4 + S0 (beta z + D0)^2) / T_e0
struct EntanglementTimeModel {
    double te0_fs = 260.0;
    double s0 = 2145.0;
    double gdd_fs2 = 0.0;
    double gvd_fs2_per_cm = 0.0;

    [[nodiscard]] double operator()(double z_cm) const
    {
        const double u = gvd_fs2_per_cm * z_cm + gdd_fs2;
        const double t2 = te0_fs * te0_fs;
        return kSigmaToFwhm * std::sqrt(t2 * t2 + s0 * u * u) / te0_fs;
    }
};

inline void validate(const EntanglementTimeModel& m)
{
    if (!(m.te0_fs > 0.0) || !(m.s0 > 0.0))
        throw ConfigError("te_model: T_e0 and S0 must be positive");
}

struct TeSample {
    double z_cm;
    double te_fs;
};

struct TeFit {
    EntanglementTimeModel model;
    std::vector<double> relative_residuals;
    double max_relative_residual;
    double rms_residual_fs;
    int iterations;
};

/// Least-squares fit of (T_e0, S0) with D0 and beta held fixed.
///
/// Starts from the exact linearization (T_e / c)^2 = T_e0^2 + (S0 / T_e0^2) u^2 and
/// refines with Levenberg-Marquardt on the unsquared residuals.
inline TeFit fit_te_model(std::span<const TeSample> samples, double gdd_fs2, double gvd_fs2_per_cm,
                          int max_iterations = 200)
{
    const std::size_t n = samples.size();
    if (n < 4)
        throw DataError("fit_te_model: at least 4 samples are required");
    std::vector<double> u2(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(samples[i].te_fs > 0.0))
            throw DataError("fit_te_model: entanglement times must be positive");
        const double u = gvd_fs2_per_cm * samples[i].z_cm + gdd_fs2;
        u2[i] = u * u;
        const double r = samples[i].te_fs / kSigmaToFwhm;
        y[i] = r * r;
    }
    double mu = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mu += u2[i];
        my += y[i];
    }
    mu /= n;
    my /= n;
    double suu = 0.0, suy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        suu += (u2[i] - mu) * (u2[i] - mu);
        suy += (u2[i] - mu) * (y[i] - my);
    }
    if (!(suu > 1e-24 * std::max(1.0, mu * mu)))
        throw NumericalError("fit_te_model: samples share a single GDD value; S0 is not identifiable");
    const double slope = suy / suu;
    const double intercept = my - slope * mu;
    double te0 = intercept > 0.0 ? std::sqrt(intercept) : std::sqrt(*std::min_element(y.begin(), y.end()));
    double s0 = std::max(slope * te0 * te0, 1e-12);

    auto cost_of = [&](double t0, double s) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const EntanglementTimeModel m{t0, s, gdd_fs2, gvd_fs2_per_cm};
            const double r = m(samples[i].z_cm) - samples[i].te_fs;
            c += r * r;
        }
        return c;
    };

    double cost = cost_of(te0, s0);
    double lambda = 1e-3;
    int it = 0;
    bool converged = false;
    for (; it < max_iterations; ++it) {
        double a11 = 0, a12 = 0, a22 = 0, g1 = 0, g2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = gvd_fs2_per_cm * samples[i].z_cm + gdd_fs2;
            const double t4 = te0 * te0 * te0 * te0;
            const double root = std::sqrt(t4 + s0 * u * u);
            const double model = kSigmaToFwhm * root / te0;
            const double j1 = kSigmaToFwhm * (t4 - s0 * u * u) / (root * te0 * te0);
            const double j2 = kSigmaToFwhm * u * u / (2.0 * root * te0);
            const double r = model - samples[i].te_fs;
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            g1 += j1 * r;
            g2 += j2 * r;
        }
        if (std::abs(g1) * te0 + std::abs(g2) * s0 <= 1e-15 * std::max(cost, 1e-300) || cost == 0.0) {
            converged = true;
            break;
        }
        bool stepped = false;
        for (int tries = 0; tries < 60; ++tries) {
            const double b11 = a11 * (1.0 + lambda), b22 = a22 * (1.0 + lambda);
            const double det = b11 * b22 - a12 * a12;
            if (!(std::abs(det) > 0.0)) {
                lambda *= 10.0;
                continue;
            }
            const double d1 = -(b22 * g1 - a12 * g2) / det;
            const double d2 = -(b11 * g2 - a12 * g1) / det;
            const double t_new = te0 + d1, s_new = s0 + d2;
            if (t_new > 0.0 && s_new > 0.0) {
                const double c_new = cost_of(t_new, s_new);
                if (c_new <= cost) {
                    const double rel = std::abs(d1) / te0 + std::abs(d2) / s0;
                    te0 = t_new;
                    s0 = s_new;
                    const double drop = cost - c_new;
                    cost = c_new;
                    lambda = std::max(lambda / 10.0, 1e-12);
                    stepped = true;
                    if (rel < 1e-14 || drop <= 1e-15 * cost)
                        converged = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (!stepped) {
            // No decrease along any damped direction: at a minimum to working precision.
            converged = true;
            break;
        }
        if (converged)
            break;
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "fit_te_model: no convergence after " << max_iterations << " iterations (T_e0 = " << te0
            << " fs, S0 = " << s0 << ", residual sum of squares = " << cost << " fs^2)";
        throw NumericalError(msg.str());
    }

    TeFit fit{{te0, s0, gdd_fs2, gvd_fs2_per_cm}, {}, 0.0, 0.0, it};
    double ss = 0.0;
    for (const auto& smp : samples) {
        const double m = fit.model(smp.z_cm);
        const double rel = (m - smp.te_fs) / smp.te_fs;
        fit.relative_residuals.push_back(rel);
        fit.max_relative_residual = std::max(fit.max_relative_residual, std::abs(rel));
        ss += (m - smp.te_fs) * (m - smp.te_fs);
    }
    fit.rms_residual_fs = std::sqrt(ss / n);
    return fit;
}

/// Probabilistic model: sigma_E = sigma_C / (T_e A_e), with T_e in fs and A_e in cm^2.
inline double sigma_e_probabilistic(double sigma_c_cm4_s, double te_fs, double area_cm2)
{
    if (!(sigma_c_cm4_s > 0.0 && te_fs > 0.0 && area_cm2 > 0.0))
        throw DomainError("sigma_e_probabilistic: inputs must be positive");
    return sigma_c_cm4_s / (te_fs * kFemtosecond * area_cm2);
}

inline void require_pair_source(const Experiment& e)
{
    if (e.source.kind != propagation::SourceKind::spdc)
        throw WrongModelError("the entangled-pair model needs a photon-pair (spdc) source; use the classical model for "
                              "laser excitation");
}

/// n * integral_0^l [T_e(0)/T_e(z)] Q_pairs(z) emission_integral(z) dz, in cnt s^-1 per cm^2 of sigma_E.
inline double e2pef_response(const Experiment& e, const PairSource& p, const EntanglementTimeModel& te,
                             const QuadratureOptions& q = {})
{
    require_pair_source(e);
    const c2pa::EmissionKernel emission(e);
    const double te0 = te(0.0);
    const double lam = e.source.wavelength_nm;
    auto integrand = [&](double z) { return te0 / te(z) * pair_rate(p, e.attenuation, lam, z) * emission(z); };
    return e.number_density_per_cm3() * integrate(integrand, 0.0, e.fiber.length_cm, q);
}

/// Detected fluorescence rate (cnt s^-1) for sigma_E(0) in cm^2, low-gain (linear) scaling.
inline double forward_e2pef(double sigma_e_cm2, const Experiment& e, const PairSource& p,
                            const EntanglementTimeModel& te, const QuadratureOptions& q = {})
{
    return sigma_e_cm2 * e2pef_response(e, p, te, q);
}

inline double sigma_e_upper_bound(double fluorescence_lower_bound, const Experiment& e, const PairSource& p,
                                  const EntanglementTimeModel& te, const QuadratureOptions& q = {})
{
    if (!(fluorescence_lower_bound > 0.0))
        throw DomainError("sigma_e_upper_bound: the fluorescence lower bound must be positive");
    const double response = e2pef_response(e, p, te, q);
    if (!(response > 0.0))
        throw ConfigError("sigma_e_upper_bound: zero model response (check concentration, pair rate and detection "
                          "efficiency)");
    return fluorescence_lower_bound / response;
}

/// (sigma1 T1 A1) / (sigma2 T2 A2); any consistent units.
inline double upper_bound_ratio(double sigma1, double te1, double area1, double sigma2, double te2, double area2)
{
    for (double v : {sigma1, te1, area1, sigma2, te2, area2})
        if (!(v > 0.0))
            throw DomainError("upper_bound_ratio: inputs must be positive");
    return (sigma1 * te1 * area1) / (sigma2 * te2 * area2);
}

} // namespace lcf2pa::e2pa
