#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "lcf2pa/lcf2pa.hpp"

namespace testing_support {

inline std::string config_path(const std::string& name) { return std::string(LCF2PA_CONFIG_DIR) + "/" + name; }

inline lcf2pa::RunConfig load(const std::string& name) { return lcf2pa::load_run_config(config_path(name)); }

/// Separable Gaussian joint spectral intensity with per-axis standard deviation
/// sigma_omega, centred on omega_p / 2 and sampled over +/- half_width_sigmas.
inline lcf2pa::jsi::JointSpectrum gaussian_jsi(std::size_t n, double sigma_omega, double half_width_sigmas = 8.0,
                                               double omega_p = 4.65e15)
{
    lcf2pa::jsi::JointSpectrum js;
    js.omega_p = omega_p;
    const double step = 2.0 * half_width_sigmas * sigma_omega / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = 0.5 * omega_p - half_width_sigmas * sigma_omega + step * static_cast<double>(k);
        js.omega_s.push_back(w);
        js.omega_i.push_back(w);
    }
    js.intensity.resize(n * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double a = (js.omega_s[r] - 0.5 * omega_p) / sigma_omega;
            const double b = (js.omega_i[c] - 0.5 * omega_p) / sigma_omega;
            js.intensity[r * n + c] = std::exp(-0.5 * (a * a + b * b));
        }
    return js;
}

/// FWHM of t_S - t_I for the Gaussian above under a quadratic spectral phase of GDD d (fs^2) on both photons.
inline double gaussian_te_fs(double sigma_omega, double gdd_fs2)
{
    const double d = gdd_fs2 * 1e-30;
    const double var = 2.0 * (1.0 / (4.0 * sigma_omega * sigma_omega) + d * d * sigma_omega * sigma_omega);
    return 2.0 * std::sqrt(2.0 * std::log(2.0)) * std::sqrt(var) * 1e15;
}

inline std::filesystem::path scratch_dir(const std::string& tag)
{
    auto p = std::filesystem::temp_directory_path() / ("lcf2pa_test_" + tag);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace testing_support
