#pragma once

#include <numbers>

namespace lcf2pa {

inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kLn10 = std::numbers::ln10;
inline constexpr double kPi = std::numbers::pi;

inline constexpr double kAvogadro = 6.02214076e23;      // mol^-1
inline constexpr double kPlanck = 6.62607015e-34;       // J s
inline constexpr double kSpeedOfLight = 2.99792458e8;   // m s^-1

// Göppert-Mayer, cm^4 s photon^-1
inline constexpr double kGoeppertMayer = 1e-50;

inline constexpr double kFemtosecond = 1e-15;
inline constexpr double kCmPerUm = 1e-4;
inline constexpr double kCm2PerUm2 = 1e-8;
inline constexpr double kWattsPerMicrowatt = 1e-6;

// 2 sqrt(2 ln 2): Gaussian standard deviation -> FWHM
inline constexpr double kSigmaToFwhm = 2.3548200450309493;

inline constexpr double to_gm(double cm4_s) { return cm4_s / kGoeppertMayer; }
inline constexpr double from_gm(double gm) { return gm * kGoeppertMayer; }

/// Photon energy in J for a vacuum wavelength in nm.
inline constexpr double photon_energy_J(double wavelength_nm)
{
    return kPlanck * kSpeedOfLight / (wavelength_nm * 1e-9);
}

/// Fluorophores per cm^3 for a molar concentration.
inline constexpr double number_density_per_cm3(double concentration_M)
{
    return concentration_M * kAvogadro / 1000.0;
}

} // namespace lcf2pa
