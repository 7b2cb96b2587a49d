#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lcf2pa/constants.hpp"
#include "lcf2pa/csv.hpp"
#include "lcf2pa/e2pa.hpp"
#include "lcf2pa/error.hpp"

// Entanglement time from a measured joint spectral intensity with a quadratic
// dispersion phase, via the two-dimensional DFT.
namespace lcf2pa::jsi {

struct JointSpectrum {
    std::vector<double> omega_s;
    std::vector<double> omega_i;
    /// F(omega_s[r], omega_i[c]) stored at r * omega_i.size() + c
    std::vector<double> intensity;
    double omega_p = 0.0;

    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return intensity[r * omega_i.size() + c]; }
};

inline double axis_step(std::span<const double> axis, const char* name)
{
    if (axis.size() < 2)
        throw DataError(std::string("joint spectrum: axis ") + name + " needs at least two samples");
    const double step = (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1);
    if (!(step > 0.0))
        throw DataError(std::string("joint spectrum: axis ") + name + " must be increasing");
    for (std::size_t k = 1; k < axis.size(); ++k) {
        const double d = axis[k] - axis[k - 1];
        if (std::abs(d - step) > 1e-9 * step * static_cast<double>(axis.size()))
            throw DataError(std::string("joint spectrum: axis ") + name + " is not uniformly spaced");
    }
    return step;
}

inline void validate(const JointSpectrum& js, std::size_t min_size = 64)
{
    if (js.omega_s.size() < min_size || js.omega_i.size() < min_size) {
        std::ostringstream msg;
        msg << "joint spectrum: grid is " << js.omega_s.size() << " x " << js.omega_i.size() << ", at least " << min_size
            << " x " << min_size << " is required";
        throw DataError(msg.str());
    }
    if (js.intensity.size() != js.omega_s.size() * js.omega_i.size())
        throw DataError("joint spectrum: intensity grid size does not match the axes");
    const double ds = axis_step(js.omega_s, "omega_s");
    const double di = axis_step(js.omega_i, "omega_i");
    if (std::abs(ds - di) > 1e-9 * ds)
        throw DataError("joint spectrum: signal and idler axes must share one frequency step");
    for (double v : js.intensity)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw DataError("joint spectrum: intensities must be finite and non-negative");
    if (!(js.omega_p > 0.0))
        throw DataError("joint spectrum: pump frequency must be positive");
}

/// Intensity-weighted mean of (omega_s + omega_i - omega_p), in frequency steps.
/// Large values suggest the grid is not centred on the energy-conservation ridge.
inline double ridge_offset_steps(const JointSpectrum& js)
{
    double w = 0.0, m = 0.0;
    for (std::size_t r = 0; r < js.omega_s.size(); ++r)
        for (std::size_t c = 0; c < js.omega_i.size(); ++c) {
            const double f = js.at(r, c);
            w += f;
            m += f * (js.omega_s[r] + js.omega_i[c] - js.omega_p);
        }
    if (!(w > 0.0))
        throw DataError("joint spectrum: grid carries no intensity");
    return m / w / (js.omega_s[1] - js.omega_s[0]);
}

/// Reads the grid format: `omega_p_rad_per_s,<value>`, then a row whose first field is a
/// label followed by the idler axis, then one row per signal frequency.
inline JointSpectrum read_csv(const std::string& path)
{
    const auto doc = csv::read(path, false);
    if (doc.rows.size() < 3)
        throw DataError(path + ": joint spectrum file needs a pump row, an axis row and data rows");
    JointSpectrum js;
    const auto& pump = doc.rows[0];
    if (pump.size() < 2 || pump[0] != "omega_p_rad_per_s")
        throw DataError(path + ": first row must be 'omega_p_rad_per_s,<value>'");
    js.omega_p = csv::to_number(pump[1], path + " row 1");
    const auto& axis = doc.rows[1];
    for (std::size_t c = 1; c < axis.size(); ++c)
        js.omega_i.push_back(csv::to_number(axis[c], path + " row 2"));
    for (std::size_t r = 2; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        const std::string where = path + " row " + std::to_string(r + 1);
        if (row.size() != js.omega_i.size() + 1)
            throw DataError(where + ": expected " + std::to_string(js.omega_i.size() + 1) + " fields");
        js.omega_s.push_back(csv::to_number(row[0], where));
        for (std::size_t c = 1; c < row.size(); ++c)
            js.intensity.push_back(csv::to_number(row[c], where));
    }
    return js;
}

inline void write_csv(const JointSpectrum& js, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write joint spectrum: " + path);
    out << std::setprecision(17);
    out << "omega_p_rad_per_s," << js.omega_p << '\n';
    out << "omega_s\\omega_i";
    for (double w : js.omega_i)
        out << ',' << w;
    out << '\n';
    for (std::size_t r = 0; r < js.omega_s.size(); ++r) {
        out << js.omega_s[r];
        for (std::size_t c = 0; c < js.omega_i.size(); ++c)
            out << ',' << js.at(r, c);
        out << '\n';
    }
}

namespace detail {

struct FftwFree {
    void operator()(fftw_complex* p) const { fftw_free(p); }
};

/// Owns an in-place n x n forward transform and its buffer.
class Dft2d {
public:
    explicit Dft2d(std::size_t n)
        : n_(n), data_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n * n)))
    {
        if (!data_)
            throw NumericalError("DFT: buffer allocation failed");
        plan_ = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), data_.get(), data_.get(), FFTW_FORWARD,
                                 FFTW_ESTIMATE);
        if (!plan_)
            throw NumericalError("DFT: plan creation failed");
    }
    ~Dft2d() { fftw_destroy_plan(plan_); }
    Dft2d(const Dft2d&) = delete;
    Dft2d& operator=(const Dft2d&) = delete;

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(data_.get()); }
    void execute() { fftw_execute(plan_); }

private:
    std::size_t n_;
    std::unique_ptr<fftw_complex, FftwFree> data_;
    fftw_plan plan_ = nullptr;
};

} // namespace detail

struct TemporalIntensity {
    std::size_t n;
    double dt_fs;
    /// |f~(t_s, t_i)|^2 at index a * n + b, time index wrapped modulo n
    std::vector<double> intensity;
    /// sum |f|^2 over the spectral grid
    double spectral_power;
};

/// Joint temporal intensity for total group-delay dispersion `gdd_fs2` on each photon.
///
/// `extra_phase` is added to every spectral amplitude (a global phase).
inline TemporalIntensity joint_temporal_intensity(const JointSpectrum& js, double gdd_fs2, int pad_factor = 4,
                                                  double extra_phase = 0.0)
{
    if (pad_factor < 1)
        throw ConfigError("joint_temporal_intensity: padding factor must be at least 1");
    const std::size_t ns = js.omega_s.size(), ni = js.omega_i.size();
    const std::size_t n = static_cast<std::size_t>(pad_factor) * std::max(ns, ni);
    detail::Dft2d dft(n);
    auto* buf = dft.data();
    std::fill(buf, buf + n * n, std::complex<double>(0.0, 0.0));
    const double d_s2 = gdd_fs2 * kFemtosecond * kFemtosecond;
    const double half_p = 0.5 * js.omega_p;
    double power = 0.0;
    for (std::size_t r = 0; r < ns; ++r) {
        const double xs = js.omega_s[r] - half_p;
        for (std::size_t c = 0; c < ni; ++c) {
            const double xi = js.omega_i[c] - half_p;
            const double f = js.at(r, c);
            const double phase = 0.5 * d_s2 * (xs * xs + xi * xi) + extra_phase;
            buf[r * n + c] = std::polar(std::sqrt(f), phase);
            power += f;
        }
    }
    dft.execute();
    TemporalIntensity out{n, 2.0 * kPi / (static_cast<double>(n) * (js.omega_s[1] - js.omega_s[0])) / kFemtosecond,
                          std::vector<double>(n * n), power};
    for (std::size_t k = 0; k < n * n; ++k)
        out.intensity[k] = std::norm(buf[k]);
    return out;
}

struct DifferenceProjection {
    /// mass at centred offset k - n/2 from the circular mean, k = 0..n-1
    std::vector<double> mass;
    double dt_fs;
    double std_fs;
    /// fraction of mass within 3 bins of the window edge
    double edge_fraction;
};

/// Marginal of the joint temporal intensity along t_s - t_i.
inline DifferenceProjection project_difference(const TemporalIntensity& ti)
{
    const std::size_t n = ti.n;
    std::vector<double> p(n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            p[(a + n - b) % n] += ti.intensity[a * n + b];

    // Centre on the circular mean so that a delay offset does not split the peak.
    double cx = 0.0, cy = 0.0, total = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
        const double ang = 2.0 * kPi * static_cast<double>(d) / static_cast<double>(n);
        cx += p[d] * std::cos(ang);
        cy += p[d] * std::sin(ang);
        total += p[d];
    }
    if (!(total > 0.0))
        throw NumericalError("project_difference: temporal intensity is zero");
    double centre = std::atan2(cy, cx) / (2.0 * kPi) * static_cast<double>(n);
    if (centre < 0.0)
        centre += static_cast<double>(n);
    const auto c0 = static_cast<std::size_t>(std::llround(centre)) % n;

    DifferenceProjection out{std::vector<double>(n, 0.0), ti.dt_fs, 0.0, 0.0};
    const std::size_t half = n / 2;
    for (std::size_t d = 0; d < n; ++d)
        out.mass[(d + n - c0 + half) % n] = p[d];
    double m1 = 0.0, m2 = 0.0, edge = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double off = static_cast<double>(k) - static_cast<double>(half);
        m1 += out.mass[k] * off;
        m2 += out.mass[k] * off * off;
        if (k < 3 || k + 3 >= n)
            edge += out.mass[k];
    }
    m1 /= total;
    m2 /= total;
    out.std_fs = std::sqrt(std::max(0.0, m2 - m1 * m1)) * ti.dt_fs;
    out.edge_fraction = edge / total;
    return out;
}

/// T_e (FWHM, fs) = 2 sqrt(2 ln 2) times the standard deviation of the t_s - t_i marginal.
inline double entanglement_time_fs(const JointSpectrum& js, double gdd_fs2, int pad_factor = 4)
{
    const auto proj = project_difference(joint_temporal_intensity(js, gdd_fs2, pad_factor));
    if (proj.edge_fraction > 0.01) {
        std::ostringstream msg;
        msg << "temporal window too short at GDD " << gdd_fs2 << " fs^2: " << 100.0 * proj.edge_fraction
            << "% of the t_s - t_i marginal lies at the window edge; resample the joint spectrum on a finer frequency "
               "step (zero-pad in the time domain) before the transform";
        throw ResolutionError(msg.str());
    }
    return kSigmaToFwhm * proj.std_fs;
}

/// 0, step, 2 step, ... up to and including length.
inline std::vector<double> z_grid(double length_cm, double step_cm = 1.0)
{
    if (!(length_cm > 0.0) || !(step_cm > 0.0))
        throw ConfigError("z_grid: length and step must be positive");
    std::vector<double> z;
    for (std::size_t k = 0;; ++k) {
        const double v = static_cast<double>(k) * step_cm;
        if (v >= length_cm - 1e-9 * step_cm)
            break;
        z.push_back(v);
    }
    z.push_back(length_cm);
    return z;
}

inline std::vector<e2pa::TeSample> entanglement_time_profile(const JointSpectrum& js, double gdd_fs2,
                                                             double gvd_fs2_per_cm, std::span<const double> z_cm,
                                                             double length_cm, int pad_factor = 4)
{
    validate(js);
    std::vector<e2pa::TeSample> out;
    out.reserve(z_cm.size());
    for (double z : z_cm) {
        if (!(z >= 0.0 && z <= length_cm))
            throw DomainError("entanglement_time_profile: z must lie within [0, fiber length]");
        out.push_back({z, entanglement_time_fs(js, gdd_fs2 + gvd_fs2_per_cm * z, pad_factor)});
    }
    return out;
}

} // namespace lcf2pa::jsi
