#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lcf2pa/error.hpp"
#include "lcf2pa/propagation.hpp"

// Camera frame series: synthesis, ROI integration, CIC rejection, power
// normalization, Allan-deviation averaging selection and power-law fits.
namespace lcf2pa::frames {

struct Image {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> adu;

    Image() = default;
    Image(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), adu(r * c, fill) {}

    [[nodiscard]] double& at(std::size_t r, std::size_t c) { return adu[r * cols + c]; }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return adu[r * cols + c]; }
};

/// Rectangle of superpixels.
struct Roi {
    std::size_t row0 = 2;
    std::size_t col0 = 2;
    std::size_t rows = 11;
    std::size_t cols = 11;

    [[nodiscard]] std::size_t count() const { return rows * cols; }
};

struct Estimate {
    double value = 0.0;
    double sigma = 0.0;
};

struct CameraConfig {
    /// S, electrons per ADU
    double sensitivity_e_per_adu = 5.0;
    /// G, EM gain
    double em_gain = 30.0;
    /// T, integration time per image
    double integration_s = 10.0;
    std::size_t superpixel_bin = 24;
    std::size_t image_rows = 15;
    std::size_t image_cols = 15;
    Roi roi;
    Estimate baseline_adu_per_pixel{560.4, 1.3};
    /// Output-referred (post-multiplication) dark electrons
    Estimate dark_e_per_s_per_pixel{2.66, 0.06};
    /// Read noise per superpixel read-out
    double read_noise_adu = 6.0;
};

inline void validate(const CameraConfig& c)
{
    if (!(c.sensitivity_e_per_adu > 0.0) || !(c.em_gain > 0.0) || !(c.integration_s > 0.0))
        throw ConfigError("camera: sensitivity, EM gain and integration time must be positive");
    if (c.superpixel_bin == 0)
        throw ConfigError("camera: superpixel bin must be at least 1");
    if (c.roi.rows == 0 || c.roi.cols == 0)
        throw ConfigError("camera: ROI must be non-empty");
    if (c.roi.row0 + c.roi.rows > c.image_rows || c.roi.col0 + c.roi.cols > c.image_cols)
        throw ConfigError("camera: ROI extends beyond the image");
    if (c.dark_e_per_s_per_pixel.value < 0.0 || c.read_noise_adu < 0.0)
        throw ConfigError("camera: dark rate and read noise must be non-negative");
}

struct Frame {
    Image signal;
    Image background;
    double w_out_W = 0.0;
    double timestamp_s = 0.0;
    /// Synthetic ground truth; absent for measured data.
    std::optional<bool> cic_injected;
};

struct FrameSeries {
    std::vector<Frame> frames;
    propagation::SourceKind source_kind = propagation::SourceKind::laser;
};

/// F = N S / (G T), with N the ROI sum of (signal - background) in ADU.
inline double frame_to_rate(const Image& signal, const Image& background, const CameraConfig& cam)
{
    if (signal.rows != background.rows || signal.cols != background.cols)
        throw DataError("frame_to_rate: signal and background images differ in shape");
    if (signal.adu.size() != signal.rows * signal.cols || background.adu.size() != signal.adu.size())
        throw DataError("frame_to_rate: image buffer does not match its shape");
    const auto& r = cam.roi;
    if (r.rows == 0 || r.cols == 0 || r.row0 + r.rows > signal.rows || r.col0 + r.cols > signal.cols)
        throw DataError("frame_to_rate: ROI lies outside the image");
    double n = 0.0;
    for (std::size_t i = r.row0; i < r.row0 + r.rows; ++i)
        for (std::size_t j = r.col0; j < r.col0 + r.cols; ++j)
            n += signal.at(i, j) - background.at(i, j);
    return n * cam.sensitivity_e_per_adu / (cam.em_gain * cam.integration_s);
}

struct RateSeries {
    std::vector<double> rates;
    std::vector<double> normalized;
    std::vector<bool> kept;
    std::vector<double> w_out_W;

    [[nodiscard]] std::size_t kept_count() const { return static_cast<std::size_t>(std::count(kept.begin(), kept.end(), true)); }
    [[nodiscard]] double kept_fraction() const
    {
        return kept.empty() ? 0.0 : static_cast<double>(kept_count()) / static_cast<double>(kept.size());
    }
    [[nodiscard]] std::vector<double> kept_normalized() const
    {
        std::vector<double> out;
        for (std::size_t i = 0; i < normalized.size(); ++i)
            if (kept[i])
                out.push_back(normalized[i]);
        return out;
    }
    [[nodiscard]] std::vector<double> kept_raw() const
    {
        std::vector<double> out;
        for (std::size_t i = 0; i < rates.size(); ++i)
            if (kept[i])
                out.push_back(rates[i]);
        return out;
    }
};

inline RateSeries series_rates(const FrameSeries& fs, const CameraConfig& cam)
{
    RateSeries rs;
    for (const auto& f : fs.frames) {
        if (f.w_out_W < 0.0)
            throw DataError("frame series: output power must be non-negative");
        rs.rates.push_back(frame_to_rate(f.signal, f.background, cam));
        rs.w_out_W.push_back(f.w_out_W);
    }
    rs.normalized = rs.rates;
    rs.kept.assign(rs.rates.size(), true);
    return rs;
}

inline double median(std::vector<double> v)
{
    if (v.empty())
        throw DataError("median of an empty sequence");
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double hi = *mid;
    if (v.size() % 2 == 1)
        return hi;
    return 0.5 * (hi + *std::max_element(v.begin(), mid));
}

/// Masks frames whose raw rate exceeds median + k * 1.4826 * MAD. Spikes only add
/// charge, so only the upper side is tested.
inline RateSeries reject_cic(RateSeries rs, double threshold_k = 5.0)
{
    if (rs.rates.size() < 10)
        throw DataError("reject_cic: at least 10 frames are required");
    const double med = median(rs.rates);
    std::vector<double> dev(rs.rates.size());
    for (std::size_t i = 0; i < dev.size(); ++i)
        dev[i] = std::abs(rs.rates[i] - med);
    const double mad = 1.4826 * median(dev);
    const double limit = med + threshold_k * mad;
    rs.kept.resize(rs.rates.size(), true);
    for (std::size_t i = 0; i < rs.rates.size(); ++i)
        rs.kept[i] = rs.kept[i] && !(rs.rates[i] > limit);
    return rs;
}

enum class Scaling { quadratic, linear };

inline const char* to_string(Scaling s) { return s == Scaling::quadratic ? "quadratic" : "linear"; }

inline Scaling default_scaling(propagation::SourceKind k)
{
    return k == propagation::SourceKind::laser ? Scaling::quadratic : Scaling::linear;
}

/// Rescales every frame to the mean output power of the kept frames.
inline RateSeries normalize_series(RateSeries rs, Scaling scaling)
{
    if (rs.w_out_W.size() != rs.rates.size() || rs.kept.size() != rs.rates.size())
        throw DataError("normalize_series: rate, power and mask lengths differ");
    double sum = 0.0;
    std::size_t n = 0;
    bool uniform = true;
    std::optional<double> first;
    for (std::size_t i = 0; i < rs.rates.size(); ++i) {
        if (!rs.kept[i])
            continue;
        const double w = rs.w_out_W[i];
        if (!(w > 0.0)) {
            std::ostringstream msg;
            msg << "normalize_series: frame " << i << " has non-positive output power " << w << " W";
            throw DataError(msg.str());
        }
        if (first && w != *first)
            uniform = false;
        if (!first)
            first = w;
        sum += w;
        ++n;
    }
    if (n == 0)
        throw DataError("normalize_series: no kept frames");
    const double w_avg = sum / static_cast<double>(n);
    rs.normalized.resize(rs.rates.size());
    for (std::size_t i = 0; i < rs.rates.size(); ++i) {
        const double w = rs.w_out_W[i];
        if (uniform && w == *first) {
            rs.normalized[i] = rs.rates[i];
            continue;
        }
        if (!(w > 0.0)) {
            rs.normalized[i] = rs.rates[i];
            continue;
        }
        const double ratio = w_avg / w;
        rs.normalized[i] = rs.rates[i] * (scaling == Scaling::quadratic ? ratio * ratio : ratio);
    }
    return rs;
}

/// Overlapping Allan deviation at averaging size m.
inline double allan_deviation(std::span<const double> x, std::size_t m)
{
    const std::size_t n = x.size();
    if (m == 0 || 2 * m > n)
        throw DataError("allan_deviation: averaging size must satisfy 1 <= m <= n/2");
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        prefix[i + 1] = prefix[i] + x[i];
    const double md = static_cast<double>(m);
    double acc = 0.0;
    const std::size_t terms = n - 2 * m + 1;
    for (std::size_t k = 0; k < terms; ++k) {
        const double a = (prefix[k + m] - prefix[k]) / md;
        const double b = (prefix[k + 2 * m] - prefix[k + m]) / md;
        acc += (b - a) * (b - a);
    }
    return std::sqrt(acc / (2.0 * static_cast<double>(terms)));
}

struct AllanPoint {
    std::size_t m;
    double deviation;
};

struct AllanOptions {
    /// Accept m while deviation <= factor * c / sqrt(m)
    double factor = 1.25;
    /// Largest m as a fraction of the series length
    double max_fraction = 0.125;
    /// Number of leading grid points that set the 1/sqrt(m) trend
    std::size_t trend_points = 4;
};

struct AllanCurve {
    std::vector<AllanPoint> points;
    std::size_t selected_m = 0;
    double selected_deviation = 0.0;
    /// c in the reference trend c / sqrt(m)
    double trend = 0.0;
};

/// Ascending grid round(2^(k/4)) without repeats, capped at m_max.
inline std::vector<std::size_t> allan_grid(std::size_t m_max)
{
    std::vector<std::size_t> g;
    for (int k = 0;; ++k) {
        const auto m = static_cast<std::size_t>(std::llround(std::pow(2.0, k / 4.0)));
        if (m > m_max)
            break;
        if (g.empty() || m != g.back())
            g.push_back(m);
    }
    return g;
}

inline AllanCurve allan_curve(std::span<const double> x, const AllanOptions& opt = {})
{
    if (x.size() < 16)
        throw DataError("allan_curve: at least 16 frames are required");
    const auto m_max = std::max<std::size_t>(2, static_cast<std::size_t>(opt.max_fraction * static_cast<double>(x.size())));
    AllanCurve curve;
    for (std::size_t m : allan_grid(m_max))
        curve.points.push_back({m, allan_deviation(x, m)});

    const std::size_t lead = std::min(std::max<std::size_t>(1, opt.trend_points), curve.points.size());
    double c = 0.0;
    for (std::size_t i = 0; i < lead; ++i)
        c += curve.points[i].deviation * std::sqrt(static_cast<double>(curve.points[i].m));
    curve.trend = c / static_cast<double>(lead);

    curve.selected_m = curve.points.front().m;
    curve.selected_deviation = curve.points.front().deviation;
    for (const auto& p : curve.points) {
        if (p.deviation > opt.factor * curve.trend / std::sqrt(static_cast<double>(p.m)))
            break;
        curve.selected_m = p.m;
        curve.selected_deviation = p.deviation;
    }
    return curve;
}

inline AllanCurve allan_curve(const RateSeries& rs, const AllanOptions& opt = {})
{
    const auto x = rs.kept_normalized();
    return allan_curve(std::span<const double>(x), opt);
}

struct PowerPoint {
    double power_W;
    double rate;
    double sigma;
};

struct PowerLawFit {
    double slope;
    double intercept;
    double var_slope;
    double var_intercept;
    double cov;
    double chi2;
    std::size_t dof;

    /// rate = exp(intercept) * power^slope
    [[nodiscard]] double predict(double power_W) const { return std::exp(intercept) * std::pow(power_W, slope); }
};

/// Weighted least squares of ln(rate) on ln(power) with sigma_ln = sigma / rate.
/// With `fixed_slope` set only the intercept is estimated.
inline PowerLawFit fit_power_law(std::span<const PowerPoint> pts, std::optional<double> fixed_slope = std::nullopt)
{
    const std::size_t need = fixed_slope ? 1 : 3;
    if (pts.size() < need)
        throw DataError("fit_power_law: at least " + std::to_string(need) + " points are required");
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> xs, ys, ws;
    for (const auto& p : pts) {
        if (!(p.power_W > 0.0))
            throw DataError("fit_power_law: powers must be positive");
        if (!(p.rate > 0.0))
            throw DataError("fit_power_law: rates must be positive (logarithm undefined)");
        if (!(p.sigma > 0.0))
            throw DataError("fit_power_law: uncertainties must be positive");
        const double x = std::log(p.power_W), y = std::log(p.rate);
        const double s = p.sigma / p.rate;
        const double w = 1.0 / (s * s);
        xs.push_back(x);
        ys.push_back(y);
        ws.push_back(w);
        sw += w;
        sx += w * x;
        sy += w * y;
    }
    PowerLawFit fit{};
    if (fixed_slope) {
        fit.slope = *fixed_slope;
        fit.intercept = (sy - fit.slope * sx) / sw;
        fit.var_intercept = 1.0 / sw;
        fit.dof = pts.size() - 1;
    } else {
        const double xm = sx / sw;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double dx = xs[i] - xm;
            sxx += ws[i] * dx * dx;
            sxy += ws[i] * dx * ys[i];
        }
        if (!(sxx > 0.0))
            throw DataError("fit_power_law: powers must not all be equal");
        fit.slope = sxy / sxx;
        fit.intercept = (sy - fit.slope * sx) / sw;
        fit.var_slope = 1.0 / sxx;
        fit.var_intercept = 1.0 / sw + xm * xm / sxx;
        fit.cov = -xm / sxx;
        fit.dof = pts.size() - 2;
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - fit.intercept - fit.slope * xs[i];
        fit.chi2 += ws[i] * r * r;
    }
    return fit;
}

enum class DriftModel { none, linear, random_walk };

inline const char* to_string(DriftModel d)
{
    switch (d) {
    case DriftModel::none:
        return "none";
    case DriftModel::linear:
        return "linear";
    case DriftModel::random_walk:
        return "random_walk";
    }
    return "none";
}

struct PowerDrift {
    DriftModel model = DriftModel::none;
    /// linear: total fractional change over the series; random_walk: fractional step per frame
    double amount = 0.0;
};

struct SynthesisOptions {
    /// Detected rate at the nominal power, cnt s^-1
    double truth_rate = 1.6;
    std::size_t n_frames = 2058;
    std::uint64_t seed = 1;
    double cic_probability = 0.0;
    /// CIC spike size in units of the predicted per-frame rate deviation
    double cic_amplitude_sigma = 20.0;
    PowerDrift drift;
    double nominal_power_W = 1.0e-9;
    propagation::SourceKind source_kind = propagation::SourceKind::laser;
    /// Spot width (superpixels) of the fluorescence distribution inside the ROI
    double spot_sigma_superpixels = 1.5;
    /// Time between consecutive frames (signal + background + read-out)
    double frame_period_s = 22.7;
};

/// Predicted standard deviation of a single-frame rate for the synthesis model.
inline double predicted_rate_sigma(double rate, const CameraConfig& cam)
{
    const double npix = static_cast<double>(cam.roi.count());
    const double bin2 = static_cast<double>(cam.superpixel_bin * cam.superpixel_bin);
    const double dark_in = cam.dark_e_per_s_per_pixel.value / cam.em_gain * bin2 * cam.integration_s * npix;
    const double mean_counts = 2.0 * dark_in + std::max(rate, 0.0) * cam.integration_s;
    const double scale = cam.sensitivity_e_per_adu / (cam.em_gain * cam.integration_s);
    // Gamma-distributed multiplication doubles the Poisson variance (excess noise factor sqrt 2).
    const double var_counts = 2.0 * mean_counts / (cam.integration_s * cam.integration_s);
    const double var_read = 2.0 * npix * (cam.read_noise_adu * cam.read_noise_adu + 1.0 / 12.0) * scale * scale;
    return std::sqrt(var_counts + var_read);
}

/// Relative output power of each frame under the drift model.
inline std::vector<double> power_trace(const SynthesisOptions& opt)
{
    std::vector<double> w(opt.n_frames, 1.0);
    if (opt.drift.model == DriftModel::linear) {
        const double denom = opt.n_frames > 1 ? static_cast<double>(opt.n_frames - 1) : 1.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = 1.0 + opt.drift.amount * static_cast<double>(i) / denom;
    } else if (opt.drift.model == DriftModel::random_walk) {
        std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> step(0.0, opt.drift.amount);
        double level = 1.0;
        for (auto& v : w) {
            v = level;
            level = std::max(1e-6, level + step(rng));
        }
    }
    for (double v : w)
        if (!(v > 0.0))
            throw ConfigError("synthesize_series: the drift model drives the power to zero");
    return w;
}

namespace detail {

inline std::mt19937_64 frame_rng(std::uint64_t seed, std::uint64_t frame)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(frame >> 32)};
    return std::mt19937_64(seq);
}

inline double em_output(std::mt19937_64& rng, double mean_counts, double gain)
{
    if (!(mean_counts > 0.0))
        return 0.0;
    std::poisson_distribution<long long> poisson(mean_counts);
    const auto n = poisson(rng);
    if (n == 0)
        return 0.0;
    std::gamma_distribution<double> amp(static_cast<double>(n), gain);
    return amp(rng);
}

} // namespace detail

/// Poisson photo- and dark counts, gamma EM multiplication, Gaussian read noise
/// about the baseline and ADU rounding. Each frame draws from its own stream keyed
/// by (seed, frame index).
inline FrameSeries synthesize_series(const SynthesisOptions& opt, const CameraConfig& cam)
{
    validate(cam);
    if (opt.n_frames < 1)
        throw ConfigError("synthesize_series: at least one frame is required");
    if (opt.truth_rate < 0.0)
        throw ConfigError("synthesize_series: truth rate must be non-negative");
    if (!(opt.cic_probability >= 0.0 && opt.cic_probability <= 1.0))
        throw ConfigError("synthesize_series: CIC probability must lie in [0, 1]");
    if (!(opt.nominal_power_W > 0.0))
        throw ConfigError("synthesize_series: nominal power must be positive");

    const auto& roi = cam.roi;
    Image weight(cam.image_rows, cam.image_cols, 0.0);
    {
        const double rc = static_cast<double>(roi.row0) + 0.5 * static_cast<double>(roi.rows - 1);
        const double cc = static_cast<double>(roi.col0) + 0.5 * static_cast<double>(roi.cols - 1);
        const double s2 = 2.0 * opt.spot_sigma_superpixels * opt.spot_sigma_superpixels;
        double total = 0.0;
        for (std::size_t i = roi.row0; i < roi.row0 + roi.rows; ++i)
            for (std::size_t j = roi.col0; j < roi.col0 + roi.cols; ++j) {
                const double di = static_cast<double>(i) - rc, dj = static_cast<double>(j) - cc;
                weight.at(i, j) = std::exp(-(di * di + dj * dj) / s2);
                total += weight.at(i, j);
            }
        for (auto& v : weight.adu)
            v /= total;
    }

    const double bin2 = static_cast<double>(cam.superpixel_bin * cam.superpixel_bin);
    const double baseline = cam.baseline_adu_per_pixel.value * bin2;
    const double dark_counts = cam.dark_e_per_s_per_pixel.value / cam.em_gain * bin2 * cam.integration_s;
    const double exponent = opt.source_kind == propagation::SourceKind::laser ? 2.0 : 1.0;
    const double spike_adu = opt.cic_amplitude_sigma * predicted_rate_sigma(opt.truth_rate, cam) * cam.em_gain *
                             cam.integration_s / cam.sensitivity_e_per_adu;
    const auto trace = power_trace(opt);

    FrameSeries fs;
    fs.source_kind = opt.source_kind;
    fs.frames.reserve(opt.n_frames);
    for (std::size_t k = 0; k < opt.n_frames; ++k) {
        auto rng = detail::frame_rng(opt.seed, k);
        std::normal_distribution<double> read(0.0, cam.read_noise_adu);
        const double rate = opt.truth_rate * std::pow(trace[k], exponent);
        Frame f;
        f.signal = Image(cam.image_rows, cam.image_cols);
        f.background = Image(cam.image_rows, cam.image_cols);
        for (int which = 0; which < 2; ++which) {
            Image& img = which == 0 ? f.background : f.signal;
            for (std::size_t i = 0; i < img.rows; ++i)
                for (std::size_t j = 0; j < img.cols; ++j) {
                    double mean = dark_counts;
                    if (which == 1)
                        mean += rate * cam.integration_s * weight.at(i, j);
                    const double e_out = detail::em_output(rng, mean, cam.em_gain);
                    const double adu = baseline + e_out / cam.sensitivity_e_per_adu +
                                       (cam.read_noise_adu > 0.0 ? read(rng) : 0.0);
                    img.at(i, j) = std::floor(adu + 0.5);
                }
        }
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const bool spike = opt.cic_probability > 0.0 && uni(rng) < opt.cic_probability;
        if (spike) {
            std::uniform_int_distribution<std::size_t> pick(0, roi.count() - 1);
            const std::size_t p = pick(rng);
            f.signal.at(roi.row0 + p / roi.cols, roi.col0 + p % roi.cols) += std::floor(spike_adu + 0.5);
        }
        f.cic_injected = spike;
        f.w_out_W = opt.nominal_power_W * trace[k];
        f.timestamp_s = static_cast<double>(k) * opt.frame_period_s;
        fs.frames.push_back(std::move(f));
    }
    return fs;
}

struct AnalysisOptions {
    Scaling scaling = Scaling::quadratic;
    double cic_threshold_k = 5.0;
    AllanOptions allan;
};

struct AnalysisResult {
    RateSeries rates;
    AllanCurve allan_raw;
    AllanCurve allan_normalized;
    /// Mean of the kept normalized rates
    double mean_rate = 0.0;
    double mean_raw_rate = 0.0;
    double rejected_fraction = 0.0;
};

inline double mean(std::span<const double> v)
{
    if (v.empty())
        throw DataError("mean of an empty sequence");
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

inline AnalysisResult analyze_series(const FrameSeries& fs, const CameraConfig& cam, const AnalysisOptions& opt = {})
{
    AnalysisResult out;
    out.rates = normalize_series(reject_cic(series_rates(fs, cam), opt.cic_threshold_k), opt.scaling);
    const auto raw = out.rates.kept_raw();
    const auto norm = out.rates.kept_normalized();
    out.allan_raw = allan_curve(std::span<const double>(raw), opt.allan);
    out.allan_normalized = allan_curve(std::span<const double>(norm), opt.allan);
    out.mean_rate = mean(norm);
    out.mean_raw_rate = mean(raw);
    out.rejected_fraction = 1.0 - out.rates.kept_fraction();
    return out;
}

} // namespace lcf2pa::frames
