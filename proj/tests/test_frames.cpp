#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "support.hpp"

using namespace lcf2pa;
using namespace lcf2pa::frames;

namespace {

RateSeries series_of(const std::vector<double>& rates, const std::vector<double>& powers)
{
    RateSeries rs;
    rs.rates = rates;
    rs.normalized = rates;
    rs.w_out_W = powers;
    rs.kept.assign(rates.size(), true);
    return rs;
}

std::vector<double> white_noise(std::size_t n, double mean, double sigma, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(mean, sigma);
    std::vector<double> x(n);
    for (auto& v : x)
        v = d(rng);
    return x;
}

} // namespace

TEST(FrameToRate, UnitConstruction)
{
    CameraConfig cam;
    Image bg(cam.image_rows, cam.image_cols, 100.0);
    Image sig = bg;
    EXPECT_EQ(frame_to_rate(sig, bg, cam), 0.0);
    sig.at(5, 5) += cam.em_gain * cam.integration_s / cam.sensitivity_e_per_adu;
    EXPECT_NEAR(frame_to_rate(sig, bg, cam), 1.0, 1e-12);
    sig = bg;
    sig.at(4, 7) += 600.0;
    EXPECT_NEAR(frame_to_rate(sig, bg, cam), 10.0, 1e-12);
}

TEST(FrameToRate, OutsideRoiIgnoredAndShapeChecked)
{
    CameraConfig cam;
    Image bg(cam.image_rows, cam.image_cols, 0.0);
    Image sig = bg;
    sig.at(0, 0) = 1e6;
    EXPECT_EQ(frame_to_rate(sig, bg, cam), 0.0);
    EXPECT_THROW((void)frame_to_rate(Image(3, 3), bg, cam), DataError);
}

TEST(RejectCic, ConstantSeriesKeepsEverything)
{
    auto rs = reject_cic(series_of(std::vector<double>(50, 2.0), std::vector<double>(50, 1e-9)));
    EXPECT_EQ(rs.kept_count(), 50u);
}

TEST(RejectCic, CleanSyntheticDataRarelyRejected)
{
    SynthesisOptions opt;
    opt.n_frames = 1000;
    opt.seed = 11;
    const auto res = analyze_series(synthesize_series(opt, CameraConfig{}), CameraConfig{});
    EXPECT_LT(res.rejected_fraction, 0.01);
}

TEST(RejectCic, InjectedSpikesRecovered)
{
    SynthesisOptions opt;
    opt.n_frames = 1500;
    opt.cic_probability = 0.07;
    opt.seed = 5;
    const auto fs = synthesize_series(opt, CameraConfig{});
    std::size_t injected = 0;
    for (const auto& f : fs.frames)
        injected += f.cic_injected.value_or(false) ? 1 : 0;
    const double inj = static_cast<double>(injected) / static_cast<double>(fs.frames.size());
    const auto res = analyze_series(fs, CameraConfig{});
    EXPECT_NEAR(res.rejected_fraction, inj, 0.02);
    EXPECT_NEAR(inj, 0.07, 0.02);
}

TEST(RejectCic, TooFewFrames)
{
    EXPECT_THROW((void)reject_cic(series_of({1, 2, 3}, {1, 1, 1})), DataError);
}

TEST(Normalize, ConstantPowerIsExactPassthrough)
{
    const auto x = white_noise(40, 1.6, 50.0, 3);
    const auto rs = normalize_series(series_of(x, std::vector<double>(40, 1.75e-9)), Scaling::quadratic);
    for (std::size_t i = 0; i < x.size(); ++i)
        EXPECT_EQ(rs.normalized[i], x[i]);
}

TEST(Normalize, QuadraticDoublesFrameAtReducedPower)
{
    std::vector<double> w(10, (10.0 - 1.0 / std::sqrt(2.0)) / 9.0);
    w[3] = 1.0 / std::sqrt(2.0);
    const auto rs = normalize_series(series_of(std::vector<double>(10, 4.0), w), Scaling::quadratic);
    EXPECT_NEAR(rs.normalized[3], 8.0, 1e-12);
}

TEST(Normalize, LinearDoublesFrameAtHalfPower)
{
    std::vector<double> w(10, 9.5 / 9.0);
    w[6] = 0.5;
    const auto rs = normalize_series(series_of(std::vector<double>(10, 4.0), w), Scaling::linear);
    EXPECT_NEAR(rs.normalized[6], 8.0, 1e-12);
}

TEST(Normalize, ZeroPowerOnKeptFrame)
{
    std::vector<double> w(10, 1.0);
    w[2] = 0.0;
    EXPECT_THROW((void)normalize_series(series_of(std::vector<double>(10, 1.0), w), Scaling::linear), DataError);
}

TEST(Allan, WhiteNoiseFollowsInverseSqrt)
{
    const std::size_t n = 4096, trials = 64;
    const double sigma = 50.0;
    std::vector<double> acc;
    std::vector<std::size_t> ms;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto curve = allan_curve(white_noise(n, 1.6, sigma, 100 + t));
        if (acc.empty()) {
            acc.assign(curve.points.size(), 0.0);
            for (const auto& p : curve.points)
                ms.push_back(p.m);
        }
        for (std::size_t i = 0; i < curve.points.size(); ++i)
            acc[i] += curve.points[i].deviation * curve.points[i].deviation;
    }
    ASSERT_EQ(ms.back(), n / 8);
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const double dev = std::sqrt(acc[i] / trials);
        EXPECT_NEAR(dev / (sigma / std::sqrt(static_cast<double>(ms[i]))), 1.0, 0.10) << "m = " << ms[i];
    }
}

TEST(Allan, ConstantSeriesIsZero)
{
    const auto curve = allan_curve(std::vector<double>(64, 3.0));
    for (const auto& p : curve.points)
        EXPECT_EQ(p.deviation, 0.0);
}

TEST(Allan, GridIsAscending)
{
    const auto g = allan_grid(512);
    for (std::size_t i = 1; i < g.size(); ++i)
        EXPECT_GT(g[i], g[i - 1]);
    EXPECT_EQ(g.front(), 1u);
    EXPECT_EQ(g.back(), 512u);
}

TEST(Allan, DriftStopsSelectionBeforeKnee)
{
    std::mt19937_64 rng(9);
    std::normal_distribution<double> white(0.0, 10.0), step(0.0, 1.0);
    std::vector<double> x(4096);
    double level = 0.0;
    for (auto& v : x) {
        level += step(rng);
        v = level + white(rng);
    }
    const auto curve = allan_curve(x);
    EXPECT_LT(curve.selected_m, curve.points.back().m);
    const auto it = std::find_if(curve.points.begin(), curve.points.end(),
                                 [&](const AllanPoint& p) { return p.m > curve.selected_m; });
    ASSERT_NE(it, curve.points.end());
    EXPECT_GT(it->deviation, 1.25 * curve.trend / std::sqrt(static_cast<double>(it->m)));
}

TEST(Allan, TooFewFrames)
{
    EXPECT_THROW((void)allan_curve(std::vector<double>(8, 1.0)), DataError);
}

TEST(PowerLaw, NoiselessSlopes)
{
    for (double p : {2.0, 1.0}) {
        std::vector<PowerPoint> pts;
        for (double w : {1e-9, 3e-9, 1e-8, 5e-8, 1e-7})
            pts.push_back({w, 7.0e12 * std::pow(w, p), 1.0});
        EXPECT_NEAR(fit_power_law(pts).slope, p, 1e-10);
    }
}

TEST(PowerLaw, FixedSlopeIntercept)
{
    std::vector<PowerPoint> pts;
    for (double w : {1e-9, 1e-8, 1e-7})
        pts.push_back({w, 3.0 * w * w, 3.0 * w * w * 0.1});
    const auto fit = fit_power_law(pts, 2.0);
    EXPECT_DOUBLE_EQ(fit.slope, 2.0);
    EXPECT_NEAR(std::exp(fit.intercept), 3.0, 1e-9);
    EXPECT_NEAR(fit.predict(1e-6), 3e-12, 1e-20);
}

TEST(PowerLaw, NonPositiveRateRejected)
{
    std::vector<PowerPoint> pts{{1e-9, 1.0, 0.1}, {2e-9, 0.0, 0.1}, {3e-9, 9.0, 0.1}};
    EXPECT_THROW((void)fit_power_law(pts), DataError);
}

TEST(Synthesis, FixedSeedIsBitIdentical)
{
    SynthesisOptions opt;
    opt.n_frames = 20;
    opt.seed = 77;
    opt.cic_probability = 0.2;
    opt.drift = {DriftModel::random_walk, 0.01};
    const auto a = synthesize_series(opt, CameraConfig{});
    const auto b = synthesize_series(opt, CameraConfig{});
    for (std::size_t k = 0; k < a.frames.size(); ++k) {
        EXPECT_EQ(a.frames[k].signal.adu, b.frames[k].signal.adu);
        EXPECT_EQ(a.frames[k].background.adu, b.frames[k].background.adu);
        EXPECT_EQ(a.frames[k].w_out_W, b.frames[k].w_out_W);
    }
}

TEST(Synthesis, PredictedSigmaMatchesEmpirical)
{
    SynthesisOptions opt;
    opt.n_frames = 800;
    opt.truth_rate = 20.0;
    const CameraConfig cam;
    const auto rs = series_rates(synthesize_series(opt, cam), cam);
    double m = 0.0, s2 = 0.0;
    for (double r : rs.rates)
        m += r;
    m /= rs.rates.size();
    for (double r : rs.rates)
        s2 += (r - m) * (r - m);
    const double sd = std::sqrt(s2 / (rs.rates.size() - 1));
    EXPECT_NEAR(sd / predicted_rate_sigma(20.0, cam), 1.0, 0.1);
    EXPECT_NEAR(m, 20.0, 4.0 * sd / std::sqrt(static_cast<double>(rs.rates.size())));
}

TEST(Synthesis, DefaultsUseCameraCharacterisation)
{
    const CameraConfig cam;
    EXPECT_DOUBLE_EQ(cam.baseline_adu_per_pixel.value, 560.4);
    EXPECT_DOUBLE_EQ(cam.dark_e_per_s_per_pixel.value, 2.66);
}

TEST(ClosedLoop, NullAndLowRateRecovered)
{
    for (double truth : {0.0, 1.6}) {
        SynthesisOptions opt;
        opt.truth_rate = truth;
        opt.seed = 2024;
        const auto res = analyze_series(synthesize_series(opt, CameraConfig{}), CameraConfig{});
        EXPECT_LE(std::abs(res.mean_rate - truth), 3.0 * res.allan_normalized.selected_deviation) << truth;
    }
}

TEST(ClosedLoop, DriftIsNormalizedAway)
{
    SynthesisOptions opt;
    opt.truth_rate = 400.0;
    opt.n_frames = 400;
    opt.drift = {DriftModel::linear, -0.3};
    const CameraConfig cam;
    const auto fs = synthesize_series(opt, cam);
    const auto res = analyze_series(fs, cam);
    // Normalized rates refer to the mean kept power.
    double wsum = 0.0;
    for (const auto& f : fs.frames)
        wsum += f.w_out_W / opt.nominal_power_W;
    const double w_avg = wsum / fs.frames.size();
    const double expected = opt.truth_rate * w_avg * w_avg;
    EXPECT_LE(std::abs(res.mean_rate - expected), 3.0 * res.allan_normalized.selected_deviation);
    EXPECT_LT(res.allan_normalized.points.back().deviation, res.allan_raw.points.back().deviation);
}

TEST(FramesIo, RoundTripBothEncodings)
{
    SynthesisOptions opt;
    opt.n_frames = 12;
    opt.cic_probability = 0.3;
    const CameraConfig cam;
    const auto fs = synthesize_series(opt, cam);
    for (auto enc : {ImageEncoding::f64, ImageEncoding::csv}) {
        const auto dir = testing_support::scratch_dir(enc == ImageEncoding::f64 ? "frames_f64" : "frames_csv");
        write_series(fs, cam, dir, enc);
        const auto back = read_series(dir / "manifest.json");
        ASSERT_EQ(back.series.frames.size(), fs.frames.size());
        for (std::size_t k = 0; k < fs.frames.size(); ++k) {
            for (std::size_t i = 0; i < fs.frames[k].signal.adu.size(); ++i)
                EXPECT_NEAR(back.series.frames[k].signal.adu[i], fs.frames[k].signal.adu[i], 1e-10);
            EXPECT_NEAR(back.series.frames[k].w_out_W, fs.frames[k].w_out_W, 1e-25);
            EXPECT_EQ(back.series.frames[k].cic_injected, fs.frames[k].cic_injected);
        }
        EXPECT_EQ(back.camera.superpixel_bin, cam.superpixel_bin);
    }
}

TEST(FramesIo, UnreadableManifest)
{
    const auto dir = testing_support::scratch_dir("frames_bad");
    EXPECT_THROW((void)read_series(dir / "missing.json"), DataError);
    {
        std::ofstream out(dir / "manifest.json");
        out << "{\"camera\": {}, \"frames\": [{\"signal\": \"nope.f64\", \"background\": \"nope.f64\", \"w_out_W\": 1e-9}]}";
    }
    EXPECT_THROW((void)read_series(dir / "manifest.json"), DataError);
}

TEST(CameraConfig, ValidateRejectsEmptyRoi)
{
    CameraConfig cam;
    cam.roi.rows = 0;
    EXPECT_THROW(validate(cam), ConfigError);
}
