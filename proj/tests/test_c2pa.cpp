#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lcf2pa/c2pa.hpp"
#include "support.hpp"

using namespace lcf2pa;

namespace {

Experiment experiment3() { return testing_support::load("experiment-3.json").experiment; }

} // namespace

TEST(NumberDensity, PerMolar)
{
    EXPECT_NEAR(number_density_per_cm3(1.0) / 6.022e20, 1.0, 1e-3);
    EXPECT_NEAR(number_density_per_cm3(1e-3) / 6.022e17, 1.0, 1e-3);
}

TEST(EmissionShape, NormalizedToQuantumYield)
{
    FluorophoreSpec fl;
    fl.quantum_yield = 0.67;
    const auto shaped = with_emission_shape(fl, Table({420.0, 450.0, 480.0, 560.0}, {0.1, 2.0, 1.0, 0.0}));
    EXPECT_NEAR(trapezoid(shaped.emission->x(), shaped.emission->y()) / 0.67, 1.0, 1e-6);
}

TEST(DetectionEfficiency, BoundaryAndAttenuated)
{
    const auto e = experiment3();
    EXPECT_EQ(c2pa::detection_efficiency(e.detection.gamma0, e.attenuation, e.fiber, 0.0, 451.0), 0.630);

    propagation::AttenuationModel solvent;
    solvent.solvent_absorption_per_cm = Table::constant(0.034);
    EXPECT_NEAR(c2pa::detection_efficiency(Table::constant(0.630), solvent, e.fiber, 36.0, 451.0), 0.185, 0.001);
}

TEST(EmissionIntegral, SingleLineAtEntrance)
{
    auto e = experiment3();
    // kappa = 0.0146 from the bundled indices; product 0.630 * 0.0146 * 0.67.
    EXPECT_NEAR(c2pa::emission_integral(e, 0.0), 6.16e-3, 0.03e-3);
    e.fluorophore.quantum_yield = 0.0;
    EXPECT_EQ(c2pa::emission_integral(e, 0.0), 0.0);
}

TEST(EmissionIntegral, NarrowTableMatchesSingleLine)
{
    auto line = experiment3();
    line.attenuation.concentration_M = 1e-4;
    auto tab = line;
    tab.fluorophore = with_emission_shape(tab.fluorophore, Table({450.999, 451.0, 451.001}, {0.0, 1.0, 0.0}));
    ASSERT_EQ(tab.spectral_mode(), SpectralMode::tabulated);
    for (double z : {0.0, 5.0, 20.0, 36.0})
        EXPECT_NEAR(c2pa::emission_integral(tab, z) / c2pa::emission_integral(line, z), 1.0, 1e-6) << z;
}

TEST(EmissionIntegral, NonMonotonicGridRejected)
{
    EXPECT_THROW((void)Table({451.0, 450.0}, {1.0, 1.0}), DataError);
}

TEST(ForwardC2pef, ZeroCrossSection)
{
    EXPECT_EQ(c2pa::forward_c2pef(0.0, experiment3()), 0.0);
}

TEST(ForwardC2pef, PairSourceIsTheWrongModel)
{
    auto e = experiment3();
    e.source.kind = propagation::SourceKind::spdc;
    e.source.input_rate_per_s = 1e8;
    e.source.spdc_pulse_fwhm_fs = 1000.0;
    EXPECT_THROW((void)c2pa::forward_c2pef(from_gm(100.0), e), WrongModelError);
}

TEST(ForwardC2pef, ExactlyQuadraticInPower)
{
    auto e = experiment3();
    std::vector<double> x, y;
    for (double w : {1e-9, 3e-9, 1e-8, 4e-8, 1e-7}) {
        e.source.input_power_W = w;
        x.push_back(std::log(w));
        y.push_back(std::log(c2pa::forward_c2pef(from_gm(500.0), e)));
    }
    for (std::size_t i = 1; i < x.size(); ++i)
        EXPECT_NEAR((y[i] - y[0]) / (x[i] - x[0]), 2.0, 1e-10);
}

TEST(InvertSigmaC, RoundTripIsIdentity)
{
    for (const char* name : {"experiment-1.json", "experiment-2.json", "experiment-3.json"}) {
        auto e = testing_support::load(name).experiment;
        e.source.input_power_W = 2.5e-9;
        for (double gm : {10.0, 390.0, 2.0e4}) {
            const double f = c2pa::forward_c2pef(from_gm(gm), e);
            const double per_w2 = f / (e.source.input_power_W * e.source.input_power_W);
            EXPECT_NEAR(to_gm(c2pa::invert_sigma_c(per_w2, e)) / gm, 1.0, 1e-10) << name;
        }
    }
}

TEST(InvertSigmaC, Errors)
{
    auto e = experiment3();
    EXPECT_THROW((void)c2pa::invert_sigma_c(0.0, e), DomainError);
    EXPECT_THROW((void)c2pa::invert_sigma_c(-1.0, e), DomainError);
    e.attenuation.concentration_M = 0.0;
    EXPECT_THROW((void)c2pa::invert_sigma_c(1.0, e), ConfigError);
}

TEST(InvertSigmaC, CrossSectionsOfOrderHundredsToThousandsGm)
{
    // Single-line treatment of sample reabsorption; the three-experiment average is tracked in acceptance.
    for (const char* name : {"experiment-1.json", "experiment-2.json"}) {
        const auto rc = testing_support::load(name);
        const double gm = to_gm(report::sigma_c_from_fit(*rc.measurement.fc_per_w0sq_per_uW2, rc.experiment));
        EXPECT_GT(gm, 1e2) << name;
        EXPECT_LT(gm, 1e4) << name;
    }
}

TEST(ConcentrationCurve, DiluteLimitMatchesNoReabsorption)
{
    auto e = experiment3();
    const double sigma = from_gm(400.0);
    const std::vector<double> c{1e-9, 1e-6, 1e-4, 1e-3};
    const auto curve = c2pa::conc_normalized_curve(e, sigma, c);
    auto clear = e;
    clear.attenuation.extinction_per_M_per_cm = Table::constant(0.0);
    clear.attenuation.concentration_M = 1.0;
    clear.source.input_power_W = 100e-9;
    const double ref = c2pa::forward_c2pef(sigma, clear);
    EXPECT_NEAR(curve.front().fc_per_concentration / ref, 1.0, 1e-3);
    for (std::size_t i = 1; i < curve.size(); ++i)
        EXPECT_LE(curve[i].fc_per_concentration, curve[i - 1].fc_per_concentration);
}

TEST(Experiment, ValidateRejectsBadDetection)
{
    auto e = experiment3();
    e.detection.gamma0 = Table::constant(1.2);
    EXPECT_THROW(validate(e), ConfigError);
    e = experiment3();
    e.detection.band_min_nm = 800.0;
    EXPECT_THROW(validate(e), ConfigError);
}
