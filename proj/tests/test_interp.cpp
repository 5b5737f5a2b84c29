#include <bzlab/cases.hpp>
#include <bzlab/interp.hpp>
#include <bzlab/reference.hpp>
#include <bzlab/study.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace bzlab;

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<TorusSpline> splines_of(const BandModel& m, int L, int order)
{
    const SampledBands b(m, UniformGrid(m.dim(), L));
    return fit_band_splines(b, order);
}

BandModel cos_band() { return BandModel::analytic({2, [](const FracKPoint& k) { return std::cos(two_pi * k[0]); }}); }
} // namespace

TEST(InterpCounting, TrivialLevels)
{
    const LevelSetQuadConfig cfg;
    const auto s = splines_of(cosine_band_model(), 16, 2);
    EXPECT_NEAR(counting_interp(s, -10.0, cfg).measure, 0.0, cfg.abs_tol);
    EXPECT_NEAR(counting_interp(s, 10.0, cfg).measure, 1.0, cfg.abs_tol);
    const auto c = splines_of(constant_band_model(0.4), 8, 2);
    EXPECT_NEAR(counting_interp(c, 0.4, cfg).measure, 1.0, cfg.abs_tol);
    EXPECT_NEAR(counting_interp(c, 0.5, cfg).measure, 1.0, cfg.abs_tol);
}

TEST(InterpCounting, OddBandHalfFilled)
{
    for (int L : {8, 16, 32}) {
        for (int order : {1, 2}) {
            const auto r = counting_interp(splines_of(cos_band(), L, order), 0.0, {});
            EXPECT_NEAR(r.measure, 0.5, 1e-6) << L << " " << order;
        }
    }
}

TEST(InterpCounting, Monotone)
{
    LevelSetQuadConfig cfg;
    for (int order : {1, 2}) {
        const SplineLevelSet set(splines_of(cosine_band_model(), 24, order), nullptr, cfg);
        double prev = -1.0;
        for (double e = -4.0; e <= 4.0; e += 0.2) {
            const double v = set.integrate(e).measure;
            EXPECT_GE(v + 2 * cfg.abs_tol, prev);
            prev = v;
        }
    }
}

TEST(InterpCounting, MatchesGenericIntegrator)
{
    const auto s = splines_of(BandModel::graphene(), 12, 2);
    for (double e : {-1.3, 0.2}) {
        double direct = 0.0;
        for (const auto& sp : s) {
            direct += levelset_integrate(2, [&](const Coords& x) { return sp(x); }, UnitIntegrand{}, e, {}).measure;
        }
        EXPECT_NEAR(counting_interp(s, e, {}).measure, direct, 3e-6);
    }
}

TEST(InterpFermi, CaseOne)
{
    const auto s = splines_of(cosine_band_model(), 128, 2);
    EXPECT_NEAR(solve_fermi_interp(s, 0.85).fermi, 1.7275, 5e-3);
}

TEST(InterpFermi, GrapheneIsZero)
{
    for (int L : {8, 16, 32}) {
        EXPECT_NEAR(solve_fermi_interp(splines_of(BandModel::graphene(), L, 1), 1.0).fermi, 0.0, 1e-4) << L;
    }
}

TEST(InterpFermi, ConstantBandStep)
{
    // The counting function jumps from 0 to 1 at the constant; the root is the jump itself.
    const auto s = splines_of(constant_band_model(-0.3), 6, 1);
    EXPECT_NEAR(solve_fermi_interp(s, 0.5).fermi, -0.3, 1e-9);
    EXPECT_THROW(solve_fermi_interp(s, 1.0), InvalidArgument);
    EXPECT_THROW(solve_fermi_interp(s, 0.0), InvalidArgument);
}

TEST(InterpEnergy, ConstantBand)
{
    const auto one = splines_of(constant_band_model(0.7), 6, 1);
    const auto two = splines_of(constant_band_model(0.7), 6, 2);
    for (const auto* p : {&one, &two}) {
        for (const auto* q : {&one, &two}) {
            EXPECT_NEAR(energy_interp(*p, *q, 1.7, {}).integral, 0.7, 1e-6);
        }
    }
}

TEST(InterpEnergy, FullyOccupiedIsSplineAverage)
{
    for (int order : {1, 2}) {
        const auto s = splines_of(BandModel::graphene(), 10, order);
        double mean = 0.0;
        for (const auto& sp : s) {
            for (double c : sp.coeffs()) {
                mean += c;
            }
        }
        mean /= 100.0;
        EXPECT_NEAR(energy_interp(s, s, 10.0, {}).integral, mean, 1e-10);
    }
}

TEST(InterpEnergy, QCurvesNearlyIdentical)
{
    const auto ref = compute_reference("case1");
    const SampledBands b(cosine_band_model(), UniformGrid(2, 64));
    const auto r11 = interp_observables(b, 1, 1, 0.85);
    const auto r12 = interp_observables(b, 1, 2, 0.85);
    EXPECT_LT(std::abs(r11.energy - r12.energy), std::abs(r11.energy - ref.energy));
}

TEST(InterpRates, FermiAndEnergySlopes)
{
    const auto ref = compute_reference("case1");
    std::vector<std::pair<double, double>> fermi[3], energy[3];
    for (int L : {16, 32, 64, 128, 256}) {
        const SampledBands b(cosine_band_model(), UniformGrid(2, L));
        for (int q : {1, 2}) {
            const auto r = interp_observables(b, 1, q, 0.85);
            fermi[q].emplace_back(L, std::abs(r.fermi_level - ref.fermi));
            energy[q].emplace_back(L, std::abs(r.energy - ref.energy));
        }
    }
    for (int q : {1, 2}) {
        const auto f = fit_loglog(fermi[q], 5);
        const auto e = fit_loglog(energy[q], 5);
        ASSERT_TRUE(f.fittable && e.fittable);
        EXPECT_LE(f.slope, -(q + 1) + 0.5) << "q=" << q;
        EXPECT_NEAR(e.slope, -2.0, 0.5) << "q=" << q;
    }
}
