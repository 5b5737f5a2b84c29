#include <bzlab/bands.hpp>
#include <bzlab/quadrature.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace bzlab;

namespace {
constexpr double pi = std::numbers::pi;

BandModel cosine_potential_1d(double v, double radius)
{
    return BandModel::planewave(build_planewave_model({{{1, 0, 0}, v}, {{-1, 0, 0}, v}}, radius, 1));
}
} // namespace

TEST(Bands, CaseOneAtGamma) { EXPECT_DOUBLE_EQ(cosine_band_model().eval({0.0, 0.0})[0], 3.0); }

TEST(Bands, GrapheneAtGamma)
{
    const auto e = BandModel::graphene().eval({0.0, 0.0});
    ASSERT_EQ(e.size(), 2u);
    EXPECT_NEAR(e[0], -3.0, 1e-14);
    EXPECT_NEAR(e[1], 3.0, 1e-14);
}

TEST(Bands, GrapheneDiracPoint)
{
    const auto e = BandModel::graphene().eval({1.0 / 3.0, -1.0 / 3.0});
    EXPECT_NEAR(e[0], 0.0, 1e-14);
    EXPECT_NEAR(e[1], 0.0, 1e-14);
}

TEST(Bands, FreeElectronsAtGamma)
{
    const auto m = BandModel::planewave(build_planewave_model({}, 2.0, 2));
    const auto e = m.eval({0.0, 0.0});
    EXPECT_NEAR(e[0], 0.0, 1e-12);
    const double shortest = 0.5 * 4.0 * pi * pi;
    for (int n = 1; n <= 4; ++n) {
        EXPECT_NEAR(e[n], shortest, 1e-10);
    }
    EXPECT_GT(e[5], shortest + 1.0);
}

TEST(Bands, BasisCounting)
{
    EXPECT_EQ(BandModel::planewave(build_planewave_model({}, 3.0, 1)).band_count(), 7);
    EXPECT_EQ(BandModel::planewave(build_planewave_model({}, 1.0, 2)).band_count(), 5);
    EXPECT_EQ(BandModel::planewave(build_planewave_model({}, 1.0, 3)).band_count(), 7);
}

TEST(Bands, DimensionMismatchThrows)
{
    EXPECT_THROW(cosine_band_model().eval({0.1}), InvalidArgument);
    EXPECT_THROW(BandModel::graphene().eval({0.1, 0.2, 0.3}), InvalidArgument);
}

TEST(Bands, InconsistentHermitianPairThrows)
{
    EXPECT_THROW(build_planewave_model({{{1, 0, 0}, Complex(0.3, 0.1)}, {{-1, 0, 0}, Complex(0.3, 0.1)}}, 2.0, 1),
                 InvalidArgument);
    // One half given: the other is mirrored.
    const auto pw = build_planewave_model({{{1, 0, 0}, Complex(0.3, 0.1)}}, 2.0, 1);
    EXPECT_EQ(pw.potential().at({-1, 0, 0}), Complex(0.3, -0.1));
}

TEST(Bands, HamiltonianIsHermitian)
{
    const auto pw = build_planewave_model({{{1, 0, 0}, Complex(0.3, 0.2)}, {{1, 1, 0}, Complex(-0.1, 0.05)}}, 3.0, 2);
    const auto h = pw.hamiltonian({0.17, -0.31});
    EXPECT_LE((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-13 * h.cwiseAbs().maxCoeff());
}

TEST(Bands, PeriodicityOfAnalyticModels)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::uniform_int_distribution<int> s(-5, 5);
    const auto c1 = cosine_band_model();
    const auto gr = BandModel::graphene();
    for (int i = 0; i < 1000; ++i) {
        const double k1 = u(rng);
        const double k2 = u(rng);
        const int n1 = s(rng);
        const int n2 = s(rng);
        // Evaluate the closed forms at unwrapped coordinates.
        const double raw = 3.0 * std::cos(2 * pi * (k1 + n1)) * std::cos(2 * pi * (k2 + n2)) +
                           std::sin(4 * pi * (k1 + n1)) * std::cos(4 * pi * (k2 + n2));
        EXPECT_NEAR(c1.eval({k1, k2})[0], raw, 1e-12);
        const FracKPoint k{k1, k2};
        const int shift[] = {n1, n2};
        EXPECT_NEAR(std::abs(GrapheneTB::offdiagonal(k)), std::abs(GrapheneTB::offdiagonal(k.shifted(shift))), 1e-12);
        // Unwrapped graphene phases: |h| is periodic even though h is not.
        std::complex<double> h = 0.0;
        const double a = k1 + n1;
        const double b = k2 + n2;
        for (double c : {(a + b) / 3.0, (a - 2 * b) / 3.0, (-2 * a + b) / 3.0}) {
            h += std::polar(1.0, 2 * pi * c);
        }
        EXPECT_NEAR(gr.eval(k)[1], std::abs(h), 1e-12);
    }
}

TEST(Bands, SortedAndParticleHoleSymmetric)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    const auto gr = BandModel::graphene();
    const auto pw = BandModel::planewave(build_planewave_model({{{1, 0, 0}, 0.4}, {{0, 1, 0}, -0.2}}, 2.5, 2));
    for (int i = 0; i < 200; ++i) {
        const FracKPoint k{u(rng), u(rng)};
        const auto g = gr.eval(k);
        EXPECT_NEAR(g[1], -g[0], 1e-12);
        const auto e = pw.eval(k);
        EXPECT_TRUE(std::is_sorted(e.begin(), e.end()));
    }
}

TEST(Bands, CaseOneRangeOnFineGrid)
{
    const auto m = cosine_band_model();
    const UniformGrid grid(2, 512);
    double lo = 1e9;
    double hi = -1e9;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double e = m.eval(grid.point(i))[0];
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    EXPECT_GE(lo, -4.0);
    EXPECT_LE(hi, 4.0);
}

TEST(Bands, EigenvaluesWithinPotentialBoundOfFreeOnes)
{
    const auto pw = build_planewave_model({{{1, 0, 0}, 0.4}, {{0, 1, 0}, Complex(0.1, 0.2)}}, 3.0, 2);
    const auto model = BandModel::planewave(pw);
    const auto free = BandModel::planewave(build_planewave_model({}, 3.0, 2));
    const double bound = pw.potential_bound();
    for (const FracKPoint k : {FracKPoint{0.0, 0.0}, FracKPoint{0.3, -0.1}, FracKPoint{-0.5, 0.25}}) {
        const auto e = model.eval(k);
        const auto e0 = free.eval(k);
        for (std::size_t n = 0; n < e.size(); ++n) {
            EXPECT_LE(std::abs(e[n] - e0[n]), bound + 1e-10);
        }
    }
}

TEST(Bands, StatesOrthonormalAndEigen)
{
    const auto pw = build_planewave_model({{{1, 0, 0}, 0.4}, {{1, -1, 0}, Complex(0.1, 0.2)}}, 2.5, 2);
    const auto model = BandModel::planewave(pw);
    const FracKPoint k{0.21, -0.37};
    const auto st = eval_states(model, k);
    const auto h = pw.hamiltonian(k);
    const int n = pw.basis_size();
    const Eigen::MatrixXcd gram = st.states.adjoint() * st.states;
    EXPECT_LE((gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
    const double scale = st.energies.cwiseAbs().maxCoeff();
    for (int i = 0; i < n; ++i) {
        const double res = (h * st.states.col(i) - st.energies[i] * st.states.col(i)).norm();
        EXPECT_LE(res, 1e-10 * scale);
        EXPECT_NEAR(st.states.col(i).norm(), 1.0, 1e-12);
    }
    EXPECT_TRUE(std::is_sorted(st.energies.begin(), st.energies.end()));
}

TEST(Bands, FreeGroundStateIsConstantWave)
{
    const auto pw = build_planewave_model({}, 2.0, 1);
    const auto st = eval_states(BandModel::planewave(pw), {0.0});
    int zero = -1;
    for (int i = 0; i < pw.basis_size(); ++i) {
        if (pw.basis()[i][0] == 0) {
            zero = i;
        }
    }
    ASSERT_GE(zero, 0);
    EXPECT_NEAR(std::abs(st.states(zero, 0)), 1.0, 1e-12);
}

TEST(Bands, StatesNeedPlaneWaveModel)
{
    EXPECT_THROW(eval_states(cosine_band_model(), {0.0, 0.0}), UnsupportedOperation);
}

TEST(Bands, DegenerateGapOpensAsTwiceCoupling)
{
    // At k = 1/2 the waves K = 0 and K = -1 are degenerate; V couples them with strength v.
    for (double v : {1e-3, 1e-2}) {
        const auto e = cosine_potential_1d(v, 4.0).eval({0.5});
        EXPECT_NEAR(e[1] - e[0], 2.0 * v, 10.0 * v * v);
        EXPECT_NEAR(0.5 * (e[0] + e[1]), 0.5 * pi * pi, 10.0 * v * v);
    }
}

TEST(Bands, LoadsPotentialFile)
{
    const auto path = std::filesystem::temp_directory_path() / "bzlab_potential_test.txt";
    {
        std::ofstream out(path);
        out << "# 1D cosine potential\n1 0.3 0\n-1 0.3 0\n\n";
    }
    const auto pw = load_planewave_model(path.string(), 8.0, 1);
    EXPECT_EQ(pw.basis_size(), 17);
    EXPECT_EQ(pw.potential().at({1, 0, 0}), Complex(0.3, 0.0));
    {
        std::ofstream out(path);
        out << "1 0.3\n";
    }
    try {
        load_planewave_model(path.string(), 8.0, 1);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 1);
    }
    std::filesystem::remove(path);
    EXPECT_THROW(load_planewave_model(path.string(), 8.0, 1), IoError);
}
