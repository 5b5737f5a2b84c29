#include <bzlab/reference.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {
const std::string data = BZLAB_DATA;

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
  protected:
    fs::path dir;

    void SetUp() override
    {
        dir = fs::temp_directory_path() /
              ("bzlab_cli_" + std::to_string(::getpid()) + "_" +
               ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    // Runs the CLI inside the scratch directory with BZLAB_REFS pointing into it.
    Outcome run(const std::string& args, const std::string& refs = "refs.csv") const
    {
        const std::string cmd = "cd '" + dir.string() + "' && BZLAB_REFS='" + refs + "' '" + BZLAB_CLI + "' " + args +
                                " > stdout.txt 2> stderr.txt";
        const int status = std::system(cmd.c_str());
        Outcome r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(dir / "stdout.txt");
        r.err = slurp(dir / "stderr.txt");
        return r;
    }

    double field(const std::string& text, const std::string& key) const
    {
        const auto pos = text.find(key + "=");
        EXPECT_NE(pos, std::string::npos) << text;
        return pos == std::string::npos ? NAN : std::stod(text.substr(pos + key.size() + 1));
    }
};
} // namespace

TEST_F(Cli, ComputeGrapheneSmearingIsExactlyZero)
{
    const auto r = run("compute --case graphene --method smear --scheme fd --sigma 0.1 --L 64 --N 1");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(field(r.out, "fermi"), 0.0, 1e-12);
    EXPECT_NE(r.out.find("entropy="), std::string::npos);
    EXPECT_NE(r.out.find("extrapolated="), std::string::npos);
}

TEST_F(Cli, ComputeInterpolation)
{
    const auto r = run("compute --case case1 --method interp --p 1 --q 1 --L 128 --N 0.85 --csv rows.csv");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(field(r.out, "fermi"), 1.7275, 5e-3);
    EXPECT_EQ(r.out.find("entropy="), std::string::npos);
    ASSERT_EQ(run("compute --case case1 --method smear --L 16 --csv rows.csv").code, 0);
    const std::string csv = slurp(dir / "rows.csv");
    EXPECT_EQ(csv.find("case,method,scheme,p,q,L,sigma,N,fermi,energy,entropy,extrapolated\ncase1,interp,-,1,1,128,"), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST_F(Cli, ComputeValidation)
{
    EXPECT_EQ(run("compute --case case1 --method smear --scheme gauss --sigma -0.1 --L 16").code, 2);
    EXPECT_EQ(run("compute --case case7").code, 2);
    EXPECT_EQ(run("compute --case case1 --scheme mp9").code, 2);
    EXPECT_EQ(run("compute --case case1 --method tetra").code, 2);
    EXPECT_EQ(run("compute --case case1 --method interp --q 3").code, 2);
    EXPECT_EQ(run("compute --case case1 --N 1.5").code, 2);
    EXPECT_EQ(run("compute --case case1 --L 0").code, 2);
    EXPECT_EQ(run("compute").code, 2);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("--threads 0 compute --case case1").code, 2);
}

TEST_F(Cli, ComputePlaneWaveAndDensity)
{
    const auto r = run("compute --potential '" + data + "/cosine_1d.txt' --radius 8 --dim 1 --N 1 --scheme fd --sigma 0.05 "
                       "--L 32 --density rho.csv --density-shape 18");
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(dir / "rho.csv");
    std::string line;
    int rows = 0;
    std::getline(in, line);
    while (std::getline(in, line)) {
        rows += !line.empty();
    }
    EXPECT_EQ(rows, 18);
    EXPECT_EQ(run("compute --potential '" + data + "/cosine_1d.txt' --radius 8 --dim 1 --N 1 --density r.csv --density-shape 16").code, 2);
    EXPECT_EQ(run("compute --potential missing.txt --radius 8 --dim 1 --N 1").code, 4);
    EXPECT_EQ(run("compute --potential '" + data + "/bad_potential.txt' --radius 8 --dim 1 --N 1").code, 2);
    EXPECT_EQ(run("compute --potential '" + data + "/cosine_1d.txt' --dim 1 --N 1").code, 2);
}

TEST_F(Cli, SweepNeedsReferences)
{
    const auto r = run("sweep '" + data + "/interp_case1.cfg' --out s.csv");
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("refs.csv"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("make-refs"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "s.csv"));
}

TEST_F(Cli, SweepConfigErrors)
{
    const auto r = run("sweep '" + data + "/bad_key.cfg'");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("bad_key.cfg:3: "), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("colour"), std::string::npos);
    EXPECT_EQ(run("sweep nowhere.cfg").code, 4);
}

TEST_F(Cli, MakeRefsIsIdempotent)
{
    ASSERT_EQ(run("make-refs --cases case1,case2,graphene --tol 1e-7").code, 0);
    const std::string first = slurp(dir / "refs.csv");
    const auto refs = bzlab::read_refs((dir / "refs.csv").string());
    ASSERT_EQ(refs.size(), 3u);
    const auto g = bzlab::find_reference(refs, "graphene", 1.0);
    ASSERT_TRUE(g.has_value());
    EXPECT_NEAR(g->fermi, 0.0, 1e-7);
    ASSERT_EQ(run("make-refs --cases case1,case2,graphene --tol 1e-7").code, 0);
    EXPECT_EQ(slurp(dir / "refs.csv"), first);
    EXPECT_EQ(run("make-refs --cases case9").code, 2);
    EXPECT_EQ(run("make-refs --cases case1 --tol 1e-12").code, 2);
    EXPECT_EQ(run("make-refs --cases case1 --refs /nonexistent/dir/refs.csv").code, 4);
}

TEST_F(Cli, InterpSweepSummaryAndDeterminism)
{
    ASSERT_EQ(run("make-refs --cases case1", "r.csv").code, 0);
    const auto a = run("--threads 1 sweep '" + data + "/interp_case1.cfg' --out a.csv", "r.csv");
    ASSERT_EQ(a.code, 0) << a.err;
    const auto pos = a.out.find("fermi q=1 slope=");
    ASSERT_NE(pos, std::string::npos) << a.out;
    const double slope = std::stod(a.out.substr(pos + 16));
    EXPECT_NEAR(slope, -2.0, 0.3);
    EXPECT_NE(a.out.find("energy p=1 q=2 slope="), std::string::npos);

    ASSERT_EQ(run("--threads 8 sweep '" + data + "/interp_case1.cfg' --out b.csv", "r.csv").code, 0);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));

    ASSERT_EQ(run("--threads 1 plot a.csv --out a.svg").code, 0);
    ASSERT_EQ(run("--threads 8 plot a.csv --out b.svg").code, 0);
    EXPECT_EQ(slurp(dir / "a.svg"), slurp(dir / "b.svg"));
}

TEST_F(Cli, SmearSweepWithMakeRefs)
{
    const auto r = run("sweep '" + data + "/smear_case1.cfg' --make-refs --out s.csv", "fresh.csv");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "fresh.csv"));
    EXPECT_NE(r.out.find("scheme observable sigma L_max abs_error self_slope"), std::string::npos);
    EXPECT_NE(r.out.find("gauss energy sigma_slope="), std::string::npos);
    const std::string csv = slurp(dir / "s.csv");
    EXPECT_EQ(csv.find("case,observable,method,scheme,p,q,L,sigma,value,abs_error,self_error,wall_ms\n"), 0u);
    // 2 schemes x 2 sigmas x 3 L x 3 observables
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 36);
}

TEST_F(Cli, Plot)
{
    {
        std::ofstream out(dir / "r.csv");
        out << "case,observable,method,scheme,p,q,L,sigma,value,abs_error,self_error,wall_ms\n";
        for (int q : {1, 2}) {
            for (int L : {8, 16, 32, 64, 128}) {
                out << "case1,fermi,interp,-,1," << q << ',' << L << ",0,1.7," << (L == 8 && q == 2 ? 0.0 : 1.0 / L) << ",0,0\n";
            }
        }
    }
    const auto r = run("plot r.csv --out r.svg --title demo");
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string svg = slurp(dir / "r.svg");
    int polylines = 0;
    for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) {
        ++polylines;
    }
    EXPECT_EQ(polylines, 2);
    EXPECT_EQ(svg.find("nan"), std::string::npos);
    EXPECT_EQ(svg.find("inf"), std::string::npos);
    EXPECT_NE(r.err.find("dropped 1"), std::string::npos) << r.err;

    EXPECT_EQ(run("plot r.csv --out e.svg --filter q=7").code, 3);
    EXPECT_EQ(run("plot r.csv --out e.svg --filter q").code, 2);
    EXPECT_EQ(run("plot r.csv --out e.svg --y colour").code, 2);
    EXPECT_EQ(run("plot missing.csv --out e.svg").code, 4);
    EXPECT_EQ(run("plot r.csv --out /nonexistent/dir/e.svg").code, 4);
}

TEST_F(Cli, ValidateSchemes)
{
    const auto r = run("validate-schemes");
    // cold smearing as defined has vanishing first and second moments only, so its declared
    // order 3 cannot be confirmed and the command reports the mismatch
    EXPECT_EQ(r.code, 3);
    std::istringstream rows(r.out);
    std::string line;
    int ok = 0;
    while (std::getline(rows, line)) {
        const std::string name = line.substr(0, line.find(' '));
        if (name == "cold") {
            EXPECT_NE(line.find("MISMATCH"), std::string::npos) << line;
        } else if (name != "scheme") {
            EXPECT_NE(line.find(" ok"), std::string::npos) << line;
            ++ok;
        }
    }
    EXPECT_EQ(ok, 6);
}
