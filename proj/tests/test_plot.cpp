#include <bzlab/plot.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace bzlab;

namespace {
std::vector<StudyRecord> two_series()
{
    std::vector<StudyRecord> recs;
    for (int q : {1, 2}) {
        for (int L : {16, 32, 64}) {
            recs.push_back({"case1", "fermi", "interp", "-", 1, q, L, 0.0, 1.7, 1.0 / std::pow(L, q + 1), 0.0, 0.0});
        }
    }
    return recs;
}

int count(const std::string& text, const std::string& what)
{
    int n = 0;
    for (auto pos = text.find(what); pos != std::string::npos; pos = text.find(what, pos + 1)) {
        ++n;
    }
    return n;
}

std::string render(const std::vector<StudyRecord>& recs, const PlotSpec& spec)
{
    std::ostringstream out;
    write_svg(collect_series(recs, spec), spec, out);
    return out.str();
}
} // namespace

TEST(Plot, OnePolylinePerSeries)
{
    PlotSpec spec;
    spec.title = "fermi <error>";
    const std::string svg = render(two_series(), spec);
    EXPECT_EQ(count(svg, "<polyline"), 2);
    EXPECT_EQ(count(svg, "<circle"), 6);
    EXPECT_NE(svg.find("fermi &lt;error&gt;"), std::string::npos);
    EXPECT_NE(svg.find("q=2"), std::string::npos);
    EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
}

TEST(Plot, DropsNonPositivePointsOnLogAxes)
{
    auto recs = two_series();
    recs[1].abs_error = 0.0;
    recs[4].abs_error = -1.0;
    const auto data = collect_series(recs, PlotSpec{});
    EXPECT_EQ(data.dropped, 2);
    ASSERT_EQ(data.series.size(), 2u);
    EXPECT_EQ(data.series[0].points.size(), 2u);

    PlotSpec linear;
    linear.log_log = false;
    EXPECT_EQ(collect_series(recs, linear).dropped, 0);
}

TEST(Plot, FiltersAndGrouping)
{
    PlotSpec spec;
    spec.filters["q"] = "2";
    const auto data = collect_series(two_series(), spec);
    ASSERT_EQ(data.series.size(), 1u);
    EXPECT_EQ(data.series[0].points.front(), (std::pair<double, double>{16.0, 1.0 / 4096.0}));

    spec.filters.clear();
    spec.group_by = {"case"};
    EXPECT_EQ(collect_series(two_series(), spec).series.size(), 1u);

    spec.group_by = {"colour"};
    EXPECT_THROW(collect_series(two_series(), spec), InvalidArgument);
    spec.group_by = {"q"};
    spec.x_axis = "value";
    EXPECT_THROW(collect_series(two_series(), spec), InvalidArgument);
}

TEST(Plot, EmptyInputIsAnError)
{
    PlotSpec spec;
    std::ostringstream out;
    EXPECT_THROW(write_svg(collect_series({}, spec), spec, out), NumericalError);
    spec.filters["case"] = "graphene";
    EXPECT_THROW(write_svg(collect_series(two_series(), spec), spec, out), NumericalError);
}

TEST(Plot, Deterministic)
{
    const PlotSpec spec;
    EXPECT_EQ(render(two_series(), spec), render(two_series(), spec));
    auto shuffled = two_series();
    std::reverse(shuffled.begin(), shuffled.end());
    EXPECT_EQ(render(shuffled, spec), render(two_series(), spec));
}
