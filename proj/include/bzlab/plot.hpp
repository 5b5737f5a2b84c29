#pragma once

// Minimal deterministic log-log SVG plots of study records.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "error.hpp"
#include "study.hpp"

namespace bzlab {

struct PlotSpec {
    /// L or sigma
    std::string x_axis = "L";
    /// abs_error, self_error or value
    std::string y_column = "abs_error";
    /// Record columns whose values name a series.
    std::vector<std::string> group_by{"observable", "scheme", "p", "q", "sigma"};
    /// Optional column=value filters.
    std::map<std::string, std::string> filters;
    bool log_log = true;
    std::string title;
};

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

struct PlotData {
    std::vector<PlotSeries> series;
    int dropped = 0;
};

inline const std::vector<std::string>& record_columns()
{
    static const std::vector<std::string> cols{"case", "observable", "method", "scheme", "p", "q",
                                               "L", "sigma", "value", "abs_error", "self_error", "wall_ms"};
    return cols;
}

inline std::string record_field(const StudyRecord& r, const std::string& col)
{
    if (col == "case") return r.case_id;
    if (col == "observable") return r.observable;
    if (col == "method") return r.method;
    if (col == "scheme") return r.scheme;
    if (col == "p") return std::to_string(r.p);
    if (col == "q") return std::to_string(r.q);
    if (col == "L") return std::to_string(r.L);
    char buf[32];
    double v = 0.0;
    if (col == "sigma") v = r.sigma;
    else if (col == "value") v = r.value;
    else if (col == "abs_error") v = r.abs_error;
    else if (col == "self_error") v = r.self_error;
    else if (col == "wall_ms") v = r.wall_ms;
    else throw InvalidArgument("unknown column " + col);
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline double record_number(const StudyRecord& r, const std::string& col)
{
    if (col == "L") return r.L;
    if (col == "sigma") return r.sigma;
    if (col == "value") return r.value;
    if (col == "abs_error") return r.abs_error;
    if (col == "self_error") return r.self_error;
    if (col == "wall_ms") return r.wall_ms;
    if (col == "p") return r.p;
    if (col == "q") return r.q;
    throw InvalidArgument("column " + col + " is not numeric");
}

/// Groups and filters records into series; non-positive values are dropped on log axes.
inline PlotData collect_series(const std::vector<StudyRecord>& recs, const PlotSpec& spec)
{
    const auto& cols = record_columns();
    auto check = [&](const std::string& c) {
        if (std::find(cols.begin(), cols.end(), c) == cols.end()) {
            throw InvalidArgument("unknown column " + c);
        }
    };
    if (spec.x_axis != "L" && spec.x_axis != "sigma") {
        throw InvalidArgument("x axis must be L or sigma");
    }
    check(spec.y_column);
    for (const auto& g : spec.group_by) {
        check(g);
    }
    for (const auto& [k, v] : spec.filters) {
        check(k);
    }
    std::map<std::string, PlotSeries> groups;
    PlotData out;
    for (const auto& r : recs) {
        bool keep = true;
        for (const auto& [k, v] : spec.filters) {
            keep = keep && record_field(r, k) == v;
        }
        if (!keep) {
            continue;
        }
        std::string label;
        for (const auto& g : spec.group_by) {
            label += (label.empty() ? "" : " ") + g + "=" + record_field(r, g);
        }
        const double x = record_number(r, spec.x_axis);
        const double y = record_number(r, spec.y_column);
        if (spec.log_log && !(x > 0.0 && y > 0.0)) {
            ++out.dropped;
            continue;
        }
        auto& s = groups[label];
        s.label = label;
        s.points.emplace_back(x, y);
    }
    for (auto& [label, s] : groups) {
        std::sort(s.points.begin(), s.points.end());
        out.series.push_back(std::move(s));
    }
    return out;
}

namespace detail {
inline std::string svg_num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}
} // namespace detail

/// Writes the plot; throws NumericalError when there is nothing to draw.
inline void write_svg(const PlotData& data, const PlotSpec& spec, std::ostream& out)
{
    if (data.series.empty()) {
        throw NumericalError("no data points to plot");
    }
    auto tx = [&](double v) { return spec.log_log ? std::log10(v) : v; };
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : data.series) {
        for (const auto& [x, y] : s.points) {
            x0 = std::min(x0, tx(x));
            x1 = std::max(x1, tx(x));
            y0 = std::min(y0, tx(y));
            y1 = std::max(y1, tx(y));
        }
    }
    if (spec.log_log) {
        x0 = std::floor(x0);
        x1 = std::max(std::ceil(x1), x0 + 1.0);
        y0 = std::floor(y0);
        y1 = std::max(std::ceil(y1), y0 + 1.0);
    } else {
        if (x1 <= x0) x1 = x0 + 1.0;
        if (y1 <= y0) y1 = y0 + 1.0;
    }
    const double W = 640, H = 480, ml = 80, mr = 220, mt = 40, mb = 60;
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return mt + ph - (tx(v) - y0) / (y1 - y0) * ph; };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    if (!spec.title.empty()) {
        out << "<text x=\"" << ml + pw / 2 << "\" y=\"24\" text-anchor=\"middle\">" << detail::xml_escape(spec.title)
            << "</text>\n";
    }
    // Decade ticks on log axes; five even ticks otherwise.
    auto ticks = [&](double a, double b) {
        std::vector<double> t;
        if (spec.log_log) {
            for (double e = a; e <= b + 1e-9; e += 1.0) t.push_back(e);
        } else {
            for (int i = 0; i <= 4; ++i) t.push_back(a + (b - a) * i / 4.0);
        }
        return t;
    };
    auto label = [&](double e) {
        char buf[32];
        if (spec.log_log) std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(e)));
        else std::snprintf(buf, sizeof buf, "%.3g", e);
        return std::string(buf);
    };
    for (double e : ticks(x0, x1)) {
        const double X = ml + (e - x0) / (x1 - x0) * pw;
        out << "<line x1=\"" << detail::svg_num(X) << "\" y1=\"" << mt + ph << "\" x2=\"" << detail::svg_num(X)
            << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << detail::svg_num(X) << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">"
            << label(e) << "</text>\n";
    }
    for (double e : ticks(y0, y1)) {
        const double Y = mt + ph - (e - y0) / (y1 - y0) * ph;
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << detail::svg_num(Y) << "\" x2=\"" << ml << "\" y2=\""
            << detail::svg_num(Y) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << detail::svg_num(Y + 4) << "\" text-anchor=\"end\">"
            << label(e) << "</text>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
        << detail::xml_escape(spec.x_axis) << "</text>\n";
    out << "<text x=\"20\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << mt + ph / 2 << ")\">" << detail::xml_escape(spec.y_column) << "</text>\n";

    for (std::size_t i = 0; i < data.series.size(); ++i) {
        const auto& s = data.series[i];
        const char* c = colors[i % 10];
        out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t j = 0; j < s.points.size(); ++j) {
            out << (j ? " " : "") << detail::svg_num(px(s.points[j].first)) << ','
                << detail::svg_num(py(s.points[j].second));
        }
        out << "\"/>\n";
        for (const auto& [x, y] : s.points) {
            out << "<circle cx=\"" << detail::svg_num(px(x)) << "\" cy=\"" << detail::svg_num(py(y))
                << "\" r=\"2.5\" fill=\"" << c << "\"/>\n";
        }
        const double ly = mt + 10 + 18.0 * i;
        out << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 30 << "\" y2=\"" << ly
            << "\" stroke=\"" << c << "\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << ml + pw + 35 << "\" y=\"" << ly + 4 << "\" font-size=\"10\">"
            << detail::xml_escape(s.label) << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace bzlab
