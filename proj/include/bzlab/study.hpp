#pragma once

// Convergence sweeps over (L, sigma, p, q, scheme), errors against references, log-log slope
// fits and the records CSV.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cases.hpp"
#include "interp.hpp"
#include "reference.hpp"
#include "sampling.hpp"
#include "smeared.hpp"

namespace bzlab {

struct StudyConfig {
    std::string case_id;
    std::optional<double> electrons;
    /// fermi, energy, energy_extrapolated or all
    std::string observable = "all";
    /// interp or smear
    std::string method = "interp";
    std::vector<int> p_list{1};
    std::vector<int> q_list{1};
    std::vector<std::string> schemes{"gauss"};
    std::optional<double> cold_a;
    std::vector<double> sigma_list;
    std::vector<int> L_list{8, 16, 32, 64, 128, 256, 512};
    int slope_window = 4;
    std::optional<double> ref_tol;
    double quad_tol = 1e-6;
    std::string output;

    double n_electrons() const { return electrons.value_or(make_case(case_id).electrons); }

    void validate() const
    {
        make_case(case_id);
        if (method != "interp" && method != "smear") {
            throw InvalidArgument("method must be interp or smear");
        }
        if (observable != "all" && observable != "fermi" && observable != "energy" &&
            observable != "energy_extrapolated") {
            throw InvalidArgument("observable must be fermi, energy, energy_extrapolated or all");
        }
        if (method == "interp" && observable == "energy_extrapolated") {
            throw InvalidArgument("energy_extrapolated needs the smear method");
        }
        if (L_list.empty()) {
            throw InvalidArgument("L_list must not be empty");
        }
        for (std::size_t i = 0; i < L_list.size(); ++i) {
            if (L_list[i] < 1 || (i > 0 && L_list[i] <= L_list[i - 1])) {
                throw InvalidArgument("L_list must be strictly increasing positive integers");
            }
        }
        for (std::size_t i = 0; i < sigma_list.size(); ++i) {
            if (!(sigma_list[i] > 0.0) || (i > 0 && sigma_list[i] >= sigma_list[i - 1])) {
                throw InvalidArgument("sigma_list must be strictly decreasing positive values");
            }
        }
        if (method == "smear") {
            if (sigma_list.empty()) {
                throw InvalidArgument("smear method needs sigma_list");
            }
            for (const auto& s : schemes) {
                SmearingScheme::parse(s, cold_a);
            }
        } else {
            for (int o : p_list) {
                if (o != 1 && o != 2) {
                    throw InvalidArgument("p_list entries must be 1 or 2");
                }
            }
            for (int o : q_list) {
                if (o != 1 && o != 2) {
                    throw InvalidArgument("q_list entries must be 1 or 2");
                }
            }
        }
        if (slope_window < 3) {
            throw InvalidArgument("slope_window must be at least 3");
        }
        if (!(quad_tol > 0.0)) {
            throw InvalidArgument("quad_tol must be positive");
        }
    }
};

namespace detail {
inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

inline double parse_number(const std::string& s, const std::string& key, int line)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError("invalid number '" + s + "' for key " + key, line);
    }
}

inline int parse_int(const std::string& s, const std::string& key, int line)
{
    const double v = parse_number(s, key, line);
    if (v != std::floor(v) || std::abs(v) > 1e9) {
        throw ParseError("expected an integer for key " + key, line);
    }
    return static_cast<int>(v);
}
} // namespace detail

/// `key = value` lines, `#` comments; lists are comma separated.
inline StudyConfig parse_config(std::istream& in)
{
    StudyConfig cfg;
    std::string raw;
    int line = 0;
    std::set<std::string> seen;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ParseError("expected key = value", line);
        }
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string value = detail::trim(text.substr(eq + 1));
        if (!seen.insert(key).second) {
            throw ParseError("duplicate key " + key, line);
        }
        auto ints = [&] {
            std::vector<int> v;
            for (const auto& s : detail::split_list(value)) {
                v.push_back(detail::parse_int(s, key, line));
            }
            return v;
        };
        if (key == "case_id") {
            cfg.case_id = value;
        } else if (key == "N") {
            cfg.electrons = detail::parse_number(value, key, line);
        } else if (key == "observable") {
            cfg.observable = value;
        } else if (key == "method") {
            cfg.method = value;
        } else if (key == "p") {
            cfg.p_list = ints();
        } else if (key == "q") {
            cfg.q_list = ints();
        } else if (key == "scheme") {
            cfg.schemes = detail::split_list(value);
        } else if (key == "cold_a") {
            cfg.cold_a = detail::parse_number(value, key, line);
        } else if (key == "sigma_list") {
            cfg.sigma_list.clear();
            for (const auto& s : detail::split_list(value)) {
                cfg.sigma_list.push_back(detail::parse_number(s, key, line));
            }
        } else if (key == "L_list") {
            cfg.L_list = ints();
        } else if (key == "slope_window") {
            cfg.slope_window = detail::parse_int(value, key, line);
        } else if (key == "ref_tol") {
            cfg.ref_tol = detail::parse_number(value, key, line);
        } else if (key == "quad_tol") {
            cfg.quad_tol = detail::parse_number(value, key, line);
        } else if (key == "output") {
            cfg.output = value;
        } else {
            throw ParseError("unknown key " + key, line);
        }
    }
    if (cfg.case_id.empty()) {
        throw ParseError("missing required key case_id", line);
    }
    try {
        cfg.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), line);
    }
    return cfg;
}

inline StudyConfig read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path);
    }
    try {
        return parse_config(in);
    } catch (const ParseError& e) {
        throw ParseError(e.detail(), e.line(), path);
    }
}

struct StudyRecord {
    std::string case_id;
    std::string observable;
    std::string method;
    std::string scheme;
    int p = 0;
    int q = 0;
    int L = 0;
    double sigma = 0.0;
    double value = 0.0;
    double abs_error = 0.0;
    double self_error = 0.0;
    double wall_ms = 0.0;

    /// Everything except L: one convergence curve.
    auto series_key() const { return std::tuple(case_id, observable, method, scheme, p, q, -sigma); }
    auto axis_key() const { return std::tuple(case_id, observable, method, scheme, p, q, -sigma, L); }
    bool operator==(const StudyRecord&) const = default;
};

struct SweepOptions {
    /// Record wall_ms; off by default so that repeated sweeps give identical files.
    bool timing = false;
};

namespace detail {
inline bool wants(const StudyConfig& cfg, const std::string& observable)
{
    return cfg.observable == "all" || cfg.observable == observable;
}

/// Sorts by axis tuple, fills self_error against the largest-L value of each series.
inline void finish_records(std::vector<StudyRecord>& recs)
{
    std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.axis_key() < b.axis_key(); });
    for (std::size_t i = 0; i < recs.size();) {
        std::size_t j = i;
        while (j < recs.size() && recs[j].series_key() == recs[i].series_key()) {
            ++j;
        }
        const double proxy = recs[j - 1].value;
        for (std::size_t k = i; k < j; ++k) {
            recs[k].self_error = std::abs(recs[k].value - proxy);
        }
        i = j;
    }
}

class Stopwatch {
  public:
    double ms() const
    {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};
} // namespace detail

inline std::vector<StudyRecord> run_interp_sweep(const StudyConfig& cfg, const ReferenceValues& ref,
                                                 const SweepOptions& opt = {})
{
    cfg.validate();
    if (cfg.method != "interp") {
        throw InvalidArgument("config method is not interp");
    }
    const TestCase tc = make_case(cfg.case_id);
    const double n_el = cfg.n_electrons();
    LevelSetQuadConfig qcfg;
    qcfg.abs_tol = cfg.quad_tol;
    std::vector<StudyRecord> recs;
    for (int L : cfg.L_list) {
        const SampledBands bands(tc.model, UniformGrid(tc.model.dim(), L));
        const int nb = relevant_band_count(bands, n_el);
        std::map<int, std::vector<TorusSpline>> splines;
        for (int o : cfg.q_list) {
            splines.try_emplace(o, fit_band_splines(bands, o, nb));
        }
        for (int o : cfg.p_list) {
            splines.try_emplace(o, fit_band_splines(bands, o, nb));
        }
        for (int q : cfg.q_list) {
            const detail::Stopwatch fermi_clock;
            const InterpFermi fermi = solve_fermi_interp(SplineLevelSet(splines.at(q), nullptr, qcfg), n_el);
            const double fermi_ms = fermi_clock.ms();
            for (int p : cfg.p_list) {
                StudyRecord base{tc.id, "", "interp", "-", p, q, L, 0.0, 0.0, 0.0, 0.0, 0.0};
                if (detail::wants(cfg, "fermi")) {
                    StudyRecord r = base;
                    r.observable = "fermi";
                    r.value = fermi.fermi;
                    r.abs_error = std::abs(r.value - ref.fermi);
                    r.wall_ms = opt.timing ? fermi_ms : 0.0;
                    recs.push_back(r);
                }
                if (detail::wants(cfg, "energy")) {
                    const detail::Stopwatch clock;
                    StudyRecord r = base;
                    r.observable = "energy";
                    r.value = energy_interp(splines.at(p), splines.at(q), fermi.fermi, qcfg).integral;
                    r.abs_error = std::abs(r.value - ref.energy);
                    r.wall_ms = opt.timing ? fermi_ms + clock.ms() : 0.0;
                    recs.push_back(r);
                }
            }
        }
    }
    detail::finish_records(recs);
    return recs;
}

inline std::vector<StudyRecord> run_smearing_sweep(const StudyConfig& cfg, const ReferenceValues& ref,
                                                   const SweepOptions& opt = {})
{
    cfg.validate();
    if (cfg.method != "smear") {
        throw InvalidArgument("config method is not smear");
    }
    const TestCase tc = make_case(cfg.case_id);
    const double n_el = cfg.n_electrons();
    std::vector<StudyRecord> recs;
    for (int L : cfg.L_list) {
        const SampledBands bands(tc.model, UniformGrid(tc.model.dim(), L));
        for (const auto& name : cfg.schemes) {
            const SmearingScheme scheme = SmearingScheme::parse(name, cfg.cold_a);
            for (double sigma : cfg.sigma_list) {
                const detail::Stopwatch clock;
                const SmearedResult res = smeared_observables(bands, scheme, sigma, n_el);
                const double ms = opt.timing ? clock.ms() : 0.0;
                const StudyRecord base{tc.id, "", "smear", scheme.name(), scheme.declared_order(), 0, L, sigma,
                                       0.0,   0.0, 0.0,     ms};
                const std::pair<const char*, std::pair<double, double>> rows[] = {
                    {"fermi", {res.fermi_level, ref.fermi}},
                    {"energy", {res.energy, ref.energy}},
                    {"energy_extrapolated", {res.extrapolated_energy, ref.energy}},
                };
                for (const auto& [obs, vals] : rows) {
                    if (detail::wants(cfg, obs)) {
                        StudyRecord r = base;
                        r.observable = obs;
                        r.value = vals.first;
                        r.abs_error = std::abs(vals.first - vals.second);
                        recs.push_back(r);
                    }
                }
            }
        }
    }
    detail::finish_records(recs);

    // The converged-tail proxy must sit at least 4x beyond the previous grid; when the list
    // does not end that way, one extra grid at 4 L_max supplies it.
    const std::size_t n = cfg.L_list.size();
    if (n >= 2 && cfg.L_list[n - 1] < 4 * cfg.L_list[n - 2]) {
        const int proxy_L = 4 * cfg.L_list.back();
        const SampledBands bands(tc.model, UniformGrid(tc.model.dim(), proxy_L));
        std::map<std::tuple<std::string, double, std::string>, double> proxy;
        for (const auto& name : cfg.schemes) {
            const SmearingScheme scheme = SmearingScheme::parse(name, cfg.cold_a);
            for (double sigma : cfg.sigma_list) {
                const SmearedResult res = smeared_observables(bands, scheme, sigma, n_el);
                proxy[{scheme.name(), sigma, "fermi"}] = res.fermi_level;
                proxy[{scheme.name(), sigma, "energy"}] = res.energy;
                proxy[{scheme.name(), sigma, "energy_extrapolated"}] = res.extrapolated_energy;
            }
        }
        for (auto& r : recs) {
            r.self_error = std::abs(r.value - proxy.at({r.scheme, r.sigma, r.observable}));
        }
    }
    return recs;
}

inline std::vector<StudyRecord> run_sweep(const StudyConfig& cfg, const ReferenceValues& ref,
                                          const SweepOptions& opt = {})
{
    return cfg.method == "interp" ? run_interp_sweep(cfg, ref, opt) : run_smearing_sweep(cfg, ref, opt);
}

// ---------------------------------------------------------------------------------------------
// Slopes

struct SlopeFit {
    bool fittable = false;
    double slope = 0.0;
    double intercept = 0.0;
    int points = 0;
};

/// Least-squares slope of log(y) against log(x) over the last `window` points (after sorting by
/// x); y values below 1e-12 are dropped first.
inline SlopeFit fit_loglog(std::vector<std::pair<double, double>> xy, int window = 4)
{
    std::sort(xy.begin(), xy.end());
    std::vector<std::pair<double, double>> pts;
    const std::size_t start = xy.size() > static_cast<std::size_t>(window) ? xy.size() - window : 0;
    for (std::size_t i = start; i < xy.size(); ++i) {
        if (xy[i].first > 0.0 && xy[i].second >= 1e-12 && std::isfinite(xy[i].second)) {
            pts.emplace_back(std::log(xy[i].first), std::log(xy[i].second));
        }
    }
    SlopeFit fit;
    fit.points = static_cast<int>(pts.size());
    if (pts.size() < 3) {
        return fit;
    }
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= pts.size();
    my /= pts.size();
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx <= 0.0) {
        return fit;
    }
    fit.fittable = true;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

enum class SlopeAxis { L, Sigma };
enum class ErrorColumn { Abs, Self };

/// Slope of the chosen error column against L or sigma, over records of a single curve.
inline SlopeFit fit_slope(const std::vector<StudyRecord>& recs, SlopeAxis axis, int window = 4,
                          ErrorColumn column = ErrorColumn::Abs)
{
    std::vector<std::pair<double, double>> xy;
    for (const auto& r : recs) {
        const double x = axis == SlopeAxis::L ? static_cast<double>(r.L) : r.sigma;
        xy.emplace_back(x, column == ErrorColumn::Abs ? r.abs_error : r.self_error);
    }
    return fit_loglog(std::move(xy), window);
}

/// Records grouped into L-curves (one per series key), in sorted order.
inline std::vector<std::vector<StudyRecord>> split_series(const std::vector<StudyRecord>& recs)
{
    std::map<decltype(StudyRecord{}.series_key()), std::vector<StudyRecord>> groups;
    for (const auto& r : recs) {
        groups[r.series_key()].push_back(r);
    }
    std::vector<std::vector<StudyRecord>> out;
    for (auto& [k, v] : groups) {
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.L < b.L; });
        out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Records CSV

inline constexpr const char* records_header = "case,observable,method,scheme,p,q,L,sigma,value,abs_error,self_error,wall_ms";

inline void write_records(const std::vector<StudyRecord>& recs, std::ostream& out)
{
    out << records_header << '\n';
    for (const auto& r : recs) {
        out << r.case_id << ',' << r.observable << ',' << r.method << ',' << r.scheme << ',' << r.p << ',' << r.q
            << ',' << r.L << ',' << format_double(r.sigma) << ',' << format_double(r.value) << ','
            << format_double(r.abs_error) << ',' << format_double(r.self_error) << ',' << format_double(r.wall_ms)
            << '\n';
    }
}

inline void write_records(const std::vector<StudyRecord>& recs, const std::string& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    write_records(recs, out);
    if (!out) {
        throw IoError("failed writing " + path);
    }
}

inline std::vector<StudyRecord> read_records(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != records_header) {
        throw ParseError("expected records header", 1);
    }
    std::vector<StudyRecord> recs;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            f.push_back(field);
        }
        if (f.size() != 12) {
            throw ParseError("expected 12 columns", lineno);
        }
        StudyRecord r;
        r.case_id = f[0];
        r.observable = f[1];
        r.method = f[2];
        r.scheme = f[3];
        r.p = detail::parse_int(f[4], "p", lineno);
        r.q = detail::parse_int(f[5], "q", lineno);
        r.L = detail::parse_int(f[6], "L", lineno);
        r.sigma = detail::parse_number(f[7], "sigma", lineno);
        r.value = detail::parse_number(f[8], "value", lineno);
        r.abs_error = detail::parse_number(f[9], "abs_error", lineno);
        r.self_error = detail::parse_number(f[10], "self_error", lineno);
        r.wall_ms = detail::parse_number(f[11], "wall_ms", lineno);
        recs.push_back(r);
    }
    return recs;
}

inline std::vector<StudyRecord> read_records(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    try {
        return read_records(in);
    } catch (const ParseError& e) {
        throw ParseError(e.detail(), e.line(), path);
    }
}

} // namespace bzlab
