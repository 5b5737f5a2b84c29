#pragma once

// High-accuracy values of the Fermi level and ground-state energy, computed by sublevel-set
// integration of the true bands, and their on-disk cache (refs.csv).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bands.hpp"
#include "cases.hpp"
#include "quadrature.hpp"

namespace bzlab {

struct ReferenceValues {
    std::string case_id;
    double electrons = 0.0;
    double tol = 0.0;
    double fermi = 0.0;
    double fermi_bound = 0.0;
    double energy = 0.0;
    double energy_bound = 0.0;
};

inline LevelSetQuadConfig reference_config(double tol)
{
    if (!(tol >= 1e-10)) {
        throw InvalidArgument("reference tolerance must be at least 1e-10");
    }
    LevelSetQuadConfig cfg;
    cfg.abs_tol = tol;
    cfg.max_depth = 24;
    cfg.min_depth = 3;
    cfg.line_min_depth = 4;
    return cfg;
}

namespace detail {
/// Band n of a model as a function of unwrapped torus coordinates.
class BandFunction {
  public:
    BandFunction(const BandModel& model, int band) : model_(model), band_(band) {}
    double operator()(const Coords& x) const
    {
        const FracKPoint k(std::span<const double>(x.data(), static_cast<std::size_t>(model_.dim())));
        if (model_.band_count() == 1) {
            double e = 0.0;
            model_.eval_into(k, std::span<double>(&e, 1));
            return e;
        }
        return model_.eval(k)[band_];
    }

  private:
    const BandModel& model_;
    int band_;
};
} // namespace detail

/// N(eps) = sum_n |{k : e_n(k) <= eps}| on the true bands; the undecided-volume budget tol
/// is shared between the bands.
inline LevelSetResult reference_counting(const BandModel& model, double level, double tol)
{
    LevelSetQuadConfig cfg = reference_config(tol);
    cfg.abs_tol = tol / model.band_count();
    LevelSetResult total;
    for (int n = 0; n < model.band_count(); ++n) {
        const detail::BandFunction f(model, n);
        total += levelset_integrate(model.dim(), f, UnitIntegrand{}, level, cfg);
    }
    total.budget_met = total.error_bound <= tol;
    return total;
}

/// Bisection on reference_counting to bracket width tol.
inline LevelSolution reference_fermi(const BandModel& model, double electrons, double tol)
{
    if (!(electrons > 0.0) || !(electrons < model.band_count())) {
        throw InvalidArgument("electron count must lie strictly between 0 and the number of bands");
    }
    // Coarse bracket from a small sample grid.
    const UniformGrid grid(model.dim(), 8);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto e = model.eval(grid.point(i));
        lo = std::min(lo, e.front());
        hi = std::max(hi, e.back());
    }
    auto count = [&](double e) {
        const auto r = reference_counting(model, e, tol);
        return std::pair{r.measure, r.error_bound};
    };
    return solve_level(count, electrons, lo - 1.0, hi + 1.0, tol);
}

/// Integral of the true bands over {e_n <= fermi}.
inline LevelSetResult reference_band_energy(const BandModel& model, double fermi, double tol)
{
    LevelSetQuadConfig cfg = reference_config(tol);
    cfg.abs_tol = tol / model.band_count();
    LevelSetResult total;
    for (int n = 0; n < model.band_count(); ++n) {
        const detail::BandFunction f(model, n);
        total += levelset_integrate(model.dim(), f, f, fermi, cfg);
    }
    return total;
}

inline ReferenceValues compute_reference(const BandModel& model, const std::string& case_id, double electrons,
                                         double tol)
{
    ReferenceValues r;
    r.case_id = case_id;
    r.electrons = electrons;
    r.tol = tol;
    const LevelSolution fermi = reference_fermi(model, electrons, tol);
    r.fermi = fermi.level;
    r.fermi_bound = fermi.bound;
    const LevelSetResult e = reference_band_energy(model, r.fermi, tol);
    r.energy = e.integral;
    // dE/deF = eF D(eF); D from a centred difference of the counting function.
    const double h = std::max(1e-3, 10.0 * fermi.bound);
    const double dos = (reference_counting(model, r.fermi + h, tol).measure -
                        reference_counting(model, r.fermi - h, tol).measure) /
                       (2.0 * h);
    r.energy_bound = e.error_bound * (std::abs(r.fermi) + 1.0) + std::abs(r.fermi) * std::abs(dos) * fermi.bound;
    return r;
}

inline double default_reference_tol(const std::string& case_id) { return case_id == "graphene" ? 1e-7 : 1e-8; }

inline ReferenceValues compute_reference(const std::string& case_id, std::optional<double> tol = std::nullopt)
{
    const TestCase tc = make_case(case_id);
    return compute_reference(tc.model, tc.id, tc.electrons, tol.value_or(default_reference_tol(tc.id)));
}

// ---------------------------------------------------------------------------------------------
// refs.csv

inline constexpr const char* refs_header = "case,N,tol,fermi,fermi_bound,energy,energy_bound";

/// refs.csv path: $BZLAB_REFS if set, else ./refs.csv.
inline std::string default_refs_path()
{
    if (const char* env = std::getenv("BZLAB_REFS"); env != nullptr && *env != '\0') {
        return env;
    }
    return "refs.csv";
}

inline std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::vector<ReferenceValues> read_refs(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open reference file " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != refs_header) {
        throw ParseError("expected header '" + std::string(refs_header) + "'", 1, path);
    }
    std::vector<ReferenceValues> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ss, field, ',')) {
            f.push_back(field);
        }
        if (f.size() != 7) {
            throw ParseError("expected 7 columns", lineno, path);
        }
        try {
            out.push_back({f[0], std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5]),
                           std::stod(f[6])});
        } catch (const std::exception&) {
            throw ParseError("non-numeric reference value", lineno, path);
        }
    }
    return out;
}

/// Whole-file atomic write (temporary file + rename).
inline void write_refs(const std::vector<ReferenceValues>& refs, const std::string& path)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp);
        }
        out << refs_header << '\n';
        for (const auto& r : refs) {
            out << r.case_id << ',' << format_double(r.electrons) << ',' << format_double(r.tol) << ','
                << format_double(r.fermi) << ',' << format_double(r.fermi_bound) << ',' << format_double(r.energy)
                << ',' << format_double(r.energy_bound) << '\n';
        }
        if (!out) {
            throw IoError("failed writing " + tmp);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot move " + tmp + " to " + path + ": " + ec.message());
    }
}

/// Reference for (case, N) from the cache; nullopt when absent.
inline std::optional<ReferenceValues> find_reference(const std::vector<ReferenceValues>& refs,
                                                     const std::string& case_id, double electrons)
{
    for (const auto& r : refs) {
        if (r.case_id == case_id && std::abs(r.electrons - electrons) <= 1e-12) {
            return r;
        }
    }
    return std::nullopt;
}

} // namespace bzlab
