#pragma once

// Interpolation-method observables: bands are replaced by periodic B-spline interpolants of
// their samples on B_L, and indicator regions {spline_q <= eps} are integrated directly.
//
//   N^{L,q}(eps)   = sum_n |{k : Pi^q e_n(k) <= eps}|
//   E^{L,p,q}      = sum_n  int_{Pi^q e_n <= eF^{L,q}} Pi^p e_n(k) dk

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "parallel.hpp"
#include "quadrature.hpp"
#include "sampling.hpp"
#include "spline.hpp"

namespace bzlab {

/// Number of lowest bands that can matter for N electrons: those whose minimum sample lies
/// below a rough Fermi-level guess plus one energy unit.
inline int relevant_band_count(const SampledBands& bands, double n_electrons)
{
    std::vector<double> all;
    all.reserve(bands.grid().size() * static_cast<std::size_t>(bands.band_count()));
    for (std::size_t i = 0; i < bands.grid().size(); ++i) {
        for (double e : bands.energies_at(i)) {
            all.push_back(e);
        }
    }
    const auto rank = std::min(all.size() - 1,
                               static_cast<std::size_t>(n_electrons * static_cast<double>(bands.grid().size())));
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(rank), all.end());
    const double guess = all[rank];
    int nb = 0;
    while (nb < bands.band_count() && bands.band_min(nb) < guess + 1.0) {
        ++nb;
    }
    return std::max(nb, 1);
}

/// One spline per band for the first `count` bands.
inline std::vector<TorusSpline> fit_band_splines(const SampledBands& bands, int order, int count = -1)
{
    if (count < 0) {
        count = bands.band_count();
    }
    std::vector<TorusSpline> out(static_cast<std::size_t>(count));
    const int d = bands.grid().dim();
    const int L = bands.grid().L();
    parallel_for_each_index(
        static_cast<std::size_t>(count),
        [&](std::size_t n) { out[n] = fit_spline(d, L, bands.band_values(static_cast<int>(n)), order); }, 1);
    return out;
}

/// Sublevel-set integrals of spline bands on the torus.
///
/// The torus is cut into (2L)^d cubes that do not straddle any spline breakpoint. For each
/// cube the coefficient hull bounds the level spline and the integrand's full-cube integral is
/// precomputed, so a query only integrates the cubes the level actually crosses.
class SplineLevelSet {
  public:
    /// integrand == nullptr integrates the constant 1 (counting).
    SplineLevelSet(const std::vector<TorusSpline>& level_splines, const std::vector<TorusSpline>* integrand,
                   const LevelSetQuadConfig& cfg)
        : level_(level_splines), integrand_(integrand), cfg_(cfg)
    {
        cfg_.validate();
        if (level_.empty()) {
            throw InvalidArgument("no splines given");
        }
        d_ = level_.front().dim();
        L_ = level_.front().L();
        for (const auto& s : level_) {
            if (s.dim() != d_ || s.L() != L_ || s.order() != level_.front().order()) {
                throw InvalidArgument("all level splines must share dimension, L and order");
            }
        }
        if (integrand_ != nullptr) {
            if (integrand_->size() != level_.size()) {
                throw InvalidArgument("integrand and level spline lists differ in length");
            }
            for (const auto& s : *integrand_) {
                if (s.dim() != d_ || s.L() != L_) {
                    throw InvalidArgument("integrand splines must be fitted on the same grid");
                }
            }
        }
        per_axis_ = 2 * L_;
        width_ = 1.0 / per_axis_;
        ncells_ = 1;
        for (int a = 0; a < d_; ++a) {
            ncells_ *= static_cast<std::size_t>(per_axis_);
        }
        box_cfg_ = cfg_;
        box_cfg_.min_depth = 0;
        box_cfg_.line_min_depth = 0;
        const int base_depth = static_cast<int>(std::floor(std::log2(static_cast<double>(per_axis_))));
        box_cfg_.max_depth = std::max(6, cfg_.max_depth - base_depth);

        tables_.resize(level_.size());
        for (std::size_t n = 0; n < level_.size(); ++n) {
            auto& t = tables_[n];
            t.lo.resize(ncells_);
            t.hi.resize(ncells_);
            if (integrand_ != nullptr) {
                t.full.resize(ncells_);
            }
            parallel_for_each_index(ncells_, [&](std::size_t c) {
                const Coords lo = cell_corner(c);
                auto [a, b] = level_[n].coefficient_hull(lo, width_);
                // A hull this thin is fitting noise on a flat piece; refining it would never decide.
                if (b - a <= 64.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(a), std::abs(b)})) {
                    a = b = 0.5 * (a + b);
                }
                t.lo[c] = a;
                t.hi[c] = b;
                if (integrand_ != nullptr) {
                    t.full[c] = cube_gauss((*integrand_)[n], lo);
                }
            });
            t.min = *std::min_element(t.lo.begin(), t.lo.end());
            t.max = *std::max_element(t.hi.begin(), t.hi.end());
        }
    }

    int dim() const { return d_; }
    int L() const { return L_; }
    std::size_t band_count() const { return level_.size(); }
    double lower_bound() const
    {
        double m = tables_.front().min;
        for (const auto& t : tables_) {
            m = std::min(m, t.min);
        }
        return m;
    }
    double upper_bound() const
    {
        double m = tables_.front().max;
        for (const auto& t : tables_) {
            m = std::max(m, t.max);
        }
        return m;
    }

    /// Summed over bands: measure of {spline <= level} and integral of the integrand over it.
    LevelSetResult integrate(double level) const
    {
        LevelSetResult total;
        for (std::size_t n = 0; n < level_.size(); ++n) {
            total += integrate_band(n, level);
        }
        return total;
    }

  private:
    struct Table {
        std::vector<double> lo;
        std::vector<double> hi;
        std::vector<double> full;
        double min = 0.0;
        double max = 0.0;
    };

    Coords cell_corner(std::size_t c) const
    {
        Coords lo{};
        for (int a = d_ - 1; a >= 0; --a) {
            lo[a] = -0.5 + static_cast<double>(c % static_cast<std::size_t>(per_axis_)) * width_;
            c /= static_cast<std::size_t>(per_axis_);
        }
        return lo;
    }

    /// Gauss-Legendre with 3 nodes per axis: exact for the (bi)quadratic pieces.
    double cube_gauss(const TorusSpline& s, const Coords& lo) const
    {
        const GaussRule& r = gauss_rule(3);
        double sum = 0.0;
        const int n1 = d_ >= 2 ? 3 : 1;
        const int n2 = d_ >= 3 ? 3 : 1;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < n1; ++j) {
                for (int l = 0; l < n2; ++l) {
                    Coords x = lo;
                    x[0] += width_ * r.nodes[i];
                    double w = r.weights[i];
                    if (d_ >= 2) {
                        x[1] += width_ * r.nodes[j];
                        w *= r.weights[j];
                    }
                    if (d_ >= 3) {
                        x[2] += width_ * r.nodes[l];
                        w *= r.weights[l];
                    }
                    sum += w * s(x);
                }
            }
        }
        return sum * std::pow(width_, d_);
    }

    LevelSetResult integrate_band(std::size_t n, double level) const
    {
        const Table& t = tables_[n];
        const double volume = std::pow(width_, d_);
        const TorusSpline& f = level_[n];
        if (level < t.min) {
            return {};
        }
        const std::size_t n_chunks = (ncells_ + reduction_chunk - 1) / reduction_chunk;
        std::vector<LevelSetResult> partial(n_chunks);
        LevelSetQuadConfig cfg = box_cfg_;
        cfg.abs_tol = cfg_.abs_tol * volume;
        parallel_for_chunks(n_chunks, [&](std::size_t chunk) {
            CompensatedSum measure;
            CompensatedSum integral;
            double error = 0.0;
            bool met = true;
            const std::size_t end = std::min(ncells_, (chunk + 1) * reduction_chunk);
            for (std::size_t c = chunk * reduction_chunk; c < end; ++c) {
                if (t.hi[c] <= level) {
                    measure.add(volume);
                    integral.add(integrand_ != nullptr ? t.full[c] : volume);
                } else if (t.lo[c] <= level) {
                    LevelSetResult r;
                    if (integrand_ != nullptr) {
                        const TorusSpline& g = (*integrand_)[n];
                        r = LevelSetIntegrator<TorusSpline, TorusSpline>(d_, f, g, level, cfg)
                                .integrate_box(cell_corner(c), width_);
                    } else {
                        const UnitIntegrand unit;
                        r = LevelSetIntegrator<TorusSpline, UnitIntegrand>(d_, f, unit, level, cfg)
                                .integrate_box(cell_corner(c), width_);
                    }
                    measure.add(r.measure);
                    integral.add(r.integral);
                    error += r.error_bound;
                    met = met && r.budget_met;
                }
            }
            partial[chunk] = {measure.value(), integral.value(), error, met};
        });
        LevelSetResult total;
        CompensatedSum m;
        CompensatedSum g;
        for (const auto& p : partial) {
            m.add(p.measure);
            g.add(p.integral);
            total.error_bound += p.error_bound;
            total.budget_met = total.budget_met && p.budget_met;
        }
        total.measure = m.value();
        total.integral = g.value();
        total.budget_met = total.error_bound <= cfg_.abs_tol;
        return total;
    }

    std::vector<TorusSpline> level_;
    const std::vector<TorusSpline>* integrand_;
    LevelSetQuadConfig cfg_;
    LevelSetQuadConfig box_cfg_;
    int d_ = 2;
    int L_ = 1;
    int per_axis_ = 2;
    double width_ = 0.5;
    std::size_t ncells_ = 0;
    std::vector<Table> tables_;
};

/// N^{L,q}(eps): measure part of the result is the electron count.
inline LevelSetResult counting_interp(const std::vector<TorusSpline>& splines_q, double level,
                                      const LevelSetQuadConfig& cfg = {})
{
    return SplineLevelSet(splines_q, nullptr, cfg).integrate(level);
}

struct InterpFermi {
    double fermi = 0.0;
    double bound = 0.0;
};

inline InterpFermi solve_fermi_interp(const SplineLevelSet& counting, double n_electrons)
{
    if (!(n_electrons > 0.0) || !(n_electrons < static_cast<double>(counting.band_count()))) {
        throw InvalidArgument("electron count must lie strictly between 0 and the number of fitted bands");
    }
    auto count = [&](double e) {
        const auto r = counting.integrate(e);
        return std::pair{r.measure, r.error_bound};
    };
    const auto sol = solve_level(count, n_electrons, counting.lower_bound() - 1.0, counting.upper_bound() + 1.0, 1e-10);
    return {sol.level, sol.bound};
}

inline InterpFermi solve_fermi_interp(const std::vector<TorusSpline>& splines_q, double n_electrons,
                                      const LevelSetQuadConfig& cfg = {})
{
    return solve_fermi_interp(SplineLevelSet(splines_q, nullptr, cfg), n_electrons);
}

/// E^{L,p,q}: integral of the order-p bands over the region where the order-q bands lie below
/// fermi_q.
inline LevelSetResult energy_interp(const std::vector<TorusSpline>& splines_p, const std::vector<TorusSpline>& splines_q,
                                    double fermi_q, const LevelSetQuadConfig& cfg = {})
{
    return SplineLevelSet(splines_q, &splines_p, cfg).integrate(fermi_q);
}

struct InterpResult {
    double fermi_level = 0.0;
    double fermi_bound = 0.0;
    double energy = 0.0;
    double energy_error_bound = 0.0;
    int L = 0;
    int p = 0;
    int q = 0;
    bool budget_met = true;
};

/// Samples the model on B_L, fits splines of orders p and q and computes eF^{L,q}, E^{L,p,q}.
inline InterpResult interp_observables(const SampledBands& bands, int p, int q, double n_electrons,
                                       const LevelSetQuadConfig& cfg = {})
{
    const int nb = relevant_band_count(bands, n_electrons);
    if (!(n_electrons < nb)) {
        throw InvalidArgument("electron count exceeds the number of bands that can be occupied");
    }
    const auto splines_q = fit_band_splines(bands, q, nb);
    const auto splines_p = p == q ? splines_q : fit_band_splines(bands, p, nb);
    const auto fermi = solve_fermi_interp(SplineLevelSet(splines_q, nullptr, cfg), n_electrons);
    const auto e = energy_interp(splines_p, splines_q, fermi.fermi, cfg);
    return {fermi.fermi, fermi.bound, e.integral, e.error_bound, bands.grid().L(), p, q, e.budget_met};
}

} // namespace bzlab
