#pragma once

// Brillouin-zone quadrature: uniform Gamma-centred grids, deterministic Riemann sums and an
// adaptive integrator over sublevel sets {k : f(k) <= level} of a periodic function.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "error.hpp"
#include "kpoint.hpp"
#include "parallel.hpp"

namespace bzlab {

using Coords = std::array<double, 3>;

/// The L^d points {i/L} of the torus, wrapped to [-1/2, 1/2), each of weight 1/L^d.
///
/// Points are enumerated lexicographically in (i_1, ..., i_d) with the last index fastest;
/// point(index) recomputes a point so that large grids cost no storage.
class UniformGrid {
  public:
    UniformGrid(int d, int L) : d_(d), L_(L)
    {
        if (d < 1 || d > 3) {
            throw InvalidArgument("grid dimension must be 1, 2 or 3");
        }
        if (L < 1) {
            throw InvalidArgument("grid size L must be at least 1");
        }
        size_ = 1;
        for (int i = 0; i < d; ++i) {
            size_ *= static_cast<std::size_t>(L);
        }
    }

    int dim() const { return d_; }
    int L() const { return L_; }
    std::size_t size() const { return size_; }
    double weight() const { return 1.0 / static_cast<double>(size_); }

    /// Integer index tuple of a point.
    std::array<int, 3> indices(std::size_t index) const
    {
        std::array<int, 3> idx{};
        for (int a = d_ - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(index % static_cast<std::size_t>(L_));
            index /= static_cast<std::size_t>(L_);
        }
        return idx;
    }

    FracKPoint point(std::size_t index) const
    {
        const auto idx = indices(index);
        std::array<double, 3> c{};
        for (int a = 0; a < d_; ++a) {
            c[a] = static_cast<double>(idx[a]) / static_cast<double>(L_);
        }
        return FracKPoint(std::span<const double>(c.data(), static_cast<std::size_t>(d_)));
    }

    std::vector<FracKPoint> points() const
    {
        std::vector<FracKPoint> pts;
        pts.reserve(size_);
        for (std::size_t i = 0; i < size_; ++i) {
            pts.push_back(point(i));
        }
        return pts;
    }

  private:
    int d_;
    int L_;
    std::size_t size_;
};

inline UniformGrid make_grid(int d, int L) { return UniformGrid(d, L); }

inline std::string describe(const FracKPoint& k)
{
    std::ostringstream s;
    s.precision(17);
    s << '(';
    for (int i = 0; i < k.dim(); ++i) {
        s << (i ? ", " : "") << k[i];
    }
    s << ')';
    return s.str();
}

/// (1/L^d) sum_k integrand(k), reduced in a thread-count independent order.
template <class Integrand>
double riemann_sum(const UniformGrid& grid, Integrand&& integrand)
{
    const double sum = deterministic_sum(grid.size(), [&](std::size_t i) {
        const FracKPoint k = grid.point(i);
        const double v = integrand(k);
        if (!std::isfinite(v)) {
            throw NonFiniteError("integrand is not finite at k = " + describe(k));
        }
        return v;
    });
    return sum * grid.weight();
}

// ---------------------------------------------------------------------------------------------
// Gauss-Legendre rules

struct GaussRule {
    std::vector<double> nodes;   // on [0, 1]
    std::vector<double> weights; // sum to 1
};

inline GaussRule gauss_legendre(int n)
{
    GaussRule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p0 = 1.0;
                p1 = x;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        r.nodes[i] = 0.5 * (1.0 - x);
        r.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

inline const GaussRule& gauss_rule(int n)
{
    static const std::array<GaussRule, 9> rules = [] {
        std::array<GaussRule, 9> r;
        for (int i = 1; i < 9; ++i) {
            r[i] = gauss_legendre(i);
        }
        return r;
    }();
    return rules.at(static_cast<std::size_t>(n));
}

// ---------------------------------------------------------------------------------------------
// Sublevel-set integration

struct LevelSetQuadConfig {
    /// Budget on the total area of cells that remain undecided.
    double abs_tol = 1e-6;
    int max_depth = 16;
    /// Cells are subdivided unconditionally down to this depth before classification.
    int min_depth = 2;
    /// Straddling cells may be integrated line by line from this depth on.
    int line_min_depth = 4;
    /// Multiplier on the sampled-slope margin used to accept a cell as inside or outside.
    double safety = 2.0;

    void validate() const
    {
        if (!(abs_tol >= 1e-12)) {
            throw InvalidArgument("abs_tol must be at least 1e-12");
        }
        if (max_depth < 1 || max_depth > 24) {
            throw InvalidArgument("max_depth must be in 1..24");
        }
        if (min_depth < 0 || min_depth > max_depth) {
            throw InvalidArgument("min_depth must be in 0..max_depth");
        }
    }
};

struct LevelSetResult {
    double measure = 0.0;
    double integral = 0.0;
    /// Total volume of cells integrated only at their centre.
    double error_bound = 0.0;
    bool budget_met = true;

    LevelSetResult& operator+=(const LevelSetResult& o)
    {
        measure += o.measure;
        integral += o.integral;
        error_bound += o.error_bound;
        budget_met = budget_met && o.budget_met;
        return *this;
    }
};

/// Marks g == 1; the integral then equals the measure and no g evaluations happen.
struct UnitIntegrand {
    double operator()(const Coords&) const { return 1.0; }
};

namespace detail {

struct Cell {
    Coords lo{};
    double w = 1.0;
    int depth = 0;
};

/// Root of phi on [a, b] given phi(a), phi(b) of opposite signs (Illinois regula falsi).
template <class Phi>
double bracketed_root(Phi&& phi, double a, double b, double fa, double fb)
{
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::max(std::abs(a), std::abs(b)));
    int side = 0;
    for (int it = 0; it < 200 && std::abs(b - a) > tol; ++it) {
        double c = (a * fb - b * fa) / (fb - fa);
        if (!(c > std::min(a, b) && c < std::max(a, b))) {
            c = 0.5 * (a + b);
        }
        const double fc = phi(c);
        if (fc == 0.0) {
            return c;
        }
        if ((fc > 0.0) == (fb > 0.0)) {
            b = c;
            fb = fc;
            if (side == -1) {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if (side == +1) {
                fb *= 0.5;
            }
            side = +1;
        }
        // Fall back to a bisection step when regula falsi stalls on one side.
        if (it % 8 == 7) {
            const double m = 0.5 * (a + b);
            const double fm = phi(m);
            if ((fm > 0.0) == (fb > 0.0)) {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
        }
    }
    return 0.5 * (a + b);
}

} // namespace detail

/// Integrates 1(f <= level) and g 1(f <= level) over boxes of R^d.
///
/// Cells are processed breadth first. A cell whose 3^d stencil (corners, edge/face midpoints,
/// centre) lies on one side of the level by more than safety x (largest neighbouring sample
/// difference) is accepted whole. A straddling cell deep enough is integrated line by line
/// along the axis of steepest ascent when f is strictly monotone on every line; the crossing is
/// found by root bracketing and the transverse direction uses Gauss-Legendre, split where the
/// level set meets the cell's faces (d = 2). Everything else is subdivided. Refinement stops
/// when the undecided volume drops below abs_tol or max_depth is reached; the remainder is
/// evaluated at cell centres and reported as error_bound.
template <class F, class G>
class LevelSetIntegrator {
  public:
    LevelSetIntegrator(int d, const F& f, const G& g, double level, const LevelSetQuadConfig& cfg)
        : d_(d), f_(f), g_(g), level_(level), cfg_(cfg)
    {
        if (d < 1 || d > 3) {
            throw InvalidArgument("level-set integration supports d = 1, 2, 3");
        }
    }

    LevelSetResult integrate_box(const Coords& lo, double width) const
    {
        std::vector<detail::Cell> active{detail::Cell{lo, width, 0}};
        LevelSetResult total;
        CompensatedSum measure;
        CompensatedSum integral;
        double line_error = 0.0;
        for (;;) {
            std::vector<Outcome> out(active.size());
            parallel_for_each_index(
                active.size(), [&](std::size_t i) { out[i] = process(active[i], width); }, 16);

            std::vector<detail::Cell> next;
            for (std::size_t i = 0; i < active.size(); ++i) {
                if (out[i].refine) {
                    next.push_back(active[i]);
                } else {
                    measure.add(out[i].measure);
                    integral.add(out[i].integral);
                    line_error += out[i].error;
                }
            }
            if (next.empty()) {
                break;
            }
            const int depth = next.front().depth;
            const double cell_volume = std::pow(next.front().w, d_);
            const double undecided = cell_volume * static_cast<double>(next.size());
            const bool coarse = depth < cfg_.min_depth || depth < cfg_.line_min_depth;
            if (depth >= cfg_.max_depth || (!coarse && undecided < cfg_.abs_tol)) {
                for (const auto& c : next) {
                    Coords mid = c.lo;
                    for (int a = 0; a < d_; ++a) {
                        mid[a] += 0.5 * c.w;
                    }
                    if (eval_f(mid) <= level_) {
                        measure.add(cell_volume);
                        integral.add(cell_volume * eval_g(mid));
                    }
                }
                total.error_bound = undecided;
                break;
            }
            active.clear();
            active.reserve(next.size() << d_);
            for (const auto& c : next) {
                split(c, active);
            }
        }
        total.error_bound += line_error;
        total.budget_met = total.error_bound <= cfg_.abs_tol;
        total.measure = measure.value();
        total.integral = unit_g ? total.measure : integral.value();
        return total;
    }

    /// The whole torus [-1/2, 1/2)^d.
    LevelSetResult integrate_torus() const { return integrate_box(Coords{-0.5, -0.5, -0.5}, 1.0); }

    /// Integral of g over a cell by adaptive Gauss-Legendre (6 nodes per axis).
    double cell_integral(const Coords& lo, double w) const
    {
        if constexpr (unit_g) {
            return std::pow(w, d_);
        } else {
            const double tol = 0.1 * cfg_.abs_tol * std::pow(w, d_);
            return adaptive_cell_integral(lo, w, tensor_gauss(lo, w), tol, 0);
        }
    }

  private:
    static constexpr bool unit_g = std::is_same_v<std::decay_t<G>, UnitIntegrand>;
    static constexpr int line_samples = 5;
    static constexpr int transverse_nodes = 5;
    static constexpr int segment_nodes = 4;

    struct Outcome {
        double measure = 0.0;
        double integral = 0.0;
        bool refine = false;
        /// Estimated quadrature error of a line-rule cell.
        double error = 0.0;
    };

    double eval_f(const Coords& x) const
    {
        const double v = f_(x);
        if (!std::isfinite(v)) {
            throw NonFiniteError("level function is not finite");
        }
        return v;
    }

    double eval_g(const Coords& x) const
    {
        if constexpr (unit_g) {
            return 1.0;
        } else {
            return g_(x);
        }
    }

    void split(const detail::Cell& c, std::vector<detail::Cell>& out) const
    {
        const double h = 0.5 * c.w;
        for (int m = 0; m < (1 << d_); ++m) {
            detail::Cell child{c.lo, h, c.depth + 1};
            for (int a = 0; a < d_; ++a) {
                if (m & (1 << (d_ - 1 - a))) {
                    child.lo[a] += h;
                }
            }
            out.push_back(child);
        }
    }

    double tensor_gauss(const Coords& lo, double w) const
    {
        const GaussRule& r = gauss_rule(6);
        const int n = static_cast<int>(r.nodes.size());
        double s = 0.0;
        const int n1 = d_ >= 2 ? n : 1;
        const int n2 = d_ >= 3 ? n : 1;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n1; ++j) {
                for (int l = 0; l < n2; ++l) {
                    Coords x = lo;
                    x[0] += w * r.nodes[i];
                    double wt = r.weights[i];
                    if (d_ >= 2) {
                        x[1] += w * r.nodes[j];
                        wt *= r.weights[j];
                    }
                    if (d_ >= 3) {
                        x[2] += w * r.nodes[l];
                        wt *= r.weights[l];
                    }
                    s += wt * eval_g(x);
                }
            }
        }
        return s * std::pow(w, d_);
    }

    double adaptive_cell_integral(const Coords& lo, double w, double coarse, double tol, int level) const
    {
        std::vector<detail::Cell> kids;
        split(detail::Cell{lo, w, 0}, kids);
        std::array<double, 8> q{};
        double fine = 0.0;
        for (std::size_t i = 0; i < kids.size(); ++i) {
            q[i] = tensor_gauss(kids[i].lo, kids[i].w);
            fine += q[i];
        }
        if (std::abs(fine - coarse) <= tol + 1e-15 * std::abs(fine) || level >= 8) {
            return fine;
        }
        double s = 0.0;
        const double child_tol = tol / static_cast<double>(kids.size());
        for (std::size_t i = 0; i < kids.size(); ++i) {
            s += adaptive_cell_integral(kids[i].lo, kids[i].w, q[i], child_tol, level + 1);
        }
        return s;
    }

    Outcome process(const detail::Cell& c, double box_width) const
    {
        if (c.depth < cfg_.min_depth) {
            return {0.0, 0.0, true};
        }
        // 3^d stencil, index sum_a t_a 3^(d-1-a).
        std::array<double, 27> v{};
        const int n = d_ == 1 ? 3 : (d_ == 2 ? 9 : 27);
        for (int s = 0; s < n; ++s) {
            Coords x = c.lo;
            int rem = s;
            for (int a = d_ - 1; a >= 0; --a) {
                x[a] += 0.5 * c.w * (rem % 3);
                rem /= 3;
            }
            v[s] = eval_f(x);
        }
        double vmin = v[0];
        double vmax = v[0];
        for (int s = 1; s < n; ++s) {
            vmin = std::min(vmin, v[s]);
            vmax = std::max(vmax, v[s]);
        }
        std::array<double, 3> mean_slope{};
        double max_diff = 0.0;
        for (int a = 0; a < d_; ++a) {
            int stride = 1;
            for (int b = a + 1; b < d_; ++b) {
                stride *= 3;
            }
            int count = 0;
            for (int s = 0; s < n; ++s) {
                if ((s / stride) % 3 == 2) {
                    continue;
                }
                const double diff = v[s + stride] - v[s];
                max_diff = std::max(max_diff, std::abs(diff));
                mean_slope[a] += diff;
                ++count;
            }
            mean_slope[a] /= count;
        }
        const double margin = cfg_.safety * max_diff;
        if (vmin - level_ > margin) {
            return {0.0, 0.0, false};
        }
        if (level_ - vmax > margin) {
            return {std::pow(c.w, d_), cell_integral(c.lo, c.w), false};
        }
        if (c.depth >= cfg_.line_min_depth) {
            std::array<int, 3> order{0, 1, 2};
            std::sort(order.begin(), order.begin() + d_,
                      [&](int a, int b) { return std::abs(mean_slope[a]) > std::abs(mean_slope[b]); });
            for (int i = 0; i < d_; ++i) {
                const int axis = order[i];
                if (mean_slope[axis] == 0.0) {
                    break;
                }
                Outcome o;
                if (line_rule(c, axis, mean_slope[axis] > 0.0 ? 1 : -1, line_tol(c.w, box_width), o)) {
                    return o;
                }
            }
        }
        return {0.0, 0.0, true};
    }

    /// Crossings of the level along the face edges normal to `axis` (d = 2 only), as offsets
    /// in [0, w] of the transverse coordinate.
    std::vector<double> face_breakpoints(const detail::Cell& c, int axis) const
    {
        std::vector<double> br;
        const int other = 1 - axis;
        constexpr int m = 9;
        for (int face = 0; face < 2; ++face) {
            Coords x = c.lo;
            x[axis] += face * c.w;
            auto phi = [&](double t) {
                Coords y = x;
                y[other] += t;
                return eval_f(y) - level_;
            };
            double t0 = 0.0;
            double p0 = phi(0.0);
            for (int j = 1; j < m; ++j) {
                const double t1 = c.w * j / (m - 1);
                const double p1 = phi(t1);
                if ((p0 <= 0.0) != (p1 <= 0.0)) {
                    br.push_back(detail::bracketed_root(phi, t0, t1, p0, p1));
                }
                t0 = t1;
                p0 = p1;
            }
        }
        std::sort(br.begin(), br.end());
        return br;
    }

    /// Integrates over the part of one line (transverse position fixed in x) where f <= level.
    /// Returns false if f is not strictly monotone in direction `sign` along the line.
    bool line_segment(const detail::Cell& c, int axis, int sign, Coords x, double& length, double& integral) const
    {
        std::array<double, line_samples> t{};
        std::array<double, line_samples> p{};
        auto phi = [&](double s) {
            Coords y = x;
            y[axis] = c.lo[axis] + s;
            return eval_f(y) - level_;
        };
        for (int j = 0; j < line_samples; ++j) {
            t[j] = c.w * j / (line_samples - 1);
            p[j] = phi(t[j]);
            if (j > 0 && !(sign * (p[j] - p[j - 1]) > 0.0)) {
                return false;
            }
        }
        double a = 0.0;
        double b = c.w;
        if (p.front() <= 0.0 && p.back() <= 0.0) {
            // whole line inside
        } else if (p.front() > 0.0 && p.back() > 0.0) {
            length = 0.0;
            integral = 0.0;
            return true;
        } else {
            int j = 0;
            while ((p[j] <= 0.0) == (p[j + 1] <= 0.0)) {
                ++j;
            }
            const double root = detail::bracketed_root(phi, t[j], t[j + 1], p[j], p[j + 1]);
            if (sign > 0) {
                b = root;
            } else {
                a = root;
            }
        }
        length = b - a;
        if constexpr (unit_g) {
            integral = length;
        } else {
            const GaussRule& r = gauss_rule(segment_nodes);
            double s = 0.0;
            for (std::size_t q = 0; q < r.nodes.size(); ++q) {
                Coords y = x;
                y[axis] = c.lo[axis] + a + length * r.nodes[q];
                s += r.weights[q] * eval_g(y);
            }
            integral = s * length;
        }
        return true;
    }

    /// Share of abs_tol granted to one line-rule cell of width w: proportional to its
    /// cross-section, so the cells along a level set of bounded area add up to about abs_tol.
    double line_tol(double w, double box_width) const
    {
        return 0.1 * cfg_.abs_tol * std::pow(box_width, d_) * std::pow(w / box_width, d_ - 1);
    }

    /// Transverse Gauss rule over [t0, t0 + span] (one axis) of the line integrals.
    bool transverse_1d(const detail::Cell& c, int axis, int sign, int other, double t0, double span, double& measure,
                       double& integral) const
    {
        const GaussRule& r = gauss_rule(transverse_nodes);
        for (std::size_t q = 0; q < r.nodes.size(); ++q) {
            Coords x = c.lo;
            x[other] += t0 + span * r.nodes[q];
            double len = 0.0;
            double in = 0.0;
            if (!line_segment(c, axis, sign, x, len, in)) {
                return false;
            }
            measure += r.weights[q] * span * len;
            integral += r.weights[q] * span * in;
        }
        return true;
    }

    /// Same over the square [u0, u0 + span] x [v0, v0 + span] of the two transverse axes.
    bool transverse_2d(const detail::Cell& c, int axis, int sign, double u0, double v0, double span, double& measure,
                       double& integral) const
    {
        const int o1 = axis == 0 ? 1 : 0;
        const int o2 = axis == 2 ? 1 : 2;
        const GaussRule& r = gauss_rule(transverse_nodes);
        for (std::size_t i = 0; i < r.nodes.size(); ++i) {
            for (std::size_t j = 0; j < r.nodes.size(); ++j) {
                Coords x = c.lo;
                x[o1] += u0 + span * r.nodes[i];
                x[o2] += v0 + span * r.nodes[j];
                double len = 0.0;
                double in = 0.0;
                if (!line_segment(c, axis, sign, x, len, in)) {
                    return false;
                }
                const double wt = r.weights[i] * r.weights[j] * span * span;
                measure += wt * len;
                integral += wt * in;
            }
        }
        return true;
    }

    /// Line-by-line integration of a straddling cell. The transverse rule is applied on one
    /// and on two panels per piece; the cell is accepted only when they agree to within tol,
    /// and the difference is carried as the cell's error.
    bool line_rule(const detail::Cell& c, int axis, int sign, double tol, Outcome& o) const
    {
        double coarse_m = 0.0, coarse_g = 0.0, fine_m = 0.0, fine_g = 0.0;
        if (d_ == 1) {
            if (!line_segment(c, axis, sign, c.lo, fine_m, fine_g)) {
                return false;
            }
            o = {fine_m, fine_g, false, 0.0};
            return true;
        }
        if (d_ == 2) {
            const int other = 1 - axis;
            std::vector<double> cuts{0.0};
            for (double b : face_breakpoints(c, axis)) {
                if (b > cuts.back()) {
                    cuts.push_back(b);
                }
            }
            if (c.w > cuts.back()) {
                cuts.push_back(c.w);
            }
            for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
                const double t0 = cuts[piece];
                const double span = cuts[piece + 1] - t0;
                if (!transverse_1d(c, axis, sign, other, t0, span, coarse_m, coarse_g) ||
                    !transverse_1d(c, axis, sign, other, t0, 0.5 * span, fine_m, fine_g) ||
                    !transverse_1d(c, axis, sign, other, t0 + 0.5 * span, 0.5 * span, fine_m, fine_g)) {
                    return false;
                }
            }
        } else {
            // d = 3: no face splitting.
            const double h = 0.5 * c.w;
            if (!transverse_2d(c, axis, sign, 0.0, 0.0, c.w, coarse_m, coarse_g)) {
                return false;
            }
            for (int q = 0; q < 4; ++q) {
                if (!transverse_2d(c, axis, sign, (q & 1) * h, (q >> 1) * h, h, fine_m, fine_g)) {
                    return false;
                }
            }
        }
        const double err = std::max(std::abs(fine_m - coarse_m), unit_g ? 0.0 : std::abs(fine_g - coarse_g));
        if (!(err <= tol)) {
            return false;
        }
        o = {fine_m, fine_g, false, err};
        return true;
    }

    int d_;
    const F& f_;
    const G& g_;
    double level_;
    LevelSetQuadConfig cfg_;
};

/// Measure of {f <= level} on the torus and the integral of g over it.
/// f and g take a Coords (first d entries used) and must be periodic with period 1.
template <class F, class G = UnitIntegrand>
LevelSetResult levelset_integrate(int d, const F& f, const G& g, double level, const LevelSetQuadConfig& cfg)
{
    cfg.validate();
    return LevelSetIntegrator<F, G>(d, f, g, level, cfg).integrate_torus();
}

/// Bisection for a level where a monotone-in-the-large counting function crosses `target`.
///
/// count(level) returns {value, uncertainty}. When a midpoint falls inside the set where the
/// target is reached within the uncertainty (a plateau, or an unresolved neighbourhood), both
/// ends of that set are located and its midpoint returned, which makes the result independent
/// of which side the bisection happened to approach from.
struct LevelSolution {
    double level = 0.0;
    /// Half-width of the final bracket (or of the bracketed root set).
    double bound = 0.0;
};

template <class Count>
LevelSolution solve_level(Count&& count, double target, double lo, double hi, double width_tol)
{
    auto below = [&](double e) {
        const auto [v, u] = count(e);
        return v + u < target;
    };
    auto above = [&](double e) {
        const auto [v, u] = count(e);
        return v - u > target;
    };
    double step = std::max(1.0, hi - lo);
    int expansions = 0;
    while (!below(lo)) {
        if (++expansions > 60) {
            throw NoRootError("could not bracket the level from below");
        }
        lo -= step;
        step *= 2.0;
    }
    step = std::max(1.0, hi - lo);
    expansions = 0;
    while (!above(hi)) {
        if (++expansions > 60) {
            throw NoRootError("could not bracket the level from above");
        }
        hi += step;
        step *= 2.0;
    }
    auto width_ok = [&](double a, double b) { return b - a <= width_tol * std::max(1.0, std::abs(0.5 * (a + b))); };
    while (!width_ok(lo, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const auto [v, u] = count(mid);
        if (v + u < target) {
            lo = mid;
        } else if (v - u > target) {
            hi = mid;
        } else {
            double a = lo;
            double b = mid;
            while (!width_ok(a, b)) {
                const double m = 0.5 * (a + b);
                if (m <= a || m >= b) {
                    break;
                }
                (below(m) ? a : b) = m;
            }
            double c = mid;
            double e = hi;
            while (!width_ok(c, e)) {
                const double m = 0.5 * (c + e);
                if (m <= c || m >= e) {
                    break;
                }
                (above(m) ? e : c) = m;
            }
            return {0.5 * (b + c), 0.5 * (e - a)};
        }
    }
    return {0.5 * (lo + hi), 0.5 * (hi - lo)};
}

} // namespace bzlab
