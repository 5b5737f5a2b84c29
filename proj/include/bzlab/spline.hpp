#pragma once

/** \file spline.hpp
 *
 *  \brief Periodic tensor-product B-spline interpolants on the uniform Brillouin-zone grid.
 *
 *  Node j of each axis sits at j/L. Order 1 uses hat functions (multilinear interpolation);
 *  order 2 uses symmetric quadratic B-splines centred on the nodes, whose values at the nodes
 *  give the circulant collocation matrix [1/8, 6/8, 1/8].
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "kpoint.hpp"
#include "quadrature.hpp"

namespace bzlab {

class TorusSpline {
  public:
    TorusSpline() = default;
    TorusSpline(int d, int L, int order, std::vector<double> coeffs)
        : d_(d), L_(L), order_(order), coeffs_(std::move(coeffs))
    {
        if (d < 1 || d > 3 || L < 1 || (order != 1 && order != 2)) {
            throw InvalidArgument("invalid spline shape");
        }
        std::size_t n = 1;
        for (int a = 0; a < d; ++a) {
            n *= static_cast<std::size_t>(L);
        }
        if (coeffs_.size() != n) {
            throw InvalidArgument("spline needs L^d coefficients");
        }
    }

    int dim() const { return d_; }
    int L() const { return L_; }
    int order() const { return order_; }
    const std::vector<double>& coeffs() const { return coeffs_; }

    /// Value at any point of R^d (the spline is 1-periodic).
    double operator()(const Coords& x) const
    {
        std::array<std::array<int, 3>, 3> idx{};
        std::array<std::array<double, 3>, 3> wt{};
        const int m = order_ + 1;
        for (int a = 0; a < d_; ++a) {
            const double t = x[a] * L_;
            if (order_ == 1) {
                const double i0 = std::floor(t);
                const double u = t - i0;
                idx[a] = {wrap_index(i0), wrap_index(i0 + 1.0), 0};
                wt[a] = {1.0 - u, u, 0.0};
            } else {
                const double i0 = std::floor(t + 0.5);
                const double u = t - i0;
                idx[a] = {wrap_index(i0 - 1.0), wrap_index(i0), wrap_index(i0 + 1.0)};
                wt[a] = {0.5 * (0.5 - u) * (0.5 - u), 0.75 - u * u, 0.5 * (0.5 + u) * (0.5 + u)};
            }
        }
        if (d_ == 1) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) {
                s += wt[0][i] * coeffs_[idx[0][i]];
            }
            return s;
        }
        if (d_ == 2) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) {
                const std::size_t row = static_cast<std::size_t>(idx[0][i]) * L_;
                double r = 0.0;
                for (int j = 0; j < m; ++j) {
                    r += wt[1][j] * coeffs_[row + idx[1][j]];
                }
                s += wt[0][i] * r;
            }
            return s;
        }
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                const std::size_t row = (static_cast<std::size_t>(idx[0][i]) * L_ + idx[1][j]) * L_;
                double r = 0.0;
                for (int l = 0; l < m; ++l) {
                    r += wt[2][l] * coeffs_[row + idx[2][l]];
                }
                s += wt[0][i] * wt[1][j] * r;
            }
        }
        return s;
    }

    double eval(const FracKPoint& k) const
    {
        if (k.dim() != d_) {
            throw InvalidArgument("k-point dimension does not match the spline");
        }
        Coords x{};
        for (int a = 0; a < d_; ++a) {
            x[a] = k[a];
        }
        return (*this)(x);
    }

    /// Range of the coefficients that act on the axis-aligned cube with lower corner lo and
    /// width w; the spline's values on the cube lie inside it. The cube must not straddle a
    /// breakpoint (nodes for order 1, node midpoints for order 2).
    std::pair<double, double> coefficient_hull(const Coords& lo, double w) const
    {
        std::array<std::array<int, 3>, 3> idx{};
        const int m = order_ + 1;
        for (int a = 0; a < d_; ++a) {
            const double t = (lo[a] + 0.5 * w) * L_;
            const double i0 = order_ == 1 ? std::floor(t) : std::floor(t + 0.5) - 1.0;
            for (int i = 0; i < m; ++i) {
                idx[a][i] = wrap_index(i0 + i);
            }
        }
        double lo_v = std::numeric_limits<double>::infinity();
        double hi_v = -lo_v;
        const int m1 = d_ >= 2 ? m : 1;
        const int m2 = d_ >= 3 ? m : 1;
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m1; ++j) {
                for (int l = 0; l < m2; ++l) {
                    std::size_t flat = static_cast<std::size_t>(idx[0][i]);
                    if (d_ >= 2) {
                        flat = flat * L_ + idx[1][j];
                    }
                    if (d_ >= 3) {
                        flat = flat * L_ + idx[2][l];
                    }
                    lo_v = std::min(lo_v, coeffs_[flat]);
                    hi_v = std::max(hi_v, coeffs_[flat]);
                }
            }
        }
        return {lo_v, hi_v};
    }

  private:
    int wrap_index(double i) const
    {
        const long long n = static_cast<long long>(i) % L_;
        return static_cast<int>(n < 0 ? n + L_ : n);
    }

    int d_ = 1;
    int L_ = 1;
    int order_ = 1;
    std::vector<double> coeffs_{0.0};
};

namespace detail {

/// Solves the periodic system (1/8) x_{i-1} + (6/8) x_i + (1/8) x_{i+1} = r_i in place.
class QuadraticCollocation {
  public:
    explicit QuadraticCollocation(int n) : n_(n), cp_(n), z_(n)
    {
        // Sherman-Morrison on top of a Thomas factorisation of the tridiagonal part.
        const double gamma = -b_;
        diag_.assign(n, b_);
        diag_[0] = b_ - gamma;
        diag_[n - 1] = b_ - a_ * a_ / gamma;
        double denom = diag_[0];
        cp_[0] = a_ / denom;
        inv_.assign(n, 0.0);
        inv_[0] = 1.0 / denom;
        for (int i = 1; i < n; ++i) {
            denom = diag_[i] - a_ * cp_[i - 1];
            inv_[i] = 1.0 / denom;
            cp_[i] = a_ * inv_[i];
        }
        std::vector<double> u(n, 0.0);
        u[0] = gamma;
        u[n - 1] = a_;
        z_ = u;
        thomas(z_);
        gamma_ = gamma;
        zfact_ = 1.0 + z_[0] + a_ * z_[n - 1] / gamma;
    }

    void solve(std::vector<double>& r) const
    {
        thomas(r);
        const double fact = (r[0] + a_ * r[n_ - 1] / gamma_) / zfact_;
        for (int i = 0; i < n_; ++i) {
            r[i] -= fact * z_[i];
        }
    }

  private:
    void thomas(std::vector<double>& r) const
    {
        r[0] *= inv_[0];
        for (int i = 1; i < n_; ++i) {
            r[i] = (r[i] - a_ * r[i - 1]) * inv_[i];
        }
        for (int i = n_ - 2; i >= 0; --i) {
            r[i] -= cp_[i] * r[i + 1];
        }
    }

    static constexpr double a_ = 0.125;
    static constexpr double b_ = 0.75;
    int n_;
    std::vector<double> diag_;
    std::vector<double> cp_;
    std::vector<double> inv_;
    std::vector<double> z_;
    double gamma_ = 0.0;
    double zfact_ = 1.0;
};

} // namespace detail

/// Interpolating spline of the given order through samples on make_grid(d, L) (grid order).
inline TorusSpline fit_spline(int d, int L, const std::vector<double>& samples, int order)
{
    if (order != 1 && order != 2) {
        throw InvalidArgument("spline order must be 1 or 2");
    }
    if (order == 2 && L < 3) {
        throw InvalidArgument("quadratic splines need L >= 3");
    }
    std::vector<double> c = samples;
    if (order == 2 && !c.empty()) {
        // The basis sums to one, so a shift passes straight through; solving for the
        // deviation keeps flat data exactly flat.
        const double shift = c.front();
        for (double& v : c) {
            v -= shift;
        }
        const detail::QuadraticCollocation solver(L);
        std::vector<double> line(static_cast<std::size_t>(L));
        std::size_t total = c.size();
        for (int a = 0; a < d; ++a) {
            std::size_t stride = 1;
            for (int b = a + 1; b < d; ++b) {
                stride *= static_cast<std::size_t>(L);
            }
            const std::size_t block = stride * static_cast<std::size_t>(L);
            for (std::size_t base = 0; base < total; base += block) {
                for (std::size_t off = 0; off < stride; ++off) {
                    for (int i = 0; i < L; ++i) {
                        line[i] = c[base + off + i * stride];
                    }
                    solver.solve(line);
                    for (int i = 0; i < L; ++i) {
                        c[base + off + i * stride] = line[i];
                    }
                }
            }
        }
        for (double& v : c) {
            v += shift;
        }
    }
    TorusSpline s(d, L, order, std::move(c));
    return s;
}

inline double eval_spline(const TorusSpline& s, const FracKPoint& k) { return s.eval(k); }

/// Text format: `d L order band` then one coefficient per line in grid order.
inline void write_spline(std::ostream& out, const TorusSpline& s, int band)
{
    out << s.dim() << ' ' << s.L() << ' ' << s.order() << ' ' << band << '\n';
    const auto old = out.precision(17);
    for (double c : s.coeffs()) {
        out << c << '\n';
    }
    out.precision(old);
}

inline std::pair<TorusSpline, int> read_spline(std::istream& in)
{
    int d = 0;
    int L = 0;
    int order = 0;
    int band = 0;
    if (!(in >> d >> L >> order >> band)) {
        throw ParseError("malformed spline header", 1);
    }
    std::size_t n = 1;
    for (int a = 0; a < d && a < 3; ++a) {
        n *= static_cast<std::size_t>(std::max(L, 0));
    }
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> c[i])) {
            throw ParseError("missing spline coefficient", static_cast<int>(i) + 2);
        }
    }
    return {TorusSpline(d, L, order, std::move(c)), band};
}

} // namespace bzlab
