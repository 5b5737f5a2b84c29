#pragma once

/** \file smearing.hpp
 *
 *  \brief Smearing (occupation) functions f, their mollifiers delta = -f' and entropy kernels s
 *         with s' = x delta, all in dimensionless form x = (energy - level) / sigma.
 */

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"

namespace bzlab {

/// Dense polynomial, coefficients in ascending powers.
class Polynomial {
  public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> c) : c_(std::move(c)) {}

    double operator()(double x) const
    {
        double r = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            r = r * x + *it;
        }
        return r;
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    double coeff(int i) const { return i < static_cast<int>(c_.size()) ? c_[i] : 0.0; }
    const std::vector<double>& coeffs() const { return c_; }

    Polynomial derivative() const
    {
        if (c_.size() <= 1) {
            return Polynomial({0.0});
        }
        std::vector<double> d(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) {
            d[i - 1] = static_cast<double>(i) * c_[i];
        }
        return Polynomial(std::move(d));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b)
    {
        std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = a.coeff(static_cast<int>(i)) + b.coeff(static_cast<int>(i));
        }
        return Polynomial(std::move(r));
    }

    friend Polynomial operator*(double s, const Polynomial& p)
    {
        std::vector<double> r = p.c_;
        for (double& x : r) {
            x *= s;
        }
        return Polynomial(std::move(r));
    }

    /// Multiplication by x.
    Polynomial shifted_up() const
    {
        std::vector<double> r(c_.size() + 1, 0.0);
        std::copy(c_.begin(), c_.end(), r.begin() + 1);
        return Polynomial(std::move(r));
    }

  private:
    std::vector<double> c_{0.0};
};

/// Physicists' Hermite polynomial through H_{n+1} = 2x H_n - H_n'.
inline Polynomial hermite(int n)
{
    Polynomial h({1.0});
    for (int i = 0; i < n; ++i) {
        h = 2.0 * h.shifted_up() + (-1.0) * h.derivative();
    }
    return h;
}

/// Returns Q with Q' - 2xQ = P, i.e. (Q e^{-x^2})' = P e^{-x^2}. Requires int P e^{-x^2} = 0,
/// in which case Q e^{-x^2} is the antiderivative of P e^{-x^2} that vanishes at +-infinity.
inline Polynomial gaussian_antiderivative(const Polynomial& p)
{
    const int m = p.degree();
    if (m < 1) {
        return Polynomial({0.0});
    }
    std::vector<double> q(static_cast<std::size_t>(m) + 2, 0.0);
    for (int j = m; j >= 1; --j) {
        q[j - 1] = ((j + 1) * q[j + 1] - p.coeff(j)) / 2.0;
    }
    q.resize(static_cast<std::size_t>(m));
    return Polynomial(std::move(q));
}

enum class SmearingKind { FermiDirac, Gaussian, MethfesselPaxton, Cold };

/// Largest cold-smearing parameter keeping f >= 0 on [-8, 8] (scanned at step 1e-3).
inline constexpr double default_cold_a = 2.3107950626691944;

class SmearingScheme {
  public:
    static SmearingScheme fermi_dirac() { return SmearingScheme(SmearingKind::FermiDirac, 0, 0.0); }
    static SmearingScheme gaussian() { return SmearingScheme(SmearingKind::Gaussian, 0, 0.0); }
    static SmearingScheme methfessel_paxton(int n)
    {
        if (n < 0 || n > 3) {
            throw InvalidArgument("Methfessel-Paxton order must be in 0..3");
        }
        return SmearingScheme(SmearingKind::MethfesselPaxton, n, 0.0);
    }
    static SmearingScheme cold(double a = default_cold_a) { return SmearingScheme(SmearingKind::Cold, 0, a); }

    /// Names: fd, gauss, mp0..mp3, cold.
    static SmearingScheme parse(const std::string& name, std::optional<double> cold_a = std::nullopt)
    {
        if (name == "fd") {
            return fermi_dirac();
        }
        if (name == "gauss") {
            return gaussian();
        }
        if (name == "cold") {
            return cold(cold_a.value_or(default_cold_a));
        }
        if (name.size() == 3 && name.starts_with("mp") && name[2] >= '0' && name[2] <= '3') {
            return methfessel_paxton(name[2] - '0');
        }
        throw InvalidArgument("unknown smearing scheme '" + name + "' (expected fd, gauss, mp1, mp2, cold)");
    }

    SmearingKind kind() const { return kind_; }
    int mp_order() const { return mp_n_; }
    double cold_a() const { return cold_a_; }

    std::string name() const
    {
        switch (kind_) {
        case SmearingKind::FermiDirac:
            return "fd";
        case SmearingKind::Gaussian:
            return "gauss";
        case SmearingKind::MethfesselPaxton:
            return "mp" + std::to_string(mp_n_);
        default:
            return "cold";
        }
    }

    int declared_order() const
    {
        switch (kind_) {
        case SmearingKind::FermiDirac:
        case SmearingKind::Gaussian:
            return 1;
        case SmearingKind::MethfesselPaxton:
            return 2 * mp_n_ + 1;
        default:
            return 3;
        }
    }

    /// f(x); tends to 1 as x -> -inf and to 0 as x -> +inf.
    double occupation(double x) const
    {
        if (kind_ == SmearingKind::FermiDirac) {
            if (x > 0.0) {
                const double t = std::exp(-x);
                return t / (1.0 + t);
            }
            return 1.0 / (1.0 + std::exp(x));
        }
        return 0.5 * std::erfc(x) + occ_poly_(x) * gauss_(x);
    }

    /// f(x) - 1{x < 0}: the occupation relative to the step, accurate in both tails. For the
    /// schemes with f(x) + f(-x) = 1 this is odd in x bit for bit.
    double occupation_excess(double x) const
    {
        if (x >= 0.0) {
            return occupation(x);
        }
        if (kind_ == SmearingKind::FermiDirac) {
            return -occupation(-x);
        }
        return -0.5 * std::erfc(-x) + occ_poly_(x) * gauss_(x);
    }

    /// delta(x) = -f'(x).
    double delta(double x) const
    {
        if (kind_ == SmearingKind::FermiDirac) {
            const double t = std::exp(-std::abs(x));
            return t / ((1.0 + t) * (1.0 + t));
        }
        return delta_poly_(x) * gauss_(x);
    }

    /// Schwartz kernel s with s'(x) = x delta(x).
    double entropy(double x) const
    {
        if (kind_ == SmearingKind::FermiDirac) {
            // s = f ln f + (1-f) ln(1-f), written on the small-occupation branch.
            const double ax = std::abs(x);
            const double t = std::exp(-ax);
            const double f = t / (1.0 + t);
            return -f * ax - std::log1p(t);
        }
        return entropy_poly_(x) * gauss_(x);
    }

    /// Half-width of the interval outside of which |f - step|, |delta| and |s| are negligible.
    double tail_cutoff() const { return kind_ == SmearingKind::FermiDirac ? 120.0 : 14.0; }

    const Polynomial& delta_polynomial() const { return delta_poly_; }

  private:
    SmearingScheme(SmearingKind kind, int n, double a) : kind_(kind), mp_n_(n), cold_a_(a)
    {
        const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
        switch (kind_) {
        case SmearingKind::FermiDirac:
            return;
        case SmearingKind::Gaussian:
            delta_poly_ = Polynomial({inv_sqrt_pi});
            break;
        case SmearingKind::MethfesselPaxton: {
            // delta = sum_{m<=N} A_m H_{2m} e^{-x^2}, A_m = (-1)^m / (m! 4^m sqrt(pi)).
            Polynomial p({0.0});
            double a_m = inv_sqrt_pi;
            for (int m = 0; m <= n; ++m) {
                if (m > 0) {
                    a_m *= -1.0 / (4.0 * m);
                }
                p = p + a_m * hermite(2 * m);
            }
            delta_poly_ = p;
            break;
        }
        case SmearingKind::Cold:
            // delta = (a x^3 - x^2 - 3/2 a x + 3/2) e^{-x^2} / sqrt(pi)
            delta_poly_ = inv_sqrt_pi * Polynomial({1.5, -1.5 * a, -1.0, a});
            break;
        }
        // f = erfc/2 + R e^{-x^2} with (R e^{-x^2})' = -(delta - e^{-x^2}/sqrt(pi)).
        occ_poly_ = gaussian_antiderivative((-1.0) * (delta_poly_ + Polynomial({-inv_sqrt_pi})));
        entropy_poly_ = gaussian_antiderivative(delta_poly_.shifted_up());
    }

    static double gauss_(double x) { return std::exp(-x * x); }

    SmearingKind kind_;
    int mp_n_;
    double cold_a_;
    Polynomial delta_poly_;
    Polynomial occ_poly_;
    Polynomial entropy_poly_;
};

/// M_n = int x^n delta(x) dx by adaptive Gauss-Kronrod on unit panels over [-T, T].
inline double moment(const SmearingScheme& scheme, int n)
{
    if (n < 0 || n > 12) {
        throw InvalidArgument("moment order must be in 0..12");
    }
    const double t = scheme.tail_cutoff();
    const auto integrand = [&](double x) { return std::pow(x, n) * scheme.delta(x); };
    const int panels = static_cast<int>(t);
    double total = 0.0;
    // Symmetric panel pairs keep odd moments of even kernels at round-off level.
    for (int i = panels - 1; i >= 0; --i) {
        const double a = static_cast<double>(i) * t / panels;
        const double b = static_cast<double>(i + 1) * t / panels;
        const double right = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, a, b, 10, 1e-15);
        const double left = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, -b, -a, 10, 1e-15);
        total += right + left;
    }
    return total;
}

struct OrderReport {
    std::string scheme;
    int declared = 0;
    int verified = 0;
    std::array<double, 10> moments{};
    bool consistent() const { return declared == verified; }
};

/// Computes M_0..M_9 and the largest p <= 8 with M_0 = 1 and M_1..M_p = 0 (tolerance 1e-8).
inline OrderReport order_report(const SmearingScheme& scheme)
{
    constexpr double tol = 1e-8;
    OrderReport r;
    r.scheme = scheme.name();
    r.declared = scheme.declared_order();
    for (int n = 0; n < 10; ++n) {
        r.moments[n] = moment(scheme, n);
    }
    if (std::abs(r.moments[0] - 1.0) > tol) {
        r.verified = 0;
        return r;
    }
    int p = 0;
    while (p < 8 && std::abs(r.moments[p + 1]) <= tol) {
        ++p;
    }
    r.verified = p;
    return r;
}

/// Throws ConsistencyError when the measured order differs from the declared one.
inline int validate_order(const SmearingScheme& scheme)
{
    const OrderReport r = order_report(scheme);
    if (!r.consistent()) {
        throw ConsistencyError("scheme " + r.scheme + " declares order " + std::to_string(r.declared) +
                               " but its moments give order " + std::to_string(r.verified));
    }
    return r.verified;
}

} // namespace bzlab
