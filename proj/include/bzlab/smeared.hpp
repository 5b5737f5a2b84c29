#pragma once

// Smearing-method observables on a uniform grid B_L:
//   N(eps)  = (1/L^d) sum_k sum_n f((e_nk - eps)/sigma)
//   E       = (1/L^d) sum_k sum_n e_nk f((e_nk - eF)/sigma)
//   S       = (1/L^d) sum_k sum_n s((e_nk - eF)/sigma)
//   D(eps)  = (1/(sigma L^d)) sum_k sum_n delta((e_nk - eps)/sigma)

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "bands.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "sampling.hpp"
#include "smearing.hpp"

namespace bzlab {

/// Occupations, deltas and entropy terms vanish beyond this many widths from the level.
inline constexpr double smearing_tail = 40.0;

/// Sign of the entropy correction in extrapolated_energy. Fixed by the calibration fixture in
/// tests/test_extrapolation_sign.cpp: with this sign the sigma^(p+1) term of E cancels.
inline constexpr double extrapolation_sign = +1.0;

namespace detail {
inline void check_sigma(double sigma)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidArgument("smearing width sigma must be positive");
    }
}

/// (1/L^d) sum over points and bands of term(x, e) with x = (e - level)/sigma, skipping the
/// bands above level + tail * sigma.
template <class Term>
double band_sum(const SampledBands& bands, double sigma, double level, Term&& term)
{
    const int nb = bands.band_count();
    const double s = deterministic_sum(bands.grid().size(), [&](std::size_t i) {
        const auto e = bands.energies_at(i);
        double acc = 0.0;
        for (int n = 0; n < nb; ++n) {
            const double x = (e[n] - level) / sigma;
            if (x > smearing_tail) {
                break;
            }
            acc += term(x, e[n]);
        }
        return acc;
    });
    return s * bands.grid().weight();
}
} // namespace detail

inline double smeared_counting(const SampledBands& bands, const SmearingScheme& scheme, double sigma, double level)
{
    detail::check_sigma(sigma);
    return detail::band_sum(bands, sigma, level, [&](double x, double) { return scheme.occupation(x); });
}

namespace detail {
/// Number of (k, n) pairs with e_nk < level.
inline std::size_t count_below(const SampledBands& bands, double level)
{
    const std::size_t n = bands.grid().size();
    const int nb = bands.band_count();
    const std::size_t n_chunks = (n + reduction_chunk - 1) / reduction_chunk;
    std::vector<std::size_t> partial(n_chunks, 0);
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        std::size_t acc = 0;
        for (std::size_t i = c * reduction_chunk; i < std::min(n, (c + 1) * reduction_chunk); ++i) {
            const auto e = bands.energies_at(i);
            for (int b = 0; b < nb && e[b] < level; ++b) {
                ++acc;
            }
        }
        partial[c] = acc;
    });
    std::size_t total = 0;
    for (auto p : partial) {
        total += p;
    }
    return total;
}
} // namespace detail

/// N(level) - target, evaluated as (states below level)/L^d - target plus the smooth excess
/// over the step. Near a gap both parts are small, so the residual keeps its relative accuracy
/// and, for symmetric spectra and schemes, its exact antisymmetry.
inline double smeared_counting_residual(const SampledBands& bands, const SmearingScheme& scheme, double sigma,
                                        double level, double target)
{
    detail::check_sigma(sigma);
    const double below = static_cast<double>(detail::count_below(bands, level)) * bands.grid().weight() - target;
    const double excess =
        detail::band_sum(bands, sigma, level, [&](double x, double) {
            return x < -smearing_tail ? 0.0 : scheme.occupation_excess(x);
        });
    return below + excess;
}

/// Fermi level with N(eF) = n_electrons, by bisection on an expanded bracket.
inline double solve_fermi(const SampledBands& bands, const SmearingScheme& scheme, double sigma, double n_electrons)
{
    detail::check_sigma(sigma);
    if (!(n_electrons > 0.0) || !(n_electrons < bands.band_count())) {
        throw InvalidArgument("electron count must lie strictly between 0 and the number of bands");
    }
    const double lo = bands.global_min() - 10.0 * sigma;
    const double hi = bands.global_max() + 10.0 * sigma;
    auto count = [&](double e) { return std::pair{smeared_counting_residual(bands, scheme, sigma, e, n_electrons), 0.0}; };
    return solve_level(count, 0.0, lo, hi, 1e-13).level;
}

inline double smeared_energy(const SampledBands& bands, const SmearingScheme& scheme, double sigma, double fermi)
{
    detail::check_sigma(sigma);
    return detail::band_sum(bands, sigma, fermi, [&](double x, double e) { return e * scheme.occupation(x); });
}

inline double smeared_entropy(const SampledBands& bands, const SmearingScheme& scheme, double sigma, double fermi)
{
    detail::check_sigma(sigma);
    return detail::band_sum(bands, sigma, fermi, [&](double x, double) {
        return x < -smearing_tail ? 0.0 : scheme.entropy(x);
    });
}

/// Smeared density of states (states per energy per cell).
inline double smeared_dos(const SampledBands& bands, const SmearingScheme& scheme, double sigma, double level)
{
    detail::check_sigma(sigma);
    return detail::band_sum(bands, sigma, level, [&](double x, double) {
        return x < -smearing_tail ? 0.0 : scheme.delta(x);
    }) / sigma;
}

/// E + sign * sigma * p/(p+1) * S, which removes the leading sigma^(p+1) term of E.
inline double extrapolated_energy(double energy, double entropy, double sigma, int order)
{
    if (order < 1) {
        throw InvalidArgument("smearing order must be at least 1");
    }
    return energy + extrapolation_sign * sigma * (static_cast<double>(order) / (order + 1)) * entropy;
}

struct SmearedResult {
    double fermi_level = 0.0;
    double electron_count = 0.0;
    double energy = 0.0;
    double entropy = 0.0;
    double extrapolated_energy = 0.0;
    double sigma = 0.0;
    int L = 0;
};

inline SmearedResult smeared_observables(const SampledBands& bands, const SmearingScheme& scheme, double sigma,
                                         double n_electrons)
{
    SmearedResult r;
    r.sigma = sigma;
    r.L = bands.grid().L();
    r.electron_count = n_electrons;
    r.fermi_level = solve_fermi(bands, scheme, sigma, n_electrons);
    r.energy = smeared_energy(bands, scheme, sigma, r.fermi_level);
    r.entropy = smeared_entropy(bands, scheme, sigma, r.fermi_level);
    r.extrapolated_energy = extrapolated_energy(r.energy, r.entropy, sigma, scheme.declared_order());
    return r;
}

// Model + grid conveniences; each samples the bands afresh.

inline double smeared_counting(const BandModel& model, const SmearingScheme& scheme, const UniformGrid& grid,
                               double sigma, double level)
{
    return smeared_counting(SampledBands(model, grid), scheme, sigma, level);
}

inline double solve_fermi(const BandModel& model, const SmearingScheme& scheme, const UniformGrid& grid,
                          double sigma, double n_electrons)
{
    return solve_fermi(SampledBands(model, grid), scheme, sigma, n_electrons);
}

// ---------------------------------------------------------------------------------------------
// Real-space density

struct RealSpaceDensity {
    std::vector<int> shape;
    /// Row-major, last index fastest.
    std::vector<double> values;
    double cell_volume = 1.0;

    double mean() const
    {
        CompensatedSum s;
        for (double v : values) {
            s.add(v);
        }
        return s.value() / static_cast<double>(values.size());
    }
    /// Integral of the density over the cell.
    double total() const { return mean() * cell_volume; }
};

/// rho(r) = (1/L^d) sum_k sum_n f((e_nk - eF)/sigma) |u_nk(r)|^2 on a grid of shape[a] points per
/// axis (r_j = j / shape[a]); |u|^2 is evaluated by a direct Fourier sum over the basis.
inline RealSpaceDensity smeared_density(const BandModel& model, const SmearingScheme& scheme,
                                        const UniformGrid& grid, double sigma, double fermi,
                                        const std::vector<int>& shape)
{
    detail::check_sigma(sigma);
    const auto* pw = model.as_planewave();
    if (pw == nullptr) {
        throw UnsupportedOperation("smeared_density requires a plane-wave model");
    }
    const int d = pw->dim();
    if (static_cast<int>(shape.size()) != d) {
        throw InvalidArgument("density grid shape must have one entry per dimension");
    }
    const int kmax = static_cast<int>(std::floor(pw->basis_radius()));
    for (int m : shape) {
        if (m < 2 * kmax + 1) {
            throw InvalidArgument("density grid does not resolve the highest basis frequency (need >= " +
                                  std::to_string(2 * kmax + 1) + " points per axis)");
        }
    }
    std::size_t npts = 1;
    for (int m : shape) {
        npts *= static_cast<std::size_t>(m);
    }
    const auto& basis = pw->basis();
    const int nb = pw->basis_size();

    // phase[a][j][K + kmax] = exp(2 pi i K j / M_a)
    std::vector<std::vector<std::vector<Complex>>> phase(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        phase[a].assign(shape[a], std::vector<Complex>(2 * kmax + 1));
        for (int j = 0; j < shape[a]; ++j) {
            for (int K = -kmax; K <= kmax; ++K) {
                const double arg = 2.0 * std::numbers::pi * static_cast<double>(K) * j / shape[a];
                phase[a][j][K + kmax] = std::polar(1.0, arg);
            }
        }
    }

    const std::size_t nk = grid.size();
    constexpr std::size_t k_chunk = 4;
    const std::size_t n_chunks = (nk + k_chunk - 1) / k_chunk;
    std::vector<std::vector<double>> partial(n_chunks);
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        std::vector<double> acc(npts, 0.0);
        std::vector<Complex> psi(npts);
        for (std::size_t ik = c * k_chunk; ik < std::min(nk, (c + 1) * k_chunk); ++ik) {
            const BlochStates st = eval_states(model, grid.point(ik));
            for (int n = 0; n < nb; ++n) {
                const double x = (st.energies[n] - fermi) / sigma;
                if (x > smearing_tail) {
                    break;
                }
                const double occ = scheme.occupation(x);
                std::fill(psi.begin(), psi.end(), Complex{});
                for (std::size_t r = 0; r < npts; ++r) {
                    std::array<int, 3> j{};
                    std::size_t rem = r;
                    for (int a = d - 1; a >= 0; --a) {
                        j[a] = static_cast<int>(rem % static_cast<std::size_t>(shape[a]));
                        rem /= static_cast<std::size_t>(shape[a]);
                    }
                    Complex s{};
                    for (int b = 0; b < nb; ++b) {
                        Complex ph = phase[0][j[0]][basis[b][0] + kmax];
                        for (int a = 1; a < d; ++a) {
                            ph *= phase[a][j[a]][basis[b][a] + kmax];
                        }
                        s += st.states(b, n) * ph;
                    }
                    acc[r] += occ * std::norm(s);
                }
            }
        }
        partial[c] = std::move(acc);
    });
    RealSpaceDensity rho;
    rho.shape = shape;
    rho.values.assign(npts, 0.0);
    for (const auto& p : partial) {
        for (std::size_t r = 0; r < npts; ++r) {
            rho.values[r] += p[r];
        }
    }
    for (double& v : rho.values) {
        v *= grid.weight();
    }
    return rho;
}

/// CSV with header `r1,...,rd,rho`, row-major over the real-space grid.
inline void write_density_csv(const RealSpaceDensity& rho, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    const int d = static_cast<int>(rho.shape.size());
    for (int a = 0; a < d; ++a) {
        out << 'r' << (a + 1) << ',';
    }
    out << "rho\n";
    out.precision(17);
    for (std::size_t r = 0; r < rho.values.size(); ++r) {
        std::size_t rem = r;
        std::array<int, 3> j{};
        for (int a = d - 1; a >= 0; --a) {
            j[a] = static_cast<int>(rem % static_cast<std::size_t>(rho.shape[a]));
            rem /= static_cast<std::size_t>(rho.shape[a]);
        }
        for (int a = 0; a < d; ++a) {
            out << static_cast<double>(j[a]) / rho.shape[a] << ',';
        }
        out << rho.values[r] << '\n';
    }
    if (!out) {
        throw IoError("failed writing " + path);
    }
}

} // namespace bzlab
