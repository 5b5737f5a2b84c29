#pragma once

// Band-structure models on the Brillouin-zone torus B = [-1/2, 1/2)^d.
//
// Fractional coordinates are used throughout: the real-space cell is [0,1)^d, so a plane wave
// with integer index K is exp(2 pi i K.r) and the kinetic energy of exp(i(k+K).r) is
// (1/2)|2 pi (k + K)|^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "kpoint.hpp"

namespace bzlab {

enum class ModelKind { AnalyticSingleBand, GrapheneTB, PlaneWave };

/// A single band given by a closed-form periodic function of k.
struct AnalyticBand {
    int dim = 2;
    std::function<double(const FracKPoint&)> energy;
};

/// Nearest-neighbour tight-binding graphene with the unit hopping; two bands +-|h(k)|.
struct GrapheneTB {
    /// Off-diagonal entry h(k) = sum_j exp(2 pi i c_j(k)).
    static std::complex<double> offdiagonal(const FracKPoint& k)
    {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        const double k1 = k[0];
        const double k2 = k[1];
        const std::array<double, 3> c{(k1 + k2) / 3.0, (k1 - 2.0 * k2) / 3.0, (-2.0 * k1 + k2) / 3.0};
        std::complex<double> h = 0.0;
        for (double cj : c) {
            h += std::polar(1.0, two_pi * cj);
        }
        return h;
    }
};

using Complex = std::complex<double>;
using IntVec = std::array<int, 3>;

/// H_k = (1/2)(-i grad + k)^2 + V on a fixed plane-wave basis {K : |K| <= basis_radius}.
class PlaneWaveModel {
  public:
    int dim() const { return dim_; }
    double basis_radius() const { return basis_radius_; }
    int basis_size() const { return static_cast<int>(basis_.size()); }
    const std::vector<IntVec>& basis() const { return basis_; }
    const std::map<IntVec, Complex>& potential() const { return potential_; }

    /// Upper bound on sup_r |V(r)|.
    double potential_bound() const
    {
        double s = 0.0;
        for (const auto& [K, v] : potential_) {
            s += std::abs(v);
        }
        return s;
    }

    double kinetic(const FracKPoint& k, const IntVec& K) const
    {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        double q2 = 0.0;
        for (int i = 0; i < dim_; ++i) {
            const double q = two_pi * (k[i] + K[i]);
            q2 += q * q;
        }
        return 0.5 * q2;
    }

    Eigen::MatrixXcd hamiltonian(const FracKPoint& k) const
    {
        if (k.dim() != dim_) {
            throw InvalidArgument("k-point dimension does not match the plane-wave model");
        }
        const int n = basis_size();
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            h(i, i) = kinetic(k, basis_[i]);
            for (int j = 0; j < n; ++j) {
                IntVec diff{};
                for (int a = 0; a < dim_; ++a) {
                    diff[a] = basis_[i][a] - basis_[j][a];
                }
                if (auto it = potential_.find(diff); it != potential_.end()) {
                    h(i, j) += it->second;
                }
            }
        }
        return h;
    }

  private:
    friend PlaneWaveModel build_planewave_model(std::map<IntVec, Complex>, double, int);

    int dim_ = 1;
    double basis_radius_ = 0.0;
    std::vector<IntVec> basis_;
    std::map<IntVec, Complex> potential_;
};

inline IntVec negated(const IntVec& K) { return {-K[0], -K[1], -K[2]}; }

/// Builds the model, mirroring coefficients given on one side of the origin only.
/// Throws InvalidArgument when both K and -K are present but not complex conjugates.
inline PlaneWaveModel build_planewave_model(std::map<IntVec, Complex> coefficients, double basis_radius,
                                            int d)
{
    if (d < 1 || d > 3) {
        throw InvalidArgument("plane-wave model dimension must be 1, 2 or 3");
    }
    if (!(basis_radius > 0.0)) {
        throw InvalidArgument("basis_radius must be positive");
    }
    PlaneWaveModel model;
    model.dim_ = d;
    model.basis_radius_ = basis_radius;

    for (const auto& [K, v] : coefficients) {
        for (int a = d; a < 3; ++a) {
            if (K[a] != 0) {
                throw InvalidArgument("potential index has more components than the model dimension");
            }
        }
        const IntVec mK = negated(K);
        const Complex want = std::conj(v);
        if (auto it = coefficients.find(mK); it != coefficients.end()) {
            const double scale = std::max({1.0, std::abs(v), std::abs(it->second)});
            if (std::abs(it->second - want) > 1e-12 * scale) {
                throw InvalidArgument("potential coefficients violate V(-K) = conj(V(K))");
            }
        }
        model.potential_[K] = v;
        model.potential_[mK] = want;
    }
    // A real potential needs a real mean value.
    if (auto it = model.potential_.find(IntVec{}); it != model.potential_.end()) {
        it->second = it->second.real();
    }

    const int r = static_cast<int>(std::floor(basis_radius));
    const int r1 = d >= 2 ? r : 0;
    const int r2 = d >= 3 ? r : 0;
    const double r2max = basis_radius * basis_radius;
    for (int i = -r; i <= r; ++i) {
        for (int j = -r1; j <= r1; ++j) {
            for (int l = -r2; l <= r2; ++l) {
                if (double(i) * i + double(j) * j + double(l) * l <= r2max) {
                    model.basis_.push_back({i, j, l});
                }
            }
        }
    }
    return model;
}

/// Reads `K1 ... Kd re im` lines; `#` starts a comment.
inline PlaneWaveModel load_planewave_model(const std::string& path, double basis_radius, int d)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open potential file " + path);
    }
    std::map<IntVec, Complex> coeffs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::vector<double> values;
        double x;
        while (fields >> x) {
            values.push_back(x);
        }
        if (!fields.eof()) {
            throw ParseError("non-numeric field", lineno, path);
        }
        if (values.empty()) {
            continue;
        }
        if (static_cast<int>(values.size()) != d + 2) {
            throw ParseError("expected " + std::to_string(d + 2) + " columns", lineno, path);
        }
        IntVec K{};
        for (int a = 0; a < d; ++a) {
            if (values[a] != std::round(values[a])) {
                throw ParseError("reciprocal index must be an integer", lineno, path);
            }
            K[a] = static_cast<int>(values[a]);
        }
        if (coeffs.contains(K)) {
            throw ParseError("duplicate reciprocal index", lineno, path);
        }
        coeffs[K] = Complex(values[d], values[d + 1]);
    }
    return build_planewave_model(std::move(coeffs), basis_radius, d);
}

/// Immutable band model; eval returns band_count() sorted energies.
class BandModel {
  public:
    static BandModel analytic(AnalyticBand band) { return BandModel(std::move(band)); }
    static BandModel graphene() { return BandModel(GrapheneTB{}); }
    static BandModel planewave(PlaneWaveModel model) { return BandModel(std::move(model)); }

    ModelKind kind() const
    {
        switch (impl_.index()) {
        case 0:
            return ModelKind::AnalyticSingleBand;
        case 1:
            return ModelKind::GrapheneTB;
        default:
            return ModelKind::PlaneWave;
        }
    }

    int dim() const
    {
        return std::visit(
            [](const auto& m) -> int {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, GrapheneTB>) {
                    return 2;
                } else if constexpr (std::is_same_v<T, AnalyticBand>) {
                    return m.dim;
                } else {
                    return m.dim();
                }
            },
            impl_);
    }

    int band_count() const
    {
        switch (kind()) {
        case ModelKind::AnalyticSingleBand:
            return 1;
        case ModelKind::GrapheneTB:
            return 2;
        default:
            return std::get<PlaneWaveModel>(impl_).basis_size();
        }
    }

    const PlaneWaveModel* as_planewave() const { return std::get_if<PlaneWaveModel>(&impl_); }

    /// Writes the sorted energies at k into out (size band_count()).
    void eval_into(const FracKPoint& k, std::span<double> out) const
    {
        if (k.dim() != dim()) {
            throw InvalidArgument("k-point dimension " + std::to_string(k.dim()) +
                                  " does not match model dimension " + std::to_string(dim()));
        }
        if (const auto* a = std::get_if<AnalyticBand>(&impl_)) {
            out[0] = a->energy(k);
        } else if (std::holds_alternative<GrapheneTB>(impl_)) {
            const double h = std::abs(GrapheneTB::offdiagonal(k));
            out[0] = -h;
            out[1] = h;
        } else {
            const auto& pw = std::get<PlaneWaveModel>(impl_);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(pw.hamiltonian(k),
                                                                   Eigen::EigenvaluesOnly);
            const auto& ev = solver.eigenvalues();
            for (int n = 0; n < ev.size(); ++n) {
                out[n] = ev[n];
            }
        }
    }

    std::vector<double> eval(const FracKPoint& k) const
    {
        std::vector<double> e(static_cast<std::size_t>(band_count()));
        eval_into(k, e);
        return e;
    }

  private:
    using Impl = std::variant<AnalyticBand, GrapheneTB, PlaneWaveModel>;
    explicit BandModel(Impl impl) : impl_(std::move(impl)) {}
    Impl impl_;
};

inline std::vector<double> eval_bands(const BandModel& model, const FracKPoint& k) { return model.eval(k); }

/// Energies and orthonormal eigenvectors (columns, over the plane-wave basis) at one k.
struct BlochStates {
    Eigen::VectorXd energies;
    Eigen::MatrixXcd states;
};

inline BlochStates eval_states(const BandModel& model, const FracKPoint& k)
{
    const auto* pw = model.as_planewave();
    if (pw == nullptr) {
        throw UnsupportedOperation("eval_states requires a plane-wave model");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(pw->hamiltonian(k));
    if (solver.info() != Eigen::Success) {
        throw NumericalError("Hermitian eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

// The two-dimensional test bands.

/// 3 cos(2 pi k1) cos(2 pi k2) + sin(4 pi k1) cos(4 pi k2)
inline double cosine_band(const FracKPoint& k)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return 3.0 * std::cos(two_pi * k[0]) * std::cos(two_pi * k[1]) +
           std::sin(2.0 * two_pi * k[0]) * std::cos(2.0 * two_pi * k[1]);
}

inline BandModel cosine_band_model() { return BandModel::analytic({2, cosine_band}); }

inline BandModel constant_band_model(double value, int dim = 2)
{
    return BandModel::analytic({dim, [value](const FracKPoint&) { return value; }});
}

} // namespace bzlab
