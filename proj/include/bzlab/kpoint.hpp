#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>

#include "error.hpp"

namespace bzlab {

/// Maps a fractional coordinate onto the half-open interval [-1/2, 1/2).
inline double wrap_coordinate(double x)
{
    double y = x - std::floor(x + 0.5);
    if (y >= 0.5) {
        y -= 1.0;
    }
    if (y < -0.5) {
        y += 1.0;
    }
    return y;
}

/// A point of the Brillouin zone torus in fractional reciprocal coordinates.
///
/// Coordinates are always stored wrapped to [-1/2, 1/2)^d, so two points that differ by a
/// reciprocal lattice vector compare equal.
class FracKPoint {
  public:
    static constexpr int max_dim = 3;

    FracKPoint() = default;

    explicit FracKPoint(std::span<const double> coords) : dim_(static_cast<int>(coords.size()))
    {
        if (dim_ < 1 || dim_ > max_dim) {
            throw InvalidArgument("k-point dimension must be 1, 2 or 3");
        }
        for (int i = 0; i < dim_; ++i) {
            c_[i] = wrap_coordinate(coords[i]);
        }
    }

    FracKPoint(std::initializer_list<double> coords)
        : FracKPoint(std::span<const double>(coords.begin(), coords.size()))
    {
    }

    int dim() const { return dim_; }
    double operator[](int i) const { return c_[i]; }
    std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

    /// Shift by an integer (reciprocal lattice) vector; the result is identical after wrapping.
    FracKPoint shifted(std::span<const int> shift) const
    {
        std::array<double, max_dim> c = c_;
        for (int i = 0; i < dim_; ++i) {
            c[i] += shift[i];
        }
        return FracKPoint(std::span<const double>(c.data(), dim_));
    }

    friend bool operator==(const FracKPoint& a, const FracKPoint& b)
    {
        if (a.dim_ != b.dim_) {
            return false;
        }
        for (int i = 0; i < a.dim_; ++i) {
            if (a.c_[i] != b.c_[i]) {
                return false;
            }
        }
        return true;
    }

  private:
    int dim_ = 0;
    std::array<double, max_dim> c_{};
};

} // namespace bzlab
