#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "bands.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace bzlab {

/// Band energies of a model on every point of a uniform grid (point-major, bands ascending).
class SampledBands {
  public:
    SampledBands(const BandModel& model, const UniformGrid& grid)
        : grid_(grid), nbands_(model.band_count()),
          energies_(grid.size() * static_cast<std::size_t>(nbands_))
    {
        if (model.dim() != grid.dim()) {
            throw InvalidArgument("grid dimension does not match model dimension");
        }
        parallel_for_each_index(
            grid.size(),
            [&](std::size_t i) {
                model.eval_into(grid.point(i), std::span<double>(energies_.data() + i * nbands_, nbands_));
            },
            model.kind() == ModelKind::PlaneWave ? 8 : reduction_chunk);
        min_.assign(nbands_, std::numeric_limits<double>::infinity());
        max_.assign(nbands_, -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            for (int n = 0; n < nbands_; ++n) {
                const double e = energy(i, n);
                if (!std::isfinite(e)) {
                    throw NonFiniteError("band energy is not finite at k = " + describe(grid.point(i)));
                }
                min_[n] = std::min(min_[n], e);
                max_[n] = std::max(max_[n], e);
            }
        }
    }

    const UniformGrid& grid() const { return grid_; }
    int band_count() const { return nbands_; }
    double energy(std::size_t point, int band) const { return energies_[point * nbands_ + band]; }
    std::span<const double> energies_at(std::size_t point) const
    {
        return {energies_.data() + point * nbands_, static_cast<std::size_t>(nbands_)};
    }
    double band_min(int n) const { return min_[n]; }
    double band_max(int n) const { return max_[n]; }
    double global_min() const { return *std::min_element(min_.begin(), min_.end()); }
    double global_max() const { return *std::max_element(max_.begin(), max_.end()); }

    /// Samples of one band in grid order.
    std::vector<double> band_values(int n) const
    {
        std::vector<double> v(grid_.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = energy(i, n);
        }
        return v;
    }

  private:
    UniformGrid grid_;
    int nbands_;
    std::vector<double> energies_;
    std::vector<double> min_;
    std::vector<double> max_;
};

} // namespace bzlab
