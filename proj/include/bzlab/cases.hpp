#pragma once

#include <string>
#include <vector>

#include "bands.hpp"
#include "error.hpp"

namespace bzlab {

/// A named test system: a band model and its electron count per cell.
struct TestCase {
    std::string id;
    BandModel model;
    double electrons = 1.0;
};

/// Known ids: case1 (cosine band, N = 0.85), case2 (same band, N = 0.5, saddle points at the
/// Fermi level), graphene (alias case3, N = 1, Dirac points at the Fermi level).
inline TestCase make_case(const std::string& id)
{
    if (id == "case1") {
        return {id, cosine_band_model(), 0.85};
    }
    if (id == "case2") {
        return {id, cosine_band_model(), 0.5};
    }
    if (id == "graphene" || id == "case3") {
        return {"graphene", BandModel::graphene(), 1.0};
    }
    throw InvalidArgument("unknown case '" + id + "' (expected case1, case2, graphene)");
}

inline std::vector<std::string> case_ids() { return {"case1", "case2", "graphene"}; }

} // namespace bzlab
