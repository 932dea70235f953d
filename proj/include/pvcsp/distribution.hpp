#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pvcsp/error.hpp"
#include "pvcsp/rat.hpp"

namespace pvcsp::morph {

enum class Direction { FractionalHom, DualFractionalHom };

// A probability distribution over total maps between two finite universes.
// Each support entry is a full function table (source index -> target index)
// with a strictly positive probability; probabilities sum to exactly 1 unless
// `unnormalized` is set (see frac_hom's renormalization policy).
struct MapDistribution {
    Direction direction = Direction::FractionalHom;
    std::vector<std::pair<std::vector<int>, Rat>> support;
    bool unnormalized = false;

    Rat total_mass() const {
        Rat s(0);
        for (const auto& [table, p] : support)
            s += p;
        return s;
    }

    // Merges duplicate tables, drops zero-mass entries, sorts by table.
    void canonicalize();

    void check_wellformed(int source_size, int target_size) const;
};

} // namespace pvcsp::morph
