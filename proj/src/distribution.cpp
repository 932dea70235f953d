#include "pvcsp/distribution.hpp"

#include <algorithm>
#include <map>

namespace pvcsp::morph {

void MapDistribution::canonicalize() {
    std::map<std::vector<int>, Rat> merged;
    for (auto& [table, p] : support)
        merged[table] += p;
    support.clear();
    for (auto& [table, p] : merged) {
        if (p.is_zero())
            continue;
        if (p.sign() < 0)
            throw MalformedDistribution("negative probability");
        support.emplace_back(table, p);
    }
}

void MapDistribution::check_wellformed(int source_size, int target_size) const {
    Rat total(0);
    for (const auto& [table, p] : support) {
        if (p.sign() <= 0)
            throw MalformedDistribution("probabilities must be positive");
        if (static_cast<int>(table.size()) != source_size)
            throw MalformedDistribution("function table is not total");
        for (int t : table)
            if (t < 0 || t >= target_size)
                throw MalformedDistribution("function value out of range");
        total += p;
    }
    if (!unnormalized && total != Rat(1))
        throw MalformedDistribution("probabilities sum to " + total.str() +
                                    ", expected 1");
}

} // namespace pvcsp::morph
