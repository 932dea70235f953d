#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "pvcsp/distribution.hpp"
#include "pvcsp/model.hpp"

namespace pvcsp::morph {

// These LPs grow doubly fast; failing loudly beats thrashing.
struct Budget {
    std::uint64_t max_function_tables = std::uint64_t(1) << 20;
    int max_power_universe = 20;
    std::uint64_t max_tuple_space = 1'000'000;
    std::uint64_t opt_budget = model::kDefaultOptBudget;
};

// Infeasibility witness extracted from the Farkas certificate: an instance
// over the source universe whose optimum is strictly cheaper in the source
// than in the target, confirmed by the brute-force oracle.
struct Counterexample {
    model::ValuedStructure instance;
    ExtRat opt_source;
    ExtRat opt_target;
};

using FracHomResult = std::variant<MapDistribution, Counterexample>;

FracHomResult frac_hom(const model::ValuedStructure& source,
                       const model::ValuedStructure& target, const Budget& budget = {});

bool verify_frac_hom(const model::ValuedStructure& source,
                     const model::ValuedStructure& target, const MapDistribution& mu);

std::optional<MapDistribution> dual_frac_hom(const model::ValuedStructure& inst,
                                             const model::ValuedStructure& target,
                                             const Budget& budget = {});

bool verify_dual_frac_hom(const model::ValuedStructure& inst,
                          const model::ValuedStructure& target,
                          const MapDistribution& eta);

// LP^m: universe = size-m multisets over the base universe; each cost is the
// minimum average over synchronized arrangements, the first coordinate tuple
// pinned to sorted order.
struct PowerStructure {
    model::ValuedStructure structure;
    int m = 1;
    std::vector<std::vector<int>> universe; // sorted m-tuples of base indices
};

PowerStructure power_lp(const model::ValuedStructure& base, int m,
                        const Budget& budget = {});

// Expands a function on multisets to the symmetric m-ary operation it encodes.
std::vector<int> expand_power_table(const PowerStructure& power,
                                    const std::vector<int>& table,
                                    const std::vector<int>& args);

struct SymPolyResult {
    FracHomResult result;
    // Set for counterexamples: Opt^BLP(I*, A), completing the chain
    // Opt(I*, B) > Opt(I*, LP^m(A)) >= Opt^BLP(I*, A).
    std::optional<ExtRat> blp_value;
};

SymPolyResult sym_frac_polymorphism(const model::ValuedStructure& tmpl_a,
                                    const model::ValuedStructure& tmpl_b, int m,
                                    const Budget& budget = {});

struct PowerConsistencyReport {
    bool skipped = false;
    std::string note;
    Rat blp_value;
    long m_star = 1;
    std::vector<std::pair<int, ExtRat>> power_values;
    bool equality_at_m_star = false;
};

PowerConsistencyReport blp_power_consistency(const model::ValuedStructure& inst,
                                             const model::ValuedStructure& tmpl,
                                             const Budget& budget = {});

// All total maps source -> target in lexicographic table order; throws
// BudgetExceeded past the cap.
std::vector<std::vector<int>> enumerate_functions(int source_size, int target_size,
                                                  std::uint64_t cap);

} // namespace pvcsp::morph
