#pragma once

#include <string>
#include <vector>

#include "pvcsp/distribution.hpp"
#include "pvcsp/model.hpp"
#include "pvcsp/relax.hpp"

namespace pvcsp::decomp {

// The decomposition of an optimal SA1 solution: Y1 is a scaled disjoint
// union of m copies of I, Y2 its twisted version, h an assignment Y2 -> A
// whose value equals the SA1 optimum. Universe element (k, v) has index
// k * |I| + v.
struct Decomposition {
    long m = 1;
    model::ValuedStructure y1;
    model::ValuedStructure y2;
    std::vector<int> h;                          // empty when SA1 is infeasible
    std::vector<std::vector<std::vector<int>>> rho; // per constraint, per position
    morph::MapDistribution forward;              // I ->df Y1
    bool sa1_feasible = true;
    ExtRat sa1_value;
};

Decomposition decompose(const model::ValuedStructure& inst,
                        const model::ValuedStructure& tmpl);

struct VerificationReport {
    bool dual_ok = false;   // I ->df Y1 via the uniform distribution
    bool equiv_ok = false;  // Y1 ==_1 Y2
    bool value_ok = false;  // Val(Y2, A, h) = Opt^{SA1}(I, A) exactly
    ExtRat h_value;
    ExtRat sa1_value;

    bool ok() const { return dual_ok && equiv_ok && value_ok; }
    std::string first_failure() const;
};

VerificationReport verify_decomposition(const model::ValuedStructure& inst,
                                        const model::ValuedStructure& tmpl,
                                        const Decomposition& d);

} // namespace pvcsp::decomp
