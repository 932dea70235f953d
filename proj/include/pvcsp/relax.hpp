#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pvcsp/lp.hpp"
#include "pvcsp/model.hpp"
#include "pvcsp/wl.hpp"

namespace pvcsp::relax {

enum class Flavor { Blp, Sa1, Sa1Reduced };

// A built relaxation. Tuples with infinite template cost, and (for the SA1
// flavors) tuples clashing with a repeated variable, never get LP variables:
// their zero rows are applied by symbolic elimination, so the LP stays
// finite-valued.
struct RelaxationProgram {
    Flavor flavor = Flavor::Blp;
    lp::LinearProgram program;
    std::vector<model::Constraint> cons;

    // Full flavors: p_v(a) and p_{R(v)}(a) columns.
    std::map<std::pair<int, int>, int> unary_var;               // (v, a)
    std::map<std::pair<int, std::vector<int>>, int> joint_var;  // (ci, a-tuple)

    // Reduced flavor bookkeeping (classes sorted by canonical digest).
    struct ClassInfo {
        std::string digest;
        std::vector<int> members; // variable indices / constraint indices
        int representative = 0;   // lowest member
    };
    std::vector<ClassInfo> var_classes;
    std::vector<ClassInfo> con_classes;
    std::vector<int> var_class_of; // variable index -> class
    std::vector<int> con_class_of; // constraint index -> class
    std::map<std::pair<int, int>, int> reduced_unary_var;              // (class, a)
    std::map<std::pair<int, std::vector<int>>, int> reduced_joint_var; // (class, t)
};

// Objective (*) under rows (2)-(5); the Sa1 flavor adds rows (6).
RelaxationProgram build_relaxation(const model::ValuedStructure& inst,
                                   const model::ValuedStructure& tmpl, Flavor flavor);

// One variable per iterated-degree class, constraints instantiated on one
// representative per class with duplicate rows removed, objective weighted
// by class sizes.
RelaxationProgram build_reduced(const model::ValuedStructure& inst,
                                const model::ValuedStructure& tmpl);

struct RelaxOutcome {
    ExtRat value; // PosInf when the program is infeasible
    std::optional<lp::Optimal> primal;
    std::optional<RatVector> certificate;
};

RelaxOutcome optimize(const lp::LinearProgram& program);
RelaxOutcome optimize(const RelaxationProgram& prog);
RelaxOutcome opt_relaxation(const model::ValuedStructure& inst,
                            const model::ValuedStructure& tmpl, Flavor flavor);

enum class Verdict { Yes, No };
enum class Method { Blp, Sa1, Sa1Reduced, Oracle };

Method parse_method(const std::string& name);
const char* method_name(Method m);

// Yes iff the chosen optimum is <= tau.
Verdict decide(const model::ValuedStructure& tmpl_a, const model::ValuedStructure& tmpl_b,
               const model::ValuedStructure& inst, const Rat& tau, Method method);

// Class data sufficient to assemble the reduced program. Both the
// centralized builder and the distributed agents reduce to this form, so the
// final row construction is shared; equality of the two programs is then
// exactly equality of the reconstructed class data.
struct ReducedClasses {
    std::vector<std::string> var_class_ids; // sorted, unique

    struct ConClass {
        std::string id;
        int sym = 0;
        Rat weight;
        std::vector<std::string> pos_var_class; // per position: variable class
        std::vector<int> pos_group; // repetition pattern, first-occurrence indexed
        Rat k;                      // objective coefficient (class size)
    };
    std::vector<ConClass> con_classes; // sorted by id
};

struct AssembledReduced {
    lp::LinearProgram program;
    std::map<std::pair<std::string, int>, int> unary;              // (class, a)
    std::map<std::pair<std::string, std::vector<int>>, int> joint; // (class, t)
};

AssembledReduced assemble_reduced_program(const ReducedClasses& classes,
                                          const model::ValuedStructure& tmpl);

// Class-averaging of a feasible full point into the reduced variable space,
// and the converse lift. Both preserve feasibility and objective value; the
// test suites assert this constructively.
RatVector average_to_reduced(const RelaxationProgram& full,
                             const RelaxationProgram& reduced, const RatVector& point);
RatVector lift_to_full(const RelaxationProgram& reduced, const RelaxationProgram& full,
                       const RatVector& point);

} // namespace pvcsp::relax
