#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "pvcsp/rat.hpp"

namespace pvcsp::lp {

enum class Rel { Le, Eq, Ge };
enum class Sense { Min, Max };

// A linear program over named variables with exact rational data. All
// coefficients are finite; infinite costs are eliminated by the callers
// before a program is built.
class LinearProgram {
public:
    int add_variable(const std::string& name, bool nonneg);
    int num_variables() const { return static_cast<int>(names_.size()); }
    const std::string& variable_name(int j) const { return names_.at(j); }
    bool is_nonneg(int j) const { return nonneg_.at(j); }
    int variable_index(const std::string& name) const; // MalformedProgram if absent

    struct Row {
        std::map<int, Rat> terms;
        Rel rel = Rel::Le;
        Rat rhs;
    };

    void add_constraint(std::map<int, Rat> terms, Rel rel, Rat rhs);
    int num_constraints() const { return static_cast<int>(rows_.size()); }
    const Row& row(int i) const { return rows_.at(i); }

    void set_objective(Sense sense, std::map<int, Rat> terms);
    Sense sense() const { return sense_; }
    const std::map<int, Rat>& objective() const { return objective_; }

private:
    void check_terms(const std::map<int, Rat>& terms) const;

    std::vector<std::string> names_;
    std::vector<bool> nonneg_;
    std::map<std::string, int> index_;
    std::vector<Row> rows_;
    Sense sense_ = Sense::Min;
    std::map<int, Rat> objective_;
};

struct Optimal {
    Rat value;
    RatVector point; // one entry per LP variable
};

// Farkas certificate: one multiplier per constraint row. Multipliers are
// >= 0 on <= rows, <= 0 on >= rows, free on = rows; the combined row has
// nonnegative coefficients on nonnegative variables, zero on free ones,
// and combined right-hand side -1.
struct Infeasible {
    RatVector certificate;
};

struct Unbounded {};

using LPOutcome = std::variant<Optimal, Infeasible, Unbounded>;

// Deterministic two-phase simplex with Bland's pivoting rule. Every
// Optimal outcome satisfies verify_point and every Infeasible outcome
// satisfies verify_certificate (asserted internally before returning).
LPOutcome solve_lp(const LinearProgram& lp);

bool verify_point(const LinearProgram& lp, const RatVector& point);
bool verify_certificate(const LinearProgram& lp, const RatVector& certificate);

// Plain inequality text for external cross-checking.
std::string dump(const LinearProgram& lp);

// Deterministic serialization with sorted rows; equal programs (up to row
// order and duplicate rows) produce equal text.
std::string canonical_text(const LinearProgram& lp);

} // namespace pvcsp::lp
