#include "pvcsp/lp.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "pvcsp/error.hpp"

namespace pvcsp::lp {

int LinearProgram::add_variable(const std::string& name, bool nonneg) {
    if (name.empty())
        throw MalformedProgram("empty variable name");
    int j = num_variables();
    if (!index_.emplace(name, j).second)
        throw MalformedProgram("duplicate variable '" + name + "'");
    names_.push_back(name);
    nonneg_.push_back(nonneg);
    return j;
}

int LinearProgram::variable_index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        throw MalformedProgram("unknown variable '" + name + "'");
    return it->second;
}

void LinearProgram::check_terms(const std::map<int, Rat>& terms) const {
    for (const auto& [j, c] : terms)
        if (j < 0 || j >= num_variables())
            throw MalformedProgram("term references unknown variable index");
}

void LinearProgram::add_constraint(std::map<int, Rat> terms, Rel rel, Rat rhs) {
    check_terms(terms);
    rows_.push_back({std::move(terms), rel, std::move(rhs)});
}

void LinearProgram::set_objective(Sense sense, std::map<int, Rat> terms) {
    check_terms(terms);
    sense_ = sense;
    objective_ = std::move(terms);
}

namespace {

// Column roles in the standardized tableau.
struct Column {
    enum Kind { Structural, Slack, Artificial } kind;
    int var = -1;  // LP variable (Structural)
    int sign = 1;  // +1 positive part, -1 negative part of a free variable
    int row = -1;  // originating row (Slack / Artificial)
};

struct Tableau {
    RatMatrix body;  // m x (ncols + 1); last column is the rhs
    std::vector<int> basis;
    std::vector<Column> columns;
    std::vector<Rat> flip;      // per row: +1 or -1 applied to reach rhs >= 0
    std::vector<int> slack_of;  // row -> slack column or -1
    std::vector<int> art_of;    // row -> artificial column or -1

    int rows() const { return static_cast<int>(body.rows()); }
    int cols() const { return static_cast<int>(columns.size()); }
    Rat& rhs(int r) { return body(r, cols()); }
};

Tableau standardize(const LinearProgram& lp) {
    const int m = lp.num_constraints();
    Tableau t;
    t.flip.resize(m);
    t.slack_of.assign(m, -1);
    t.art_of.assign(m, -1);

    for (int j = 0; j < lp.num_variables(); ++j) {
        t.columns.push_back({Column::Structural, j, +1, -1});
        if (!lp.is_nonneg(j))
            t.columns.push_back({Column::Structural, j, -1, -1});
    }
    // Effective relation after making every rhs nonnegative.
    std::vector<Rel> eff(m);
    for (int i = 0; i < m; ++i) {
        const auto& row = lp.row(i);
        bool neg = row.rhs < Rat(0);
        t.flip[i] = neg ? Rat(-1) : Rat(1);
        eff[i] = row.rel;
        if (neg && row.rel == Rel::Le)
            eff[i] = Rel::Ge;
        else if (neg && row.rel == Rel::Ge)
            eff[i] = Rel::Le;
    }
    for (int i = 0; i < m; ++i)
        if (eff[i] != Rel::Eq) {
            t.slack_of[i] = t.cols();
            t.columns.push_back({Column::Slack, -1, +1, i});
        }
    for (int i = 0; i < m; ++i)
        if (eff[i] != Rel::Le) {
            t.art_of[i] = t.cols();
            t.columns.push_back({Column::Artificial, -1, +1, i});
        }

    t.body = RatMatrix::Constant(m, t.cols() + 1, Rat(0));
    t.basis.resize(m);
    for (int i = 0; i < m; ++i) {
        const auto& row = lp.row(i);
        for (int c = 0; c < t.cols(); ++c) {
            const Column& col = t.columns[c];
            if (col.kind == Column::Structural) {
                auto it = row.terms.find(col.var);
                if (it != row.terms.end())
                    t.body(i, c) = t.flip[i] * Rat(col.sign) * it->second;
            }
        }
        if (t.slack_of[i] >= 0)
            t.body(i, t.slack_of[i]) = eff[i] == Rel::Le ? Rat(1) : Rat(-1);
        if (t.art_of[i] >= 0)
            t.body(i, t.art_of[i]) = Rat(1);
        t.body(i, t.cols()) = t.flip[i] * row.rhs;
        t.basis[i] = eff[i] == Rel::Le ? t.slack_of[i] : t.art_of[i];
    }
    return t;
}

void pivot(Tableau& t, RatVector& zrow, Rat& zval, int r, int e) {
    Rat p = t.body(r, e);
    t.body.row(r) /= p;
    for (int i = 0; i < t.rows(); ++i) {
        if (i == r || t.body(i, e).is_zero())
            continue;
        Rat f = t.body(i, e);
        t.body.row(i) -= f * t.body.row(r);
    }
    if (!zrow(e).is_zero()) {
        Rat f = zrow(e);
        for (int c = 0; c < t.cols(); ++c)
            zrow(c) -= f * t.body(r, c);
        zval -= f * t.body(r, t.cols());
    }
    t.basis[r] = e;
}

// Minimizes cost over the tableau with Bland's rule. `allowed` masks the
// columns that may enter. Returns false on unboundedness.
bool run_simplex(Tableau& t, const RatVector& cost, const std::vector<bool>& allowed,
                 RatVector& zrow, Rat& zval) {
    const int n = t.cols();
    zrow = cost;
    zval = Rat(0);
    for (int i = 0; i < t.rows(); ++i) {
        Rat cb = cost(t.basis[i]);
        if (cb.is_zero())
            continue;
        for (int c = 0; c < n; ++c)
            zrow(c) -= cb * t.body(i, c);
        zval -= cb * t.body(i, t.cols());
    }
    // zval currently holds -c_B * rhs; objective value is -zval.
    for (;;) {
        int enter = -1;
        for (int c = 0; c < n; ++c)
            if (allowed[c] && zrow(c) < Rat(0)) {
                enter = c;
                break;
            }
        if (enter < 0)
            return true;
        int leave = -1;
        Rat best_ratio(0);
        for (int i = 0; i < t.rows(); ++i) {
            if (t.body(i, enter) <= Rat(0))
                continue;
            Rat ratio = t.body(i, t.cols()) / t.body(i, enter);
            if (leave < 0 || ratio < best_ratio ||
                (ratio == best_ratio && t.basis[i] < t.basis[leave])) {
                leave = i;
                best_ratio = ratio;
            }
        }
        if (leave < 0)
            return false;
        pivot(t, zrow, zval, leave, enter);
    }
}

RatVector extract_point(const LinearProgram& lp, const Tableau& t) {
    RatVector x = RatVector::Constant(lp.num_variables(), Rat(0));
    for (int i = 0; i < t.rows(); ++i) {
        const Column& col = t.columns[t.basis[i]];
        if (col.kind == Column::Structural)
            x(col.var) += Rat(col.sign) * t.body(i, t.cols());
    }
    return x;
}

Rat objective_value(const LinearProgram& lp, const RatVector& x) {
    Rat v(0);
    for (const auto& [j, c] : lp.objective())
        v += c * x(j);
    return v;
}

} // namespace

LPOutcome solve_lp(const LinearProgram& lp) {
    Tableau t = standardize(lp);
    const int n = t.cols();

    // Phase 1: minimize the sum of artificial variables.
    RatVector phase1 = RatVector::Constant(n, Rat(0));
    for (int c = 0; c < n; ++c)
        if (t.columns[c].kind == Column::Artificial)
            phase1(c) = Rat(1);
    std::vector<bool> all(n, true);
    RatVector zrow;
    Rat zval;
    if (!run_simplex(t, phase1, all, zrow, zval))
        throw InternalError("phase-1 objective is bounded by construction");
    Rat infeas = -zval;
    if (infeas > Rat(0)) {
        // Simplex multipliers: y_i = 1 - zrow(art_i) for rows with an
        // artificial (its column is +e_i), else y_i = -zrow(slack_i) (the
        // slack of a <=' row is +e_i). Certificate entry is -flip_i * y_i.
        RatVector cert(lp.num_constraints());
        for (int i = 0; i < lp.num_constraints(); ++i) {
            Rat y = t.art_of[i] >= 0 ? Rat(1) - zrow(t.art_of[i])
                                     : -zrow(t.slack_of[i]);
            cert(i) = -t.flip[i] * y;
        }
        // Scale so the combined rhs is exactly -1.
        Rat beta(0);
        for (int i = 0; i < lp.num_constraints(); ++i)
            beta += cert(i) * lp.row(i).rhs;
        if (beta >= Rat(0))
            throw InternalError("phase-1 multipliers do not certify infeasibility");
        cert /= -beta;
        if (!verify_certificate(lp, cert))
            throw InternalError("extracted Farkas certificate failed verification");
        return Infeasible{std::move(cert)};
    }

    // Drive remaining artificial variables out of the basis.
    std::vector<int> drop;
    for (int i = 0; i < t.rows(); ++i) {
        if (t.columns[t.basis[i]].kind != Column::Artificial)
            continue;
        int enter = -1;
        for (int c = 0; c < n && enter < 0; ++c)
            if (t.columns[c].kind != Column::Artificial && !t.body(i, c).is_zero())
                enter = c;
        if (enter >= 0)
            pivot(t, zrow, zval, i, enter);
        else
            drop.push_back(i); // redundant all-zero row
    }
    if (!drop.empty()) {
        int keep = t.rows() - static_cast<int>(drop.size());
        RatMatrix body(keep, t.cols() + 1);
        std::vector<int> basis;
        std::set<int> dropped(drop.begin(), drop.end());
        int r = 0;
        for (int i = 0; i < t.rows(); ++i) {
            if (dropped.count(i))
                continue;
            body.row(r) = t.body.row(i);
            basis.push_back(t.basis[i]);
            ++r;
        }
        t.body = std::move(body);
        t.basis = std::move(basis);
    }

    // Phase 2: original objective, artificial columns barred from entering.
    RatVector phase2 = RatVector::Constant(n, Rat(0));
    Rat flip_obj = lp.sense() == Sense::Max ? Rat(-1) : Rat(1);
    for (int c = 0; c < n; ++c) {
        const Column& col = t.columns[c];
        if (col.kind != Column::Structural)
            continue;
        auto it = lp.objective().find(col.var);
        if (it != lp.objective().end())
            phase2(c) = flip_obj * Rat(col.sign) * it->second;
    }
    std::vector<bool> allowed(n, true);
    for (int c = 0; c < n; ++c)
        if (t.columns[c].kind == Column::Artificial)
            allowed[c] = false;
    if (!run_simplex(t, phase2, allowed, zrow, zval))
        return Unbounded{};

    RatVector x = extract_point(lp, t);
    if (!verify_point(lp, x))
        throw InternalError("optimal point failed verification");
    return Optimal{objective_value(lp, x), std::move(x)};
}

bool verify_point(const LinearProgram& lp, const RatVector& point) {
    if (point.size() != lp.num_variables())
        throw DimensionMismatch("point size != number of variables");
    for (int j = 0; j < lp.num_variables(); ++j)
        if (lp.is_nonneg(j) && point(j) < Rat(0))
            return false;
    for (int i = 0; i < lp.num_constraints(); ++i) {
        const auto& row = lp.row(i);
        Rat lhs(0);
        for (const auto& [j, c] : row.terms)
            lhs += c * point(j);
        bool ok = row.rel == Rel::Le   ? lhs <= row.rhs
                  : row.rel == Rel::Eq ? lhs == row.rhs
                                       : lhs >= row.rhs;
        if (!ok)
            return false;
    }
    return true;
}

bool verify_certificate(const LinearProgram& lp, const RatVector& certificate) {
    if (certificate.size() != lp.num_constraints())
        throw DimensionMismatch("certificate size != number of constraints");
    RatVector combined = RatVector::Constant(lp.num_variables(), Rat(0));
    Rat rhs(0);
    for (int i = 0; i < lp.num_constraints(); ++i) {
        const auto& row = lp.row(i);
        const Rat& y = certificate(i);
        if (row.rel == Rel::Le && y < Rat(0))
            return false;
        if (row.rel == Rel::Ge && y > Rat(0))
            return false;
        if (y.is_zero())
            continue;
        for (const auto& [j, c] : row.terms)
            combined(j) += y * c;
        rhs += y * row.rhs;
    }
    for (int j = 0; j < lp.num_variables(); ++j) {
        if (lp.is_nonneg(j) ? combined(j) < Rat(0) : !combined(j).is_zero())
            return false;
    }
    return rhs < Rat(0);
}

namespace {

std::string term_text(const std::map<int, Rat>& terms, const LinearProgram& lp) {
    if (terms.empty())
        return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [j, c] : terms) {
        if (c.is_zero())
            continue;
        os << (first ? "" : " + ") << c.str() << "*" << lp.variable_name(j);
        first = false;
    }
    return first ? "0" : os.str();
}

const char* rel_text(Rel rel) {
    return rel == Rel::Le ? "<=" : rel == Rel::Eq ? "=" : ">=";
}

} // namespace

std::string dump(const LinearProgram& lp) {
    std::ostringstream os;
    os << (lp.sense() == Sense::Min ? "min " : "max ") << term_text(lp.objective(), lp)
       << "\nsubject to\n";
    for (int i = 0; i < lp.num_constraints(); ++i) {
        const auto& row = lp.row(i);
        os << "  " << term_text(row.terms, lp) << " " << rel_text(row.rel) << " "
           << row.rhs.str() << "\n";
    }
    for (int j = 0; j < lp.num_variables(); ++j)
        if (lp.is_nonneg(j))
            os << "  " << lp.variable_name(j) << " >= 0\n";
    return os.str();
}

std::string canonical_text(const LinearProgram& lp) {
    std::ostringstream os;
    os << "vars:";
    std::vector<std::string> names;
    for (int j = 0; j < lp.num_variables(); ++j)
        names.push_back(lp.variable_name(j) + (lp.is_nonneg(j) ? ":nn" : ":fr"));
    std::sort(names.begin(), names.end());
    for (const auto& n : names)
        os << " " << n;
    os << "\n";

    auto sorted_terms = [&](const std::map<int, Rat>& terms) {
        std::vector<std::string> parts;
        for (const auto& [j, c] : terms)
            if (!c.is_zero())
                parts.push_back(lp.variable_name(j) + "*" + c.str());
        std::sort(parts.begin(), parts.end());
        std::string out;
        for (const auto& p : parts)
            out += p + " ";
        return out;
    };

    os << (lp.sense() == Sense::Min ? "min: " : "max: ") << sorted_terms(lp.objective())
       << "\n";
    std::set<std::string> rows;
    for (int i = 0; i < lp.num_constraints(); ++i) {
        const auto& row = lp.row(i);
        rows.insert(sorted_terms(row.terms) + rel_text(row.rel) + " " + row.rhs.str());
    }
    for (const auto& r : rows)
        os << "row: " << r << "\n";
    return os.str();
}

} // namespace pvcsp::lp
