#include "pvcsp/relax.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace pvcsp::relax {

namespace {

std::string tuple_name(const model::ValuedStructure& tmpl, const std::vector<int>& t) {
    std::string out;
    for (size_t i = 0; i < t.size(); ++i) {
        if (i)
            out += ",";
        out += tmpl.element_name(t[i]);
    }
    return out;
}

bool repetition_clash(const std::vector<int>& vars, const std::vector<int>& tuple) {
    for (size_t i = 0; i < vars.size(); ++i)
        for (size_t j = i + 1; j < vars.size(); ++j)
            if (vars[i] == vars[j] && tuple[i] != tuple[j])
                return true;
    return false;
}

// Surviving template tuples of one constraint: rows (5) and, for the SA1
// flavors, rows (6) applied by elimination.
std::vector<std::vector<int>> surviving_tuples(const model::ValuedStructure& tmpl,
                                               const model::Constraint& c, int arity,
                                               bool sa1) {
    std::vector<std::vector<int>> out;
    if (tmpl.size() == 0)
        return out;
    std::vector<int> t(arity, 0);
    do {
        if (tmpl.value(c.sym, t).is_inf())
            continue;
        if (sa1 && repetition_clash(c.vars, t))
            continue;
        out.push_back(t);
    } while (model::next_tuple(t, tmpl.size()));
    return out;
}

void add_marginal_rows(lp::LinearProgram& program, int unary_col,
                       const std::vector<std::vector<int>>& surviving,
                       const std::map<std::vector<int>, int>& joint_cols, int pos,
                       int a, std::set<std::string>* dedup,
                       const std::string& dedup_key) {
    std::map<int, Rat> terms;
    terms[unary_col] = Rat(1);
    for (const auto& t : surviving)
        if (t[pos] == a)
            terms[joint_cols.at(t)] -= Rat(1);
    if (dedup && !dedup->insert(dedup_key).second)
        return;
    program.add_constraint(std::move(terms), lp::Rel::Eq, Rat(0));
}

} // namespace

RelaxationProgram build_relaxation(const model::ValuedStructure& inst,
                                   const model::ValuedStructure& tmpl, Flavor flavor) {
    if (flavor == Flavor::Sa1Reduced)
        return build_reduced(inst, tmpl);
    model::check_similar(inst, tmpl);
    RelaxationProgram rp;
    rp.flavor = flavor;
    rp.cons = model::constraints(inst);
    const bool sa1 = flavor == Flavor::Sa1;

    for (int v = 0; v < inst.size(); ++v)
        for (int a = 0; a < tmpl.size(); ++a)
            rp.unary_var[{v, a}] = rp.program.add_variable(
                "u[" + inst.element_name(v) + "](" + tmpl.element_name(a) + ")", true);

    std::vector<std::vector<std::vector<int>>> surviving(rp.cons.size());
    std::map<int, Rat> objective;
    for (int ci = 0; ci < static_cast<int>(rp.cons.size()); ++ci) {
        const model::Constraint& c = rp.cons[ci];
        int arity = inst.signature().arity(c.sym);
        surviving[ci] = surviving_tuples(tmpl, c, arity, sa1);
        for (const auto& t : surviving[ci]) {
            int col = rp.program.add_variable(
                "j[" + std::to_string(ci) + "](" + tuple_name(tmpl, t) + ")", true);
            rp.joint_var[{ci, t}] = col;
            Rat coeff = c.weight * tmpl.value(c.sym, t).finite();
            if (!coeff.is_zero())
                objective[col] = coeff;
        }
    }
    rp.program.set_objective(lp::Sense::Min, std::move(objective));

    for (int v = 0; v < inst.size(); ++v) {
        std::map<int, Rat> terms;
        for (int a = 0; a < tmpl.size(); ++a)
            terms[rp.unary_var.at({v, a})] = Rat(1);
        rp.program.add_constraint(std::move(terms), lp::Rel::Eq, Rat(1));
    }

    for (int ci = 0; ci < static_cast<int>(rp.cons.size()); ++ci) {
        const model::Constraint& c = rp.cons[ci];
        std::map<std::vector<int>, int> joint_cols;
        for (const auto& t : surviving[ci])
            joint_cols[t] = rp.joint_var.at({ci, t});
        for (int pos = 0; pos < static_cast<int>(c.vars.size()); ++pos)
            for (int a = 0; a < tmpl.size(); ++a)
                add_marginal_rows(rp.program, rp.unary_var.at({c.vars[pos], a}),
                                  surviving[ci], joint_cols, pos, a, nullptr, {});
    }
    return rp;
}

AssembledReduced assemble_reduced_program(const ReducedClasses& classes,
                                          const model::ValuedStructure& tmpl) {
    AssembledReduced out;
    for (const std::string& id : classes.var_class_ids)
        for (int a = 0; a < tmpl.size(); ++a)
            out.unary[{id, a}] = out.program.add_variable(
                "u[" + id + "](" + tmpl.element_name(a) + ")", true);

    std::vector<std::vector<std::vector<int>>> surviving(classes.con_classes.size());
    std::map<int, Rat> objective;
    for (size_t c = 0; c < classes.con_classes.size(); ++c) {
        const auto& cls = classes.con_classes[c];
        const int arity = static_cast<int>(cls.pos_group.size());
        if (tmpl.size() > 0) {
            std::vector<int> t(arity, 0);
            do {
                if (tmpl.value(cls.sym, t).is_inf())
                    continue;
                bool clash = false;
                for (int i = 0; i < arity && !clash; ++i)
                    for (int j = i + 1; j < arity && !clash; ++j)
                        clash = cls.pos_group[i] == cls.pos_group[j] && t[i] != t[j];
                if (!clash)
                    surviving[c].push_back(t);
            } while (model::next_tuple(t, tmpl.size()));
        }
        for (const auto& t : surviving[c]) {
            int col = out.program.add_variable(
                "j[" + cls.id + "](" + tuple_name(tmpl, t) + ")", true);
            out.joint[{cls.id, t}] = col;
            Rat coeff = cls.k * cls.weight * tmpl.value(cls.sym, t).finite();
            if (!coeff.is_zero())
                objective[col] = coeff;
        }
    }
    out.program.set_objective(lp::Sense::Min, std::move(objective));

    for (const std::string& id : classes.var_class_ids) {
        std::map<int, Rat> terms;
        for (int a = 0; a < tmpl.size(); ++a)
            terms[out.unary.at({id, a})] = Rat(1);
        out.program.add_constraint(std::move(terms), lp::Rel::Eq, Rat(1));
    }
    std::set<std::string> dedup;
    for (size_t c = 0; c < classes.con_classes.size(); ++c) {
        const auto& cls = classes.con_classes[c];
        for (size_t pos = 0; pos < cls.pos_group.size(); ++pos) {
            for (int a = 0; a < tmpl.size(); ++a) {
                std::map<int, Rat> terms;
                terms[out.unary.at({cls.pos_var_class[pos], a})] = Rat(1);
                for (const auto& t : surviving[c])
                    if (t[static_cast<int>(pos)] == a)
                        terms[out.joint.at({cls.id, t})] -= Rat(1);
                std::ostringstream key;
                for (const auto& [col, coeff] : terms)
                    key << col << ":" << coeff.str() << ";";
                if (!dedup.insert(key.str()).second)
                    continue;
                out.program.add_constraint(std::move(terms), lp::Rel::Eq, Rat(0));
            }
        }
    }
    return out;
}

namespace {

// First-occurrence repetition pattern of a variable tuple, e.g. (x,y,x)->0,1,0.
std::vector<int> occurrence_pattern(const std::vector<int>& vars) {
    std::vector<int> pattern(vars.size());
    std::map<int, int> first;
    int next = 0;
    for (size_t i = 0; i < vars.size(); ++i) {
        auto [it, fresh] = first.emplace(vars[i], next);
        if (fresh)
            ++next;
        pattern[i] = it->second;
    }
    return pattern;
}

} // namespace

RelaxationProgram build_reduced(const model::ValuedStructure& inst,
                                const model::ValuedStructure& tmpl) {
    model::check_similar(inst, tmpl);
    RelaxationProgram rp;
    rp.flavor = Flavor::Sa1Reduced;
    rp.cons = model::constraints(inst);

    wl::FactorGraph g = wl::factor_graph(inst);
    wl::ColorPartition part = wl::refine(g);

    auto group = [&](int begin, int end) {
        std::map<std::string, RelaxationProgram::ClassInfo> classes;
        for (int v = begin; v < end; ++v) {
            auto& cls = classes[part.vertex_digest(v)];
            cls.digest = part.vertex_digest(v);
            cls.members.push_back(v - begin);
        }
        std::vector<RelaxationProgram::ClassInfo> out;
        for (auto& [digest, cls] : classes) {
            cls.representative = cls.members.front();
            out.push_back(std::move(cls));
        }
        return out; // std::map iteration = sorted by digest
    };
    rp.var_classes = group(0, g.num_vars);
    rp.con_classes = group(g.num_vars, g.num_vertices());
    rp.var_class_of.assign(inst.size(), -1);
    for (int k = 0; k < static_cast<int>(rp.var_classes.size()); ++k)
        for (int v : rp.var_classes[k].members)
            rp.var_class_of[v] = k;
    rp.con_class_of.assign(rp.cons.size(), -1);
    for (int k = 0; k < static_cast<int>(rp.con_classes.size()); ++k)
        for (int ci : rp.con_classes[k].members)
            rp.con_class_of[ci] = k;

    ReducedClasses classes;
    for (const auto& cls : rp.var_classes)
        classes.var_class_ids.push_back(cls.digest);
    for (const auto& cls : rp.con_classes) {
        const model::Constraint& rep = rp.cons[cls.representative];
        for (int ci : cls.members)
            if (rp.cons[ci].sym != rep.sym || rp.cons[ci].weight != rep.weight)
                throw InternalError("constraint class members disagree on label");
        ReducedClasses::ConClass cc;
        cc.id = cls.digest;
        cc.sym = rep.sym;
        cc.weight = rep.weight;
        for (int v : rep.vars)
            cc.pos_var_class.push_back(rp.var_classes[rp.var_class_of[v]].digest);
        cc.pos_group = occurrence_pattern(rep.vars);
        cc.k = Rat(static_cast<long>(cls.members.size()));
        classes.con_classes.push_back(std::move(cc));
    }

    AssembledReduced assembled = assemble_reduced_program(classes, tmpl);
    rp.program = std::move(assembled.program);
    std::map<std::string, int> var_class_index, con_class_index;
    for (int k = 0; k < static_cast<int>(rp.var_classes.size()); ++k)
        var_class_index[rp.var_classes[k].digest] = k;
    for (int k = 0; k < static_cast<int>(rp.con_classes.size()); ++k)
        con_class_index[rp.con_classes[k].digest] = k;
    for (const auto& [key, col] : assembled.unary)
        rp.reduced_unary_var[{var_class_index.at(key.first), key.second}] = col;
    for (const auto& [key, col] : assembled.joint)
        rp.reduced_joint_var[{con_class_index.at(key.first), key.second}] = col;
    return rp;
}

RelaxOutcome optimize(const lp::LinearProgram& program) {
    lp::LPOutcome out = lp::solve_lp(program);
    if (auto* opt = std::get_if<lp::Optimal>(&out))
        return {ExtRat(opt->value), *opt, std::nullopt};
    if (auto* inf = std::get_if<lp::Infeasible>(&out))
        return {ExtRat::infinity(), std::nullopt, inf->certificate};
    throw InternalError("relaxation reported unbounded; the feasible region of a "
                        "built program is a polytope");
}

RelaxOutcome optimize(const RelaxationProgram& prog) { return optimize(prog.program); }

RelaxOutcome opt_relaxation(const model::ValuedStructure& inst,
                            const model::ValuedStructure& tmpl, Flavor flavor) {
    return optimize(build_relaxation(inst, tmpl, flavor));
}

Method parse_method(const std::string& name) {
    if (name == "blp")
        return Method::Blp;
    if (name == "sa1")
        return Method::Sa1;
    if (name == "sa1-reduced")
        return Method::Sa1Reduced;
    if (name == "oracle")
        return Method::Oracle;
    throw InvalidParameter("unknown method '" + name + "'");
}

const char* method_name(Method m) {
    switch (m) {
    case Method::Blp: return "blp";
    case Method::Sa1: return "sa1";
    case Method::Sa1Reduced: return "sa1-reduced";
    case Method::Oracle: return "oracle";
    }
    return "?";
}

Verdict decide(const model::ValuedStructure& tmpl_a, const model::ValuedStructure& tmpl_b,
               const model::ValuedStructure& inst, const Rat& tau, Method method) {
    model::check_similar(tmpl_a, tmpl_b);
    ExtRat value;
    switch (method) {
    case Method::Blp:
        value = opt_relaxation(inst, tmpl_a, Flavor::Blp).value;
        break;
    case Method::Sa1:
        value = opt_relaxation(inst, tmpl_a, Flavor::Sa1).value;
        break;
    case Method::Sa1Reduced:
        value = opt_relaxation(inst, tmpl_a, Flavor::Sa1Reduced).value;
        break;
    case Method::Oracle:
        value = model::opt(inst, tmpl_a).value;
        break;
    }
    return value <= ExtRat(tau) ? Verdict::Yes : Verdict::No;
}

RatVector average_to_reduced(const RelaxationProgram& full,
                             const RelaxationProgram& reduced, const RatVector& point) {
    if (point.size() != full.program.num_variables())
        throw DimensionMismatch("point does not match the full program");
    RatVector out = RatVector::Constant(reduced.program.num_variables(), Rat(0));
    for (const auto& [key, col] : reduced.reduced_unary_var) {
        auto [cls, a] = key;
        Rat sum(0);
        for (int v : reduced.var_classes[cls].members)
            sum += point(full.unary_var.at({v, a}));
        out(col) = sum / Rat(static_cast<long>(reduced.var_classes[cls].members.size()));
    }
    for (const auto& [key, col] : reduced.reduced_joint_var) {
        const auto& [cls, tuple] = key;
        Rat sum(0);
        for (int ci : reduced.con_classes[cls].members)
            sum += point(full.joint_var.at({ci, tuple}));
        out(col) = sum / Rat(static_cast<long>(reduced.con_classes[cls].members.size()));
    }
    return out;
}

RatVector lift_to_full(const RelaxationProgram& reduced, const RelaxationProgram& full,
                       const RatVector& point) {
    if (point.size() != reduced.program.num_variables())
        throw DimensionMismatch("point does not match the reduced program");
    RatVector out = RatVector::Constant(full.program.num_variables(), Rat(0));
    for (const auto& [key, col] : full.unary_var)
        out(col) = point(reduced.reduced_unary_var.at(
            {reduced.var_class_of[key.first], key.second}));
    for (const auto& [key, col] : full.joint_var)
        out(col) = point(reduced.reduced_joint_var.at(
            {reduced.con_class_of[key.first], key.second}));
    return out;
}

} // namespace pvcsp::relax
