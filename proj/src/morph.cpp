#include "pvcsp/morph.hpp"

#include <algorithm>

#include "pvcsp/lp.hpp"
#include "pvcsp/relax.hpp"

namespace pvcsp::morph {

std::vector<std::vector<int>> enumerate_functions(int source_size, int target_size,
                                                  std::uint64_t cap) {
    if (source_size > 0 && target_size == 0)
        throw InvalidParameter("no functions into an empty universe");
    std::uint64_t count = 1;
    for (int i = 0; i < source_size; ++i) {
        count *= static_cast<std::uint64_t>(target_size);
        if (count > cap)
            throw BudgetExceeded("function table enumeration exceeds budget");
    }
    std::vector<std::vector<int>> out;
    out.reserve(count);
    std::vector<int> table(source_size, 0);
    do {
        out.push_back(table);
    } while (model::next_tuple(table, target_size));
    return out;
}

namespace {

std::vector<int> apply_table(const std::vector<int>& table, const std::vector<int>& t) {
    std::vector<int> out(t.size());
    for (size_t i = 0; i < t.size(); ++i)
        out[i] = table[t[i]];
    return out;
}

// Tuples with finite source cost, per symbol.
std::vector<std::vector<std::vector<int>>> finite_tuples(const model::ValuedStructure& s) {
    std::vector<std::vector<std::vector<int>>> out(s.signature().size());
    for (int sym = 0; sym < s.signature().size(); ++sym) {
        if (s.size() == 0)
            continue;
        std::vector<int> t(s.signature().arity(sym), 0);
        do {
            if (!s.value(sym, t).is_inf())
                out[sym].push_back(t);
        } while (model::next_tuple(t, s.size()));
    }
    return out;
}

bool maps_finite_to_finite(const model::ValuedStructure& source,
                           const model::ValuedStructure& target,
                           const std::vector<std::vector<std::vector<int>>>& finite,
                           const std::vector<int>& table) {
    for (int sym = 0; sym < source.signature().size(); ++sym)
        for (const auto& t : finite[sym])
            if (target.value(sym, apply_table(table, t)).is_inf())
                return false;
    return true;
}

bool point_mass_works(const model::ValuedStructure& source,
                      const model::ValuedStructure& target,
                      const std::vector<std::vector<std::vector<int>>>& finite,
                      const std::vector<int>& table) {
    for (int sym = 0; sym < source.signature().size(); ++sym)
        for (const auto& t : finite[sym])
            if (!(target.value(sym, apply_table(table, t)) <= source.value(sym, t)))
                return false;
    return true;
}

// Val(I, target, f) restricted to the instance's positive tuples; exact.
ExtRat value_under(const model::ValuedStructure& inst,
                   const model::ValuedStructure& target, const std::vector<int>& table) {
    return model::val(inst, target, apply_table(table, [&] {
        std::vector<int> id(inst.size());
        for (int i = 0; i < inst.size(); ++i)
            id[i] = i;
        return id;
    }()));
}

Counterexample extract_counterexample(
    const model::ValuedStructure& source, const model::ValuedStructure& target,
    const std::vector<std::vector<std::vector<int>>>& finite,
    const std::vector<std::vector<int>>& admissible, const RatVector& certificate,
    const std::vector<std::pair<int, std::vector<int>>>& row_tuples,
    const Budget& budget) {
    model::ValuedStructure inst(source.signature(), model::Role::Instance,
                                source.universe(), source.name() + "_sep");
    for (size_t r = 0; r < row_tuples.size(); ++r) {
        const Rat& x = certificate(static_cast<int>(r));
        if (x.sign() < 0)
            throw InternalError("Farkas multiplier of a <= row is negative");
        if (!x.is_zero())
            inst.set_value(row_tuples[r].first, row_tuples[r].second, ExtRat(x));
    }

    auto gap_holds = [&](const model::ValuedStructure& candidate) {
        ExtRat in_target = model::opt(candidate, target, budget.opt_budget).value;
        ExtRat in_source = model::opt(candidate, source, budget.opt_budget).value;
        return std::make_pair(in_target > in_source, std::make_pair(in_source, in_target));
    };
    auto [ok, opts] = gap_holds(inst);
    if (!ok) {
        // The certificate separates only the finite-to-finite maps; a map
        // sending some zero-weight finite tuple to an infinite cost can slip
        // through. Mixing in a small uniform weight on every finite tuple
        // closes that hole while keeping the strict gap on the rest.
        std::vector<int> identity(source.size());
        for (int i = 0; i < source.size(); ++i)
            identity[i] = i;
        ExtRat val_a = value_under(inst, source, identity);
        Rat delta;
        bool first = true;
        Rat worst_deficit(0);
        Rat uniform_a(0);
        for (int sym = 0; sym < source.signature().size(); ++sym)
            for (const auto& t : finite[sym])
                uniform_a += source.value(sym, t).finite();
        for (const auto& table : admissible) {
            Rat margin = value_under(inst, target, table).finite() - val_a.finite();
            if (first || margin < delta) {
                delta = margin;
                first = false;
            }
            Rat uniform_b(0);
            for (int sym = 0; sym < source.signature().size(); ++sym)
                for (const auto& t : finite[sym])
                    uniform_b += target.value(sym, apply_table(table, t)).finite();
            Rat deficit = uniform_a - uniform_b;
            if (deficit > worst_deficit)
                worst_deficit = deficit;
        }
        if (first || delta <= Rat(0))
            throw InternalError("certificate does not separate the admissible maps");
        Rat eps = worst_deficit.is_zero() ? Rat(1) : delta / (Rat(2) * worst_deficit);
        for (int sym = 0; sym < source.signature().size(); ++sym)
            for (const auto& t : finite[sym]) {
                ExtRat cur = inst.value(sym, t);
                inst.set_value(sym, t, ExtRat(cur.finite() + eps));
            }
        std::tie(ok, opts) = gap_holds(inst);
        if (!ok)
            throw InternalError("perturbed counterexample failed oracle confirmation");
    }
    return Counterexample{std::move(inst), opts.first, opts.second};
}

} // namespace

FracHomResult frac_hom(const model::ValuedStructure& source,
                       const model::ValuedStructure& target, const Budget& budget) {
    model::check_similar(source, target);
    auto finite = finite_tuples(source);
    auto tables = enumerate_functions(source.size(), target.size(),
                                      budget.max_function_tables);

    std::vector<std::vector<int>> admissible;
    for (const auto& table : tables)
        if (maps_finite_to_finite(source, target, finite, table))
            admissible.push_back(table);

    // Prefer the simplest witness: the first admissible point mass.
    for (const auto& table : admissible)
        if (point_mass_works(source, target, finite, table)) {
            MapDistribution mu;
            mu.direction = Direction::FractionalHom;
            mu.support.emplace_back(table, Rat(1));
            return mu;
        }

    lp::LinearProgram prog;
    for (size_t f = 0; f < admissible.size(); ++f)
        prog.add_variable("mu" + std::to_string(f), true);
    std::vector<std::pair<int, std::vector<int>>> row_tuples;
    for (int sym = 0; sym < source.signature().size(); ++sym)
        for (const auto& t : finite[sym]) {
            std::map<int, Rat> terms;
            for (size_t f = 0; f < admissible.size(); ++f) {
                Rat c = target.value(sym, apply_table(admissible[f], t)).finite();
                if (!c.is_zero())
                    terms[static_cast<int>(f)] = c;
            }
            prog.add_constraint(std::move(terms), lp::Rel::Le,
                                source.value(sym, t).finite());
            row_tuples.emplace_back(sym, t);
        }
    std::map<int, Rat> mass;
    for (size_t f = 0; f < admissible.size(); ++f)
        mass[static_cast<int>(f)] = Rat(1);
    prog.add_constraint(mass, lp::Rel::Ge, Rat(1));
    prog.set_objective(lp::Sense::Min, mass);

    lp::LPOutcome out = lp::solve_lp(prog);
    if (auto* opt = std::get_if<lp::Optimal>(&out)) {
        MapDistribution mu;
        mu.direction = Direction::FractionalHom;
        for (size_t f = 0; f < admissible.size(); ++f)
            if (!opt->point(static_cast<int>(f)).is_zero())
                mu.support.emplace_back(admissible[f], opt->point(static_cast<int>(f)));
        mu.canonicalize();
        Rat total = mu.total_mass();
        if (total != Rat(1)) {
            MapDistribution scaled = mu;
            for (auto& [table, p] : scaled.support)
                p /= total;
            if (verify_frac_hom(source, target, scaled))
                return scaled;
            // Scaling down can break (eq. FH) rows with negative costs;
            // report the raw feasible solution instead, flagged.
            mu.unnormalized = true;
        }
        return mu;
    }
    if (auto* inf = std::get_if<lp::Infeasible>(&out))
        return extract_counterexample(source, target, finite, admissible,
                                      inf->certificate, row_tuples, budget);
    throw InternalError("fractional homomorphism system cannot be unbounded");
}

bool verify_frac_hom(const model::ValuedStructure& source,
                     const model::ValuedStructure& target, const MapDistribution& mu) {
    model::check_similar(source, target);
    if (mu.direction != Direction::FractionalHom)
        throw MalformedDistribution("expected a fractional-homomorphism distribution");
    mu.check_wellformed(source.size(), target.size());
    for (int sym = 0; sym < source.signature().size(); ++sym) {
        if (source.size() == 0)
            continue;
        std::vector<int> t(source.signature().arity(sym), 0);
        do {
            ExtRat lhs(0);
            for (const auto& [table, p] : mu.support)
                lhs += ExtRat(p) * target.value(sym, apply_table(table, t));
            if (!(lhs <= source.value(sym, t)))
                return false;
        } while (model::next_tuple(t, source.size()));
    }
    return true;
}

std::optional<MapDistribution> dual_frac_hom(const model::ValuedStructure& inst,
                                             const model::ValuedStructure& target,
                                             const Budget& budget) {
    model::check_similar(inst, target);
    if (!inst.is_instance() || !target.is_instance())
        throw RoleViolation("dual fractional homomorphisms relate instances");
    auto tables =
        enumerate_functions(inst.size(), target.size(), budget.max_function_tables);
    auto cons = model::constraints(inst);

    lp::LinearProgram prog;
    for (size_t f = 0; f < tables.size(); ++f)
        prog.add_variable("eta" + std::to_string(f), true);

    // Row per (symbol, target tuple): sum of pushed-forward weights <= R^J(u).
    for (int sym = 0; sym < target.signature().size(); ++sym) {
        int arity = target.signature().arity(sym);
        std::map<std::vector<int>, std::map<int, Rat>> rows;
        for (size_t f = 0; f < tables.size(); ++f)
            for (const auto& c : cons)
                if (c.sym == sym)
                    rows[apply_table(tables[f], c.vars)][static_cast<int>(f)] +=
                        c.weight;
        if (target.size() == 0)
            continue;
        std::vector<int> u(arity, 0);
        do {
            auto it = rows.find(u);
            std::map<int, Rat> terms = it == rows.end() ? std::map<int, Rat>{}
                                                        : it->second;
            prog.add_constraint(std::move(terms), lp::Rel::Le,
                                target.value(sym, u).finite());
        } while (model::next_tuple(u, target.size()));
    }
    std::map<int, Rat> mass;
    for (size_t f = 0; f < tables.size(); ++f)
        mass[static_cast<int>(f)] = Rat(1);
    prog.add_constraint(std::move(mass), lp::Rel::Eq, Rat(1));
    prog.set_objective(lp::Sense::Min, {});

    lp::LPOutcome out = lp::solve_lp(prog);
    if (auto* opt = std::get_if<lp::Optimal>(&out)) {
        MapDistribution eta;
        eta.direction = Direction::DualFractionalHom;
        for (size_t f = 0; f < tables.size(); ++f)
            if (!opt->point(static_cast<int>(f)).is_zero())
                eta.support.emplace_back(tables[f], opt->point(static_cast<int>(f)));
        eta.canonicalize();
        return eta;
    }
    return std::nullopt;
}

bool verify_dual_frac_hom(const model::ValuedStructure& inst,
                          const model::ValuedStructure& target,
                          const MapDistribution& eta) {
    model::check_similar(inst, target);
    if (!inst.is_instance() || !target.is_instance())
        throw RoleViolation("dual fractional homomorphisms relate instances");
    if (eta.direction != Direction::DualFractionalHom)
        throw MalformedDistribution("expected a dual-fractional-homomorphism "
                                    "distribution");
    eta.check_wellformed(inst.size(), target.size());
    auto cons = model::constraints(inst);
    for (int sym = 0; sym < target.signature().size(); ++sym) {
        std::map<std::vector<int>, Rat> pushed;
        for (const auto& [table, p] : eta.support)
            for (const auto& c : cons)
                if (c.sym == sym)
                    pushed[apply_table(table, c.vars)] += p * c.weight;
        for (const auto& [u, w] : pushed)
            if (!(ExtRat(w) <= target.value(sym, u)))
                return false;
    }
    return true;
}

PowerStructure power_lp(const model::ValuedStructure& base, int m,
                        const Budget& budget) {
    if (m < 1)
        throw InvalidParameter("power exponent must be >= 1");
    PowerStructure out;
    out.m = m;

    std::vector<int> t(m, 0);
    for (;;) {
        out.universe.push_back(t);
        if (static_cast<int>(out.universe.size()) > budget.max_power_universe)
            throw BudgetExceeded("power universe exceeds budget");
        // next sorted tuple (combination with repetition)
        int i = m - 1;
        while (i >= 0 && t[i] == base.size() - 1)
            --i;
        if (i < 0)
            break;
        ++t[i];
        for (int j = i + 1; j < m; ++j)
            t[j] = t[i];
    }
    if (base.size() == 0)
        out.universe.clear();

    std::vector<std::string> names;
    for (const auto& s : out.universe) {
        std::string n;
        for (size_t i = 0; i < s.size(); ++i)
            n += (i ? "+" : "") + base.element_name(s[i]);
        names.push_back(n);
    }
    out.structure = model::ValuedStructure(base.signature(), model::Role::Template,
                                           names, base.name() + "_lp" + std::to_string(m));

    const int usize = static_cast<int>(out.universe.size());
    for (int sym = 0; sym < base.signature().size(); ++sym) {
        int r = base.signature().arity(sym);
        std::uint64_t space = 1;
        for (int i = 0; i < r; ++i) {
            space *= static_cast<std::uint64_t>(usize);
            if (space > budget.max_tuple_space)
                throw BudgetExceeded("power tuple space exceeds budget");
        }
        if (usize == 0)
            continue;
        std::vector<int> st(r, 0);
        do {
            // Arrangements: t_1 pinned to the sorted tuple (simultaneous
            // permutation of all t_i preserves the sum), the rest free.
            std::vector<std::vector<int>> arrangement;
            arrangement.push_back(out.universe[st[0]]);
            for (int i = 1; i < r; ++i)
                arrangement.push_back(out.universe[st[i]]);
            ExtRat best = ExtRat::infinity();
            bool more = true;
            std::uint64_t visited = 0;
            while (more) {
                ExtRat sum(0);
                std::vector<int> col(r);
                for (int k = 0; k < m; ++k) {
                    for (int i = 0; i < r; ++i)
                        col[i] = arrangement[i][k];
                    sum += base.value(sym, col);
                    if (sum.is_inf())
                        break;
                }
                if (sum < best)
                    best = sum;
                if (++visited > budget.max_tuple_space)
                    throw BudgetExceeded("power arrangement search exceeds budget");
                more = false;
                for (int i = r - 1; i >= 1; --i) {
                    if (std::next_permutation(arrangement[i].begin(),
                                              arrangement[i].end())) {
                        more = true;
                        break;
                    }
                    // wrapped back to sorted order; carry to the next slot
                }
            }
            ExtRat value = best.is_inf() ? best : ExtRat(best.finite() / Rat(m));
            out.structure.set_value(sym, st, value);
        } while (model::next_tuple(st, usize));
        out.structure.set_default(sym, ExtRat(0)); // all tuples explicit; keep total
    }
    return out;
}

std::vector<int> expand_power_table(const PowerStructure& power,
                                    const std::vector<int>& table,
                                    const std::vector<int>& args) {
    std::vector<int> sorted = args;
    std::sort(sorted.begin(), sorted.end());
    auto it = std::find(power.universe.begin(), power.universe.end(), sorted);
    if (it == power.universe.end())
        throw InvalidParameter("argument multiset outside the power universe");
    return {table[static_cast<int>(it - power.universe.begin())]};
}

SymPolyResult sym_frac_polymorphism(const model::ValuedStructure& tmpl_a,
                                    const model::ValuedStructure& tmpl_b, int m,
                                    const Budget& budget) {
    model::check_similar(tmpl_a, tmpl_b);
    PowerStructure power = power_lp(tmpl_a, m, budget);
    SymPolyResult out{frac_hom(power.structure, tmpl_b, budget), std::nullopt};
    if (auto* cx = std::get_if<Counterexample>(&out.result)) {
        relax::RelaxOutcome blp =
            relax::opt_relaxation(cx->instance, tmpl_a, relax::Flavor::Blp);
        out.blp_value = blp.value;
    }
    return out;
}

PowerConsistencyReport blp_power_consistency(const model::ValuedStructure& inst,
                                             const model::ValuedStructure& tmpl,
                                             const Budget& budget) {
    PowerConsistencyReport report;
    relax::RelaxOutcome blp = relax::opt_relaxation(inst, tmpl, relax::Flavor::Blp);
    if (blp.value.is_inf()) {
        report.skipped = true;
        report.note = "BLP infeasible";
        return report;
    }
    report.blp_value = blp.value.finite();
    const RatVector& point = blp.primal->point;
    mpz_class lcm = denominator_lcm(
        std::vector<Rat>(point.data(), point.data() + point.size()));
    if (!lcm.fits_slong_p()) {
        report.skipped = true;
        report.note = "m* does not fit a machine integer";
        return report;
    }
    report.m_star = lcm.get_si();

    for (long m = 1; m <= report.m_star; ++m) {
        PowerStructure power;
        try {
            power = power_lp(tmpl, static_cast<int>(m), budget);
        } catch (const BudgetExceeded&) {
            report.skipped = true;
            report.note = "power structure at m=" + std::to_string(m) +
                          " exceeds budget";
            return report;
        }
        ExtRat value = model::opt(inst, power.structure, budget.opt_budget).value;
        report.power_values.emplace_back(static_cast<int>(m), value);
        if (m == report.m_star)
            report.equality_at_m_star = value == ExtRat(report.blp_value);
    }
    return report;
}

} // namespace pvcsp::morph
