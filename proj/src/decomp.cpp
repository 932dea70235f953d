#include "pvcsp/decomp.hpp"

#include <algorithm>
#include <map>

#include "pvcsp/morph.hpp"

namespace pvcsp::decomp {

namespace {

constexpr long kMaxCopies = 5000;

long checked_count(const Rat& scaled, const char* what) {
    if (scaled.sign() < 0 || !scaled.is_integer())
        throw InternalError(std::string("scaled solution entry is not a "
                                        "nonnegative integer: ") +
                            what);
    return scaled.to_long();
}

std::vector<std::string> layered_universe(const model::ValuedStructure& inst, long m) {
    std::vector<std::string> names;
    for (long k = 0; k < m; ++k)
        for (int i = 0; i < inst.size(); ++i)
            names.push_back(std::to_string(k) + ":" + inst.element_name(i));
    return names;
}

} // namespace

Decomposition decompose(const model::ValuedStructure& inst,
                        const model::ValuedStructure& tmpl) {
    model::check_similar(inst, tmpl);
    relax::RelaxationProgram rp =
        relax::build_relaxation(inst, tmpl, relax::Flavor::Sa1);
    relax::RelaxOutcome outcome = relax::optimize(rp);

    Decomposition d;
    d.sa1_value = outcome.value;
    if (outcome.value.is_inf()) {
        d.sa1_feasible = false;
        d.m = 1;
        d.y1 = inst;
        d.y2 = inst;
        std::vector<int> identity(inst.size());
        for (int i = 0; i < inst.size(); ++i)
            identity[i] = i;
        d.forward.direction = morph::Direction::DualFractionalHom;
        d.forward.support.emplace_back(std::move(identity), Rat(1));
        return d;
    }

    const RatVector& point = outcome.primal->point;
    mpz_class lcm =
        denominator_lcm(std::vector<Rat>(point.data(), point.data() + point.size()));
    if (!lcm.fits_slong_p() || lcm.get_si() > kMaxCopies)
        throw BudgetExceeded("decomposition scale m exceeds the practical cap");
    d.m = lcm.get_si();
    const long m = d.m;
    const int n = inst.size();
    Rat rat_m(m);

    // p_v in universe order, each element repeated m * p_v(a) times.
    std::vector<std::vector<int>> pv(n);
    for (int v = 0; v < n; ++v) {
        for (int a = 0; a < tmpl.size(); ++a) {
            long count = checked_count(rat_m * point(rp.unary_var.at({v, a})), "p_v");
            pv[v].insert(pv[v].end(), count, a);
        }
        if (static_cast<long>(pv[v].size()) != m)
            throw InternalError("p_v tuple does not have m entries");
    }

    auto layer = [n](long k, int v) { return static_cast<int>(k) * n + v; };
    d.y1 = model::ValuedStructure(inst.signature(), model::Role::Instance,
                                  layered_universe(inst, m), inst.name() + "_y1");
    d.y2 = model::ValuedStructure(inst.signature(), model::Role::Instance,
                                  layered_universe(inst, m), inst.name() + "_y2");

    std::map<std::pair<int, std::vector<int>>, Rat> y2_weights;
    d.rho.resize(rp.cons.size());
    for (int ci = 0; ci < static_cast<int>(rp.cons.size()); ++ci) {
        const model::Constraint& c = rp.cons[ci];
        const int r = static_cast<int>(c.vars.size());
        Rat share = c.weight / rat_m;

        for (long k = 0; k < m; ++k) {
            std::vector<int> tuple(r);
            for (int j = 0; j < r; ++j)
                tuple[j] = layer(k, c.vars[j]);
            if (!d.y1.value(c.sym, tuple).is_zero())
                throw InternalError("Y1 weight collision");
            d.y1.set_value(c.sym, tuple, ExtRat(share));
        }

        // Q: for each template tuple in lexicographic order, m * p rows.
        std::vector<std::vector<int>> q;
        for (const auto& [key, col] : rp.joint_var) {
            if (key.first != ci)
                continue;
            long count = checked_count(rat_m * point(col), "p_{R(v)}");
            q.insert(q.end(), count, key.second);
        }
        if (static_cast<long>(q.size()) != m)
            throw InternalError("Q does not have m rows");

        // rho_j by stable occurrence matching against p_{v_j}.
        d.rho[ci].assign(r, std::vector<int>(m));
        for (int j = 0; j < r; ++j) {
            std::map<int, std::vector<int>> occurrences; // a -> indices in p_v
            for (long k = 0; k < m; ++k)
                occurrences[pv[c.vars[j]][k]].push_back(static_cast<int>(k));
            std::map<int, size_t> used;
            for (long k = 0; k < m; ++k) {
                int a = q[k][j];
                auto it = occurrences.find(a);
                if (it == occurrences.end() || used[a] >= it->second.size())
                    throw InternalError("column multiset of Q differs from p_v");
                d.rho[ci][j][k] = it->second[used[a]++];
            }
        }
        for (int i = 0; i < r; ++i)
            for (int j = i + 1; j < r; ++j)
                if (c.vars[i] == c.vars[j] && d.rho[ci][i] != d.rho[ci][j])
                    throw InternalError("repeated variable with diverging rho");

        for (long k = 0; k < m; ++k) {
            std::vector<int> tuple(r);
            for (int j = 0; j < r; ++j)
                tuple[j] = layer(d.rho[ci][j][k], c.vars[j]);
            auto [it, fresh] = y2_weights.emplace(std::make_pair(c.sym, tuple), share);
            if (!fresh)
                throw InternalError("Y2 weight collision");
        }
    }
    for (const auto& [key, w] : y2_weights)
        d.y2.set_value(key.first, key.second, ExtRat(w));

    d.h.resize(m * n);
    for (long k = 0; k < m; ++k)
        for (int v = 0; v < n; ++v)
            d.h[layer(k, v)] = pv[v][k];

    d.forward.direction = morph::Direction::DualFractionalHom;
    for (long k = 0; k < m; ++k) {
        std::vector<int> table(n);
        for (int v = 0; v < n; ++v)
            table[v] = layer(k, v);
        d.forward.support.emplace_back(std::move(table), Rat(1) / rat_m);
    }
    d.forward.canonicalize();
    return d;
}

std::string VerificationReport::first_failure() const {
    if (!dual_ok)
        return "dual fractional homomorphism I ->df Y1 failed";
    if (!equiv_ok)
        return "Y1 ==_1 Y2 failed";
    if (!value_ok)
        return "Val(Y2, A, h) != Opt^SA1(I, A)";
    return "";
}

VerificationReport verify_decomposition(const model::ValuedStructure& inst,
                                        const model::ValuedStructure& tmpl,
                                        const Decomposition& d) {
    VerificationReport report;
    report.dual_ok = morph::verify_dual_frac_hom(inst, d.y1, d.forward);
    report.equiv_ok = wl::equiv1(d.y1, d.y2);
    report.sa1_value = relax::opt_relaxation(inst, tmpl, relax::Flavor::Sa1).value;
    if (!d.sa1_feasible || report.sa1_value.is_inf()) {
        // Opt(Y2, A) <= infinity holds trivially.
        report.value_ok = !d.sa1_feasible && report.sa1_value.is_inf();
        report.h_value = ExtRat::infinity();
        return report;
    }
    report.h_value = model::val(d.y2, tmpl, d.h);
    report.value_ok = report.h_value == report.sa1_value;
    return report;
}

} // namespace pvcsp::decomp
