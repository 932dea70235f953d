#pragma once

#include <random>
#include <string>
#include <vector>

#include "pvcsp/model.hpp"

namespace testutil {

using pvcsp::ExtRat;
using pvcsp::Rat;
namespace model = pvcsp::model;

inline std::string fixture_path(const std::string& name) {
    return std::string(FIXTURES_DIR) + "/" + name;
}

inline model::ValuedStructure load_fixture(const std::string& name) {
    return model::load_structure(fixture_path(name));
}

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Rat random_rat(Rng& rng, bool nonneg = false, int max_num = 3, int max_den = 2) {
    long num = uniform(rng, nonneg ? 0 : -max_num, max_num);
    long den = uniform(rng, 1, max_den);
    return Rat(num, den);
}

inline model::Signature random_signature(Rng& rng) {
    int count = uniform(rng, 1, 2);
    std::vector<model::Symbol> syms;
    for (int i = 0; i < count; ++i)
        syms.push_back({"R" + std::to_string(i), uniform(rng, 1, 2)});
    return model::Signature(syms);
}

inline std::vector<std::string> element_names(int n, const std::string& prefix) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i)
        out.push_back(prefix + std::to_string(i));
    return out;
}

// Sparse random instance: each tuple gets a positive weight with the given
// percent chance.
inline model::ValuedStructure random_instance(Rng& rng, const model::Signature& sig,
                                              int size, int density_percent = 40) {
    model::ValuedStructure s(sig, model::Role::Instance, element_names(size, "v"),
                             "rand");
    for (int sym = 0; sym < sig.size(); ++sym) {
        if (size == 0)
            continue;
        std::vector<int> t(sig.arity(sym), 0);
        do {
            if (uniform(rng, 0, 99) < density_percent) {
                Rat w(uniform(rng, 1, 4), uniform(rng, 1, 2));
                s.set_value(sym, t, ExtRat(w));
            }
        } while (model::next_tuple(t, size));
    }
    return s;
}

inline model::ValuedStructure random_template(Rng& rng, const model::Signature& sig,
                                              int size, bool allow_inf = true,
                                              bool allow_neg = true,
                                              int inf_percent = 15) {
    model::ValuedStructure s(sig, model::Role::Template, element_names(size, "a"),
                             "randT");
    for (int sym = 0; sym < sig.size(); ++sym) {
        s.set_default(sym, ExtRat(0));
        if (size == 0)
            continue;
        std::vector<int> t(sig.arity(sym), 0);
        do {
            if (allow_inf && uniform(rng, 0, 99) < inf_percent)
                s.set_value(sym, t, ExtRat::infinity());
            else
                s.set_value(sym, t, ExtRat(random_rat(rng, !allow_neg)));
        } while (model::next_tuple(t, size));
    }
    return s;
}

// A connected instance: a random spanning pattern of binary constraints plus
// optional extras (requires a binary symbol in the signature).
inline model::ValuedStructure random_connected_instance(Rng& rng,
                                                        const model::Signature& sig,
                                                        int size) {
    model::ValuedStructure s(sig, model::Role::Instance, element_names(size, "v"),
                             "conn");
    int binary = -1;
    for (int i = 0; i < sig.size(); ++i)
        if (sig.arity(i) == 2)
            binary = i;
    if (binary < 0)
        throw pvcsp::InvalidParameter("need a binary symbol");
    for (int v = 1; v < size; ++v) {
        int u = uniform(rng, 0, v - 1);
        Rat w(uniform(rng, 1, 3), uniform(rng, 1, 2));
        if (uniform(rng, 0, 1))
            s.set_value(binary, {u, v}, ExtRat(w));
        else
            s.set_value(binary, {v, u}, ExtRat(w));
    }
    // extras, possibly with repeated variables
    int extras = uniform(rng, 0, 2);
    for (int e = 0; e < extras; ++e) {
        int sym = uniform(rng, 0, sig.size() - 1);
        std::vector<int> t;
        for (int i = 0; i < sig.arity(sym); ++i)
            t.push_back(uniform(rng, 0, size - 1));
        if (s.value(sym, t).is_zero())
            s.set_value(sym, t, ExtRat(Rat(uniform(rng, 1, 3))));
    }
    if (size == 1) {
        // no spanning edge exists; anchor with a unary or reflexive constraint
        int sym = uniform(rng, 0, sig.size() - 1);
        std::vector<int> t(sig.arity(sym), 0);
        if (s.value(sym, t).is_zero())
            s.set_value(sym, t, ExtRat(1));
    }
    return s;
}

// Disjoint union with renamed elements; role and signature preserved.
inline model::ValuedStructure disjoint_union(const model::ValuedStructure& a,
                                             const model::ValuedStructure& b) {
    std::vector<std::string> names;
    for (const auto& e : a.universe())
        names.push_back("l" + e);
    for (const auto& e : b.universe())
        names.push_back("r" + e);
    model::ValuedStructure out(a.signature(), model::Role::Instance, names,
                               a.name() + "+" + b.name());
    for (int sym = 0; sym < a.signature().size(); ++sym) {
        for (const auto& [t, v] : a.explicit_values(sym))
            out.set_value(sym, t, v);
        for (const auto& [t, v] : b.explicit_values(sym)) {
            std::vector<int> shifted(t);
            for (int& x : shifted)
                x += a.size();
            out.set_value(sym, shifted, v);
        }
    }
    return out;
}

// Renames every element by permuting universe order; structurally identical.
inline model::ValuedStructure renamed_copy(const model::ValuedStructure& a, Rng& rng) {
    std::vector<int> perm(a.size());
    for (int i = 0; i < a.size(); ++i)
        perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> names(a.size());
    for (int i = 0; i < a.size(); ++i)
        names[perm[i]] = "w" + std::to_string(i) + "_" + a.element_name(i);
    model::ValuedStructure out(a.signature(), a.role(), names, a.name() + "_ren");
    for (int sym = 0; sym < a.signature().size(); ++sym) {
        if (a.has_default(sym))
            out.set_default(sym, a.default_value(sym));
        for (const auto& [t, v] : a.explicit_values(sym)) {
            std::vector<int> mapped(t);
            for (int& x : mapped)
                x = perm[x];
            out.set_value(sym, mapped, v);
        }
    }
    return out;
}

// Directed cycle instance of length p over a binary symbol, all weights w.
inline model::ValuedStructure cycle_instance(int p, const Rat& w,
                                             const std::string& name = "cycle") {
    model::Signature sig({{"R", 2}});
    model::ValuedStructure s(sig, model::Role::Instance, element_names(p, "v"), name);
    for (int i = 0; i < p; ++i)
        s.set_value(0, {i, (i + 1) % p}, ExtRat(w));
    return s;
}

} // namespace testutil
