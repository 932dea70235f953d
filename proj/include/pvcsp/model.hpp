#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pvcsp/distribution.hpp"
#include "pvcsp/extrat.hpp"

namespace pvcsp::model {

struct Symbol {
    std::string name;
    int arity = 1;
    friend bool operator==(const Symbol&, const Symbol&) = default;
};

// Ordered list of relation symbols; names unique, arities >= 1.
class Signature {
public:
    Signature() = default;
    explicit Signature(std::vector<Symbol> symbols);

    int size() const { return static_cast<int>(symbols_.size()); }
    const Symbol& symbol(int i) const { return symbols_.at(i); }
    int arity(int i) const { return symbols_.at(i).arity; }
    int index_of(const std::string& name) const; // throws UnknownSymbol

    friend bool operator==(const Signature&, const Signature&) = default;

private:
    std::vector<Symbol> symbols_;
    std::map<std::string, int> index_;
};

enum class Role { Template, Instance };

// Finite universe plus one total valued relation per symbol, stored sparsely
// as explicit tuples over a per-symbol default. Instances default to 0 and
// must be non-negative finite-valued; templates may use any ExtRat values but
// must be total (full enumeration or an explicit default).
class ValuedStructure {
public:
    ValuedStructure() = default;
    ValuedStructure(Signature sig, Role role, std::vector<std::string> universe,
                    std::string name = {});

    const Signature& signature() const { return sig_; }
    Role role() const { return role_; }
    bool is_instance() const { return role_ == Role::Instance; }
    const std::string& name() const { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }

    int size() const { return static_cast<int>(universe_.size()); }
    const std::vector<std::string>& universe() const { return universe_; }
    const std::string& element_name(int i) const { return universe_.at(i); }
    int element_index(const std::string& name) const; // throws ParseError

    // Total access; tuple entries are universe indices.
    const ExtRat& value(int sym, std::span<const int> tuple) const;
    void set_value(int sym, std::vector<int> tuple, ExtRat v);
    void set_default(int sym, ExtRat v);
    bool has_default(int sym) const { return default_set_.at(sym); }
    const ExtRat& default_value(int sym) const { return defaults_.at(sym); }

    // Explicit (non-default) entries of one symbol, in lexicographic tuple
    // order. Entries equal to the default are normalized away on insert.
    const std::map<std::vector<int>, ExtRat>& explicit_values(int sym) const {
        return values_.at(sym);
    }

    const std::optional<Rat>& threshold() const { return threshold_; }
    void set_threshold(Rat tau) { threshold_ = std::move(tau); }

    // Throws RoleViolation unless every value is finite and >= 0.
    void validate_instance_role() const;
    // Throws ParseError if a template symbol has neither full enumeration
    // nor a default value.
    void validate_total() const;

    friend bool operator==(const ValuedStructure&, const ValuedStructure&) = default;

private:
    Signature sig_;
    Role role_ = Role::Template;
    std::string name_;
    std::vector<std::string> universe_;
    std::map<std::string, int> elem_index_;
    std::vector<std::map<std::vector<int>, ExtRat>> values_;
    std::vector<ExtRat> defaults_;
    std::vector<bool> default_set_;
    std::optional<Rat> threshold_;
};

// A crisp relational structure given by membership lists; input to the
// MaxCSP approximation encoders.
struct CrispStructure {
    Signature sig;
    std::string name;
    std::vector<std::string> universe;
    std::vector<std::set<std::vector<int>>> members; // per symbol

    int element_index(const std::string& name) const;
};

// One positive-weight constraint R(v) of an instance.
struct Constraint {
    int sym = 0;
    std::vector<int> vars;
    Rat weight;
    friend bool operator==(const Constraint&, const Constraint&) = default;
};

void check_similar(const ValuedStructure& a, const ValuedStructure& b);

// Exactly the positive-weight tuples of an instance-role structure, in
// symbol-major, tuple-lexicographic order.
std::vector<Constraint> constraints(const ValuedStructure& inst);

// Val(I, A, h) where h maps universe indices of I to universe indices of A.
ExtRat val(const ValuedStructure& inst, const ValuedStructure& tmpl,
           std::span<const int> assignment);

struct OptResult {
    ExtRat value;
    std::vector<int> witness; // lexicographically least minimizer
};

inline constexpr std::uint64_t kDefaultOptBudget = 10'000'000;

// Exact minimum of Val over all |A|^|I| assignments, by enumeration.
OptResult opt(const ValuedStructure& inst, const ValuedStructure& tmpl,
              std::uint64_t budget = kDefaultOptBudget);

// ---- parsing and serialization ----------------------------------------

ValuedStructure parse_structure(const std::string& text);
ValuedStructure load_structure(const std::string& path);
std::string serialize(const ValuedStructure& s);

CrispStructure parse_crisp(const std::string& text);
CrispStructure load_crisp(const std::string& path);

// ---- generators --------------------------------------------------------

// MaxCSP c-approximation template pair: R^A'(a) = -1 on members, 0 off;
// R^B' = (1/c) * R^A'. Requires 0 < c <= 1.
std::pair<ValuedStructure, ValuedStructure> maxcsp_encode(const CrispStructure& a,
                                                          const Rat& c);

// 0-1 valued instance with threshold -beta * m, m = number of listed
// constraint tuples. Requires 0 < beta <= 1.
ValuedStructure maxcsp_instance(const CrispStructure& inst, const Rat& beta);

struct TwistResult {
    ValuedStructure twisted;      // weights of `intermediate` scaled by 2k
    ValuedStructure intermediate; // the unique equality solution for eta
    morph::MapDistribution forward;  // I ->df intermediate (uniform, 2k maps)
    morph::MapDistribution backward; // intermediate ->df I (projection)
};

// The k-fold twist of a connected instance with |I| >= 2: universe
// {0..k-1} x I, weights accumulated over the 2k maps f_j, f'_j.
TwistResult k_fold_twist(const ValuedStructure& inst, int k);

// ---- small tuple utilities ---------------------------------------------

// Advances `tuple` (entries in [0, base)) lexicographically; false at wrap.
bool next_tuple(std::vector<int>& tuple, int base);

std::string tuple_str(const ValuedStructure& s, std::span<const int> tuple);

} // namespace pvcsp::model
