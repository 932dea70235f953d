#include "pvcsp/model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <queue>
#include <sstream>

namespace pvcsp::model {

namespace {

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok)
        out.push_back(tok);
    return out;
}

} // namespace

Signature::Signature(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {
    for (int i = 0; i < static_cast<int>(symbols_.size()); ++i) {
        const Symbol& s = symbols_[i];
        if (s.arity < 1)
            throw ParseError("symbol '" + s.name + "' has arity < 1");
        if (!index_.emplace(s.name, i).second)
            throw ParseError("duplicate symbol '" + s.name + "'");
    }
}

int Signature::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        throw UnknownSymbol("unknown symbol '" + name + "'");
    return it->second;
}

ValuedStructure::ValuedStructure(Signature sig, Role role,
                                 std::vector<std::string> universe, std::string name)
    : sig_(std::move(sig)), role_(role), name_(std::move(name)),
      universe_(std::move(universe)) {
    for (int i = 0; i < static_cast<int>(universe_.size()); ++i)
        if (!elem_index_.emplace(universe_[i], i).second)
            throw ParseError("duplicate universe element '" + universe_[i] + "'");
    values_.resize(sig_.size());
    defaults_.assign(sig_.size(), ExtRat(0));
    default_set_.assign(sig_.size(), role_ == Role::Instance);
}

int ValuedStructure::element_index(const std::string& name) const {
    auto it = elem_index_.find(name);
    if (it == elem_index_.end())
        throw ParseError("unknown universe element '" + name + "'");
    return it->second;
}

const ExtRat& ValuedStructure::value(int sym, std::span<const int> tuple) const {
    const auto& m = values_.at(sym);
    auto it = m.find(std::vector<int>(tuple.begin(), tuple.end()));
    if (it != m.end())
        return it->second;
    if (!default_set_.at(sym))
        throw InternalError("partial template: no value for a tuple of '" +
                            sig_.symbol(sym).name + "'");
    return defaults_.at(sym);
}

void ValuedStructure::set_value(int sym, std::vector<int> tuple, ExtRat v) {
    if (static_cast<int>(tuple.size()) != sig_.arity(sym))
        throw ArityMismatch("tuple arity mismatch for '" + sig_.symbol(sym).name + "'");
    for (int e : tuple)
        if (e < 0 || e >= size())
            throw ParseError("tuple element out of range");
    if (default_set_.at(sym) && v == defaults_.at(sym))
        values_.at(sym).erase(tuple);
    else
        values_.at(sym)[std::move(tuple)] = std::move(v);
}

void ValuedStructure::set_default(int sym, ExtRat v) {
    defaults_.at(sym) = std::move(v);
    default_set_.at(sym) = true;
    auto& m = values_.at(sym);
    for (auto it = m.begin(); it != m.end();)
        it = (it->second == defaults_.at(sym)) ? m.erase(it) : std::next(it);
}

void ValuedStructure::validate_instance_role() const {
    for (int s = 0; s < sig_.size(); ++s) {
        auto bad = [&](const ExtRat& v) { return v.is_inf() || v.finite().sign() < 0; };
        if (default_set_.at(s) && bad(defaults_.at(s)))
            throw RoleViolation("instance default for '" + sig_.symbol(s).name +
                                "' is negative or infinite");
        for (const auto& [t, v] : values_.at(s))
            if (bad(v))
                throw RoleViolation("instance weight " + v.str() + " for '" +
                                    sig_.symbol(s).name + "' " + tuple_str(*this, t));
    }
}

void ValuedStructure::validate_total() const {
    for (int s = 0; s < sig_.size(); ++s) {
        if (default_set_.at(s))
            continue;
        std::uint64_t need = 1;
        for (int i = 0; i < sig_.arity(s); ++i)
            need *= static_cast<std::uint64_t>(size());
        if (values_.at(s).size() != need)
            throw ParseError("symbol '" + sig_.symbol(s).name +
                             "' is not total: enumerate all tuples or add a default");
    }
}

int CrispStructure::element_index(const std::string& n) const {
    auto it = std::find(universe.begin(), universe.end(), n);
    if (it == universe.end())
        throw ParseError("unknown universe element '" + n + "'");
    return static_cast<int>(it - universe.begin());
}

void check_similar(const ValuedStructure& a, const ValuedStructure& b) {
    if (!(a.signature() == b.signature()))
        throw SignatureMismatch("structures are not similar");
}

std::vector<Constraint> constraints(const ValuedStructure& inst) {
    if (!inst.is_instance())
        throw RoleViolation("constraints() requires an instance-role structure");
    std::vector<Constraint> out;
    for (int s = 0; s < inst.signature().size(); ++s) {
        if (inst.has_default(s) && !inst.default_value(s).is_zero())
            throw RoleViolation("instance with nonzero default would have a "
                                "non-sparse constraint set");
        for (const auto& [tuple, v] : inst.explicit_values(s))
            if (!v.is_zero())
                out.push_back({s, tuple, v.finite()});
    }
    return out;
}

ExtRat val(const ValuedStructure& inst, const ValuedStructure& tmpl,
           std::span<const int> assignment) {
    check_similar(inst, tmpl);
    if (static_cast<int>(assignment.size()) != inst.size())
        throw DimensionMismatch("assignment size != |I|");
    for (int a : assignment)
        if (a < 0 || a >= tmpl.size())
            throw DimensionMismatch("assignment value out of range");
    ExtRat total(0);
    std::vector<int> image;
    for (const Constraint& c : constraints(inst)) {
        image.clear();
        for (int v : c.vars)
            image.push_back(assignment[v]);
        total += ExtRat(c.weight) * tmpl.value(c.sym, image);
    }
    return total;
}

OptResult opt(const ValuedStructure& inst, const ValuedStructure& tmpl,
              std::uint64_t budget) {
    check_similar(inst, tmpl);
    if (!inst.is_instance())
        throw RoleViolation("opt() requires an instance-role structure");
    if (inst.size() == 0)
        return {ExtRat(0), {}};
    if (tmpl.size() == 0)
        throw InvalidParameter("opt() over an empty template universe");

    std::uint64_t count = 1;
    for (int i = 0; i < inst.size(); ++i) {
        count *= static_cast<std::uint64_t>(tmpl.size());
        if (count > budget)
            throw BudgetExceeded("opt enumeration exceeds budget");
    }

    std::vector<int> h(inst.size(), 0);
    OptResult best{val(inst, tmpl, h), h};
    while (next_tuple(h, tmpl.size())) {
        ExtRat v = val(inst, tmpl, h);
        if (v < best.value)
            best = {v, h};
    }
    return best;
}

// ---- parsing -------------------------------------------------------------

namespace {

struct Line {
    int number;
    std::string text;
};

[[noreturn]] void fail(const Line& ln, const std::string& msg) {
    throw ParseError("line " + std::to_string(ln.number) + ": " + msg);
}

std::vector<Line> logical_lines(const std::string& text) {
    std::vector<Line> out;
    std::istringstream is(text);
    std::string raw;
    int n = 0;
    while (std::getline(is, raw)) {
        ++n;
        if (auto pos = raw.find('#'); pos != std::string::npos)
            raw.erase(pos);
        std::string t = trim(raw);
        if (!t.empty())
            out.push_back({n, t});
    }
    return out;
}

// "R (a,b) 3" -> symbol, elements, value-tail (possibly empty for crisp).
struct TupleLine {
    std::string symbol;
    std::vector<std::string> elems;
    std::string tail;
};

TupleLine parse_tuple_line(const Line& ln) {
    auto open = ln.text.find('(');
    auto close = ln.text.find(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        fail(ln, "expected 'SYMBOL (e1,...,ek) [value]'");
    TupleLine out;
    out.symbol = trim(ln.text.substr(0, open));
    if (out.symbol.empty() || out.symbol.find(' ') != std::string::npos)
        fail(ln, "bad symbol name");
    std::string inner = ln.text.substr(open + 1, close - open - 1);
    size_t start = 0;
    while (start <= inner.size()) {
        size_t comma = inner.find(',', start);
        std::string piece = (comma == std::string::npos)
                                ? inner.substr(start)
                                : inner.substr(start, comma - start);
        out.elems.push_back(trim(piece));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    for (const std::string& e : out.elems)
        if (e.empty())
            fail(ln, "empty tuple element");
    out.tail = trim(ln.text.substr(close + 1));
    return out;
}

struct ParsedHeader {
    Signature sig;
    std::string kind; // template | instance | crisp
    std::string name;
    size_t next; // index into lines after the universe line
    std::vector<std::string> universe;
};

ParsedHeader parse_header(const std::vector<Line>& lines) {
    if (lines.empty() || lines[0].text != "signature")
        throw ParseError("file must start with a 'signature' section");
    size_t i = 1;
    std::vector<Symbol> syms;
    for (; i < lines.size(); ++i) {
        auto toks = split_ws(lines[i].text);
        if (toks.size() == 1 || toks[0] == "template" || toks[0] == "instance" ||
            toks[0] == "crisp")
            break;
        if (toks.size() != 2)
            fail(lines[i], "expected 'SYMBOL ARITY'");
        int ar;
        try {
            ar = std::stoi(toks[1]);
        } catch (...) {
            fail(lines[i], "bad arity '" + toks[1] + "'");
        }
        syms.push_back({toks[0], ar});
    }
    if (syms.empty())
        throw ParseError("empty signature");
    if (i >= lines.size())
        throw ParseError("missing 'template'/'instance'/'crisp' declaration");
    auto decl = split_ws(lines[i].text);
    if (decl.size() != 2 ||
        (decl[0] != "template" && decl[0] != "instance" && decl[0] != "crisp"))
        fail(lines[i], "expected 'template NAME', 'instance NAME' or 'crisp NAME'");
    ParsedHeader out;
    out.sig = Signature(std::move(syms));
    out.kind = decl[0];
    out.name = decl[1];
    ++i;
    if (i >= lines.size() || split_ws(lines[i].text)[0] != "universe")
        throw ParseError("expected 'universe e1 e2 ...'");
    auto utoks = split_ws(lines[i].text);
    out.universe.assign(utoks.begin() + 1, utoks.end());
    out.next = i + 1;
    return out;
}

} // namespace

ValuedStructure parse_structure(const std::string& text) {
    auto lines = logical_lines(text);
    ParsedHeader h = parse_header(lines);
    if (h.kind == "crisp")
        throw ParseError("expected a valued structure, got 'crisp'");
    Role role = h.kind == "instance" ? Role::Instance : Role::Template;
    ValuedStructure s(h.sig, role, h.universe, h.name);

    std::vector<std::map<std::vector<int>, int>> seen(h.sig.size());
    for (size_t i = h.next; i < lines.size(); ++i) {
        const Line& ln = lines[i];
        auto toks = split_ws(ln.text);
        if (toks[0] == "default") {
            if (toks.size() != 3)
                fail(ln, "expected 'default SYMBOL VALUE'");
            int sym = h.sig.index_of(toks[1]);
            ExtRat v = ExtRat::parse(toks[2]);
            if (role == Role::Instance && (v.is_inf() || v.finite().sign() < 0))
                throw RoleViolation("line " + std::to_string(ln.number) +
                                    ": negative or infinite instance default");
            s.set_default(sym, v);
            continue;
        }
        if (toks[0] == "threshold") {
            if (role != Role::Instance)
                fail(ln, "threshold is only valid in instances");
            if (toks.size() != 2)
                fail(ln, "expected 'threshold VALUE'");
            s.set_threshold(Rat::parse(toks[1]));
            continue;
        }
        TupleLine tl = parse_tuple_line(ln);
        if (tl.tail.empty())
            fail(ln, "missing value");
        int sym = h.sig.index_of(tl.symbol);
        if (static_cast<int>(tl.elems.size()) != h.sig.arity(sym))
            throw ArityMismatch("line " + std::to_string(ln.number) +
                                ": arity mismatch for '" + tl.symbol + "'");
        std::vector<int> tuple;
        for (const std::string& e : tl.elems)
            tuple.push_back(s.element_index(e));
        if (!seen[sym].emplace(tuple, ln.number).second)
            fail(ln, "duplicate tuple");
        ExtRat v = ExtRat::parse(tl.tail);
        if (role == Role::Instance && (v.is_inf() || v.finite().sign() < 0))
            throw RoleViolation("line " + std::to_string(ln.number) +
                                ": negative or infinite instance weight");
        s.set_value(sym, std::move(tuple), std::move(v));
    }
    if (role == Role::Template)
        s.validate_total();
    else
        s.validate_instance_role();
    return s;
}

CrispStructure parse_crisp(const std::string& text) {
    auto lines = logical_lines(text);
    ParsedHeader h = parse_header(lines);
    if (h.kind != "crisp")
        throw ParseError("expected a 'crisp' structure");
    CrispStructure s;
    s.sig = h.sig;
    s.name = h.name;
    s.universe = h.universe;
    s.members.resize(h.sig.size());
    for (size_t i = h.next; i < lines.size(); ++i) {
        const Line& ln = lines[i];
        TupleLine tl = parse_tuple_line(ln);
        if (!tl.tail.empty())
            fail(ln, "crisp tuples carry no value");
        int sym = h.sig.index_of(tl.symbol);
        if (static_cast<int>(tl.elems.size()) != h.sig.arity(sym))
            throw ArityMismatch("line " + std::to_string(ln.number) +
                                ": arity mismatch for '" + tl.symbol + "'");
        std::vector<int> tuple;
        for (const std::string& e : tl.elems)
            tuple.push_back(s.element_index(e));
        s.members[sym].insert(std::move(tuple));
    }
    return s;
}

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

ValuedStructure load_structure(const std::string& path) {
    return parse_structure(slurp(path));
}

CrispStructure load_crisp(const std::string& path) { return parse_crisp(slurp(path)); }

std::string serialize(const ValuedStructure& s) {
    std::ostringstream os;
    os << "signature\n";
    for (int i = 0; i < s.signature().size(); ++i)
        os << "  " << s.signature().symbol(i).name << " "
           << s.signature().symbol(i).arity << "\n";
    os << (s.is_instance() ? "instance " : "template ")
       << (s.name().empty() ? "S" : s.name()) << "\n";
    os << "  universe";
    for (const std::string& e : s.universe())
        os << " " << e;
    os << "\n";
    for (int sym = 0; sym < s.signature().size(); ++sym) {
        const std::string& name = s.signature().symbol(sym).name;
        for (const auto& [tuple, v] : s.explicit_values(sym)) {
            os << "  " << name << " (";
            for (size_t i = 0; i < tuple.size(); ++i)
                os << (i ? "," : "") << s.element_name(tuple[i]);
            os << ") " << v.str() << "\n";
        }
        if (s.has_default(sym) && !(s.is_instance() && s.default_value(sym).is_zero()))
            os << "  default " << name << " " << s.default_value(sym).str() << "\n";
    }
    if (s.threshold())
        os << "  threshold " << s.threshold()->str() << "\n";
    return os.str();
}

// ---- generators -----------------------------------------------------------

std::pair<ValuedStructure, ValuedStructure> maxcsp_encode(const CrispStructure& a,
                                                          const Rat& c) {
    if (c <= Rat(0) || c > Rat(1))
        throw InvalidParameter("approximation factor must be in (0, 1]");
    ValuedStructure strict(a.sig, Role::Template, a.universe, a.name + "_strict");
    ValuedStructure relaxed(a.sig, Role::Template, a.universe, a.name + "_relaxed");
    for (int s = 0; s < a.sig.size(); ++s) {
        strict.set_default(s, ExtRat(0));
        relaxed.set_default(s, ExtRat(0));
        for (const auto& t : a.members[s]) {
            strict.set_value(s, t, ExtRat(Rat(-1)));
            relaxed.set_value(s, t, ExtRat(Rat(-1) / c));
        }
    }
    return {std::move(strict), std::move(relaxed)};
}

ValuedStructure maxcsp_instance(const CrispStructure& inst, const Rat& beta) {
    if (beta <= Rat(0) || beta > Rat(1))
        throw InvalidParameter("satisfaction fraction must be in (0, 1]");
    ValuedStructure out(inst.sig, Role::Instance, inst.universe, inst.name + "_pvcsp");
    long m = 0;
    for (int s = 0; s < inst.sig.size(); ++s)
        for (const auto& t : inst.members[s]) {
            out.set_value(s, t, ExtRat(1));
            ++m;
        }
    out.set_threshold(-beta * Rat(m));
    return out;
}

namespace {

// Variable co-occurrence connectivity; with |I| >= 2 this is equivalent to
// connectivity of the factor graph.
bool variables_connected(const ValuedStructure& inst) {
    int n = inst.size();
    if (n <= 1)
        return true;
    std::vector<std::vector<int>> adj(n);
    for (const Constraint& c : constraints(inst))
        for (size_t i = 0; i < c.vars.size(); ++i)
            for (size_t j = i + 1; j < c.vars.size(); ++j) {
                adj[c.vars[i]].push_back(c.vars[j]);
                adj[c.vars[j]].push_back(c.vars[i]);
            }
    std::vector<bool> seen(n, false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int reached = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int w : adj[u])
            if (!seen[w]) {
                seen[w] = true;
                ++reached;
                q.push(w);
            }
    }
    return reached == n;
}

} // namespace

TwistResult k_fold_twist(const ValuedStructure& inst, int k) {
    if (!inst.is_instance())
        throw RoleViolation("k_fold_twist requires an instance");
    if (k < 1)
        throw InvalidParameter("k must be >= 1");
    if (inst.size() < 2)
        throw TooSmall("k_fold_twist requires |I| >= 2");
    if (!variables_connected(inst))
        throw Disconnected("k_fold_twist requires a connected instance");

    int n = inst.size();
    std::vector<std::string> universe;
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < n; ++i)
            universe.push_back(std::to_string(j) + ":" + inst.element_name(i));
    auto layer_index = [n](int j, int i) { return j * n + i; };

    // The 2k maps: f_j(v_i) = (j, v_i), f'_j(v_i) = (i + j mod k, v_i).
    std::vector<std::vector<int>> maps;
    for (int j = 0; j < k; ++j) {
        std::vector<int> f(n);
        for (int i = 0; i < n; ++i)
            f[i] = layer_index(j, i);
        maps.push_back(std::move(f));
    }
    for (int j = 0; j < k; ++j) {
        std::vector<int> f(n);
        for (int i = 0; i < n; ++i)
            f[i] = layer_index((i + j) % k, i);
        maps.push_back(std::move(f));
    }

    TwistResult out;
    out.intermediate = ValuedStructure(inst.signature(), Role::Instance, universe,
                                       inst.name() + "_pretwist" + std::to_string(k));
    out.twisted = ValuedStructure(inst.signature(), Role::Instance, universe,
                                  inst.name() + "_twist" + std::to_string(k));
    Rat two_k(2L * k);
    std::vector<std::map<std::vector<int>, Rat>> acc(inst.signature().size());
    for (const Constraint& c : constraints(inst)) {
        std::vector<int> image(c.vars.size());
        for (const auto& f : maps) {
            for (size_t i = 0; i < c.vars.size(); ++i)
                image[i] = f[c.vars[i]];
            acc[c.sym][image] += c.weight;
        }
    }
    for (int s = 0; s < inst.signature().size(); ++s)
        for (const auto& [tuple, w] : acc[s]) {
            out.intermediate.set_value(s, tuple, ExtRat(w / two_k));
            out.twisted.set_value(s, tuple, ExtRat(w));
        }

    out.forward.direction = morph::Direction::DualFractionalHom;
    for (const auto& f : maps)
        out.forward.support.emplace_back(f, Rat(1) / two_k);
    out.forward.canonicalize();

    std::vector<int> projection(k * n);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < n; ++i)
            projection[layer_index(j, i)] = i;
    out.backward.direction = morph::Direction::DualFractionalHom;
    out.backward.support.emplace_back(std::move(projection), Rat(1));
    return out;
}

bool next_tuple(std::vector<int>& tuple, int base) {
    for (int i = static_cast<int>(tuple.size()) - 1; i >= 0; --i) {
        if (++tuple[i] < base)
            return true;
        tuple[i] = 0;
    }
    return false;
}

std::string tuple_str(const ValuedStructure& s, std::span<const int> tuple) {
    std::string out = "(";
    for (size_t i = 0; i < tuple.size(); ++i) {
        if (i)
            out += ",";
        out += s.element_name(tuple[i]);
    }
    return out + ")";
}

} // namespace pvcsp::model
