#include "pvcsp/wl.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "pvcsp/sha256.hpp"

namespace pvcsp::wl {

std::string VertexLabel::str() const {
    if (!is_constraint)
        return "var";
    return "con[" + symbol + "," + weight.str() + "]";
}

std::string positions_str(const std::vector<int>& positions) {
    std::string out = "{";
    for (size_t i = 0; i < positions.size(); ++i) {
        if (i)
            out += ",";
        out += std::to_string(positions[i]);
    }
    return out + "}";
}

FactorGraph factor_graph(const model::ValuedStructure& inst) {
    FactorGraph g;
    g.num_vars = inst.size();
    g.labels.assign(inst.size(), VertexLabel{});
    auto cons = model::constraints(inst);
    for (const model::Constraint& c : cons) {
        VertexLabel l;
        l.is_constraint = true;
        l.symbol = inst.signature().symbol(c.sym).name;
        l.weight = c.weight;
        g.labels.push_back(l);
    }
    g.adj.resize(g.num_vertices());
    for (int ci = 0; ci < static_cast<int>(cons.size()); ++ci) {
        int con_vertex = g.num_vars + ci;
        std::map<int, std::vector<int>> by_var; // variable -> 1-based positions
        for (int i = 0; i < static_cast<int>(cons[ci].vars.size()); ++i)
            by_var[cons[ci].vars[i]].push_back(i + 1);
        for (auto& [var, positions] : by_var) {
            int e = static_cast<int>(g.edges.size());
            g.edges.push_back({var, con_vertex, positions});
            g.adj[var].emplace_back(con_vertex, e);
            g.adj[con_vertex].emplace_back(var, e);
        }
    }
    return g;
}

bool is_connected(const FactorGraph& g) {
    int n = g.num_vertices();
    if (n == 0)
        return false;
    std::vector<bool> seen(n, false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int reached = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (auto [w, e] : g.adj[u])
            if (!seen[w]) {
                seen[w] = true;
                ++reached;
                q.push(w);
            }
    }
    return reached == n;
}

RefineInput make_input(const FactorGraph& g) {
    std::vector<int> offsets;
    return merge_inputs({&g}, offsets);
}

RefineInput merge_inputs(const std::vector<const FactorGraph*>& graphs,
                         std::vector<int>& offsets) {
    RefineInput in;
    offsets.clear();
    for (const FactorGraph* g : graphs) {
        int off = static_cast<int>(in.base.size());
        offsets.push_back(off);
        for (const VertexLabel& l : g->labels)
            in.base.push_back(l.str());
        for (int v = 0; v < g->num_vertices(); ++v) {
            std::vector<std::pair<std::string, int>> nbrs;
            for (auto [w, e] : g->adj[v])
                nbrs.emplace_back(positions_str(g->edges[e].positions), w + off);
            in.adj.push_back(std::move(nbrs));
        }
    }
    return in;
}

namespace {

struct Interner {
    std::map<std::string, int> ids;        // digest -> color id
    std::vector<std::string> digests;      // color id -> digest
    std::map<std::string, std::string> defs;

    int intern(const std::string& def) {
        std::string digest = sha256_hex(def);
        auto [it, fresh] = defs.emplace(digest, def);
        if (!fresh && it->second != def)
            throw InternalError("color digest collision detected");
        auto [jt, inserted] = ids.emplace(digest, static_cast<int>(digests.size()));
        if (inserted)
            digests.push_back(digest);
        return jt->second;
    }
};

} // namespace

ColorPartition refine_input(const RefineInput& in) {
    const int n = static_cast<int>(in.base.size());
    ColorPartition p;
    Interner intern;

    std::vector<int> cur(n);
    for (int v = 0; v < n; ++v)
        cur[v] = intern.intern("L0:" + in.base[v]);
    p.history.push_back(cur);

    auto classes = [&](const std::vector<int>& colors) {
        std::map<int, int> seen;
        for (int c : colors)
            seen[c]++;
        return seen.size();
    };

    size_t prev_classes = classes(cur);
    for (int round = 1; round <= n + 1; ++round) {
        std::vector<int> next(n);
        for (int v = 0; v < n; ++v) {
            std::vector<std::string> parts;
            parts.reserve(in.adj[v].size());
            for (const auto& [elabel, w] : in.adj[v])
                parts.push_back(elabel + ">" + intern.digests[cur[w]]);
            std::sort(parts.begin(), parts.end());
            std::ostringstream def;
            def << "LK:(" << in.base[v] << "|";
            for (const auto& s : parts)
                def << s << ";";
            def << ")";
            next[v] = intern.intern(def.str());
        }
        size_t next_classes = classes(next);
        if (next_classes == prev_classes) {
            // The round-(k+1) partition refines round k; equal class counts
            // mean the partition stabilized at round k = round - 1.
            p.rounds = round - 1;
            p.color = cur;
            p.digests = intern.digests;
            p.defs = std::move(intern.defs);
            return p;
        }
        prev_classes = next_classes;
        cur = std::move(next);
        p.history.push_back(cur);
    }
    throw InternalError("color refinement did not stabilize within the bound");
}

ColorPartition refine(const FactorGraph& g) { return refine_input(make_input(g)); }

std::map<std::string, long> digest_multiset(const ColorPartition& p, int begin,
                                            int end) {
    std::map<std::string, long> out;
    for (int v = begin; v < end; ++v)
        out[p.vertex_digest(v)]++;
    return out;
}

namespace {

struct JointRefinement {
    FactorGraph ga, gb;
    std::vector<int> offsets;
    ColorPartition partition;
};

JointRefinement joint_refine(const model::ValuedStructure& a,
                             const model::ValuedStructure& b) {
    model::check_similar(a, b);
    JointRefinement j;
    j.ga = factor_graph(a);
    j.gb = factor_graph(b);
    j.partition = refine_input(merge_inputs({&j.ga, &j.gb}, j.offsets));
    return j;
}

} // namespace

bool equiv1(const model::ValuedStructure& a, const model::ValuedStructure& b) {
    JointRefinement j = joint_refine(a, b);
    auto ma = digest_multiset(j.partition, j.offsets[0], j.offsets[0] + j.ga.num_vars);
    auto mb = digest_multiset(j.partition, j.offsets[1], j.offsets[1] + j.gb.num_vars);
    return ma == mb;
}

bool weak_congruent(const model::ValuedStructure& a, const model::ValuedStructure& b) {
    JointRefinement j = joint_refine(a, b);
    auto ma = digest_multiset(j.partition, j.offsets[0],
                              j.offsets[0] + j.ga.num_vertices());
    auto mb = digest_multiset(j.partition, j.offsets[1],
                              j.offsets[1] + j.gb.num_vertices());
    auto scale = [](std::map<std::string, long>& m, long factor) {
        for (auto it = m.begin(); it != m.end();) {
            it->second *= factor;
            it = it->second == 0 ? m.erase(it) : std::next(it);
        }
    };
    scale(ma, b.size());
    scale(mb, a.size());
    return ma == mb;
}

std::map<std::string, long> degree_sequence(const model::ValuedStructure& inst) {
    FactorGraph g = factor_graph(inst);
    ColorPartition p = refine(g);
    return digest_multiset(p, 0, g.num_vertices());
}

} // namespace pvcsp::wl
