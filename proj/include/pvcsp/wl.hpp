#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pvcsp/model.hpp"
#include "pvcsp/rat.hpp"

namespace pvcsp::wl {

// Label of a factor-graph vertex: variables carry no data, a constraint
// vertex carries its symbol and (positive, finite) weight.
struct VertexLabel {
    bool is_constraint = false;
    std::string symbol;
    Rat weight;

    std::string str() const;
    friend bool operator==(const VertexLabel&, const VertexLabel&) = default;
};

// Edge between variable vertex `var` and constraint vertex `con`, labeled by
// the sorted set of 1-based positions the variable occupies in the tuple.
struct Edge {
    int var = 0;
    int con = 0;
    std::vector<int> positions;
};

std::string positions_str(const std::vector<int>& positions);

struct FactorGraph {
    int num_vars = 0;
    std::vector<VertexLabel> labels; // variables first, then constraints
    std::vector<Edge> edges;
    std::vector<std::vector<std::pair<int, int>>> adj; // vertex -> (nbr, edge)

    int num_vertices() const { return static_cast<int>(labels.size()); }
    int num_constraints() const { return num_vertices() - num_vars; }
};

FactorGraph factor_graph(const model::ValuedStructure& inst);

// Empty graphs count as disconnected (there is no agent to run anything on).
bool is_connected(const FactorGraph& g);

// Stabilized iterated-degree partition. Colors are interned integers backed
// by canonical digests; a digest is the hash of the color's definition node,
// whose children are the previous-round digests of the neighbors. The
// definition table doubles as a collision check: one digest, one definition.
struct ColorPartition {
    int rounds = 0;                        // first k with P_{k+1} = P_k
    std::vector<int> color;                // vertex -> stabilized color id
    std::vector<std::string> digests;      // color id -> digest (all rounds)
    std::vector<std::vector<int>> history; // round -> vertex -> color id
    std::map<std::string, std::string> defs; // digest -> definition

    const std::string& vertex_digest(int v) const { return digests.at(color.at(v)); }
};

// Refinement over an explicitly labeled graph; vertices of several factor
// graphs can be merged into one input for joint refinement.
struct RefineInput {
    std::vector<std::string> base;                              // delta_0 labels
    std::vector<std::vector<std::pair<std::string, int>>> adj;  // (edge label, nbr)
};

RefineInput make_input(const FactorGraph& g);
RefineInput merge_inputs(const std::vector<const FactorGraph*>& graphs,
                         std::vector<int>& offsets);

ColorPartition refine_input(const RefineInput& in);
ColorPartition refine(const FactorGraph& g);

// Multiset of stabilized digests over a contiguous vertex range.
std::map<std::string, long> digest_multiset(const ColorPartition& p, int begin,
                                            int end);

// I ==_1 J: equal multisets of stabilized colors over variable vertices,
// computed under joint refinement of the disjoint union.
bool equiv1(const model::ValuedStructure& a, const model::ValuedStructure& b);

// |J| * delta(I) = |I| * delta(J) over all vertices, under joint refinement.
bool weak_congruent(const model::ValuedStructure& a, const model::ValuedStructure& b);

// delta(I): multiset of stabilized digests over all vertices of G(I).
std::map<std::string, long> degree_sequence(const model::ValuedStructure& inst);

} // namespace pvcsp::wl
