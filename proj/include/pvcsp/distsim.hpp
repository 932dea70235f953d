#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pvcsp/model.hpp"
#include "pvcsp/relax.hpp"
#include "pvcsp/wl.hpp"

namespace pvcsp::distsim {

enum class Phase { Refining, Identified, ExchangingFragments, Solving, Halted };
enum class Verdict { None, Yes, No };

const char* phase_name(Phase p);
const char* verdict_name(Verdict v);

struct TraceRecord {
    int round = 0;
    int agent = 0; // canonical position: variables in universe order, then constraints
    Phase phase = Phase::Refining;
    std::string color;
    std::size_t fact_count = 0;
    Verdict verdict = Verdict::None;
};

// Deterministic simulator of the anonymous synchronous network on G(I).
// Schedule: T refinement rounds (T = |I| + |C_I|), one identifier round,
// T flooding rounds; agents assemble and solve the reduced program inside
// the last flooding round. Agents are executed sequentially in canonical
// order within a round but read only previous-round messages, which is
// observationally equivalent to true synchrony.
class Network {
public:
    Network(const model::ValuedStructure& inst, const model::ValuedStructure& tmpl_a,
            const model::ValuedStructure& tmpl_b, Rat tau);

    void step();           // one synchronous round; ScheduleExceeded past the end
    bool done() const { return round_ >= total_rounds_; }
    int round() const { return round_; }
    int total_rounds() const { return total_rounds_; }

    struct Agent {
        // Fixed local knowledge: own label and adjacent channel labels.
        wl::VertexLabel label;
        std::vector<std::vector<int>> channel_labels;

        Phase phase = Phase::Refining;
        std::string color;
        std::map<std::string, std::string> defs; // color DAG: digest -> definition
        std::vector<std::string> nbr_ids;        // per channel, after identification
        std::string identifier;
        std::set<std::string> facts;
        Verdict verdict = Verdict::None;

        // Simulator-level routing; never read by the transition function.
        std::vector<int> channel_peer;
        std::vector<std::string> inbox_colors; // per channel
    };

    const std::vector<Agent>& agents() const { return agents_; }
    const std::vector<TraceRecord>& trace() const { return trace_; }
    const wl::FactorGraph& graph() const { return graph_; }

    Verdict verdict() const;

private:
    struct Message {
        std::string color;
        std::map<std::string, std::string> defs;
        std::set<std::string> facts;
    };

    void refine_round();
    void identifier_round();
    void flood_round(bool first, bool last);
    void generate_local_facts(int idx, Agent& agent);
    void assemble_and_halt();
    relax::ReducedClasses classes_from_facts(const std::set<std::string>& facts) const;
    void record_trace();
    void cross_check() const;

    model::ValuedStructure inst_, tmpl_a_, tmpl_b_;
    Rat tau_;
    int num_vars_ = 0, num_cons_ = 0;
    wl::FactorGraph graph_;
    std::vector<model::Constraint> cons_;
    std::vector<Agent> agents_;
    std::vector<TraceRecord> trace_;
    int round_ = 0;
    int t_refine_ = 0;
    int total_rounds_ = 0;
};

Network build_network(const model::ValuedStructure& inst,
                      const model::ValuedStructure& tmpl_a,
                      const model::ValuedStructure& tmpl_b, Rat tau);

struct RunResult {
    Verdict verdict = Verdict::None;
    int rounds = 0;
    std::vector<TraceRecord> trace;
};

// Runs to completion; asserts agreement, reconstructed-program equality with
// the centralized reduced build, and the ratio-protocol invariants.
RunResult run(Network& network);

} // namespace pvcsp::distsim
