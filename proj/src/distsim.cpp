#include "pvcsp/distsim.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "pvcsp/sha256.hpp"

namespace pvcsp::distsim {

const char* phase_name(Phase p) {
    switch (p) {
    case Phase::Refining: return "refining";
    case Phase::Identified: return "identified";
    case Phase::ExchangingFragments: return "exchanging-fragments";
    case Phase::Solving: return "solving";
    case Phase::Halted: return "halted";
    }
    return "?";
}

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::None: return "none";
    case Verdict::Yes: return "Yes";
    case Verdict::No: return "No";
    }
    return "?";
}

namespace {

void merge_defs(std::map<std::string, std::string>& into,
                const std::map<std::string, std::string>& from) {
    for (const auto& [digest, def] : from) {
        auto [it, fresh] = into.emplace(digest, def);
        if (!fresh && it->second != def)
            throw ProtocolViolation("color digest collision across agents");
    }
}

std::string intern_color(std::map<std::string, std::string>& defs,
                         const std::string& def) {
    std::string digest = sha256_hex(def);
    auto [it, fresh] = defs.emplace(digest, def);
    if (!fresh && it->second != def)
        throw ProtocolViolation("color digest collision");
    return digest;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (;;) {
        size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

Network::Network(const model::ValuedStructure& inst, const model::ValuedStructure& tmpl_a,
                 const model::ValuedStructure& tmpl_b, Rat tau)
    : inst_(inst), tmpl_a_(tmpl_a), tmpl_b_(tmpl_b), tau_(std::move(tau)) {
    model::check_similar(inst_, tmpl_a_);
    model::check_similar(tmpl_a_, tmpl_b_);
    if (!inst_.is_instance())
        throw RoleViolation("the network input must be an instance");
    graph_ = wl::factor_graph(inst_);
    if (!wl::is_connected(graph_))
        throw Disconnected("distributed runs require a connected instance");
    cons_ = model::constraints(inst_);
    num_vars_ = graph_.num_vars;
    num_cons_ = graph_.num_constraints();
    t_refine_ = graph_.num_vertices();
    total_rounds_ = 2 * t_refine_ + 1;

    agents_.resize(graph_.num_vertices());
    for (int v = 0; v < graph_.num_vertices(); ++v) {
        Agent& a = agents_[v];
        a.label = graph_.labels[v];
        for (auto [w, e] : graph_.adj[v]) {
            a.channel_labels.push_back(graph_.edges[e].positions);
            a.channel_peer.push_back(w);
        }
        a.color = intern_color(a.defs, "L0:" + a.label.str());
        a.inbox_colors.resize(a.channel_peer.size());
    }
    record_trace();
}

Network build_network(const model::ValuedStructure& inst,
                      const model::ValuedStructure& tmpl_a,
                      const model::ValuedStructure& tmpl_b, Rat tau) {
    return Network(inst, tmpl_a, tmpl_b, std::move(tau));
}

void Network::record_trace() {
    for (int v = 0; v < static_cast<int>(agents_.size()); ++v) {
        const Agent& a = agents_[v];
        trace_.push_back({round_, v, a.phase, a.color, a.facts.size(), a.verdict});
    }
}

void Network::step() {
    if (done())
        throw ScheduleExceeded("network already halted");
    ++round_;
    if (round_ <= t_refine_)
        refine_round();
    else if (round_ == t_refine_ + 1)
        identifier_round();
    else
        flood_round(round_ == t_refine_ + 2, round_ == total_rounds_);
    record_trace();
}

void Network::refine_round() {
    // Read phase: every agent broadcasts its previous-round color and table.
    std::vector<Message> outgoing(agents_.size());
    for (size_t v = 0; v < agents_.size(); ++v)
        outgoing[v] = {agents_[v].color, agents_[v].defs, {}};
    // Write phase.
    for (auto& a : agents_) {
        for (size_t ch = 0; ch < a.channel_peer.size(); ++ch) {
            const Message& msg = outgoing[a.channel_peer[ch]];
            a.inbox_colors[ch] = msg.color;
            merge_defs(a.defs, msg.defs);
        }
        std::vector<std::string> parts;
        for (size_t ch = 0; ch < a.channel_peer.size(); ++ch)
            parts.push_back(wl::positions_str(a.channel_labels[ch]) + ">" +
                            a.inbox_colors[ch]);
        std::sort(parts.begin(), parts.end());
        std::ostringstream def;
        def << "LK:(" << a.label.str() << "|";
        for (const auto& p : parts)
            def << p << ";";
        def << ")";
        a.color = intern_color(a.defs, def.str());
    }
}

void Network::identifier_round() {
    std::vector<std::string> outgoing(agents_.size());
    for (size_t v = 0; v < agents_.size(); ++v)
        outgoing[v] = agents_[v].color;
    for (auto& a : agents_) {
        a.identifier = a.color;
        a.nbr_ids.resize(a.channel_peer.size());
        for (size_t ch = 0; ch < a.channel_peer.size(); ++ch)
            a.nbr_ids[ch] = outgoing[a.channel_peer[ch]];
        a.phase = Phase::Identified;
    }
}

// Fact grammar (canonical strings, content-addressed):
//   V|<id>                       variable class announcement
//   C|<id>|<sym>|<w>|<groups>|<pos var classes>   constraint class fragment
//   K|<id1>|<id2>|<ratio>        k_{id1} : k_{id2} as an exact rational
void Network::generate_local_facts(int idx, Agent& a) {
    if (!a.label.is_constraint) {
        a.facts.insert("V|" + a.identifier);
        // Edge counts |v[S, c]| per incident (label, class); the counts for
        // one class must agree across labels, and ratios between classes are
        // label-free.
        std::map<std::string, std::map<std::string, long>> counts; // id -> S -> n
        for (size_t ch = 0; ch < a.channel_peer.size(); ++ch)
            counts[a.nbr_ids[ch]][wl::positions_str(a.channel_labels[ch])]++;
        std::map<std::string, long> per_class;
        for (const auto& [id, by_label] : counts) {
            long n = by_label.begin()->second;
            for (const auto& [s, count] : by_label)
                if (count != n)
                    throw ProtocolViolation("incident edge counts disagree across "
                                            "labels for one constraint class");
            per_class[id] = n;
        }
        for (auto it = per_class.begin(); it != per_class.end(); ++it)
            for (auto jt = std::next(it); jt != per_class.end(); ++jt) {
                Rat ratio = Rat(it->second) / Rat(jt->second);
                a.facts.insert("K|" + it->first + "|" + jt->first + "|" + ratio.str());
            }
        return;
    }

    // Constraint agent: recover the position pattern from channel labels.
    int arity = 0;
    for (const auto& s : a.channel_labels)
        arity += static_cast<int>(s.size());
    std::vector<int> pos_channel(arity, -1);
    for (size_t ch = 0; ch < a.channel_labels.size(); ++ch)
        for (int p : a.channel_labels[ch]) // 1-based positions
            pos_channel[p - 1] = static_cast<int>(ch);
    std::vector<int> groups(arity);
    std::map<int, int> first;
    int next = 0;
    std::ostringstream gtxt, vtxt;
    for (int p = 0; p < arity; ++p) {
        auto [it, fresh] = first.emplace(pos_channel[p], next);
        if (fresh)
            ++next;
        groups[p] = it->second;
        gtxt << (p ? "," : "") << groups[p];
        vtxt << (p ? "," : "") << a.nbr_ids[pos_channel[p]];
    }
    a.facts.insert("C|" + a.identifier + "|" + a.label.symbol + "|" +
                   a.label.weight.str() + "|" + gtxt.str() + "|" + vtxt.str());
}

void Network::flood_round(bool first, bool last) {
    if (first)
        for (size_t v = 0; v < agents_.size(); ++v) {
            agents_[v].phase = Phase::ExchangingFragments;
            generate_local_facts(static_cast<int>(v), agents_[v]);
        }
    std::vector<std::set<std::string>> outgoing(agents_.size());
    for (size_t v = 0; v < agents_.size(); ++v)
        outgoing[v] = agents_[v].facts;
    for (auto& a : agents_)
        for (int peer : a.channel_peer)
            a.facts.insert(outgoing[peer].begin(), outgoing[peer].end());
    if (last)
        assemble_and_halt();
}

relax::ReducedClasses Network::classes_from_facts(
    const std::set<std::string>& facts) const {
    relax::ReducedClasses classes;
    std::map<std::pair<std::string, std::string>, Rat> ratios;
    std::map<std::string, relax::ReducedClasses::ConClass> con_classes;

    for (const std::string& fact : facts) {
        auto fields = split(fact, '|');
        if (fields[0] == "V") {
            classes.var_class_ids.push_back(fields[1]);
        } else if (fields[0] == "C") {
            relax::ReducedClasses::ConClass cc;
            cc.id = fields[1];
            cc.sym = tmpl_a_.signature().index_of(fields[2]);
            cc.weight = Rat::parse(fields[3]);
            for (const std::string& g : split(fields[4], ','))
                cc.pos_group.push_back(std::stoi(g));
            for (const std::string& v : split(fields[5], ','))
                cc.pos_var_class.push_back(v);
            auto [it, fresh] = con_classes.emplace(cc.id, cc);
            if (!fresh)
                throw ProtocolViolation("conflicting fragments for one "
                                        "constraint class");
        } else if (fields[0] == "K") {
            Rat ratio = Rat::parse(fields[3]);
            auto key = std::make_pair(fields[1], fields[2]);
            auto [it, fresh] = ratios.emplace(key, ratio);
            if (!fresh && it->second != ratio)
                throw ProtocolViolation("conflicting ratio facts");
        } else {
            throw ProtocolViolation("unknown fact kind");
        }
    }
    std::sort(classes.var_class_ids.begin(), classes.var_class_ids.end());

    // Reconstruct the coefficients from any spanning tree of the ratio
    // graph, then normalize so their sum is |C_I|.
    std::map<std::string, Rat> rel;
    if (!con_classes.empty()) {
        std::map<std::string, std::vector<std::pair<std::string, Rat>>> adj;
        for (const auto& [key, ratio] : ratios) {
            adj[key.first].emplace_back(key.second, ratio);
            adj[key.second].emplace_back(key.first, Rat(1) / ratio);
        }
        for (auto& [id, nbrs] : adj)
            std::sort(nbrs.begin(), nbrs.end());
        const std::string& root = con_classes.begin()->first;
        rel[root] = Rat(1);
        std::queue<std::string> frontier;
        frontier.push(root);
        while (!frontier.empty()) {
            std::string cur = frontier.front();
            frontier.pop();
            for (const auto& [nbr, ratio] : adj[cur]) {
                // ratio = k_cur / k_nbr
                Rat value = rel.at(cur) / ratio;
                auto [it, fresh] = rel.emplace(nbr, value);
                if (fresh)
                    frontier.push(nbr);
                else if (it->second != value)
                    throw ProtocolViolation("inconsistent ratio cycle");
            }
        }
        for (const auto& [id, cc] : con_classes)
            if (!rel.count(id))
                throw ProtocolViolation("ratio graph is disconnected");
        Rat total(0);
        for (const auto& [id, r] : rel) {
            if (r.sign() <= 0)
                throw ProtocolViolation("nonpositive reconstructed coefficient");
            total += r;
        }
        Rat scale = Rat(num_cons_) / total;
        for (auto& [id, r] : rel) {
            r *= scale;
            if (!r.is_integer() || r.sign() <= 0)
                throw ProtocolViolation("reconstructed coefficient is not a "
                                        "positive integer");
        }
    }
    for (auto& [id, cc] : con_classes) {
        cc.k = rel.at(id);
        classes.con_classes.push_back(cc);
    }
    return classes;
}

void Network::assemble_and_halt() {
    std::map<std::string, Verdict> memo; // canonical program -> verdict
    for (auto& a : agents_) {
        a.phase = Phase::Solving;
        relax::ReducedClasses classes = classes_from_facts(a.facts);
        relax::AssembledReduced assembled =
            relax::assemble_reduced_program(classes, tmpl_a_);
        std::string text = lp::canonical_text(assembled.program);
        auto it = memo.find(text);
        if (it == memo.end()) {
            relax::RelaxOutcome outcome = relax::optimize(assembled.program);
            Verdict v = outcome.value <= ExtRat(tau_) ? Verdict::Yes : Verdict::No;
            it = memo.emplace(text, v).first;
        }
        a.verdict = it->second;
        a.phase = Phase::Halted;
    }
    cross_check();
}

void Network::cross_check() const {
    // Agreement.
    for (const auto& a : agents_) {
        if (a.verdict == Verdict::None || a.verdict != agents_.front().verdict)
            throw ProtocolViolation("agents disagree on the verdict");
        if (a.facts != agents_.front().facts)
            throw ProtocolViolation("flooding did not converge");
    }
    if (agents_.empty())
        return;

    // The identifier partition must equal the centralized stabilized one.
    wl::ColorPartition part = wl::refine(graph_);
    std::map<std::string, std::set<int>> by_identifier, by_digest;
    for (int v = 0; v < graph_.num_vertices(); ++v) {
        by_identifier[agents_[v].identifier].insert(v);
        by_digest[part.vertex_digest(v)].insert(v);
    }
    std::set<std::set<int>> p1, p2;
    for (const auto& [id, members] : by_identifier)
        p1.insert(members);
    for (const auto& [id, members] : by_digest)
        p2.insert(members);
    if (p1 != p2)
        throw ProtocolViolation("identifier partition differs from the "
                                "centralized refinement");

    // Row-for-row equality with the centralized reduced program, after
    // renaming distributed identifiers to centralized digests.
    std::map<std::string, std::string> rename;
    for (const auto& [id, members] : by_identifier)
        rename[id] = part.vertex_digest(*members.begin());
    relax::ReducedClasses classes = classes_from_facts(agents_.front().facts);
    for (auto& id : classes.var_class_ids)
        id = rename.at(id);
    std::sort(classes.var_class_ids.begin(), classes.var_class_ids.end());
    for (auto& cc : classes.con_classes) {
        cc.id = rename.at(cc.id);
        for (auto& v : cc.pos_var_class)
            v = rename.at(v);
    }
    std::sort(classes.con_classes.begin(), classes.con_classes.end(),
              [](const auto& x, const auto& y) { return x.id < y.id; });
    relax::AssembledReduced renamed = relax::assemble_reduced_program(classes, tmpl_a_);
    relax::RelaxationProgram central = relax::build_reduced(inst_, tmpl_a_);
    if (lp::canonical_text(renamed.program) != lp::canonical_text(central.program))
        throw ProtocolViolation("reconstructed program differs from the "
                                "centralized reduced program");
}

Verdict Network::verdict() const {
    if (agents_.empty())
        return Verdict::None;
    return agents_.front().verdict;
}

RunResult run(Network& network) {
    while (!network.done())
        network.step();
    return {network.verdict(), network.round(), network.trace()};
}

} // namespace pvcsp::distsim
