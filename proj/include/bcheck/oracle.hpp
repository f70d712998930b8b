#pragma once

// Brute-force references: exhaustive behaviour enumeration, relational
// derivation search and breadth-first congruence search.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bcheck/ast.hpp"
#include "bcheck/congruence.hpp"
#include "bcheck/context.hpp"
#include "bcheck/printer.hpp"
#include "bcheck/typing.hpp"

namespace bcheck {

struct EnumConfig {
    std::size_t max_size = 0;
    std::vector<Variable> variables{Variable{0}};
    std::vector<Expr> expressions{expr::var(0), expr::boolean(true)};
    /// Adds inputs and outputs over the operation and location vocabularies.
    bool communication = false;
    std::vector<std::string> operations{"o"};
    std::vector<std::string> locations{"l"};
};

/// Every behaviour with node count in 1..max_size, each once: by size, then
/// Nil, assignments, communication atoms, If, While, Seq, Par.
inline std::vector<Behaviour> enumerate_behaviours(const EnumConfig& cfg) {
    using namespace behaviour;
    std::vector<std::vector<Behaviour>> by_size(cfg.max_size + 1);
    std::vector<Behaviour> out;
    for (std::size_t n = 1; n <= cfg.max_size; ++n) {
        auto& cur = by_size[n];
        if (n == 1) {
            cur.push_back(nil());
            for (auto x : cfg.variables)
                for (const auto& e : cfg.expressions) cur.push_back(Behaviour{Assign{x, e}});
            if (cfg.communication) {
                for (const auto& o : cfg.operations) {
                    for (auto x : cfg.variables) cur.push_back(input_oneway(o, x.index));
                    for (const auto& l : cfg.locations)
                        for (const auto& e : cfg.expressions) {
                            cur.push_back(notify(o, l, e));
                            for (auto x : cfg.variables) cur.push_back(solicit(o, l, e, x.index));
                        }
                }
            }
        } else {
            if (cfg.communication)
                for (const auto& o : cfg.operations)
                    for (auto x : cfg.variables)
                        for (auto y : cfg.variables)
                            for (const auto& body : by_size[n - 1]) cur.push_back(input_reqres(o, x.index, y.index, body));
            for (const auto& e : cfg.expressions)
                for (std::size_t i = 1; i + 1 < n; ++i)
                    for (const auto& a : by_size[i])
                        for (const auto& b : by_size[n - 1 - i]) cur.push_back(if_(e, a, b));
            for (const auto& e : cfg.expressions)
                for (const auto& a : by_size[n - 1]) cur.push_back(while_(e, a));
            for (int kind = 0; kind < 2; ++kind)
                for (std::size_t i = 1; i + 1 < n; ++i)
                    for (const auto& a : by_size[i])
                        for (const auto& b : by_size[n - 1 - i]) cur.push_back(kind == 0 ? seq(a, b) : par(a, b));
        }
        out.insert(out.end(), cur.begin(), cur.end());
    }
    return out;
}

/// Leaves built from up to `max_decls` distinct-variable declarations of
/// `pool` in every order, then all trees of at most `max_leaves` leaves.
inline std::vector<Context> context_pool(const std::vector<TypeDecl>& pool, std::size_t max_decls,
                                         std::size_t max_leaves) {
    std::vector<std::vector<TypeDecl>> seqs{{}};
    std::vector<Context> leaves;
    for (std::size_t len = 0; len <= max_decls; ++len) {
        std::vector<std::vector<TypeDecl>> next;
        for (const auto& s : seqs) {
            try {
                leaves.push_back(Context::leaf(s));
            } catch (const DuplicateDeclError&) {
                continue;
            }
            if (len == max_decls) continue;
            for (const auto& d : pool) {
                auto t = s;
                t.push_back(d);
                next.push_back(std::move(t));
            }
        }
        seqs = std::move(next);
    }
    std::vector<std::vector<Context>> by_leaves(max_leaves + 1);
    if (max_leaves >= 1) by_leaves[1] = leaves;
    for (std::size_t n = 2; n <= max_leaves; ++n)
        for (std::size_t i = 1; i < n; ++i)
            for (const auto& a : by_leaves[i])
                for (const auto& b : by_leaves[n - i]) by_leaves[n].push_back(Context::join(a, b));
    std::vector<Context> out;
    for (auto& v : by_leaves) out.insert(out.end(), v.begin(), v.end());
    return out;
}

/// The standard pool: declarations {x0 : bool, x0 : int, x1 : int}, leaves of
/// at most two declarations, trees of at most two leaves.
inline std::vector<Context> standard_context_pool() {
    std::vector<TypeDecl> decls{VarDecl{Variable{0}, NativeType::Bool}, VarDecl{Variable{0}, NativeType::Int},
                                VarDecl{Variable{1}, NativeType::Int}};
    return context_pool(decls, 2, 2);
}

// ---------------------------------------------------------------------------
// Relational derivation search

using DerivationSet = std::vector<std::pair<Context, Derivation>>;

namespace detail {

class BruteForce {
public:
    DerivationSet search(const Context& g, const Behaviour& b) {
        std::string key = pretty_context(g) + "\x1f" + pretty_behaviour(b);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        DerivationSet out = std::visit([&](const auto& n) { return rules(g, b, n); }, b.node);
        memo_.emplace(std::move(key), out);
        return out;
    }

private:
    static void add(DerivationSet& out, Derivation d) {
        Context c = d.output;
        out.emplace_back(std::move(c), std::move(d));
    }

    DerivationSet rules(const Context& g, const Behaviour& b, const Nil&) {
        DerivationSet out;
        add(out, {Rule::TNil, g, b, g, {}, {}});
        return out;
    }

    DerivationSet rules(const Context& g, const Behaviour& b, const If& n) {
        DerivationSet out;
        if (!expression_has_type(g, n.condition, NativeType::Bool)) return out;
        for (auto& [g1, d1] : search(g, *n.then_branch))
            for (auto& [g2, d2] : search(g, *n.else_branch))
                if (g1 == g2) add(out, {Rule::TIf, g, b, g1, {d1, d2}, {{g, n.condition, NativeType::Bool}}});
        return out;
    }

    DerivationSet rules(const Context& g, const Behaviour& b, const While& n) {
        DerivationSet out;
        if (!expression_has_type(g, n.condition, NativeType::Bool)) return out;
        for (auto& [g1, d1] : search(g, *n.body))
            if (g1 == g) add(out, {Rule::TWhile, g, b, g, {d1}, {{g, n.condition, NativeType::Bool}}});
        return out;
    }

    DerivationSet rules(const Context& g, const Behaviour& b, const Seq& n) {
        DerivationSet out;
        for (auto& [g1, d1] : search(g, *n.first))
            for (auto& [g2, d2] : search(g1, *n.second)) add(out, {Rule::TSeq, g, b, g2, {d1, d2}, {}});
        return out;
    }

    DerivationSet rules(const Context& g, const Behaviour& b, const Par& n) {
        DerivationSet out;
        const Join* j = g.as_join();
        if (!j) return out;
        for (auto& [g1, d1] : search(*j->left, *n.left))
            for (auto& [g2, d2] : search(*j->right, *n.right))
                add(out, {Rule::TPar, g, b, Context::join(g1, g2), {d1, d2}, {}});
        return out;
    }

    DerivationSet rules(const Context& g, const Behaviour& b, const Assign& n) {
        DerivationSet out;
        for (NativeType t : kNativeTypes)
            if (expression_has_type(g, n.value, t))
                add(out, {Rule::TAssign, g, b, update_var(n.target, t, g), {}, {{g, n.value, t}}});
        return out;
    }

    DerivationSet input(const Context& g, const Behaviour& subject, const Eta& eta) {
        DerivationSet out;
        if (const auto* ow = std::get_if<OneWay>(&eta)) {
            for (NativeType t : kNativeTypes)
                if (member(TypeDecl{InputOneWayDecl{ow->op, t}}, g))
                    add(out, {Rule::TInOneWay, g, subject, update_var(ow->var, t, g), {}, {}});
            return out;
        }
        const auto& rr = std::get<RequestResponse>(eta);
        for (NativeType t : kNativeTypes)
            for (NativeType u : kNativeTypes) {
                if (!member(TypeDecl{InputReqResDecl{rr.op, t, u}}, g)) continue;
                for (auto& [g1, d1] : search(update_var(rr.request, t, g), *rr.body)) {
                    auto reply = lookup_var(rr.response, g1);
                    if (reply && reply->type == u) add(out, {Rule::TInReqRes, g, subject, g1, {d1}, {}});
                }
            }
        return out;
    }

    DerivationSet rules(const Context& g, const Behaviour& b, const Input& n) { return input(g, b, n.eta); }

    DerivationSet rules(const Context& g, const Behaviour& b, const Output& n) {
        DerivationSet out;
        for (NativeType t : kNativeTypes) {
            if (const auto* no = std::get_if<Notification>(&n.eta)) {
                if (member(TypeDecl{OutputOneWayDecl{no->op, no->location, t}}, g) &&
                    expression_has_type(g, no->payload, t))
                    add(out, {Rule::TOutNotify, g, b, g, {}, {{g, no->payload, t}}});
                continue;
            }
            const auto& sr = std::get<SolicitResponse>(n.eta);
            if (!expression_has_type(g, sr.payload, t)) continue;
            for (NativeType u : kNativeTypes)
                if (member(TypeDecl{OutputReqResDecl{sr.op, sr.location, t, u}}, g))
                    add(out, {Rule::TOutSolicit, g, b, update_var(sr.response, u, g), {}, {{g, sr.payload, t}}});
        }
        return out;
    }

    DerivationSet rules(const Context& g, const Behaviour& b, const InputChoice& n) {
        // Partial derivations: premises so far and the common output, if fixed.
        std::vector<std::pair<std::vector<Derivation>, std::optional<Context>>> partial{{{}, std::nullopt}};
        for (const auto& br : n.branches) {
            std::vector<std::pair<std::vector<Derivation>, std::optional<Context>>> next;
            for (auto& [g1, d1] : input(g, Behaviour{Input{br.input}}, br.input))
                for (auto& [g2, d2] : search(g1, *br.body))
                    for (const auto& [prem, common] : partial) {
                        if (common && !(*common == g2)) continue;
                        auto p = prem;
                        p.push_back(d1);
                        p.push_back(d2);
                        next.emplace_back(std::move(p), g2);
                    }
            partial = std::move(next);
        }
        DerivationSet out;
        for (auto& [prem, common] : partial) add(out, {Rule::TChoice, g, b, *common, std::move(prem), {}});
        return out;
    }

    DerivationSet rules(const Context&, const Behaviour&, const Wait&) { return {}; }
    DerivationSet rules(const Context&, const Behaviour&, const Exec&) { return {}; }

    std::unordered_map<std::string, DerivationSet> memo_;
};

}  // namespace detail

/// Every (output, derivation) the rules admit for `b` under `g`, found by
/// exhaustive premise search memoized on (context, sub-behaviour).
inline DerivationSet brute_force_check(const Context& g, const Behaviour& b) {
    return detail::BruteForce().search(g, b);
}

// ---------------------------------------------------------------------------
// Congruence search

namespace detail {

template <class Visit>
void walk_ball(const Behaviour& b, std::size_t radius, Visit&& visit) {
    std::unordered_set<std::string> seen{pretty_behaviour(b)};
    visit(b, *seen.begin(), std::size_t{0});
    std::vector<Behaviour> frontier{b};
    for (std::size_t d = 1; d <= radius && !frontier.empty(); ++d) {
        std::vector<Behaviour> next;
        for (const auto& cur : frontier)
            for (const auto& s : applicable_steps(cur)) {
                Behaviour n = apply_step(cur, s);
                auto [it, fresh] = seen.insert(pretty_behaviour(n));
                if (!fresh) continue;
                visit(n, *it, d);
                next.push_back(std::move(n));
            }
        frontier = std::move(next);
    }
}

}  // namespace detail

/// Printed forms of all behaviours within `radius` rule applications of `b`,
/// mapped to their distance.
inline std::unordered_map<std::string, std::size_t> congruence_ball(const Behaviour& b, std::size_t radius) {
    std::unordered_map<std::string, std::size_t> out;
    detail::walk_ball(b, radius, [&](const Behaviour&, const std::string& k, std::size_t d) { out.emplace(k, d); });
    return out;
}

/// Shortest trace of at most `depth` steps from `b1` to `b2`, by
/// bidirectional breadth-first search over every applicable step.
inline std::optional<CongruenceTrace> exhaustive_congruence_search(const Behaviour& b1, const Behaviour& b2,
                                                                   std::size_t depth) {
    if (b1 == b2) return CongruenceTrace{};
    struct Visit {
        std::string parent;
        CongruenceStep step;  // applied to `parent` to reach this node
    };
    struct Side {
        std::unordered_map<std::string, std::optional<Visit>> seen;
        std::vector<std::pair<std::string, Behaviour>> frontier;
    };
    Side fwd, bwd;
    fwd.seen.emplace(pretty_behaviour(b1), std::nullopt);
    fwd.frontier.emplace_back(pretty_behaviour(b1), b1);
    bwd.seen.emplace(pretty_behaviour(b2), std::nullopt);
    bwd.frontier.emplace_back(pretty_behaviour(b2), b2);

    auto expand = [](Side& side, const Side& other) -> std::optional<std::string> {
        std::vector<std::pair<std::string, Behaviour>> next;
        std::optional<std::string> meet;
        for (const auto& [key, cur] : side.frontier)
            for (const auto& s : applicable_steps(cur)) {
                Behaviour n = apply_step(cur, s);
                std::string k = pretty_behaviour(n);
                if (!side.seen.emplace(k, Visit{key, s}).second) continue;
                if (!meet && other.seen.count(k)) meet = k;
                next.emplace_back(std::move(k), std::move(n));
            }
        side.frontier = std::move(next);
        return meet;
    };

    std::optional<std::string> meet;
    for (std::size_t used = 0; used < depth && !meet; ++used) {
        if (fwd.frontier.empty() || bwd.frontier.empty()) return std::nullopt;
        if (fwd.frontier.size() <= bwd.frontier.size()) meet = expand(fwd, bwd);
        else meet = expand(bwd, fwd);
    }
    if (!meet) return std::nullopt;

    CongruenceTrace head;
    for (std::string k = *meet; fwd.seen.at(k);) {
        const Visit& v = *fwd.seen.at(k);
        head.push_back(v.step);
        k = v.parent;
    }
    std::reverse(head.begin(), head.end());
    for (std::string k = *meet; bwd.seen.at(k);) {
        const Visit& v = *bwd.seen.at(k);
        head.push_back({v.step.position, inverse(v.step.rule)});
        k = v.parent;
    }
    return head;
}

struct Connectivity {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // i < j, sorted
    std::vector<std::string> key_changes;
    std::size_t ball_terms = 0;
};

/// All index pairs i < j of `terms` joined by a trace of at most `depth`
/// steps. Balls of radius ceil(depth/2) meet exactly when such a trace
/// exists, because every rule has an inverse at the same position.
///
/// Terms are grouped by `key` and only balls within a group are compared.
/// Every ball element is checked to carry its centre's key; each mismatch is
/// reported in `key_changes`. With none reported, balls from different groups
/// are disjoint, so the grouping loses no pair.
inline Connectivity connected_pairs(const std::vector<Behaviour>& terms, std::size_t depth,
                                    const std::function<std::string(const Behaviour&)>& key) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < terms.size(); ++i) groups[key(terms[i])].push_back(i);
    Connectivity out;
    std::size_t radius = (depth + 1) / 2;
    std::hash<std::string> hash;
    for (const auto& [label, ids] : groups) {
        std::unordered_map<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>> index;
        std::unordered_map<std::size_t, std::string> spelled;
        for (auto i : ids)
            detail::walk_ball(terms[i], radius, [&](const Behaviour& n, const std::string& k, std::size_t d) {
                ++out.ball_terms;
                if (d > 0 && key(n) != label)
                    out.key_changes.push_back(pretty_behaviour(terms[i]) + "  ~>  " + k);
                if (ids.size() < 2) return;
                std::size_t h = hash(k);
                auto [it, fresh] = spelled.emplace(h, k);
                if (!fresh && it->second != k) throw std::logic_error("connected_pairs: hash collision on " + k);
                index[h].emplace_back(i, d);
            });
        std::set<std::pair<std::size_t, std::size_t>> found;
        for (const auto& [h, hits] : index)
            for (std::size_t a = 0; a < hits.size(); ++a)
                for (std::size_t b = a + 1; b < hits.size(); ++b)
                    if (hits[a].first != hits[b].first && hits[a].second + hits[b].second <= depth)
                        found.emplace(std::min(hits[a].first, hits[b].first), std::max(hits[a].first, hits[b].first));
        out.pairs.insert(out.pairs.end(), found.begin(), found.end());
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

}  // namespace bcheck
