#pragma once

// Structural congruence on behaviours: positioned rewrite steps, a canonical
// form, a decision procedure producing replayable traces, and transport of
// typing derivations along single steps.

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bcheck/ast.hpp"
#include "bcheck/context.hpp"
#include "bcheck/errors.hpp"
#include "bcheck/printer.hpp"
#include "bcheck/typing.hpp"

namespace bcheck {

enum class CongruenceRule { Refl, NilSeqElim, NilSeqIntro, ParNilElim, ParNilIntro, ParComm, ParAssocL, ParAssocR };

inline constexpr CongruenceRule kCongruenceRules[] = {
    CongruenceRule::Refl,        CongruenceRule::NilSeqElim, CongruenceRule::NilSeqIntro,
    CongruenceRule::ParNilElim,  CongruenceRule::ParNilIntro, CongruenceRule::ParComm,
    CongruenceRule::ParAssocL,   CongruenceRule::ParAssocR,
};

inline std::string_view to_string(CongruenceRule r) {
    switch (r) {
        case CongruenceRule::Refl: return "Refl";
        case CongruenceRule::NilSeqElim: return "NilSeqElim";
        case CongruenceRule::NilSeqIntro: return "NilSeqIntro";
        case CongruenceRule::ParNilElim: return "ParNilElim";
        case CongruenceRule::ParNilIntro: return "ParNilIntro";
        case CongruenceRule::ParComm: return "ParComm";
        case CongruenceRule::ParAssocL: return "ParAssocL";
        case CongruenceRule::ParAssocR: return "ParAssocR";
    }
    return "?";
}

inline std::optional<CongruenceRule> congruence_rule_from(std::string_view s) {
    for (auto r : kCongruenceRules)
        if (to_string(r) == s) return r;
    return std::nullopt;
}

inline CongruenceRule inverse(CongruenceRule r) {
    switch (r) {
        case CongruenceRule::NilSeqElim: return CongruenceRule::NilSeqIntro;
        case CongruenceRule::NilSeqIntro: return CongruenceRule::NilSeqElim;
        case CongruenceRule::ParNilElim: return CongruenceRule::ParNilIntro;
        case CongruenceRule::ParNilIntro: return CongruenceRule::ParNilElim;
        case CongruenceRule::ParAssocL: return CongruenceRule::ParAssocR;
        case CongruenceRule::ParAssocR: return CongruenceRule::ParAssocL;
        default: return r;
    }
}

struct CongruenceStep {
    Position position;
    CongruenceRule rule;
    bool operator==(const CongruenceStep&) const = default;
};

using CongruenceTrace = std::vector<CongruenceStep>;

/// One step per line: `position  RuleName`.
inline std::string serialize(const CongruenceTrace& t) {
    std::string out;
    for (const auto& s : t) out += to_string(s.position) + "  " + std::string(to_string(s.rule)) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Rewriting

/// Rewrites the subterm itself; nullopt when `b` does not have the rule's
/// left-hand shape.
inline std::optional<Behaviour> rewrite_here(const Behaviour& b, CongruenceRule r) {
    using namespace behaviour;
    switch (r) {
        case CongruenceRule::Refl: return b;
        case CongruenceRule::NilSeqElim:
            if (const Seq* s = b.as<Seq>(); s && s->first->is<Nil>()) return *s->second;
            return std::nullopt;
        case CongruenceRule::NilSeqIntro: return seq(nil(), b);
        case CongruenceRule::ParNilElim:
            if (const Par* p = b.as<Par>(); p && p->right->is<Nil>()) return *p->left;
            return std::nullopt;
        case CongruenceRule::ParNilIntro: return par(b, nil());
        case CongruenceRule::ParComm:
            if (const Par* p = b.as<Par>()) return par(*p->right, *p->left);
            return std::nullopt;
        case CongruenceRule::ParAssocL:
            if (const Par* p = b.as<Par>())
                if (const Par* q = p->right->as<Par>()) return par(par(*p->left, *q->left), *q->right);
            return std::nullopt;
        case CongruenceRule::ParAssocR:
            if (const Par* p = b.as<Par>())
                if (const Par* q = p->left->as<Par>()) return par(*q->left, par(*q->right, *p->right));
            return std::nullopt;
    }
    return std::nullopt;
}

inline Behaviour apply_rule(const Behaviour& b, const Position& pos, CongruenceRule r) {
    const Behaviour* sub = subterm_at(b, pos);
    if (!sub) throw InvalidPosition("position " + to_string(pos) + " does not exist in " + pretty_behaviour(b));
    auto rewritten = rewrite_here(*sub, r);
    if (!rewritten)
        throw RuleShapeMismatch(std::string(to_string(r)) + " does not apply to " + pretty_behaviour(*sub) + " at " +
                                to_string(pos));
    return replace_at(b, pos, std::move(*rewritten));
}

inline Behaviour apply_step(const Behaviour& b, const CongruenceStep& s) { return apply_rule(b, s.position, s.rule); }

inline Behaviour replay(Behaviour b, const CongruenceTrace& t) {
    for (const auto& s : t) b = apply_step(b, s);
    return b;
}

/// Every non-Refl step whose left-hand side matches somewhere in `b`;
/// positions in preorder, rules in declaration order.
inline std::vector<CongruenceStep> applicable_steps(const Behaviour& b, bool include_refl = false) {
    std::vector<CongruenceStep> out;
    for (const auto& pos : positions(b)) {
        const Behaviour& sub = *subterm_at(b, pos);
        for (auto r : kCongruenceRules) {
            if (r == CongruenceRule::Refl && !include_refl) continue;
            if (rewrite_here(sub, r)) out.push_back({pos, r});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Canonical form

namespace detail {
inline void par_elements(const Behaviour& b, std::vector<Behaviour>& out) {
    if (const Par* p = b.as<Par>()) {
        par_elements(*p->left, out);
        par_elements(*p->right, out);
    } else if (!b.is<Nil>()) {
        out.push_back(b);
    }
}

inline Behaviour normalize_children(const Behaviour& b, Behaviour (*norm)(const Behaviour&)) {
    Behaviour out = b;
    for (const auto& s : child_selectors(b)) out = with_child(out, s, norm(*child(b, s)));
    return out;
}
}  // namespace detail

/// Canonical representative: children first, then leading `nil ;` removed,
/// then every maximal parallel spine flattened, stripped of nil, sorted by
/// printed form and rebuilt to the right.
inline Behaviour normalize(const Behaviour& b) {
    Behaviour cur = detail::normalize_children(b, &normalize);
    if (const Seq* s = cur.as<Seq>(); s && s->first->is<Nil>()) return *s->second;
    if (!cur.is<Par>()) return cur;
    std::vector<Behaviour> elems;
    detail::par_elements(cur, elems);
    if (elems.empty()) return behaviour::nil();
    std::vector<std::pair<std::string, Behaviour>> keyed;
    for (auto& e : elems) keyed.emplace_back(pretty_behaviour(e), std::move(e));
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Behaviour out = keyed.back().second;
    for (std::size_t i = keyed.size() - 1; i-- > 0;) out = behaviour::par(keyed[i].second, out);
    return out;
}

namespace detail {

class NormalizationTracer {
public:
    explicit NormalizationTracer(CongruenceTrace& out) : out_(out) {}

    // Normalizes the subterm `b` found at `at`, logging absolute steps.
    Behaviour run(const Behaviour& b, Position& at) {
        Behaviour cur = b;
        for (const auto& s : child_selectors(b)) {
            at.push_back(s);
            Behaviour c = run(*child(b, s), at);
            at.pop_back();
            cur = with_child(cur, s, std::move(c));
        }
        if (const Seq* s = cur.as<Seq>(); s && s->first->is<Nil>()) return step(cur, at, CongruenceRule::NilSeqElim);
        if (const Par* p = cur.as<Par>()) {
            if (p->left->is<Nil>()) {
                cur = step(cur, at, CongruenceRule::ParComm);
                return step(cur, at, CongruenceRule::ParNilElim);
            }
            if (p->right->is<Nil>()) return step(cur, at, CongruenceRule::ParNilElim);
            return sort_spine(flatten(cur, at), at);
        }
        return cur;
    }

private:
    Behaviour step(const Behaviour& b, const Position& at, CongruenceRule r) {
        out_.push_back({at, r});
        return *rewrite_here(b, r);
    }

    // Both children are right spines; concatenates them into one.
    Behaviour flatten(Behaviour b, Position& at) {
        if (!b.is<Par>()) return b;
        while (b.as<Par>()->left->is<Par>()) b = step(b, at, CongruenceRule::ParAssocR);
        at.push_back({Selector::Kind::ParRight});
        Behaviour rest = flatten(*b.as<Par>()->right, at);
        at.pop_back();
        return behaviour::par(*b.as<Par>()->left, std::move(rest));
    }

    // Bubble sort over a right spine; adjacent swaps become rule steps.
    Behaviour sort_spine(Behaviour b, Position& at) {
        std::vector<Behaviour> elems;
        for (const Behaviour* cur = &b;;) {
            const Par* p = cur->as<Par>();
            if (!p) {
                elems.push_back(*cur);
                break;
            }
            elems.push_back(*p->left);
            cur = &*p->right;
        }
        std::vector<std::string> keys;
        for (const auto& e : elems) keys.push_back(pretty_behaviour(e));
        const std::size_t n = elems.size();
        for (std::size_t pass = 0; pass < n; ++pass) {
            bool swapped = false;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                if (!(keys[i + 1] < keys[i])) continue;
                Position here = at;
                here.insert(here.end(), i, Selector{Selector::Kind::ParRight});
                if (i + 2 == n) {
                    out_.push_back({here, CongruenceRule::ParComm});
                } else {
                    Position left = here;
                    left.push_back({Selector::Kind::ParLeft});
                    out_.push_back({here, CongruenceRule::ParAssocL});
                    out_.push_back({left, CongruenceRule::ParComm});
                    out_.push_back({here, CongruenceRule::ParAssocR});
                }
                std::swap(elems[i], elems[i + 1]);
                std::swap(keys[i], keys[i + 1]);
                swapped = true;
            }
            if (!swapped) break;
        }
        Behaviour out = elems.back();
        for (std::size_t i = n - 1; i-- > 0;) out = behaviour::par(elems[i], out);
        return out;
    }

    CongruenceTrace& out_;
};

}  // namespace detail

/// Steps rewriting `b` into normalize(b).
inline CongruenceTrace normalization_trace(const Behaviour& b) {
    CongruenceTrace out;
    Position at;
    detail::NormalizationTracer(out).run(b, at);
    return out;
}

/// A trace from `b1` to `b2` when they are congruent: `b1`'s normalization
/// followed by the inverse of `b2`'s, with adjacent inverse pairs cancelled.
inline std::optional<CongruenceTrace> congruent(const Behaviour& b1, const Behaviour& b2) {
    if (b1 == b2) return CongruenceTrace{};
    if (!(normalize(b1) == normalize(b2))) return std::nullopt;
    CongruenceTrace forward = normalization_trace(b1);
    CongruenceTrace back = normalization_trace(b2);
    for (auto it = back.rbegin(); it != back.rend(); ++it) forward.push_back({it->position, inverse(it->rule)});
    CongruenceTrace out;
    for (auto& s : forward) {
        if (!out.empty() && out.back().position == s.position && inverse(out.back().rule) == s.rule) {
            out.pop_back();
            continue;
        }
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transport

/// A rearrangement of the join at `address` (false = left, true = right).
struct ContextEdit {
    enum class Kind { Identity, Swap, AssocL, AssocR, KeepLeft, WrapRight };
    Kind kind = Kind::Identity;
    std::vector<bool> address;
    Context aux = Context::leaf();  // right operand added by WrapRight
};

inline std::optional<Context> apply_edit(const ContextEdit& e, const Context& g, std::size_t depth = 0) {
    using K = ContextEdit::Kind;
    if (depth < e.address.size()) {
        const Join* j = g.as_join();
        if (!j) return std::nullopt;
        bool right = e.address[depth];
        auto sub = apply_edit(e, right ? *j->right : *j->left, depth + 1);
        if (!sub) return std::nullopt;
        return right ? Context::join(*j->left, std::move(*sub)) : Context::join(std::move(*sub), *j->right);
    }
    switch (e.kind) {
        case K::Identity: return g;
        case K::WrapRight: return Context::join(g, e.aux);
        default: break;
    }
    const Join* j = g.as_join();
    if (!j) return std::nullopt;
    switch (e.kind) {
        case K::Swap: return Context::join(*j->right, *j->left);
        case K::KeepLeft: return *j->left;
        case K::AssocR:
            if (const Join* l = j->left->as_join()) return Context::join(*l->left, Context::join(*l->right, *j->right));
            return std::nullopt;
        case K::AssocL:
            if (const Join* r = j->right->as_join()) return Context::join(Context::join(*j->left, *r->left), *r->right);
            return std::nullopt;
        default: return std::nullopt;
    }
}

namespace detail {

inline Derivation nil_derivation(const Context& g) { return {Rule::TNil, g, behaviour::nil(), g, {}, {}}; }

inline Derivation par_derivation(Derivation l, Derivation r) {
    Context in = Context::join(l.input, r.input);
    Context out = Context::join(l.output, r.output);
    Behaviour subject = behaviour::par(l.subject, r.subject);
    return {Rule::TPar, std::move(in), std::move(subject), std::move(out), {std::move(l), std::move(r)}, {}};
}

/// Premise indices leading from a node to the derivation of its child `s`.
inline std::vector<std::size_t> premise_route(const Selector& s) {
    using K = Selector::Kind;
    switch (s.kind) {
        case K::SeqFirst:
        case K::ParLeft:
        case K::IfThen:
        case K::WhileBody:
        case K::EtaBody: return {0};
        case K::SeqSecond:
        case K::ParRight:
        case K::IfElse: return {1};
        case K::ChoiceBody: return {2 * s.index + 1};
        case K::ChoiceEtaBody: return {2 * s.index, 0};
        case K::ExecBody: break;
    }
    throw TransportShapeError("no typing derivation reaches " + to_string(s));
}

inline const Derivation& premise_at(const Derivation& d, const std::vector<std::size_t>& route) {
    const Derivation* cur = &d;
    for (auto i : route) {
        if (i >= cur->premises.size()) throw TransportShapeError("derivation does not follow its subject's shape");
        cur = &cur->premises[i];
    }
    return *cur;
}

/// `parent` with the child at `s` replaced; contexts of the child must not
/// have changed.
inline Derivation plug(const Derivation& parent, const Selector& s, Derivation c) {
    Derivation out = parent;
    out.subject = with_child(parent.subject, s, c.subject);
    auto route = premise_route(s);
    if (route.size() == 2) {
        Derivation& in = out.premises[route[0]];
        in.subject = Behaviour{Input{out.subject.as<InputChoice>()->branches[s.index].input}};
        in.premises[route[1]] = std::move(c);
    } else {
        out.premises[route[0]] = std::move(c);
    }
    return out;
}

struct LocalCase {
    Derivation result;
    std::optional<ContextEdit> edit;  // empty when both contexts are unchanged
};

inline LocalCase local_case(const Derivation& d, CongruenceRule r, const Context& aux) {
    using K = ContextEdit::Kind;
    auto mismatch = [&](const char* need) -> TransportShapeError {
        return TransportShapeError(std::string(to_string(r)) + " needs " + need + ", found " +
                                   std::string(rule_name(d.rule)) + " for " + pretty_behaviour(d.subject));
    };
    switch (r) {
        case CongruenceRule::Refl: return {d, std::nullopt};
        case CongruenceRule::NilSeqElim:
            if (d.rule != Rule::TSeq || d.premises.size() != 2 || d.premises[0].rule != Rule::TNil)
                throw mismatch("t-seq over t-nil");
            return {d.premises[1], std::nullopt};
        case CongruenceRule::NilSeqIntro: {
            Context out = d.output;
            Derivation seq{Rule::TSeq, d.input, behaviour::seq(behaviour::nil(), d.subject), std::move(out),
                           {nil_derivation(d.input), d}, {}};
            return {std::move(seq), std::nullopt};
        }
        case CongruenceRule::ParNilElim:
            if (d.rule != Rule::TPar || d.premises.size() != 2 || d.premises[1].rule != Rule::TNil)
                throw mismatch("t-par with a t-nil right premise");
            return {d.premises[0], ContextEdit{K::KeepLeft, {}, Context::leaf()}};
        case CongruenceRule::ParNilIntro:
            return {par_derivation(d, nil_derivation(aux)), ContextEdit{K::WrapRight, {}, aux}};
        case CongruenceRule::ParComm:
            if (d.rule != Rule::TPar || d.premises.size() != 2) throw mismatch("t-par");
            return {par_derivation(d.premises[1], d.premises[0]), ContextEdit{K::Swap, {}, Context::leaf()}};
        case CongruenceRule::ParAssocR: {
            if (d.rule != Rule::TPar || d.premises.size() != 2 || d.premises[0].rule != Rule::TPar)
                throw mismatch("t-par with a t-par left premise");
            const Derivation& l = d.premises[0];
            return {par_derivation(l.premises[0], par_derivation(l.premises[1], d.premises[1])),
                    ContextEdit{K::AssocR, {}, Context::leaf()}};
        }
        case CongruenceRule::ParAssocL: {
            if (d.rule != Rule::TPar || d.premises.size() != 2 || d.premises[1].rule != Rule::TPar)
                throw mismatch("t-par with a t-par right premise");
            const Derivation& rr = d.premises[1];
            return {par_derivation(par_derivation(d.premises[0], rr.premises[0]), rr.premises[1]),
                    ContextEdit{K::AssocL, {}, Context::leaf()}};
        }
    }
    throw mismatch("a known rule");
}

inline std::optional<Derivation> recheck(const Context& g, const Behaviour& b, const Hole* hole) {
    try {
        return Checker(CheckOptions{}, hole).check(g, b);
    } catch (const TypeError&) {
        return std::nullopt;
    } catch (const HoleMismatch&) {
        return std::nullopt;
    }
}

}  // namespace detail

/// Rebuilds `d` for the behaviour obtained by applying `step`. The node at
/// the step's position is rewritten by the matching case:
///   NilSeqElim   t-seq(t-nil, x)  becomes x
///   NilSeqIntro  x                becomes t-seq(t-nil, x)
///   ParNilElim   t-par(x, t-nil)  becomes x, keeping the left context
///   ParNilIntro  x                becomes t-par(x, t-nil) under `aux` on the right
///   ParComm      t-par(a, b)      becomes t-par(b, a), contexts swapped
///   ParAssocL/R  nesting and contexts reassociated together
/// Enclosing nodes are re-threaded when the rewritten node's contexts change,
/// so the root contexts of the result may differ from those of `d`.
inline Derivation transport(const Derivation& d, const CongruenceStep& step, const Context& aux = Context::leaf()) {
    using K = ContextEdit::Kind;
    if (!subterm_at(d.subject, step.position))
        throw InvalidPosition("position " + to_string(step.position) + " does not exist in " +
                              pretty_behaviour(d.subject));

    std::vector<const Derivation*> chain{&d};
    for (const auto& s : step.position) chain.push_back(&detail::premise_at(*chain.back(), detail::premise_route(s)));
    if (!(chain.back()->subject == *subterm_at(d.subject, step.position)))
        throw TransportShapeError("derivation does not follow its subject's shape");

    auto local = detail::local_case(*chain.back(), step.rule, aux);
    Derivation cur = std::move(local.result);
    std::optional<ContextEdit> edit = std::move(local.edit);
    bool fresh_wrap = step.rule == CongruenceRule::ParNilIntro;

    for (std::size_t depth = step.position.size(); depth-- > 0;) {
        const Derivation& parent = *chain[depth];
        const Selector& sel = step.position[depth];
        if (!edit) {
            cur = detail::plug(parent, sel, std::move(cur));
            continue;
        }
        Behaviour subject = with_child(parent.subject, sel, cur.subject);

        if (parent.rule == Rule::TPar) {
            bool right = sel.kind == Selector::Kind::ParRight;
            const Derivation& other = parent.premises[right ? 0 : 1];
            cur = right ? detail::par_derivation(other, std::move(cur)) : detail::par_derivation(std::move(cur), other);
            edit->address.insert(edit->address.begin(), right);
            fresh_wrap = false;
            continue;
        }

        const Derivation hole_value = cur;
        detail::Hole hole{{sel}, [&](const Context& g) -> std::optional<Derivation> {
                              if (g == hole_value.input) return hole_value;
                              // The t-nil added by ParNilIntro accepts whatever right context arrives.
                              const Join* j = g.as_join();
                              if (fresh_wrap && j && *j->left == hole_value.premises[0].input)
                                  return detail::par_derivation(hole_value.premises[0],
                                                                detail::nil_derivation(*j->right));
                              return std::nullopt;
                          }};

        std::optional<Derivation> next;
        std::optional<Context> edited = apply_edit(*edit, parent.input);
        if (edited) next = detail::recheck(*edited, subject, &hole);
        if (!next && edited) next = detail::recheck(*edited, subject, nullptr);
        if (!next) {
            next = detail::recheck(parent.input, subject, nullptr);
            if (next) edit = ContextEdit{K::Identity, {}, Context::leaf()};
        }
        if (!next)
            throw TransportShapeError("cannot re-thread " + std::string(rule_name(parent.rule)) + " around the " +
                                      std::string(to_string(step.rule)) + " step at " + to_string(step.position));
        if (next->input == parent.input && next->output == parent.output) edit.reset();
        fresh_wrap = false;
        cur = std::move(*next);
    }
    return cur;
}

/// Transports along every step of a trace in order.
inline Derivation transport(Derivation d, const CongruenceTrace& trace, const Context& aux = Context::leaf()) {
    for (const auto& s : trace) d = transport(d, s, aux);
    return d;
}

}  // namespace bcheck
