#pragma once

// Property suites over the enumerated corpus. Each returns a tally of the
// instances it checked and the first failure it met; the corpus is ordered by
// size, so that failure is a smallest one.

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bcheck/congruence.hpp"
#include "bcheck/oracle.hpp"
#include "bcheck/parser.hpp"
#include "bcheck/printer.hpp"
#include "bcheck/typing.hpp"

namespace bcheck {

struct Tally {
    explicit Tally(std::string n) : name(std::move(n)) {}

    std::string name;
    std::size_t checked = 0;
    std::size_t failures = 0;
    std::string counterexample;
    double seconds = 0;

    bool passed() const { return failures == 0; }

    void fail(std::string what) {
        if (failures++ == 0) counterexample = std::move(what);
    }
};

enum class Fault { None, SwapIfBranchContexts, BreakSeqThreading, ParCommNoSwap };

inline std::string_view to_string(Fault f) {
    switch (f) {
        case Fault::None: return "none";
        case Fault::SwapIfBranchContexts: return "swap-if";
        case Fault::BreakSeqThreading: return "break-seq";
        case Fault::ParCommNoSwap: return "par-comm-no-swap";
    }
    return "?";
}

namespace detail {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string instance(const Context& g, const Behaviour& b) {
    return pretty_context(g) + " ⊢ " + pretty_behaviour(b);
}

inline void collect_routes(const Derivation& d, std::vector<std::size_t>& at,
                           std::vector<std::vector<std::size_t>>& out) {
    out.push_back(at);
    for (std::size_t i = 0; i < d.premises.size(); ++i) {
        at.push_back(i);
        collect_routes(d.premises[i], at, out);
        at.pop_back();
    }
}

inline Derivation& node_at(Derivation& d, const std::vector<std::size_t>& route) {
    Derivation* cur = &d;
    for (auto i : route) cur = &cur->premises[i];
    return *cur;
}

// Corrupts one node in place; false when the node is not a target of `f`
// or the corruption would leave the derivation unchanged.
inline bool corrupt(Derivation& n, Fault f) {
    switch (f) {
        case Fault::None: return false;
        case Fault::SwapIfBranchContexts:
            if (n.rule != Rule::TIf || n.premises[0].input == n.premises[0].output) return false;
            std::swap(n.premises[0].input, n.premises[0].output);
            return true;
        case Fault::BreakSeqThreading:
            if (n.rule != Rule::TSeq) return false;
            n.premises[1].input = update_var(Variable{1000}, NativeType::Int, n.premises[1].input);
            return true;
        case Fault::ParCommNoSwap: {
            if (n.rule != Rule::TPar) return false;
            const Derivation& l = n.premises[0];
            const Derivation& r = n.premises[1];
            if (l.input == r.input && l.output == r.output) return false;
            n.subject = behaviour::par(r.subject, l.subject);
            std::swap(n.premises[0], n.premises[1]);
            return true;
        }
    }
    return false;
}

}  // namespace detail

/// Every derivation obtained from `d` by corrupting a single node with `f`.
inline std::vector<Derivation> inject_fault(const Derivation& d, Fault f) {
    std::vector<std::vector<std::size_t>> routes;
    std::vector<std::size_t> at;
    detail::collect_routes(d, at, routes);
    std::vector<Derivation> out;
    for (const auto& r : routes) {
        Derivation copy = d;
        if (detail::corrupt(detail::node_at(copy, r), f)) out.push_back(std::move(copy));
    }
    return out;
}

inline EnumConfig standard_config(std::size_t max_size) {
    EnumConfig cfg;
    cfg.max_size = max_size;
    return cfg;
}

/// Root contexts a step at the root must produce, spelled out per case.
inline std::optional<std::pair<Context, Context>> expected_root_contexts(const Derivation& d, CongruenceRule r,
                                                                         const Context& aux) {
    const Join* in = d.input.as_join();
    const Join* out = d.output.as_join();
    switch (r) {
        case CongruenceRule::Refl:
        case CongruenceRule::NilSeqElim:
        case CongruenceRule::NilSeqIntro: return std::pair{d.input, d.output};
        case CongruenceRule::ParNilElim: return std::pair{*in->left, *out->left};
        case CongruenceRule::ParNilIntro: return std::pair{Context::join(d.input, aux), Context::join(d.output, aux)};
        case CongruenceRule::ParComm:
            return std::pair{Context::join(*in->right, *in->left), Context::join(*out->right, *out->left)};
        case CongruenceRule::ParAssocR: {
            const Join* il = in->left->as_join();
            const Join* ol = out->left->as_join();
            return std::pair{Context::join(*il->left, Context::join(*il->right, *in->right)),
                             Context::join(*ol->left, Context::join(*ol->right, *out->right))};
        }
        case CongruenceRule::ParAssocL: {
            const Join* ir = in->right->as_join();
            const Join* orr = out->right->as_join();
            return std::pair{Context::join(Context::join(*in->left, *ir->left), *ir->right),
                             Context::join(Context::join(*out->left, *orr->left), *orr->right)};
        }
    }
    return std::nullopt;
}

enum class StepScope { Anywhere, Root, Nested };

/// Transport validity and root context fidelity over every typable
/// (context, behaviour) pair and every applicable step in `scope`, Refl
/// included.
inline Tally transport_suite(std::size_t max_size, const std::vector<Context>& pool,
                             StepScope scope = StepScope::Anywhere) {
    detail::Stopwatch clock;
    Tally t{scope == StepScope::Root ? "transport (root)" : scope == StepScope::Nested ? "transport (nested)" : "transport"};
    const Context aux = Context::leaf();
    for (const auto& b : enumerate_behaviours(standard_config(max_size))) {
        auto steps = applicable_steps(b, true);
        for (const auto& g : pool) {
            Derivation d{Rule::TNil, g, b, g, {}, {}};
            try {
                d = check_behaviour(g, b).derivation;
            } catch (const TypeError&) {
                continue;
            }
            for (const auto& s : steps) {
                if ((scope == StepScope::Root && !s.position.empty()) ||
                    (scope == StepScope::Nested && s.position.empty()))
                    continue;
                ++t.checked;
                std::string where = detail::instance(g, b) + " / " + to_string(s.position) + "  " +
                                    std::string(to_string(s.rule));
                Derivation moved = d;
                try {
                    moved = transport(d, s, aux);
                } catch (const Error& e) {
                    t.fail(where + ": " + e.what());
                    continue;
                }
                std::string why;
                if (!(moved.subject == apply_step(b, s))) {
                    t.fail(where + ": transported subject is " + pretty_behaviour(moved.subject));
                } else if (!verify_derivation(moved, &why)) {
                    t.fail(where + ": rejected, " + why);
                } else if (s.position.empty()) {
                    auto want = expected_root_contexts(d, s.rule, aux);
                    if (!(moved.input == want->first && moved.output == want->second))
                        t.fail(where + ": root contexts became " + pretty_context(moved.input) + " ▷ " +
                               pretty_context(moved.output));
                }
            }
        }
    }
    t.seconds = clock.seconds();
    return t;
}

/// Checker against relational search: same verdict, same output context,
/// and at most one derivation per instance.
inline Tally oracle_suite(std::size_t max_size, const std::vector<Context>& pool) {
    detail::Stopwatch clock;
    Tally t{"oracle"};
    for (const auto& b : enumerate_behaviours(standard_config(max_size))) {
        for (const auto& g : pool) {
            ++t.checked;
            DerivationSet found = brute_force_check(g, b);
            std::optional<CheckResult> got;
            try {
                got = check_behaviour(g, b);
            } catch (const TypeError&) {
            }
            std::string where = detail::instance(g, b);
            if (found.size() > 1) t.fail(where + ": " + std::to_string(found.size()) + " derivations");
            else if (found.empty() != !got) t.fail(where + (got ? ": checker accepts, search finds nothing"
                                                                : ": search finds a derivation, checker rejects"));
            else if (got && !(found[0].first == got->output && found[0].second == got->derivation))
                t.fail(where + ": outputs differ, " + pretty_context(found[0].first) + " vs " +
                       pretty_context(got->output));
        }
    }
    t.seconds = clock.seconds();
    return t;
}

/// congruent() against bounded exhaustive search on every pair of the
/// corpus, plus replay of every returned trace.
inline Tally congruence_suite(std::size_t max_size, std::size_t depth = 8) {
    detail::Stopwatch clock;
    Tally t{"congruence"};
    auto corpus = enumerate_behaviours(standard_config(max_size));
    auto normal = [](const Behaviour& b) { return pretty_behaviour(normalize(b)); };
    auto linked = connected_pairs(corpus, depth, normal);
    for (const auto& change : linked.key_changes) t.fail("a step changes the normal form: " + change);
    std::size_t next = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (std::size_t j = i; j < corpus.size(); ++j) {
            ++t.checked;
            bool searched = i == j;
            if (!searched && next < linked.pairs.size() && linked.pairs[next] == std::pair{i, j}) {
                searched = true;
                ++next;
            }
            auto trace = congruent(corpus[i], corpus[j]);
            if (trace.has_value() != searched) {
                std::string where = pretty_behaviour(corpus[i]) + "  vs  " + pretty_behaviour(corpus[j]);
                t.fail(where + (searched ? ": search connects them, congruent() says no"
                                         : ": congruent() connects them, search within depth finds nothing"));
            } else if (trace && !(replay(corpus[i], *trace) == corpus[j])) {
                t.fail(pretty_behaviour(corpus[i]) + "  vs  " + pretty_behaviour(corpus[j]) + ": trace does not replay");
            }
        }
    }
    t.seconds = clock.seconds();
    return t;
}

/// Idempotence, replayable normalization traces, and congruence of every
/// behaviour with its normal form.
inline Tally normalization_suite(std::size_t max_size) {
    detail::Stopwatch clock;
    Tally t{"normalization"};
    for (const auto& b : enumerate_behaviours(standard_config(max_size))) {
        ++t.checked;
        Behaviour n = normalize(b);
        std::string where = pretty_behaviour(b);
        if (!(normalize(n) == n)) {
            t.fail(where + ": normal form is not stable");
            continue;
        }
        if (!(replay(b, normalization_trace(b)) == n)) {
            t.fail(where + ": normalization trace does not reach the normal form");
            continue;
        }
        auto trace = congruent(b, n);
        if (!trace) t.fail(where + ": not congruent to its normal form");
        else if (!(replay(b, *trace) == n)) t.fail(where + ": trace to the normal form does not replay");
    }
    t.seconds = clock.seconds();
    return t;
}

/// parse(pretty(x)) == x over the corpus and the context pool.
inline Tally roundtrip_suite(std::size_t max_size, const std::vector<Context>& pool) {
    detail::Stopwatch clock;
    Tally t{"round-trip"};
    for (const auto& b : enumerate_behaviours(standard_config(max_size))) {
        ++t.checked;
        std::string text = pretty_behaviour(b);
        try {
            if (!(parse_behaviour(text) == b)) t.fail(text + ": parses to a different behaviour");
        } catch (const SyntaxError& e) {
            t.fail(text + ": " + e.what());
        }
    }
    for (const auto& g : pool) {
        ++t.checked;
        std::string text = pretty_context(g);
        try {
            if (!(parse_context(text) == g)) t.fail(text + ": parses to a different context");
        } catch (const Error& e) {
            t.fail(text + ": " + e.what());
        }
    }
    t.seconds = clock.seconds();
    return t;
}

/// verify_derivation accepts what the checker emits; with a fault, each
/// derivation is corrupted at its first eligible node before verification.
inline Tally validity_suite(std::size_t max_size, const std::vector<Context>& pool, Fault fault = Fault::None) {
    detail::Stopwatch clock;
    Tally t{"validity"};
    for (const auto& b : enumerate_behaviours(standard_config(max_size))) {
        for (const auto& g : pool) {
            Derivation d{Rule::TNil, g, b, g, {}, {}};
            try {
                d = check_behaviour(g, b).derivation;
            } catch (const TypeError&) {
                continue;
            }
            if (fault != Fault::None) {
                auto bad = inject_fault(d, fault);
                if (bad.empty()) continue;
                d = std::move(bad.front());
            }
            ++t.checked;
            std::string why;
            if (!verify_derivation(d, &why)) t.fail(detail::instance(g, b) + ": " + why + "\n" + serialize(d));
        }
    }
    t.seconds = clock.seconds();
    return t;
}

/// Every single-node corruption by `fault` of every emitted derivation must
/// be rejected.
inline Tally fault_suite(std::size_t max_size, const std::vector<Context>& pool, Fault fault) {
    detail::Stopwatch clock;
    Tally t{"fault " + std::string(to_string(fault))};
    for (const auto& b : enumerate_behaviours(standard_config(max_size))) {
        for (const auto& g : pool) {
            Derivation d{Rule::TNil, g, b, g, {}, {}};
            try {
                d = check_behaviour(g, b).derivation;
            } catch (const TypeError&) {
                continue;
            }
            for (const auto& bad : inject_fault(d, fault)) {
                ++t.checked;
                if (verify_derivation(bad)) t.fail(detail::instance(g, b) + ": corrupted derivation accepted\n" + serialize(bad));
            }
        }
    }
    t.seconds = clock.seconds();
    return t;
}

}  // namespace bcheck
