#include <gtest/gtest.h>

#include "bcheck/congruence.hpp"
#include "bcheck/oracle.hpp"
#include "bcheck/parser.hpp"
#include "bcheck/printer.hpp"
#include "bcheck/selftest.hpp"

using namespace bcheck;

namespace {

Behaviour b(const char* text) { return parse_behaviour(text); }

Position pos(const char* text) { return *parse_position(text); }

}  // namespace

TEST(Congruence, CommutedParallelIsOneStep) {
    auto t = congruent(b("nil | x0 = true"), b("x0 = true | nil"));
    ASSERT_TRUE(t.has_value());
    EXPECT_EQ(serialize(*t), "root  ParComm\n");
}

TEST(Congruence, IdenticalTermsNeedNoSteps) {
    auto t = congruent(b("while [ x0 ] (nil | nil)"), b("while [ x0 ] (nil | nil)"));
    ASSERT_TRUE(t.has_value());
    EXPECT_TRUE(t->empty());
}

TEST(Congruence, TrailingNilIsNotEliminable) {
    EXPECT_FALSE(congruent(b("x0 = true ; nil"), b("x0 = true")).has_value());
    EXPECT_FALSE(exhaustive_congruence_search(b("x0 = true ; nil"), b("x0 = true"), 8).has_value());
}

TEST(Congruence, LeadingNilIsEliminable) {
    auto t = congruent(b("nil ; x0 = true"), b("x0 = true"));
    ASSERT_TRUE(t.has_value());
    EXPECT_EQ(replay(b("nil ; x0 = true"), *t), b("x0 = true"));
}

TEST(Congruence, RewritesAtPositions) {
    EXPECT_EQ(apply_rule(b("if x0 then (nil ; nil) else nil"), pos("if.then"), CongruenceRule::NilSeqElim),
              b("if x0 then nil else nil"));
    EXPECT_EQ(apply_rule(b("(nil | x0 = 1) | x1 = 2"), Position{}, CongruenceRule::ParAssocR),
              b("nil | x0 = 1 | x1 = 2"));
    EXPECT_EQ(apply_rule(b("x0 = 1"), Position{}, CongruenceRule::ParNilIntro), b("x0 = 1 | nil"));
    EXPECT_EQ(apply_rule(b("x0 = 1"), Position{}, CongruenceRule::Refl), b("x0 = 1"));
}

TEST(Congruence, RejectsBadSteps) {
    EXPECT_THROW(apply_rule(b("nil"), pos("seq.1"), CongruenceRule::Refl), InvalidPosition);
    EXPECT_THROW(apply_rule(b("x0 = 1 ; nil"), Position{}, CongruenceRule::NilSeqElim), RuleShapeMismatch);
    EXPECT_THROW(apply_rule(b("nil | x0 = 1"), Position{}, CongruenceRule::ParNilElim), RuleShapeMismatch);
}

TEST(Congruence, InverseUndoesEveryStep) {
    for (auto r : kCongruenceRules) EXPECT_EQ(inverse(inverse(r)), r);
    for (const auto& x : enumerate_behaviours(standard_config(4)))
        for (const auto& s : applicable_steps(x, true)) {
            Behaviour y = apply_step(x, s);
            ASSERT_EQ(apply_rule(y, s.position, inverse(s.rule)), x) << pretty_behaviour(x);
        }
}

TEST(Congruence, ApplicableStepsMatchRewriteHere) {
    for (const auto& x : enumerate_behaviours(standard_config(4))) {
        std::size_t expected = 0;
        for (const auto& p : positions(x))
            for (auto r : kCongruenceRules)
                if (r != CongruenceRule::Refl && rewrite_here(*subterm_at(x, p), r)) ++expected;
        ASSERT_EQ(applicable_steps(x).size(), expected);
    }
}

TEST(Congruence, NormalizeExamples) {
    EXPECT_EQ(normalize(b("nil ; nil")), b("nil"));
    EXPECT_EQ(normalize(b("nil")), b("nil"));
    EXPECT_EQ(pretty_behaviour(normalize(b("(x0 = true | nil) | x1 = true"))), "x0 = true | x1 = true");
    EXPECT_EQ(normalize(b("x0 = true ; nil")), b("x0 = true ; nil"));
}

TEST(Congruence, NormalFormsAgreeWithBoundedSearch) {
    // Representatives of every class reachable within two steps share one normal form.
    for (const auto& x : enumerate_behaviours(standard_config(4))) {
        Behaviour n = normalize(x);
        for (const auto& [text, dist] : congruence_ball(x, 2)) ASSERT_EQ(normalize(parse_behaviour(text)), n) << text;
    }
}

TEST(Congruence, RotationsShareNormalForm) {
    Behaviour a = b("x0 = true"), c = b("x0 = x0"), d = b("while [ x0 ] nil");
    using behaviour::par;
    EXPECT_EQ(normalize(par(par(d, a), c)), normalize(par(a, par(c, d))));
}

TEST(Congruence, NormalizationTraceReplays) {
    for (const auto& x : enumerate_behaviours(standard_config(5)))
        ASSERT_EQ(replay(x, normalization_trace(x)), normalize(x)) << pretty_behaviour(x);
}

TEST(Congruence, ContextEdits) {
    Context g = parse_context("({ x0 : int } & { }) & { x1 : bool }");
    using K = ContextEdit::Kind;
    EXPECT_EQ(apply_edit({K::Swap, {}, Context::leaf()}, g), parse_context("{ x1 : bool } & ({ x0 : int } & { })"));
    EXPECT_EQ(apply_edit({K::AssocR, {}, Context::leaf()}, g),
              parse_context("{ x0 : int } & ({ } & { x1 : bool })"));
    EXPECT_EQ(apply_edit({K::Swap, {false}, Context::leaf()}, g),
              parse_context("({ } & { x0 : int }) & { x1 : bool }"));
    EXPECT_EQ(apply_edit({K::KeepLeft, {false}, Context::leaf()}, g), parse_context("{ x0 : int } & { x1 : bool }"));
    EXPECT_FALSE(apply_edit({K::AssocL, {}, Context::leaf()}, g).has_value());
    EXPECT_FALSE(apply_edit({K::Swap, {true}, Context::leaf()}, g).has_value());
}

TEST(Transport, RootCasesFollowTheRuleBodies) {
    Context g = parse_context("{ x0 : bool } & { }");
    Derivation d = check_behaviour(g, b("x0 = 1 | nil")).derivation;

    Derivation elim = transport(d, {{}, CongruenceRule::ParNilElim});
    EXPECT_EQ(elim, d.premises[0]);

    Derivation comm = transport(d, {{}, CongruenceRule::ParComm});
    EXPECT_EQ(comm.input, parse_context("{ } & { x0 : bool }"));
    EXPECT_EQ(comm.output, parse_context("{ } & { x0 : int }"));
    EXPECT_TRUE(verify_derivation(comm));

    Context aux = parse_context("{ x1 : int }");
    Derivation intro = transport(d.premises[0], {{}, CongruenceRule::ParNilIntro}, aux);
    EXPECT_EQ(intro.input, Context::join(d.premises[0].input, aux));
    EXPECT_EQ(intro.output, Context::join(d.premises[0].output, aux));
    EXPECT_TRUE(verify_derivation(intro));

    Derivation seq = transport(d, {{}, CongruenceRule::NilSeqIntro});
    EXPECT_EQ(seq.rule, Rule::TSeq);
    EXPECT_EQ(seq.premises[1], d);
}

TEST(Transport, NestedStepRethreadsEnclosingRules) {
    Context g = parse_context("{ x0 : bool } & { }");
    Derivation d = check_behaviour(g, b("nil ; (x0 = 1 | nil)")).derivation;
    Derivation moved = transport(d, {pos("seq.2"), CongruenceRule::ParComm});
    EXPECT_EQ(moved.subject, b("nil ; (nil | x0 = 1)"));
    EXPECT_EQ(moved.input, parse_context("{ } & { x0 : bool }"));
    EXPECT_TRUE(verify_derivation(moved));
}

TEST(Transport, UnsalvageableNestedStepThrows) {
    Context g = parse_context("{ x0 : bool } & { x0 : int }");
    Derivation d = check_behaviour(g, b("while [ x0 ] (x0 = true | nil)")).derivation;
    EXPECT_THROW(transport(d, {pos("while.body"), CongruenceRule::ParComm}), TransportShapeError);
}

TEST(Transport, TraceOverloadComposes) {
    Context g = parse_context("{ } & { x0 : int }");
    Behaviour from = b("nil | x0 = 2");
    Derivation d = check_behaviour(g, from).derivation;
    auto trace = *congruent(from, b("x0 = 2 | nil"));
    Derivation moved = transport(d, trace);
    EXPECT_EQ(moved.subject, b("x0 = 2 | nil"));
    EXPECT_TRUE(verify_derivation(moved));
}
