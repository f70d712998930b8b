#include <gtest/gtest.h>

#include "bcheck/oracle.hpp"
#include "bcheck/parser.hpp"
#include "bcheck/printer.hpp"
#include "bcheck/selftest.hpp"
#include "bcheck/typing.hpp"

using namespace bcheck;

namespace {

CheckResult ok(const std::string& ctx, const std::string& prog, CheckOptions opts = {}) {
    return check_behaviour(parse_context(ctx), parse_behaviour(prog), opts);
}

std::optional<TypeErrorKind> kind(const std::string& ctx, const std::string& prog, CheckOptions opts = {}) {
    try {
        ok(ctx, prog, opts);
    } catch (const TypeError& e) {
        return e.kind();
    }
    return std::nullopt;
}

std::vector<Expr> small_exprs() {
    std::vector<Expr> atoms = {expr::var(0), expr::var(1), expr::var(2), expr::boolean(true),
                               expr::integer(1),  expr::long_integer(2), expr::real(0.5), expr::string("s")};
    std::vector<Expr> out = atoms;
    for (const auto& a : atoms) {
        out.push_back(expr::logical_not(a));
        for (const auto& b : atoms)
            for (auto op : {BinaryOp::And, BinaryOp::Or, BinaryOp::Eq, BinaryOp::Lt})
                out.push_back(expr::binary(op, a, b));
    }
    return out;
}

}  // namespace

TEST(Typing, NilReturnsItsInput) {
    EXPECT_EQ(pretty_context(ok("{ }", "nil").output), "{ }");
    EXPECT_EQ(pretty_context(ok("{ } & { }", "nil | nil").output), "{ } & { }");
}

TEST(Typing, SequenceThreadsContexts) {
    auto r = ok("{ }", "x0 = 1 ; x1 = x0 < 2 ; x0 = true");
    EXPECT_EQ(pretty_context(r.output), "{ x0 : bool, x1 : bool }");
    const Derivation& d = r.derivation;
    ASSERT_EQ(d.rule, Rule::TSeq);
    EXPECT_EQ(d.premises[1].input, d.premises[0].output);
}

TEST(Typing, ParallelSplitsTheJoin) {
    auto r = ok("{ x0 : int } & { }", "x0 = true | x0 = 1L");
    EXPECT_EQ(pretty_context(r.output), "{ x0 : bool } & { x0 : long }");
}

TEST(Typing, Failures) {
    EXPECT_EQ(kind("{ }", "while [ 1 ] nil"), TypeErrorKind::GuardNotBool);
    EXPECT_EQ(kind("{ x0 : bool }", "if x0 then x1 = 1 else nil"), TypeErrorKind::BranchContextMismatch);
    EXPECT_EQ(kind("{ x0 : bool }", "while [ x0 ] x0 = 1"), TypeErrorKind::WhileContextChanged);
    EXPECT_EQ(kind("{ }", "nil | nil"), TypeErrorKind::ContextShapeMismatch);
    EXPECT_EQ(kind("{ }", "x0 = x1"), TypeErrorKind::UnboundVariable);
    EXPECT_EQ(kind("{ }", "o(x0)"), TypeErrorKind::UnknownOperation);
    EXPECT_EQ(kind("{ o @ l : <int> }", "o @ l (true)"), TypeErrorKind::PayloadTypeMismatch);
    EXPECT_EQ(kind("{ }", "wait(c, o, l, x0)"), TypeErrorKind::UnsupportedConstruct);
    EXPECT_EQ(kind("{ }", "exec(c, o, x0) { nil }"), TypeErrorKind::UnsupportedConstruct);
}

TEST(Typing, WhileKeepsContextWhenBodyReassignsSameType) {
    EXPECT_FALSE(kind("{ x0 : bool }", "while [ x0 ] x0 = false").has_value());
}

TEST(Typing, CoreOnlyRejectsExtensions) {
    CheckOptions core{true};
    EXPECT_EQ(kind("{ }", "x0 = 1", core), TypeErrorKind::UnsupportedConstruct);
    EXPECT_EQ(kind("{ x0 : bool } & { x0 : bool }", "while [ x0 ] nil | if x0 then nil else nil ; nil", core),
              std::nullopt);
}

TEST(Typing, CommunicationRules) {
    auto in = ok("{ o : <int> }", "o(x0)");
    EXPECT_EQ(in.derivation.rule, Rule::TInOneWay);
    EXPECT_EQ(pretty_context(in.output), "{ o : <int>, x0 : int }");

    auto rr = ok("{ o : <int, bool> }", "o(x0)(x1) { x1 = x0 < 3 }");
    EXPECT_EQ(rr.derivation.rule, Rule::TInReqRes);
    EXPECT_EQ(kind("{ o : <int, bool> }", "o(x0)(x1) { x1 = x0 }"), TypeErrorKind::PayloadTypeMismatch);

    auto so = ok("{ s @ l : <string, double> }", "s @ l (\"q\")(x2)");
    EXPECT_EQ(so.derivation.rule, Rule::TOutSolicit);
    EXPECT_EQ(pretty_context(so.output), "{ s @ l : <string, double>, x2 : double }");
    EXPECT_EQ(kind("{ s @ k : <string, double> }", "s @ l (\"q\")(x2)"), TypeErrorKind::UnknownOperation);
}

TEST(Typing, InputChoiceBranchesMustAgree) {
    std::string ctx = "{ a : <int>, b : <int> }";
    auto r = ok(ctx, "inputchoice [ a(x0) ] { nil } [ b(x0) ] { nil }");
    EXPECT_EQ(r.derivation.rule, Rule::TChoice);
    EXPECT_EQ(r.derivation.premises.size(), 4u);
    EXPECT_EQ(kind(ctx, "inputchoice [ a(x0) ] { nil } [ b(x1) ] { nil }"), TypeErrorKind::BranchContextMismatch);
}

TEST(Typing, ErrorsNameTheInnermostBehaviour) {
    try {
        ok("{ x0 : int }", "nil ; (x0 = 1 ; while [ x0 ] nil)");
        FAIL();
    } catch (const TypeError& e) {
        EXPECT_EQ(to_string(e.position()), "seq.2.seq.2");
        ASSERT_TRUE(e.offending().has_value());
        EXPECT_EQ(pretty_behaviour(*e.offending()), "while [ x0 ] nil");
    }
}

TEST(Typing, CheckingModeAgreesWithSynthesis) {
    auto exprs = small_exprs();
    for (const auto& g : standard_context_pool()) {
        for (const auto& e : exprs) {
            std::optional<NativeType> synth;
            try {
                synth = type_of_expr(g, e);
            } catch (const TypeError&) {
            }
            for (auto t : kNativeTypes)
                ASSERT_EQ(expression_has_type(g, e, t), synth == t) << pretty_context(g) << " " << pretty_expr(e);
        }
    }
}

TEST(Typing, VerifierAcceptsCheckerOutput) {
    auto pool = standard_context_pool();
    for (const auto& b : enumerate_behaviours(standard_config(4)))
        for (const auto& g : pool) {
            try {
                Derivation d = check_behaviour(g, b).derivation;
                std::string why;
                ASSERT_TRUE(verify_derivation(d, &why)) << why;
            } catch (const TypeError&) {
            }
        }
}

TEST(Typing, VerifierRejectsWrongOutput) {
    Derivation d = ok("{ }", "x0 = 1").derivation;
    d.output = parse_context("{ x0 : bool }");
    EXPECT_FALSE(verify_derivation(d));
}

TEST(Typing, SerializedDerivation) {
    EXPECT_EQ(serialize(ok("{ x0 : bool }", "while [ x0 ] nil").derivation),
              "t-while  { x0 : bool } ⊢ while [ x0 ] nil ▷ { x0 : bool }\n"
              "  t-expr  { x0 : bool } ⊢ x0 : bool\n"
              "  t-nil  { x0 : bool } ⊢ nil ▷ { x0 : bool }\n");
}

TEST(Typing, RuleNamesMarkExtensions) {
    EXPECT_EQ(rule_name(Rule::TNil), "t-nil");
    EXPECT_EQ(rule_name(Rule::TAssign), "t-assign*");
    EXPECT_FALSE(is_extension(Rule::TPar));
    EXPECT_TRUE(is_extension(Rule::TChoice));
}
