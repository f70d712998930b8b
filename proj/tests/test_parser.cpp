#include <gtest/gtest.h>

#include <random>

#include "bcheck/oracle.hpp"
#include "bcheck/parser.hpp"
#include "bcheck/printer.hpp"
#include "bcheck/selftest.hpp"

using namespace bcheck;
using namespace bcheck::behaviour;

TEST(Parser, SequenceBindsTighterThanParallel) {
    Behaviour want = par(seq(nil(), assign(0, expr::boolean(true))), nil());
    EXPECT_EQ(parse_behaviour("nil ; x0 = true | nil"), want);
}

TEST(Parser, ParallelAndSequenceAssociateRight) {
    EXPECT_EQ(parse_behaviour("nil | nil | x0 = 1"), par(nil(), par(nil(), assign(0, expr::integer(1)))));
    EXPECT_EQ(parse_behaviour("nil ; nil ; nil"), seq(nil(), seq(nil(), nil())));
    EXPECT_EQ(parse_behaviour("(nil | nil) | nil"), par(par(nil(), nil()), nil()));
}

TEST(Parser, ControlFlow) {
    EXPECT_EQ(parse_behaviour("if x0 then nil else x1 = 2"), if_(expr::var(0), nil(), assign(1, expr::integer(2))));
    EXPECT_EQ(parse_behaviour("while [ !x0 ] (nil)"), while_(expr::logical_not(expr::var(0)), nil()));
}

TEST(Parser, ExpressionPrecedence) {
    using expr::binary;
    Expr want = binary(BinaryOp::Or, expr::var(0),
                       binary(BinaryOp::And, binary(BinaryOp::Eq, expr::var(1), expr::integer(3)),
                              binary(BinaryOp::Lt, expr::var(2), expr::long_integer(4))));
    EXPECT_EQ(parse_expr("x0 || x1 == 3 && x2 < 4L"), want);
    EXPECT_EQ(parse_expr("2.5"), expr::real(2.5));
    EXPECT_EQ(parse_expr("\"a\\\"b\""), expr::string("a\"b"));
}

TEST(Parser, Communication) {
    EXPECT_EQ(parse_behaviour("o(x0)"), input_oneway("o", 0));
    EXPECT_EQ(parse_behaviour("o(x0)(x1) { x1 = x0 }"), input_reqres("o", 0, 1, assign(1, expr::var(0))));
    EXPECT_EQ(parse_behaviour("o @ l (x0)"), notify("o", "l", expr::var(0)));
    EXPECT_EQ(parse_behaviour("o @ l (1)(x0)"), solicit("o", "l", expr::integer(1), 0));
}

TEST(Parser, SyntaxErrorsCarryByteRanges) {
    try {
        parse_behaviour("nil ; ; nil");
        FAIL() << "accepted";
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.span().begin, 6u);
    }
    EXPECT_THROW(parse_behaviour("x0 = "), SyntaxError);
    EXPECT_THROW(parse_behaviour("while x0 nil"), SyntaxError);
    EXPECT_THROW(parse_behaviour("nil nil"), SyntaxError);
    EXPECT_THROW(parse_expr("99999999999"), SyntaxError);
}

TEST(Parser, EmptyInputChoiceRejected) {
    EXPECT_THROW(parse_behaviour("inputchoice"), EmptyChoiceError);
    EXPECT_THROW(parse_behaviour("inputchoice [ ]"), EmptyChoiceError);
}

TEST(Parser, DuplicateVariableInOneBlockRejected) {
    EXPECT_THROW(parse_context("{ x0 : int, x0 : bool }"), DuplicateDeclError);
    EXPECT_NO_THROW(parse_context("{ x0 : int } & { x0 : bool }"));
}

TEST(Parser, ContextJoinsFoldLeft) {
    Context a = Context::leaf({VarDecl{Variable{0}, NativeType::Int}});
    Context e = Context::leaf();
    EXPECT_EQ(parse_context("{ x0 : int } & { } & { }"), Context::join(Context::join(a, e), e));
    EXPECT_EQ(parse_context("{ x0 : int } & ({ } & { })"), Context::join(a, Context::join(e, e)));
}

TEST(Parser, SpansCoverEachSubBehaviour) {
    std::string text = "x0 = true ;\n  while [ x0 ] nil";
    auto parsed = parse_behaviour_with_spans(text);
    Position body{Selector{Selector::Kind::SeqSecond}};
    ASSERT_TRUE(parsed.spans.count(body));
    auto s = parsed.spans.at(body);
    EXPECT_EQ(text.substr(s.begin, s.end - s.begin), "while [ x0 ] nil");
    EXPECT_EQ(parsed.spans.size(), node_count(parsed.behaviour));
}

TEST(Parser, PathModeSharesOneTable) {
    PathTable table;
    Behaviour b = parse_behaviour("amount.fruit = 1 ; amount = true", &table);
    Context g = parse_context("{ amount.fruit : int, total : long }", &table);
    EXPECT_EQ(b, seq(assign(0, expr::integer(1)), assign(1, expr::boolean(true))));
    EXPECT_EQ(g, Context::leaf({VarDecl{Variable{0}, NativeType::Int}, VarDecl{Variable{2}, NativeType::Long}}));
}

TEST(Parser, CommentsAreIgnored) {
    EXPECT_EQ(parse_behaviour("# header\nnil # trailing\n"), nil());
}

TEST(Parser, RoundTripSmallCorpus) {
    for (const auto& b : enumerate_behaviours(standard_config(5))) ASSERT_EQ(parse_behaviour(pretty_behaviour(b)), b);
    for (const auto& g : standard_context_pool()) ASSERT_EQ(parse_context(pretty_context(g)), g);
}

TEST(Parser, NoiseNeverCrashes) {
    const std::string alphabet = "x0 1;|&(){}[]@=!<.\"tru nilwhe:#\n";
    std::mt19937 rng(7);
    for (int i = 0; i < 20000; ++i) {
        std::string text;
        for (std::size_t n = rng() % 24; n > 0; --n) text += alphabet[rng() % alphabet.size()];
        try {
            Behaviour b = parse_behaviour(text);
            EXPECT_EQ(parse_behaviour(pretty_behaviour(b)), b) << text;
        } catch (const SyntaxError&) {
        }
        try {
            parse_context(text);
        } catch (const SyntaxError&) {
        } catch (const DuplicateDeclError&) {
        }
    }
}
