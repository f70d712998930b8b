#include <gtest/gtest.h>

#include "bcheck/parser.hpp"
#include "bcheck/selftest.hpp"

using namespace bcheck;

TEST(Selftest, SuitesPassOnSmallCorpus) {
    auto pool = standard_context_pool();
    for (const Tally& t : {roundtrip_suite(4, pool), normalization_suite(4), oracle_suite(4, pool),
                           congruence_suite(3), validity_suite(4, pool), transport_suite(3, pool)}) {
        EXPECT_TRUE(t.passed()) << t.name << ": " << t.counterexample;
        EXPECT_GT(t.checked, 0u) << t.name;
    }
}

TEST(Selftest, EmptyCorpusIsVacuous) {
    auto pool = standard_context_pool();
    EXPECT_EQ(oracle_suite(0, pool).checked, 0u);
    EXPECT_EQ(transport_suite(0, pool).checked, 0u);
    EXPECT_TRUE(congruence_suite(0).passed());
}

TEST(Selftest, EveryFaultIsRejected) {
    auto pool = standard_context_pool();
    for (Fault f : {Fault::SwapIfBranchContexts, Fault::BreakSeqThreading, Fault::ParCommNoSwap}) {
        Tally t = fault_suite(4, pool, f);
        EXPECT_GT(t.checked, 0u) << to_string(f);
        EXPECT_TRUE(t.passed()) << t.counterexample;
        EXPECT_FALSE(validity_suite(4, pool, f).passed()) << to_string(f);
    }
}

TEST(Selftest, InjectedFaultsChangeTheDerivation) {
    Context g = parse_context("{ x0 : bool } & { }");
    Derivation d = check_behaviour(g, parse_behaviour("if x0 then x0 = 1 else x0 = 2 | x1 = 1 ; nil")).derivation;
    for (Fault f : {Fault::SwapIfBranchContexts, Fault::BreakSeqThreading, Fault::ParCommNoSwap}) {
        auto bad = inject_fault(d, f);
        ASSERT_FALSE(bad.empty()) << to_string(f);
        for (const auto& x : bad) {
            EXPECT_FALSE(x == d);
            EXPECT_FALSE(verify_derivation(x));
        }
    }
}

TEST(Selftest, RootScopesPartitionTheSteps) {
    auto pool = standard_context_pool();
    Tally all = transport_suite(3, pool);
    Tally root = transport_suite(3, pool, StepScope::Root);
    Tally nested = transport_suite(3, pool, StepScope::Nested);
    EXPECT_EQ(all.checked, root.checked + nested.checked);
}

TEST(Selftest, ExpectedRootContexts) {
    Context g = parse_context("{ x0 : int } & { x1 : bool }");
    Derivation d = check_behaviour(g, parse_behaviour("x0 = true | nil")).derivation;
    auto want = expected_root_contexts(d, CongruenceRule::ParComm, Context::leaf());
    ASSERT_TRUE(want.has_value());
    EXPECT_EQ(want->first, parse_context("{ x1 : bool } & { x0 : int }"));
    EXPECT_EQ(want->second, parse_context("{ x1 : bool } & { x0 : bool }"));
}
