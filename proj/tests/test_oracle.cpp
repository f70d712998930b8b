#include <gtest/gtest.h>

#include <set>

#include "bcheck/oracle.hpp"
#include "bcheck/parser.hpp"
#include "bcheck/printer.hpp"
#include "bcheck/selftest.hpp"

using namespace bcheck;

namespace {

// Count of behaviours of exactly size s over Nil/Assign/If/While/Seq/Par.
std::vector<std::size_t> closed_form(std::size_t max, std::size_t vars, std::size_t exprs) {
    std::vector<std::size_t> n(max + 1, 0);
    if (max >= 1) n[1] = 1 + vars * exprs;
    for (std::size_t s = 2; s <= max; ++s) {
        std::size_t pairs = 0;
        for (std::size_t i = 1; i + 1 < s; ++i) pairs += n[i] * n[s - 1 - i];
        n[s] = exprs * pairs + exprs * n[s - 1] + 2 * pairs;
    }
    return n;
}

std::size_t total(const std::vector<std::size_t>& n) {
    std::size_t t = 0;
    for (auto x : n) t += x;
    return t;
}

}  // namespace

TEST(Enumeration, SingleExpressionPoolUpToThree) {
    EnumConfig cfg = standard_config(3);
    cfg.expressions = {expr::boolean(true)};
    EXPECT_EQ(enumerate_behaviours(cfg).size(), 18u);
    EXPECT_EQ(total(closed_form(3, 1, 1)), 18u);
}

TEST(Enumeration, MatchesClosedFormAndIsDuplicateFree) {
    for (std::size_t max = 0; max <= 6; ++max) {
        auto corpus = enumerate_behaviours(standard_config(max));
        ASSERT_EQ(corpus.size(), total(closed_form(max, 1, 2))) << max;
        std::set<std::string> seen;
        for (const auto& b : corpus) {
            ASSERT_LE(node_count(b), max);
            seen.insert(pretty_behaviour(b));
        }
        EXPECT_EQ(seen.size(), corpus.size());
    }
    EXPECT_EQ(total(closed_form(5, 1, 2)), 2073u);
    EXPECT_EQ(total(closed_form(7, 1, 2)), 100281u);
}

TEST(Enumeration, OrderedBySize) {
    auto corpus = enumerate_behaviours(standard_config(5));
    for (std::size_t i = 1; i < corpus.size(); ++i) ASSERT_LE(node_count(corpus[i - 1]), node_count(corpus[i]));
}

TEST(Enumeration, CommunicationAtomsWhenEnabled) {
    EnumConfig cfg = standard_config(1);
    cfg.communication = true;
    std::set<std::string> got;
    for (const auto& b : enumerate_behaviours(cfg)) got.insert(pretty_behaviour(b));
    EXPECT_TRUE(got.count("o(x0)"));
    EXPECT_TRUE(got.count("o @ l (true)"));
}

TEST(ContextPool, StandardPoolIsDistinct) {
    auto pool = standard_context_pool();
    std::set<std::string> seen;
    for (const auto& g : pool) seen.insert(pretty_context(g));
    EXPECT_EQ(seen.size(), pool.size());
    EXPECT_EQ(pool.size(), 72u);
}

TEST(BruteForce, Examples) {
    auto one = brute_force_check(parse_context("{ } & { }"), parse_behaviour("nil | nil"));
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(pretty_context(one[0].first), "{ } & { }");
    EXPECT_TRUE(brute_force_check(parse_context("{ }"), parse_behaviour("while [ 1 ] nil")).empty());
    EXPECT_TRUE(brute_force_check(parse_context("{ }"), parse_behaviour("nil | nil")).empty());
    auto threaded = brute_force_check(parse_context("{ }"), parse_behaviour("x0 = 1 ; x0 = x0 < 2"));
    ASSERT_EQ(threaded.size(), 1u);
    EXPECT_EQ(pretty_context(threaded[0].first), "{ x0 : bool }");
}

TEST(BruteForce, AgreesWithCheckerOnSmallCorpus) {
    auto pool = standard_context_pool();
    for (const auto& b : enumerate_behaviours(standard_config(4)))
        for (const auto& g : pool) {
            auto found = brute_force_check(g, b);
            ASSERT_LE(found.size(), 1u);
            try {
                auto r = check_behaviour(g, b);
                ASSERT_EQ(found.size(), 1u);
                EXPECT_EQ(found[0].first, r.output);
                EXPECT_EQ(found[0].second, r.derivation);
            } catch (const TypeError&) {
                EXPECT_TRUE(found.empty());
            }
        }
}

TEST(Search, ShortestPaths) {
    auto t = exhaustive_congruence_search(parse_behaviour("nil | x0 = true"), parse_behaviour("x0 = true | nil"), 8);
    ASSERT_TRUE(t.has_value());
    EXPECT_EQ(t->size(), 1u);
    auto two = exhaustive_congruence_search(parse_behaviour("nil ; (nil | x0 = true)"),
                                            parse_behaviour("x0 = true | nil"), 8);
    ASSERT_TRUE(two.has_value());
    EXPECT_EQ(two->size(), 2u);
    EXPECT_EQ(replay(parse_behaviour("nil ; (nil | x0 = true)"), *two), parse_behaviour("x0 = true | nil"));
    EXPECT_FALSE(exhaustive_congruence_search(parse_behaviour("nil"), parse_behaviour("x0 = true"), 6).has_value());
}

TEST(Search, BallDistancesAreExact) {
    auto ball = congruence_ball(parse_behaviour("nil"), 1);
    EXPECT_EQ(ball.at("nil"), 0u);
    EXPECT_EQ(ball.at("nil ; nil"), 1u);
    EXPECT_EQ(ball.at("nil | nil"), 1u);
    EXPECT_EQ(ball.size(), 3u);
}

TEST(Search, ConnectedPairsMatchPairwiseSearch) {
    auto corpus = enumerate_behaviours(standard_config(3));
    auto normal = [](const Behaviour& x) { return pretty_behaviour(normalize(x)); };
    auto linked = connected_pairs(corpus, 4, normal);
    EXPECT_TRUE(linked.key_changes.empty());
    std::set<std::pair<std::size_t, std::size_t>> got(linked.pairs.begin(), linked.pairs.end());
    for (std::size_t i = 0; i < corpus.size(); ++i)
        for (std::size_t j = i + 1; j < corpus.size(); ++j)
            ASSERT_EQ(got.count({i, j}) == 1, exhaustive_congruence_search(corpus[i], corpus[j], 4).has_value())
                << pretty_behaviour(corpus[i]) << " vs " << pretty_behaviour(corpus[j]);
}

TEST(Search, ConstantKeyStillFindsAllPairs) {
    auto corpus = enumerate_behaviours(standard_config(3));
    auto by_normal = connected_pairs(corpus, 4, [](const Behaviour& x) { return pretty_behaviour(normalize(x)); });
    auto flat = connected_pairs(corpus, 4, [](const Behaviour&) { return std::string(); });
    EXPECT_EQ(by_normal.pairs, flat.pairs);
}

TEST(Search, KeyChangesAreReported) {
    std::vector<Behaviour> corpus = {parse_behaviour("nil ; nil")};
    auto linked = connected_pairs(corpus, 2, [](const Behaviour& x) { return pretty_behaviour(x); });
    EXPECT_FALSE(linked.key_changes.empty());
}
