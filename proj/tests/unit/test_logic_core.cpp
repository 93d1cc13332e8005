#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace pohammer;
using namespace pohammer::testing;

namespace {

FiniteStructure k2() { return FiniteStructure(Signature{{"E", 2}}, 2, {{"E", {{0, 1}, {1, 0}}}}); }

FiniteStructure graph_g() {
    return FiniteStructure(Signature{{"E", 2}}, 3, {{"E", {{0, 1}, {1, 0}, {2, 1}, {1, 2}}}});
}

} // namespace

TEST(Signature, RejectsDuplicateAndBadSymbols) {
    Signature sig{{"E", 2}};
    EXPECT_THROW(sig.add("E", 1), SignatureError);
    EXPECT_THROW(sig.add("", 1), SignatureError);
    EXPECT_THROW(sig.add("P", 0), SignatureError);
    sig.add("P", 1);
    EXPECT_EQ(sig.arity_of("P"), 1);
    EXPECT_EQ(sig.size(), 2u);
}

TEST(FiniteStructure, RejectsOutOfRangeTuples) {
    EXPECT_THROW(FiniteStructure(Signature{{"E", 2}}, 2, {{"E", {{0, 2}}}}), DomainError);
    EXPECT_THROW(FiniteStructure(Signature{{"E", 2}}, 2, {{"E", {{0}}}}), SignatureError);
    EXPECT_THROW(FiniteStructure(Signature{{"E", 2}}, 2, std::map<std::string, Relation>{{"F", {}}}), SignatureError);
}

TEST(Substructure, FullSetIsIdentity) {
    auto s = substructure(k2(), std::set<Element>{0, 1});
    EXPECT_EQ(s.structure, k2());
    EXPECT_EQ(s.index_map, (std::vector<Element>{0, 1}));
}

TEST(Substructure, SingletonOfK2HasNoEdges) {
    auto s = substructure(k2(), std::set<Element>{0});
    EXPECT_EQ(s.structure.size(), 1);
    EXPECT_TRUE(s.structure.relation("E").empty());
    EXPECT_EQ(s.index_map, (std::vector<Element>{0, -1}));
}

TEST(Substructure, GraphGOnFirstTwoVerticesIsK2) {
    EXPECT_EQ(substructure(graph_g(), std::set<Element>{0, 1}).structure, k2());
}

TEST(Substructure, ReindexesPreservingOrder) {
    auto s = substructure(graph_g(), std::set<Element>{1, 2});
    EXPECT_EQ(s.structure.relation("E"), (Relation{{0, 1}, {1, 0}}));
    EXPECT_EQ(s.index_map, (std::vector<Element>{-1, 0, 1}));
}

TEST(Substructure, RejectsElementOutsideDomain) {
    EXPECT_THROW(substructure(k2(), std::set<Element>{0, 5}), DomainError);
}

TEST(DisjointUnion, EmptyIsNeutral) {
    FiniteStructure empty(Signature{{"E", 2}}, 0);
    EXPECT_EQ(disjoint_union(empty, graph_g()), graph_g());
    EXPECT_EQ(disjoint_union(graph_g(), empty), graph_g());
}

TEST(DisjointUnion, ShiftsSecondOperand) {
    auto u = disjoint_union(k2(), k2());
    EXPECT_EQ(u.size(), 4);
    EXPECT_EQ(u.relation("E"), (Relation{{0, 1}, {1, 0}, {2, 3}, {3, 2}}));
}

TEST(DisjointUnion, RejectsSignatureMismatch) {
    FiniteStructure p(Signature{{"P", 1}}, 1);
    EXPECT_THROW(disjoint_union(k2(), p), SignatureError);
}

TEST(Expand, AddsRelationAndRoundTrips) {
    auto e = expand(k2(), "U", 1, {{0}});
    EXPECT_EQ(e.relation("U"), (Relation{{0}}));
    EXPECT_EQ(e.relation("E"), k2().relation("E"));
    EXPECT_EQ(reduct(e, "U"), k2());
    auto n = expand(graph_g(), "N", 2, {});
    EXPECT_TRUE(n.relation("N").empty());
}

TEST(Expand, Errors) {
    EXPECT_THROW(expand(k2(), "E", 1, {}), SignatureError);
    EXPECT_THROW(expand(k2(), "U", 1, {{3}}), DomainError);
    EXPECT_THROW(expand(k2(), "U", 1, {{0, 1}}), SignatureError);
}

TEST(ExpandWithNeq, Counts) {
    FiniteStructure one(Signature{{"E", 2}}, 1);
    EXPECT_TRUE(expand_with_neq(one).relation("N").empty());
    EXPECT_EQ(expand_with_neq(k2()).relation("N"), (Relation{{0, 1}, {1, 0}}));
    for (int n = 0; n <= 5; ++n) {
        FiniteStructure a(Signature{{"E", 2}}, n);
        EXPECT_EQ(static_cast<int>(expand_with_neq(a).relation("N").size()), n * (n - 1));
    }
    EXPECT_THROW(expand_with_neq(expand_with_neq(k2())), SignatureError);
}

TEST(LogicCoreProperties, SubstructureOnFullDomainIsIdentity) {
    for (const auto& a : all_structures(graph_signature(), 0, 3)) {
        std::set<Element> all;
        for (int i = 0; i < a.size(); ++i) all.insert(i);
        auto s = substructure(a, all);
        EXPECT_EQ(s.structure, a);
        EXPECT_TRUE(are_isomorphic(s.structure, a));
    }
}

TEST(LogicCoreProperties, UnionIsCommutativeAndAssociativeUpToIsomorphism) {
    auto family = all_structures(Signature{{"E", 2}}, 0, 2);
    std::vector<FiniteStructure> small = all_structures(Signature{{"E", 2}}, 0, 1);
    for (const auto& a : family)
        for (const auto& b : family) {
            if (a.size() + b.size() > 3) continue;
            EXPECT_TRUE(are_isomorphic(disjoint_union(a, b), disjoint_union(b, a)));
            for (const auto& c : small) {
                if (a.size() + b.size() + c.size() > 3) continue;
                EXPECT_EQ(disjoint_union(disjoint_union(a, b), c), disjoint_union(a, disjoint_union(b, c)));
            }
        }
}

TEST(LogicCoreProperties, UnionRestrictsBackToOperands) {
    auto family = all_structures(graph_signature(), 0, 2);
    for (const auto& a : family)
        for (const auto& b : family) {
            auto u = disjoint_union(a, b);
            EXPECT_EQ(u.size(), a.size() + b.size());
            std::set<Element> left, right;
            for (int i = 0; i < a.size(); ++i) left.insert(i);
            for (int i = 0; i < b.size(); ++i) right.insert(a.size() + i);
            EXPECT_EQ(substructure(u, left).structure, a);
            EXPECT_EQ(substructure(u, right).structure, b);
        }
}

TEST(Formula, ConstructorsEnforceShape) {
    Var x = fresh_var("x");
    auto f = exists(x, rel("E", {x, x}));
    EXPECT_TRUE(is_sentence(f));
    EXPECT_FALSE(is_sentence(rel("E", {x, x})));
    EXPECT_TRUE(is_first_order(f));
    Var s = fresh_var("S");
    auto g = exists2(s, 1, forall(x, so_atom(s, {x})));
    EXPECT_TRUE(is_sentence(g));
    EXPECT_FALSE(is_first_order(g));
    EXPECT_EQ(free_so_vars(so_atom(s, {x})).at(s), 1);
}

TEST(Formula, EmptyConnectivesCollapse) {
    EXPECT_EQ(conj({})->kind, Kind::truth);
    EXPECT_EQ(disj({})->kind, Kind::falsity);
    Var x = fresh_var("x");
    auto a = rel("P", {x});
    EXPECT_EQ(conj({a}), a);
}

TEST(Formula, CheckSentenceRejectsSignatureMismatch) {
    Var x = fresh_var("x");
    Signature sig{{"E", 2}};
    EXPECT_NO_THROW(check_sentence(exists(x, rel("E", {x, x})), sig));
    EXPECT_THROW(check_sentence(exists(x, rel("E", {x})), sig), Error);
    EXPECT_THROW(check_sentence(exists(x, rel("Q", {x})), sig), Error);
}

TEST(Formula, AlphaNormalizeGivesUniqueBinders) {
    Var x = fresh_var("x");
    Var y = fresh_var("y");
    auto part = exists(x, rel("P", {x}));
    auto f = raw_and({part, part, forall(y, rel("P", {y}))});
    auto g = alpha_normalize(f);
    EXPECT_TRUE(alpha_equivalent(f, g));
    std::set<Var> seen;
    std::function<void(const Formula&)> walk = [&](const Formula& h) {
        if (h->is_fo_quantifier()) {
            EXPECT_TRUE(seen.insert(h->var).second);
        }
        for (const auto& c : h->children) walk(c);
    };
    walk(g);
    EXPECT_EQ(seen.size(), 3u);
}
