#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace pohammer;
using namespace pohammer::testing;

namespace {

template <class F>
SourceSpan span_of(F&& f) {
    try {
        f();
    } catch (const ParseError& e) {
        return e.span();
    }
    ADD_FAILURE() << "expected a parse error";
    return {};
}

std::string read_sample(const std::string& name) {
    std::ifstream in(std::string(POHAMMER_SAMPLES_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(ParseStructure, K2) {
    auto a = parse_structure("signature E/2\ndomain 2\nE: (0,1) (1,0)\n");
    EXPECT_EQ(a, FiniteStructure(Signature{{"E", 2}}, 2, {{"E", {{0, 1}, {1, 0}}}}));
}

TEST(ParseStructure, EmptyDomain) {
    auto a = parse_structure("signature E/2\ndomain 0\n");
    EXPECT_EQ(a.size(), 0);
    EXPECT_TRUE(a.relation("E").empty());
}

TEST(ParseStructure, GraphG) {
    auto a = parse_structure("signature E/2\ndomain 3\nE: (0,1) (1,0) (2,1) (1,2)\n");
    EXPECT_EQ(a.relation("E"), (Relation{{0, 1}, {1, 0}, {1, 2}, {2, 1}}));
}

TEST(ParseStructure, CommentsAndRepeatedLines) {
    auto a = parse_structure("# a graph\nsignature E/2 P/1\ndomain 2 # two\nE: (0,1)\nE: (1,1)\nP: (1)\n");
    EXPECT_EQ(a.relation("E"), (Relation{{0, 1}, {1, 1}}));
    EXPECT_EQ(a.relation("P"), (Relation{{1}}));
}

TEST(ParseStructure, ErrorsCarrySpans) {
    auto s = span_of([] { parse_structure("signature E/2\ndomain 2\nF: (0,1)\n"); });
    EXPECT_EQ(s.line, 3);
    EXPECT_EQ(s.column, 1);
    s = span_of([] { parse_structure("signature E/2\ndomain 2\nE: (0,1) (0)\n"); });
    EXPECT_EQ(s.line, 3);
    EXPECT_EQ(s.column, 10);
    s = span_of([] { parse_structure("signature E/2\ndomain 2\nE: (0,2)\n"); });
    EXPECT_EQ(s.line, 3);
    s = span_of([] { parse_structure("signature E/2\nsignature P/1\n"); });
    EXPECT_EQ(s.line, 2);
    EXPECT_THROW(parse_structure("signature E/2 E/1\ndomain 1\n"), Error);
    EXPECT_THROW(parse_structure("signature E/2\n"), ParseError);
}

TEST(SerializeStructure, CanonicalOrder) {
    auto a = FiniteStructure(Signature{{"E", 2}}, 2, {{"E", {{1, 0}, {0, 1}}}});
    EXPECT_EQ(serialize_structure(a), "signature E/2\ndomain 2\nE: (0,1) (1,0)\n");
}

TEST(SerializeStructure, RoundTripIsExact) {
    for (const auto& a : all_structures(graph_signature(), 0, 2)) EXPECT_EQ(parse_structure(serialize_structure(a)), a);
}

TEST(ParseSignature, WithAndWithoutKeyword) {
    EXPECT_EQ(parse_signature("E/2 P/1"), (Signature{{"E", 2}, {"P", 1}}));
    EXPECT_EQ(parse_signature("signature E/2"), (Signature{{"E", 2}}));
}

TEST(ParseFormula, LoopTest) {
    auto f = parse_formula("(exists x (atom E (x x)))", Signature{{"E", 2}});
    ASSERT_EQ(f->kind, Kind::exists_fo);
    EXPECT_EQ(f->child()->kind, Kind::rel_atom);
    EXPECT_EQ(f->child()->args[0], f->var);
    EXPECT_EQ(serialize_formula(f), "(exists x (atom E (x x)))");
}

TEST(ParseFormula, SoBinderOverTrue) {
    auto f = parse_formula("(forall2 (U 1) (true))", Signature{});
    ASSERT_EQ(f->kind, Kind::forall_so);
    EXPECT_EQ(f->arity, 1);
    EXPECT_EQ(f->child()->kind, Kind::truth);
}

TEST(ParseFormula, BinderListsExpandLeftToRight) {
    auto f = parse_formula("(forall (x y) (atom E (x y)))", Signature{{"E", 2}});
    EXPECT_EQ(serialize_formula(f), "(forall x (forall y (atom E (x y))))");
}

TEST(ParseFormula, Errors) {
    Signature sig{{"E", 2}};
    auto s = span_of([&] { parse_formula("(exists x\n  (atom E (x y)))", sig); });
    EXPECT_EQ(s.line, 2);
    EXPECT_THROW(parse_formula("(exists x (atom E (x)))", sig), ParseError);
    EXPECT_THROW(parse_formula("(exists x (atom F (x x)))", sig), ParseError);
    EXPECT_THROW(parse_formula("(exists2 (S 1) (forall x (atom S (x x))))", sig), ParseError);
    EXPECT_THROW(parse_formula("(exists x (atom E (x x))", sig), ParseError);
    EXPECT_THROW(parse_formula("(exists x (atom E (x x))) extra", sig), ParseError);
}

TEST(ParseFormula, SingleChildConnectiveCollapses) {
    EXPECT_EQ(parse_formula("(and (true))", Signature{})->kind, Kind::truth);
    EXPECT_EQ(parse_formula("(or)", Signature{})->kind, Kind::falsity);
}

TEST(ParseFormula, InfersSignature) {
    auto p = parse_formula("(forall x (or (atom P (x)) (exists y (atom E (x y)))))");
    EXPECT_EQ(p.signature, (Signature{{"P", 1}, {"E", 2}}));
}

TEST(SerializeFormula, AlphaVariantsPrintIdenticallyAfterNormalization) {
    Signature sig{{"E", 2}};
    auto a = parse_formula("(exists u (forall v (atom E (u v))))", sig);
    auto b = parse_formula("(exists p (forall q (atom E (p q))))", sig);
    EXPECT_TRUE(alpha_equivalent(a, b));
    EXPECT_EQ(serialize_formula(canonical_names(a)), serialize_formula(canonical_names(b)));
}

TEST(SerializeFormula, ShadowedNamesGetSuffixes) {
    Var x1 = fresh_var("x");
    Var x2 = fresh_var("x");
    auto f = exists(x1, forall(x2, rel("E", {x1, x2})));
    EXPECT_EQ(serialize_formula(f), "(exists x (forall x_1 (atom E (x x_1))))");
    auto g = parse_formula(serialize_formula(f), Signature{{"E", 2}});
    EXPECT_TRUE(alpha_equivalent(f, g));
}

TEST(SerializeFormula, RoundTripOnRandomCorpus) {
    FormulaGenerator gen(7);
    for (int i = 0; i < 200; ++i) {
        auto f = gen.sentence();
        auto text = serialize_formula(f);
        auto g = parse_formula(text, FormulaGenerator::signature());
        EXPECT_TRUE(alpha_equivalent(f, g)) << text;
        EXPECT_EQ(serialize_formula(g), text);
    }
}

TEST(SerializeFormula, RoundTripOnSuites) {
    std::vector<std::string> corpus = fo_suite();
    for (const auto& s : sup_shom_suite()) corpus.push_back(s);
    corpus.push_back(cycle_sentence());
    for (const auto& t : corpus) {
        auto f = parse_formula(t, graph_signature());
        auto once = serialize_formula(f);
        EXPECT_EQ(serialize_formula(parse_formula(once, graph_signature())), once);
    }
}

TEST(ParseQcsp, PrefixAndAtoms) {
    Signature sig{{"R", 2}};
    auto inst = parse_qcsp("forall x1 ; exists y1\nR(x1,y1)\n", sig);
    ASSERT_EQ(inst.blocks.size(), 2u);
    EXPECT_EQ(inst.blocks[0].quantifier, Quantifier::forall);
    EXPECT_EQ(inst.blocks[0].variables, std::vector<std::string>{"x1"});
    EXPECT_EQ(inst.blocks[1].variables, std::vector<std::string>{"y1"});
    ASSERT_EQ(inst.atoms.size(), 1u);
    EXPECT_EQ(inst.atoms[0].args, (std::vector<std::string>{"x1", "y1"}));
    EXPECT_EQ(serialize_qcsp(inst), "forall x1 ; exists y1\nR(x1,y1)\n");
}

TEST(ParseQcsp, PlainCsp) {
    auto inst = parse_qcsp("exists y1 y2\nR(y1,y2) R(y2,y1)\n", Signature{{"R", 2}});
    EXPECT_EQ(inst.prefix(), (Prefix{Quantifier::exists}));
    EXPECT_EQ(inst.atoms.size(), 2u);
    EXPECT_EQ(parse_qcsp(serialize_qcsp(inst), Signature{{"R", 2}}).atoms.size(), 2u);
}

TEST(ParseQcsp, EmptyBlocksAllowed) {
    auto inst = parse_qcsp("forall x y ; exists\nR(x,y)\n", Signature{{"R", 2}});
    ASSERT_EQ(inst.blocks.size(), 2u);
    EXPECT_TRUE(inst.blocks[1].variables.empty());
}

TEST(ParseQcsp, Errors) {
    Signature sig{{"R", 2}};
    auto s = span_of([&] { parse_qcsp("forall x ; exists x\nR(x,x)\n", sig); });
    EXPECT_EQ(s.line, 1);
    EXPECT_EQ(s.column, 19);
    EXPECT_THROW(parse_qcsp("exists x\nR(x,z)\n", sig), ParseError);
    EXPECT_THROW(parse_qcsp("exists x y\nx=y\n", sig), ParseError);
    EXPECT_THROW(parse_qcsp("exists x y\neq(x,y)\n", sig), ParseError);
    EXPECT_THROW(parse_qcsp("exists x\nS(x,x)\n", sig), ParseError);
    EXPECT_THROW(parse_qcsp("exists x\nR(x)\n", sig), ParseError);
}

TEST(ParseQdimacs, DirectReading) {
    auto inst = parse_qdimacs3("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n");
    EXPECT_EQ(inst.num_vars, 2);
    EXPECT_EQ(inst.prefix(), (Prefix{Quantifier::forall, Quantifier::exists}));
    EXPECT_EQ(inst.clauses, (std::vector<Clause>{{1, 2}, {-1, -2}}));
    EXPECT_EQ(serialize_qdimacs3(inst), "p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n");
}

TEST(ParseQdimacs, EmptyClauseList) {
    auto inst = parse_qdimacs3("p cnf 1 0\na 1 0\n");
    EXPECT_TRUE(inst.clauses.empty());
}

TEST(ParseQdimacs, Errors) {
    auto s = span_of([] { parse_qdimacs3("p cnf 4 1\ne 1 2 3 4 0\n1 2 3 4 0\n"); });
    EXPECT_EQ(s.line, 3);
    EXPECT_THROW(parse_qdimacs3("p cnf 2 1\na 1 0\ne 1 2 0\n1 2 0\n"), ParseError);
    EXPECT_THROW(parse_qdimacs3("p cnf 2 1\na 1 0\n1 2 0\n"), ParseError);
    EXPECT_THROW(parse_qdimacs3("p dnf 2 1\n"), ParseError);
    EXPECT_THROW(parse_qdimacs3("a 1 0\n"), ParseError);
    EXPECT_THROW(parse_qdimacs3("p cnf 1 2\na 1 0\n1 0\n"), ParseError);
}

TEST(ParseQdimacs, ShapeCheck) {
    std::string text = "p cnf 2 1\na 1 0\ne 2 0\n1 2 0\n";
    EXPECT_NO_THROW(parse_qdimacs3(text, Prefix{Quantifier::forall, Quantifier::exists}));
    EXPECT_THROW(parse_qdimacs3(text, Prefix{Quantifier::exists, Quantifier::forall}), ParseError);
}

TEST(Samples, AllParse) {
    EXPECT_EQ(parse_structure(read_sample("k2.st")).size(), 2);
    EXPECT_EQ(parse_structure(read_sample("g.st")).size(), 3);
    EXPECT_EQ(parse_structure(read_sample("c3.st")).size(), 3);
    EXPECT_NO_THROW(parse_formula(read_sample("copy.sof"), Signature{{"N", 2}}));
    EXPECT_NO_THROW(parse_formula(read_sample("cycle.sof"), Signature{{"E", 2}}));
    auto b = parse_structure(read_sample("template.st"));
    EXPECT_NO_THROW(parse_qcsp(read_sample("forall_exists.qcsp"), b.signature()));
    EXPECT_NO_THROW(parse_qdimacs3(read_sample("xor.qdimacs")));
}
