#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace pohammer;
using namespace pohammer::testing;

namespace {

constexpr Quantifier all_q = Quantifier::forall;
constexpr Quantifier ex_q = Quantifier::exists;

FiniteStructure r_template() {
    return FiniteStructure(Signature{{"R", 2}}, 2, {{"R", {{0, 1}, {1, 0}, {1, 1}}}});
}

QcspInstance qcsp(std::vector<std::pair<Quantifier, std::vector<std::string>>> blocks,
                  std::vector<std::vector<std::string>> atoms) {
    QcspInstance inst;
    for (auto& [q, vs] : blocks) inst.blocks.push_back({q, vs});
    for (auto& a : atoms) inst.atoms.push_back({"R", a});
    return inst;
}

Qbf3Instance qbf(int num_vars, std::vector<QbfBlock> blocks, std::vector<Clause> clauses) {
    Qbf3Instance inst;
    inst.num_vars = num_vars;
    inst.blocks = std::move(blocks);
    inst.clauses = std::move(clauses);
    return inst;
}

Qbf3Instance forall_exists(std::vector<Clause> clauses) {
    return qbf(2, {{all_q, {1}}, {ex_q, {2}}}, std::move(clauses));
}

std::vector<SoBinder> so_prefix(const Formula& f) { return split_so_prefix(f).prefix; }

// Variables renamed by position, atoms as a sorted set.
std::string qcsp_key(const QcspInstance& inst) {
    std::map<std::string, std::string> rename;
    for (const auto& v : inst.variables()) rename.emplace(v, "v" + std::to_string(rename.size()));
    std::string key;
    for (const auto& b : inst.blocks) key += std::to_string(b.variables.size()) + ";";
    std::set<std::string> atoms;
    for (const auto& a : inst.atoms) {
        std::string s = a.symbol;
        for (const auto& v : a.args) s += " " + rename[v];
        atoms.insert(s);
    }
    for (const auto& a : atoms) key += a + ",";
    return key;
}

} // namespace

// ---- Phi_B --------------------------------------------------------------------

TEST(BuildPhiB, PrefixAndConjunctCount) {
    auto kit = build_phi_B(r_template(), {all_q, ex_q});
    auto so = so_prefix(kit.phi_B);
    ASSERT_EQ(so.size(), 4u);
    EXPECT_EQ(so[0].quantifier, all_q);
    EXPECT_EQ(so[1].quantifier, all_q);
    EXPECT_EQ(so[2].quantifier, ex_q);
    EXPECT_EQ(so[3].quantifier, ex_q);
    EXPECT_EQ(so[0].var, kit.choice_vars[0][0]);
    EXPECT_EQ(so[1].var, kit.choice_vars[0][1]);
    EXPECT_EQ(so[2].var, kit.choice_vars[1][0]);
    EXPECT_EQ(so[3].var, kit.choice_vars[1][1]);
    for (const auto& b : so) EXPECT_EQ(b.arity, 1);
    EXPECT_EQ(kit.psi_template_conjuncts, 4u);
    EXPECT_EQ(kit.marker_symbols, (std::vector<std::string>{"A1", "E2"}));
}

TEST(BuildPhiB, IsForallRestrictedAndNegative) {
    for (auto variant : {PhiBVariant::verbatim, PhiBVariant::strict_choice}) {
        auto kit = build_phi_B(r_template(), {all_q, ex_q}, variant);
        EXPECT_TRUE(classify(kit.phi_B, SyntacticClass::forall_restricted).accepted());
        EXPECT_TRUE(classify(kit.phi_B, SyntacticClass::negative).accepted());
    }
}

TEST(BuildPhiB, HammerInsertsUAfterTheFirstUniversalBlock) {
    auto kit = build_phi_B(r_template(), {ex_q, all_q, ex_q});
    auto so = so_prefix(kit.hammered());
    ASSERT_EQ(so.size(), 7u);
    EXPECT_EQ(so[0].quantifier, ex_q);
    EXPECT_EQ(so[2].var.name, kit.choice_vars[1][0].name);
    EXPECT_EQ(so[3].var.name, kit.choice_vars[1][1].name);
    EXPECT_EQ(so[2].quantifier, all_q);
    EXPECT_EQ(so[3].quantifier, all_q);
    EXPECT_EQ(so[4].var, kit.hammer.u);
    EXPECT_EQ(so[4].quantifier, all_q);
    EXPECT_EQ(so[5].quantifier, ex_q);
}

TEST(BuildPhiB, Errors) {
    FiniteStructure one(Signature{{"R", 2}}, 1);
    EXPECT_THROW(build_phi_B(one, {all_q, ex_q}), PreconditionError);
    EXPECT_THROW(build_phi_B(r_template(), {ex_q}), PreconditionError);
    EXPECT_THROW(build_phi_B(r_template(), {}), PreconditionError);
}

// SO variables are n * |B| (+1 after hammering) and the template part has
// sum over R of n^arity conjuncts.
TEST(BuildPhiB, SizesArePolynomial) {
    for (int ell = 2; ell <= 3; ++ell)
        for (const Prefix& p : {Prefix{all_q}, Prefix{all_q, ex_q}, Prefix{ex_q, all_q, ex_q}}) {
            FiniteStructure b(Signature{{"R", 2}, {"P", 1}}, ell, {{"R", {{0, 1}}}, {"P", {{1}}}});
            auto kit = build_phi_B(b, p);
            const std::size_t n = p.size();
            EXPECT_EQ(so_prefix(kit.phi_B).size(), n * ell);
            EXPECT_EQ(so_prefix(kit.hammered()).size(), n * ell + 1);
            EXPECT_EQ(kit.psi_template_conjuncts, n * n + n);
        }
}

TEST(EncodeQcsp, Example) {
    auto kit = build_phi_B(r_template(), {all_q, ex_q});
    auto a = encode_qcsp_instance(qcsp({{all_q, {"x1"}}, {ex_q, {"y1"}}}, {{"x1", "y1"}}), kit);
    EXPECT_EQ(a.size(), 2);
    EXPECT_EQ(a.relation("A1"), (Relation{{0}}));
    EXPECT_EQ(a.relation("E2"), (Relation{{1}}));
    EXPECT_EQ(a.relation("R"), (Relation{{0, 1}}));
}

TEST(EncodeQcsp, NoAtomsAndOneMarkerPerElement) {
    auto kit = build_phi_B(r_template(), {all_q, ex_q});
    auto a = encode_qcsp_instance(qcsp({{all_q, {"x", "z"}}, {ex_q, {"y"}}}, {}), kit);
    EXPECT_TRUE(a.relation("R").empty());
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        auto b = encode_qcsp_instance(random_qcsp_instance(rng, Signature{{"R", 2}}, {all_q, ex_q}, 4, 4), kit);
        for (Element e = 0; e < b.size(); ++e) {
            EXPECT_EQ(b.relation("A1").contains({e}) + b.relation("E2").contains({e}), 1);
        }
    }
}

TEST(EncodeQcsp, RejectsPrefixMismatch) {
    auto kit = build_phi_B(r_template(), {all_q, ex_q});
    EXPECT_THROW(encode_qcsp_instance(qcsp({{ex_q, {"x"}}, {all_q, {"y"}}}, {}), kit), PreconditionError);
    EXPECT_THROW(encode_qcsp_instance(qcsp({{all_q, {"x", "y"}}}, {}), kit), PreconditionError);
}

TEST(EncodeQcsp, InjectiveUpToRenaming) {
    auto kit = build_phi_B(r_template(), {all_q, ex_q});
    std::mt19937_64 rng(2);
    std::map<std::string, std::string> by_encoding;
    for (int i = 0; i < 300; ++i) {
        auto inst = random_qcsp_instance(rng, Signature{{"R", 2}}, {all_q, ex_q}, 4, 4);
        auto key = qcsp_key(inst);
        auto [it, fresh] = by_encoding.emplace(serialize_structure(encode_qcsp_instance(inst, kit)), key);
        if (!fresh) {
            EXPECT_EQ(it->second, key);
        }
    }
}

TEST(QcspPipeline, Examples) {
    auto kit = build_phi_B(r_template(), {all_q, ex_q});
    auto t = run_qcsp_pipeline(qcsp({{all_q, {"x"}}, {ex_q, {"y"}}}, {{"x", "y"}}), kit);
    EXPECT_TRUE(t.complete());
    EXPECT_TRUE(*t.direct);
    EXPECT_TRUE(t.agree());
    auto f = run_qcsp_pipeline(qcsp({{all_q, {"x", "y"}}, {ex_q, {}}}, {{"x", "y"}}), kit);
    EXPECT_FALSE(*f.direct);
    EXPECT_TRUE(f.agree());
}

TEST(QcspPipeline, RandomInstancesAgree) {
    std::mt19937_64 rng(50);
    const Signature sig{{"R", 2}};
    auto templates = all_structures(sig, 2, 2);
    int truths = 0;
    for (int i = 0; i < 50; ++i) {
        const auto& b = templates[rng() % templates.size()];
        const Prefix p = rng() % 2 ? Prefix{all_q, ex_q} : Prefix{ex_q, all_q};
        auto kit = build_phi_B(b, p);
        auto inst = random_qcsp_instance(rng, sig, p, 4, 4);
        auto r = run_qcsp_pipeline(inst, kit);
        ASSERT_TRUE(r.agree()) << serialize_structure(b) << serialize_qcsp(inst);
        truths += *r.direct;
    }
    EXPECT_GT(truths, 0);
    EXPECT_LT(truths, 50);
}

// Without the at-most-one-value rule the existential player may give a
// variable both values and satisfy an atom no single value satisfies.
TEST(QcspPipeline, VerbatimChoiceRulesOverapproximate) {
    FiniteStructure b(Signature{{"R", 2}}, 2, {{"R", {{0, 1}, {1, 0}}}});
    auto inst = qcsp({{all_q, {"x"}}, {ex_q, {"y"}}}, {{"y", "y"}});
    auto verbatim = run_qcsp_pipeline(inst, build_phi_B(b, {all_q, ex_q}, PhiBVariant::verbatim));
    EXPECT_FALSE(*verbatim.direct);
    EXPECT_TRUE(*verbatim.via_formula);
    EXPECT_FALSE(verbatim.agree());
    EXPECT_TRUE(run_qcsp_pipeline(inst, build_phi_B(b, {all_q, ex_q})).agree());
}

// ---- Phi* ---------------------------------------------------------------------

TEST(BuildPhiStar, Prefix) {
    for (int n = 1; n <= 3; ++n) {
        auto kit = build_phi_star(n);
        auto so = so_prefix(kit.phi_star);
        ASSERT_EQ(so.size(), static_cast<std::size_t>(2 * n + 1));
        for (int k = 0; k < n; ++k) {
            EXPECT_EQ(so[2 * k].quantifier, all_q);
            EXPECT_EQ(so[2 * k].var, kit.universal_vars[k]);
            EXPECT_EQ(so[2 * k + 1].quantifier, ex_q);
            EXPECT_EQ(so[2 * k + 1].var, kit.existential_vars[k]);
        }
        EXPECT_EQ(so.back().var, kit.selection);
        for (const auto& b : so) EXPECT_EQ(b.arity, 1);
    }
    EXPECT_THROW(build_phi_star(0), PreconditionError);
}

TEST(BuildPhiStar, Classes) {
    for (auto variant : {PhiStarVariant::verbatim, PhiStarVariant::chained, PhiStarVariant::committed})
        for (int n = 1; n <= 2; ++n) {
            auto kit = build_phi_star(n, variant);
            EXPECT_TRUE(classify(kit.phi_star, SyntacticClass::exists_guarded).accepted());
            EXPECT_TRUE(classify(kit.phi_star, SyntacticClass::positive).accepted());
            EXPECT_TRUE(classify(kit.dual, SyntacticClass::forall_restricted).accepted());
            EXPECT_TRUE(classify(kit.dual, SyntacticClass::negative).accepted());
        }
}

TEST(BuildPhiStar, SingleBlockKeepsOnlyTheLastTwoUniversalFamilies) {
    // for n = 1 the pairwise families are empty: one clause per E-marker and
    // the complementary-pair clause remain
    auto kit = build_phi_star(1);
    ASSERT_EQ(kit.psi_forall->kind, Kind::conjunction);
    EXPECT_EQ(kit.psi_forall->children.size(), 2u);
    EXPECT_EQ(build_phi_star(2).psi_forall->children.size(), 3u + 2u + 1u);
}

TEST(EncodeQbf3, Example) {
    auto enc = encode_qbf3_occurrences(forall_exists({{1, 2}, {-1, -2}}), 1);
    const auto& a = enc.structure;
    EXPECT_EQ(a.size(), 4);
    // elements: (x,1) (y,1) (-x,2) (-y,2)
    EXPECT_EQ(a.relation("Rbar"), (Relation{{0, 2}, {2, 0}, {1, 3}, {3, 1}}));
    EXPECT_EQ(a.relation("S"), (Relation{{0}, {1}}));
    EXPECT_EQ(a.relation("T"), (Relation{{2}, {3}}));
    EXPECT_EQ(a.relation("Succ"), (Relation{{0, 2}, {0, 3}, {1, 2}, {1, 3}}));
    EXPECT_EQ(a.relation("A1"), (Relation{{0}, {2}}));
    EXPECT_EQ(a.relation("E1"), (Relation{{1}, {3}}));
    EXPECT_EQ(a.relation("R").size(), 16u - 4u);
}

TEST(EncodeQbf3, SingleClause) {
    auto a = encode_qbf3_instance(forall_exists({{1}}), 1);
    EXPECT_EQ(a.size(), 1);
    EXPECT_EQ(a.relation("S"), a.relation("T"));
    EXPECT_EQ(a.relation("S").size(), 1u);
    EXPECT_TRUE(a.relation("Succ").empty());
}

TEST(EncodeQbf3, MarkersPartitionTheDomain) {
    std::mt19937_64 rng(4);
    for (int n = 1; n <= 2; ++n)
        for (int i = 0; i < 100; ++i) {
            auto a = encode_qbf3_instance(random_qbf3_instance(rng, n, 2, 3, 9), n);
            for (Element e = 0; e < a.size(); ++e) {
                int marks = 0;
                for (int k = 1; k <= n; ++k)
                    marks += a.relation("A" + std::to_string(k)).contains({e}) +
                             a.relation("E" + std::to_string(k)).contains({e});
                EXPECT_EQ(marks, 1);
            }
        }
}

TEST(EncodeQbf3, Errors) {
    EXPECT_THROW(encode_qbf3_instance(forall_exists({}), 1), PreconditionError);
    EXPECT_THROW(encode_qbf3_instance(qbf(2, {{ex_q, {1}}, {all_q, {2}}}, {{1}}), 1), PreconditionError);
    EXPECT_THROW(encode_qbf3_instance(forall_exists({{1}}), 2), PreconditionError);
}

// The encoding records clause positions, blocks and complementary pairs but
// not which occurrences share a variable.
TEST(EncodeQbf3, ForgetsVariableIdentity) {
    auto same = qbf(3, {{all_q, {1, 2}}, {ex_q, {3}}}, {{1}, {1}});
    auto distinct = qbf(3, {{all_q, {1, 2}}, {ex_q, {3}}}, {{1}, {2}});
    EXPECT_EQ(encode_qbf3_instance(same, 1), encode_qbf3_instance(distinct, 1));
}

TEST(Qbf3Pipeline, Examples) {
    auto kit = build_phi_star(1);
    auto t = run_qbf3_pipeline(forall_exists({{1, 2}, {-1, -2}}), kit);
    EXPECT_TRUE(*t.direct);
    EXPECT_TRUE(*t.via_formula);
    EXPECT_FALSE(*t.via_hammer);
    EXPECT_TRUE(t.agree());
    auto f = run_qbf3_pipeline(forall_exists({{1, 2}, {-2}}), kit);
    EXPECT_FALSE(*f.direct);
    EXPECT_FALSE(*f.via_formula);
    EXPECT_TRUE(*f.via_hammer);
}

TEST(Qbf3Pipeline, RandomSingleAlternation) {
    auto kit = build_phi_star(1);
    std::mt19937_64 rng(30);
    int truths = 0;
    for (int i = 0; i < 30; ++i) {
        auto inst = random_qbf3_instance(rng, 1, 2, 2, 5);
        auto r = run_qbf3_pipeline(inst, kit);
        ASSERT_TRUE(r.agree()) << serialize_qdimacs3(inst);
        truths += *r.direct;
    }
    EXPECT_GT(truths, 0);
    EXPECT_LT(truths, 30);
}

// Two alternations: the chained variant is checked on small instances.
TEST(Qbf3Pipeline, RandomTwoAlternations) {
    auto kit = build_phi_star(2);
    std::mt19937_64 rng(31);
    int truths = 0;
    for (int i = 0; i < 25; ++i) {
        auto inst = random_qbf3_instance(rng, 2, 1, 2, 5);
        auto r = run_qbf3_pipeline(inst, kit);
        ASSERT_TRUE(r.agree()) << serialize_qdimacs3(inst);
        truths += *r.direct;
    }
    EXPECT_GT(truths, 0);
    EXPECT_LT(truths, 25);
}

// Without the commitment rule the existential player may leave a literal of
// its first block out of its first choice and add it after seeing the second
// universal move.  Here x2 must differ from the later universal x3.
TEST(Qbf3Pipeline, ChainedVariantLetsTheExistentialPlayerWait) {
    auto inst = qbf(4, {{all_q, {1}}, {ex_q, {2}}, {all_q, {3}}, {ex_q, {4}}}, {{-2, -3}, {3, 2}});
    auto chained = run_qbf3_pipeline(inst, build_phi_star(2, PhiStarVariant::chained));
    EXPECT_FALSE(*chained.direct);
    EXPECT_TRUE(*chained.via_formula);
    EXPECT_FALSE(chained.agree());
    EXPECT_TRUE(run_qbf3_pipeline(inst, build_phi_star(2)).agree());
    // with one round there is nothing to postpone
    std::mt19937_64 rng(32);
    for (int i = 0; i < 30; ++i) {
        auto one = random_qbf3_instance(rng, 1, 2, 2, 5);
        EXPECT_TRUE(run_qbf3_pipeline(one, build_phi_star(1, PhiStarVariant::chained)).agree());
    }
}

// With the empty-set escape the existential player selects V = {} and the
// succ conjunct cannot hold, so the verbatim sentence accepts false instances.
TEST(Qbf3Pipeline, VerbatimSentenceAcceptsFalseInstances) {
    auto kit = build_phi_star(1, PhiStarVariant::verbatim);
    auto r = run_qbf3_pipeline(forall_exists({{1}}), kit);
    EXPECT_FALSE(*r.direct);
    EXPECT_TRUE(*r.via_formula);
    EXPECT_FALSE(r.agree());
}

// ---- hammered kits --------------------------------------------------------------

TEST(HammeredKits, ClosedOnSmallFamilies) {
    auto qk = build_phi_B(r_template(), {all_q, ex_q});
    const Signature qsig = with_symbol(qk.signature, qk.hammer.neq_symbol, 2);
    auto sk = build_phi_star(1);
    const Signature ssig = with_symbol(sk.signature, sk.hammer.neq_symbol, 2);
    struct Case {
        Formula f;
        Signature sig;
    };
    for (const auto& c : {Case{qk.hammered(), qsig}, Case{sk.dual_hammered(), ssig}}) {
        auto family = enumerate_structures(
            FamilySpec{.signature = c.sig, .max_size = 2, .random = RandomFamily{.seed = 5, .count = 150}});
        auto tiny = enumerate_structures(FamilySpec{.signature = c.sig, .max_size = 1});
        family.insert(family.end(), tiny.begin(), tiny.end());
        for (auto kind : {ClosureKind::disjoint_unions, ClosureKind::inverse_homomorphisms}) {
            auto r = check_closure(c.f, kind, family);
            EXPECT_EQ(r.verdict, ClosureVerdict::no_counterexample_up_to_bound) << closure_kind_name(kind);
        }
    }
}

TEST(WriteKit, WritesParsableFiles) {
    auto dir = std::filesystem::temp_directory_path() / "pohammer_kit_test";
    std::filesystem::remove_all(dir);
    auto kit = build_phi_B(r_template(), {all_q, ex_q});
    write_kit(dir, kit);
    for (const char* name : {"phi_B.sof", "hammered.sof", "signature.txt", "template.st"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
    }
    std::ifstream in(dir / "phi_B.sof");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_TRUE(alpha_equivalent(parse_formula(text, kit.signature), kit.phi_B));
    std::filesystem::remove_all(dir);
}
