#pragma once

#include "pohammer/errors.hpp"
#include "pohammer/formula.hpp"
#include "pohammer/instances.hpp"
#include "pohammer/model_check.hpp"
#include "pohammer/normalize.hpp"
#include "pohammer/structure.hpp"
#include "pohammer/text_io.hpp"
#include "pohammer/transforms.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pohammer {

// ---- QCSP(B) -> model checking ---------------------------------------------

// verbatim: the construction exactly as displayed.  strict_choice (default)
// additionally requires every existential variable to receive at most one
// value, which the displayed rules leave open.
enum class PhiBVariant { verbatim, strict_choice };

struct QcspReductionKit {
    FiniteStructure template_structure;
    Prefix prefix;
    PhiBVariant variant = PhiBVariant::strict_choice;
    Signature signature;                      // template symbols, then one marker per block
    std::vector<std::string> marker_symbols;  // "A1", "E2", ... (block order)
    std::vector<std::vector<Var>> choice_vars;  // [block][element]
    Formula psi_forall;
    Formula psi_exists;
    Formula psi_template;
    std::size_t psi_template_conjuncts = 0;
    Formula phi_B;
    HammerResult hammer;

    [[nodiscard]] const Formula& hammered() const { return hammer.sentence; }
};

inline QcspReductionKit build_phi_B(const FiniteStructure& b, const Prefix& prefix,
                                    PhiBVariant variant = PhiBVariant::strict_choice) {
    if (b.size() < 2) throw PreconditionError("build_phi_B needs a template with at least two elements");
    if (prefix.empty()) throw PreconditionError("build_phi_B needs a nonempty prefix");
    if (std::find(prefix.begin(), prefix.end(), Quantifier::forall) == prefix.end())
        throw PreconditionError("build_phi_B needs at least one universal block");
    QcspReductionKit kit;
    kit.template_structure = b;
    kit.prefix = prefix;
    kit.variant = variant;
    const int n = static_cast<int>(prefix.size());
    const int ell = b.size();
    std::set<std::string> taken;
    for (const auto& s : b.signature()) taken.insert(s.name);
    kit.signature = b.signature();
    for (int i = 0; i < n; ++i) {
        const std::string letter = prefix[i] == Quantifier::forall ? "A" : "E";
        std::string marker = fresh_symbol(letter + std::to_string(i + 1), taken);
        taken.insert(marker);
        kit.signature.add(marker, 1);
        kit.marker_symbols.push_back(marker);
        std::vector<Var> vars;
        for (int e = 0; e < ell; ++e) vars.push_back(fresh_var(letter + std::to_string(i + 1) + "_" + std::to_string(e)));
        kit.choice_vars.push_back(std::move(vars));
    }
    auto marker = [&](int i, const Var& x) { return rel(kit.marker_symbols[i], {x}); };
    auto choice = [&](int i, int e, const Var& x) { return so_atom(kit.choice_vars[i][e], {x}); };

    std::vector<Formula> forall_parts;
    for (int i = 0; i < n; ++i) {
        if (prefix[i] != Quantifier::forall) continue;
        std::vector<Formula> options;
        for (int e = 0; e < ell; ++e)
            for (int c = 0; c < ell; ++c) {
                if (c == e) continue;
                Var x = fresh_var("x"), y = fresh_var("x");
                options.push_back(exists(x, raw_and({negate(marker(i, x)), choice(i, e, x)})));
                options.push_back(exists(y, raw_and({choice(i, e, y), choice(i, c, y)})));
            }
        forall_parts.push_back(disj(options));
    }
    kit.psi_forall = conj(forall_parts);

    std::vector<Formula> exists_parts;
    for (int i = 0; i < n; ++i) {
        if (prefix[i] != Quantifier::exists) continue;
        Var x = fresh_var("x");
        std::vector<Formula> c{negate(marker(i, x))};
        for (int e = 0; e < ell; ++e) c.push_back(choice(i, e, x));
        exists_parts.push_back(forall(x, disj(c)));
        if (variant == PhiBVariant::strict_choice)
            for (int e = 0; e < ell; ++e)
                for (int d = e + 1; d < ell; ++d) {
                    Var y = fresh_var("x");
                    exists_parts.push_back(forall(y, raw_or({negate(choice(i, e, y)), negate(choice(i, d, y))})));
                }
    }
    kit.psi_exists = conj(exists_parts);

    std::vector<Formula> template_parts;
    for (std::size_t r = 0; r < b.signature().size(); ++r) {
        const auto& sym = b.signature()[r];
        const int m = sym.arity;
        std::vector<int> idx(m, 0);
        while (true) {
            std::vector<Var> xs;
            for (int k = 0; k < m; ++k) xs.push_back(fresh_var("x" + std::to_string(k + 1)));
            std::vector<Formula> clause{negate(rel(sym.name, xs))};
            for (int k = 0; k < m; ++k) clause.push_back(negate(marker(idx[k], xs[k])));
            for (int k = 0; k < m; ++k) {
                if (prefix[idx[k]] != Quantifier::forall) continue;
                std::vector<Formula> none;
                for (int e = 0; e < ell; ++e) none.push_back(negate(choice(idx[k], e, xs[k])));
                clause.push_back(conj(none));
            }
            for (const auto& t : b.relation(r)) {
                std::vector<Formula> match;
                for (int k = 0; k < m; ++k) match.push_back(choice(idx[k], t[k], xs[k]));
                clause.push_back(conj(match));
            }
            template_parts.push_back(forall(xs, disj(clause)));
            int k = m - 1;
            while (k >= 0 && idx[k] == n - 1) idx[k--] = 0;
            if (k < 0) break;
            ++idx[k];
        }
    }
    kit.psi_template_conjuncts = template_parts.size();
    kit.psi_template = template_parts.empty() ? truth()
                       : template_parts.size() == 1 ? template_parts.front()
                                                    : raw_and(template_parts);

    std::vector<SoBinder> so;
    for (int i = 0; i < n; ++i)
        for (int e = 0; e < ell; ++e) so.push_back({prefix[i], kit.choice_vars[i][e], 1});
    kit.phi_B = with_so_prefix(so, raw_or({kit.psi_forall, raw_and({kit.psi_exists, kit.psi_template})}));
    kit.hammer = csp_hammer(kit.phi_B);
    return kit;
}

// Variables become elements (declaration order); block i's marker holds on
// block i's variables; template relations hold on the atoms.
inline FiniteStructure encode_qcsp_instance(const QcspInstance& inst, const QcspReductionKit& kit) {
    validate(inst, kit.template_structure.signature());
    if (inst.prefix() != kit.prefix)
        throw PreconditionError("instance prefix " + prefix_string(inst.prefix()) + " does not match " +
                                prefix_string(kit.prefix));
    std::map<std::string, Element> index;
    for (const auto& v : inst.variables()) index.emplace(v, static_cast<Element>(index.size()));
    std::vector<Relation> rels(kit.signature.size());
    for (const auto& atom : inst.atoms) {
        Tuple t;
        for (const auto& v : atom.args) t.push_back(index.at(v));
        rels[*kit.signature.index_of(atom.symbol)].insert(std::move(t));
    }
    for (std::size_t i = 0; i < inst.blocks.size(); ++i)
        for (const auto& v : inst.blocks[i].variables)
            rels[*kit.signature.index_of(kit.marker_symbols[i])].insert({index.at(v)});
    return FiniteStructure(kit.signature, static_cast<int>(index.size()), std::move(rels));
}

struct PipelineResult {
    std::optional<bool> direct;
    std::optional<bool> via_formula;
    std::optional<bool> via_hammer;
    std::vector<std::string> errors;  // one entry per leg that ran out of budget
    bool hammer_negates = false;      // the hammered leg decides the complement

    [[nodiscard]] bool complete() const { return direct && via_formula && via_hammer; }

    [[nodiscard]] bool agree() const {
        return complete() && *via_formula == *direct && *via_hammer == (hammer_negates ? !*direct : *direct);
    }
};

namespace detail {

inline std::optional<bool> run_leg(const char* name, const FiniteStructure& a, const Formula& f, const McOptions& opts,
                                   std::vector<std::string>& errors) {
    try {
        return mc_so(a, f, opts);
    } catch (const ResourceError& e) {
        errors.push_back(std::string(name) + ": " + e.what());
        return std::nullopt;
    }
}

} // namespace detail

inline PipelineResult run_qcsp_pipeline(const QcspInstance& inst, const QcspReductionKit& kit, const McOptions& opts = {}) {
    PipelineResult r;
    r.direct = solve_qcsp(kit.template_structure, inst);
    FiniteStructure a = encode_qcsp_instance(inst, kit);
    r.via_formula = detail::run_leg("phi_B", a, kit.phi_B, opts, r.errors);
    r.via_hammer = detail::run_leg("hammered", expand_with_neq(a, kit.hammer.neq_symbol), kit.hammered(), opts, r.errors);
    return r;
}

// ---- (forall exists)^n 3-CNF -> model checking ------------------------------

// verbatim: the construction exactly as displayed.  chained: the selection V
// is relativized without the empty-set escape and the successor conjunct asks
// every selected literal outside the last clause for a selected literal in the
// next clause.  committed (default): chained, plus two rules that bind the
// selection to the existential player's rounds: every selected existential
// literal was chosen in some round, and a literal of existential block k
// chosen in a later round was already chosen in round k.  Without them the
// selection fixes existential values after all universal moves.  "Not in
// block k" is written as the disjunction of the other markers, which keeps
// the sentence positive.
enum class PhiStarVariant { verbatim, chained, committed };

inline PhiStarVariant parse_phi_star_variant(const std::string& s) {
    if (s == "verbatim") return PhiStarVariant::verbatim;
    if (s == "chained") return PhiStarVariant::chained;
    if (s == "committed" || s.empty()) return PhiStarVariant::committed;
    throw PreconditionError("unknown variant '" + s + "'");
}

struct Qbf3ReductionKit {
    int n = 1;
    PhiStarVariant variant = PhiStarVariant::committed;
    Signature signature;
    std::vector<Var> universal_vars;    // A_{k,0}
    std::vector<Var> existential_vars;  // E_{k,1}
    Var selection;                      // V
    Formula psi_forall;
    Formula psi_exists;
    Formula psi;
    Formula phi_star;
    Formula dual;
    HammerResult hammer;  // of the dual

    [[nodiscard]] const Formula& dual_hammered() const { return hammer.sentence; }
};

inline Signature phi_star_signature(int n) {
    Signature sig{{"R", 2}, {"Rbar", 2}, {"Succ", 2}, {"S", 1}, {"T", 1}};
    for (int k = 1; k <= n; ++k) sig.add("E" + std::to_string(k), 1);
    for (int k = 1; k <= n; ++k) sig.add("A" + std::to_string(k), 1);
    return sig;
}

inline Qbf3ReductionKit build_phi_star(int n, PhiStarVariant variant = PhiStarVariant::committed) {
    if (n < 1) throw PreconditionError("build_phi_star needs n >= 1");
    Qbf3ReductionKit kit;
    kit.n = n;
    kit.variant = variant;
    kit.signature = phi_star_signature(n);
    for (int k = 1; k <= n; ++k) {
        kit.universal_vars.push_back(fresh_var("A" + std::to_string(k) + "_0"));
        kit.existential_vars.push_back(fresh_var("E" + std::to_string(k) + "_1"));
    }
    kit.selection = fresh_var("V");
    auto a0 = [&](int k, const Var& x) { return so_atom(kit.universal_vars[k - 1], {x}); };
    auto e1 = [&](int k, const Var& x) { return so_atom(kit.existential_vars[k - 1], {x}); };
    auto a_mark = [&](int k, const Var& x) { return rel("A" + std::to_string(k), {x}); };
    auto e_mark = [&](int k, const Var& x) { return rel("E" + std::to_string(k), {x}); };

    std::vector<Formula> up;
    for (int k = 1; k <= n; ++k)
        for (int l = k + 1; l <= n; ++l) {
            Var x = fresh_var("x");
            up.push_back(forall(x, raw_or({negate(a0(k, x)), a0(l, x)})));
        }
    for (int k = 1; k <= n; ++k)
        for (int l = k + 1; l <= n; ++l) {
            Var x = fresh_var("x");
            up.push_back(forall(x, raw_or({negate(a0(l, x)), negate(a_mark(k, x)), a0(k, x)})));
        }
    for (int k = 1; k <= n; ++k)
        for (int l = k + 1; l <= n; ++l) {
            Var x = fresh_var("x");
            up.push_back(forall(x, raw_or({negate(a0(k, x)), negate(a_mark(l, x))})));
        }
    for (int k = 1; k <= n; ++k) {
        Var x = fresh_var("x");
        up.push_back(forall(x, raw_or({negate(a0(n, x)), negate(e_mark(k, x))})));
    }
    {
        Var x = fresh_var("x"), y = fresh_var("y");
        up.push_back(forall(std::vector<Var>{x, y},
                            raw_or({negate(a0(n, x)), negate(a0(n, y)), negate(rel("Rbar", {x, y}))})));
    }
    kit.psi_forall = conj(up);

    std::vector<Formula> ep;
    {
        Var x = fresh_var("x");
        std::vector<Formula> parts;
        for (int k = 1; k <= n; ++k)
            for (int l = k + 1; l <= n; ++l) parts.push_back(raw_or({negate(e1(k, x)), e1(l, x)}));
        Formula body = conj(parts);
        if (body->kind != Kind::truth) ep.push_back(forall(x, body));
    }
    {
        Var y = fresh_var("y");
        std::vector<Formula> parts;
        for (int k = 1; k <= n; ++k) {
            std::vector<Formula> d{negate(e1(k, y))};
            for (int j = 1; j <= k; ++j) d.push_back(e_mark(j, y));
            parts.push_back(disj(d));
        }
        ep.push_back(forall(y, conj(parts)));
    }
    {
        Var w = fresh_var("w"), z = fresh_var("z");
        ep.push_back(forall(std::vector<Var>{w, z}, raw_or({negate(e1(n, w)), negate(e1(n, z)), rel("R", {w, z})})));
    }
    if (variant == PhiStarVariant::committed)
        for (int k = 1; k <= n; ++k)
            for (int l = k + 1; l <= n; ++l) {
                Var x = fresh_var("x");
                std::vector<Formula> d{negate(e1(l, x)), e1(k, x)};
                for (int j = 1; j <= n; ++j) {
                    if (j != k) d.push_back(e_mark(j, x));
                    d.push_back(a_mark(j, x));
                }
                ep.push_back(forall(x, disj(d)));
            }
    kit.psi_exists = conj(ep);

    std::vector<Formula> goal;
    {
        Var x = fresh_var("x"), y = fresh_var("y");
        goal.push_back(forall(std::vector<Var>{x, y}, rel("R", {x, y})));
    }
    {
        Var x = fresh_var("x"), y = fresh_var("y");
        goal.push_back(exists(std::vector<Var>{x, y}, raw_and({rel("S", {x}), rel("T", {y})})));
    }
    {
        Var x = fresh_var("x");
        std::vector<Formula> d{negate(a0(n, x))};
        for (int k = 1; k <= n; ++k) d.push_back(e1(k, x));
        goal.push_back(forall(x, disj(d)));
    }
    if (variant == PhiStarVariant::committed) {
        Var x = fresh_var("x");
        std::vector<Formula> d;
        for (int k = 1; k <= n; ++k) d.push_back(a_mark(k, x));
        for (int k = 1; k <= n; ++k) d.push_back(e1(k, x));
        goal.push_back(forall(x, disj(d)));
    }
    if (variant == PhiStarVariant::verbatim) {
        Var x = fresh_var("x"), y = fresh_var("y"), a = fresh_var("a"), b = fresh_var("b");
        goal.push_back(forall(std::vector<Var>{x, y},
                              exists(std::vector<Var>{a, b},
                                     raw_or({eq(x, y), raw_and({rel("Succ", {x, a}), rel("Succ", {b, y})})}))));
    } else {
        Var x = fresh_var("x"), a = fresh_var("a");
        goal.push_back(forall(x, exists(a, raw_or({rel("T", {x}), rel("Succ", {x, a})}))));
    }
    kit.psi = conj(goal);

    Formula selected = variant == PhiStarVariant::verbatim ? restrict_to(kit.psi, GuardTarget{kit.selection})
                                                           : relativize(kit.psi, GuardTarget{kit.selection});
    std::vector<SoBinder> so;
    for (int k = 0; k < n; ++k) {
        so.push_back({Quantifier::forall, kit.universal_vars[k], 1});
        so.push_back({Quantifier::exists, kit.existential_vars[k], 1});
    }
    so.push_back({Quantifier::exists, kit.selection, 1});
    kit.phi_star =
        with_so_prefix(so, raw_or({to_nnf(negate(kit.psi_forall)), raw_and({kit.psi_exists, selected})}));
    kit.dual = dual_negate(kit.phi_star);
    kit.hammer = csp_hammer(kit.dual);
    return kit;
}

// Elements are the (literal, clause) occurrences, clause-major; duplicate
// literals inside one clause give one element.
struct Qbf3Encoding {
    FiniteStructure structure;
    std::vector<std::pair<Literal, int>> occurrences;  // element -> (literal, 0-based clause)
};

inline Qbf3Encoding encode_qbf3_occurrences(const Qbf3Instance& inst, int n) {
    validate(inst);
    if (!has_forall_exists_shape(inst.prefix(), n))
        throw PreconditionError("instance prefix " + prefix_string(inst.prefix()) + " is not (AE)^" + std::to_string(n));
    if (inst.clauses.empty()) throw PreconditionError("encoding needs at least one clause");
    Qbf3Encoding enc;
    for (std::size_t i = 0; i < inst.clauses.size(); ++i) {
        std::set<Literal> seen;
        for (auto l : inst.clauses[i])
            if (seen.insert(l).second) enc.occurrences.push_back({l, static_cast<int>(i)});
    }
    const Signature sig = phi_star_signature(n);
    const int m = static_cast<int>(inst.clauses.size());
    const int size = static_cast<int>(enc.occurrences.size());
    const auto block = inst.block_of();
    std::map<std::string, Relation> rels;
    for (int p = 0; p < size; ++p) {
        const auto [lp, cp] = enc.occurrences[p];
        if (cp == 0) rels["S"].insert({p});
        if (cp == m - 1) rels["T"].insert({p});
        const int blk = block[std::abs(lp)];
        const std::string mark = (blk % 2 == 0 ? "A" : "E") + std::to_string(blk / 2 + 1);
        rels[mark].insert({p});
        for (int q = 0; q < size; ++q) {
            const auto [lq, cq] = enc.occurrences[q];
            if (cq == cp + 1) rels["Succ"].insert({p, q});
            rels[lp == -lq ? "Rbar" : "R"].insert({p, q});
        }
    }
    enc.structure = FiniteStructure(sig, size, rels);
    return enc;
}

inline FiniteStructure encode_qbf3_instance(const Qbf3Instance& inst, int n) {
    return encode_qbf3_occurrences(inst, n).structure;
}

inline PipelineResult run_qbf3_pipeline(const Qbf3Instance& inst, const Qbf3ReductionKit& kit, const McOptions& opts = {}) {
    PipelineResult r;
    r.hammer_negates = true;
    FiniteStructure a = encode_qbf3_instance(inst, kit.n);
    r.direct = solve_qbf3(inst);
    r.via_formula = detail::run_leg("phi_star", a, kit.phi_star, opts, r.errors);
    r.via_hammer =
        detail::run_leg("dual_hammered", expand_with_neq(a, kit.hammer.neq_symbol), kit.dual_hammered(), opts, r.errors);
    return r;
}

// ---- kit files ---------------------------------------------------------------

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

inline std::string hammered_signature(const Signature& sig, const std::string& neq) {
    Signature s = sig;
    s.add(neq, 2);
    return serialize_signature(s) + "\n";
}

} // namespace detail

inline void write_kit(const std::filesystem::path& dir, const QcspReductionKit& kit) {
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "phi_B.sof", serialize_formula(kit.phi_B) + "\n");
    detail::write_file(dir / "hammered.sof", serialize_formula(kit.hammered()) + "\n");
    detail::write_file(dir / "signature.txt", serialize_signature(kit.signature) + "\n" +
                                                  detail::hammered_signature(kit.signature, kit.hammer.neq_symbol));
    detail::write_file(dir / "template.st", serialize_structure(kit.template_structure));
}

inline void write_kit(const std::filesystem::path& dir, const Qbf3ReductionKit& kit) {
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "phi_star.sof", serialize_formula(kit.phi_star) + "\n");
    detail::write_file(dir / "hammered.sof", serialize_formula(kit.dual_hammered()) + "\n");
    detail::write_file(dir / "signature.txt", serialize_signature(kit.signature) + "\n" +
                                                  detail::hammered_signature(kit.signature, kit.hammer.neq_symbol));
}

} // namespace pohammer
