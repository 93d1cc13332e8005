#pragma once

#include "pohammer/errors.hpp"
#include "pohammer/formula.hpp"
#include "pohammer/normalize.hpp"
#include "pohammer/text_io.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pohammer {

enum class SyntacticClass { positive, negative, exists_guarded, forall_restricted };

inline std::string class_name(SyntacticClass c) {
    switch (c) {
    case SyntacticClass::positive: return "positive";
    case SyntacticClass::negative: return "negative";
    case SyntacticClass::exists_guarded: return "exists-guarded";
    default: return "forall-restricted";
    }
}

inline SyntacticClass parse_class_name(const std::string& s) {
    if (s == "positive") return SyntacticClass::positive;
    if (s == "negative") return SyntacticClass::negative;
    if (s == "exists-guarded" || s == "exists_guarded") return SyntacticClass::exists_guarded;
    if (s == "forall-restricted" || s == "forall_restricted") return SyntacticClass::forall_restricted;
    throw PreconditionError("unknown class '" + s + "'");
}

inline NormalForm class_normal_form(SyntacticClass c) {
    return c == SyntacticClass::positive || c == SyntacticClass::exists_guarded ? NormalForm::cnf : NormalForm::dnf;
}

enum class VerdictStatus { accepted, rejected, indeterminate };

inline std::string status_name(VerdictStatus s) {
    switch (s) {
    case VerdictStatus::accepted: return "accepted";
    case VerdictStatus::rejected: return "rejected";
    default: return "indeterminate";
    }
}

// One node of the decomposition: an internal and/or split or a leaf that was
// checked in clause form.
struct TraceNode {
    std::string label;  // "and", "or" or "leaf"
    VerdictStatus status = VerdictStatus::accepted;
    std::string leaf;   // serialized leaf (prenex, before clause conversion)
    std::size_t clauses = 0;
    std::vector<TraceNode> children;
};

struct FailingClause {
    std::string clause;    // serialized clause
    std::string variable;  // offending FO variable; empty for polarity failures
    std::string literal;   // offending literal for polarity failures
};

struct ClassVerdict {
    SyntacticClass cls = SyntacticClass::positive;
    VerdictStatus status = VerdictStatus::accepted;
    TraceNode trace;
    std::optional<FailingClause> failing_clause;
    std::optional<std::string> blowup_note;

    [[nodiscard]] bool accepted() const { return status == VerdictStatus::accepted; }
};

namespace detail {

struct ClassifyContext {
    SyntacticClass cls;
    std::uint64_t size_cap;
    std::map<Var, Quantifier> so_polarity;
    std::optional<FailingClause> failing;
    std::optional<std::string> blowup;
};

inline void collect_so_polarity(const Formula& f, std::map<Var, Quantifier>& out) {
    if (f->is_so_quantifier()) out[f->var] = f->quantifier();
    for (const auto& c : f->children) collect_so_polarity(c, out);
}

inline std::string clause_text(const std::vector<Formula>& clause, NormalForm mode) {
    if (clause.empty()) return mode == NormalForm::cnf ? "(false)" : "(true)";
    return serialize_formula(mode == NormalForm::cnf ? disj(clause) : conj(clause));
}

inline const Formula& atom_of(const Formula& lit) { return lit->kind == Kind::negation ? lit->child() : lit; }

// Checks one clause; returns the failure if any.
inline std::optional<FailingClause> check_clause(const std::vector<Formula>& clause, const ClassifyContext& ctx,
                                                 const std::map<Var, Quantifier>& fo_polarity) {
    const auto mode = class_normal_form(ctx.cls);
    switch (ctx.cls) {
    case SyntacticClass::positive:
    case SyntacticClass::negative: {
        const bool want_negated = ctx.cls == SyntacticClass::positive;
        for (const auto& lit : clause) {
            if (lit->kind == Kind::truth || lit->kind == Kind::falsity) continue;
            const bool negated = lit->kind == Kind::negation;
            if (negated != want_negated) continue;
            const auto& a = atom_of(lit);
            if (a->kind == Kind::rel_atom) return FailingClause{clause_text(clause, mode), "", serialize_formula(lit)};
        }
        return std::nullopt;
    }
    default: {
        // exists_guarded: a universal x needs a disjunct not S(..x..) with S existential.
        // forall_restricted: an existential x needs a conjunct S(..x..) with S universal.
        const bool guarded = ctx.cls == SyntacticClass::exists_guarded;
        const Quantifier var_q = guarded ? Quantifier::forall : Quantifier::exists;
        const Quantifier so_q = guarded ? Quantifier::exists : Quantifier::forall;
        std::vector<Var> seen;
        for (const auto& lit : clause)
            for (const auto& x : atom_of(lit)->args) {
                if (std::find(seen.begin(), seen.end(), x) != seen.end()) continue;
                seen.push_back(x);
                auto it = fo_polarity.find(x);
                if (it == fo_polarity.end() || it->second != var_q) continue;
                bool ok = false;
                for (const auto& g : clause) {
                    if ((g->kind == Kind::negation) != guarded) continue;
                    const auto& a = atom_of(g);
                    if (a->kind != Kind::so_atom) continue;
                    auto p = ctx.so_polarity.find(a->var);
                    if (p == ctx.so_polarity.end() || p->second != so_q) continue;
                    if (std::find(a->args.begin(), a->args.end(), x) != a->args.end()) {
                        ok = true;
                        break;
                    }
                }
                if (!ok) return FailingClause{clause_text(clause, mode), x.name, ""};
            }
        return std::nullopt;
    }
    }
}

inline TraceNode classify_node(const Formula& f, ClassifyContext& ctx) {
    TraceNode node;
    if (f->kind == Kind::conjunction || f->kind == Kind::disjunction) {
        node.label = f->kind == Kind::conjunction ? "and" : "or";
        bool any_rejected = false, any_blowup = false;
        for (const auto& c : f->children) {
            node.children.push_back(classify_node(c, ctx));
            any_rejected |= node.children.back().status == VerdictStatus::rejected;
            any_blowup |= node.children.back().status == VerdictStatus::indeterminate;
        }
        node.status = any_rejected ? VerdictStatus::rejected
                                   : (any_blowup ? VerdictStatus::indeterminate : VerdictStatus::accepted);
        return node;
    }
    node.label = "leaf";
    auto prenex = to_prenex(f);
    auto so = split_so_prefix(prenex);
    auto fo = split_fo_prefix(so.body);
    node.leaf = serialize_formula(prenex);
    std::map<Var, Quantifier> fo_polarity;
    for (const auto& b : fo.prefix) fo_polarity[b.var] = b.quantifier;
    ClauseList clauses;
    try {
        clauses = to_clauses(fo.body, class_normal_form(ctx.cls), ctx.size_cap);
    } catch (const BlowupError& e) {
        node.status = VerdictStatus::indeterminate;
        if (!ctx.blowup) ctx.blowup = e.what();
        return node;
    }
    node.clauses = clauses.size();
    for (const auto& clause : clauses) {
        if (auto fail = check_clause(clause, ctx, fo_polarity)) {
            node.status = VerdictStatus::rejected;
            if (!ctx.failing) ctx.failing = fail;
            return node;
        }
    }
    node.status = VerdictStatus::accepted;
    return node;
}

} // namespace detail

// Syntactic recognizer.  The SO prefix is stripped, the body is split
// maximally at and/or nodes and every leaf is put in prenex form and checked
// clause by clause (CNF for positive / exists-guarded, DNF otherwise).
inline ClassVerdict classify(const Formula& f, SyntacticClass cls, std::uint64_t size_cap = default_size_cap) {
    detail::ClassifyContext ctx{cls, size_cap, {}, {}, {}};
    Formula g = to_nnf(alpha_normalize(f));
    detail::collect_so_polarity(g, ctx.so_polarity);
    auto so = split_so_prefix(g);
    ClassVerdict v;
    v.cls = cls;
    v.trace = detail::classify_node(so.body, ctx);
    v.status = v.trace.status;
    if (v.status == VerdictStatus::rejected) v.failing_clause = ctx.failing;
    if (v.status == VerdictStatus::indeterminate) v.blowup_note = ctx.blowup;
    return v;
}

inline std::string render_trace(const TraceNode& node, int depth = 0) {
    std::string out(2 * depth, ' ');
    out += node.label + " [" + status_name(node.status) + "]";
    if (node.label == "leaf") out += " " + std::to_string(node.clauses) + " clause(s): " + node.leaf;
    out += "\n";
    for (const auto& c : node.children) out += render_trace(c, depth + 1);
    return out;
}

// Compares the verdicts for f with those for its dual negation.
inline bool class_duality_check(const Formula& f, std::uint64_t size_cap = default_size_cap) {
    Formula d = dual_negate(f);
    return classify(f, SyntacticClass::exists_guarded, size_cap).status ==
               classify(d, SyntacticClass::forall_restricted, size_cap).status &&
           classify(f, SyntacticClass::positive, size_cap).status ==
               classify(d, SyntacticClass::negative, size_cap).status;
}

} // namespace pohammer
