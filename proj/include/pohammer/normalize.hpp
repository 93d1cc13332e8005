#pragma once

#include "pohammer/errors.hpp"
#include "pohammer/formula.hpp"

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace pohammer {

inline constexpr std::uint64_t default_size_cap = 100000;

enum class NormalForm { cnf, dnf };

inline Formula to_nnf(const Formula& f);

namespace detail {

inline Formula nnf_negated(const Formula& f) {
    switch (f->kind) {
    case Kind::truth: return falsity();
    case Kind::falsity: return truth();
    case Kind::rel_atom:
    case Kind::so_atom:
    case Kind::eq: return negate(f);
    case Kind::negation: return to_nnf(f->child());
    case Kind::conjunction:
    case Kind::disjunction: {
        std::vector<Formula> cs;
        cs.reserve(f->children.size());
        for (const auto& c : f->children) cs.push_back(nnf_negated(c));
        Node n = *f;
        n.kind = f->kind == Kind::conjunction ? Kind::disjunction : Kind::conjunction;
        n.children = std::move(cs);
        return make(std::move(n));
    }
    default: {
        Node n = *f;
        switch (f->kind) {
        case Kind::exists_fo: n.kind = Kind::forall_fo; break;
        case Kind::forall_fo: n.kind = Kind::exists_fo; break;
        case Kind::exists_so: n.kind = Kind::forall_so; break;
        default: n.kind = Kind::exists_so; break;
        }
        n.children = {nnf_negated(f->child())};
        return make(std::move(n));
    }
    }
}

} // namespace detail

// Negations end up directly on atoms; quantifiers flip under pushed negations.
inline Formula to_nnf(const Formula& f) {
    switch (f->kind) {
    case Kind::negation: return detail::nnf_negated(f->child());
    case Kind::truth:
    case Kind::falsity:
    case Kind::rel_atom:
    case Kind::so_atom:
    case Kind::eq: return f;
    default: {
        std::vector<Formula> cs;
        cs.reserve(f->children.size());
        for (const auto& c : f->children) cs.push_back(to_nnf(c));
        return with_children(f, std::move(cs));
    }
    }
}

inline bool is_literal(const Formula& f) {
    if (f->is_atom() || f->kind == Kind::truth || f->kind == Kind::falsity) return true;
    return f->kind == Kind::negation && f->child()->is_atom();
}

inline bool is_nnf(const Formula& f) {
    if (f->kind == Kind::negation) return f->child()->is_atom();
    for (const auto& c : f->children)
        if (!is_nnf(c)) return false;
    return true;
}

inline bool has_unique_binders(const Formula& f) {
    std::set<Var> seen;
    bool ok = true;
    std::function<void(const Formula&)> walk = [&](const Formula& g) {
        if (g->is_quantifier() && !seen.insert(g->var).second) ok = false;
        for (const auto& c : g->children) walk(c);
    };
    walk(f);
    return ok;
}

struct PrenexResult {
    Formula formula;
    // An SO quantifier that sat below an FO quantifier was moved in front of it.
    bool so_hoisted_past_fo = false;
};

namespace detail {

struct Binder {
    bool so = false;
    Quantifier quantifier = Quantifier::exists;
    Var var;
    int arity = 0;
};

inline Formula pull_quantifiers(const Formula& f, std::vector<Binder>& out) {
    if (f->is_quantifier()) {
        out.push_back({f->is_so_quantifier(), f->quantifier(), f->var, f->arity});
        return pull_quantifiers(f->child(), out);
    }
    if (f->kind == Kind::conjunction || f->kind == Kind::disjunction) {
        std::vector<Formula> cs;
        cs.reserve(f->children.size());
        for (const auto& c : f->children) cs.push_back(pull_quantifiers(c, out));
        return with_children(f, std::move(cs));
    }
    return f;
}

} // namespace detail

// SO prefix, then FO prefix, then a quantifier-free matrix.  Quantifiers are
// pulled out in left-to-right tree order; SO binders go in front of all FO
// binders keeping their relative order.
inline PrenexResult to_prenex_report(const Formula& input) {
    Formula f = is_nnf(input) ? input : to_nnf(input);
    if (!has_unique_binders(f)) f = alpha_normalize(f);
    std::vector<detail::Binder> binders;
    Formula matrix = detail::pull_quantifiers(f, binders);
    PrenexResult r;
    bool seen_fo = false;
    std::vector<SoBinder> so;
    std::vector<FoBinder> fo;
    for (const auto& b : binders) {
        if (b.so) {
            if (seen_fo) r.so_hoisted_past_fo = true;
            so.push_back({b.quantifier, b.var, b.arity});
        } else {
            seen_fo = true;
            fo.push_back({b.quantifier, b.var});
        }
    }
    r.formula = with_so_prefix(so, with_fo_prefix(fo, matrix));
    return r;
}

inline Formula to_prenex(const Formula& f) { return to_prenex_report(f).formula; }

inline bool is_prenex(const Formula& f) { return is_quantifier_free(split_fo_prefix(split_so_prefix(f).body).body); }

// ---- clause forms ----------------------------------------------------------

// A clause is a list of literals: a disjunction in CNF, a conjunction in DNF.
using ClauseList = std::vector<std::vector<Formula>>;

inline bool same_literal(const Formula& a, const Formula& b) {
    if (a->kind != b->kind) return false;
    if (a->kind == Kind::negation) return same_literal(a->child(), b->child());
    return a->symbol == b->symbol && a->var == b->var && a->args == b->args;
}

namespace detail {

inline void add_literal(std::vector<Formula>& clause, const Formula& lit) {
    for (const auto& l : clause)
        if (same_literal(l, lit)) return;
    clause.push_back(lit);
}

// CNF: conjunction of disjunctions; DNF swaps the roles.
inline ClauseList clause_form(const Formula& f, NormalForm mode, std::uint64_t cap) {
    const Kind outer = mode == NormalForm::cnf ? Kind::conjunction : Kind::disjunction;
    const Kind inner = mode == NormalForm::cnf ? Kind::disjunction : Kind::conjunction;
    const Kind unit = mode == NormalForm::cnf ? Kind::truth : Kind::falsity;  // identity of the outer connective
    if (f->kind == unit) return {};
    if (f->kind == Kind::truth || f->kind == Kind::falsity) return {{}};
    if (f->kind == outer) {
        ClauseList out;
        for (const auto& c : f->children) {
            auto part = clause_form(c, mode, cap);
            if (out.size() + part.size() > cap) throw BlowupError(out.size() + part.size(), cap);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }
    if (f->kind == inner) {
        ClauseList acc{{}};
        for (const auto& c : f->children) {
            auto part = clause_form(c, mode, cap);
            std::uint64_t attempted = static_cast<std::uint64_t>(acc.size()) * part.size();
            if (attempted > cap) throw BlowupError(attempted, cap);
            ClauseList next;
            next.reserve(attempted);
            for (const auto& a : acc)
                for (const auto& p : part) {
                    auto merged = a;
                    for (const auto& l : p) add_literal(merged, l);
                    next.push_back(std::move(merged));
                }
            acc = std::move(next);
        }
        return acc;
    }
    if (!is_literal(f)) throw PreconditionError("quantifier inside the matrix of a clause-form conversion");
    return {{f}};
}

} // namespace detail

// Clause list of a quantifier-free NNF formula.
inline ClauseList to_clauses(const Formula& qf, NormalForm mode, std::uint64_t size_cap = default_size_cap) {
    return detail::clause_form(is_nnf(qf) ? qf : to_nnf(qf), mode, size_cap);
}

inline Formula from_clauses(const ClauseList& clauses, NormalForm mode) {
    std::vector<Formula> parts;
    parts.reserve(clauses.size());
    for (const auto& c : clauses) parts.push_back(mode == NormalForm::cnf ? disj(c) : conj(c));
    return mode == NormalForm::cnf ? conj(parts) : disj(parts);
}

// Rewrites the matrix of a prenex sentence into CNF or DNF by distribution.
inline Formula qf_normalize(const Formula& f, NormalForm mode, std::uint64_t size_cap = default_size_cap) {
    auto so = split_so_prefix(f);
    auto fo = split_fo_prefix(so.body);
    if (!is_quantifier_free(fo.body)) throw PreconditionError("qf_normalize expects a prenex sentence");
    Formula matrix = from_clauses(to_clauses(fo.body, mode, size_cap), mode);
    return with_so_prefix(so.prefix, with_fo_prefix(fo.prefix, matrix));
}

inline bool is_clause_form(const Formula& matrix, NormalForm mode) {
    const Kind outer = mode == NormalForm::cnf ? Kind::conjunction : Kind::disjunction;
    const Kind inner = mode == NormalForm::cnf ? Kind::disjunction : Kind::conjunction;
    auto is_clause = [&](const Formula& c) {
        if (is_literal(c)) return true;
        if (c->kind != inner) return false;
        for (const auto& l : c->children)
            if (!is_literal(l)) return false;
        return true;
    };
    if (matrix->kind == outer) {
        for (const auto& c : matrix->children)
            if (!is_clause(c)) return false;
        return true;
    }
    return is_clause(matrix);
}

// Prenex with a CNF (or DNF) matrix.
inline bool is_normalized(const Formula& f, NormalForm mode) {
    auto fo = split_fo_prefix(split_so_prefix(f).body);
    return is_quantifier_free(fo.body) && is_clause_form(fo.body, mode);
}

// Q1 S1 ... Qm Sm . phi  |->  dual(Q1) S1 ... dual(Qm) Sm . nnf(not phi)
inline Formula dual_negate(const Formula& f) {
    auto so = split_so_prefix(f);
    if (has_so_quantifier(so.body))
        throw PreconditionError("dual_negate expects an SO prefix followed by a first-order body");
    for (auto& b : so.prefix) b.quantifier = dual(b.quantifier);
    return with_so_prefix(so.prefix, to_nnf(negate(so.body)));
}

} // namespace pohammer
