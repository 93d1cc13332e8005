#pragma once

#include "pohammer/classes.hpp"
#include "pohammer/errors.hpp"
#include "pohammer/formula.hpp"
#include "pohammer/normalize.hpp"

#include <functional>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace pohammer {

namespace detail {

struct CnfParts {
    std::vector<SoBinder> so;
    std::vector<FoBinder> fo;
    ClauseList clauses;
};

inline CnfParts cnf_parts(const Formula& f, const char* op) {
    if (!is_normalized(f, NormalForm::cnf))
        throw PreconditionError(std::string(op) + " expects a CNF-normalized prenex sentence");
    auto so = split_so_prefix(f);
    auto fo = split_fo_prefix(so.body);
    return {so.prefix, fo.prefix, to_clauses(fo.body, NormalForm::cnf)};
}

} // namespace detail

// Existential guard set S: A satisfies the result iff some nonempty induced
// substructure of A satisfies f.
inline Formula sup_transform(const Formula& f) {
    auto parts = detail::cnf_parts(alpha_normalize(f), "sup_transform");
    Var s = fresh_var("S");
    Var z = fresh_var("z");
    std::vector<Var> universals, existentials;
    for (const auto& b : parts.fo) (b.quantifier == Quantifier::forall ? universals : existentials).push_back(b.var);
    std::vector<Formula> not_in_s;
    for (const auto& x : universals) not_in_s.push_back(negate(so_atom(s, {x})));

    std::vector<Formula> clauses;
    clauses.push_back(so_atom(s, {z}));
    for (const auto& y : existentials) {
        auto c = not_in_s;
        c.push_back(so_atom(s, {y}));
        clauses.push_back(disj(c));
    }
    for (auto c : parts.clauses) {
        for (const auto& g : not_in_s) detail::add_literal(c, g);
        clauses.push_back(disj(c));
    }
    std::vector<SoBinder> so{{Quantifier::exists, s, 1}};
    so.insert(so.end(), parts.so.begin(), parts.so.end());
    std::vector<FoBinder> fo{{Quantifier::exists, z}};
    fo.insert(fo.end(), parts.fo.begin(), parts.fo.end());
    return with_so_prefix(so, with_fo_prefix(fo, conj(clauses)));
}

// A satisfies the result iff some same-domain structure whose relations are
// subsets of A's satisfies f.  The inclusion constraints come first in the
// conjunction so that evaluation rejects bad guesses early.
inline Formula shom_transform(const Formula& f) {
    Formula g = alpha_normalize(f);
    detail::cnf_parts(g, "shom_transform");
    std::vector<Formula> constraints;
    std::vector<SoBinder> binders;
    Formula replaced = g;
    for (const auto& [symbol, arity] : relation_symbols(g)) {
        Var rp = fresh_var(symbol + "_p");
        binders.push_back({Quantifier::exists, rp, arity});
        std::vector<Var> xs;
        for (int i = 0; i < arity; ++i) xs.push_back(fresh_var("x" + std::to_string(i + 1)));
        constraints.push_back(forall(xs, raw_or({negate(so_atom(rp, xs)), rel(symbol, xs)})));
        replaced = relation_to_so(replaced, symbol, rp);
    }
    constraints.push_back(replaced);
    return with_so_prefix(binders, conj(constraints));
}

// The set a formula is relativized to: a unary relation symbol or a unary SO variable.
using GuardTarget = std::variant<std::string, Var>;

namespace detail {

inline Formula guard_atom(const GuardTarget& target, const Var& x) {
    if (const auto* name = std::get_if<std::string>(&target)) return rel(*name, {x});
    return so_atom(std::get<Var>(target), {x});
}

inline Formula relativize_nnf(const Formula& f, const GuardTarget& target, std::map<Var, Quantifier>& binders) {
    if (is_literal(f)) {
        if (f->kind == Kind::truth || f->kind == Kind::falsity) return f;
        std::vector<Var> universals, existentials, seen;
        for (const auto& x : (f->kind == Kind::negation ? f->child() : f)->args) {
            if (std::find(seen.begin(), seen.end(), x) != seen.end()) continue;
            seen.push_back(x);
            auto it = binders.find(x);
            if (it == binders.end())
                throw PreconditionError("variable " + x.name + " has no FO binder; cannot relativize");
            (it->second == Quantifier::forall ? universals : existentials).push_back(x);
        }
        std::vector<Formula> guarded;
        for (const auto& x : existentials) guarded.push_back(guard_atom(target, x));
        guarded.push_back(f);
        std::vector<Formula> out;
        for (const auto& x : universals) out.push_back(negate(guard_atom(target, x)));
        out.push_back(guarded.size() == 1 ? f : raw_and(std::move(guarded)));
        return out.size() == 1 ? out.front() : raw_or(std::move(out));
    }
    if (f->is_fo_quantifier()) {
        binders[f->var] = f->quantifier();
        Formula body = relativize_nnf(f->child(), target, binders);
        binders.erase(f->var);
        return with_children(f, {body});
    }
    std::vector<Formula> cs;
    cs.reserve(f->children.size());
    for (const auto& c : f->children) cs.push_back(relativize_nnf(c, target, binders));
    return with_children(f, std::move(cs));
}

} // namespace detail

// Every literal L(x1..xn) of the NNF becomes
//   (or not U(xi) for universal xi) or ((and U(xi) for existential xi) and L).
inline Formula relativize(const Formula& f, const GuardTarget& target) {
    std::map<Var, Quantifier> binders;
    return detail::relativize_nnf(to_nnf(alpha_normalize(f)), target, binders);
}

// (forall z not U(z)) or relativize(f, U)
inline Formula restrict_to(const Formula& f, const GuardTarget& target) {
    Var z = fresh_var("z");
    return raw_or({forall(z, negate(detail::guard_atom(target, z))), relativize(f, target)});
}

inline Formula restrict_to(const Formula& f, const std::string& u_symbol) {
    if (relation_symbols(f).contains(u_symbol)) throw SignatureError("symbol " + u_symbol + " already occurs in the formula");
    return restrict_to(f, GuardTarget{u_symbol});
}

inline Formula restrict_to(const Formula& f, const char* u_symbol) { return restrict_to(f, std::string(u_symbol)); }

inline Formula psi_not_edge(const std::string& n) {
    Var x = fresh_var("x"), y = fresh_var("y");
    return exists(std::vector<Var>{x, y}, raw_and({negate(eq(x, y)), negate(rel(n, {x, y}))}));
}

inline Formula psi_not_loop(const std::string& n) {
    Var x = fresh_var("x");
    return forall(x, negate(rel(n, {x, x})));
}

struct HammerResult {
    Formula sentence;
    std::string neq_symbol;  // the fresh binary symbol, interpreted as != by expand_with_neq
    Var u;
};

// Fresh symbol name: base, base1, base2, ... avoiding `taken`.
inline std::string fresh_symbol(const std::string& base, const std::set<std::string>& taken) {
    if (!taken.contains(base)) return base;
    for (int k = 1;; ++k)
        if (!taken.contains(base + std::to_string(k))) return base + std::to_string(k);
}

// Q1 S1 .. Qk Sk forall U Qk+1 Sk+1 .. Qn Sn (edge or (loop and psi))|U, with
// U inserted after the first run of universal SO binders (last if none).
inline HammerResult csp_hammer(const Formula& f, bool force = false, std::uint64_t size_cap = default_size_cap,
                               const std::set<std::string>& reserved = {}) {
    Formula g = alpha_normalize(f);
    auto so = split_so_prefix(g);
    if (has_so_quantifier(so.body))
        throw PreconditionError("csp_hammer expects an SO prefix followed by a first-order body");
    if (!force) {
        for (auto cls : {SyntacticClass::forall_restricted, SyntacticClass::negative}) {
            auto v = classify(g, cls, size_cap);
            if (!v.accepted())
                throw PreconditionError("csp_hammer: sentence is not recognized as " + class_name(cls) + " (" +
                                        status_name(v.status) + ")");
        }
    }
    std::set<std::string> taken = reserved;
    for (const auto& [name, arity] : relation_symbols(g)) taken.insert(name);
    const std::string n = fresh_symbol("N", taken);
    Var u = fresh_var("U");
    Formula psi = raw_or({psi_not_edge(n), raw_and({psi_not_loop(n), so.body})});
    Formula body = restrict_to(psi, GuardTarget{u});
    std::size_t k = 0;
    while (k < so.prefix.size() && so.prefix[k].quantifier != Quantifier::forall) ++k;
    while (k < so.prefix.size() && so.prefix[k].quantifier == Quantifier::forall) ++k;
    auto prefix = so.prefix;
    prefix.insert(prefix.begin() + static_cast<std::ptrdiff_t>(k), SoBinder{Quantifier::forall, u, 1});
    return {with_so_prefix(prefix, body), n, u};
}

} // namespace pohammer
