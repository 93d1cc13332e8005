#pragma once

#include "pohammer/errors.hpp"
#include "pohammer/structure.hpp"

#include <algorithm>
#include <atomic>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace pohammer {

enum class Quantifier { exists, forall };

inline Quantifier dual(Quantifier q) { return q == Quantifier::exists ? Quantifier::forall : Quantifier::exists; }

// A variable is identified by its id; the name is only used for printing.
struct Var {
    std::uint64_t id = 0;
    std::string name;

    friend bool operator==(const Var& a, const Var& b) { return a.id == b.id; }
    friend std::strong_ordering operator<=>(const Var& a, const Var& b) { return a.id <=> b.id; }
};

inline Var fresh_var(std::string name) {
    static std::atomic<std::uint64_t> counter{1};
    return {counter.fetch_add(1, std::memory_order_relaxed), std::move(name)};
}

enum class Kind {
    truth,
    falsity,
    rel_atom,
    so_atom,
    eq,
    negation,
    conjunction,
    disjunction,
    exists_fo,
    forall_fo,
    exists_so,
    forall_so,
};

struct Node;
using Formula = std::shared_ptr<const Node>;

struct Node {
    Kind kind = Kind::truth;
    std::string symbol;           // rel_atom
    Var var;                      // so_atom variable, or the bound variable of a quantifier
    int arity = 0;                // SO binders
    std::vector<Var> args;        // atoms and eq
    std::vector<Formula> children;

    [[nodiscard]] const Formula& child() const { return children.front(); }
    [[nodiscard]] bool is_atom() const {
        return kind == Kind::rel_atom || kind == Kind::so_atom || kind == Kind::eq;
    }
    [[nodiscard]] bool is_fo_quantifier() const { return kind == Kind::exists_fo || kind == Kind::forall_fo; }
    [[nodiscard]] bool is_so_quantifier() const { return kind == Kind::exists_so || kind == Kind::forall_so; }
    [[nodiscard]] bool is_quantifier() const { return is_fo_quantifier() || is_so_quantifier(); }
    [[nodiscard]] Quantifier quantifier() const {
        return kind == Kind::exists_fo || kind == Kind::exists_so ? Quantifier::exists : Quantifier::forall;
    }
};

// ---- constructors ----------------------------------------------------------

namespace detail {
inline Formula make(Node n) { return std::make_shared<const Node>(std::move(n)); }
} // namespace detail

inline Formula truth() {
    static const Formula t = detail::make(Node{.kind = Kind::truth});
    return t;
}

inline Formula falsity() {
    static const Formula f = detail::make(Node{.kind = Kind::falsity});
    return f;
}

inline Formula rel(std::string symbol, std::vector<Var> args) {
    return detail::make(Node{.kind = Kind::rel_atom, .symbol = std::move(symbol), .args = std::move(args)});
}

inline Formula so_atom(Var s, std::vector<Var> args) {
    return detail::make(Node{.kind = Kind::so_atom, .var = std::move(s), .args = std::move(args)});
}

inline Formula eq(Var x, Var y) { return detail::make(Node{.kind = Kind::eq, .args = {std::move(x), std::move(y)}}); }

inline Formula negate(Formula f) { return detail::make(Node{.kind = Kind::negation, .children = {std::move(f)}}); }

// And/Or nodes exactly as given; at least two children.
inline Formula raw_and(std::vector<Formula> children) {
    if (children.size() < 2) throw PreconditionError("conjunction needs at least two children");
    return detail::make(Node{.kind = Kind::conjunction, .children = std::move(children)});
}

inline Formula raw_or(std::vector<Formula> children) {
    if (children.size() < 2) throw PreconditionError("disjunction needs at least two children");
    return detail::make(Node{.kind = Kind::disjunction, .children = std::move(children)});
}

// Flattening conjunction: nested conjunctions are merged, True is dropped,
// False absorbs, the empty conjunction is True and a singleton is its child.
inline Formula conj(const std::vector<Formula>& parts) {
    std::vector<Formula> out;
    for (const auto& p : parts) {
        if (p->kind == Kind::truth) continue;
        if (p->kind == Kind::falsity) return falsity();
        if (p->kind == Kind::conjunction)
            out.insert(out.end(), p->children.begin(), p->children.end());
        else
            out.push_back(p);
    }
    if (out.empty()) return truth();
    if (out.size() == 1) return out.front();
    return raw_and(std::move(out));
}

inline Formula disj(const std::vector<Formula>& parts) {
    std::vector<Formula> out;
    for (const auto& p : parts) {
        if (p->kind == Kind::falsity) continue;
        if (p->kind == Kind::truth) return truth();
        if (p->kind == Kind::disjunction)
            out.insert(out.end(), p->children.begin(), p->children.end());
        else
            out.push_back(p);
    }
    if (out.empty()) return falsity();
    if (out.size() == 1) return out.front();
    return raw_or(std::move(out));
}

inline Formula quantify_fo(Quantifier q, Var x, Formula body) {
    return detail::make(Node{.kind = q == Quantifier::exists ? Kind::exists_fo : Kind::forall_fo,
                             .var = std::move(x),
                             .children = {std::move(body)}});
}

inline Formula quantify_so(Quantifier q, Var s, int arity, Formula body) {
    if (arity < 1) throw PreconditionError("SO variable " + s.name + " must have arity >= 1");
    return detail::make(Node{.kind = q == Quantifier::exists ? Kind::exists_so : Kind::forall_so,
                             .var = std::move(s),
                             .arity = arity,
                             .children = {std::move(body)}});
}

inline Formula exists(Var x, Formula body) { return quantify_fo(Quantifier::exists, std::move(x), std::move(body)); }
inline Formula forall(Var x, Formula body) { return quantify_fo(Quantifier::forall, std::move(x), std::move(body)); }

// Quantifies the variables in order, the first one outermost.
inline Formula exists(const std::vector<Var>& xs, Formula body) {
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) body = exists(*it, std::move(body));
    return body;
}

inline Formula forall(const std::vector<Var>& xs, Formula body) {
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) body = forall(*it, std::move(body));
    return body;
}

inline Formula exists2(Var s, int arity, Formula body) {
    return quantify_so(Quantifier::exists, std::move(s), arity, std::move(body));
}
inline Formula forall2(Var s, int arity, Formula body) {
    return quantify_so(Quantifier::forall, std::move(s), arity, std::move(body));
}

// Returns f with its children replaced.
inline Formula with_children(const Formula& f, std::vector<Formula> children) {
    Node n = *f;
    n.children = std::move(children);
    return detail::make(std::move(n));
}

// ---- prefixes --------------------------------------------------------------

struct SoBinder {
    Quantifier quantifier = Quantifier::exists;
    Var var;
    int arity = 1;
};

struct FoBinder {
    Quantifier quantifier = Quantifier::exists;
    Var var;
};

struct SoSplit {
    std::vector<SoBinder> prefix;
    Formula body;
};

struct FoSplit {
    std::vector<FoBinder> prefix;
    Formula body;
};

inline SoSplit split_so_prefix(Formula f) {
    SoSplit out;
    while (f->is_so_quantifier()) {
        out.prefix.push_back({f->quantifier(), f->var, f->arity});
        f = f->child();
    }
    out.body = std::move(f);
    return out;
}

inline FoSplit split_fo_prefix(Formula f) {
    FoSplit out;
    while (f->is_fo_quantifier()) {
        out.prefix.push_back({f->quantifier(), f->var});
        f = f->child();
    }
    out.body = std::move(f);
    return out;
}

inline Formula with_so_prefix(const std::vector<SoBinder>& prefix, Formula body) {
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
        body = quantify_so(it->quantifier, it->var, it->arity, std::move(body));
    return body;
}

inline Formula with_fo_prefix(const std::vector<FoBinder>& prefix, Formula body) {
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
        body = quantify_fo(it->quantifier, it->var, std::move(body));
    return body;
}

// ---- traversal -------------------------------------------------------------

inline bool is_quantifier_free(const Formula& f) {
    if (f->is_quantifier()) return false;
    return std::all_of(f->children.begin(), f->children.end(), [](const Formula& c) { return is_quantifier_free(c); });
}

inline bool has_so_quantifier(const Formula& f) {
    if (f->is_so_quantifier()) return true;
    return std::any_of(f->children.begin(), f->children.end(), [](const Formula& c) { return has_so_quantifier(c); });
}

inline bool is_first_order(const Formula& f) { return !has_so_quantifier(f); }

inline std::size_t formula_size(const Formula& f) {
    std::size_t n = 1;
    for (const auto& c : f->children) n += formula_size(c);
    return n;
}

namespace detail {
inline void free_vars(const Formula& f, std::set<Var>& bound, std::set<Var>& fo, std::map<Var, int>& so) {
    switch (f->kind) {
    case Kind::rel_atom:
    case Kind::eq:
        for (const auto& a : f->args)
            if (!bound.contains(a)) fo.insert(a);
        return;
    case Kind::so_atom:
        for (const auto& a : f->args)
            if (!bound.contains(a)) fo.insert(a);
        if (!bound.contains(f->var)) so.emplace(f->var, static_cast<int>(f->args.size()));
        return;
    default:
        break;
    }
    bool binds = f->is_quantifier() && !bound.contains(f->var);
    if (binds) bound.insert(f->var);
    for (const auto& c : f->children) free_vars(c, bound, fo, so);
    if (binds) bound.erase(f->var);
}
} // namespace detail

inline std::set<Var> free_fo_vars(const Formula& f) {
    std::set<Var> bound, fo;
    std::map<Var, int> so;
    detail::free_vars(f, bound, fo, so);
    return fo;
}

// Free SO variables with the arity of their first occurrence.
inline std::map<Var, int> free_so_vars(const Formula& f) {
    std::set<Var> bound, fo;
    std::map<Var, int> so;
    detail::free_vars(f, bound, fo, so);
    return so;
}

inline bool is_sentence(const Formula& f) { return free_fo_vars(f).empty() && free_so_vars(f).empty(); }

inline bool mentions(const Formula& f, const Var& v) {
    if (f->var == v && (f->kind == Kind::so_atom || f->is_quantifier())) return true;
    if (std::find(f->args.begin(), f->args.end(), v) != f->args.end()) return true;
    return std::any_of(f->children.begin(), f->children.end(), [&](const Formula& c) { return mentions(c, v); });
}

// Relation symbols with the number of arguments of their occurrences.
inline std::map<std::string, int> relation_symbols(const Formula& f) {
    std::map<std::string, int> out;
    std::function<void(const Formula&)> walk = [&](const Formula& g) {
        if (g->kind == Kind::rel_atom) {
            auto [it, inserted] = out.emplace(g->symbol, static_cast<int>(g->args.size()));
            if (!inserted && it->second != static_cast<int>(g->args.size()))
                throw SignatureError("symbol " + g->symbol + " used with different arities");
        }
        for (const auto& c : g->children) walk(c);
    };
    walk(f);
    return out;
}

// Checks that f is a sentence over sig with consistent arities.
inline void check_sentence(const Formula& f, const Signature& sig) {
    for (const auto& [name, arity] : relation_symbols(f)) {
        if (!sig.contains(name)) throw SignatureError("unknown relation symbol " + name);
        if (sig.arity_of(name) != arity)
            throw SignatureError("symbol " + name + " has arity " + std::to_string(sig.arity_of(name)) + ", used with " +
                                 std::to_string(arity) + " arguments");
    }
    std::map<Var, int> so_arity;
    std::function<void(const Formula&)> walk = [&](const Formula& g) {
        if (g->is_so_quantifier()) so_arity[g->var] = g->arity;
        if (g->kind == Kind::so_atom) {
            auto it = so_arity.find(g->var);
            if (it != so_arity.end() && it->second != static_cast<int>(g->args.size()))
                throw SignatureError("SO variable " + g->var.name + " has arity " + std::to_string(it->second) +
                                     ", used with " + std::to_string(g->args.size()) + " arguments");
        }
        for (const auto& c : g->children) walk(c);
    };
    walk(f);
    auto fo = free_fo_vars(f);
    if (!fo.empty()) throw PreconditionError("free FO variable " + fo.begin()->name);
    auto so = free_so_vars(f);
    if (!so.empty()) throw PreconditionError("free SO variable " + so.begin()->first.name);
}

// ---- renaming --------------------------------------------------------------

// Gives every binder a fresh id (names are kept); free variables are untouched.
inline Formula alpha_normalize(const Formula& f) {
    std::map<Var, Var> renaming;
    std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
        auto rename = [&](const Var& v) {
            auto it = renaming.find(v);
            return it == renaming.end() ? v : it->second;
        };
        switch (g->kind) {
        case Kind::truth:
        case Kind::falsity:
            return g;
        case Kind::rel_atom:
        case Kind::so_atom:
        case Kind::eq: {
            Node n = *g;
            for (auto& a : n.args) a = rename(a);
            if (g->kind == Kind::so_atom) n.var = rename(n.var);
            return detail::make(std::move(n));
        }
        case Kind::negation:
        case Kind::conjunction:
        case Kind::disjunction: {
            std::vector<Formula> cs;
            cs.reserve(g->children.size());
            for (const auto& c : g->children) cs.push_back(go(c));
            return with_children(g, std::move(cs));
        }
        default: {
            Var fresh = fresh_var(g->var.name);
            std::optional<Var> saved;
            if (auto it = renaming.find(g->var); it != renaming.end()) saved = it->second;
            renaming[g->var] = fresh;
            Formula body = go(g->child());
            if (saved)
                renaming[g->var] = *saved;
            else
                renaming.erase(g->var);
            Node n = *g;
            n.var = fresh;
            n.children = {std::move(body)};
            return detail::make(std::move(n));
        }
        }
    };
    return go(f);
}

// Equality up to renaming of bound variables; free variables must coincide.
inline bool alpha_equivalent(const Formula& a, const Formula& b) {
    std::map<Var, Var> ab, ba;
    std::function<bool(const Formula&, const Formula&)> go = [&](const Formula& x, const Formula& y) -> bool {
        if (x->kind != y->kind) return false;
        auto same = [&](const Var& u, const Var& v) {
            auto i = ab.find(u);
            auto j = ba.find(v);
            if (i == ab.end() && j == ba.end()) return u == v;
            return i != ab.end() && j != ba.end() && i->second == v && j->second == u;
        };
        switch (x->kind) {
        case Kind::truth:
        case Kind::falsity:
            return true;
        case Kind::rel_atom:
        case Kind::so_atom:
        case Kind::eq:
            if (x->symbol != y->symbol || x->args.size() != y->args.size()) return false;
            if (x->kind == Kind::so_atom && !same(x->var, y->var)) return false;
            for (std::size_t i = 0; i < x->args.size(); ++i)
                if (!same(x->args[i], y->args[i])) return false;
            return true;
        case Kind::negation:
        case Kind::conjunction:
        case Kind::disjunction:
            if (x->children.size() != y->children.size()) return false;
            for (std::size_t i = 0; i < x->children.size(); ++i)
                if (!go(x->children[i], y->children[i])) return false;
            return true;
        default: {
            if (x->arity != y->arity) return false;
            auto old_ab = ab.find(x->var) != ab.end() ? std::optional<Var>(ab[x->var]) : std::nullopt;
            auto old_ba = ba.find(y->var) != ba.end() ? std::optional<Var>(ba[y->var]) : std::nullopt;
            ab[x->var] = y->var;
            ba[y->var] = x->var;
            bool r = go(x->child(), y->child());
            if (old_ab) ab[x->var] = *old_ab; else ab.erase(x->var);
            if (old_ba) ba[y->var] = *old_ba; else ba.erase(y->var);
            return r;
        }
        }
    };
    return go(a, b);
}

// Replaces every atom of the SO variable s by the relation symbol `symbol`.
inline Formula so_to_relation(const Formula& f, const Var& s, const std::string& symbol) {
    if (f->kind == Kind::so_atom && f->var == s) return rel(symbol, f->args);
    if (f->children.empty()) return f;
    if (f->is_so_quantifier() && f->var == s) return f;
    std::vector<Formula> cs;
    cs.reserve(f->children.size());
    for (const auto& c : f->children) cs.push_back(so_to_relation(c, s, symbol));
    return with_children(f, std::move(cs));
}

// Replaces every relation atom of `symbol` by the SO variable s.
inline Formula relation_to_so(const Formula& f, const std::string& symbol, const Var& s) {
    if (f->kind == Kind::rel_atom && f->symbol == symbol) return so_atom(s, f->args);
    if (f->children.empty()) return f;
    std::vector<Formula> cs;
    cs.reserve(f->children.size());
    for (const auto& c : f->children) cs.push_back(relation_to_so(c, symbol, s));
    return with_children(f, std::move(cs));
}

} // namespace pohammer
