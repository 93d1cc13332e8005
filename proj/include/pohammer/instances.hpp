#pragma once

#include "pohammer/errors.hpp"
#include "pohammer/formula.hpp"
#include "pohammer/structure.hpp"

#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace pohammer {

// Quantifier pattern of a reduction, one label per block.
using Prefix = std::vector<Quantifier>;

inline Prefix parse_prefix(const std::string& text) {
    Prefix p;
    for (char c : text) {
        if (c == 'A' || c == 'a')
            p.push_back(Quantifier::forall);
        else if (c == 'E' || c == 'e')
            p.push_back(Quantifier::exists);
        else
            throw PreconditionError(std::string("bad prefix letter '") + c + "'");
    }
    if (p.empty()) throw PreconditionError("empty quantifier prefix");
    return p;
}

inline std::string prefix_string(const Prefix& p) {
    std::string s;
    for (auto q : p) s += q == Quantifier::exists ? 'E' : 'A';
    return s;
}

struct QcspBlock {
    Quantifier quantifier = Quantifier::exists;
    std::vector<std::string> variables;
};

struct QcspAtom {
    std::string symbol;
    std::vector<std::string> args;
};

struct QcspInstance {
    std::vector<QcspBlock> blocks;
    std::vector<QcspAtom> atoms;

    [[nodiscard]] Prefix prefix() const {
        Prefix p;
        for (const auto& b : blocks) p.push_back(b.quantifier);
        return p;
    }

    // All variables in declaration order.
    [[nodiscard]] std::vector<std::string> variables() const {
        std::vector<std::string> out;
        for (const auto& b : blocks) out.insert(out.end(), b.variables.begin(), b.variables.end());
        return out;
    }
};

// Checks the invariants against a template signature.
inline void validate(const QcspInstance& inst, const Signature& sig) {
    std::set<std::string> seen;
    for (const auto& b : inst.blocks)
        for (const auto& v : b.variables)
            if (!seen.insert(v).second) throw PreconditionError("variable " + v + " occurs in two blocks");
    for (const auto& a : inst.atoms) {
        if (!sig.contains(a.symbol)) throw SignatureError("unknown relation symbol " + a.symbol);
        if (sig.arity_of(a.symbol) != static_cast<int>(a.args.size()))
            throw SignatureError("atom " + a.symbol + " has " + std::to_string(a.args.size()) + " arguments, expected " +
                                 std::to_string(sig.arity_of(a.symbol)));
        for (const auto& v : a.args)
            if (!seen.contains(v)) throw PreconditionError("unknown variable " + v + " in atom " + a.symbol);
    }
}

// Literal: variable index (1-based) with sign, DIMACS style.
using Literal = int;
using Clause = std::vector<Literal>;

struct QbfBlock {
    Quantifier quantifier = Quantifier::exists;
    std::vector<int> variables;
};

struct Qbf3Instance {
    int num_vars = 0;
    std::vector<QbfBlock> blocks;
    std::vector<Clause> clauses;

    [[nodiscard]] Prefix prefix() const {
        Prefix p;
        for (const auto& b : blocks) p.push_back(b.quantifier);
        return p;
    }

    // Block index of every variable, -1 if unquantified.
    [[nodiscard]] std::vector<int> block_of() const {
        std::vector<int> out(num_vars + 1, -1);
        for (std::size_t i = 0; i < blocks.size(); ++i)
            for (int v : blocks[i].variables) out[v] = static_cast<int>(i);
        return out;
    }
};

inline void validate(const Qbf3Instance& inst) {
    std::vector<bool> quantified(inst.num_vars + 1, false);
    for (const auto& b : inst.blocks)
        for (int v : b.variables) {
            if (v < 1 || v > inst.num_vars) throw PreconditionError("variable " + std::to_string(v) + " out of range");
            if (quantified[v]) throw PreconditionError("variable " + std::to_string(v) + " quantified twice");
            quantified[v] = true;
        }
    for (const auto& c : inst.clauses) {
        if (c.size() > 3) throw PreconditionError("clause width exceeds 3");
        for (int l : c) {
            int v = std::abs(l);
            if (l == 0 || v > inst.num_vars) throw PreconditionError("literal " + std::to_string(l) + " out of range");
            if (!quantified[v]) throw PreconditionError("variable " + std::to_string(v) + " is never quantified");
        }
    }
}

// Prefix (forall exists)^n, counting blocks as given.
inline bool has_forall_exists_shape(const Prefix& p, int n) {
    if (static_cast<int>(p.size()) != 2 * n) return false;
    for (int i = 0; i < 2 * n; ++i)
        if (p[i] != (i % 2 == 0 ? Quantifier::forall : Quantifier::exists)) return false;
    return true;
}

} // namespace pohammer
