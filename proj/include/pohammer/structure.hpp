#pragma once

#include "pohammer/errors.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pohammer {

using Element = int;
using Tuple = std::vector<Element>;
using Relation = std::set<Tuple>;

struct Symbol {
    std::string name;
    int arity = 1;

    friend bool operator==(const Symbol&, const Symbol&) = default;
};

// Ordered list of relation symbols with unique names and positive arities.
class Signature {
public:
    Signature() = default;

    explicit Signature(std::vector<Symbol> symbols) {
        for (auto& s : symbols) add(std::move(s.name), s.arity);
    }

    Signature(std::initializer_list<Symbol> symbols) : Signature(std::vector<Symbol>(symbols)) {}

    void add(std::string name, int arity) {
        if (name.empty()) throw SignatureError("empty relation symbol name");
        if (arity < 1) throw SignatureError("symbol " + name + " must have arity >= 1");
        if (contains(name)) throw SignatureError("duplicate relation symbol " + name);
        symbols_.push_back({std::move(name), arity});
    }

    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const {
        for (std::size_t i = 0; i < symbols_.size(); ++i)
            if (symbols_[i].name == name) return i;
        return std::nullopt;
    }

    [[nodiscard]] bool contains(std::string_view name) const { return index_of(name).has_value(); }

    [[nodiscard]] int arity_of(std::string_view name) const {
        auto i = index_of(name);
        if (!i) throw SignatureError("unknown relation symbol " + std::string(name));
        return symbols_[*i].arity;
    }

    [[nodiscard]] std::size_t size() const { return symbols_.size(); }
    [[nodiscard]] bool empty() const { return symbols_.empty(); }
    [[nodiscard]] const Symbol& operator[](std::size_t i) const { return symbols_[i]; }
    [[nodiscard]] auto begin() const { return symbols_.begin(); }
    [[nodiscard]] auto end() const { return symbols_.end(); }
    [[nodiscard]] const std::vector<Symbol>& symbols() const { return symbols_; }

    friend bool operator==(const Signature&, const Signature&) = default;

private:
    std::vector<Symbol> symbols_;
};

// A finite relational structure over the domain {0, ..., size-1}.  Immutable
// once built; every operation below returns a new value.
class FiniteStructure {
public:
    FiniteStructure() = default;

    FiniteStructure(Signature signature, int size) : FiniteStructure(std::move(signature), size, std::map<std::string, Relation>{}) {}

    FiniteStructure(Signature signature, int size, const std::map<std::string, Relation>& relations)
        : signature_(std::move(signature)), size_(size), relations_(signature_.size()) {
        if (size < 0) throw DomainError("negative domain size");
        for (const auto& [name, tuples] : relations) {
            auto idx = signature_.index_of(name);
            if (!idx) throw SignatureError("relation for unknown symbol " + name);
            for (const auto& t : tuples) check_tuple(signature_[*idx], t);
            relations_[*idx] = tuples;
        }
    }

    FiniteStructure(Signature signature, int size, std::vector<Relation> relations)
        : signature_(std::move(signature)), size_(size), relations_(std::move(relations)) {
        if (size < 0) throw DomainError("negative domain size");
        if (relations_.size() != signature_.size())
            throw SignatureError("relation count does not match signature");
        for (std::size_t i = 0; i < relations_.size(); ++i)
            for (const auto& t : relations_[i]) check_tuple(signature_[i], t);
    }

    [[nodiscard]] const Signature& signature() const { return signature_; }
    [[nodiscard]] int size() const { return size_; }
    [[nodiscard]] const Relation& relation(std::size_t index) const { return relations_[index]; }

    [[nodiscard]] const Relation& relation(std::string_view name) const {
        auto idx = signature_.index_of(name);
        if (!idx) throw SignatureError("unknown relation symbol " + std::string(name));
        return relations_[*idx];
    }

    [[nodiscard]] bool holds(std::string_view name, const Tuple& t) const { return relation(name).contains(t); }

    friend bool operator==(const FiniteStructure&, const FiniteStructure&) = default;

private:
    void check_tuple(const Symbol& s, const Tuple& t) const {
        if (static_cast<int>(t.size()) != s.arity)
            throw SignatureError("tuple of length " + std::to_string(t.size()) + " for symbol " + s.name +
                                 "/" + std::to_string(s.arity));
        for (auto e : t)
            if (e < 0 || e >= size_)
                throw DomainError("element " + std::to_string(e) + " outside domain of size " +
                                  std::to_string(size_));
    }

    Signature signature_;
    int size_ = 0;
    std::vector<Relation> relations_;
};

struct Substructure {
    FiniteStructure structure;
    // old element -> new element, -1 for elements that were dropped
    std::vector<Element> index_map;
};

// Induced substructure on `elements`, re-indexed to {0, ..., |S|-1} in
// increasing element order.
inline Substructure substructure(const FiniteStructure& a, std::span<const Element> elements) {
    std::vector<Element> kept(elements.begin(), elements.end());
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    std::vector<Element> map(a.size(), -1);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (kept[i] < 0 || kept[i] >= a.size())
            throw DomainError("element " + std::to_string(kept[i]) + " outside domain of size " +
                              std::to_string(a.size()));
        map[kept[i]] = static_cast<Element>(i);
    }
    std::vector<Relation> rels(a.signature().size());
    for (std::size_t r = 0; r < rels.size(); ++r) {
        for (const auto& t : a.relation(r)) {
            Tuple image;
            image.reserve(t.size());
            for (auto e : t) {
                if (map[e] < 0) break;
                image.push_back(map[e]);
            }
            if (image.size() == t.size()) rels[r].insert(std::move(image));
        }
    }
    return {FiniteStructure(a.signature(), static_cast<int>(kept.size()), std::move(rels)), std::move(map)};
}

inline Substructure substructure(const FiniteStructure& a, const std::set<Element>& elements) {
    std::vector<Element> v(elements.begin(), elements.end());
    return substructure(a, std::span<const Element>(v));
}

// A + B: B's elements are shifted by |A|.
inline FiniteStructure disjoint_union(const FiniteStructure& a, const FiniteStructure& b) {
    if (!(a.signature() == b.signature())) throw SignatureError("disjoint union of structures with different signatures");
    std::vector<Relation> rels(a.signature().size());
    for (std::size_t r = 0; r < rels.size(); ++r) {
        rels[r] = a.relation(r);
        for (auto t : b.relation(r)) {
            for (auto& e : t) e += a.size();
            rels[r].insert(std::move(t));
        }
    }
    return FiniteStructure(a.signature(), a.size() + b.size(), std::move(rels));
}

inline FiniteStructure expand(const FiniteStructure& a, const std::string& symbol, int arity, Relation relation) {
    Signature sig = a.signature();
    sig.add(symbol, arity);
    std::vector<Relation> rels;
    rels.reserve(sig.size());
    for (std::size_t r = 0; r < a.signature().size(); ++r) rels.push_back(a.relation(r));
    rels.push_back(std::move(relation));
    return FiniteStructure(std::move(sig), a.size(), std::move(rels));
}

// Drops `symbol` from the signature.
inline FiniteStructure reduct(const FiniteStructure& a, std::string_view symbol) {
    if (!a.signature().contains(symbol)) throw SignatureError("unknown relation symbol " + std::string(symbol));
    Signature sig;
    std::vector<Relation> rels;
    for (std::size_t r = 0; r < a.signature().size(); ++r) {
        if (a.signature()[r].name == symbol) continue;
        sig.add(a.signature()[r].name, a.signature()[r].arity);
        rels.push_back(a.relation(r));
    }
    return FiniteStructure(std::move(sig), a.size(), std::move(rels));
}

// (A, !=): expansion by a binary symbol interpreted as disequality.
inline FiniteStructure expand_with_neq(const FiniteStructure& a, const std::string& symbol = "N") {
    if (a.signature().contains(symbol)) throw SignatureError("symbol " + symbol + " already in signature");
    Relation neq;
    for (Element x = 0; x < a.size(); ++x)
        for (Element y = 0; y < a.size(); ++y)
            if (x != y) neq.insert({x, y});
    return expand(a, symbol, 2, std::move(neq));
}

// Image of A under the element permutation `perm` (old -> new).
inline FiniteStructure permute(const FiniteStructure& a, std::span<const Element> perm) {
    std::vector<Relation> rels(a.signature().size());
    for (std::size_t r = 0; r < rels.size(); ++r)
        for (auto t : a.relation(r)) {
            for (auto& e : t) e = perm[e];
            rels[r].insert(std::move(t));
        }
    return FiniteStructure(a.signature(), a.size(), std::move(rels));
}

// Searches all bijections; intended for the small structures of the test families.
inline std::optional<std::vector<Element>> find_isomorphism(const FiniteStructure& a, const FiniteStructure& b) {
    if (!(a.signature() == b.signature()) || a.size() != b.size()) return std::nullopt;
    for (std::size_t r = 0; r < a.signature().size(); ++r)
        if (a.relation(r).size() != b.relation(r).size()) return std::nullopt;
    std::vector<Element> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        if (permute(a, perm) == b) return perm;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::nullopt;
}

inline bool are_isomorphic(const FiniteStructure& a, const FiniteStructure& b) {
    return find_isomorphism(a, b).has_value();
}

} // namespace pohammer
