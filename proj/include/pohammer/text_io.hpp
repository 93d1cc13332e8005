#pragma once

#include "pohammer/errors.hpp"
#include "pohammer/formula.hpp"
#include "pohammer/instances.hpp"
#include "pohammer/structure.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace pohammer {

namespace detail {

struct Token {
    std::string text;
    SourceSpan span;
};

inline bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '-' || c == '.';
}

inline bool is_identifier(std::string_view s) {
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s)
        if (!is_name_char(c)) return false;
    return true;
}

inline std::optional<long long> to_integer(std::string_view s) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

// Splits text into lines with comments (from `comment` to end of line) removed.
inline std::vector<std::string> logical_lines(std::string_view text, char comment) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    lines.push_back(std::move(cur));
    for (auto& l : lines)
        if (auto p = l.find(comment); p != std::string::npos) l.erase(p);
    return lines;
}

// Whitespace-separated words of one line with their 1-based columns.
inline std::vector<Token> words(const std::string& line, int line_no) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        out.push_back({line.substr(i, j - i), {line_no, static_cast<int>(i) + 1}});
        i = j;
    }
    return out;
}

} // namespace detail

// ---- structures ------------------------------------------------------------

namespace detail {

inline Signature signature_from_words(const std::vector<Token>& ws, std::size_t first) {
    Signature s;
    for (std::size_t i = first; i < ws.size(); ++i) {
        auto slash = ws[i].text.find('/');
        if (slash == std::string::npos) throw ParseError("expected NAME/ARITY, got '" + ws[i].text + "'", ws[i].span);
        std::string name = ws[i].text.substr(0, slash);
        auto arity = to_integer(std::string_view(ws[i].text).substr(slash + 1));
        if (!is_identifier(name)) throw ParseError("bad symbol name '" + name + "'", ws[i].span);
        if (!arity || *arity < 1) throw ParseError("bad arity in '" + ws[i].text + "'", ws[i].span);
        if (s.contains(name)) throw ParseError("duplicate relation symbol " + name, ws[i].span);
        s.add(name, static_cast<int>(*arity));
    }
    return s;
}

} // namespace detail

// "E/2 P/1", optionally preceded by the keyword "signature".
inline Signature parse_signature(std::string_view text) {
    auto ws = detail::words(std::string(text), 1);
    return detail::signature_from_words(ws, !ws.empty() && ws.front().text == "signature" ? 1 : 0);
}

//   signature E/2 P/1
//   domain 3
//   E: (0,1) (1,0)
//   P: (2)
inline FiniteStructure parse_structure(std::string_view text) {
    auto lines = detail::logical_lines(text, '#');
    std::optional<Signature> sig;
    std::optional<int> size;
    std::vector<Relation> rels;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const int line_no = static_cast<int>(ln) + 1;
        const std::string& line = lines[ln];
        auto ws = detail::words(line, line_no);
        if (ws.empty()) continue;
        const auto& head = ws.front();
        if (head.text == "signature") {
            if (sig) throw ParseError("duplicate signature declaration", head.span);
            Signature s = detail::signature_from_words(ws, 1);
            sig = std::move(s);
            rels.assign(sig->size(), {});
            continue;
        }
        if (head.text == "domain") {
            if (!sig) throw ParseError("domain before signature", head.span);
            if (size) throw ParseError("duplicate domain declaration", head.span);
            if (ws.size() != 2) throw ParseError("expected 'domain N'", head.span);
            auto n = detail::to_integer(ws[1].text);
            if (!n || *n < 0) throw ParseError("bad domain size '" + ws[1].text + "'", ws[1].span);
            size = static_cast<int>(*n);
            continue;
        }
        // relation line
        auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("expected 'NAME: tuples'", head.span);
        if (!sig || !size) throw ParseError("relation before signature and domain", head.span);
        std::string name = line.substr(0, colon);
        auto first = name.find_first_not_of(" \t");
        auto last = name.find_last_not_of(" \t");
        SourceSpan name_span{line_no, static_cast<int>(first) + 1};
        name = first == std::string::npos ? "" : name.substr(first, last - first + 1);
        auto idx = sig->index_of(name);
        if (!idx) throw ParseError("unknown relation symbol " + name, name_span);
        const int arity = (*sig)[*idx].arity;
        std::size_t i = colon + 1;
        while (true) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            if (i >= line.size()) break;
            SourceSpan tspan{line_no, static_cast<int>(i) + 1};
            if (line[i] != '(') throw ParseError("expected '('", tspan);
            auto close = line.find(')', i);
            if (close == std::string::npos) throw ParseError("unterminated tuple", tspan);
            std::string inner = line.substr(i + 1, close - i - 1);
            Tuple t;
            std::size_t start = 0;
            while (true) {
                auto comma = inner.find(',', start);
                std::string part = inner.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
                auto b = part.find_first_not_of(" \t");
                auto e = part.find_last_not_of(" \t");
                part = b == std::string::npos ? "" : part.substr(b, e - b + 1);
                auto v = detail::to_integer(part);
                if (!v) throw ParseError("bad element '" + part + "'", tspan);
                if (*v < 0 || *v >= *size)
                    throw ParseError("element " + part + " outside domain of size " + std::to_string(*size), tspan);
                t.push_back(static_cast<Element>(*v));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            if (static_cast<int>(t.size()) != arity)
                throw ParseError("tuple of length " + std::to_string(t.size()) + " for " + name + "/" +
                                     std::to_string(arity),
                                 tspan);
            rels[*idx].insert(std::move(t));
            i = close + 1;
        }
    }
    if (!sig) throw ParseError("missing signature line", {1, 1});
    if (!size) throw ParseError("missing domain line", {static_cast<int>(lines.size()), 1});
    return FiniteStructure(std::move(*sig), *size, std::move(rels));
}

inline std::string serialize_signature(const Signature& sig) {
    std::string out = "signature";
    for (const auto& s : sig) out += " " + s.name + "/" + std::to_string(s.arity);
    return out;
}

inline std::string serialize_structure(const FiniteStructure& a) {
    std::string out = serialize_signature(a.signature()) + "\n";
    out += "domain " + std::to_string(a.size()) + "\n";
    for (std::size_t r = 0; r < a.signature().size(); ++r) {
        const auto& rel = a.relation(r);
        if (rel.empty()) continue;
        out += a.signature()[r].name + ":";
        for (const auto& t : rel) {
            out += " (";
            for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + std::to_string(t[i]);
            out += ")";
        }
        out += "\n";
    }
    return out;
}

// ---- formulas --------------------------------------------------------------

namespace detail {

struct SExpr {
    std::string atom;  // empty for lists
    std::vector<SExpr> items;
    SourceSpan span;
    [[nodiscard]] bool is_list() const { return atom.empty(); }
};

class SExprReader {
public:
    explicit SExprReader(std::string_view text) : text_(text) {}

    SExpr read_top() {
        skip();
        if (pos_ >= text_.size()) throw ParseError("empty formula", here());
        SExpr e = read();
        skip();
        if (pos_ < text_.size()) throw ParseError("trailing input", here());
        return e;
    }

private:
    SourceSpan here() const { return {line_, col_}; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    SExpr read() {
        skip();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", here());
        SExpr e;
        e.span = here();
        char c = text_[pos_];
        if (c == ')') throw ParseError("unexpected ')'", here());
        if (c == '(') {
            advance();
            while (true) {
                skip();
                if (pos_ >= text_.size()) throw ParseError("unclosed '('", e.span);
                if (text_[pos_] == ')') {
                    advance();
                    break;
                }
                e.items.push_back(read());
            }
            return e;
        }
        while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != ';' &&
               !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            e.atom += text_[pos_];
            advance();
        }
        return e;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class FormulaBuilder {
public:
    explicit FormulaBuilder(const Signature* sig) : sig_(sig) {}

    Formula build(const SExpr& e) {
        if (!e.is_list()) {
            if (e.atom == "true") return truth();
            if (e.atom == "false") return falsity();
            throw ParseError("expected a formula, got '" + e.atom + "'", e.span);
        }
        if (e.items.empty() || e.items[0].is_list()) throw ParseError("expected a keyword", e.span);
        const std::string& kw = e.items[0].atom;
        auto arg_count = [&](std::size_t n) {
            if (e.items.size() != n + 1)
                throw ParseError("'" + kw + "' expects " + std::to_string(n) + " argument(s)", e.span);
        };
        if (kw == "true" || kw == "false") {
            arg_count(0);
            return kw == "true" ? truth() : falsity();
        }
        if (kw == "not") {
            arg_count(1);
            return negate(build(e.items[1]));
        }
        if (kw == "and" || kw == "or") {
            std::vector<Formula> cs;
            for (std::size_t i = 1; i < e.items.size(); ++i) cs.push_back(build(e.items[i]));
            if (cs.empty()) return kw == "and" ? truth() : falsity();
            if (cs.size() == 1) return cs.front();
            return kw == "and" ? raw_and(std::move(cs)) : raw_or(std::move(cs));
        }
        if (kw == "eq") {
            arg_count(2);
            return pohammer::eq(fo_var(e.items[1]), fo_var(e.items[2]));
        }
        if (kw == "atom") {
            if (e.items.size() != 3 || e.items[1].is_list())
                throw ParseError("expected (atom NAME (args))", e.span);
            const std::string& name = e.items[1].atom;
            std::vector<Var> args;
            if (e.items[2].is_list()) {
                for (const auto& a : e.items[2].items) args.push_back(fo_var(a));
            } else {
                args.push_back(fo_var(e.items[2]));
            }
            if (auto s = lookup(so_scope_, name)) {
                if (s->second != static_cast<int>(args.size()))
                    throw ParseError("SO variable " + name + " has arity " + std::to_string(s->second) + ", used with " +
                                         std::to_string(args.size()) + " arguments",
                                     e.items[1].span);
                return so_atom(s->first, std::move(args));
            }
            if (sig_) {
                auto idx = sig_->index_of(name);
                if (!idx) throw ParseError("unknown relation symbol " + name, e.items[1].span);
                if ((*sig_)[*idx].arity != static_cast<int>(args.size()))
                    throw ParseError("symbol " + name + " has arity " + std::to_string((*sig_)[*idx].arity) +
                                         ", used with " + std::to_string(args.size()) + " arguments",
                                     e.items[1].span);
            } else {
                auto [it, inserted] = inferred_.emplace(name, static_cast<int>(args.size()));
                if (!inserted && it->second != static_cast<int>(args.size()))
                    throw ParseError("symbol " + name + " used with different arities", e.items[1].span);
                if (inserted) inferred_order_.push_back(name);
            }
            return rel(name, std::move(args));
        }
        if (kw == "exists" || kw == "forall") {
            arg_count(2);
            std::vector<const SExpr*> names;
            if (e.items[1].is_list()) {
                for (const auto& n : e.items[1].items) names.push_back(&n);
                if (names.empty()) throw ParseError("empty variable list", e.items[1].span);
            } else {
                names.push_back(&e.items[1]);
            }
            std::vector<Var> vars;
            for (const auto* n : names) {
                if (n->is_list() || !is_identifier(n->atom)) throw ParseError("bad variable name", n->span);
                vars.push_back(fresh_var(n->atom));
                fo_scope_.push_back({n->atom, {vars.back(), 0}});
            }
            Formula body = build(e.items[2]);
            fo_scope_.resize(fo_scope_.size() - vars.size());
            return kw == "exists" ? exists(vars, body) : forall(vars, body);
        }
        if (kw == "exists2" || kw == "forall2") {
            arg_count(2);
            const auto& decl = e.items[1];
            if (!decl.is_list() || decl.items.size() != 2 || decl.items[0].is_list() || decl.items[1].is_list())
                throw ParseError("expected (NAME ARITY)", decl.span);
            const std::string& name = decl.items[0].atom;
            if (!is_identifier(name)) throw ParseError("bad SO variable name", decl.items[0].span);
            auto arity = to_integer(decl.items[1].atom);
            if (!arity || *arity < 1) throw ParseError("bad arity", decl.items[1].span);
            Var s = fresh_var(name);
            so_scope_.push_back({name, {s, static_cast<int>(*arity)}});
            Formula body = build(e.items[2]);
            so_scope_.pop_back();
            return quantify_so(kw == "exists2" ? Quantifier::exists : Quantifier::forall, s, static_cast<int>(*arity),
                               body);
        }
        throw ParseError("unknown keyword '" + kw + "'", e.items[0].span);
    }

    [[nodiscard]] Signature inferred_signature() const {
        Signature s;
        for (const auto& name : inferred_order_) s.add(name, inferred_.at(name));
        return s;
    }

private:
    using Scope = std::vector<std::pair<std::string, std::pair<Var, int>>>;

    static std::optional<std::pair<Var, int>> lookup(const Scope& scope, const std::string& name) {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
            if (it->first == name) return it->second;
        return std::nullopt;
    }

    Var fo_var(const SExpr& e) {
        if (e.is_list()) throw ParseError("expected a variable", e.span);
        auto v = lookup(fo_scope_, e.atom);
        if (!v) throw ParseError("unbound variable " + e.atom, e.span);
        return v->first;
    }

    const Signature* sig_;
    Scope fo_scope_;
    Scope so_scope_;
    std::map<std::string, int> inferred_;
    std::vector<std::string> inferred_order_;
};

} // namespace detail

// Parses a sentence over sig.  Every binder gets a fresh id.
inline Formula parse_formula(std::string_view text, const Signature& sig) {
    detail::SExprReader reader(text);
    detail::FormulaBuilder builder(&sig);
    return builder.build(reader.read_top());
}

struct ParsedFormula {
    Formula formula;
    Signature signature;  // relation symbols in order of first occurrence
};

// Parses a sentence and infers its signature from the atoms.
inline ParsedFormula parse_formula(std::string_view text) {
    detail::SExprReader reader(text);
    detail::FormulaBuilder builder(nullptr);
    Formula f = builder.build(reader.read_top());
    return {f, builder.inferred_signature()};
}

// Renames bound variables x0, x1, ... and S0, S1, ... in binding order, so that
// alpha-equivalent formulas become identical.
inline Formula canonical_names(const Formula& f) {
    int fo = 0, so = 0;
    std::map<Var, Var> renaming;
    std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
        auto rename = [&](const Var& v) {
            auto it = renaming.find(v);
            return it == renaming.end() ? v : it->second;
        };
        if (g->is_atom()) {
            Node n = *g;
            for (auto& a : n.args) a = rename(a);
            if (g->kind == Kind::so_atom) n.var = rename(n.var);
            return detail::make(std::move(n));
        }
        if (g->is_quantifier()) {
            Var nv = fresh_var(g->is_so_quantifier() ? "S" + std::to_string(so++) : "x" + std::to_string(fo++));
            std::optional<Var> saved;
            if (auto it = renaming.find(g->var); it != renaming.end()) saved = it->second;
            renaming[g->var] = nv;
            Formula body = go(g->child());
            if (saved) renaming[g->var] = *saved; else renaming.erase(g->var);
            Node n = *g;
            n.var = nv;
            n.children = {body};
            return detail::make(std::move(n));
        }
        if (g->children.empty()) return g;
        std::vector<Formula> cs;
        for (const auto& c : g->children) cs.push_back(go(c));
        return with_children(g, std::move(cs));
    };
    return go(f);
}

// Canonical s-expression.  Bound variables keep their surface names unless a
// name is already visible in scope (or, for SO variables, is a relation
// symbol of the formula); then a numeric suffix is appended.
inline std::string serialize_formula(const Formula& f) {
    std::set<std::string> symbols;
    for (const auto& [name, arity] : relation_symbols(f)) symbols.insert(name);
    std::map<Var, std::string> printed;
    std::vector<std::string> in_scope;
    std::string out;
    auto name_of = [&](const Var& v) {
        auto it = printed.find(v);
        return it == printed.end() ? v.name : it->second;
    };
    std::function<void(const Formula&)> go = [&](const Formula& g) {
        switch (g->kind) {
        case Kind::truth: out += "(true)"; return;
        case Kind::falsity: out += "(false)"; return;
        case Kind::rel_atom:
        case Kind::so_atom: {
            out += "(atom " + (g->kind == Kind::rel_atom ? g->symbol : name_of(g->var)) + " (";
            for (std::size_t i = 0; i < g->args.size(); ++i) out += (i ? " " : "") + name_of(g->args[i]);
            out += "))";
            return;
        }
        case Kind::eq: out += "(eq " + name_of(g->args[0]) + " " + name_of(g->args[1]) + ")"; return;
        case Kind::negation: out += "(not "; go(g->child()); out += ")"; return;
        case Kind::conjunction:
        case Kind::disjunction:
            out += g->kind == Kind::conjunction ? "(and" : "(or";
            for (const auto& c : g->children) {
                out += " ";
                go(c);
            }
            out += ")";
            return;
        default: {
            std::string base = g->var.name.empty() ? (g->is_so_quantifier() ? "S" : "x") : g->var.name;
            std::string name = base;
            auto taken = [&](const std::string& n) {
                if (std::find(in_scope.begin(), in_scope.end(), n) != in_scope.end()) return true;
                return g->is_so_quantifier() && symbols.contains(n);
            };
            for (int k = 1; taken(name); ++k) name = base + "_" + std::to_string(k);
            std::optional<std::string> saved;
            if (auto it = printed.find(g->var); it != printed.end()) saved = it->second;
            printed[g->var] = name;
            in_scope.push_back(name);
            static const char* kw[] = {"", "", "", "", "", "", "", "", "exists", "forall", "exists2", "forall2"};
            out += std::string("(") + kw[static_cast<int>(g->kind)] + " ";
            if (g->is_so_quantifier())
                out += "(" + name + " " + std::to_string(g->arity) + ") ";
            else
                out += name + " ";
            go(g->child());
            out += ")";
            in_scope.pop_back();
            if (saved) printed[g->var] = *saved; else printed.erase(g->var);
            return;
        }
        }
    };
    go(f);
    return out;
}

// ---- QCSP instances --------------------------------------------------------
//
//   forall x1 ; exists y1 y2
//   R(x1,y1) R(y1,y2)

inline QcspInstance parse_qcsp(std::string_view text, const Signature& template_sig) {
    auto lines = detail::logical_lines(text, '#');
    QcspInstance inst;
    bool have_prefix = false;
    std::map<std::string, SourceSpan> declared;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const int line_no = static_cast<int>(ln) + 1;
        const std::string& line = lines[ln];
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (!have_prefix) {
            have_prefix = true;
            for (const auto& w : detail::words(line, line_no)) {
                if (w.text == ";") continue;
                std::string word = w.text;
                bool ends_block = !word.empty() && word.back() == ';';
                if (ends_block) word.pop_back();
                if (word == "forall" || word == "exists") {
                    inst.blocks.push_back({word == "forall" ? Quantifier::forall : Quantifier::exists, {}});
                } else if (!word.empty()) {
                    if (inst.blocks.empty()) throw ParseError("expected 'forall' or 'exists'", w.span);
                    if (!detail::is_identifier(word)) throw ParseError("bad variable name '" + word + "'", w.span);
                    if (declared.contains(word)) throw ParseError("variable " + word + " occurs in two blocks", w.span);
                    declared.emplace(word, w.span);
                    inst.blocks.back().variables.push_back(word);
                }
            }
            if (inst.blocks.empty()) throw ParseError("empty quantifier prefix", {line_no, 1});
            continue;
        }
        std::size_t i = 0;
        while (true) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            if (i >= line.size()) break;
            SourceSpan span{line_no, static_cast<int>(i) + 1};
            auto open = line.find('(', i);
            auto close = line.find(')', i);
            auto eq_pos = line.find('=', i);
            if (eq_pos != std::string::npos && (open == std::string::npos || eq_pos < open))
                throw ParseError("equality atoms are not supported", span);
            if (open == std::string::npos || close == std::string::npos || close < open)
                throw ParseError("expected NAME(args)", span);
            std::string name = line.substr(i, open - i);
            if (name == "eq") throw ParseError("equality atoms are not supported", span);
            if (!template_sig.contains(name)) throw ParseError("unknown relation symbol " + name, span);
            QcspAtom atom{name, {}};
            std::string inner = line.substr(open + 1, close - open - 1);
            std::size_t start = 0;
            while (true) {
                auto comma = inner.find(',', start);
                std::string part = inner.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
                auto b = part.find_first_not_of(" \t");
                auto e = part.find_last_not_of(" \t");
                part = b == std::string::npos ? "" : part.substr(b, e - b + 1);
                if (!declared.contains(part)) throw ParseError("unknown variable '" + part + "'", span);
                atom.args.push_back(part);
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            if (template_sig.arity_of(name) != static_cast<int>(atom.args.size()))
                throw ParseError("atom " + name + " has " + std::to_string(atom.args.size()) + " arguments, expected " +
                                     std::to_string(template_sig.arity_of(name)),
                                 span);
            inst.atoms.push_back(std::move(atom));
            i = close + 1;
        }
    }
    if (!have_prefix) throw ParseError("missing quantifier prefix", {1, 1});
    return inst;
}

inline std::string serialize_qcsp(const QcspInstance& inst) {
    std::string out;
    for (std::size_t i = 0; i < inst.blocks.size(); ++i) {
        if (i) out += " ; ";
        out += inst.blocks[i].quantifier == Quantifier::forall ? "forall" : "exists";
        for (const auto& v : inst.blocks[i].variables) out += " " + v;
    }
    out += "\n";
    for (std::size_t i = 0; i < inst.atoms.size(); ++i) {
        out += (i ? " " : "") + inst.atoms[i].symbol + "(";
        for (std::size_t k = 0; k < inst.atoms[i].args.size(); ++k) out += (k ? "," : "") + inst.atoms[i].args[k];
        out += ")";
    }
    if (!inst.atoms.empty()) out += "\n";
    return out;
}

// ---- quantified 3-CNF (QDIMACS subset) -------------------------------------

inline Qbf3Instance parse_qdimacs3(std::string_view text, const std::optional<Prefix>& expected_shape = std::nullopt) {
    auto lines = detail::logical_lines(text, '\x01');
    Qbf3Instance inst;
    bool header = false;
    int declared_clauses = 0;
    std::vector<SourceSpan> quantified_at;
    bool clauses_started = false;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const int line_no = static_cast<int>(ln) + 1;
        auto ws = detail::words(lines[ln], line_no);
        if (ws.empty() || ws[0].text == "c") continue;
        if (ws[0].text == "p") {
            if (header) throw ParseError("duplicate header", ws[0].span);
            if (ws.size() != 4 || ws[1].text != "cnf") throw ParseError("malformed header, expected 'p cnf V C'", ws[0].span);
            auto v = detail::to_integer(ws[2].text);
            auto c = detail::to_integer(ws[3].text);
            if (!v || *v < 0 || !c || *c < 0) throw ParseError("malformed header, expected 'p cnf V C'", ws[0].span);
            inst.num_vars = static_cast<int>(*v);
            declared_clauses = static_cast<int>(*c);
            quantified_at.assign(inst.num_vars + 1, SourceSpan{0, 0});
            header = true;
            continue;
        }
        if (!header) throw ParseError("missing 'p cnf' header", ws[0].span);
        std::vector<int> nums;
        bool quant = ws[0].text == "a" || ws[0].text == "e";
        for (std::size_t i = quant ? 1 : 0; i < ws.size(); ++i) {
            auto v = detail::to_integer(ws[i].text);
            if (!v) throw ParseError("expected an integer, got '" + ws[i].text + "'", ws[i].span);
            if (std::abs(*v) > inst.num_vars)
                throw ParseError("variable " + std::to_string(std::abs(*v)) + " exceeds header count", ws[i].span);
            nums.push_back(static_cast<int>(*v));
        }
        if (nums.empty() || nums.back() != 0) throw ParseError("line must end with 0", ws.back().span);
        nums.pop_back();
        if (std::find(nums.begin(), nums.end(), 0) != nums.end()) throw ParseError("0 inside a line", ws[0].span);
        if (quant) {
            if (clauses_started) throw ParseError("quantifier line after clauses", ws[0].span);
            Quantifier q = ws[0].text == "a" ? Quantifier::forall : Quantifier::exists;
            if (!inst.blocks.empty() && inst.blocks.back().quantifier == q)
                throw ParseError("quantifier blocks must alternate", ws[0].span);
            QbfBlock block{q, {}};
            for (std::size_t i = 0; i < nums.size(); ++i) {
                int v = nums[i];
                if (v < 0) throw ParseError("negative variable in quantifier line", ws[i + 1].span);
                if (quantified_at[v].line != 0) throw ParseError("variable " + std::to_string(v) + " quantified twice", ws[i + 1].span);
                quantified_at[v] = ws[i + 1].span;
                block.variables.push_back(v);
            }
            inst.blocks.push_back(std::move(block));
            continue;
        }
        clauses_started = true;
        if (nums.size() > 3) throw ParseError("clause width exceeds 3", ws[0].span);
        for (std::size_t i = 0; i < nums.size(); ++i)
            if (quantified_at[std::abs(nums[i])].line == 0)
                throw ParseError("variable " + std::to_string(std::abs(nums[i])) + " is never quantified", ws[i].span);
        inst.clauses.push_back(nums);
    }
    if (!header) throw ParseError("missing 'p cnf' header", {1, 1});
    if (static_cast<int>(inst.clauses.size()) != declared_clauses)
        throw ParseError("header declares " + std::to_string(declared_clauses) + " clauses, found " +
                             std::to_string(inst.clauses.size()),
                         {static_cast<int>(lines.size()), 1});
    if (expected_shape && inst.prefix() != *expected_shape)
        throw ParseError("prefix " + prefix_string(inst.prefix()) + " does not match expected " +
                             prefix_string(*expected_shape),
                         {1, 1});
    return inst;
}

inline std::string serialize_qdimacs3(const Qbf3Instance& inst) {
    std::string out = "p cnf " + std::to_string(inst.num_vars) + " " + std::to_string(inst.clauses.size()) + "\n";
    for (const auto& b : inst.blocks) {
        out += b.quantifier == Quantifier::forall ? "a" : "e";
        for (int v : b.variables) out += " " + std::to_string(v);
        out += " 0\n";
    }
    for (const auto& c : inst.clauses) {
        for (int l : c) out += std::to_string(l) + " ";
        out += "0\n";
    }
    return out;
}

} // namespace pohammer
