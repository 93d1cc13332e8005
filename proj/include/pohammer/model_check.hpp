#pragma once

#include "pohammer/errors.hpp"
#include "pohammer/formula.hpp"
#include "pohammer/instances.hpp"
#include "pohammer/structure.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace pohammer {

inline constexpr std::uint64_t default_budget = 100'000'000;

struct McOptions {
    std::uint64_t budget = default_budget;  // game-tree nodes
    unsigned jobs = 1;                      // >1 splits the outermost quantifier across threads
};

struct McReport {
    bool value = false;
    std::uint64_t nodes = 0;
    std::vector<std::string> warnings;
};

namespace detail {

// Lexicographic enumeration of the k-subsets of {0..m-1}, k = 0..m, as masks.
class SubsetOrder {
public:
    explicit SubsetOrder(int m) : m_(m) {}

    template <class F>
    bool any(F&& f) const {  // stops when f returns true
        for (int k = 0; k <= m_; ++k) {
            std::vector<int> idx(k);
            for (int i = 0; i < k; ++i) idx[i] = i;
            while (true) {
                std::uint64_t mask = 0;
                for (int i : idx) mask |= std::uint64_t{1} << i;
                if (f(mask)) return true;
                int i = k - 1;
                while (i >= 0 && idx[i] == m_ - k + i) --i;
                if (i < 0) break;
                ++idx[i];
                for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            }
        }
        return false;
    }

    [[nodiscard]] std::vector<std::uint64_t> all() const {
        std::vector<std::uint64_t> out;
        any([&](std::uint64_t m) {
            out.push_back(m);
            return false;
        });
        return out;
    }

private:
    int m_;
};

inline std::uint64_t int_pow(std::uint64_t b, int e) {
    std::uint64_t r = 1;
    for (int i = 0; i < e; ++i) {
        r *= b;
        if (r > (std::uint64_t{1} << 40)) return r;
    }
    return r;
}

// Pushes quantifiers towards the atoms that mention their variable.  Only
// rewrites that are equivalences on the given domain are used.
class Miniscoper {
public:
    explicit Miniscoper(bool nonempty_domain) : nonempty_(nonempty_domain) {}

    Formula run(const Formula& f) {
        if (f->is_quantifier()) return push(f, run(f->child()));
        if (f->children.empty()) return f;
        std::vector<Formula> cs;
        cs.reserve(f->children.size());
        for (const auto& c : f->children) cs.push_back(run(c));
        return with_children(f, std::move(cs));
    }

private:
    // binder: the quantifier node whose variable is pushed; g: its (processed) body
    Formula push(const Formula& binder, const Formula& g) {
        const Var& v = binder->var;
        const bool so = binder->is_so_quantifier();
        const Quantifier q = binder->quantifier();
        auto rebuild = [&](const Formula& body) { return with_children(binder, {body}); };
        if (!mentions(g, v)) {
            // SO quantifiers range over a nonempty set of relations.
            if (so || nonempty_) return g;
            return rebuild(g);
        }
        const Kind spread = q == Quantifier::exists ? Kind::disjunction : Kind::conjunction;
        const Kind split = q == Quantifier::exists ? Kind::conjunction : Kind::disjunction;
        if (g->kind == spread) {
            std::vector<Formula> cs;
            for (const auto& c : g->children) cs.push_back(push(binder, c));
            return with_children(g, std::move(cs));
        }
        if (g->kind == split) {
            std::vector<Formula> with, without;
            for (const auto& c : g->children) (mentions(c, v) ? with : without).push_back(c);
            if (without.empty()) return rebuild(g);
            Formula inner = with.size() == 1 ? push(binder, with.front()) : rebuild(with_children(g, with));
            without.push_back(inner);
            return with_children(g, std::move(without));
        }
        if (g->is_quantifier() && g->quantifier() == q && g->is_so_quantifier() == so)
            return with_children(g, {push(binder, g->child())});
        return rebuild(g);
    }

    bool nonempty_;
};

struct Op {
    Kind kind = Kind::truth;
    int slot = -1;   // FO slot, SO slot (binder or atom)
    int rel = -1;
    int arity = 0;
    std::uint64_t subsets = 0;  // SO binders: |A|^arity
    std::vector<int> args;
    std::vector<int> kids;
};

struct Program {
    std::vector<Op> ops;
    int root = 0;
    int fo_slots = 0;
    int so_slots = 0;
    int n = 0;
    std::vector<std::vector<char>> rel_bits;
    std::vector<std::vector<std::uint64_t>> powers;  // powers[k][i] = n^(k-1-i)
    std::map<Var, int> external_so;
};

inline Program compile(const FiniteStructure& a, const Formula& f, const std::vector<SoBinder>& external = {}) {
    Program p;
    p.n = a.size();
    const auto& sig = a.signature();
    p.rel_bits.resize(sig.size());
    for (std::size_t r = 0; r < sig.size(); ++r) {
        const int k = sig[r].arity;
        const std::uint64_t cells = int_pow(p.n, k);
        if (cells > (std::uint64_t{1} << 26)) throw ResourceError("relation " + sig[r].name + " too large to tabulate", cells);
        p.rel_bits[r].assign(cells, 0);
        for (const auto& t : a.relation(r)) {
            std::uint64_t code = 0;
            for (auto e : t) code = code * p.n + e;
            p.rel_bits[r][code] = 1;
        }
    }
    std::map<Var, int> fo_slot, so_slot;
    for (const auto& b : external) {
        const std::uint64_t cells = int_pow(p.n, b.arity);
        if (cells > 64) throw ResourceError("SO variable " + b.var.name + " ranges over more than 2^64 sets", cells);
        so_slot[b.var] = p.so_slots++;
    }
    p.external_so = so_slot;
    auto ensure_powers = [&](int k) {
        if (static_cast<int>(p.powers.size()) <= k) p.powers.resize(k + 1);
        if (!p.powers[k].empty() || k == 0) return;
        p.powers[k].resize(k);
        std::uint64_t m = 1;
        for (int i = k - 1; i >= 0; --i) {
            p.powers[k][i] = m;
            m *= p.n;
        }
    };
    std::function<int(const Formula&)> go = [&](const Formula& g) -> int {
        Op op;
        op.kind = g->kind;
        auto fo_of = [&](const Var& x) {
            auto it = fo_slot.find(x);
            if (it == fo_slot.end()) throw PreconditionError("free FO variable " + x.name);
            return it->second;
        };
        switch (g->kind) {
        case Kind::rel_atom: {
            auto idx = sig.index_of(g->symbol);
            if (!idx) throw SignatureError("unknown relation symbol " + g->symbol);
            if (sig[*idx].arity != static_cast<int>(g->args.size()))
                throw SignatureError("symbol " + g->symbol + " used with wrong arity");
            op.rel = static_cast<int>(*idx);
            for (const auto& x : g->args) op.args.push_back(fo_of(x));
            ensure_powers(static_cast<int>(op.args.size()));
            break;
        }
        case Kind::so_atom: {
            auto it = so_slot.find(g->var);
            if (it == so_slot.end()) throw PreconditionError("free SO variable " + g->var.name);
            op.slot = it->second;
            for (const auto& x : g->args) op.args.push_back(fo_of(x));
            ensure_powers(static_cast<int>(op.args.size()));
            break;
        }
        case Kind::eq:
            for (const auto& x : g->args) op.args.push_back(fo_of(x));
            break;
        case Kind::exists_fo:
        case Kind::forall_fo: {
            op.slot = p.fo_slots++;
            auto it = fo_slot.find(g->var);
            const int saved = it == fo_slot.end() ? -1 : it->second;
            fo_slot[g->var] = op.slot;
            op.kids.push_back(go(g->child()));
            if (saved >= 0) fo_slot[g->var] = saved; else fo_slot.erase(g->var);
            break;
        }
        case Kind::exists_so:
        case Kind::forall_so: {
            op.arity = g->arity;
            op.subsets = int_pow(p.n, g->arity);
            if (op.subsets > 64)
                throw ResourceError("SO variable " + g->var.name + " of arity " + std::to_string(g->arity) +
                                        " ranges over 2^" + std::to_string(op.subsets) + " sets",
                                    op.subsets);
            op.slot = p.so_slots++;
            auto it = so_slot.find(g->var);
            const int saved = it == so_slot.end() ? -1 : it->second;
            so_slot[g->var] = op.slot;
            op.kids.push_back(go(g->child()));
            if (saved >= 0) so_slot[g->var] = saved; else so_slot.erase(g->var);
            break;
        }
        default:
            for (const auto& c : g->children) op.kids.push_back(go(c));
            break;
        }
        p.ops.push_back(std::move(op));
        return static_cast<int>(p.ops.size()) - 1;
    };
    p.root = go(f);
    return p;
}

class Evaluator {
public:
    Evaluator(const Program& p, std::uint64_t budget, std::atomic<std::uint64_t>* shared = nullptr)
        : p_(p), budget_(budget), shared_(shared), fo_(p.fo_slots, 0), so_(p.so_slots, 0) {}

    void set_so(int slot, std::uint64_t mask) { so_[slot] = mask; }
    void set_fo(int slot, int value) { fo_[slot] = value; }

    bool eval(int i) {
        tick();
        const Op& op = p_.ops[i];
        switch (op.kind) {
        case Kind::truth: return true;
        case Kind::falsity: return false;
        case Kind::rel_atom: return p_.rel_bits[op.rel][code(op)] != 0;
        case Kind::so_atom: return (so_[op.slot] >> code(op)) & 1U;
        case Kind::eq: return fo_[op.args[0]] == fo_[op.args[1]];
        case Kind::negation: return !eval(op.kids[0]);
        case Kind::conjunction:
            for (int k : op.kids)
                if (!eval(k)) return false;
            return true;
        case Kind::disjunction:
            for (int k : op.kids)
                if (eval(k)) return true;
            return false;
        case Kind::exists_fo:
            for (int e = 0; e < p_.n; ++e) {
                fo_[op.slot] = e;
                if (eval(op.kids[0])) return true;
            }
            return false;
        case Kind::forall_fo:
            for (int e = 0; e < p_.n; ++e) {
                fo_[op.slot] = e;
                if (!eval(op.kids[0])) return false;
            }
            return true;
        case Kind::exists_so:
            return SubsetOrder(static_cast<int>(op.subsets)).any([&](std::uint64_t m) {
                so_[op.slot] = m;
                return eval(op.kids[0]);
            });
        case Kind::forall_so:
            return !SubsetOrder(static_cast<int>(op.subsets)).any([&](std::uint64_t m) {
                so_[op.slot] = m;
                return !eval(op.kids[0]);
            });
        }
        return false;
    }

    // Flushes the local count into the shared counter.
    std::uint64_t finish() {
        if (shared_) {
            shared_->fetch_add(local_, std::memory_order_relaxed);
            local_ = 0;
            return shared_->load();
        }
        return nodes_;
    }

    [[nodiscard]] std::uint64_t nodes() const { return nodes_; }

private:
    void tick() {
        ++nodes_;
        if (shared_) {
            if (++local_ >= 4096) {
                std::uint64_t total = shared_->fetch_add(local_, std::memory_order_relaxed) + local_;
                local_ = 0;
                if (total > budget_) throw ResourceError("model checking budget exhausted", total);
            }
        } else if (nodes_ > budget_) {
            throw ResourceError("model checking budget exhausted", nodes_);
        }
    }

    std::uint64_t code(const Op& op) const {
        std::uint64_t c = 0;
        const auto& pw = p_.powers[op.args.size()];
        for (std::size_t i = 0; i < op.args.size(); ++i) c += static_cast<std::uint64_t>(fo_[op.args[i]]) * pw[i];
        return c;
    }

    const Program& p_;
    std::uint64_t budget_;
    std::atomic<std::uint64_t>* shared_;
    std::vector<int> fo_;
    std::vector<std::uint64_t> so_;
    std::uint64_t nodes_ = 0;
    std::uint64_t local_ = 0;
};

inline Formula prepare(const FiniteStructure& a, const Formula& f) {
    return Miniscoper(a.size() > 0).run(alpha_normalize(f));
}

inline void collect_warnings(const FiniteStructure& a, const Formula& f, std::vector<std::string>& out) {
    if (a.size() < 4) return;
    std::function<void(const Formula&)> walk = [&](const Formula& g) {
        if (g->is_so_quantifier() && g->arity >= 2)
            out.push_back("SO variable " + g->var.name + " has arity " + std::to_string(g->arity) +
                          " on a structure of size " + std::to_string(a.size()) + "; search may be large");
        for (const auto& c : g->children) walk(c);
    };
    walk(f);
}

// Splits the outermost quantifier of the root over worker threads.
inline bool eval_parallel(const Program& p, const McOptions& opts, std::uint64_t& nodes) {
    const Op& root = p.ops[p.root];
    if (opts.jobs <= 1 || !(root.kind == Kind::exists_fo || root.kind == Kind::forall_fo ||
                            root.kind == Kind::exists_so || root.kind == Kind::forall_so)) {
        Evaluator ev(p, opts.budget);
        bool v = ev.eval(p.root);
        nodes = ev.nodes();
        return v;
    }
    const bool so = root.kind == Kind::exists_so || root.kind == Kind::forall_so;
    const bool existential = root.kind == Kind::exists_so || root.kind == Kind::exists_fo;
    std::vector<std::uint64_t> candidates;
    if (so) {
        if (root.subsets > 24) throw ResourceError("outermost SO variable too large to split", root.subsets);
        candidates = SubsetOrder(static_cast<int>(root.subsets)).all();
    } else {
        for (int e = 0; e < p.n; ++e) candidates.push_back(static_cast<std::uint64_t>(e));
    }
    std::atomic<std::uint64_t> shared{0};
    std::atomic<std::size_t> next{0};
    std::atomic<bool> decided{false};
    auto worker = [&]() {
        Evaluator ev(p, opts.budget, &shared);
        while (!decided.load()) {
            std::size_t i = next.fetch_add(1);
            if (i >= candidates.size()) break;
            if (so)
                ev.set_so(root.slot, candidates[i]);
            else
                ev.set_fo(root.slot, static_cast<int>(candidates[i]));
            if (ev.eval(root.kids[0]) == existential) decided.store(true);
        }
        ev.finish();
    };
    std::vector<std::future<void>> fs;
    for (unsigned j = 0; j < opts.jobs; ++j) fs.push_back(std::async(std::launch::async, worker));
    std::exception_ptr err;
    for (auto& fut : fs) {
        try {
            fut.get();
        } catch (...) {
            if (!err) err = std::current_exception();
        }
    }
    nodes = shared.load();
    if (decided.load()) return existential;
    if (err) std::rethrow_exception(err);
    return !existential;
}

} // namespace detail

// Brute-force game evaluation of an SO sentence.  Throws ResourceError when
// the node budget runs out.
inline McReport mc_so_report(const FiniteStructure& a, const Formula& f, const McOptions& opts = {}) {
    check_sentence(f, a.signature());
    McReport r;
    detail::collect_warnings(a, f, r.warnings);
    auto program = detail::compile(a, detail::prepare(a, f));
    r.value = detail::eval_parallel(program, opts, r.nodes);
    return r;
}

inline bool mc_so(const FiniteStructure& a, const Formula& f, const McOptions& opts = {}) {
    return mc_so_report(a, f, opts).value;
}

struct SoWitness {
    Var var;
    int arity = 1;
    Relation tuples;
};

// When f holds, an assignment of its leading existential SO block that
// extends to a win; otherwise nothing.
inline std::optional<std::vector<SoWitness>> mc_so_witness(const FiniteStructure& a, const Formula& f,
                                                           const McOptions& opts = {}) {
    check_sentence(f, a.signature());
    Formula g = alpha_normalize(f);
    std::vector<SoBinder> block;
    while (g->kind == Kind::exists_so) {
        block.push_back({Quantifier::exists, g->var, g->arity});
        g = g->child();
    }
    if (block.empty()) throw PreconditionError("mc_so_witness expects a leading existential SO quantifier");
    auto program = detail::compile(a, detail::Miniscoper(a.size() > 0).run(g), block);
    detail::Evaluator ev(program, opts.budget);
    std::vector<std::uint64_t> masks(block.size(), 0);
    std::function<bool(std::size_t)> search = [&](std::size_t i) -> bool {
        if (i == block.size()) return ev.eval(program.root);
        auto cells = detail::int_pow(a.size(), block[i].arity);
        return detail::SubsetOrder(static_cast<int>(cells)).any([&](std::uint64_t m) {
            masks[i] = m;
            ev.set_so(static_cast<int>(i), m);
            return search(i + 1);
        });
    };
    if (!search(0)) return std::nullopt;
    std::vector<SoWitness> out;
    for (std::size_t i = 0; i < block.size(); ++i) {
        SoWitness w{block[i].var, block[i].arity, {}};
        auto cells = detail::int_pow(a.size(), block[i].arity);
        for (std::uint64_t c = 0; c < cells; ++c) {
            if (!((masks[i] >> c) & 1U)) continue;
            Tuple t(block[i].arity);
            std::uint64_t rest = c;
            for (int k = block[i].arity - 1; k >= 0; --k) {
                t[k] = static_cast<Element>(rest % a.size());
                rest /= a.size();
            }
            w.tuples.insert(std::move(t));
        }
        out.push_back(std::move(w));
    }
    return out;
}

// ---- QCSP ------------------------------------------------------------------

// Game-tree evaluation over B's domain; an atom is checked as soon as its
// last variable is assigned.
inline bool solve_qcsp(const FiniteStructure& b, const QcspInstance& inst) {
    validate(inst, b.signature());
    std::vector<std::string> vars;
    std::vector<Quantifier> quant;
    for (const auto& blk : inst.blocks)
        for (const auto& v : blk.variables) {
            vars.push_back(v);
            quant.push_back(blk.quantifier);
        }
    std::map<std::string, int> pos;
    for (std::size_t i = 0; i < vars.size(); ++i) pos[vars[i]] = static_cast<int>(i);
    struct Check {
        std::size_t rel;
        std::vector<int> args;
    };
    std::vector<std::vector<Check>> due(vars.size() + 1);
    for (const auto& atom : inst.atoms) {
        Check c{*b.signature().index_of(atom.symbol), {}};
        int last = -1;
        for (const auto& v : atom.args) {
            c.args.push_back(pos[v]);
            last = std::max(last, pos[v]);
        }
        due[last + 1].push_back(std::move(c));
    }
    std::vector<Element> value(vars.size(), 0);
    auto satisfied = [&](std::size_t assigned) {
        for (const auto& c : due[assigned]) {
            Tuple t;
            for (int p : c.args) t.push_back(value[p]);
            if (!b.relation(c.rel).contains(t)) return false;
        }
        return true;
    };
    if (!satisfied(0)) return false;
    std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
        if (i == vars.size()) return true;
        const bool ex = quant[i] == Quantifier::exists;
        for (Element e = 0; e < b.size(); ++e) {
            value[i] = e;
            bool ok = satisfied(i + 1) && go(i + 1);
            if (ok == ex) return ex;
        }
        return !ex;
    };
    return go(0);
}

// ---- quantified 3-CNF ------------------------------------------------------

inline bool solve_qbf3(const Qbf3Instance& inst) {
    validate(inst);
    std::vector<int> order;
    std::vector<Quantifier> quant;
    for (const auto& blk : inst.blocks)
        for (int v : blk.variables) {
            order.push_back(v);
            quant.push_back(blk.quantifier);
        }
    std::vector<int> value(inst.num_vars + 1, -1);
    // false if some clause has all literals assigned and false
    auto consistent = [&]() {
        for (const auto& c : inst.clauses) {
            bool open = false, sat = false;
            for (int l : c) {
                int v = value[std::abs(l)];
                if (v < 0) open = true;
                else if ((v == 1) == (l > 0)) sat = true;
            }
            if (!sat && !open) return false;
        }
        return true;
    };
    std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
        if (!consistent()) return false;
        if (i == order.size()) return true;
        const bool ex = quant[i] == Quantifier::exists;
        for (int bit = 0; bit < 2; ++bit) {
            value[order[i]] = bit;
            bool r = go(i + 1);
            value[order[i]] = -1;
            if (r == ex) return ex;
        }
        return !ex;
    };
    return go(0);
}

} // namespace pohammer
