#pragma once

#include "pohammer/errors.hpp"
#include "pohammer/formula.hpp"
#include "pohammer/model_check.hpp"
#include "pohammer/structure.hpp"
#include "pohammer/text_io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace pohammer {

enum class HomKind { any, injective, surjective, bijective };

using Mapping = std::vector<Element>;  // image of every element of the source

// Independent per-tuple check of the homomorphism condition and of the kind.
inline bool is_homomorphism(const FiniteStructure& a, const FiniteStructure& b, const Mapping& h,
                            HomKind kind = HomKind::any) {
    if (!(a.signature() == b.signature()) || static_cast<int>(h.size()) != a.size()) return false;
    for (auto e : h)
        if (e < 0 || e >= b.size()) return false;
    std::set<Element> image(h.begin(), h.end());
    const bool injective = static_cast<int>(image.size()) == a.size();
    const bool surjective = static_cast<int>(image.size()) == b.size();
    if ((kind == HomKind::injective || kind == HomKind::bijective) && !injective) return false;
    if ((kind == HomKind::surjective || kind == HomKind::bijective) && !surjective) return false;
    for (std::size_t r = 0; r < a.signature().size(); ++r)
        for (const auto& t : a.relation(r)) {
            Tuple img;
            for (auto e : t) img.push_back(h[e]);
            if (!b.relation(r).contains(img)) return false;
        }
    return true;
}

namespace detail {

class HomSearch {
public:
    HomSearch(const FiniteStructure& a, const FiniteStructure& b, HomKind kind) : a_(a), b_(b), kind_(kind) {
        if (!(a.signature() == b.signature())) throw SignatureError("homomorphism between different signatures");
        due_.resize(a.size());
        for (std::size_t r = 0; r < a.signature().size(); ++r)
            for (const auto& t : a.relation(r)) {
                Element last = *std::max_element(t.begin(), t.end());
                due_[last].push_back({r, &t});
            }
        h_.assign(a.size(), -1);
        used_.assign(b.size(), 0);
    }

    // Calls visit for every mapping in lexicographic order of images until it returns false.
    void run(const std::function<bool(const Mapping&)>& visit) {
        const bool inj = kind_ == HomKind::injective || kind_ == HomKind::bijective;
        const bool sur = kind_ == HomKind::surjective || kind_ == HomKind::bijective;
        if (kind_ == HomKind::bijective && a_.size() != b_.size()) return;
        if (inj && a_.size() > b_.size()) return;
        if (sur && a_.size() < b_.size()) return;
        if (a_.size() > 0 && b_.size() == 0) return;
        int covered = 0;
        std::function<bool(int)> go = [&](int i) -> bool {
            if (i == a_.size()) {
                if (sur && covered < b_.size()) return true;
                return visit(h_);
            }
            if (sur && b_.size() - covered > a_.size() - i) return true;
            for (Element e = 0; e < b_.size(); ++e) {
                if (inj && used_[e]) continue;
                h_[i] = e;
                if (!tuples_ok(i)) continue;
                if (used_[e]++ == 0) ++covered;
                bool cont = go(i + 1);
                if (--used_[e] == 0) --covered;
                if (!cont) return false;
            }
            h_[i] = -1;
            return true;
        };
        go(0);
    }

private:
    bool tuples_ok(int i) const {
        for (const auto& [r, t] : due_[i]) {
            Tuple img;
            img.reserve(t->size());
            for (auto e : *t) img.push_back(h_[e]);
            if (!b_.relation(r).contains(img)) return false;
        }
        return true;
    }

    const FiniteStructure& a_;
    const FiniteStructure& b_;
    HomKind kind_;
    std::vector<std::vector<std::pair<std::size_t, const Tuple*>>> due_;
    Mapping h_;
    std::vector<int> used_;
};

} // namespace detail

inline std::vector<Mapping> find_homomorphisms(const FiniteStructure& a, const FiniteStructure& b, HomKind kind,
                                               std::size_t limit = std::numeric_limits<std::size_t>::max()) {
    std::vector<Mapping> out;
    if (limit == 0) return out;
    detail::HomSearch(a, b, kind).run([&](const Mapping& h) {
        out.push_back(h);
        return out.size() < limit;
    });
    return out;
}

inline std::optional<Mapping> find_homomorphism(const FiniteStructure& a, const FiniteStructure& b, HomKind kind) {
    auto hs = find_homomorphisms(a, b, kind, 1);
    if (hs.empty()) return std::nullopt;
    return hs.front();
}

// Injective maps under which A is isomorphic to the induced substructure of B on the image.
inline std::optional<Mapping> find_embedding(const FiniteStructure& a, const FiniteStructure& b) {
    std::optional<Mapping> found;
    detail::HomSearch(a, b, HomKind::injective).run([&](const Mapping& h) {
        std::set<Element> image(h.begin(), h.end());
        for (std::size_t r = 0; r < a.signature().size(); ++r) {
            std::size_t inside = 0;
            for (const auto& t : b.relation(r))
                if (std::all_of(t.begin(), t.end(), [&](Element e) { return image.contains(e); })) ++inside;
            if (inside != a.relation(r).size()) return true;
        }
        found = h;
        return false;
    });
    return found;
}

// ---- enumeration -----------------------------------------------------------

inline constexpr std::uint64_t default_enumeration_ceiling = 5'000'000;

// Minimum serialization over all element permutations (size <= 4).
inline std::string canonical_form(const FiniteStructure& a) {
    if (a.size() > 4) throw PreconditionError("canonical_form is limited to structures of size <= 4");
    std::vector<Element> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::string best;
    bool first = true;
    do {
        std::string s = serialize_structure(permute(a, perm));
        if (first || s < best) best = std::move(s);
        first = false;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

namespace detail {

inline std::uint64_t tuple_count(const Signature& sig, int n) {
    std::uint64_t bits = 0;
    for (const auto& s : sig) bits += int_pow(static_cast<std::uint64_t>(n), s.arity);
    return bits;
}

inline FiniteStructure structure_from_bits(const Signature& sig, int n, const std::function<bool(std::uint64_t)>& bit) {
    std::vector<Relation> rels(sig.size());
    std::uint64_t pos = 0;
    for (std::size_t r = 0; r < sig.size(); ++r) {
        const int k = sig[r].arity;
        const std::uint64_t cells = int_pow(static_cast<std::uint64_t>(n), k);
        for (std::uint64_t c = 0; c < cells; ++c, ++pos) {
            if (!bit(pos)) continue;
            Tuple t(k);
            std::uint64_t rest = c;
            for (int i = k - 1; i >= 0; --i) {
                t[i] = static_cast<Element>(rest % n);
                rest /= n;
            }
            rels[r].insert(std::move(t));
        }
    }
    return FiniteStructure(sig, n, std::move(rels));
}

} // namespace detail

// Number of structures with domain sizes min_size..max_size.
inline std::uint64_t count_structures(const Signature& sig, int max_size, int min_size = 0) {
    std::uint64_t total = 0;
    for (int n = min_size; n <= max_size; ++n) {
        auto bits = detail::tuple_count(sig, n);
        if (bits >= 63) return std::numeric_limits<std::uint64_t>::max();
        total += std::uint64_t{1} << bits;
        if (total >= (std::uint64_t{1} << 62)) return std::numeric_limits<std::uint64_t>::max();
    }
    return total;
}

// Every structure with sizes min_size..max_size exactly once: by size, then by
// the bit mask over tuples (relations in signature order, tuples lexicographic).
inline void for_each_structure(const Signature& sig, int max_size, const std::function<void(const FiniteStructure&)>& visit,
                               std::uint64_t ceiling = default_enumeration_ceiling, int min_size = 0) {
    const auto total = count_structures(sig, max_size, min_size);
    if (total > ceiling)
        throw ResourceError("exhaustive enumeration of " +
                                (total == std::numeric_limits<std::uint64_t>::max() ? std::string("more than 2^62")
                                                                                    : std::to_string(total)) +
                                " structures exceeds the ceiling of " + std::to_string(ceiling),
                            total);
    for (int n = min_size; n <= max_size; ++n) {
        const auto bits = detail::tuple_count(sig, n);
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask)
            visit(detail::structure_from_bits(sig, n, [&](std::uint64_t i) { return (mask >> i) & 1U; }));
    }
}

struct RandomFamily {
    std::uint64_t seed = 0;
    std::size_t count = 0;
    int min_size = 0;
    double density = 0.5;
};

// Seeded i.i.d. sampling: a size uniform in [min_size, max_size], then every
// tuple independently with probability `density`.
inline void for_each_random_structure(const Signature& sig, int max_size, const RandomFamily& params,
                                      const std::function<void(const FiniteStructure&)>& visit) {
    std::mt19937_64 rng(params.seed);
    const auto span = static_cast<std::uint64_t>(max_size - params.min_size + 1);
    const auto threshold = static_cast<std::uint64_t>(params.density * 9007199254740992.0);  // 2^53
    for (std::size_t i = 0; i < params.count; ++i) {
        const int n = params.min_size + static_cast<int>(rng() % span);
        visit(detail::structure_from_bits(sig, n, [&](std::uint64_t) { return (rng() >> 11) < threshold; }));
    }
}

struct FamilySpec {
    Signature signature;
    int max_size = 2;
    std::optional<RandomFamily> random;  // exhaustive when absent
    bool dedupe_isomorphic = false;      // keep the first member of each isomorphism class (size <= 4)
    std::uint64_t ceiling = default_enumeration_ceiling;
    int min_size = 0;
    std::function<bool(const FiniteStructure&)> filter;  // optional
};

inline std::vector<FiniteStructure> enumerate_structures(const FamilySpec& spec) {
    std::vector<FiniteStructure> out;
    std::set<std::string> seen;
    auto keep = [&](const FiniteStructure& a) {
        if (spec.filter && !spec.filter(a)) return;
        if (spec.dedupe_isomorphic && !seen.insert(canonical_form(a)).second) return;
        out.push_back(a);
    };
    if (spec.random)
        for_each_random_structure(spec.signature, spec.max_size, *spec.random, keep);
    else
        for_each_structure(spec.signature, spec.max_size, keep, spec.ceiling, spec.min_size);
    return out;
}

inline std::vector<FiniteStructure> enumerate_structures(const Signature& sig, int max_size) {
    return enumerate_structures(FamilySpec{.signature = sig, .max_size = max_size});
}

// ---- closure oracle --------------------------------------------------------

enum class ClosureKind {
    substructures,
    superstructures,
    homomorphisms,
    inverse_homomorphisms,
    injective_homs,
    inverse_injective_homs,
    surjective_homs,
    inverse_surjective_homs,
    bijective_homs,
    disjoint_unions,
};

inline std::string closure_kind_name(ClosureKind k) {
    static const char* names[] = {"substructures",          "superstructures",        "homomorphisms",
                                  "inverse-homomorphisms",  "injective-homs",         "inverse-injective-homs",
                                  "surjective-homs",        "inverse-surjective-homs", "bijective-homs",
                                  "disjoint-unions"};
    return names[static_cast<int>(k)];
}

inline ClosureKind parse_closure_kind(std::string s) {
    std::replace(s.begin(), s.end(), '_', '-');
    for (int k = 0; k <= static_cast<int>(ClosureKind::disjoint_unions); ++k)
        if (closure_kind_name(static_cast<ClosureKind>(k)) == s) return static_cast<ClosureKind>(k);
    throw PreconditionError("unknown closure kind '" + s + "'");
}

enum class ClosureVerdict { no_counterexample_up_to_bound, counterexample, indeterminate };

inline std::string verdict_name(ClosureVerdict v) {
    switch (v) {
    case ClosureVerdict::no_counterexample_up_to_bound: return "no counterexample up to bound";
    case ClosureVerdict::counterexample: return "counterexample";
    default: return "indeterminate";
    }
}

// Roles of (a, b, mapping) per kind:
//   homomorphism kinds: mapping is a hom a -> b of the kind; forward kinds have
//     a |= f, b |/= f, inverse kinds have b |= f, a |/= f;
//   substructures: a embeds into b via mapping, b |= f, a |/= f;
//   superstructures: a embeds into b via mapping, a |= f, b |/= f;
//   disjoint unions: a |= f, b |= f, a + b |/= f, mapping empty.
struct ClosureWitness {
    FiniteStructure a;
    FiniteStructure b;
    Mapping mapping;
    std::size_t a_index = 0;
    std::size_t b_index = 0;
};

struct ClosureReport {
    ClosureKind kind = ClosureKind::disjoint_unions;
    ClosureVerdict verdict = ClosureVerdict::no_counterexample_up_to_bound;
    std::optional<ClosureWitness> witness;
    std::size_t structures_examined = 0;
    std::uint64_t pairs_examined = 0;
    std::uint64_t indeterminate_entries = 0;  // mc runs that exhausted their budget
    std::size_t models = 0;                   // family members satisfying the sentence
};

struct ClosureOptions {
    McOptions mc;
    unsigned jobs = 1;
};

namespace detail {

struct PairOutcome {
    bool violation = false;
    bool indeterminate = false;
    Mapping mapping;
};

inline PairOutcome check_pair(const Formula& f, ClosureKind kind, const FiniteStructure& a, const FiniteStructure& b,
                              std::optional<bool> ma, std::optional<bool> mb, const McOptions& mc) {
    PairOutcome out;
    auto need = [&](std::optional<bool> va, bool wa, std::optional<bool> vb, bool wb) {
        // true if the premise/conclusion pattern (a == wa, b == wb) is possible
        if ((va && *va != wa) || (vb && *vb != wb)) return false;
        if (!va || !vb) out.indeterminate = true;
        return va && vb;
    };
    auto hom_case = [&](HomKind hk, bool forward) {
        if (!need(ma, forward, mb, !forward)) return;
        if (auto h = find_homomorphism(a, b, hk)) {
            out.violation = true;
            out.mapping = *h;
        }
    };
    switch (kind) {
    case ClosureKind::homomorphisms: hom_case(HomKind::any, true); break;
    case ClosureKind::inverse_homomorphisms: hom_case(HomKind::any, false); break;
    case ClosureKind::injective_homs: hom_case(HomKind::injective, true); break;
    case ClosureKind::inverse_injective_homs: hom_case(HomKind::injective, false); break;
    case ClosureKind::surjective_homs: hom_case(HomKind::surjective, true); break;
    case ClosureKind::inverse_surjective_homs: hom_case(HomKind::surjective, false); break;
    case ClosureKind::bijective_homs: hom_case(HomKind::bijective, true); break;
    case ClosureKind::substructures:
    case ClosureKind::superstructures: {
        const bool sub = kind == ClosureKind::substructures;
        if (!need(ma, !sub, mb, sub)) break;
        if (auto h = find_embedding(a, b)) {
            out.violation = true;
            out.mapping = *h;
        }
        break;
    }
    case ClosureKind::disjoint_unions: {
        if (!need(ma, true, mb, true)) break;
        try {
            if (!mc_so(disjoint_union(a, b), f, mc)) out.violation = true;
        } catch (const ResourceError&) {
            out.indeterminate = true;
        }
        break;
    }
    }
    if (out.violation) out.indeterminate = false;
    return out;
}

} // namespace detail

// Tests the closure implication on all ordered pairs (i, j) of the family
// (i outer).  The reported witness is the first violating pair in that order,
// independently of `jobs`.
inline ClosureReport check_closure(const Formula& f, ClosureKind kind, const std::vector<FiniteStructure>& family,
                                   const ClosureOptions& opts = {}) {
    ClosureReport report;
    report.kind = kind;
    report.structures_examined = family.size();
    std::vector<std::optional<bool>> value(family.size());
    for (std::size_t i = 0; i < family.size(); ++i) {
        try {
            value[i] = mc_so(family[i], f, opts.mc);
            if (*value[i]) ++report.models;
        } catch (const ResourceError&) {
            ++report.indeterminate_entries;
        }
    }
    const std::uint64_t n = family.size();
    const std::uint64_t total = n * n;
    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> best{std::numeric_limits<std::uint64_t>::max()};
    std::atomic<std::uint64_t> indeterminate{0};
    std::mutex mu;
    std::optional<detail::PairOutcome> best_outcome;
    auto worker = [&]() {
        while (true) {
            std::uint64_t p = next.fetch_add(1);
            if (p >= total || p > best.load()) break;
            const std::size_t i = p / n, j = p % n;
            auto out = detail::check_pair(f, kind, family[i], family[j], value[i], value[j], opts.mc);
            if (out.indeterminate) indeterminate.fetch_add(1);
            if (!out.violation) continue;
            std::lock_guard lock(mu);
            if (p < best.load()) {
                best.store(p);
                best_outcome = std::move(out);
            }
        }
    };
    if (opts.jobs <= 1) {
        worker();
    } else {
        std::vector<std::future<void>> fs;
        for (unsigned k = 0; k < opts.jobs; ++k) fs.push_back(std::async(std::launch::async, worker));
        for (auto& fut : fs) fut.get();
    }
    const std::uint64_t b = best.load();
    report.pairs_examined = std::min(total, b == std::numeric_limits<std::uint64_t>::max() ? total : b + 1);
    report.indeterminate_entries += indeterminate.load();
    if (best_outcome) {
        report.verdict = ClosureVerdict::counterexample;
        report.witness = ClosureWitness{family[b / n], family[b % n], best_outcome->mapping, b / n, b % n};
    } else if (report.indeterminate_entries > 0) {
        report.verdict = ClosureVerdict::indeterminate;
    }
    return report;
}

inline ClosureReport check_closure(const Formula& f, ClosureKind kind, const FamilySpec& family,
                                   const ClosureOptions& opts = {}) {
    return check_closure(f, kind, enumerate_structures(family), opts);
}

} // namespace pohammer
