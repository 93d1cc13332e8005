#pragma once

#include "pohammer/pohammer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace pohammer::cli {

// Exit codes.
inline constexpr int exit_ok = 0;      // success, true, accepted, no counterexample
inline constexpr int exit_false = 1;   // false, rejected, counterexample, pipeline disagreement
inline constexpr int exit_usage = 2;   // usage, parse or precondition error
inline constexpr int exit_budget = 3;  // budget or size cap exhausted

using json = nlohmann::ordered_json;

namespace detail {

inline std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Globals {
    std::uint64_t budget = default_budget;
    std::uint64_t size_cap = default_size_cap;
    bool json_output = false;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;

    [[nodiscard]] McOptions mc() const { return {budget, jobs}; }
};

// What a subcommand hands back: the human text, the JSON mirror and the code.
struct Outcome {
    std::string text;
    json report = json::object();
    int code = exit_ok;
};

inline json structure_json(const FiniteStructure& a) {
    json rels = json::object();
    for (std::size_t r = 0; r < a.signature().size(); ++r) {
        json ts = json::array();
        for (const auto& t : a.relation(r)) ts.push_back(t);
        rels[a.signature()[r].name] = ts;
    }
    json sig = json::array();
    for (const auto& s : a.signature()) sig.push_back({{"name", s.name}, {"arity", s.arity}});
    return {{"signature", sig}, {"size", a.size()}, {"relations", rels}};
}

inline json trace_json(const TraceNode& node) {
    json j{{"label", node.label}, {"status", status_name(node.status)}};
    if (node.label == "leaf") {
        j["leaf"] = node.leaf;
        j["clauses"] = node.clauses;
    }
    json cs = json::array();
    for (const auto& c : node.children) cs.push_back(trace_json(c));
    if (!cs.empty()) j["children"] = cs;
    return j;
}

inline std::string bool_text(bool b) { return b ? "true" : "false"; }

inline json optional_bool(const std::optional<bool>& b) { return b ? json(*b) : json(nullptr); }

// Formula from a file; the signature is inferred unless given.
inline ParsedFormula load_formula(const std::string& path, const std::optional<std::string>& signature) {
    const std::string text = read_input(path);
    if (signature) {
        Signature sig = parse_signature(*signature);
        return {parse_formula(text, sig), sig};
    }
    return parse_formula(text);
}

inline Formula cnf_prenex(const Formula& f, std::uint64_t cap) {
    return qf_normalize(to_prenex(f), NormalForm::cnf, cap);
}

} // namespace detail

// Runs one command line (without the program name).  Output goes to out,
// diagnostics to err; the return value is the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    using detail::Outcome;
    CLI::App app{"pohammer: second-order sentence transformations, recognizers, reductions and oracles", "pohammer"};
    app.require_subcommand(1);
    detail::Globals g;
    app.add_option("--budget", g.budget, "model-checking budget in game-tree nodes")->capture_default_str();
    app.add_option("--size-cap", g.size_cap, "clause cap for CNF/DNF conversion")->capture_default_str();
    app.add_flag("--json", g.json_output, "print a JSON report");
    app.add_option("--seed", g.seed, "seed for randomized modes");
    app.add_option("--jobs", g.jobs, "worker threads for model checking and closure checks")->capture_default_str();

    std::function<Outcome()> action;
    auto text_formula = [](const Formula& f) { return serialize_formula(f) + "\n"; };

    // parse
    auto* parse = app.add_subcommand("parse", "parse a file and print its canonical form");
    std::string parse_kind = "formula", parse_file, parse_template, parse_shape;
    std::optional<std::string> parse_sig;
    parse->add_option("--kind", parse_kind, "formula | structure | qcsp | qdimacs")
        ->check(CLI::IsMember({"formula", "structure", "qcsp", "qdimacs"}))
        ->capture_default_str();
    parse->add_option("--signature", parse_sig, "signature for formulas, e.g. \"E/2 P/1\"");
    parse->add_option("--template", parse_template, "template structure for qcsp instances");
    parse->add_option("--shape", parse_shape, "expected qdimacs prefix, e.g. AE");
    parse->add_option("file", parse_file, "input file or -")->required();
    parse->callback([&] {
        action = [&]() -> Outcome {
            Outcome o;
            if (parse_kind == "formula") {
                auto pf = detail::load_formula(parse_file, parse_sig);
                o.text = text_formula(pf.formula);
                o.report = {{"formula", serialize_formula(pf.formula)}, {"signature", serialize_signature(pf.signature)}};
            } else if (parse_kind == "structure") {
                auto a = parse_structure(detail::read_input(parse_file));
                o.text = serialize_structure(a);
                o.report = detail::structure_json(a);
            } else if (parse_kind == "qcsp") {
                if (parse_template.empty()) throw PreconditionError("--template is required for qcsp instances");
                auto b = parse_structure(detail::read_input(parse_template));
                auto inst = parse_qcsp(detail::read_input(parse_file), b.signature());
                o.text = serialize_qcsp(inst);
                o.report = {{"instance", o.text}, {"prefix", prefix_string(inst.prefix())}};
            } else {
                std::optional<Prefix> shape;
                if (!parse_shape.empty()) shape = parse_prefix(parse_shape);
                auto inst = parse_qdimacs3(detail::read_input(parse_file), shape);
                o.text = serialize_qdimacs3(inst);
                o.report = {{"instance", o.text}, {"prefix", prefix_string(inst.prefix())}};
            }
            return o;
        };
    });

    // normalize
    auto* normalize = app.add_subcommand("normalize", "rewrite a sentence into a normal form");
    std::string norm_file;
    std::optional<std::string> norm_sig;
    bool nnf = false, prenex = false, cnf = false, dnf = false, dual = false;
    auto* g_nnf = normalize->add_flag("--nnf", nnf, "negation normal form");
    auto* g_prenex = normalize->add_flag("--prenex", prenex, "prenex form");
    auto* g_cnf = normalize->add_flag("--cnf", cnf, "prenex form with a CNF matrix");
    auto* g_dnf = normalize->add_flag("--dnf", dnf, "prenex form with a DNF matrix");
    auto* g_dual = normalize->add_flag("--dual", dual, "dualized SO prefix with the negated body");
    for (auto* a : {g_nnf, g_prenex, g_cnf, g_dnf, g_dual})
        for (auto* b : {g_nnf, g_prenex, g_cnf, g_dnf, g_dual})
            if (a != b) a->excludes(b);
    normalize->add_option("--signature", norm_sig, "signature, e.g. \"E/2 P/1\"");
    normalize->add_option("file", norm_file, "formula file or -")->required();
    normalize->callback([&] {
        action = [&]() -> Outcome {
            auto f = detail::load_formula(norm_file, norm_sig).formula;
            Formula r;
            std::string mode;
            bool hoisted = false;
            if (nnf) {
                r = to_nnf(f);
                mode = "nnf";
            } else if (cnf || dnf) {
                r = qf_normalize(to_prenex(f), cnf ? NormalForm::cnf : NormalForm::dnf, g.size_cap);
                mode = cnf ? "cnf" : "dnf";
            } else if (dual) {
                r = dual_negate(f);
                mode = "dual";
            } else if (prenex) {
                auto rep = to_prenex_report(f);
                r = rep.formula;
                hoisted = rep.so_hoisted_past_fo;
                mode = "prenex";
            } else {
                throw PreconditionError("normalize needs one of --nnf --prenex --cnf --dnf --dual");
            }
            Outcome o;
            o.text = text_formula(r);
            o.report = {{"mode", mode}, {"formula", serialize_formula(r)}};
            if (mode == "prenex") o.report["so_hoisted_past_fo"] = hoisted;
            return o;
        };
    });

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "run a syntactic class recognizer");
    std::string class_file, class_name_opt;
    std::optional<std::string> class_sig;
    classify_cmd->add_option("--class", class_name_opt, "positive | negative | exists-guarded | forall-restricted")
        ->required();
    classify_cmd->add_option("--signature", class_sig, "signature, e.g. \"E/2 P/1\"");
    classify_cmd->add_option("file", class_file, "formula file or -")->required();
    classify_cmd->callback([&] {
        action = [&]() -> Outcome {
            auto cls = parse_class_name(class_name_opt);
            auto f = detail::load_formula(class_file, class_sig).formula;
            auto v = classify(f, cls, g.size_cap);
            Outcome o;
            o.text = class_name(cls) + ": " + status_name(v.status) + "\n" + render_trace(v.trace);
            o.report = {{"class", class_name(cls)}, {"status", status_name(v.status)}, {"trace", detail::trace_json(v.trace)}};
            if (v.failing_clause) {
                const auto& fc = *v.failing_clause;
                o.text += "failing clause: " + fc.clause + "\n";
                if (!fc.variable.empty()) o.text += "unguarded variable: " + fc.variable + "\n";
                if (!fc.literal.empty()) o.text += "offending literal: " + fc.literal + "\n";
                o.report["failing_clause"] = {{"clause", fc.clause}, {"variable", fc.variable}, {"literal", fc.literal}};
            }
            if (v.blowup_note) {
                o.text += "blow-up: " + *v.blowup_note + "\n";
                o.report["blowup"] = *v.blowup_note;
            }
            o.code = v.status == VerdictStatus::accepted ? exit_ok
                     : v.status == VerdictStatus::rejected ? exit_false
                                                           : exit_budget;
            return o;
        };
    });

    // transform
    auto* transform = app.add_subcommand("transform", "apply a source-to-source transformation");
    std::string tr_file, tr_kind;
    std::optional<std::string> tr_sig;
    bool tr_force = false;
    transform->add_option("--kind", tr_kind, "sup | shom | restrict:U | hammer")->required();
    transform->add_flag("--force", tr_force, "hammer without running the recognizers");
    transform->add_option("--signature", tr_sig, "signature, e.g. \"E/2 P/1\"");
    transform->add_option("file", tr_file, "formula file or -")->required();
    transform->callback([&] {
        action = [&]() -> Outcome {
            auto f = detail::load_formula(tr_file, tr_sig).formula;
            Outcome o;
            Formula r;
            if (tr_kind == "sup") {
                r = sup_transform(detail::cnf_prenex(f, g.size_cap));
            } else if (tr_kind == "shom") {
                r = shom_transform(detail::cnf_prenex(f, g.size_cap));
            } else if (tr_kind.rfind("restrict:", 0) == 0) {
                std::string u = tr_kind.substr(9);
                if (!pohammer::detail::is_identifier(u)) throw PreconditionError("bad restriction symbol '" + u + "'");
                r = restrict_to(f, u);
            } else if (tr_kind == "hammer") {
                auto h = csp_hammer(f, tr_force, g.size_cap);
                r = h.sentence;
                o.report["neq_symbol"] = h.neq_symbol;
            } else {
                throw PreconditionError("unknown transform kind '" + tr_kind + "'");
            }
            o.text = text_formula(r);
            o.report["kind"] = tr_kind;
            o.report["formula"] = serialize_formula(r);
            return o;
        };
    });

    // mc
    auto* mc = app.add_subcommand("mc", "model-check a sentence on a structure");
    std::string mc_structure, mc_formula;
    bool mc_witness = false;
    mc->add_option("--structure", mc_structure, "structure file or -")->required();
    mc->add_option("--formula", mc_formula, "formula file or -")->required();
    mc->add_flag("--witness", mc_witness, "print the leading existential SO choices");
    mc->callback([&] {
        action = [&]() -> Outcome {
            auto a = parse_structure(detail::read_input(mc_structure));
            auto f = parse_formula(detail::read_input(mc_formula), a.signature());
            auto rep = mc_so_report(a, f, g.mc());
            Outcome o;
            o.text = detail::bool_text(rep.value) + "\n";
            for (const auto& w : rep.warnings) o.text += "warning: " + w + "\n";
            o.report = {{"value", rep.value}, {"nodes", rep.nodes}, {"warnings", rep.warnings}};
            if (mc_witness && rep.value && f->kind == Kind::exists_so) {
                auto w = mc_so_witness(a, f, g.mc());
                json ws = json::array();
                for (const auto& s : *w) {
                    std::string line = s.var.name + ":";
                    json ts = json::array();
                    for (const auto& t : s.tuples) {
                        line += " (";
                        for (std::size_t i = 0; i < t.size(); ++i) line += (i ? "," : "") + std::to_string(t[i]);
                        line += ")";
                        ts.push_back(t);
                    }
                    o.text += line + "\n";
                    ws.push_back({{"variable", s.var.name}, {"tuples", ts}});
                }
                o.report["witness"] = ws;
            }
            o.code = rep.value ? exit_ok : exit_false;
            return o;
        };
    });

    // solve-qcsp
    auto* sq = app.add_subcommand("solve-qcsp", "decide a QCSP instance over a template");
    std::string sq_template, sq_file;
    sq->add_option("--template", sq_template, "template structure file")->required();
    sq->add_option("file", sq_file, "instance file or -")->required();
    sq->callback([&] {
        action = [&]() -> Outcome {
            auto b = parse_structure(detail::read_input(sq_template));
            auto inst = parse_qcsp(detail::read_input(sq_file), b.signature());
            bool v = solve_qcsp(b, inst);
            return Outcome{detail::bool_text(v) + "\n", {{"value", v}}, v ? exit_ok : exit_false};
        };
    });

    // solve-qbf3
    auto* sb = app.add_subcommand("solve-qbf3", "decide a quantified 3-CNF instance");
    std::string sb_file, sb_shape;
    sb->add_option("--shape", sb_shape, "expected prefix, e.g. AE");
    sb->add_option("file", sb_file, "QDIMACS file or -")->required();
    sb->callback([&] {
        action = [&]() -> Outcome {
            std::optional<Prefix> shape;
            if (!sb_shape.empty()) shape = parse_prefix(sb_shape);
            auto inst = parse_qdimacs3(detail::read_input(sb_file), shape);
            bool v = solve_qbf3(inst);
            return Outcome{detail::bool_text(v) + "\n", {{"value", v}}, v ? exit_ok : exit_false};
        };
    });

    // build-phib
    auto* bpb = app.add_subcommand("build-phib", "build the QCSP reduction sentence for a template");
    std::string bpb_template, bpb_prefix, bpb_variant = "strict-choice", bpb_out;
    bool bpb_hammered = false;
    bpb->add_option("--template", bpb_template, "template structure file")->required();
    bpb->add_option("--prefix", bpb_prefix, "block quantifiers, e.g. AE")->required();
    bpb->add_option("--variant", bpb_variant, "strict-choice | verbatim")
        ->check(CLI::IsMember({"strict-choice", "verbatim"}))
        ->capture_default_str();
    bpb->add_flag("--hammered", bpb_hammered, "print the hammered sentence instead");
    bpb->add_option("--out", bpb_out, "write the kit files into this directory");
    bpb->callback([&] {
        action = [&]() -> Outcome {
            auto b = parse_structure(detail::read_input(bpb_template));
            auto kit = build_phi_B(b, parse_prefix(bpb_prefix),
                                   bpb_variant == "verbatim" ? PhiBVariant::verbatim : PhiBVariant::strict_choice);
            if (!bpb_out.empty()) write_kit(bpb_out, kit);
            Outcome o;
            o.text = text_formula(bpb_hammered ? kit.hammered() : kit.phi_B);
            o.report = {{"phi_B", serialize_formula(kit.phi_B)},
                        {"hammered", serialize_formula(kit.hammered())},
                        {"signature", serialize_signature(kit.signature)},
                        {"neq_symbol", kit.hammer.neq_symbol},
                        {"markers", kit.marker_symbols}};
            return o;
        };
    });

    // build-phistar
    auto* bps = app.add_subcommand("build-phistar", "build the quantified 3-CNF reduction sentence");
    int bps_n = 1;
    std::string bps_variant = "committed", bps_out;
    bool bps_hammered = false;
    bps->add_option("--n", bps_n, "number of forall-exists rounds")->capture_default_str();
    bps->add_option("--variant", bps_variant, "committed | chained | verbatim")
        ->check(CLI::IsMember({"committed", "chained", "verbatim"}))
        ->capture_default_str();
    bps->add_flag("--hammered", bps_hammered, "print the hammered dual instead");
    bps->add_option("--out", bps_out, "write the kit files into this directory");
    bps->callback([&] {
        action = [&]() -> Outcome {
            auto kit = build_phi_star(bps_n, parse_phi_star_variant(bps_variant));
            if (!bps_out.empty()) write_kit(bps_out, kit);
            Outcome o;
            o.text = text_formula(bps_hammered ? kit.dual_hammered() : kit.phi_star);
            o.report = {{"phi_star", serialize_formula(kit.phi_star)},
                        {"dual_hammered", serialize_formula(kit.dual_hammered())},
                        {"signature", serialize_signature(kit.signature)},
                        {"neq_symbol", kit.hammer.neq_symbol}};
            return o;
        };
    });

    // encode and pipeline share their inputs
    struct ReductionInput {
        std::string qcsp, qbf3, templ, variant;
        int n = 0;
    };
    ReductionInput enc, pipe;
    auto add_reduction_options = [](CLI::App* cmd, ReductionInput& in) {
        auto* q = cmd->add_option("--qcsp", in.qcsp, "QCSP instance file");
        auto* b = cmd->add_option("--qbf3", in.qbf3, "QDIMACS file");
        q->excludes(b);
        cmd->add_option("--template", in.templ, "template structure (with --qcsp)");
        cmd->add_option("--n", in.n, "rounds (with --qbf3; default: from the prefix)");
        cmd->add_option("--variant", in.variant, "reduction variant (see build-phib / build-phistar)");
    };
    auto qcsp_kit = [&](const ReductionInput& in, QcspInstance& inst) {
        if (in.templ.empty()) throw PreconditionError("--template is required with --qcsp");
        auto b = parse_structure(detail::read_input(in.templ));
        inst = parse_qcsp(detail::read_input(in.qcsp), b.signature());
        return build_phi_B(b, inst.prefix(), in.variant == "verbatim" ? PhiBVariant::verbatim : PhiBVariant::strict_choice);
    };
    auto qbf3_input = [&](const ReductionInput& in) {
        auto inst = parse_qdimacs3(detail::read_input(in.qbf3));
        int n = in.n > 0 ? in.n : static_cast<int>(inst.blocks.size()) / 2;
        if (!has_forall_exists_shape(inst.prefix(), n))
            throw PreconditionError("prefix " + prefix_string(inst.prefix()) + " is not of the form (AE)^n");
        return std::pair{inst, n};
    };

    auto* encode = app.add_subcommand("encode", "encode an instance as a structure");
    add_reduction_options(encode, enc);
    encode->callback([&] {
        action = [&]() -> Outcome {
            FiniteStructure a;
            if (!enc.qcsp.empty()) {
                QcspInstance inst;
                auto kit = qcsp_kit(enc, inst);
                a = encode_qcsp_instance(inst, kit);
            } else if (!enc.qbf3.empty()) {
                auto [inst, n] = qbf3_input(enc);
                a = encode_qbf3_instance(inst, n);
            } else {
                throw PreconditionError("encode needs --qcsp or --qbf3");
            }
            return Outcome{serialize_structure(a), detail::structure_json(a), exit_ok};
        };
    });

    auto* pipeline = app.add_subcommand("pipeline", "run a reduction pipeline and compare its legs");
    add_reduction_options(pipeline, pipe);
    pipeline->callback([&] {
        action = [&]() -> Outcome {
            PipelineResult r;
            if (!pipe.qcsp.empty()) {
                QcspInstance inst;
                auto kit = qcsp_kit(pipe, inst);
                r = run_qcsp_pipeline(inst, kit, g.mc());
            } else if (!pipe.qbf3.empty()) {
                auto [inst, n] = qbf3_input(pipe);
                auto kit = build_phi_star(n, parse_phi_star_variant(pipe.variant));
                r = run_qbf3_pipeline(inst, kit, g.mc());
            } else {
                throw PreconditionError("pipeline needs --qcsp or --qbf3");
            }
            auto show = [](const std::optional<bool>& b) { return b ? detail::bool_text(*b) : std::string("unknown"); };
            Outcome o;
            o.text = "direct: " + show(r.direct) + "\nvia_formula: " + show(r.via_formula) +
                     "\nvia_hammer: " + show(r.via_hammer) + "\n";
            for (const auto& e : r.errors) o.text += "error: " + e + "\n";
            o.text += std::string("contract: ") + (r.agree() ? "holds" : r.complete() ? "violated" : "unknown") + "\n";
            o.report = {{"direct", detail::optional_bool(r.direct)},
                        {"via_formula", detail::optional_bool(r.via_formula)},
                        {"via_hammer", detail::optional_bool(r.via_hammer)},
                        {"hammer_negates", r.hammer_negates},
                        {"contract", r.agree()},
                        {"errors", r.errors}};
            o.code = r.agree() ? exit_ok : r.complete() ? exit_false : exit_budget;
            return o;
        };
    });

    // verify-closure
    auto* vc = app.add_subcommand("verify-closure", "search a bounded family for a closure counterexample");
    std::string vc_kind, vc_file;
    std::optional<std::string> vc_sig;
    int vc_max = 2, vc_min = 0;
    std::optional<std::size_t> vc_random;
    bool vc_dedupe = false;
    std::uint64_t vc_ceiling = default_enumeration_ceiling;
    vc->add_option("--kind", vc_kind, "closure kind, e.g. disjoint-unions")->required();
    vc->add_option("--max-size", vc_max, "largest domain size")->capture_default_str();
    vc->add_option("--min-size", vc_min, "smallest domain size")->capture_default_str();
    vc->add_option("--random", vc_random, "sample this many structures (needs --seed)");
    vc->add_flag("--dedupe", vc_dedupe, "keep one structure per isomorphism class (size <= 4)");
    vc->add_option("--ceiling", vc_ceiling, "largest exhaustive family")->capture_default_str();
    vc->add_option("--signature", vc_sig, "family signature (default: symbols of the sentence)");
    vc->add_option("file", vc_file, "formula file or -")->required();
    vc->callback([&] {
        action = [&]() -> Outcome {
            auto kind = parse_closure_kind(vc_kind);
            auto pf = detail::load_formula(vc_file, vc_sig);
            FamilySpec fam;
            fam.signature = pf.signature;
            fam.max_size = vc_max;
            fam.min_size = vc_min;
            fam.dedupe_isomorphic = vc_dedupe;
            fam.ceiling = vc_ceiling;
            if (vc_random) {
                if (!g.seed) throw PreconditionError("--random needs an explicit --seed");
                fam.random = RandomFamily{*g.seed, *vc_random, vc_min, 0.5};
            }
            auto rep = check_closure(pf.formula, kind, fam, {g.mc(), g.jobs});
            Outcome o;
            o.text = closure_kind_name(kind) + ": " + verdict_name(rep.verdict) + "\n";
            o.text += "structures: " + std::to_string(rep.structures_examined) +
                      ", pairs: " + std::to_string(rep.pairs_examined) +
                      ", models: " + std::to_string(rep.models) +
                      ", indeterminate: " + std::to_string(rep.indeterminate_entries) + "\n";
            o.report = {{"kind", closure_kind_name(kind)},
                        {"verdict", verdict_name(rep.verdict)},
                        {"structures_examined", rep.structures_examined},
                        {"pairs_examined", rep.pairs_examined},
                        {"models", rep.models},
                        {"indeterminate", rep.indeterminate_entries}};
            if (rep.witness) {
                const auto& w = *rep.witness;
                o.text += "A:\n" + serialize_structure(w.a) + "B:\n" + serialize_structure(w.b);
                json m = json::array();
                if (!w.mapping.empty()) {
                    o.text += "mapping:";
                    for (auto e : w.mapping) o.text += " " + std::to_string(e);
                    o.text += "\n";
                    m = w.mapping;
                }
                o.report["witness"] = {{"a", detail::structure_json(w.a)},
                                       {"b", detail::structure_json(w.b)},
                                       {"mapping", m}};
            }
            o.code = rep.verdict == ClosureVerdict::no_counterexample_up_to_bound ? exit_ok
                     : rep.verdict == ClosureVerdict::counterexample             ? exit_false
                                                                                 : exit_budget;
            return o;
        };
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        Outcome o = action();
        if (g.json_output) {
            o.report["exit_code"] = o.code;
            out << o.report.dump(2) << "\n";
        } else {
            out << o.text;
        }
        return o.code;
    } catch (const ResourceError& e) {
        err << "resource: " << e.what() << "\n";
        return exit_budget;
    } catch (const BlowupError& e) {
        err << "blow-up: " << e.what() << "\n";
        return exit_budget;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }
}

} // namespace pohammer::cli
