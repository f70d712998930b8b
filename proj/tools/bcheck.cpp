// bcheck: command-line front end for the behaviour type checker.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bcheck/congruence.hpp"
#include "bcheck/oracle.hpp"
#include "bcheck/parser.hpp"
#include "bcheck/printer.hpp"
#include "bcheck/selftest.hpp"
#include "bcheck/typing.hpp"

namespace {

using namespace bcheck;

enum Exit { kOk = 0, kNo = 1, kUsage = 2 };

bool color() {
    const char* v = std::getenv("BCHECK_COLOR");
    return v && std::string(v) == "1";
}

std::string paint(const std::string& s, const char* code) {
    return color() ? std::string("\x1b[") + code + "m" + s + "\x1b[0m" : s;
}

struct Source {
    std::string path;
    std::string text;
};

struct Failed {
    int code;
};

Source read_source(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << paint("error:", "1;31") << " cannot read " << path << "\n";
        throw Failed{kUsage};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return {path, buf.str()};
}

std::string line_col(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    std::size_t line = 1 + std::count(text.begin(), text.begin() + offset, '\n');
    std::size_t start = offset == 0 ? std::string::npos : text.rfind('\n', offset - 1);
    std::size_t col = offset - (start == std::string::npos ? 0 : start + 1) + 1;
    return std::to_string(line) + ":" + std::to_string(col);
}

std::string where(const Source& src, SourceSpan span) {
    return src.path + ":" + line_col(src.text, span.begin) + "-" + line_col(src.text, span.end);
}

[[noreturn]] void syntax_failure(const Source& src, const SyntaxError& e) {
    std::cerr << where(src, e.span()) << ": " << paint("syntax error:", "1;31") << " " << e.what();
    if (!e.expected().empty()) {
        std::cerr << " (expected";
        for (const auto& x : e.expected()) std::cerr << " " << x;
        std::cerr << ")";
    }
    std::cerr << "\n";
    throw Failed{kUsage};
}

template <class F>
auto parsing(const Source& src, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const SyntaxError& e) {
        syntax_failure(src, e);
    } catch (const DuplicateDeclError& e) {
        std::cerr << src.path << ": " << paint("error:", "1;31") << " " << e.what() << "\n";
        throw Failed{kUsage};
    }
}

ParsedBehaviour load_program(const std::string& path, PathTable* paths) {
    Source src = read_source(path);
    return parsing(src, [&] { return parse_behaviour_with_spans(src.text, paths); });
}

struct CheckFlags {
    std::string ctx_file;
    std::string program_file;
    bool derive = false;
    bool core = false;
    bool paths = false;
};

int cmd_check(const CheckFlags& f) {
    PathTable table;
    PathTable* paths = f.paths ? &table : nullptr;
    Source prog = read_source(f.program_file);
    ParsedBehaviour parsed = parsing(prog, [&] { return parse_behaviour_with_spans(prog.text, paths); });
    Source ctx = read_source(f.ctx_file);
    Context g = parsing(ctx, [&] { return parse_context(ctx.text, paths); });
    try {
        CheckResult r = check_behaviour(g, parsed.behaviour, CheckOptions{f.core});
        std::cout << pretty_context(r.output) << "\n";
        if (f.derive) std::cout << serialize(r.derivation);
        for (const auto& p : table.paths())
            std::cout << "# x" << table.mapping().at(p).index << " = " << p.dotted() << "\n";
        return kOk;
    } catch (const TypeError& e) {
        std::cout << to_string(e.kind()) << ": " << e.detail() << "\n";
        Position at = e.position();
        while (!at.empty() && !parsed.spans.count(at)) at.pop_back();
        if (auto it = parsed.spans.find(at); it != parsed.spans.end()) {
            const SourceSpan& s = it->second;
            std::cout << "  at " << where(prog, s) << " (" << to_string(e.position()) << "): "
                      << prog.text.substr(s.begin, s.end - s.begin) << "\n";
        }
        return kNo;
    }
}

int cmd_congruent(const std::string& a, const std::string& b) {
    Behaviour b1 = load_program(a, nullptr).behaviour;
    Behaviour b2 = load_program(b, nullptr).behaviour;
    auto trace = congruent(b1, b2);
    if (!trace) {
        std::cout << "not congruent\n";
        return kNo;
    }
    std::cout << serialize(*trace);
    return kOk;
}

int cmd_normalize(const std::string& path) {
    std::cout << pretty_behaviour(normalize(load_program(path, nullptr).behaviour)) << "\n";
    return kOk;
}

// Corpus caps per suite; sizes past these take minutes or more.
constexpr std::size_t kRoundTripCap = 8;
constexpr std::size_t kNormalizationCap = 8;
constexpr std::size_t kOracleCap = 6;
constexpr std::size_t kCongruenceCap = 4;
constexpr std::size_t kTransportCap = 5;
constexpr std::size_t kValidityCap = 5;

void report(const Tally& t, bool gating, bool& ok) {
    std::cout << t.name << ": checked " << t.checked << ", failures " << t.failures;
    if (!gating) std::cout << " (informational)";
    std::cout << "\n";
    if (!t.passed()) {
        std::cout << "  counterexample: " << t.counterexample << "\n";
        if (gating) ok = false;
    }
}

int cmd_selftest(std::size_t n, const std::string& fault_name) {
    Fault fault = Fault::None;
    for (Fault f : {Fault::SwapIfBranchContexts, Fault::BreakSeqThreading, Fault::ParCommNoSwap})
        if (fault_name == to_string(f)) fault = f;
    auto pool = standard_context_pool();
    bool ok = true;
    if (fault != Fault::None) {
        report(validity_suite(std::min(n, kValidityCap), pool, fault), true, ok);
        return ok ? kOk : kNo;
    }
    report(roundtrip_suite(std::min(n, kRoundTripCap), pool), true, ok);
    report(normalization_suite(std::min(n, kNormalizationCap)), true, ok);
    report(oracle_suite(std::min(n, kOracleCap), pool), true, ok);
    report(congruence_suite(std::min(n, kCongruenceCap)), true, ok);
    report(validity_suite(std::min(n, kValidityCap), pool), true, ok);
    for (Fault f : {Fault::SwapIfBranchContexts, Fault::BreakSeqThreading, Fault::ParCommNoSwap})
        report(fault_suite(std::min(n, kValidityCap), pool, f), true, ok);
    report(transport_suite(std::min(n, kTransportCap), pool, StepScope::Root), true, ok);
    report(transport_suite(std::min(n, kTransportCap), pool, StepScope::Nested), false, ok);
    return ok ? kOk : kNo;
}

int run(int argc, char** argv) {
    CLI::App app{"Static type checker for behaviours"};
    app.require_subcommand(1);

    CheckFlags check;
    auto* c = app.add_subcommand("check", "Type a program under a context");
    c->add_option("context", check.ctx_file, "Context file")->required();
    c->add_option("program", check.program_file, "Program file")->required();
    c->add_flag("--derive", check.derive, "Print the derivation");
    c->add_flag("--paper-core", check.core, "Only nil, if, while, sequence and parallel");
    c->add_flag("--paths", check.paths, "Dotted variable paths instead of x0, x1, ...");

    CheckFlags derive;
    auto* d = app.add_subcommand("derive", "Same as check --derive");
    d->add_option("context", derive.ctx_file, "Context file")->required();
    d->add_option("program", derive.program_file, "Program file")->required();
    d->add_flag("--paper-core", derive.core, "Only nil, if, while, sequence and parallel");
    d->add_flag("--paths", derive.paths, "Dotted variable paths instead of x0, x1, ...");

    std::string left, right;
    auto* k = app.add_subcommand("congruent", "Print a congruence trace between two programs");
    k->add_option("a", left, "First program")->required();
    k->add_option("b", right, "Second program")->required();

    std::string program;
    auto* nz = app.add_subcommand("normalize", "Print the normal form of a program");
    nz->add_option("program", program, "Program file")->required();

    std::size_t max_size = 0;
    std::string fault;
    auto* s = app.add_subcommand("selftest", "Run the property suites over the enumerated corpus");
    s->add_option("--max-size", max_size, "Largest behaviour size")->required()->check(CLI::Range(0, 8));
    s->add_option("--inject-fault", fault)
        ->check(CLI::IsMember({"swap-if", "break-seq", "par-comm-no-swap"}))
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        app.exit(e);
        return kOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*c) return cmd_check(check);
        if (*d) {
            derive.derive = true;
            return cmd_check(derive);
        }
        if (*k) return cmd_congruent(left, right);
        if (*nz) return cmd_normalize(program);
        return cmd_selftest(max_size, fault);
    } catch (const Failed& f) {
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << paint("error:", "1;31") << " " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    return run(argc, argv);
}
