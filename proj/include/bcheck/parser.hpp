#pragma once

// Recursive-descent parsers for program and context files.
//
//   behaviour := seq ("|" behaviour)?          seq := atom (";" seq)?
//   ctxtree   := term ("&" term)*              term := block | "(" ctxtree ")"
//   expr      := or;  or := and ("||" and)*;  and := eq ("&&" eq)*
//   eq        := lt ("==" lt)*;  lt := unary ("<" unary)*
//   unary     := "!" unary | literal | var | "(" expr ")"
//
// `#` starts a comment running to the end of the line.

#include <charconv>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "bcheck/ast.hpp"
#include "bcheck/context.hpp"
#include "bcheck/errors.hpp"

namespace bcheck {

struct ParsedBehaviour {
    Behaviour behaviour;
    /// Source range of every sub-behaviour, keyed by its position.
    std::map<Position, SourceSpan> spans;
};

namespace detail {

enum class TokenKind { Ident, Number, String, Punct, End };

struct Token {
    TokenKind kind;
    std::string text;
    SourceSpan span;
};

inline std::string describe(const Token& t) {
    switch (t.kind) {
        case TokenKind::End: return "end of input";
        case TokenKind::String: return "string literal";
        default: return "'" + t.text + "'";
    }
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_blank();
            if (pos_ >= src_.size()) {
                out.push_back({TokenKind::End, "", {src_.size(), src_.size()}});
                return out;
            }
            out.push_back(next());
        }
    }

private:
    static bool alpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
    static bool digit(char c) { return c >= '0' && c <= '9'; }

    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void skip_blank() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    Token next() {
        std::size_t start = pos_;
        char c = peek();
        if (alpha(c)) {
            while (alpha(peek()) || digit(peek())) ++pos_;
            return {TokenKind::Ident, std::string(src_.substr(start, pos_ - start)), {start, pos_}};
        }
        if (digit(c) || (c == '-' && digit(peek(1)))) return number();
        if (c == '"') return string();
        static constexpr std::string_view kTwo[] = {"==", "&&", "||"};
        for (auto p : kTwo) {
            if (src_.substr(pos_, 2) == p) {
                pos_ += 2;
                return {TokenKind::Punct, std::string(p), {start, pos_}};
            }
        }
        static constexpr std::string_view kOne = "(){}[];|&,:<>@=!.";
        if (kOne.find(c) != std::string_view::npos) {
            ++pos_;
            return {TokenKind::Punct, std::string(1, c), {start, pos_}};
        }
        throw SyntaxError("unexpected character", SourceSpan{start, start + 1});
    }

    Token number() {
        std::size_t start = pos_;
        if (peek() == '-') ++pos_;
        while (digit(peek())) ++pos_;
        if (peek() == '.') {
            ++pos_;
            if (!digit(peek())) throw SyntaxError("malformed number", {start, pos_}, {"digit"});
            while (digit(peek())) ++pos_;
        }
        if (peek() == 'e' || peek() == 'E') {
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            if (!digit(peek())) throw SyntaxError("malformed exponent", {start, pos_}, {"digit"});
            while (digit(peek())) ++pos_;
        }
        if (peek() == 'L') ++pos_;
        if (alpha(peek()) || digit(peek())) throw SyntaxError("malformed number", {start, pos_ + 1});
        return {TokenKind::Number, std::string(src_.substr(start, pos_ - start)), {start, pos_}};
    }

    Token string() {
        std::size_t start = pos_++;
        std::string value;
        while (true) {
            if (pos_ >= src_.size()) throw SyntaxError("unterminated string literal", {start, pos_}, {"\""});
            char c = src_[pos_++];
            if (c == '"') break;
            if (c != '\\') {
                value += c;
                continue;
            }
            char e = peek();
            ++pos_;
            switch (e) {
                case '"': value += '"'; break;
                case '\\': value += '\\'; break;
                case 'n': value += '\n'; break;
                case 't': value += '\t'; break;
                default: throw SyntaxError("unknown escape sequence", {pos_ - 2, pos_});
            }
        }
        return {TokenKind::String, std::move(value), {start, pos_}};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

/// Spans of a behaviour and its children, children ordered as child_selectors.
struct SpanNode {
    SourceSpan span;
    std::vector<SpanNode> children;
};

struct Parsed {
    Behaviour behaviour;
    SpanNode spans;
};

class Parser {
public:
    Parser(std::string_view src, PathTable* paths) : tokens_(Lexer(src).run()), paths_(paths) {}

    Parsed behaviour_file() {
        Parsed p = behaviour();
        expect_end();
        return p;
    }

    Context context_file() {
        Context g = ctxtree();
        expect_end();
        return g;
    }

    Expr expr_file() {
        Expr e = expr();
        expect_end();
        return e;
    }

private:
    const Token& cur() const { return tokens_[pos_]; }
    const Token& ahead(std::size_t n) const { return tokens_[std::min(pos_ + n, tokens_.size() - 1)]; }

    bool at(std::string_view punct) const { return cur().kind == TokenKind::Punct && cur().text == punct; }
    bool at_ident(std::string_view word) const { return cur().kind == TokenKind::Ident && cur().text == word; }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        std::string msg = "expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) msg += i + 1 == expected.size() ? " or " : ", ";
            msg += expected[i];
        }
        msg += ", found " + describe(cur());
        throw SyntaxError(msg, cur().span, std::move(expected));
    }

    std::size_t expect(std::string_view punct) {
        if (!at(punct)) fail({"'" + std::string(punct) + "'"});
        return tokens_[pos_++].span.end;
    }

    void expect_keyword(std::string_view word) {
        if (!at_ident(word)) fail({"'" + std::string(word) + "'"});
        ++pos_;
    }

    void expect_end() {
        if (cur().kind != TokenKind::End) fail({"end of input"});
    }

    std::string port_name(const char* what) {
        if (cur().kind != TokenKind::Ident || !is_port_name(cur().text)) fail({what});
        return tokens_[pos_++].text;
    }

    // Dotted identifier path starting at the current token, without consuming it.
    std::size_t path_length() const {
        if (cur().kind != TokenKind::Ident || is_keyword(cur().text)) return 0;
        std::size_t n = 1;
        while (ahead(n).kind == TokenKind::Punct && ahead(n).text == "." && ahead(n + 1).kind == TokenKind::Ident)
            n += 2;
        return n;
    }

    bool at_variable() const {
        if (paths_) return path_length() > 0;
        return cur().kind == TokenKind::Ident && variable_spelling(cur().text).has_value();
    }

    Variable variable() {
        if (paths_) {
            std::size_t n = path_length();
            if (n == 0) fail({"variable path"});
            VariablePath p;
            for (std::size_t i = 0; i < n; i += 2) p.segments.push_back(tokens_[pos_ + i].text);
            pos_ += n;
            return paths_->intern(p);
        }
        if (!at_variable()) fail({"variable"});
        return Variable{*variable_spelling(tokens_[pos_++].text)};
    }

    // -- behaviours ---------------------------------------------------------

    Parsed behaviour() {
        Parsed left = seq();
        if (!at("|")) return left;
        ++pos_;
        Parsed right = behaviour();
        SourceSpan span{left.spans.span.begin, right.spans.span.end};
        return {behaviour::par(std::move(left.behaviour), std::move(right.behaviour)),
                {span, {std::move(left.spans), std::move(right.spans)}}};
    }

    Parsed seq() {
        Parsed first = atom();
        if (!at(";")) return first;
        ++pos_;
        Parsed second = seq();
        SourceSpan span{first.spans.span.begin, second.spans.span.end};
        return {behaviour::seq(std::move(first.behaviour), std::move(second.behaviour)),
                {span, {std::move(first.spans), std::move(second.spans)}}};
    }

    Parsed atom() {
        std::size_t start = cur().span.begin;
        if (at("(")) {
            ++pos_;
            Parsed inner = behaviour();
            inner.spans.span = {start, expect(")")};
            return inner;
        }
        if (cur().kind != TokenKind::Ident)
            fail({"'nil'", "'if'", "'while'", "'inputchoice'", "'wait'", "'exec'", "'('", "variable", "operation"});
        const std::string& word = cur().text;
        if (word == "nil") {
            ++pos_;
            return {behaviour::nil(), {{start, cur_begin_prev()}, {}}};
        }
        if (word == "if") {
            ++pos_;
            Expr e = expr();
            expect_keyword("then");
            Parsed a = atom();
            expect_keyword("else");
            Parsed b = atom();
            SourceSpan span{start, b.spans.span.end};
            return {behaviour::if_(std::move(e), std::move(a.behaviour), std::move(b.behaviour)),
                    {span, {std::move(a.spans), std::move(b.spans)}}};
        }
        if (word == "while") {
            ++pos_;
            expect("[");
            Expr e = expr();
            expect("]");
            Parsed body = atom();
            SourceSpan span{start, body.spans.span.end};
            return {behaviour::while_(std::move(e), std::move(body.behaviour)), {span, {std::move(body.spans)}}};
        }
        if (word == "inputchoice") return inputchoice();
        if (word == "wait") {
            ++pos_;
            expect("(");
            std::string c = port_name("channel");
            expect(",");
            std::string o = port_name("operation");
            expect(",");
            std::string l = port_name("location");
            expect(",");
            Variable x = variable();
            std::size_t end = expect(")");
            return {Behaviour{Wait{Channel{c}, Operation{o}, Location{l}, x}}, {{start, end}, {}}};
        }
        if (word == "exec") {
            ++pos_;
            expect("(");
            std::string c = port_name("channel");
            expect(",");
            std::string o = port_name("operation");
            expect(",");
            Variable x = variable();
            expect(")");
            expect("{");
            Parsed body = behaviour();
            std::size_t end = expect("}");
            return {Behaviour{Exec{Channel{c}, Operation{o}, x, std::move(body.behaviour)}},
                    {{start, end}, {std::move(body.spans)}}};
        }
        if (is_assignment_start()) {
            Variable x = variable();
            expect("=");
            Expr e = expr();
            return {Behaviour{Assign{x, std::move(e)}}, {{start, cur_begin_prev()}, {}}};
        }
        if (!is_port_name(word))
            fail({"'nil'", "'if'", "'while'", "'inputchoice'", "'wait'", "'exec'", "'('", "variable", "operation"});
        if (ahead(1).kind == TokenKind::Punct && ahead(1).text == "@") return output();
        auto [eta, spans] = input();
        return {Behaviour{Input{std::move(eta)}}, std::move(spans)};
    }

    bool is_assignment_start() const {
        if (!paths_) return at_variable();
        std::size_t n = path_length();
        return n > 0 && ahead(n).kind == TokenKind::Punct && ahead(n).text == "=";
    }

    std::size_t cur_begin_prev() const { return tokens_[pos_ - 1].span.end; }

    std::pair<Eta, SpanNode> input() {
        std::size_t start = cur().span.begin;
        std::string o = port_name("operation");
        expect("(");
        Variable x = variable();
        std::size_t end = expect(")");
        if (!at("(")) return {OneWay{Operation{o}, x}, {{start, end}, {}}};
        ++pos_;
        Variable y = variable();
        expect(")");
        expect("{");
        Parsed body = behaviour();
        end = expect("}");
        return {RequestResponse{Operation{o}, x, y, std::move(body.behaviour)}, {{start, end}, {std::move(body.spans)}}};
    }

    Parsed output() {
        std::size_t start = cur().span.begin;
        std::string o = port_name("operation");
        expect("@");
        std::string l = port_name("location");
        expect("(");
        Expr e = expr();
        std::size_t end = expect(")");
        if (!at("(")) return {behaviour::notify(o, l, std::move(e)), {{start, end}, {}}};
        ++pos_;
        Variable x = variable();
        end = expect(")");
        return {Behaviour{Output{SolicitResponse{Operation{o}, Location{l}, std::move(e), x}}}, {{start, end}, {}}};
    }

    Parsed inputchoice() {
        std::size_t start = cur().span.begin;
        ++pos_;
        if (!at("[") || (ahead(1).kind == TokenKind::Punct && ahead(1).text == "]"))
            throw EmptyChoiceError("inputchoice needs at least one branch", cur().span, {"'['"});
        InputChoice choice;
        SpanNode spans{{start, start}, {}};
        while (at("[")) {
            ++pos_;
            auto [eta, eta_spans] = input();
            expect("]");
            expect("{");
            Parsed body = behaviour();
            spans.span.end = expect("}");
            for (auto& c : eta_spans.children) spans.children.push_back(std::move(c));
            spans.children.push_back(std::move(body.spans));
            choice.branches.push_back(ChoiceBranch{std::move(eta), std::move(body.behaviour)});
        }
        return {Behaviour{std::move(choice)}, std::move(spans)};
    }

    // -- expressions --------------------------------------------------------

    Expr expr() { return binary_level(1); }

    static std::optional<std::pair<BinaryOp, int>> binary_operator(const Token& t) {
        if (t.kind != TokenKind::Punct) return std::nullopt;
        if (t.text == "||") return std::pair{BinaryOp::Or, 1};
        if (t.text == "&&") return std::pair{BinaryOp::And, 2};
        if (t.text == "==") return std::pair{BinaryOp::Eq, 3};
        if (t.text == "<") return std::pair{BinaryOp::Lt, 4};
        return std::nullopt;
    }

    Expr binary_level(int level) {
        if (level > 4) return unary();
        Expr lhs = binary_level(level + 1);
        while (true) {
            auto op = binary_operator(cur());
            if (!op || op->second != level) return lhs;
            ++pos_;
            Expr rhs = binary_level(level + 1);
            lhs = expr::binary(op->first, std::move(lhs), std::move(rhs));
        }
    }

    Expr unary() {
        if (at("!")) {
            ++pos_;
            return expr::logical_not(unary());
        }
        if (at("(")) {
            ++pos_;
            Expr e = expr();
            expect(")");
            return e;
        }
        if (cur().kind == TokenKind::String) return expr::string(tokens_[pos_++].text);
        if (cur().kind == TokenKind::Number) return number();
        if (at_ident("true") || at_ident("false")) return expr::boolean(tokens_[pos_++].text == "true");
        if (at_variable()) return Expr{VarRef{variable()}};
        fail({"expression"});
    }

    Expr number() {
        const Token& t = tokens_[pos_];
        std::string_view text = t.text;
        auto bad = [&](const char* why) { throw SyntaxError(why, t.span, {"number"}); };
        const char* first = text.data();
        const char* last = text.data() + text.size();
        if (text.find_first_of(".eE") != std::string_view::npos) {
            double v = 0;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last) bad("double literal out of range");
            ++pos_;
            return expr::real(v);
        }
        if (text.back() == 'L') {
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(first, last - 1, v);
            if (ec != std::errc{} || ptr != last - 1) bad("long literal out of range");
            ++pos_;
            return expr::long_integer(v);
        }
        std::int32_t v = 0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last) bad("int literal out of range");
        ++pos_;
        return expr::integer(v);
    }

    // -- contexts -----------------------------------------------------------

    Context ctxtree() {
        Context g = ctxterm();
        while (at("&")) {
            ++pos_;
            g = Context::join(std::move(g), ctxterm());
        }
        return g;
    }

    Context ctxterm() {
        if (at("(")) {
            ++pos_;
            Context g = ctxtree();
            expect(")");
            return g;
        }
        std::size_t start = cur().span.begin;
        expect("{");
        std::vector<TypeDecl> decls;
        if (!at("}")) {
            decls.push_back(decl());
            while (at(",")) {
                ++pos_;
                decls.push_back(decl());
            }
        }
        std::size_t end = expect("}");
        try {
            return Context::leaf(std::move(decls));
        } catch (DuplicateDeclError& e) {
            throw DuplicateDeclError(std::string(e.what()) + " (bytes " + std::to_string(start) + "-" +
                                     std::to_string(end) + ")");
        }
    }

    NativeType type() {
        if (cur().kind == TokenKind::Ident)
            if (auto t = native_type_from(cur().text)) {
                ++pos_;
                return *t;
            }
        fail({"'bool'", "'int'", "'double'", "'long'", "'string'", "'raw'", "'void'"});
    }

    bool at_var_decl() const {
        if (!paths_) return at_variable();
        std::size_t n = path_length();
        if (n == 0) return false;
        bool colon = ahead(n).kind == TokenKind::Punct && ahead(n).text == ":";
        bool bracket = ahead(n + 1).kind == TokenKind::Punct && ahead(n + 1).text == "<";
        return colon && !bracket;
    }

    TypeDecl decl() {
        if (at_var_decl()) {
            Variable x = variable();
            expect(":");
            return VarDecl{x, type()};
        }
        if (cur().kind != TokenKind::Ident || !is_port_name(cur().text)) fail({"variable", "operation"});
        std::string o = tokens_[pos_++].text;
        std::optional<std::string> l;
        if (at("@")) {
            ++pos_;
            l = port_name("location");
        }
        expect(":");
        expect("<");
        NativeType t = type();
        std::optional<NativeType> t2;
        if (at(",")) {
            ++pos_;
            t2 = type();
        }
        expect(">");
        if (l && t2) return OutputReqResDecl{Operation{o}, Location{*l}, t, *t2};
        if (l) return OutputOneWayDecl{Operation{o}, Location{*l}, t};
        if (t2) return InputReqResDecl{Operation{o}, t, *t2};
        return InputOneWayDecl{Operation{o}, t};
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    PathTable* paths_;
};

inline void flatten_spans(const Behaviour& b, const SpanNode& node, Position& at,
                          std::map<Position, SourceSpan>& out) {
    out.emplace(at, node.span);
    auto selectors = child_selectors(b);
    for (std::size_t i = 0; i < selectors.size() && i < node.children.size(); ++i) {
        at.push_back(selectors[i]);
        flatten_spans(*child(b, selectors[i]), node.children[i], at, out);
        at.pop_back();
    }
}

}  // namespace detail

/// Parses a program. With `paths`, variables are dotted paths numbered
/// through the table; otherwise they are spelled `x0`, `x1`, ...
inline ParsedBehaviour parse_behaviour_with_spans(std::string_view text, PathTable* paths = nullptr) {
    auto parsed = detail::Parser(text, paths).behaviour_file();
    ParsedBehaviour out{std::move(parsed.behaviour), {}};
    Position at;
    detail::flatten_spans(out.behaviour, parsed.spans, at, out.spans);
    return out;
}

inline Behaviour parse_behaviour(std::string_view text, PathTable* paths = nullptr) {
    return detail::Parser(text, paths).behaviour_file().behaviour;
}

inline Context parse_context(std::string_view text, PathTable* paths = nullptr) {
    return detail::Parser(text, paths).context_file();
}

inline Expr parse_expr(std::string_view text, PathTable* paths = nullptr) {
    return detail::Parser(text, paths).expr_file();
}

}  // namespace bcheck
