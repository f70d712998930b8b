#pragma once

// Concrete syntax rendering. Output uses the fewest parentheses the grammar
// allows and parses back to an identical value.

#include <charconv>
#include <string>
#include <system_error>

#include "bcheck/ast.hpp"
#include "bcheck/context.hpp"

namespace bcheck {

namespace detail {

inline std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

// Binding strength; higher binds tighter.
inline int precedence(BinaryOp op) {
    switch (op) {
        case BinaryOp::Or: return 1;
        case BinaryOp::And: return 2;
        case BinaryOp::Eq: return 3;
        case BinaryOp::Lt: return 4;
    }
    return 0;
}

inline std::string_view symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::Or: return "||";
        case BinaryOp::And: return "&&";
        case BinaryOp::Eq: return "==";
        case BinaryOp::Lt: return "<";
    }
    return "?";
}

inline void print_expr(const Expr& e, int min_prec, std::string& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BoolLit>) {
                out += n.value ? "true" : "false";
            } else if constexpr (std::is_same_v<T, IntLit>) {
                out += std::to_string(n.value);
            } else if constexpr (std::is_same_v<T, LongLit>) {
                out += std::to_string(n.value) + "L";
            } else if constexpr (std::is_same_v<T, DoubleLit>) {
                out += format_double(n.value);
            } else if constexpr (std::is_same_v<T, StringLit>) {
                out += quote(n.value);
            } else if constexpr (std::is_same_v<T, VarRef>) {
                out += "x" + std::to_string(n.var.index);
            } else if constexpr (std::is_same_v<T, Not>) {
                out += '!';
                print_expr(*n.operand, 5, out);
            } else {
                int p = precedence(n.op);
                bool parens = p < min_prec;
                if (parens) out += '(';
                print_expr(*n.lhs, p, out);
                out += ' ';
                out += symbol(n.op);
                out += ' ';
                print_expr(*n.rhs, p + 1, out);
                if (parens) out += ')';
            }
        },
        e.node);
}

// Levels follow the grammar: 0 = parallel, 1 = sequence, 2 = atom.
inline void print_behaviour(const Behaviour& b, int level, std::string& out);

inline void print_eta(const Eta& eta, std::string& out) {
    if (const auto* ow = std::get_if<OneWay>(&eta)) {
        out += ow->op.value + "(x" + std::to_string(ow->var.index) + ")";
        return;
    }
    const auto& rr = std::get<RequestResponse>(eta);
    out += rr.op.value + "(x" + std::to_string(rr.request.index) + ")(x" + std::to_string(rr.response.index) +
           ") { ";
    print_behaviour(*rr.body, 0, out);
    out += " }";
}

inline void print_behaviour(const Behaviour& b, int level, std::string& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Nil>) {
                out += "nil";
            } else if constexpr (std::is_same_v<T, Par>) {
                if (level > 0) out += '(';
                print_behaviour(*n.left, 1, out);
                out += " | ";
                print_behaviour(*n.right, 0, out);
                if (level > 0) out += ')';
            } else if constexpr (std::is_same_v<T, Seq>) {
                if (level > 1) out += '(';
                print_behaviour(*n.first, 2, out);
                out += " ; ";
                print_behaviour(*n.second, 1, out);
                if (level > 1) out += ')';
            } else if constexpr (std::is_same_v<T, If>) {
                out += "if ";
                print_expr(n.condition, 0, out);
                out += " then ";
                print_behaviour(*n.then_branch, 2, out);
                out += " else ";
                print_behaviour(*n.else_branch, 2, out);
            } else if constexpr (std::is_same_v<T, While>) {
                out += "while [ ";
                print_expr(n.condition, 0, out);
                out += " ] ";
                print_behaviour(*n.body, 2, out);
            } else if constexpr (std::is_same_v<T, Assign>) {
                out += "x" + std::to_string(n.target.index) + " = ";
                print_expr(n.value, 0, out);
            } else if constexpr (std::is_same_v<T, Input>) {
                print_eta(n.eta, out);
            } else if constexpr (std::is_same_v<T, Output>) {
                if (const auto* no = std::get_if<Notification>(&n.eta)) {
                    out += no->op.value + " @ " + no->location.value + " (";
                    print_expr(no->payload, 0, out);
                    out += ")";
                } else {
                    const auto& sr = std::get<SolicitResponse>(n.eta);
                    out += sr.op.value + " @ " + sr.location.value + " (";
                    print_expr(sr.payload, 0, out);
                    out += ")(x" + std::to_string(sr.response.index) + ")";
                }
            } else if constexpr (std::is_same_v<T, InputChoice>) {
                out += "inputchoice";
                for (const auto& br : n.branches) {
                    out += " [";
                    print_eta(br.input, out);
                    out += "] { ";
                    print_behaviour(*br.body, 0, out);
                    out += " }";
                }
            } else if constexpr (std::is_same_v<T, Wait>) {
                out += "wait(" + n.channel.value + ", " + n.op.value + ", " + n.location.value + ", x" +
                       std::to_string(n.var.index) + ")";
            } else if constexpr (std::is_same_v<T, Exec>) {
                out += "exec(" + n.channel.value + ", " + n.op.value + ", x" + std::to_string(n.var.index) + ") { ";
                print_behaviour(*n.body, 0, out);
                out += " }";
            }
        },
        b.node);
}

inline void print_context(const Context& g, bool nested_right, std::string& out) {
    if (const Leaf* leaf = g.as_leaf()) {
        out += "{ ";
        bool first = true;
        for (const auto& d : leaf->ctx.decls()) {
            if (!first) out += ", ";
            first = false;
            std::visit(
                [&](const auto& n) {
                    using T = std::decay_t<decltype(n)>;
                    if constexpr (std::is_same_v<T, OutputOneWayDecl>) {
                        out += n.op.value + " @ " + n.location.value + " : <" + std::string(to_string(n.request)) + ">";
                    } else if constexpr (std::is_same_v<T, OutputReqResDecl>) {
                        out += n.op.value + " @ " + n.location.value + " : <" + std::string(to_string(n.request)) +
                               ", " + std::string(to_string(n.response)) + ">";
                    } else if constexpr (std::is_same_v<T, InputOneWayDecl>) {
                        out += n.op.value + " : <" + std::string(to_string(n.request)) + ">";
                    } else if constexpr (std::is_same_v<T, InputReqResDecl>) {
                        out += n.op.value + " : <" + std::string(to_string(n.request)) + ", " +
                               std::string(to_string(n.response)) + ">";
                    } else {
                        out += "x" + std::to_string(n.var.index) + " : " + std::string(to_string(n.type));
                    }
                },
                d);
        }
        out += first ? "}" : " }";
        return;
    }
    // `&` chains associate to the left; a join on the right needs parentheses.
    const Join& j = *g.as_join();
    if (nested_right) out += '(';
    print_context(*j.left, false, out);
    out += " & ";
    print_context(*j.right, true, out);
    if (nested_right) out += ')';
}

}  // namespace detail

inline std::string pretty_expr(const Expr& e) {
    std::string out;
    detail::print_expr(e, 0, out);
    return out;
}

inline std::string pretty_behaviour(const Behaviour& b) {
    std::string out;
    detail::print_behaviour(b, 0, out);
    return out;
}

inline std::string pretty_context(const Context& g) {
    std::string out;
    detail::print_context(g, false, out);
    return out;
}

inline std::string pretty_decl(const TypeDecl& d) {
    std::string out;
    detail::print_context(Context::leaf(std::vector<TypeDecl>{d}), false, out);
    return out.substr(2, out.size() - 4);
}

}  // namespace bcheck
