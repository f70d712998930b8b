#pragma once

// The judgment Γ ⊢B B ▷ Γ′: expression typing, the syntax-directed checker
// that emits derivation trees, and a rule-by-rule derivation verifier.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bcheck/ast.hpp"
#include "bcheck/context.hpp"
#include "bcheck/errors.hpp"
#include "bcheck/printer.hpp"

namespace bcheck {

enum class Rule { TNil, TIf, TWhile, TSeq, TPar, TAssign, TInOneWay, TInReqRes, TOutNotify, TOutSolicit, TChoice };

/// Rules outside {t-nil, t-if, t-while, t-seq, t-par}; their names end in `*`.
inline bool is_extension(Rule r) {
    return r != Rule::TNil && r != Rule::TIf && r != Rule::TWhile && r != Rule::TSeq && r != Rule::TPar;
}

inline std::string_view rule_name(Rule r) {
    switch (r) {
        case Rule::TNil: return "t-nil";
        case Rule::TIf: return "t-if";
        case Rule::TWhile: return "t-while";
        case Rule::TSeq: return "t-seq";
        case Rule::TPar: return "t-par";
        case Rule::TAssign: return "t-assign*";
        case Rule::TInOneWay: return "t-in*";
        case Rule::TInReqRes: return "t-in-rr*";
        case Rule::TOutNotify: return "t-notify*";
        case Rule::TOutSolicit: return "t-solicit*";
        case Rule::TChoice: return "t-choice*";
    }
    return "?";
}

/// Γ ⊢e e : T
struct ExprTyping {
    Context context;
    Expr expr;
    NativeType type;
    bool operator==(const ExprTyping&) const = default;
};

/// One rule instance. Premise layout by rule:
///   t-if [then, else] + guard    t-while [body] + guard    t-seq [first, second]
///   t-par [left, right]          t-assign* [] + value      t-in* []
///   t-in-rr* [body]              t-notify* [] + payload    t-solicit* [] + payload
///   t-choice* [input_0, body_0, input_1, body_1, ...]
struct Derivation {
    Rule rule;
    Context input;
    Behaviour subject;
    Context output;
    std::vector<Derivation> premises;
    std::vector<ExprTyping> expr_premises;

    bool operator==(const Derivation&) const = default;
};

enum class TypeErrorKind {
    GuardNotBool,
    BranchContextMismatch,
    WhileContextChanged,
    ContextShapeMismatch,
    UnboundVariable,
    UnknownOperation,
    PayloadTypeMismatch,
    UnsupportedConstruct,
};

inline std::string_view to_string(TypeErrorKind k) {
    switch (k) {
        case TypeErrorKind::GuardNotBool: return "GuardNotBool";
        case TypeErrorKind::BranchContextMismatch: return "BranchContextMismatch";
        case TypeErrorKind::WhileContextChanged: return "WhileContextChanged";
        case TypeErrorKind::ContextShapeMismatch: return "ContextShapeMismatch";
        case TypeErrorKind::UnboundVariable: return "UnboundVariable";
        case TypeErrorKind::UnknownOperation: return "UnknownOperation";
        case TypeErrorKind::PayloadTypeMismatch: return "PayloadTypeMismatch";
        case TypeErrorKind::UnsupportedConstruct: return "UnsupportedConstruct";
    }
    return "?";
}

class TypeError : public Error {
public:
    TypeError(TypeErrorKind kind, std::string detail, std::optional<Behaviour> offending = std::nullopt,
              Position position = {})
        : Error(std::string(to_string(kind)) + ": " + detail),
          kind_(kind),
          detail_(std::move(detail)),
          offending_(std::move(offending)),
          position_(std::move(position)) {}

    TypeErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }
    /// Innermost sub-behaviour whose rule failed; empty for bare expression errors.
    const std::optional<Behaviour>& offending() const noexcept { return offending_; }
    const Position& position() const noexcept { return position_; }

private:
    TypeErrorKind kind_;
    std::string detail_;
    std::optional<Behaviour> offending_;
    Position position_;
};

// ---------------------------------------------------------------------------
// Expressions

inline NativeType type_of_expr(const Context& g, const Expr& e) {
    return std::visit(
        [&](const auto& n) -> NativeType {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BoolLit>) {
                return NativeType::Bool;
            } else if constexpr (std::is_same_v<T, IntLit>) {
                return NativeType::Int;
            } else if constexpr (std::is_same_v<T, LongLit>) {
                return NativeType::Long;
            } else if constexpr (std::is_same_v<T, DoubleLit>) {
                return NativeType::Double;
            } else if constexpr (std::is_same_v<T, StringLit>) {
                return NativeType::String;
            } else if constexpr (std::is_same_v<T, VarRef>) {
                auto found = lookup_var(n.var, g);
                if (!found)
                    throw TypeError(TypeErrorKind::UnboundVariable,
                                    "x" + std::to_string(n.var.index) + " is not declared");
                return found->type;
            } else if constexpr (std::is_same_v<T, Not>) {
                NativeType t = type_of_expr(g, *n.operand);
                if (t != NativeType::Bool)
                    throw TypeError(TypeErrorKind::PayloadTypeMismatch,
                                    "'!' expects bool, got " + std::string(to_string(t)));
                return NativeType::Bool;
            } else {
                NativeType l = type_of_expr(g, *n.lhs);
                NativeType r = type_of_expr(g, *n.rhs);
                std::string sym(detail::symbol(n.op));
                auto mismatch = [&](std::string_view want) {
                    return TypeError(TypeErrorKind::PayloadTypeMismatch,
                                     "'" + sym + "' expects " + std::string(want) + ", got " +
                                         std::string(to_string(l)) + " and " + std::string(to_string(r)));
                };
                switch (n.op) {
                    case BinaryOp::And:
                    case BinaryOp::Or:
                        if (l != NativeType::Bool || r != NativeType::Bool) throw mismatch("bool operands");
                        break;
                    case BinaryOp::Eq:
                        if (l != r) throw mismatch("operands of one type");
                        break;
                    case BinaryOp::Lt:
                        if (l != r || !is_numeric(l)) throw mismatch("numeric operands of one type");
                        break;
                }
                return NativeType::Bool;
            }
        },
        e.node);
}

// ---------------------------------------------------------------------------
// Checker

struct CheckOptions {
    /// Reject every rule outside t-nil, t-if, t-while, t-seq and t-par.
    bool core_only = false;
};

struct CheckResult {
    Context output;
    Derivation derivation;
};

namespace detail {

/// Replaces the sub-derivation at `at`. `plug` receives the context reaching
/// that position and returns the derivation to splice in, or nothing when the
/// context does not fit.
struct Hole {
    Position at;
    std::function<std::optional<Derivation>(const Context&)> plug;
};

class HoleMismatch : public Error {
public:
    HoleMismatch() : Error("sub-derivation does not fit the re-threaded context") {}
};

class Checker {
public:
    explicit Checker(CheckOptions opts, const Hole* hole = nullptr) : opts_(opts), hole_(hole) {}

    Derivation check(const Context& g, const Behaviour& b) {
        if (hole_ && path_ == hole_->at) {
            auto d = hole_->plug(g);
            if (!d) throw HoleMismatch();
            return std::move(*d);
        }
        try {
            return std::visit([&](const auto& n) { return rule(g, b, n); }, b.node);
        } catch (const TypeError& e) {
            if (e.offending()) throw;
            throw TypeError(e.kind(), e.detail(), b, path_);
        }
    }

private:
    Derivation descend(const Selector& s, const Context& g, const Behaviour& b) {
        path_.push_back(s);
        Derivation d = check(g, b);
        path_.pop_back();
        return d;
    }

    void require_extensions(std::string_view rule) const {
        if (opts_.core_only)
            throw TypeError(TypeErrorKind::UnsupportedConstruct,
                            std::string(rule) + " is outside the core rule set (--paper-core)");
    }

    ExprTyping guard(const Context& g, const Expr& e) {
        NativeType t = type_of_expr(g, e);
        if (t != NativeType::Bool)
            throw TypeError(TypeErrorKind::GuardNotBool,
                            "guard " + pretty_expr(e) + " has type " + std::string(to_string(t)));
        return {g, e, t};
    }

    Derivation rule(const Context& g, const Behaviour& b, const Nil&) { return {Rule::TNil, g, b, g, {}, {}}; }

    Derivation rule(const Context& g, const Behaviour& b, const If& n) {
        ExprTyping e = guard(g, n.condition);
        Derivation t = descend({Selector::Kind::IfThen}, g, *n.then_branch);
        Derivation f = descend({Selector::Kind::IfElse}, g, *n.else_branch);
        if (!(t.output == f.output))
            throw TypeError(TypeErrorKind::BranchContextMismatch,
                            "then-branch ends in " + pretty_context(t.output) + " but else-branch ends in " +
                                pretty_context(f.output));
        Context out = t.output;
        return {Rule::TIf, g, b, std::move(out), {std::move(t), std::move(f)}, {std::move(e)}};
    }

    Derivation rule(const Context& g, const Behaviour& b, const While& n) {
        ExprTyping e = guard(g, n.condition);
        Derivation body = descend({Selector::Kind::WhileBody}, g, *n.body);
        if (!(body.output == g))
            throw TypeError(TypeErrorKind::WhileContextChanged,
                            "loop body turns " + pretty_context(g) + " into " + pretty_context(body.output));
        return {Rule::TWhile, g, b, g, {std::move(body)}, {std::move(e)}};
    }

    Derivation rule(const Context& g, const Behaviour& b, const Seq& n) {
        Derivation first = descend({Selector::Kind::SeqFirst}, g, *n.first);
        Derivation second = descend({Selector::Kind::SeqSecond}, first.output, *n.second);
        Context out = second.output;
        return {Rule::TSeq, g, b, std::move(out), {std::move(first), std::move(second)}, {}};
    }

    Derivation rule(const Context& g, const Behaviour& b, const Par& n) {
        const Join* j = g.as_join();
        if (!j)
            throw TypeError(TypeErrorKind::ContextShapeMismatch,
                            "parallel composition needs a context of the form G1 & G2, got " + pretty_context(g));
        Derivation l = descend({Selector::Kind::ParLeft}, *j->left, *n.left);
        Derivation r = descend({Selector::Kind::ParRight}, *j->right, *n.right);
        Context out = Context::join(l.output, r.output);
        return {Rule::TPar, g, b, std::move(out), {std::move(l), std::move(r)}, {}};
    }

    Derivation rule(const Context& g, const Behaviour& b, const Assign& n) {
        require_extensions(rule_name(Rule::TAssign));
        NativeType t = type_of_expr(g, n.value);
        return {Rule::TAssign, g, b, update_var(n.target, t, g), {}, {{g, n.value, t}}};
    }

    template <class Decl>
    Decl find_operation(const Context& g, const Operation& op, const Location* loc, std::string_view what) {
        auto found = find_first(g, [&](const TypeDecl& d) {
            const auto* x = std::get_if<Decl>(&d);
            if (!x || x->op != op) return false;
            if constexpr (requires { x->location; }) return loc && x->location == *loc;
            return true;
        });
        if (!found) {
            std::string name = op.value + (loc ? " @ " + loc->value : "");
            throw TypeError(TypeErrorKind::UnknownOperation, std::string(what) + " " + name + " is not declared");
        }
        return std::get<Decl>(found->first);
    }

    Derivation input(const Context& g, const Behaviour& subject, const Eta& eta, const Selector& body_sel) {
        if (const auto* ow = std::get_if<OneWay>(&eta)) {
            require_extensions(rule_name(Rule::TInOneWay));
            auto d = find_operation<InputOneWayDecl>(g, ow->op, nullptr, "one-way input");
            return {Rule::TInOneWay, g, subject, update_var(ow->var, d.request, g), {}, {}};
        }
        const auto& rr = std::get<RequestResponse>(eta);
        require_extensions(rule_name(Rule::TInReqRes));
        auto d = find_operation<InputReqResDecl>(g, rr.op, nullptr, "request-response input");
        Derivation body = descend(body_sel, update_var(rr.request, d.request, g), *rr.body);
        auto reply = lookup_var(rr.response, body.output);
        if (!reply)
            throw TypeError(TypeErrorKind::UnboundVariable,
                            "response variable x" + std::to_string(rr.response.index) + " is not declared");
        if (reply->type != d.response)
            throw TypeError(TypeErrorKind::PayloadTypeMismatch,
                            "response x" + std::to_string(rr.response.index) + " has type " +
                                std::string(to_string(reply->type)) + ", " + rr.op.value + " replies with " +
                                std::string(to_string(d.response)));
        Context out = body.output;
        return {Rule::TInReqRes, g, subject, std::move(out), {std::move(body)}, {}};
    }

    Derivation rule(const Context& g, const Behaviour& b, const Input& n) {
        return input(g, b, n.eta, {Selector::Kind::EtaBody});
    }

    ExprTyping payload(const Context& g, const Expr& e, NativeType want, const Operation& op) {
        NativeType t = type_of_expr(g, e);
        if (t != want)
            throw TypeError(TypeErrorKind::PayloadTypeMismatch,
                            "payload of " + op.value + " has type " + std::string(to_string(t)) + ", expected " +
                                std::string(to_string(want)));
        return {g, e, t};
    }

    Derivation rule(const Context& g, const Behaviour& b, const Output& n) {
        if (const auto* no = std::get_if<Notification>(&n.eta)) {
            require_extensions(rule_name(Rule::TOutNotify));
            auto d = find_operation<OutputOneWayDecl>(g, no->op, &no->location, "notification");
            ExprTyping e = payload(g, no->payload, d.request, no->op);
            return {Rule::TOutNotify, g, b, g, {}, {std::move(e)}};
        }
        const auto& sr = std::get<SolicitResponse>(n.eta);
        require_extensions(rule_name(Rule::TOutSolicit));
        auto d = find_operation<OutputReqResDecl>(g, sr.op, &sr.location, "solicit-response");
        ExprTyping e = payload(g, sr.payload, d.request, sr.op);
        return {Rule::TOutSolicit, g, b, update_var(sr.response, d.response, g), {}, {std::move(e)}};
    }

    Derivation rule(const Context& g, const Behaviour& b, const InputChoice& n) {
        require_extensions(rule_name(Rule::TChoice));
        std::vector<Derivation> premises;
        for (std::size_t i = 0; i < n.branches.size(); ++i) {
            const auto& br = n.branches[i];
            Derivation in = input(g, Behaviour{Input{br.input}}, br.input, {Selector::Kind::ChoiceEtaBody, i});
            Derivation body = descend({Selector::Kind::ChoiceBody, i}, in.output, *br.body);
            if (i > 0 && !(body.output == premises[1].output))
                throw TypeError(TypeErrorKind::BranchContextMismatch,
                                "branch " + std::to_string(i) + " ends in " + pretty_context(body.output) +
                                    " but branch 0 ends in " + pretty_context(premises[1].output));
            premises.push_back(std::move(in));
            premises.push_back(std::move(body));
        }
        Context out = premises[1].output;
        return {Rule::TChoice, g, b, std::move(out), std::move(premises), {}};
    }

    Derivation rule(const Context&, const Behaviour&, const Wait&) {
        throw TypeError(TypeErrorKind::UnsupportedConstruct, "wait has no typing rule");
    }

    Derivation rule(const Context&, const Behaviour&, const Exec&) {
        throw TypeError(TypeErrorKind::UnsupportedConstruct, "exec has no typing rule");
    }

    CheckOptions opts_;
    const Hole* hole_;
    Position path_;
};

}  // namespace detail

/// Runs the checker; throws TypeError on the first failing rule.
inline CheckResult check_behaviour(const Context& g, const Behaviour& b, CheckOptions opts = {}) {
    Derivation d = detail::Checker(opts).check(g, b);
    Context out = d.output;
    return {std::move(out), std::move(d)};
}

// ---------------------------------------------------------------------------
// Verifier

/// Checking-mode reading of ⊢e, written without type synthesis.
inline bool expression_has_type(const Context& g, const Expr& e, NativeType want) {
    return std::visit(
        [&](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, BoolLit>) {
                return want == NativeType::Bool;
            } else if constexpr (std::is_same_v<T, IntLit>) {
                return want == NativeType::Int;
            } else if constexpr (std::is_same_v<T, LongLit>) {
                return want == NativeType::Long;
            } else if constexpr (std::is_same_v<T, DoubleLit>) {
                return want == NativeType::Double;
            } else if constexpr (std::is_same_v<T, StringLit>) {
                return want == NativeType::String;
            } else if constexpr (std::is_same_v<T, VarRef>) {
                auto found = lookup_var(n.var, g);
                return found && found->type == want;
            } else if constexpr (std::is_same_v<T, Not>) {
                return want == NativeType::Bool && expression_has_type(g, *n.operand, NativeType::Bool);
            } else {
                if (want != NativeType::Bool) return false;
                if (n.op == BinaryOp::And || n.op == BinaryOp::Or)
                    return expression_has_type(g, *n.lhs, NativeType::Bool) &&
                           expression_has_type(g, *n.rhs, NativeType::Bool);
                for (NativeType u : kNativeTypes) {
                    if (n.op == BinaryOp::Lt && !is_numeric(u)) continue;
                    if (expression_has_type(g, *n.lhs, u) && expression_has_type(g, *n.rhs, u)) return true;
                }
                return false;
            }
        },
        e.node);
}

namespace detail {

class Verifier {
public:
    explicit Verifier(std::string* why) : why_(why) {}

    bool node(const Derivation& d) {
        if (!shape(d)) return false;
        for (const auto& p : d.premises)
            if (!node(p)) return false;
        return true;
    }

private:
    bool fail(const Derivation& d, const std::string& msg) {
        if (why_) *why_ = std::string(rule_name(d.rule)) + " at " + pretty_behaviour(d.subject) + ": " + msg;
        return false;
    }

    bool arity(const Derivation& d, std::size_t premises, std::size_t exprs) {
        if (d.premises.size() == premises && d.expr_premises.size() == exprs) return true;
        return fail(d, "wrong number of premises");
    }

    bool expr_premise(const Derivation& d, const Expr& e, std::optional<NativeType> want) {
        const ExprTyping& et = d.expr_premises[0];
        if (!(et.context == d.input)) return fail(d, "expression typed under a different context");
        if (!(et.expr == e)) return fail(d, "expression premise is about another expression");
        if (want && et.type != *want) return fail(d, "expression premise has the wrong type");
        if (!expression_has_type(et.context, et.expr, et.type)) return fail(d, "expression premise does not hold");
        return true;
    }

    bool premise(const Derivation& d, std::size_t i, const Behaviour& subject, const Context& input) {
        if (!(d.premises[i].subject == subject)) return fail(d, "premise " + std::to_string(i) + " has the wrong subject");
        if (!(d.premises[i].input == input))
            return fail(d, "premise " + std::to_string(i) + " starts from the wrong context");
        return true;
    }

    template <class Decl, class Make>
    std::optional<Decl> declared(const Context& g, Make make, bool two_types) {
        for (NativeType t : kNativeTypes) {
            if (!two_types) {
                Decl d = make(t, t);
                if (member(TypeDecl{d}, g)) return d;
                continue;
            }
            for (NativeType u : kNativeTypes) {
                Decl d = make(t, u);
                if (member(TypeDecl{d}, g)) return d;
            }
        }
        return std::nullopt;
    }

    bool input_node(const Derivation& d, const Eta& eta) {
        if (const auto* ow = std::get_if<OneWay>(&eta)) {
            if (d.rule != Rule::TInOneWay) return fail(d, "rule does not match a one-way input");
            if (!arity(d, 0, 0)) return false;
            for (NativeType t : kNativeTypes)
                if (member(TypeDecl{InputOneWayDecl{ow->op, t}}, d.input) && d.output == update_var(ow->var, t, d.input))
                    return true;
            return fail(d, "no declared request type yields the output context");
        }
        const auto& rr = std::get<RequestResponse>(eta);
        if (d.rule != Rule::TInReqRes) return fail(d, "rule does not match a request-response input");
        if (!arity(d, 1, 0)) return false;
        const Derivation& body = d.premises[0];
        if (!(body.subject == *rr.body)) return fail(d, "premise 0 has the wrong subject");
        if (!(d.output == body.output)) return fail(d, "output differs from the body's output");
        auto reply = lookup_var(rr.response, body.output);
        for (NativeType t : kNativeTypes)
            for (NativeType u : kNativeTypes)
                if (member(TypeDecl{InputReqResDecl{rr.op, t, u}}, d.input) &&
                    body.input == update_var(rr.request, t, d.input) && reply && reply->type == u)
                    return true;
        return fail(d, "no declared signature fits the body and response");
    }

    bool shape(const Derivation& d) {
        return std::visit([&](const auto& n) { return check(d, n); }, d.subject.node);
    }

    bool check(const Derivation& d, const Nil&) {
        if (d.rule != Rule::TNil) return fail(d, "nil is typed only by t-nil");
        if (!arity(d, 0, 0)) return false;
        return d.output == d.input || fail(d, "output context differs from input");
    }

    bool check(const Derivation& d, const If& n) {
        if (d.rule != Rule::TIf || !arity(d, 2, 1)) return fail(d, "expected t-if with two premises and a guard");
        if (!expr_premise(d, n.condition, NativeType::Bool)) return false;
        if (!premise(d, 0, *n.then_branch, d.input) || !premise(d, 1, *n.else_branch, d.input)) return false;
        if (!(d.premises[0].output == d.premises[1].output)) return fail(d, "branches end in different contexts");
        return d.output == d.premises[0].output || fail(d, "output differs from the branches' output");
    }

    bool check(const Derivation& d, const While& n) {
        if (d.rule != Rule::TWhile || !arity(d, 1, 1)) return fail(d, "expected t-while with a body and a guard");
        if (!expr_premise(d, n.condition, NativeType::Bool)) return false;
        if (!premise(d, 0, *n.body, d.input)) return false;
        if (!(d.premises[0].output == d.input)) return fail(d, "body changes the context");
        return d.output == d.input || fail(d, "output differs from input");
    }

    bool check(const Derivation& d, const Seq& n) {
        if (d.rule != Rule::TSeq || !arity(d, 2, 0)) return fail(d, "expected t-seq with two premises");
        if (!premise(d, 0, *n.first, d.input)) return false;
        if (!premise(d, 1, *n.second, d.premises[0].output)) return false;
        return d.output == d.premises[1].output || fail(d, "output differs from the second premise's output");
    }

    bool check(const Derivation& d, const Par& n) {
        if (d.rule != Rule::TPar || !arity(d, 2, 0)) return fail(d, "expected t-par with two premises");
        const Join* j = d.input.as_join();
        if (!j) return fail(d, "input context is not of the form G1 & G2");
        if (!premise(d, 0, *n.left, *j->left) || !premise(d, 1, *n.right, *j->right)) return false;
        return d.output == Context::join(d.premises[0].output, d.premises[1].output) ||
               fail(d, "output is not the join of the premises' outputs");
    }

    bool check(const Derivation& d, const Assign& n) {
        if (d.rule != Rule::TAssign || !arity(d, 0, 1)) return fail(d, "expected t-assign* with a value premise");
        if (!expr_premise(d, n.value, std::nullopt)) return false;
        return d.output == update_var(n.target, d.expr_premises[0].type, d.input) ||
               fail(d, "output is not the input updated with the assigned type");
    }

    bool check(const Derivation& d, const Input& n) { return input_node(d, n.eta); }

    bool check(const Derivation& d, const Output& n) {
        if (const auto* no = std::get_if<Notification>(&n.eta)) {
            if (d.rule != Rule::TOutNotify || !arity(d, 0, 1)) return fail(d, "expected t-notify* with a payload");
            NativeType t = d.expr_premises[0].type;
            if (!member(TypeDecl{OutputOneWayDecl{no->op, no->location, t}}, d.input))
                return fail(d, "operation not declared with the payload's type");
            if (!expr_premise(d, no->payload, t)) return false;
            return d.output == d.input || fail(d, "output differs from input");
        }
        const auto& sr = std::get<SolicitResponse>(n.eta);
        if (d.rule != Rule::TOutSolicit || !arity(d, 0, 1)) return fail(d, "expected t-solicit* with a payload");
        NativeType t = d.expr_premises[0].type;
        if (!expr_premise(d, sr.payload, t)) return false;
        for (NativeType u : kNativeTypes)
            if (member(TypeDecl{OutputReqResDecl{sr.op, sr.location, t, u}}, d.input) &&
                d.output == update_var(sr.response, u, d.input))
                return true;
        return fail(d, "no declared signature yields the output context");
    }

    bool check(const Derivation& d, const InputChoice& n) {
        if (d.rule != Rule::TChoice || !arity(d, 2 * n.branches.size(), 0))
            return fail(d, "expected t-choice* with two premises per branch");
        for (std::size_t i = 0; i < n.branches.size(); ++i) {
            const auto& br = n.branches[i];
            if (!premise(d, 2 * i, Behaviour{Input{br.input}}, d.input)) return false;
            if (!input_node(d.premises[2 * i], br.input)) return false;
            if (!premise(d, 2 * i + 1, *br.body, d.premises[2 * i].output)) return false;
            if (!(d.premises[2 * i + 1].output == d.output)) return fail(d, "branches end in different contexts");
        }
        return true;
    }

    bool check(const Derivation& d, const Wait&) { return fail(d, "wait has no typing rule"); }
    bool check(const Derivation& d, const Exec&) { return fail(d, "exec has no typing rule"); }

    std::string* why_;
};

}  // namespace detail

/// Re-checks every node against its rule schema; never runs the checker.
/// On rejection, `why` (when given) names the first offending node.
inline bool verify_derivation(const Derivation& d, std::string* why = nullptr) {
    return detail::Verifier(why).node(d);
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {
inline void render(const Derivation& d, std::size_t depth, std::string& out) {
    std::string pad(2 * depth, ' ');
    out += pad + std::string(rule_name(d.rule)) + "  " + pretty_context(d.input) + " ⊢ " + pretty_behaviour(d.subject) +
           " ▷ " + pretty_context(d.output) + "\n";
    for (const auto& e : d.expr_premises)
        out += pad + "  t-expr  " + pretty_context(e.context) + " ⊢ " + pretty_expr(e.expr) + " : " +
               std::string(to_string(e.type)) + "\n";
    for (const auto& p : d.premises) render(p, depth + 1, out);
}
}  // namespace detail

/// One node per line, `RULE  Γ ⊢ subject ▷ Γ′`, premises indented two spaces;
/// expression premises appear as `t-expr  Γ ⊢ e : T` lines.
inline std::string serialize(const Derivation& d) {
    std::string out;
    detail::render(d, 0, out);
    return out;
}

}  // namespace bcheck
