#pragma once

// Abstract syntax of the behavioural layer: expressions, communication
// actions and behaviours, plus positions addressing sub-behaviours.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bcheck/errors.hpp"

namespace bcheck {

/// Immutable heap cell with value semantics. Copies share the cell, which is
/// safe because the payload can never change; equality is structural.
template <class T>
class Box {
public:
    Box(T value) : ptr_(std::make_shared<const T>(std::move(value))) {}

    const T& operator*() const noexcept { return *ptr_; }
    const T* operator->() const noexcept { return ptr_.get(); }
    const T& get() const noexcept { return *ptr_; }

    friend bool operator==(const Box& a, const Box& b) {
        return a.ptr_ == b.ptr_ || *a.ptr_ == *b.ptr_;
    }

private:
    std::shared_ptr<const T> ptr_;
};

/// Flattened variable: paths like `amount.fruit.apple` are numbered before
/// typing and only the number survives.
struct Variable {
    std::size_t index = 0;

    auto operator<=>(const Variable&) const = default;
};

template <class Tag>
struct Name {
    std::string value;

    auto operator<=>(const Name&) const = default;
};

using Operation = Name<struct OperationTag>;
using Location = Name<struct LocationTag>;
using Channel = Name<struct ChannelTag>;

// ---------------------------------------------------------------------------
// Expressions

struct Expr;

enum class BinaryOp { And, Or, Eq, Lt };

struct BoolLit {
    bool value = false;
    bool operator==(const BoolLit&) const = default;
};
struct IntLit {
    std::int32_t value = 0;
    bool operator==(const IntLit&) const = default;
};
struct LongLit {
    std::int64_t value = 0;
    bool operator==(const LongLit&) const = default;
};
struct DoubleLit {
    double value = 0.0;
    bool operator==(const DoubleLit&) const = default;
};
struct StringLit {
    std::string value;
    bool operator==(const StringLit&) const = default;
};
struct VarRef {
    Variable var;
    bool operator==(const VarRef&) const = default;
};
struct Not {
    Box<Expr> operand;
    bool operator==(const Not&) const = default;
};
struct Binary {
    BinaryOp op;
    Box<Expr> lhs;
    Box<Expr> rhs;
    bool operator==(const Binary&) const = default;
};

struct Expr {
    std::variant<BoolLit, IntLit, LongLit, DoubleLit, StringLit, VarRef, Not, Binary> node;

    bool operator==(const Expr&) const = default;
};

namespace expr {
inline Expr boolean(bool v) { return Expr{BoolLit{v}}; }
inline Expr integer(std::int32_t v) { return Expr{IntLit{v}}; }
inline Expr long_integer(std::int64_t v) { return Expr{LongLit{v}}; }
inline Expr real(double v) { return Expr{DoubleLit{v}}; }
inline Expr string(std::string v) { return Expr{StringLit{std::move(v)}}; }
inline Expr var(std::size_t index) { return Expr{VarRef{Variable{index}}}; }
inline Expr logical_not(Expr e) { return Expr{Not{std::move(e)}}; }
inline Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
    return Expr{Binary{op, std::move(lhs), std::move(rhs)}};
}
}  // namespace expr

// ---------------------------------------------------------------------------
// Behaviours

struct Behaviour;

struct Nil {
    bool operator==(const Nil&) const = default;
};
struct If {
    Expr condition;
    Box<Behaviour> then_branch;
    Box<Behaviour> else_branch;
    bool operator==(const If&) const = default;
};
struct While {
    Expr condition;
    Box<Behaviour> body;
    bool operator==(const While&) const = default;
};
struct Seq {
    Box<Behaviour> first;
    Box<Behaviour> second;
    bool operator==(const Seq&) const = default;
};
struct Par {
    Box<Behaviour> left;
    Box<Behaviour> right;
    bool operator==(const Par&) const = default;
};
struct Assign {
    Variable target;
    Expr value;
    bool operator==(const Assign&) const = default;
};

// Input port actions.
struct OneWay {
    Operation op;
    Variable var;
    bool operator==(const OneWay&) const = default;
};
struct RequestResponse {
    Operation op;
    Variable request;
    Variable response;
    Box<Behaviour> body;
    bool operator==(const RequestResponse&) const = default;
};
using Eta = std::variant<OneWay, RequestResponse>;

// Output port actions.
struct Notification {
    Operation op;
    Location location;
    Expr payload;
    bool operator==(const Notification&) const = default;
};
struct SolicitResponse {
    Operation op;
    Location location;
    Expr payload;
    Variable response;
    bool operator==(const SolicitResponse&) const = default;
};
using EtaHat = std::variant<Notification, SolicitResponse>;

struct ChoiceBranch {
    Eta input;
    Box<Behaviour> body;
    bool operator==(const ChoiceBranch&) const = default;
};
struct InputChoice {
    std::vector<ChoiceBranch> branches;
    bool operator==(const InputChoice&) const = default;
};
struct Wait {
    Channel channel;
    Operation op;
    Location location;
    Variable var;
    bool operator==(const Wait&) const = default;
};
struct Exec {
    Channel channel;
    Operation op;
    Variable var;
    Box<Behaviour> body;
    bool operator==(const Exec&) const = default;
};
struct Input {
    Eta eta;
    bool operator==(const Input&) const = default;
};
struct Output {
    EtaHat eta;
    bool operator==(const Output&) const = default;
};

struct Behaviour {
    std::variant<Nil, If, While, Seq, Par, Assign, InputChoice, Wait, Exec, Input, Output> node;

    bool operator==(const Behaviour&) const = default;

    template <class T>
    bool is() const noexcept {
        return std::holds_alternative<T>(node);
    }
    template <class T>
    const T* as() const noexcept {
        return std::get_if<T>(&node);
    }
};

namespace behaviour {
inline Behaviour nil() { return Behaviour{Nil{}}; }
inline Behaviour seq(Behaviour a, Behaviour b) { return Behaviour{Seq{std::move(a), std::move(b)}}; }
inline Behaviour par(Behaviour a, Behaviour b) { return Behaviour{Par{std::move(a), std::move(b)}}; }
inline Behaviour if_(Expr e, Behaviour a, Behaviour b) {
    return Behaviour{If{std::move(e), std::move(a), std::move(b)}};
}
inline Behaviour while_(Expr e, Behaviour body) { return Behaviour{While{std::move(e), std::move(body)}}; }
inline Behaviour assign(std::size_t x, Expr e) { return Behaviour{Assign{Variable{x}, std::move(e)}}; }
inline Behaviour input_oneway(std::string op, std::size_t x) {
    return Behaviour{Input{OneWay{Operation{std::move(op)}, Variable{x}}}};
}
inline Behaviour input_reqres(std::string op, std::size_t x, std::size_t y, Behaviour body) {
    return Behaviour{Input{RequestResponse{Operation{std::move(op)}, Variable{x}, Variable{y}, std::move(body)}}};
}
inline Behaviour notify(std::string op, std::string loc, Expr e) {
    return Behaviour{Output{Notification{Operation{std::move(op)}, Location{std::move(loc)}, std::move(e)}}};
}
inline Behaviour solicit(std::string op, std::string loc, Expr e, std::size_t x) {
    return Behaviour{
        Output{SolicitResponse{Operation{std::move(op)}, Location{std::move(loc)}, std::move(e), Variable{x}}}};
}
inline Behaviour wait(std::string c, std::string op, std::string loc, std::size_t x) {
    return Behaviour{Wait{Channel{std::move(c)}, Operation{std::move(op)}, Location{std::move(loc)}, Variable{x}}};
}
inline Behaviour exec(std::string c, std::string op, std::size_t x, Behaviour body) {
    return Behaviour{Exec{Channel{std::move(c)}, Operation{std::move(op)}, Variable{x}, std::move(body)}};
}
}  // namespace behaviour

/// Number of behaviour nodes; expressions and port payloads are not counted.
inline std::size_t node_count(const Behaviour& b) {
    return std::visit(
        [](const auto& n) -> std::size_t {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, If>) {
                return 1 + node_count(*n.then_branch) + node_count(*n.else_branch);
            } else if constexpr (std::is_same_v<T, While>) {
                return 1 + node_count(*n.body);
            } else if constexpr (std::is_same_v<T, Seq>) {
                return 1 + node_count(*n.first) + node_count(*n.second);
            } else if constexpr (std::is_same_v<T, Par>) {
                return 1 + node_count(*n.left) + node_count(*n.right);
            } else if constexpr (std::is_same_v<T, Exec>) {
                return 1 + node_count(*n.body);
            } else if constexpr (std::is_same_v<T, Input>) {
                if (const auto* rr = std::get_if<RequestResponse>(&n.eta)) return 1 + node_count(*rr->body);
                return 1;
            } else if constexpr (std::is_same_v<T, InputChoice>) {
                std::size_t total = 1;
                for (const auto& br : n.branches) {
                    if (const auto* rr = std::get_if<RequestResponse>(&br.input)) total += node_count(*rr->body);
                    total += node_count(*br.body);
                }
                return total;
            } else {
                return 1;
            }
        },
        b.node);
}

namespace detail {
inline void expr_variables(const Expr& e, std::set<Variable>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, VarRef>) {
                out.insert(n.var);
            } else if constexpr (std::is_same_v<T, Not>) {
                expr_variables(*n.operand, out);
            } else if constexpr (std::is_same_v<T, Binary>) {
                expr_variables(*n.lhs, out);
                expr_variables(*n.rhs, out);
            }
        },
        e.node);
}

inline void behaviour_variables(const Behaviour& b, std::set<Variable>& out);

inline void eta_variables(const Eta& eta, std::set<Variable>& out) {
    if (const auto* ow = std::get_if<OneWay>(&eta)) {
        out.insert(ow->var);
    } else {
        const auto& rr = std::get<RequestResponse>(eta);
        out.insert(rr.request);
        out.insert(rr.response);
        behaviour_variables(*rr.body, out);
    }
}

inline void behaviour_variables(const Behaviour& b, std::set<Variable>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, If>) {
                expr_variables(n.condition, out);
                behaviour_variables(*n.then_branch, out);
                behaviour_variables(*n.else_branch, out);
            } else if constexpr (std::is_same_v<T, While>) {
                expr_variables(n.condition, out);
                behaviour_variables(*n.body, out);
            } else if constexpr (std::is_same_v<T, Seq>) {
                behaviour_variables(*n.first, out);
                behaviour_variables(*n.second, out);
            } else if constexpr (std::is_same_v<T, Par>) {
                behaviour_variables(*n.left, out);
                behaviour_variables(*n.right, out);
            } else if constexpr (std::is_same_v<T, Assign>) {
                out.insert(n.target);
                expr_variables(n.value, out);
            } else if constexpr (std::is_same_v<T, InputChoice>) {
                for (const auto& br : n.branches) {
                    eta_variables(br.input, out);
                    behaviour_variables(*br.body, out);
                }
            } else if constexpr (std::is_same_v<T, Wait>) {
                out.insert(n.var);
            } else if constexpr (std::is_same_v<T, Exec>) {
                out.insert(n.var);
                behaviour_variables(*n.body, out);
            } else if constexpr (std::is_same_v<T, Input>) {
                eta_variables(n.eta, out);
            } else if constexpr (std::is_same_v<T, Output>) {
                if (const auto* no = std::get_if<Notification>(&n.eta)) {
                    expr_variables(no->payload, out);
                } else {
                    const auto& sr = std::get<SolicitResponse>(n.eta);
                    expr_variables(sr.payload, out);
                    out.insert(sr.response);
                }
            }
        },
        b.node);
}
}  // namespace detail

/// Every variable index occurring anywhere in `b`: expressions, binders of
/// input actions, assignment targets and wait/exec slots.
inline std::set<Variable> free_variables(const Behaviour& b) {
    std::set<Variable> out;
    detail::behaviour_variables(b, out);
    return out;
}

// ---------------------------------------------------------------------------
// Positions

/// One step from a behaviour to one of its direct sub-behaviours. `index`
/// selects the branch for the two inputchoice selectors and is 0 otherwise.
struct Selector {
    enum class Kind {
        SeqFirst,
        SeqSecond,
        ParLeft,
        ParRight,
        IfThen,
        IfElse,
        WhileBody,
        ExecBody,
        EtaBody,        // body of a request-response input
        ChoiceBody,     // continuation of inputchoice branch `index`
        ChoiceEtaBody,  // request-response body inside branch `index`
    };
    Kind kind;
    std::size_t index = 0;

    auto operator<=>(const Selector&) const = default;
};

using Position = std::vector<Selector>;

inline std::string to_string(const Selector& s) {
    switch (s.kind) {
        case Selector::Kind::SeqFirst: return "seq.1";
        case Selector::Kind::SeqSecond: return "seq.2";
        case Selector::Kind::ParLeft: return "par.L";
        case Selector::Kind::ParRight: return "par.R";
        case Selector::Kind::IfThen: return "if.then";
        case Selector::Kind::IfElse: return "if.else";
        case Selector::Kind::WhileBody: return "while.body";
        case Selector::Kind::ExecBody: return "exec.body";
        case Selector::Kind::EtaBody: return "eta.body";
        case Selector::Kind::ChoiceBody: return "choice." + std::to_string(s.index);
        case Selector::Kind::ChoiceEtaBody: return "choice-eta." + std::to_string(s.index);
    }
    return "?";
}

/// Dotted rendering, e.g. `seq.2.par.L`; the empty position is `root`.
inline std::string to_string(const Position& p) {
    if (p.empty()) return "root";
    std::string out;
    for (const auto& s : p) {
        if (!out.empty()) out += '.';
        out += to_string(s);
    }
    return out;
}

inline std::optional<Position> parse_position(std::string_view text) {
    if (text == "root") return Position{};
    std::vector<std::string_view> parts;
    while (!text.empty()) {
        auto dot = text.find('.');
        parts.push_back(text.substr(0, dot));
        if (dot == std::string_view::npos) break;
        text.remove_prefix(dot + 1);
        if (text.empty()) return std::nullopt;
    }
    if (parts.size() % 2 != 0) return std::nullopt;
    Position out;
    using K = Selector::Kind;
    for (std::size_t i = 0; i < parts.size(); i += 2) {
        auto head = parts[i];
        auto tail = parts[i + 1];
        if (head == "seq" && tail == "1") out.push_back({K::SeqFirst});
        else if (head == "seq" && tail == "2") out.push_back({K::SeqSecond});
        else if (head == "par" && tail == "L") out.push_back({K::ParLeft});
        else if (head == "par" && tail == "R") out.push_back({K::ParRight});
        else if (head == "if" && tail == "then") out.push_back({K::IfThen});
        else if (head == "if" && tail == "else") out.push_back({K::IfElse});
        else if (head == "while" && tail == "body") out.push_back({K::WhileBody});
        else if (head == "exec" && tail == "body") out.push_back({K::ExecBody});
        else if (head == "eta" && tail == "body") out.push_back({K::EtaBody});
        else if (head == "choice" || head == "choice-eta") {
            if (tail.empty() || tail.size() > 9) return std::nullopt;
            std::size_t n = 0;
            for (char c : tail) {
                if (c < '0' || c > '9') return std::nullopt;
                n = n * 10 + static_cast<std::size_t>(c - '0');
            }
            out.push_back({head == "choice" ? K::ChoiceBody : K::ChoiceEtaBody, n});
        } else {
            return std::nullopt;
        }
    }
    return out;
}

/// The direct child selected by `s`, or nullptr when `b` has no such child.
inline const Behaviour* child(const Behaviour& b, const Selector& s) {
    using K = Selector::Kind;
    switch (s.kind) {
        case K::SeqFirst:
            if (auto* n = b.as<Seq>()) return &*n->first;
            break;
        case K::SeqSecond:
            if (auto* n = b.as<Seq>()) return &*n->second;
            break;
        case K::ParLeft:
            if (auto* n = b.as<Par>()) return &*n->left;
            break;
        case K::ParRight:
            if (auto* n = b.as<Par>()) return &*n->right;
            break;
        case K::IfThen:
            if (auto* n = b.as<If>()) return &*n->then_branch;
            break;
        case K::IfElse:
            if (auto* n = b.as<If>()) return &*n->else_branch;
            break;
        case K::WhileBody:
            if (auto* n = b.as<While>()) return &*n->body;
            break;
        case K::ExecBody:
            if (auto* n = b.as<Exec>()) return &*n->body;
            break;
        case K::EtaBody:
            if (auto* n = b.as<Input>())
                if (auto* rr = std::get_if<RequestResponse>(&n->eta)) return &*rr->body;
            break;
        case K::ChoiceBody:
            if (auto* n = b.as<InputChoice>())
                if (s.index < n->branches.size()) return &*n->branches[s.index].body;
            break;
        case K::ChoiceEtaBody:
            if (auto* n = b.as<InputChoice>())
                if (s.index < n->branches.size())
                    if (auto* rr = std::get_if<RequestResponse>(&n->branches[s.index].input)) return &*rr->body;
            break;
    }
    return nullptr;
}

inline const Behaviour* subterm_at(const Behaviour& b, const Position& p) {
    const Behaviour* cur = &b;
    for (const auto& s : p) {
        cur = child(*cur, s);
        if (!cur) return nullptr;
    }
    return cur;
}

/// `b` with its direct child at `s` replaced by `replacement`.
inline Behaviour with_child(const Behaviour& b, const Selector& s, Behaviour replacement) {
    using K = Selector::Kind;
    if (!child(b, s)) throw InvalidPosition("selector " + to_string(s) + " does not apply here");
    Behaviour out = b;
    switch (s.kind) {
        case K::SeqFirst: std::get<Seq>(out.node).first = std::move(replacement); break;
        case K::SeqSecond: std::get<Seq>(out.node).second = std::move(replacement); break;
        case K::ParLeft: std::get<Par>(out.node).left = std::move(replacement); break;
        case K::ParRight: std::get<Par>(out.node).right = std::move(replacement); break;
        case K::IfThen: std::get<If>(out.node).then_branch = std::move(replacement); break;
        case K::IfElse: std::get<If>(out.node).else_branch = std::move(replacement); break;
        case K::WhileBody: std::get<While>(out.node).body = std::move(replacement); break;
        case K::ExecBody: std::get<Exec>(out.node).body = std::move(replacement); break;
        case K::EtaBody:
            std::get<RequestResponse>(std::get<Input>(out.node).eta).body = std::move(replacement);
            break;
        case K::ChoiceBody:
            std::get<InputChoice>(out.node).branches[s.index].body = std::move(replacement);
            break;
        case K::ChoiceEtaBody:
            std::get<RequestResponse>(std::get<InputChoice>(out.node).branches[s.index].input).body =
                std::move(replacement);
            break;
    }
    return out;
}

inline Behaviour replace_at(const Behaviour& b, std::span<const Selector> p, Behaviour replacement) {
    if (p.empty()) return replacement;
    const Behaviour* c = child(b, p.front());
    if (!c) throw InvalidPosition("position step " + to_string(p.front()) + " does not apply");
    return with_child(b, p.front(), replace_at(*c, p.subspan(1), std::move(replacement)));
}

/// Selectors of the direct children of `b`, in source order.
inline std::vector<Selector> child_selectors(const Behaviour& b) {
    using K = Selector::Kind;
    std::vector<Selector> out;
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, If>) {
                out = {{K::IfThen}, {K::IfElse}};
            } else if constexpr (std::is_same_v<T, While>) {
                out = {{K::WhileBody}};
            } else if constexpr (std::is_same_v<T, Seq>) {
                out = {{K::SeqFirst}, {K::SeqSecond}};
            } else if constexpr (std::is_same_v<T, Par>) {
                out = {{K::ParLeft}, {K::ParRight}};
            } else if constexpr (std::is_same_v<T, Exec>) {
                out = {{K::ExecBody}};
            } else if constexpr (std::is_same_v<T, Input>) {
                if (std::holds_alternative<RequestResponse>(n.eta)) out = {{K::EtaBody}};
            } else if constexpr (std::is_same_v<T, InputChoice>) {
                for (std::size_t i = 0; i < n.branches.size(); ++i) {
                    if (std::holds_alternative<RequestResponse>(n.branches[i].input))
                        out.push_back({K::ChoiceEtaBody, i});
                    out.push_back({K::ChoiceBody, i});
                }
            }
        },
        b.node);
    return out;
}

/// Every position in `b`, preorder, starting with the root.
inline std::vector<Position> positions(const Behaviour& b) {
    std::vector<Position> out;
    Position cur;
    auto walk = [&](auto& self, const Behaviour& node) -> void {
        out.push_back(cur);
        for (const auto& s : child_selectors(node)) {
            cur.push_back(s);
            self(self, *child(node, s));
            cur.pop_back();
        }
    };
    walk(walk, b);
    return out;
}

// ---------------------------------------------------------------------------
// Identifiers and variable paths

inline bool is_keyword(std::string_view s) {
    static constexpr std::string_view kKeywords[] = {
        "nil",  "if",   "then", "else", "while",  "inputchoice", "wait", "exec",  "true", "false",
        "bool", "int",  "double", "long", "string", "raw",       "void",
    };
    for (auto k : kKeywords)
        if (k == s) return true;
    return false;
}

/// `x` followed by a decimal index without leading zeros.
inline std::optional<std::size_t> variable_spelling(std::string_view s) {
    if (s.size() < 2 || s[0] != 'x' || s.size() > 12) return std::nullopt;
    if (s[1] == '0' && s.size() > 2) return std::nullopt;
    std::size_t n = 0;
    for (char c : s.substr(1)) {
        if (c < '0' || c > '9') return std::nullopt;
        n = n * 10 + static_cast<std::size_t>(c - '0');
    }
    return n;
}

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    if (!alpha(s[0])) return false;
    for (char c : s)
        if (!alpha(c) && !digit(c)) return false;
    return true;
}

/// Names usable for operations, locations and channels.
inline bool is_port_name(std::string_view s) {
    return is_identifier(s) && !is_keyword(s) && !variable_spelling(s);
}

struct VariablePath {
    std::vector<std::string> segments;

    auto operator<=>(const VariablePath&) const = default;

    /// Splits `a.b.c`; throws SyntaxError on an empty or malformed segment.
    static VariablePath parse(std::string_view dotted) {
        VariablePath p;
        std::size_t offset = 0;
        while (true) {
            auto dot = dotted.find('.', offset);
            auto seg = dotted.substr(offset, dot == std::string_view::npos ? std::string_view::npos : dot - offset);
            if (!is_identifier(seg))
                throw SyntaxError("malformed variable path segment '" + std::string(seg) + "'",
                                  SourceSpan{offset, offset + seg.size()}, {"identifier"});
            p.segments.emplace_back(seg);
            if (dot == std::string_view::npos) break;
            offset = dot + 1;
        }
        return p;
    }

    std::string dotted() const {
        std::string out;
        for (const auto& s : segments) {
            if (!out.empty()) out += '.';
            out += s;
        }
        return out;
    }
};

/// Incremental numbering of variable paths: the first unseen path gets the
/// next free index.
class PathTable {
public:
    Variable intern(const VariablePath& path) {
        auto [it, inserted] = index_.try_emplace(path, Variable{order_.size()});
        if (inserted) order_.push_back(path);
        return it->second;
    }

    const std::map<VariablePath, Variable>& mapping() const noexcept { return index_; }
    /// Paths in index order.
    const std::vector<VariablePath>& paths() const noexcept { return order_; }

private:
    std::map<VariablePath, Variable> index_;
    std::vector<VariablePath> order_;
};

/// Numbers paths 0, 1, 2, ... in order of first occurrence; duplicates
/// collapse onto the index of their first occurrence.
inline std::map<VariablePath, Variable> enumerate_variables(std::span<const VariablePath> paths) {
    PathTable table;
    for (const auto& p : paths) table.intern(p);
    return table.mapping();
}

}  // namespace bcheck
