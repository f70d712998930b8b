#pragma once

// Typing contexts: native types, typed declarations, declaration vectors and
// the binary tree of vectors that mirrors a program's parallel structure.

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bcheck/ast.hpp"
#include "bcheck/errors.hpp"

namespace bcheck {

enum class NativeType { Bool, Int, Double, Long, String, Raw, Void };

inline constexpr std::array<NativeType, 7> kNativeTypes = {
    NativeType::Bool, NativeType::Int, NativeType::Double, NativeType::Long,
    NativeType::String, NativeType::Raw, NativeType::Void,
};

inline std::string_view to_string(NativeType t) {
    switch (t) {
        case NativeType::Bool: return "bool";
        case NativeType::Int: return "int";
        case NativeType::Double: return "double";
        case NativeType::Long: return "long";
        case NativeType::String: return "string";
        case NativeType::Raw: return "raw";
        case NativeType::Void: return "void";
    }
    return "?";
}

inline std::optional<NativeType> native_type_from(std::string_view s) {
    for (auto t : kNativeTypes)
        if (to_string(t) == s) return t;
    return std::nullopt;
}

inline bool is_numeric(NativeType t) {
    return t == NativeType::Int || t == NativeType::Double || t == NativeType::Long;
}

// o @ l : <T>
struct OutputOneWayDecl {
    Operation op;
    Location location;
    NativeType request;
    bool operator==(const OutputOneWayDecl&) const = default;
};
// o @ l : <T, T'>
struct OutputReqResDecl {
    Operation op;
    Location location;
    NativeType request;
    NativeType response;
    bool operator==(const OutputReqResDecl&) const = default;
};
// o : <T>
struct InputOneWayDecl {
    Operation op;
    NativeType request;
    bool operator==(const InputOneWayDecl&) const = default;
};
// o : <T, T'>
struct InputReqResDecl {
    Operation op;
    NativeType request;
    NativeType response;
    bool operator==(const InputReqResDecl&) const = default;
};
// x : T
struct VarDecl {
    Variable var;
    NativeType type;
    bool operator==(const VarDecl&) const = default;
};

using TypeDecl = std::variant<OutputOneWayDecl, OutputReqResDecl, InputOneWayDecl, InputReqResDecl, VarDecl>;

namespace detail {
// Declarations with equal keys must be identical inside one Ctx.
inline std::string decl_key(const TypeDecl& d) {
    return std::visit(
        [](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, OutputOneWayDecl>) return "out1 " + n.op.value + "@" + n.location.value;
            else if constexpr (std::is_same_v<T, OutputReqResDecl>) return "out2 " + n.op.value + "@" + n.location.value;
            else if constexpr (std::is_same_v<T, InputOneWayDecl>) return "in1 " + n.op.value;
            else if constexpr (std::is_same_v<T, InputReqResDecl>) return "in2 " + n.op.value;
            else return "var " + std::to_string(n.var.index);
        },
        d);
}
}  // namespace detail

/// Ordered declarations of one sequential process. No variable is declared
/// twice; an operation may repeat only with an identical signature.
class Ctx {
public:
    Ctx() = default;

    explicit Ctx(std::vector<TypeDecl> decls) : decls_(std::move(decls)) {
        for (std::size_t i = 0; i < decls_.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (detail::decl_key(decls_[i]) != detail::decl_key(decls_[j])) continue;
                if (std::holds_alternative<VarDecl>(decls_[i]))
                    throw DuplicateDeclError("variable x" + std::to_string(std::get<VarDecl>(decls_[i]).var.index) +
                                             " declared twice in one context block");
                if (!(decls_[i] == decls_[j]))
                    throw DuplicateDeclError("operation " + detail::decl_key(decls_[i]).substr(4) +
                                             " declared with two different signatures");
            }
        }
    }

    const std::vector<TypeDecl>& decls() const noexcept { return decls_; }
    std::size_t size() const noexcept { return decls_.size(); }
    bool empty() const noexcept { return decls_.empty(); }

    /// Copy with entry `i` retyped; `i` must hold a VarDecl.
    Ctx with_var_type(std::size_t i, NativeType t) const {
        Ctx out = *this;
        std::get<VarDecl>(out.decls_[i]).type = t;
        return out;
    }

    /// Copy with `x : t` appended; `x` must not be declared yet.
    Ctx with_appended(Variable x, NativeType t) const {
        Ctx out = *this;
        out.decls_.push_back(VarDecl{x, t});
        return out;
    }

    bool operator==(const Ctx&) const = default;

private:
    std::vector<TypeDecl> decls_;
};

struct Context;

struct Leaf {
    Ctx ctx;
    bool operator==(const Leaf&) const = default;
};
/// Parallel composition `left & right`.
struct Join {
    Box<Context> left;
    Box<Context> right;
    bool operator==(const Join&) const = default;
};

struct Context {
    std::variant<Leaf, Join> node;

    /// Structural, order-sensitive equality.
    bool operator==(const Context&) const = default;

    static Context leaf(std::vector<TypeDecl> decls = {}) { return Context{Leaf{Ctx(std::move(decls))}}; }
    static Context leaf(Ctx ctx) { return Context{Leaf{std::move(ctx)}}; }
    static Context join(Context a, Context b) { return Context{Join{std::move(a), std::move(b)}}; }

    bool is_leaf() const noexcept { return std::holds_alternative<Leaf>(node); }
    const Leaf* as_leaf() const noexcept { return std::get_if<Leaf>(&node); }
    const Join* as_join() const noexcept { return std::get_if<Join>(&node); }
};

inline bool context_equal(const Context& a, const Context& b) { return a == b; }

// ---------------------------------------------------------------------------
// Membership

enum class MemberStep { HereLeaf, ThereLeaf, DescendLeft, DescendRight };

/// Position witness of a declaration inside a Context: descend through joins,
/// skip `ThereLeaf` entries of the leaf, then stop at `HereLeaf`.
using MemberPath = std::vector<MemberStep>;

inline std::string to_string(MemberStep s) {
    switch (s) {
        case MemberStep::HereLeaf: return "here";
        case MemberStep::ThereLeaf: return "there";
        case MemberStep::DescendLeft: return "left";
        case MemberStep::DescendRight: return "right";
    }
    return "?";
}

/// Replays a member path; nullptr when the path does not fit `g`.
inline const TypeDecl* resolve(const MemberPath& path, const Context& g) {
    const Context* cur = &g;
    std::size_t i = 0;
    for (; i < path.size(); ++i) {
        if (path[i] == MemberStep::DescendLeft || path[i] == MemberStep::DescendRight) {
            const Join* j = cur->as_join();
            if (!j) return nullptr;
            cur = path[i] == MemberStep::DescendLeft ? &*j->left : &*j->right;
        } else {
            break;
        }
    }
    const Leaf* leaf = cur->as_leaf();
    if (!leaf) return nullptr;
    std::size_t k = 0;
    for (; i < path.size() && path[i] == MemberStep::ThereLeaf; ++i) ++k;
    if (i + 1 != path.size() || path[i] != MemberStep::HereLeaf) return nullptr;
    if (k >= leaf->ctx.size()) return nullptr;
    return &leaf->ctx.decls()[k];
}

/// First declaration satisfying `pred`, searching each leaf front to back and
/// each join left subtree before right subtree.
template <class Pred>
std::optional<std::pair<TypeDecl, MemberPath>> find_first(const Context& g, Pred&& pred) {
    MemberPath prefix;
    auto walk = [&](auto& self, const Context& c) -> std::optional<std::pair<TypeDecl, MemberPath>> {
        if (const Leaf* leaf = c.as_leaf()) {
            const auto& ds = leaf->ctx.decls();
            for (std::size_t k = 0; k < ds.size(); ++k) {
                if (!pred(ds[k])) continue;
                MemberPath path = prefix;
                path.insert(path.end(), k, MemberStep::ThereLeaf);
                path.push_back(MemberStep::HereLeaf);
                return std::pair{ds[k], std::move(path)};
            }
            return std::nullopt;
        }
        const Join& j = *c.as_join();
        prefix.push_back(MemberStep::DescendLeft);
        auto found = self(self, *j.left);
        prefix.pop_back();
        if (found) return found;
        prefix.push_back(MemberStep::DescendRight);
        found = self(self, *j.right);
        prefix.pop_back();
        return found;
    };
    return walk(walk, g);
}

inline std::optional<MemberPath> member(const TypeDecl& d, const Context& g) {
    auto found = find_first(g, [&](const TypeDecl& x) { return x == d; });
    if (!found) return std::nullopt;
    return std::move(found->second);
}

struct VarLookup {
    NativeType type;
    MemberPath path;
};

inline std::optional<VarLookup> lookup_var(Variable x, const Context& g) {
    auto found = find_first(g, [&](const TypeDecl& d) {
        const auto* v = std::get_if<VarDecl>(&d);
        return v && v->var == x;
    });
    if (!found) return std::nullopt;
    return VarLookup{std::get<VarDecl>(found->first).type, std::move(found->second)};
}

/// Retypes the first declaration of `x`, or appends `x : t` to the leftmost
/// leaf when `x` is undeclared. The join skeleton never changes.
inline Context update_var(Variable x, NativeType t, const Context& g) {
    auto found = lookup_var(x, g);
    auto rebuild = [&](auto& self, const Context& c, std::span<const MemberStep> path) -> Context {
        if (const Leaf* leaf = c.as_leaf()) {
            if (!found) return Context::leaf(leaf->ctx.with_appended(x, t));
            auto k = static_cast<std::size_t>(std::count(path.begin(), path.end(), MemberStep::ThereLeaf));
            return Context::leaf(leaf->ctx.with_var_type(k, t));
        }
        const Join& j = *c.as_join();
        if (path.empty() || path.front() == MemberStep::DescendLeft)
            return Context::join(self(self, *j.left, path.empty() ? path : path.subspan(1)), *j.right);
        return Context::join(*j.left, self(self, *j.right, path.subspan(1)));
    };
    std::span<const MemberStep> path;
    if (found) path = found->path;
    return rebuild(rebuild, g, path);
}

inline std::size_t leaf_count(const Context& g) {
    if (g.is_leaf()) return 1;
    return leaf_count(*g.as_join()->left) + leaf_count(*g.as_join()->right);
}

/// Same join structure, ignoring leaf contents.
inline bool same_skeleton(const Context& a, const Context& b) {
    if (a.is_leaf() || b.is_leaf()) return a.is_leaf() && b.is_leaf();
    return same_skeleton(*a.as_join()->left, *b.as_join()->left) &&
           same_skeleton(*a.as_join()->right, *b.as_join()->right);
}

}  // namespace bcheck
