#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "circuit.hpp"
#include "graph.hpp"
#include "width.hpp"

namespace homcount {

enum class PolyKind { hom, coliso };

struct CompileTarget {
    enum class Model { circuit, abp, formula };
    Model model = Model::circuit;
    PolyKind polynomial = PolyKind::hom;
    int n = 1;
};

namespace detail {

// The edge variable for a concrete bag assignment, or nullopt when the term
// dies (hom target with both endpoints on the same host vertex: K_n has no
// loops).
inline std::optional<VariableId> edge_variable(PolyKind poly, int i, int u, int j, int v) {
    if (poly == PolyKind::coliso) return VariableId::colored_edge(i, u, j, v);
    if (u == v) return std::nullopt;
    return VariableId::host_edge(u, v);
}

inline void require_compilable(const PatternGraph& h, int n) {
    if (n < 1) throw std::invalid_argument("host size must be >= 1");
    if (h.vertex_count() > 16) throw std::invalid_argument("compilers support patterns with k <= 16");
    if (!h.connected()) throw std::invalid_argument("compilers require a connected pattern");
}

// Rooted view of a tree decomposition: children lists and parents, rooted at
// bag 0 (bags indices are stable, so outputs are reproducible).
struct RootedDecomposition {
    std::vector<std::vector<int>> children;
    std::vector<int> parent;
    std::vector<int> order; // post-order
    int root = 0;

    RootedDecomposition(const TreeDecomposition& t) {
        const int nb = static_cast<int>(t.bags.size());
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(nb));
        for (auto [a, b] : t.tree_edges) {
            adj[static_cast<std::size_t>(a)].push_back(b);
            adj[static_cast<std::size_t>(b)].push_back(a);
        }
        for (auto& l : adj) std::sort(l.begin(), l.end());
        children.assign(static_cast<std::size_t>(nb), {});
        parent.assign(static_cast<std::size_t>(nb), -1);
        std::vector<int> stack{root};
        std::vector<char> seen(static_cast<std::size_t>(nb), 0);
        seen[static_cast<std::size_t>(root)] = 1;
        std::vector<int> pre;
        while (!stack.empty()) {
            int b = stack.back();
            stack.pop_back();
            pre.push_back(b);
            for (int nbg : adj[static_cast<std::size_t>(b)])
                if (!seen[static_cast<std::size_t>(nbg)]) {
                    seen[static_cast<std::size_t>(nbg)] = 1;
                    parent[static_cast<std::size_t>(nbg)] = b;
                    children[static_cast<std::size_t>(b)].push_back(nbg);
                    stack.push_back(nbg);
                }
        }
        for (auto& l : children) std::sort(l.begin(), l.end());
        // post-order from the preorder
        order.assign(pre.rbegin(), pre.rend());
    }
};

// Enumerate assignments bag -> [n] as vectors aligned with the sorted bag.
// Odometer order keeps gate layouts deterministic.
template <typename Fn>
void for_each_assignment(std::size_t slots, int n, Fn&& fn) {
    std::vector<int> a(slots, 1);
    if (slots == 0) {
        fn(a);
        return;
    }
    while (true) {
        fn(a);
        std::size_t pos = 0;
        while (pos < slots) {
            if (a[pos] < n) {
                ++a[pos];
                for (std::size_t q = 0; q < pos; ++q) a[q] = 1;
                break;
            }
            ++pos;
        }
        if (pos == slots) break;
    }
}

inline std::size_t assignment_space(std::size_t slots, int n) {
    std::size_t s = 1;
    for (std::size_t i = 0; i < slots; ++i) {
        if (s > guard_limit()) return s;
        s *= static_cast<std::size_t>(n);
    }
    return s;
}

} // namespace detail

// Tree-decomposition backend: one gate block per (bag, assignment); child
// tables are folded in through shared partial sums over the bag overlap;
// every pattern edge is multiplied at the topmost bag containing both ends.
// Output is a monotone circuit of size O(n^(width+1)).
inline Circuit compile_circuit(const PatternGraph& h, const TreeDecomposition& t, int n, PolyKind poly) {
    detail::require_compilable(h, n);
    if (auto v = validate_tree_decomposition(h, t); !v)
        throw std::invalid_argument("invalid tree decomposition: " + v.message);
    detail::RootedDecomposition rooted(t);
    const int nb = static_cast<int>(t.bags.size());

    // depth of each bag from the root, to find topmost covering bags
    std::vector<int> bagdepth(static_cast<std::size_t>(nb), 0);
    for (int b : rooted.order) {
    }
    {
        std::vector<int> pre(rooted.order.rbegin(), rooted.order.rend());
        for (int b : pre)
            if (rooted.parent[static_cast<std::size_t>(b)] >= 0)
                bagdepth[static_cast<std::size_t>(b)] =
                    bagdepth[static_cast<std::size_t>(rooted.parent[static_cast<std::size_t>(b)])] + 1;
    }
    // edge -> designated bag
    std::vector<std::vector<std::pair<int, int>>> edges_at(static_cast<std::size_t>(nb));
    for (auto [i, j] : h.edges()) {
        int best = -1;
        for (int b = 0; b < nb; ++b) {
            const auto& bag = t.bags[static_cast<std::size_t>(b)];
            if (std::find(bag.begin(), bag.end(), i) != bag.end() &&
                std::find(bag.begin(), bag.end(), j) != bag.end())
                if (best == -1 || bagdepth[static_cast<std::size_t>(b)] < bagdepth[static_cast<std::size_t>(best)])
                    best = b;
        }
        edges_at[static_cast<std::size_t>(best)].emplace_back(i, j);
    }
    for (auto& es : edges_at) std::sort(es.begin(), es.end());

    std::size_t budget = 0;
    for (int b = 0; b < nb; ++b)
        budget += detail::assignment_space(t.bags[static_cast<std::size_t>(b)].size(), n);
    if (budget > guard_limit())
        throw ResourceError("compile_circuit: gate block count exceeds guard");

    Circuit c;
    std::map<VariableId, std::int32_t> inputs;
    auto input_gate = [&](const VariableId& v) {
        auto it = inputs.find(v);
        if (it != inputs.end()) return it->second;
        std::int32_t g = c.add_input(v);
        inputs.emplace(v, g);
        return g;
    };

    // per-bag tables: assignment vector (aligned to sorted bag) -> gate, -1 dead
    std::vector<std::map<std::vector<int>, std::int32_t>> table(static_cast<std::size_t>(nb));
    for (int b : rooted.order) {
        const auto& bag = t.bags[static_cast<std::size_t>(b)];
        // shared partial sums per child over the overlap with this bag
        std::vector<std::map<std::vector<int>, std::int32_t>> child_summary;
        std::vector<std::vector<std::size_t>> overlap_slots; // positions in child's bag
        for (int ch : rooted.children[static_cast<std::size_t>(b)]) {
            const auto& cbag = t.bags[static_cast<std::size_t>(ch)];
            std::vector<std::size_t> slots;
            for (std::size_t s = 0; s < cbag.size(); ++s)
                if (std::find(bag.begin(), bag.end(), cbag[s]) != bag.end()) slots.push_back(s);
            std::map<std::vector<int>, std::vector<std::int32_t>> groups;
            for (auto& [assign, gate] : table[static_cast<std::size_t>(ch)]) {
                if (gate < 0) continue;
                std::vector<int> key;
                key.reserve(slots.size());
                for (std::size_t s : slots) key.push_back(assign[s]);
                groups[std::move(key)].push_back(gate);
            }
            std::map<std::vector<int>, std::int32_t> summary;
            for (auto& [key, gates] : groups) summary.emplace(key, balanced_add(c, gates));
            child_summary.push_back(std::move(summary));
            overlap_slots.push_back(std::move(slots));
        }

        auto& tbl = table[static_cast<std::size_t>(b)];
        detail::for_each_assignment(bag.size(), n, [&](const std::vector<int>& assign) {
            auto value_of = [&](int vertex) {
                auto it = std::find(bag.begin(), bag.end(), vertex);
                return assign[static_cast<std::size_t>(it - bag.begin())];
            };
            std::vector<std::int32_t> factors;
            bool dead = false;
            for (std::size_t ci = 0; ci < child_summary.size() && !dead; ++ci) {
                int ch = rooted.children[static_cast<std::size_t>(b)][ci];
                const auto& cbag = t.bags[static_cast<std::size_t>(ch)];
                std::vector<int> key;
                for (std::size_t s : overlap_slots[ci]) key.push_back(value_of(cbag[s]));
                auto it = child_summary[ci].find(key);
                if (it == child_summary[ci].end())
                    dead = true; // all child extensions died
                else
                    factors.push_back(it->second);
            }
            if (!dead)
                for (auto [i, j] : edges_at[static_cast<std::size_t>(b)]) {
                    auto var = detail::edge_variable(poly, i, value_of(i), j, value_of(j));
                    if (!var) {
                        dead = true;
                        break;
                    }
                    factors.push_back(input_gate(*var));
                }
            tbl.emplace(assign, dead ? -1 : balanced_mul(c, factors));
        });
    }

    std::vector<std::int32_t> live;
    for (auto& [assign, gate] : table[static_cast<std::size_t>(rooted.root)])
        if (gate >= 0) live.push_back(gate);
    c.set_output(balanced_add(c, live));
    return normalize(c);
}

// Path-decomposition backend: a layered branching program realized as a skew
// circuit. States are (active set, assignment); introduce steps fan states
// out, each edge is multiplied on its own transition, forget steps merge by
// addition. Size O(n^(width+1)).
inline Circuit compile_abp(const PatternGraph& h, const PathDecomposition& p, int n, PolyKind poly) {
    detail::require_compilable(h, n);
    if (auto v = validate_path_decomposition(h, p); !v)
        throw std::invalid_argument("invalid path decomposition: " + v.message);
    const int nb = static_cast<int>(p.bags.size());
    const int k = h.vertex_count();

    std::vector<int> first(static_cast<std::size_t>(k) + 1, -1), last(static_cast<std::size_t>(k) + 1, -1);
    for (int b = 0; b < nb; ++b)
        for (int v : p.bags[static_cast<std::size_t>(b)]) {
            if (first[static_cast<std::size_t>(v)] < 0) first[static_cast<std::size_t>(v)] = b;
            last[static_cast<std::size_t>(v)] = b;
        }
    // edge -> first bag containing both endpoints
    std::vector<std::vector<std::pair<int, int>>> edges_at(static_cast<std::size_t>(nb));
    for (auto [i, j] : h.edges()) {
        for (int b = 0; b < nb; ++b) {
            const auto& bag = p.bags[static_cast<std::size_t>(b)];
            if (std::find(bag.begin(), bag.end(), i) != bag.end() &&
                std::find(bag.begin(), bag.end(), j) != bag.end()) {
                edges_at[static_cast<std::size_t>(b)].emplace_back(i, j);
                break;
            }
        }
    }
    for (auto& es : edges_at) std::sort(es.begin(), es.end());

    Circuit c;
    std::map<VariableId, std::int32_t> inputs;
    auto input_gate = [&](const VariableId& v) {
        auto it = inputs.find(v);
        if (it != inputs.end()) return it->second;
        std::int32_t g = c.add_input(v);
        inputs.emplace(v, g);
        return g;
    };

    // states: sorted active vertex list + parallel assignment -> gate
    std::vector<int> active;
    std::map<std::vector<int>, std::int32_t> states;
    states.emplace(std::vector<int>{}, c.add_const(1));

    auto guard_states = [&]() {
        if (states.size() > guard_limit()) throw ResourceError("compile_abp: state count exceeds guard");
    };

    for (int b = 0; b < nb; ++b) {
        // introduce
        for (int v : p.bags[static_cast<std::size_t>(b)]) {
            if (first[static_cast<std::size_t>(v)] != b) continue;
            auto pos = std::lower_bound(active.begin(), active.end(), v) - active.begin();
            std::map<std::vector<int>, std::int32_t> next;
            for (auto& [assign, gate] : states)
                for (int u = 1; u <= n; ++u) {
                    std::vector<int> na = assign;
                    na.insert(na.begin() + pos, u);
                    next.emplace(std::move(na), gate);
                }
            active.insert(active.begin() + pos, v);
            states = std::move(next);
            guard_states();
        }
        // multiply designated edges, one variable per transition (skew)
        for (auto [i, j] : edges_at[static_cast<std::size_t>(b)]) {
            auto pi = std::lower_bound(active.begin(), active.end(), i) - active.begin();
            auto pj = std::lower_bound(active.begin(), active.end(), j) - active.begin();
            std::map<std::vector<int>, std::int32_t> next;
            for (auto& [assign, gate] : states) {
                auto var = detail::edge_variable(poly, i, assign[static_cast<std::size_t>(pi)], j,
                                                 assign[static_cast<std::size_t>(pj)]);
                if (!var) continue;
                next.emplace(assign, c.add_mul(input_gate(*var), gate));
            }
            states = std::move(next);
        }
        // forget vertices whose last bag this is
        for (int v : p.bags[static_cast<std::size_t>(b)]) {
            if (last[static_cast<std::size_t>(v)] != b) continue;
            auto pos = std::lower_bound(active.begin(), active.end(), v) - active.begin();
            std::map<std::vector<int>, std::vector<std::int32_t>> groups;
            for (auto& [assign, gate] : states) {
                std::vector<int> na = assign;
                na.erase(na.begin() + pos);
                groups[std::move(na)].push_back(gate);
            }
            std::map<std::vector<int>, std::int32_t> next;
            for (auto& [assign, gates] : groups) next.emplace(assign, balanced_add(c, gates));
            active.erase(active.begin() + pos);
            states = std::move(next);
        }
    }
    if (states.empty()) {
        c.set_output(c.add_const(0));
    } else {
        c.set_output(states.begin()->second);
    }
    Circuit out = normalize(c);
    if (auto rep = validate(out, Flavor::skew); !rep) throw InternalError("ABP backend produced a non-skew circuit");
    return out;
}

namespace detail {

// f_i for an elimination-tree node i under a fixed assignment of its
// ancestors: sum over the n images of i of the product of edge variables to
// adjacent ancestors and the recursively built child formulas. Fresh gates
// everywhere keep out-degree one.
inline std::int32_t formula_node(Circuit& c, const PatternGraph& h, const EliminationTree& t, int n, int node,
                                 std::vector<std::pair<int, int>>& context,
                                 const std::vector<std::vector<int>>& children) {
    std::vector<std::int32_t> terms;
    terms.reserve(static_cast<std::size_t>(n));
    for (int u = 1; u <= n; ++u) {
        std::vector<std::int32_t> factors;
        for (auto [anc, val] : context)
            if (h.has_edge(anc, node))
                factors.push_back(c.add_input(VariableId::colored_edge(anc, val, node, u)));
        context.emplace_back(node, u);
        for (int ch : children[static_cast<std::size_t>(node)])
            factors.push_back(formula_node(c, h, t, n, ch, context, children));
        context.pop_back();
        terms.push_back(balanced_mul(c, factors));
    }
    return balanced_add(c, terms);
}

} // namespace detail

// Elimination-tree backend: the recursive formula over root paths. Computes
// ColIso of the ancestor-closed supergraph with the non-pattern edges fixed
// to one (realized by omitting those factors); hom is obtained by the
// coliso-to-hom substitution. Monotone formula of size O(n^depth).
inline Circuit compile_formula(const PatternGraph& h, const EliminationTree& t, int n, PolyKind poly) {
    detail::require_compilable(h, n);
    if (auto v = validate_elimination_tree(h, t); !v)
        throw std::invalid_argument("invalid elimination tree: " + v.message);
    const int k = h.vertex_count();
    std::size_t budget = 1;
    for (int d = 0; d < t.depth(); ++d) {
        budget *= static_cast<std::size_t>(n);
        if (budget > guard_limit()) throw ResourceError("compile_formula: size exceeds guard");
    }
    std::vector<std::vector<int>> children(static_cast<std::size_t>(k) + 1);
    for (int v = 1; v <= k; ++v)
        if (v != t.root) children[static_cast<std::size_t>(t.parent[static_cast<std::size_t>(v)])].push_back(v);
    for (auto& l : children) std::sort(l.begin(), l.end());
    Circuit c;
    std::vector<std::pair<int, int>> context;
    c.set_output(detail::formula_node(c, h, t, n, t.root, context, children));
    Circuit out = normalize(c);
    if (poly == PolyKind::hom) out = coliso_to_hom(out);
    if (auto rep = validate(out, Flavor::formula); !rep)
        throw InternalError("formula backend produced a non-formula circuit");
    return out;
}

// Replace each x[(i,u),(j,v)] with x[u,v] (or zero when u == v). Gate-local;
// preserves monotone, skew, and formula flavors.
inline Circuit coliso_to_hom(const Circuit& c) {
    SubstitutionRule rule;
    for (const VariableId& v : c.variables()) {
        if (v.kind != VariableId::Kind::colored_edge) continue;
        if (v.b == v.d)
            rule.emplace(v, SubstTarget::to_constant(0));
        else
            rule.emplace(v, SubstTarget::to_variable(VariableId::host_edge(v.b, v.d)));
    }
    return normalize(substitute(c, rule));
}

// Host vertex index for color i, slot u when Hom is compiled over the vertex
// set [k] x [n].
inline int layered_host_vertex(int i, int u, int n) { return (i - 1) * n + u; }

// Lemma-style transformation from a circuit computing Hom over the vertex set
// [k] x [n] to one computing ColIso_{H,n} exactly (coefficient one per
// colored isomorphism): substitute each cross-color edge variable by
// x * w_{ij} (and same-color or non-pattern-color pairs by zero), take one
// partial derivative per pattern edge, set the w's to zero, and divide by
// aut(H) at the output.
inline Circuit hom_to_coliso(const Circuit& c, const PatternGraph& h, int n) {
    SubstitutionRule rule;
    for (const VariableId& v : c.variables()) {
        if (v.kind != VariableId::Kind::host_edge) continue;
        int a = v.a, b = v.b;
        int i = (a - 1) / n + 1, u = (a - 1) % n + 1;
        int j = (b - 1) / n + 1, w = (b - 1) % n + 1;
        if (i == j || !h.has_edge(i, j)) {
            rule.emplace(v, SubstTarget::to_constant(0));
        } else {
            rule.emplace(v, SubstTarget::to_product(VariableId::colored_edge(i, u, j, w),
                                                    VariableId::aux(i, j)));
        }
    }
    Circuit cur = normalize(substitute(c, rule));
    for (auto [i, j] : h.edges()) cur = partial_derivative(cur, VariableId::aux(i, j));
    SubstitutionRule kill;
    for (auto [i, j] : h.edges()) kill.emplace(VariableId::aux(i, j), SubstTarget::to_constant(0));
    cur = normalize(substitute(cur, kill));
    Integer aut = Integer(automorphism_count(h));
    Circuit out;
    std::vector<std::int32_t> map(static_cast<std::size_t>(cur.gate_count()), -1);
    for (std::int32_t gi = 0; gi < cur.gate_count(); ++gi) {
        const Gate& g = cur.gate(gi);
        switch (g.op) {
        case GateOp::input:
            map[static_cast<std::size_t>(gi)] = out.add_input(g.var);
            break;
        case GateOp::constant:
            map[static_cast<std::size_t>(gi)] = out.add_const(g.value);
            break;
        case GateOp::add:
            map[static_cast<std::size_t>(gi)] =
                out.add_add(map[static_cast<std::size_t>(g.lhs)], map[static_cast<std::size_t>(g.rhs)]);
            break;
        case GateOp::mul:
            map[static_cast<std::size_t>(gi)] =
                out.add_mul(map[static_cast<std::size_t>(g.lhs)], map[static_cast<std::size_t>(g.rhs)]);
            break;
        }
    }
    std::int32_t scale = out.add_const(Rational(1, aut));
    out.set_output(out.add_mul(map[static_cast<std::size_t>(cur.output())], scale));
    return out;
}

struct CompileReport {
    std::string model;
    std::string poly;
    int n = 0;
    int certificate = 0; // width or depth of the certificate used
    std::string bound;   // n^e exponent description
    int circuit_size = 0;
    int circuit_depth = 0;
};

} // namespace homcount
