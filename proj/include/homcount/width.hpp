#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "graph.hpp"

namespace homcount {

struct TreeDecomposition {
    std::vector<std::vector<int>> bags;
    std::vector<std::pair<int, int>> tree_edges; // 0-based bag indices
    int width() const {
        int w = -1;
        for (const auto& b : bags) w = std::max(w, static_cast<int>(b.size()) - 1);
        return w;
    }
};

struct PathDecomposition {
    std::vector<std::vector<int>> bags; // in path order
    int width() const {
        int w = -1;
        for (const auto& b : bags) w = std::max(w, static_cast<int>(b.size()) - 1);
        return w;
    }
    TreeDecomposition as_tree() const {
        TreeDecomposition t;
        t.bags = bags;
        for (std::size_t i = 0; i + 1 < bags.size(); ++i)
            t.tree_edges.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
        return t;
    }
};

// Rooted tree on V(H); parent[v] == 0 marks the root. Depth counts vertices
// on the longest root-to-leaf path.
struct EliminationTree {
    std::vector<int> parent; // index 1..k; parent[root] == 0
    int root = 0;
    int vertex_count() const { return static_cast<int>(parent.size()) - 1; }
    int depth() const {
        const int k = vertex_count();
        int best = 0;
        for (int v = 1; v <= k; ++v) {
            int d = 0, cur = v;
            while (cur != 0 && d <= k) {
                ++d;
                cur = parent[static_cast<std::size_t>(cur)];
            }
            best = std::max(best, d);
        }
        return best;
    }
};

// Validation outcome. `structural` marks shape errors (not a tree, bad
// labels) as opposed to decomposition-property violations.
struct ValidationResult {
    bool ok = true;
    bool structural = false;
    std::string message;
    explicit operator bool() const { return ok; }
    static ValidationResult valid() { return {}; }
    static ValidationResult violation(std::string msg) { return {false, false, std::move(msg)}; }
    static ValidationResult structural_error(std::string msg) { return {false, true, std::move(msg)}; }
};

namespace detail {
// Are the given edges a tree on nodes 0..count-1?
inline bool edges_form_tree(int count, const std::vector<std::pair<int, int>>& edges) {
    if (count == 0) return false;
    if (static_cast<int>(edges.size()) != count - 1) return false;
    std::vector<int> parent(static_cast<std::size_t>(count));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (auto [a, b] : edges) {
        if (a < 0 || a >= count || b < 0 || b >= count || a == b) return false;
        int ra = find(a), rb = find(b);
        if (ra == rb) return false;
        parent[static_cast<std::size_t>(ra)] = rb;
    }
    return true;
}
} // namespace detail

inline ValidationResult validate_tree_decomposition(const PatternGraph& h, const TreeDecomposition& t) {
    const int k = h.vertex_count();
    const int nbags = static_cast<int>(t.bags.size());
    for (const auto& bag : t.bags)
        for (int v : bag)
            if (v < 1 || v > k)
                return ValidationResult::structural_error("bag contains vertex outside [k]: " + std::to_string(v));
    if (!detail::edges_form_tree(nbags, t.tree_edges))
        return ValidationResult::structural_error("bag edges do not form a tree");
    for (int v = 1; v <= k; ++v) {
        bool found = false;
        for (const auto& bag : t.bags)
            if (std::find(bag.begin(), bag.end(), v) != bag.end()) {
                found = true;
                break;
            }
        if (!found) return ValidationResult::violation("vertex " + std::to_string(v) + " in no bag");
    }
    for (auto [i, j] : h.edges()) {
        bool covered = false;
        for (const auto& bag : t.bags) {
            bool bi = std::find(bag.begin(), bag.end(), i) != bag.end();
            bool bj = std::find(bag.begin(), bag.end(), j) != bag.end();
            if (bi && bj) {
                covered = true;
                break;
            }
        }
        if (!covered)
            return ValidationResult::violation("edge {" + std::to_string(i) + "," + std::to_string(j) +
                                               "} covered by no bag");
    }
    // per-vertex bag sets must be connected in the bag tree
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(nbags));
    for (auto [a, b] : t.tree_edges) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    }
    for (int v = 1; v <= k; ++v) {
        std::vector<int> holding;
        for (int b = 0; b < nbags; ++b) {
            const auto& bag = t.bags[static_cast<std::size_t>(b)];
            if (std::find(bag.begin(), bag.end(), v) != bag.end()) holding.push_back(b);
        }
        if (holding.empty()) continue;
        std::vector<char> inset(static_cast<std::size_t>(nbags), 0), seen(static_cast<std::size_t>(nbags), 0);
        for (int b : holding) inset[static_cast<std::size_t>(b)] = 1;
        std::vector<int> stack{holding.front()};
        seen[static_cast<std::size_t>(holding.front())] = 1;
        std::size_t reached = 1;
        while (!stack.empty()) {
            int b = stack.back();
            stack.pop_back();
            for (int nb : adj[static_cast<std::size_t>(b)])
                if (inset[static_cast<std::size_t>(nb)] && !seen[static_cast<std::size_t>(nb)]) {
                    seen[static_cast<std::size_t>(nb)] = 1;
                    ++reached;
                    stack.push_back(nb);
                }
        }
        if (reached != holding.size())
            return ValidationResult::violation("bags containing vertex " + std::to_string(v) +
                                               " do not induce a subtree");
    }
    return ValidationResult::valid();
}

inline ValidationResult validate_path_decomposition(const PatternGraph& h, const PathDecomposition& p) {
    if (p.bags.empty()) return ValidationResult::structural_error("path decomposition has no bags");
    return validate_tree_decomposition(h, p.as_tree());
}

inline ValidationResult validate_elimination_tree(const PatternGraph& h, const EliminationTree& t) {
    const int k = h.vertex_count();
    if (static_cast<int>(t.parent.size()) != k + 1)
        return ValidationResult::structural_error("parent table must label exactly V(H)");
    if (t.root < 1 || t.root > k || t.parent[static_cast<std::size_t>(t.root)] != 0)
        return ValidationResult::structural_error("bad root");
    for (int v = 1; v <= k; ++v) {
        if (v == t.root) continue;
        int p = t.parent[static_cast<std::size_t>(v)];
        if (p < 1 || p > k || p == v)
            return ValidationResult::structural_error("bad parent for vertex " + std::to_string(v));
    }
    for (int v = 1; v <= k; ++v) {
        int cur = v, steps = 0;
        while (cur != t.root) {
            cur = t.parent[static_cast<std::size_t>(cur)];
            if (cur == 0 || ++steps > k)
                return ValidationResult::structural_error("parent links do not form a tree rooted at " +
                                                          std::to_string(t.root));
        }
    }
    auto is_ancestor = [&](int a, int d) {
        int cur = d;
        while (cur != 0) {
            if (cur == a) return true;
            cur = t.parent[static_cast<std::size_t>(cur)];
        }
        return false;
    };
    for (auto [i, j] : h.edges())
        if (!is_ancestor(i, j) && !is_ancestor(j, i))
            return ValidationResult::violation("edge {" + std::to_string(i) + "," + std::to_string(j) +
                                               "} not ancestor-descendant");
    return ValidationResult::valid();
}

namespace detail {

// Vertices outside S+{v} reachable from v via paths internal to S.
inline VertexMask elimination_neighborhood(const PatternGraph& h, VertexMask s, int v) {
    VertexMask reach = h.component_of(v, s | (VertexMask{1} << (v - 1)));
    VertexMask nb = 0;
    VertexMask r = reach;
    while (r) {
        int u = std::countr_zero(r) + 1;
        r &= r - 1;
        nb |= h.neighbors(u);
    }
    return nb & ~s & ~(VertexMask{1} << (v - 1));
}

// Number of vertices in S with a neighbour outside S.
inline int boundary_size(const PatternGraph& h, VertexMask s) {
    int b = 0;
    VertexMask r = s;
    VertexMask outside = h.full_mask() & ~s;
    while (r) {
        int u = std::countr_zero(r) + 1;
        r &= r - 1;
        if (h.neighbors(u) & outside) ++b;
    }
    return b;
}

// Witness decomposition from an elimination ordering via fill-in simulation:
// bag_i = {v_i} + later fill-neighbours, attached at the bag of the
// earliest-eliminated later neighbour.
inline TreeDecomposition decomposition_from_ordering(const PatternGraph& h, const std::vector<int>& order) {
    const int k = h.vertex_count();
    std::vector<VertexMask> fill(static_cast<std::size_t>(k) + 1);
    for (int v = 1; v <= k; ++v) fill[static_cast<std::size_t>(v)] = h.neighbors(v);
    std::vector<int> pos(static_cast<std::size_t>(k) + 1, 0);
    for (int i = 0; i < k; ++i) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;
    TreeDecomposition t;
    t.bags.resize(static_cast<std::size_t>(k));
    std::vector<VertexMask> later(static_cast<std::size_t>(k));
    VertexMask eliminated = 0;
    for (int i = 0; i < k; ++i) {
        int v = order[static_cast<std::size_t>(i)];
        VertexMask lat = fill[static_cast<std::size_t>(v)] & ~eliminated;
        later[static_cast<std::size_t>(i)] = lat;
        std::vector<int> bag{v};
        VertexMask r = lat;
        while (r) {
            int u = std::countr_zero(r) + 1;
            r &= r - 1;
            bag.push_back(u);
        }
        std::sort(bag.begin(), bag.end());
        t.bags[static_cast<std::size_t>(i)] = std::move(bag);
        VertexMask a = lat;
        while (a) {
            int u = std::countr_zero(a) + 1;
            a &= a - 1;
            fill[static_cast<std::size_t>(u)] |= lat & ~(VertexMask{1} << (u - 1));
        }
        eliminated |= VertexMask{1} << (v - 1);
    }
    for (int i = 0; i < k; ++i) {
        VertexMask lat = later[static_cast<std::size_t>(i)];
        int attach;
        if (lat) {
            attach = k;
            VertexMask r = lat;
            while (r) {
                int u = std::countr_zero(r) + 1;
                r &= r - 1;
                attach = std::min(attach, pos[static_cast<std::size_t>(u)]);
            }
        } else if (i + 1 < k) {
            attach = i + 1;
        } else {
            continue; // last bag is the root
        }
        t.tree_edges.emplace_back(i, attach);
    }
    return t;
}

} // namespace detail

// Exact treewidth by subset DP over elimination orderings (k <= 16), with a
// validating witness decomposition. Ties pick the smallest vertex.
inline std::pair<int, TreeDecomposition> treewidth_exact(const PatternGraph& h) {
    const int k = h.vertex_count();
    if (k > 16) throw std::invalid_argument("treewidth_exact supports k <= 16");
    const std::uint32_t full = static_cast<std::uint32_t>(h.full_mask());
    std::vector<std::int8_t> f(static_cast<std::size_t>(full) + 1, 0);
    std::vector<std::int8_t> choice(static_cast<std::size_t>(full) + 1, 0);
    for (std::uint32_t s = 1; s <= full; ++s) {
        int best = std::numeric_limits<int>::max();
        int bestv = 0;
        std::uint32_t r = s;
        while (r) {
            int v = std::countr_zero(r) + 1;
            r &= r - 1;
            std::uint32_t prev = s & ~(1u << (v - 1));
            int q = std::popcount(detail::elimination_neighborhood(h, prev, v));
            int cand = std::max(static_cast<int>(f[prev]), q);
            if (cand < best) {
                best = cand;
                bestv = v;
            }
        }
        f[s] = static_cast<std::int8_t>(best);
        choice[s] = static_cast<std::int8_t>(bestv);
    }
    std::vector<int> order(static_cast<std::size_t>(k));
    std::uint32_t s = full;
    for (int i = k - 1; i >= 0; --i) {
        int v = choice[s];
        order[static_cast<std::size_t>(i)] = v;
        s &= ~(1u << (v - 1));
    }
    TreeDecomposition t = detail::decomposition_from_ordering(h, order);
    int tw = f[full];
    if (t.width() != tw) throw InternalError("treewidth witness width mismatch");
    if (!validate_tree_decomposition(h, t)) throw InternalError("treewidth witness invalid");
    return {tw, std::move(t)};
}

namespace detail {

// Path decomposition realizing a vertex-separation ordering:
// bag_i = boundary(prefix before v_i) + {v_i}.
inline PathDecomposition path_decomposition_from_ordering(const PatternGraph& h, const std::vector<int>& order) {
    const int k = h.vertex_count();
    PathDecomposition p;
    VertexMask prefix = 0;
    for (int i = 0; i < k; ++i) {
        int v = order[static_cast<std::size_t>(i)];
        std::vector<int> bag;
        VertexMask r = prefix;
        VertexMask outside = h.full_mask() & ~prefix;
        while (r) {
            int u = std::countr_zero(r) + 1;
            r &= r - 1;
            if (h.neighbors(u) & outside) bag.push_back(u);
        }
        bag.push_back(v);
        std::sort(bag.begin(), bag.end());
        p.bags.push_back(std::move(bag));
        prefix |= VertexMask{1} << (v - 1);
    }
    return p;
}

// --- tree-specific pathwidth (vertex separation of trees) -----------------
//
// Classical characterizations: vs(T) >= p+1 iff some vertex has three
// components of T-v with vs >= p; and vs(T) <= p iff there is a path P such
// that every component of T - V(P) has vs <= p-1. The layout recurses on the
// spine path.
struct TreePathwidthSolver {
    const PatternGraph& h;
    std::unordered_map<VertexMask, int> memo;

    explicit TreePathwidthSolver(const PatternGraph& g) : h(g) {}

    int vs(VertexMask mask) {
        if (std::popcount(mask) == 1) return 0;
        auto it = memo.find(mask);
        if (it != memo.end()) return it->second;
        bool has_edge = false;
        int best = 0;
        VertexMask r = mask;
        while (r) {
            int v = std::countr_zero(r) + 1;
            r &= r - 1;
            VertexMask rest = mask & ~(VertexMask{1} << (v - 1));
            if (h.neighbors(v) & rest) has_edge = true;
            auto comps = h.components(rest);
            if (comps.size() >= 3) {
                std::vector<int> vals;
                vals.reserve(comps.size());
                for (auto c : comps) vals.push_back(vs(c));
                std::sort(vals.rbegin(), vals.rend());
                best = std::max(best, vals[2] + 1);
            }
        }
        int result = std::max(best, has_edge ? 1 : 0);
        memo.emplace(mask, result);
        return result;
    }

    // Vertices of the unique tree path between a and b inside mask.
    std::vector<int> tree_path(VertexMask mask, int a, int b) {
        std::vector<int> par(static_cast<std::size_t>(h.vertex_count()) + 1, -1);
        std::vector<int> stack{a};
        par[static_cast<std::size_t>(a)] = 0;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            VertexMask nb = h.neighbors(v) & mask;
            while (nb) {
                int u = std::countr_zero(nb) + 1;
                nb &= nb - 1;
                if (par[static_cast<std::size_t>(u)] == -1) {
                    par[static_cast<std::size_t>(u)] = v;
                    stack.push_back(u);
                }
            }
        }
        std::vector<int> path;
        for (int cur = b; cur != 0; cur = par[static_cast<std::size_t>(cur)]) path.push_back(cur);
        std::reverse(path.begin(), path.end());
        return path;
    }

    PathDecomposition layout(VertexMask mask) {
        int target = vs(mask);
        if (std::popcount(mask) == 1) {
            PathDecomposition p;
            p.bags.push_back({std::countr_zero(mask) + 1});
            return p;
        }
        std::vector<int> verts;
        VertexMask r = mask;
        while (r) {
            verts.push_back(std::countr_zero(r) + 1);
            r &= r - 1;
        }
        for (std::size_t ai = 0; ai < verts.size(); ++ai) {
            for (std::size_t bi = ai; bi < verts.size(); ++bi) {
                std::vector<int> path = tree_path(mask, verts[ai], verts[bi]);
                VertexMask pathmask = 0;
                for (int v : path) pathmask |= VertexMask{1} << (v - 1);
                bool ok = true;
                for (auto c : h.components(mask & ~pathmask))
                    if (vs(c) > target - 1) {
                        ok = false;
                        break;
                    }
                if (!ok) continue;
                PathDecomposition out;
                for (std::size_t pi = 0; pi < path.size(); ++pi) {
                    int v = path[pi];
                    out.bags.push_back({v});
                    VertexMask nb = h.neighbors(v) & mask & ~pathmask;
                    while (nb) {
                        int u = std::countr_zero(nb) + 1;
                        nb &= nb - 1;
                        VertexMask comp = h.component_of(u, mask & ~pathmask);
                        nb &= ~comp;
                        PathDecomposition sub = layout(comp);
                        for (auto& bag : sub.bags) {
                            bag.push_back(v);
                            std::sort(bag.begin(), bag.end());
                            out.bags.push_back(std::move(bag));
                        }
                    }
                    if (pi + 1 < path.size())
                        out.bags.push_back({std::min(v, path[pi + 1]), std::max(v, path[pi + 1])});
                }
                return out;
            }
        }
        throw InternalError("tree pathwidth layout: no spine path found");
    }
};

inline bool is_tree(const PatternGraph& h) {
    return h.connected() && h.edge_count() == h.vertex_count() - 1;
}

} // namespace detail

// Exact pathwidth: subset DP over vertex-separation orderings for k <= 16;
// trees solved by the branch-characterization recursion (usable past 16).
inline std::pair<int, PathDecomposition> pathwidth_exact(const PatternGraph& h) {
    const int k = h.vertex_count();
    if (k > 16) {
        if (!detail::is_tree(h)) throw std::invalid_argument("pathwidth_exact supports k <= 16 (trees up to 50)");
        if (k > 50) throw std::invalid_argument("pathwidth_exact supports trees up to 50 vertices");
        detail::TreePathwidthSolver solver(h);
        int pw = solver.vs(h.full_mask());
        PathDecomposition p = solver.layout(h.full_mask());
        if (p.width() != pw) throw InternalError("tree pathwidth witness width mismatch");
        if (!validate_path_decomposition(h, p)) throw InternalError("tree pathwidth witness invalid");
        return {pw, std::move(p)};
    }
    const std::uint32_t full = static_cast<std::uint32_t>(h.full_mask());
    std::vector<std::int8_t> f(static_cast<std::size_t>(full) + 1, 0);
    std::vector<std::int8_t> choice(static_cast<std::size_t>(full) + 1, 0);
    for (std::uint32_t s = 1; s <= full; ++s) {
        int bnd = detail::boundary_size(h, s);
        int best = std::numeric_limits<int>::max();
        int bestv = 0;
        std::uint32_t r = s;
        while (r) {
            int v = std::countr_zero(r) + 1;
            r &= r - 1;
            std::uint32_t prev = s & ~(1u << (v - 1));
            int cand = std::max(static_cast<int>(f[prev]), bnd);
            if (cand < best) {
                best = cand;
                bestv = v;
            }
        }
        f[s] = static_cast<std::int8_t>(best);
        choice[s] = static_cast<std::int8_t>(bestv);
    }
    std::vector<int> order(static_cast<std::size_t>(k));
    std::uint32_t s = full;
    for (int i = k - 1; i >= 0; --i) {
        int v = choice[s];
        order[static_cast<std::size_t>(i)] = v;
        s &= ~(1u << (v - 1));
    }
    PathDecomposition p = detail::path_decomposition_from_ordering(h, order);
    int pw = f[full];
    if (p.width() != pw) throw InternalError("pathwidth witness width mismatch");
    if (!validate_path_decomposition(h, p)) throw InternalError("pathwidth witness invalid");
    return {pw, std::move(p)};
}

// Exact treedepth by memoized recursion over connected vertex subsets.
// Requires a connected pattern.
inline std::pair<int, EliminationTree> treedepth_exact(const PatternGraph& h) {
    if (h.vertex_count() > 16) throw std::invalid_argument("treedepth_exact supports k <= 16");
    if (!h.connected())
        throw std::invalid_argument("treedepth_exact: pattern is disconnected; "
                                    "compute per connected component and take the maximum");
    const int k = h.vertex_count();
    std::unordered_map<std::uint32_t, std::pair<int, int>> memo; // mask -> (depth, best root)
    auto solve = [&](auto&& self, std::uint32_t mask) -> int {
        if (std::popcount(mask) == 1) {
            memo.emplace(mask, std::make_pair(1, std::countr_zero(mask) + 1));
            return 1;
        }
        auto it = memo.find(mask);
        if (it != memo.end()) return it->second.first;
        int best = std::numeric_limits<int>::max();
        int bestv = 0;
        std::uint32_t r = mask;
        while (r) {
            int v = std::countr_zero(r) + 1;
            r &= r - 1;
            int worst = 0;
            for (auto c : h.components(mask & ~(std::uint32_t{1} << (v - 1))))
                worst = std::max(worst, self(self, static_cast<std::uint32_t>(c)));
            if (1 + worst < best) {
                best = 1 + worst;
                bestv = v;
            }
        }
        memo.emplace(mask, std::make_pair(best, bestv));
        return best;
    };
    int td = solve(solve, static_cast<std::uint32_t>(h.full_mask()));
    EliminationTree t;
    t.parent.assign(static_cast<std::size_t>(k) + 1, 0);
    auto build = [&](auto&& self, std::uint32_t mask, int parent) -> int {
        int v = memo.at(mask).second;
        t.parent[static_cast<std::size_t>(v)] = parent;
        for (auto c : h.components(mask & ~(std::uint32_t{1} << (v - 1))))
            self(self, static_cast<std::uint32_t>(c), v);
        return v;
    };
    t.root = build(build, static_cast<std::uint32_t>(h.full_mask()), 0);
    if (t.depth() != td) throw InternalError("treedepth witness depth mismatch");
    if (!validate_elimination_tree(h, t)) throw InternalError("treedepth witness invalid");
    return {td, std::move(t)};
}

// --- text formats ----------------------------------------------------------

inline void serialize(const TreeDecomposition& t, std::ostream& out) {
    out << "td " << t.bags.size() << "\n";
    for (std::size_t b = 0; b < t.bags.size(); ++b) {
        out << "b " << b;
        for (int v : t.bags[b]) out << " " << v;
        out << "\n";
    }
    for (auto [a, b] : t.tree_edges) out << "t " << a << " " << b << "\n";
}

inline void serialize(const PathDecomposition& p, std::ostream& out) { serialize(p.as_tree(), out); }

inline TreeDecomposition parse_tree_decomposition(std::istream& in) {
    std::string line;
    TreeDecomposition t;
    int declared = -1;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "td") {
            if (declared != -1) throw FormatError("decomposition: duplicate header");
            if (!(ls >> declared) || declared < 0) throw FormatError("decomposition: bad header: " + line);
            t.bags.resize(static_cast<std::size_t>(declared));
        } else if (tag == "b") {
            int id;
            if (declared < 0 || !(ls >> id) || id < 0 || id >= declared)
                throw FormatError("decomposition: bad bag line: " + line);
            std::vector<int> bag;
            int v;
            while (ls >> v) bag.push_back(v);
            t.bags[static_cast<std::size_t>(id)] = std::move(bag);
        } else if (tag == "t") {
            int a, b;
            if (!(ls >> a >> b)) throw FormatError("decomposition: bad tree edge: " + line);
            t.tree_edges.emplace_back(a, b);
        } else {
            throw FormatError("decomposition: unknown line: " + line);
        }
    }
    if (declared < 0) throw FormatError("decomposition: missing header");
    return t;
}

inline void serialize(const EliminationTree& t, std::ostream& out) {
    out << "et " << t.root << "\n";
    for (int v = 1; v <= t.vertex_count(); ++v)
        if (v != t.root) out << "c " << t.parent[static_cast<std::size_t>(v)] << " " << v << "\n";
}

inline EliminationTree parse_elimination_tree(std::istream& in) {
    std::string line;
    int root = -1;
    std::vector<std::pair<int, int>> links;
    int maxv = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "et") {
            if (root != -1) throw FormatError("elimination tree: duplicate header");
            if (!(ls >> root) || root < 1) throw FormatError("elimination tree: bad header: " + line);
            maxv = std::max(maxv, root);
        } else if (tag == "c") {
            int p, c;
            if (!(ls >> p >> c) || p < 1 || c < 1) throw FormatError("elimination tree: bad child line: " + line);
            links.emplace_back(p, c);
            maxv = std::max({maxv, p, c});
        } else {
            throw FormatError("elimination tree: unknown line: " + line);
        }
    }
    if (root < 0) throw FormatError("elimination tree: missing header");
    EliminationTree t;
    t.root = root;
    t.parent.assign(static_cast<std::size_t>(maxv) + 1, 0);
    for (auto [p, c] : links) {
        if (t.parent[static_cast<std::size_t>(c)] != 0 || c == root)
            throw FormatError("elimination tree: conflicting parent for " + std::to_string(c));
        t.parent[static_cast<std::size_t>(c)] = p;
    }
    return t;
}

} // namespace homcount
