#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace homcount {

// Vertex subsets of a pattern graph, bit v-1 for vertex v.
using VertexMask = std::uint64_t;

// Simple undirected pattern graph on vertices 1..k. Most algorithms are
// exponential in k and enforce k <= 16 themselves; the representation admits
// up to 64 vertices so that the tree-specific pathwidth recursion can handle
// larger trees.
class PatternGraph {
public:
    static constexpr int max_vertices = 64;

    PatternGraph(int k, std::vector<std::pair<int, int>> edges)
        : k_(k), edges_(std::move(edges)), adj_(static_cast<std::size_t>(k) + 1, 0) {
        if (k < 1 || k > max_vertices)
            throw std::invalid_argument("pattern vertex count must be in 1..64, got " + std::to_string(k));
        for (auto& e : edges_) {
            if (e.first > e.second) std::swap(e.first, e.second);
            if (e.first < 1 || e.second > k_ || e.first == e.second)
                throw std::invalid_argument("bad pattern edge {" + std::to_string(e.first) + "," +
                                            std::to_string(e.second) + "}");
        }
        std::sort(edges_.begin(), edges_.end());
        if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
            throw std::invalid_argument("duplicate pattern edge");
        for (auto [i, j] : edges_) {
            adj_[static_cast<std::size_t>(i)] |= VertexMask{1} << (j - 1);
            adj_[static_cast<std::size_t>(j)] |= VertexMask{1} << (i - 1);
        }
    }

    int vertex_count() const { return k_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    bool has_edge(int i, int j) const {
        if (i < 1 || i > k_ || j < 1 || j > k_ || i == j) return false;
        return (adj_[static_cast<std::size_t>(i)] >> (j - 1)) & 1u;
    }
    VertexMask neighbors(int i) const { return adj_[static_cast<std::size_t>(i)]; }
    int degree(int i) const { return std::popcount(adj_[static_cast<std::size_t>(i)]); }

    VertexMask full_mask() const { return k_ == 64 ? ~VertexMask{0} : (VertexMask{1} << k_) - 1; }

    // Component of `start` inside the induced subgraph on `within`.
    VertexMask component_of(int start, VertexMask within) const {
        VertexMask seen = VertexMask{1} << (start - 1);
        VertexMask frontier = seen;
        while (frontier) {
            VertexMask next = 0;
            VertexMask f = frontier;
            while (f) {
                int v = std::countr_zero(f) + 1;
                f &= f - 1;
                next |= adj_[static_cast<std::size_t>(v)] & within;
            }
            frontier = next & ~seen;
            seen |= next;
        }
        return seen & (within | (VertexMask{1} << (start - 1)));
    }

    // Connected components of the induced subgraph on `within`.
    std::vector<VertexMask> components(VertexMask within) const {
        std::vector<VertexMask> out;
        VertexMask left = within;
        while (left) {
            int v = std::countr_zero(left) + 1;
            VertexMask c = component_of(v, within);
            out.push_back(c);
            left &= ~c;
        }
        return out;
    }

    bool connected() const { return components(full_mask()).size() == 1; }

    // Induced subgraph on a vertex mask, relabelled 1..|mask| ascending.
    PatternGraph induced(VertexMask mask) const {
        std::vector<int> label(static_cast<std::size_t>(k_) + 1, 0);
        int next = 0;
        for (int v = 1; v <= k_; ++v)
            if (mask & (VertexMask{1} << (v - 1))) label[static_cast<std::size_t>(v)] = ++next;
        std::vector<std::pair<int, int>> es;
        for (auto [i, j] : edges_)
            if ((mask >> (i - 1) & 1u) && (mask >> (j - 1) & 1u))
                es.emplace_back(label[static_cast<std::size_t>(i)], label[static_cast<std::size_t>(j)]);
        return PatternGraph(next, std::move(es));
    }

    bool operator==(const PatternGraph& o) const { return k_ == o.k_ && edges_ == o.edges_; }

private:
    int k_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<VertexMask> adj_;
};

// Simple undirected host graph on vertices 1..n. Arbitrary size.
class HostGraph {
public:
    HostGraph(int n, std::vector<std::pair<int, int>> edges) : n_(n), edges_(std::move(edges)) {
        if (n < 0) throw std::invalid_argument("host vertex count must be nonnegative");
        for (auto& e : edges_) {
            if (e.first > e.second) std::swap(e.first, e.second);
            if (e.first < 1 || e.second > n_ || e.first == e.second)
                throw std::invalid_argument("bad host edge {" + std::to_string(e.first) + "," +
                                            std::to_string(e.second) + "}");
        }
        std::sort(edges_.begin(), edges_.end());
        if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
            throw std::invalid_argument("duplicate host edge");
        adj_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0);
        for (auto [u, v] : edges_) {
            adj_[idx(u, v)] = 1;
            adj_[idx(v, u)] = 1;
        }
    }

    int vertex_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    bool has_edge(int u, int v) const {
        if (u < 1 || u > n_ || v < 1 || v > n_ || u == v) return false;
        return adj_[idx(u, v)] != 0;
    }

    // Induced subgraph on an ascending vertex list, relabelled 1..|keep|.
    HostGraph induced(const std::vector<int>& keep) const {
        std::vector<int> label(static_cast<std::size_t>(n_) + 1, 0);
        for (std::size_t i = 0; i < keep.size(); ++i)
            label[static_cast<std::size_t>(keep[i])] = static_cast<int>(i) + 1;
        std::vector<std::pair<int, int>> es;
        for (auto [u, v] : edges_)
            if (label[static_cast<std::size_t>(u)] && label[static_cast<std::size_t>(v)])
                es.emplace_back(label[static_cast<std::size_t>(u)], label[static_cast<std::size_t>(v)]);
        return HostGraph(static_cast<int>(keep.size()), std::move(es));
    }

private:
    std::size_t idx(int u, int v) const {
        return static_cast<std::size_t>(u - 1) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v - 1);
    }
    int n_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<char> adj_;
};

// Partition of [k] into disjoint nonempty blocks, ordered by least element.
class VertexPartition {
public:
    VertexPartition(int k, std::vector<std::vector<int>> blocks) : k_(k), blocks_(std::move(blocks)) {
        VertexMask seen = 0;
        for (auto& b : blocks_) {
            if (b.empty()) throw std::invalid_argument("empty partition block");
            std::sort(b.begin(), b.end());
            for (int v : b) {
                if (v < 1 || v > k_) throw std::invalid_argument("partition element out of range");
                if (seen & (VertexMask{1} << (v - 1))) throw std::invalid_argument("partition blocks not disjoint");
                seen |= VertexMask{1} << (v - 1);
            }
        }
        VertexMask want = k_ == 64 ? ~VertexMask{0} : (VertexMask{1} << k_) - 1;
        if (k_ > 0 && seen != want) throw std::invalid_argument("partition does not cover [k]");
        std::sort(blocks_.begin(), blocks_.end(),
                  [](const auto& a, const auto& b) { return a.front() < b.front(); });
    }

    static VertexPartition singletons(int k) {
        std::vector<std::vector<int>> bs;
        for (int v = 1; v <= k; ++v) bs.push_back({v});
        return VertexPartition(k, std::move(bs));
    }

    int ground_size() const { return k_; }
    const std::vector<std::vector<int>>& blocks() const { return blocks_; }
    std::size_t block_count() const { return blocks_.size(); }
    // Index of the block containing v (0-based).
    int block_of(int v) const {
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            if (std::binary_search(blocks_[i].begin(), blocks_[i].end(), v)) return static_cast<int>(i);
        throw std::invalid_argument("vertex not in partition");
    }

    bool operator==(const VertexPartition& o) const { return k_ == o.k_ && blocks_ == o.blocks_; }

private:
    int k_;
    std::vector<std::vector<int>> blocks_;
};

// Total map [k] -> [n], 1-based.
class VertexMap {
public:
    explicit VertexMap(std::vector<int> images) : img_(std::move(images)) {}
    int domain_size() const { return static_cast<int>(img_.size()); }
    int image(int i) const { return img_[static_cast<std::size_t>(i - 1)]; }

private:
    std::vector<int> img_;
};

inline bool is_homomorphism(const PatternGraph& h, const HostGraph& g, const VertexMap& phi) {
    if (phi.domain_size() != h.vertex_count())
        throw std::invalid_argument("vertex map not total on the pattern");
    for (int i = 1; i <= h.vertex_count(); ++i) {
        int u = phi.image(i);
        if (u < 1 || u > g.vertex_count())
            throw std::invalid_argument("vertex map image out of host range");
    }
    for (auto [i, j] : h.edges())
        if (!g.has_edge(phi.image(i), phi.image(j))) return false;
    return true;
}

// Number of edge-set-preserving permutations of [k], by backtracking with
// degree pruning.
inline std::uint64_t automorphism_count(const PatternGraph& h) {
    const int k = h.vertex_count();
    std::vector<int> deg(static_cast<std::size_t>(k) + 1);
    for (int v = 1; v <= k; ++v) deg[static_cast<std::size_t>(v)] = h.degree(v);
    std::vector<int> perm(static_cast<std::size_t>(k) + 1, 0);
    VertexMask used = 0;
    std::uint64_t count = 0;
    auto recurse = [&](auto&& self, int v) -> void {
        if (v > k) {
            ++count;
            return;
        }
        for (int t = 1; t <= k; ++t) {
            if (used & (VertexMask{1} << (t - 1))) continue;
            if (deg[static_cast<std::size_t>(v)] != deg[static_cast<std::size_t>(t)]) continue;
            bool ok = true;
            for (int w = 1; w < v && ok; ++w)
                if (h.has_edge(v, w) != h.has_edge(t, perm[static_cast<std::size_t>(w)])) ok = false;
            if (!ok) continue;
            perm[static_cast<std::size_t>(v)] = t;
            used |= VertexMask{1} << (t - 1);
            self(self, v + 1);
            used &= ~(VertexMask{1} << (t - 1));
        }
    };
    recurse(recurse, 1);
    return count;
}

// Quotient of H by a partition: one vertex per block, an edge between blocks
// iff some pattern edge joins them. Returns nullopt when an edge is internal
// to a block (a loop).
inline std::optional<PatternGraph> quotient(const PatternGraph& h, const VertexPartition& rho) {
    if (rho.ground_size() != h.vertex_count())
        throw std::invalid_argument("partition ground set does not match pattern");
    std::vector<std::pair<int, int>> es;
    for (auto [i, j] : h.edges()) {
        int a = rho.block_of(i) + 1;
        int b = rho.block_of(j) + 1;
        if (a == b) return std::nullopt;
        es.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(es.begin(), es.end());
    es.erase(std::unique(es.begin(), es.end()), es.end());
    return PatternGraph(static_cast<int>(rho.block_count()), std::move(es));
}

// Mobius function of the partition lattice from all-singletons up to rho:
// product over blocks of (-1)^(|B|-1) (|B|-1)!.
inline std::int64_t mobius_coefficient(const VertexPartition& rho) {
    std::int64_t mu = 1;
    for (const auto& b : rho.blocks()) {
        std::int64_t f = 1;
        for (std::size_t i = 2; i < b.size(); ++i) f *= static_cast<std::int64_t>(i);
        mu *= (b.size() % 2 == 0 ? -f : f);
    }
    return mu;
}

namespace detail {
// Enumerate set partitions of [k] via restricted growth strings.
template <typename Fn>
void for_each_partition(int k, Fn&& fn) {
    if (k == 0) return;
    std::vector<int> rgs(static_cast<std::size_t>(k), 0);
    auto emit = [&]() {
        int nblocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        std::vector<std::vector<int>> blocks(static_cast<std::size_t>(nblocks));
        for (int v = 1; v <= k; ++v)
            blocks[static_cast<std::size_t>(rgs[static_cast<std::size_t>(v - 1)])].push_back(v);
        fn(VertexPartition(k, std::move(blocks)));
    };
    auto recurse = [&](auto&& self, int pos, int maxv) -> void {
        if (pos == k) {
            emit();
            return;
        }
        for (int b = 0; b <= maxv + 1; ++b) {
            rgs[static_cast<std::size_t>(pos)] = b;
            self(self, pos + 1, std::max(maxv, b));
        }
    };
    recurse(recurse, 1, 0);
}
} // namespace detail

// All partitions of V(H) whose quotient is loop-free, paired with quotients.
inline std::vector<std::pair<VertexPartition, PatternGraph>> loopfree_partitions(const PatternGraph& h) {
    if (h.vertex_count() > 10) throw std::invalid_argument("loopfree_partitions supports k <= 10");
    std::vector<std::pair<VertexPartition, PatternGraph>> out;
    detail::for_each_partition(h.vertex_count(), [&](VertexPartition rho) {
        if (auto q = quotient(h, rho)) out.emplace_back(std::move(rho), std::move(*q));
    });
    return out;
}

// All graphs on [k] whose edge set contains E(H), including H and K_k.
inline std::vector<PatternGraph> supergraphs_same_vertices(const PatternGraph& h) {
    const int k = h.vertex_count();
    if (k > 8) throw std::invalid_argument("supergraphs_same_vertices supports k <= 8");
    std::vector<std::pair<int, int>> missing;
    for (int i = 1; i <= k; ++i)
        for (int j = i + 1; j <= k; ++j)
            if (!h.has_edge(i, j)) missing.emplace_back(i, j);
    std::vector<PatternGraph> out;
    const std::uint32_t total = 1u << missing.size();
    for (std::uint32_t mask = 0; mask < total; ++mask) {
        std::vector<std::pair<int, int>> es = h.edges();
        for (std::size_t t = 0; t < missing.size(); ++t)
            if (mask & (1u << t)) es.push_back(missing[t]);
        out.emplace_back(k, std::move(es));
    }
    return out;
}

// Canonical key: minimum upper-triangle edge bitmask over all relabelings.
// Equal keys iff isomorphic. k <= 8 keeps the bitmask within 28 bits.
struct CanonicalKey {
    int k = 0;
    std::uint64_t bits = 0;
    auto operator<=>(const CanonicalKey&) const = default;
};

namespace detail {
inline int pair_index(int k, int i, int j) {
    // index of pair (i,j), i<j, in the order (1,2),(1,3),...,(1,k),(2,3),...
    return (i - 1) * k - (i * (i + 1)) / 2 + j - 1;
}
} // namespace detail

inline CanonicalKey canonical_form(const PatternGraph& h) {
    const int k = h.vertex_count();
    if (k > 8) throw std::invalid_argument("canonical_form supports k <= 8");
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 1);
    std::uint64_t best = ~0ull;
    do {
        std::uint64_t bits = 0;
        for (auto [i, j] : h.edges()) {
            int a = perm[static_cast<std::size_t>(i - 1)];
            int b = perm[static_cast<std::size_t>(j - 1)];
            if (a > b) std::swap(a, b);
            bits |= 1ull << detail::pair_index(k, a, b);
        }
        best = std::min(best, bits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return CanonicalKey{k, best};
}

enum class Family { path, cycle, clique, spider };

// P_k, C_k, K_k, or the spider tree T_p (root joined to three copies of
// T_{p-1}; T_0 is a single vertex). Spider trees have pathwidth exactly p.
inline PatternGraph generate_family(Family f, int parameter) {
    switch (f) {
    case Family::path: {
        if (parameter < 1) throw std::invalid_argument("path needs >= 1 vertex");
        std::vector<std::pair<int, int>> es;
        for (int v = 1; v < parameter; ++v) es.emplace_back(v, v + 1);
        return PatternGraph(parameter, std::move(es));
    }
    case Family::cycle: {
        if (parameter < 3) throw std::invalid_argument("cycle needs >= 3 vertices");
        std::vector<std::pair<int, int>> es;
        for (int v = 1; v < parameter; ++v) es.emplace_back(v, v + 1);
        es.emplace_back(1, parameter);
        return PatternGraph(parameter, std::move(es));
    }
    case Family::clique: {
        if (parameter < 1) throw std::invalid_argument("clique needs >= 1 vertex");
        std::vector<std::pair<int, int>> es;
        for (int i = 1; i <= parameter; ++i)
            for (int j = i + 1; j <= parameter; ++j) es.emplace_back(i, j);
        return PatternGraph(parameter, std::move(es));
    }
    case Family::spider: {
        if (parameter < 0) throw std::invalid_argument("spider parameter must be >= 0");
        // T_p has (3^(p+1)-1)/2 vertices; vertex 1 is the root.
        std::vector<std::pair<int, int>> es;
        int next = 1;
        auto build = [&](auto&& self, int p) -> int {
            int root = next++;
            if (p == 0) return root;
            for (int c = 0; c < 3; ++c) {
                int sub = self(self, p - 1);
                es.emplace_back(root, sub);
            }
            return root;
        };
        build(build, parameter);
        return PatternGraph(next - 1, std::move(es));
    }
    }
    throw std::invalid_argument("unknown family");
}

namespace detail {
inline std::pair<int, std::vector<std::pair<int, int>>> parse_graph_text(std::istream& in, const char* what) {
    std::string line;
    int n = -1, m = -1;
    std::vector<std::pair<int, int>> edges;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "p") {
            if (n != -1) throw FormatError(std::string(what) + ": duplicate header line");
            if (!(ls >> n >> m) || n < 0 || m < 0)
                throw FormatError(std::string(what) + ": bad header line: " + line);
        } else if (tag == "e") {
            if (n == -1) throw FormatError(std::string(what) + ": edge before header");
            int i = 0, j = 0;
            if (!(ls >> i >> j)) throw FormatError(std::string(what) + ": bad edge line: " + line);
            edges.emplace_back(i, j);
        } else {
            throw FormatError(std::string(what) + ": unknown line: " + line);
        }
    }
    if (n == -1) throw FormatError(std::string(what) + ": missing header line");
    if (static_cast<int>(edges.size()) != m)
        throw FormatError(std::string(what) + ": header declares " + std::to_string(m) + " edges, found " +
                          std::to_string(edges.size()));
    return {n, std::move(edges)};
}
} // namespace detail

inline PatternGraph parse_pattern(std::istream& in) {
    auto [k, edges] = detail::parse_graph_text(in, "pattern");
    try {
        return PatternGraph(k, std::move(edges));
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("pattern: ") + e.what());
    }
}

inline HostGraph parse_host(std::istream& in) {
    auto [n, edges] = detail::parse_graph_text(in, "host");
    try {
        return HostGraph(n, std::move(edges));
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("host: ") + e.what());
    }
}

inline void serialize(const PatternGraph& g, std::ostream& out) {
    out << "p " << g.vertex_count() << " " << g.edge_count() << "\n";
    for (auto [i, j] : g.edges()) out << "e " << i << " " << j << "\n";
}

inline void serialize(const HostGraph& g, std::ostream& out) {
    out << "p " << g.vertex_count() << " " << g.edge_count() << "\n";
    for (auto [u, v] : g.edges()) out << "e " << u << " " << v << "\n";
}

} // namespace homcount
