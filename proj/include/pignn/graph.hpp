#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace pignn {

// Simple undirected graph. Edges are stored canonically (u < v, sorted),
// node indices are 0-based.
class Graph {
public:
    using Edge = std::pair<int, int>;

    Graph() = default;

    Graph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
        if (n_ < 0) throw std::invalid_argument("graph: negative node count");
        for (auto& [u, v] : edges_) {
            if (u > v) std::swap(u, v);
            if (u == v) throw std::invalid_argument("graph: self-loop " + std::to_string(u));
            if (u < 0 || v >= n_)
                throw std::invalid_argument("graph: edge index out of range");
        }
        std::sort(edges_.begin(), edges_.end());
        if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
            throw std::invalid_argument("graph: duplicate edge");
        adj_.assign(n_, {});
        for (const auto& [u, v] : edges_) {
            adj_[u].push_back(v);
            adj_[v].push_back(u);
        }
    }

    int node_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const { return adj_[v]; }
    int degree(int v) const { return static_cast<int>(adj_[v].size()); }

    // Degree shared by all nodes, or nullopt if the graph is not regular.
    std::optional<int> regular_degree() const {
        if (n_ == 0) return std::nullopt;
        int d = degree(0);
        for (int v = 1; v < n_; ++v)
            if (degree(v) != d) return std::nullopt;
        return d;
    }

    bool operator==(const Graph& other) const {
        return n_ == other.n_ && edges_ == other.edges_;
    }

private:
    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adj_;
};

namespace detail {

// One pairing attempt: repeatedly shuffle the unmatched stubs and greedily
// pair them, skipping self-loops and duplicates. Fails (nullopt) once no
// admissible pair remains among the leftover stubs.
inline std::optional<std::vector<Graph::Edge>> try_regular_pairing(int n, int d,
                                                                   std::mt19937_64& rng) {
    std::vector<int> stubs;
    stubs.reserve(static_cast<size_t>(n) * d);
    for (int v = 0; v < n; ++v)
        for (int k = 0; k < d; ++k) stubs.push_back(v);

    std::unordered_set<int64_t> seen;
    std::vector<Graph::Edge> edges;
    edges.reserve(static_cast<size_t>(n) * d / 2);
    auto key = [n](int u, int v) { return static_cast<int64_t>(u) * n + v; };

    while (!stubs.empty()) {
        std::shuffle(stubs.begin(), stubs.end(), rng);
        std::vector<int> leftover;
        for (size_t k = 0; k + 1 < stubs.size(); k += 2) {
            int u = stubs[k], v = stubs[k + 1];
            if (u > v) std::swap(u, v);
            if (u == v || seen.count(key(u, v))) {
                leftover.push_back(stubs[k]);
                leftover.push_back(stubs[k + 1]);
            } else {
                seen.insert(key(u, v));
                edges.emplace_back(u, v);
            }
        }
        if (leftover.size() == stubs.size()) {
            // No pair placed this round; give up unless some admissible pair exists.
            bool suitable = false;
            std::vector<int> nodes(leftover);
            std::sort(nodes.begin(), nodes.end());
            nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
            for (size_t a = 0; a < nodes.size() && !suitable; ++a)
                for (size_t b = a + 1; b < nodes.size() && !suitable; ++b)
                    if (!seen.count(key(nodes[a], nodes[b]))) suitable = true;
            if (!suitable) return std::nullopt;
        }
        stubs = std::move(leftover);
    }
    return edges;
}

}  // namespace detail

// Sample a simple d-regular graph on n nodes by random stub pairing with
// restarts on dead ends. Deterministic for a fixed RNG state.
inline Graph generate_regular(int n, int d, std::mt19937_64& rng) {
    if (d <= 0 || d >= n)
        throw std::invalid_argument("generate_regular: need 0 < d < n, got d=" +
                                    std::to_string(d) + " n=" + std::to_string(n));
    if ((static_cast<int64_t>(n) * d) % 2 != 0)
        throw std::invalid_argument("generate_regular: n*d must be even");

    constexpr int kMaxRestarts = 10000;
    for (int attempt = 0; attempt < kMaxRestarts; ++attempt) {
        if (auto edges = detail::try_regular_pairing(n, d, rng))
            return Graph(n, std::move(*edges));
    }
    throw std::runtime_error("generate_regular: restart cap exceeded");
}

inline Graph generate_regular(int n, int d, uint64_t seed) {
    std::mt19937_64 rng(seed);
    return generate_regular(n, d, rng);
}

// Edge density 2|E| / (n(n-1)); equals d/(n-1) for d-regular graphs.
inline double density(const Graph& g) {
    if (g.node_count() < 2) throw std::invalid_argument("density: need n >= 2");
    return 2.0 * g.edge_count() /
           (static_cast<double>(g.node_count()) * (g.node_count() - 1));
}

// Text edge-list format: header "n m", then m lines "u v" with u < v.
inline void write_edgelist(const Graph& g, std::ostream& out) {
    out << g.node_count() << ' ' << g.edge_count() << '\n';
    for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

inline Graph read_edgelist(std::istream& in) {
    auto fail = [](int line, const std::string& what) {
        throw std::runtime_error("edge list, line " + std::to_string(line) + ": " + what);
    };
    std::string line;
    int line_no = 0;

    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            return true;
        }
        return false;
    };

    if (!next_line()) fail(1, "missing header");
    int n = 0;
    size_t m = 0;
    {
        std::istringstream ss(line);
        std::string extra;
        if (!(ss >> n >> m) || (ss >> extra)) fail(line_no, "expected header \"n m\"");
        if (n < 0) fail(line_no, "negative node count");
    }

    std::vector<Graph::Edge> edges;
    edges.reserve(m);
    std::unordered_set<int64_t> seen;
    for (size_t i = 0; i < m; ++i) {
        if (!next_line()) fail(line_no + 1, "expected " + std::to_string(m) + " edges, got " +
                                                std::to_string(i));
        std::istringstream ss(line);
        int u = 0, v = 0;
        std::string extra;
        if (!(ss >> u >> v) || (ss >> extra)) fail(line_no, "expected \"u v\"");
        if (u < 0 || v >= n || u >= n || v < 0) fail(line_no, "node index out of range");
        if (u >= v) fail(line_no, "edges must satisfy u < v");
        if (!seen.insert(static_cast<int64_t>(u) * n + v).second)
            fail(line_no, "duplicate edge");
        edges.emplace_back(u, v);
    }
    return Graph(n, std::move(edges));
}

}  // namespace pignn
