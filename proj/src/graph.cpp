#include "qsearch/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qsearch {

bool GraphSpec::is_marked(int v) const {
    return std::binary_search(marked.begin(), marked.end(), v);
}

GraphSpec make_graph(int n, std::vector<std::pair<int, int>> edges,
                     std::vector<int> marked) {
    if (n < 1)
        throw std::invalid_argument("graph: node count must be positive");
    for (auto& [a, b] : edges) {
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw std::invalid_argument("graph: edge endpoint out of range");
        if (a == b)
            throw std::invalid_argument("graph: self-loops are not allowed");
        if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
        throw std::invalid_argument("graph: duplicate edge");

    std::sort(marked.begin(), marked.end());
    if (std::adjacent_find(marked.begin(), marked.end()) != marked.end())
        throw std::invalid_argument("graph: duplicate marked node");
    if (marked.empty() || static_cast<int>(marked.size()) > n)
        throw std::invalid_argument("graph: need 1 <= N <= n marked nodes");
    if (marked.front() < 0 || marked.back() >= n)
        throw std::invalid_argument("graph: marked node out of range");

    return GraphSpec{n, std::move(edges), std::move(marked)};
}

GraphSpec build_complete(int n, std::vector<int> marked) {
    if (n < 2)
        throw std::invalid_argument("build_complete: need n >= 2");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) edges.emplace_back(a, b);
    return make_graph(n, std::move(edges), std::move(marked));
}

GraphSpec build_cycle(int n, std::vector<int> marked) {
    if (n < 3)
        throw std::invalid_argument("build_cycle: need n >= 3");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(n);
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return make_graph(n, std::move(edges), std::move(marked));
}

MatrixXi laplacian(const GraphSpec& g) {
    MatrixXi L = MatrixXi::Zero(g.n, g.n);
    for (const auto& [a, b] : g.edges) {
        L(a, b) += 1;
        L(b, a) += 1;
        L(a, a) -= 1;
        L(b, b) -= 1;
    }
    return L;
}

std::vector<int> degrees(const GraphSpec& g) {
    std::vector<int> deg(g.n, 0);
    for (const auto& [a, b] : g.edges) {
        ++deg[a];
        ++deg[b];
    }
    return deg;
}

std::vector<std::vector<int>> adjacency_lists(const GraphSpec& g) {
    std::vector<std::vector<int>> adj(g.n);
    for (const auto& [a, b] : g.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& nb : adj) std::sort(nb.begin(), nb.end());
    return adj;
}

std::vector<int> bfs_distances(const GraphSpec& g, int source) {
    if (source < 0 || source >= g.n)
        throw std::invalid_argument("bfs_distances: source out of range");
    auto adj = adjacency_lists(g);
    std::vector<int> dist(g.n, -1);
    std::deque<int> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int w : adj[v])
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
    }
    return dist;
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& what) {
    throw std::invalid_argument("edge list line " + std::to_string(line) +
                                ": " + what);
}

}  // namespace

GraphSpec parse_edge_list(std::istream& in) {
    std::string line;
    int lineno = 0;
    int n = -1, want_marked = -1;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> marked;
    bool seen_marked = false;

    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;  // blank

        if (n < 0) {
            std::istringstream hdr(line);
            if (!(hdr >> n >> want_marked) || n < 1)
                parse_fail(lineno, "expected header \"n N\"");
            continue;
        }
        if (first == "marked:") {
            int v;
            while (ls >> v) marked.push_back(v);
            if (ls.fail() && !ls.eof()) parse_fail(lineno, "bad marked node");
            seen_marked = true;
            continue;
        }
        std::istringstream es(line);
        int a, b;
        if (!(es >> a >> b)) parse_fail(lineno, "expected edge \"a b\"");
        edges.emplace_back(a, b);
    }
    if (n < 0) throw std::invalid_argument("edge list: empty input");
    if (!seen_marked) throw std::invalid_argument("edge list: missing \"marked:\" line");
    if (static_cast<int>(marked.size()) != want_marked)
        throw std::invalid_argument("edge list: header declares N=" +
                                    std::to_string(want_marked) + " but " +
                                    std::to_string(marked.size()) +
                                    " marked nodes listed");
    return make_graph(n, std::move(edges), std::move(marked));
}

GraphSpec load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open graph file: " + path);
    return parse_edge_list(in);
}

std::string format_edge_list(const GraphSpec& g) {
    std::ostringstream out;
    out << g.n << ' ' << g.num_marked() << '\n';
    for (const auto& [a, b] : g.edges) out << a << ' ' << b << '\n';
    out << "marked:";
    for (int v : g.marked) out << ' ' << v;
    out << '\n';
    return out.str();
}

}  // namespace qsearch
