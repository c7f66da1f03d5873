#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qsearch/types.hpp"

namespace qsearch {

// Undirected simple graph over nodes {0,...,n-1} with a non-empty set of
// marked nodes.  Edges are kept normalized (a < b) and sorted, marked nodes
// sorted; construction goes through make_graph which validates no self-loops,
// no duplicate edges and 1 <= N <= n.
struct GraphSpec {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> marked;

    int num_marked() const { return static_cast<int>(marked.size()); }
    int num_unmarked() const { return n - num_marked(); }
    bool is_marked(int v) const;
};

GraphSpec make_graph(int n, std::vector<std::pair<int, int>> edges,
                     std::vector<int> marked);

// Every node connected to every other: n(n-1)/2 edges.
GraphSpec build_complete(int n, std::vector<int> marked);

// Ring graph: edges (i, i+1 mod n), every node of degree 2.  Needs n >= 3.
GraphSpec build_cycle(int n, std::vector<int> marked);

// Graph Laplacian L = A - D (adjacency minus degree diagonal).
// Integer-exact, symmetric, zero row sums.
MatrixXi laplacian(const GraphSpec& g);

std::vector<int> degrees(const GraphSpec& g);
std::vector<std::vector<int>> adjacency_lists(const GraphSpec& g);

// BFS distances from `source` to all nodes; -1 where unreachable.
std::vector<int> bfs_distances(const GraphSpec& g, int source);

// Plain-text edge list: first line "n N", then one "a b" line per edge,
// then a line "marked: i j ...".  Parse errors carry 1-based line numbers.
GraphSpec parse_edge_list(std::istream& in);
GraphSpec load_edge_list(const std::string& path);
std::string format_edge_list(const GraphSpec& g);

}  // namespace qsearch
