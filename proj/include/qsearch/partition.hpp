#pragma once

#include <stdexcept>
#include <vector>

#include "qsearch/graph.hpp"
#include "qsearch/types.hpp"

namespace qsearch {

// Partition of the node set into classes of dynamically interchangeable
// nodes: all members of a class share the marked flag and the same multiset
// of distances to every class.  Class order is deterministic: marked classes
// first, then by increasing distance to the nearest marked node, ties broken
// by smallest member index.
struct EquivalencePartition {
    std::vector<std::vector<int>> classes;
    std::vector<int> class_of;
    std::vector<int> multiplicity;
    std::vector<bool> marked_flag;

    int num_classes() const { return static_cast<int>(classes.size()); }
    int num_nodes() const { return static_cast<int>(class_of.size()); }
};

// Coarsest refinement of {marked, unmarked} with uniform distance profiles,
// by iterating signature refinement to a fixpoint.
EquivalencePartition reduce(const GraphSpec& g);

// One refinement sweep starting from the given blocks; reduce() iterates this
// until stable.  Exposed so idempotence is directly testable.
EquivalencePartition refine_once(const GraphSpec& g,
                                 const EquivalencePartition& start);

// coupling(a, b) = number of neighbors in class b of any node of class a.
// Throws std::logic_error if the counts are not uniform within a class
// (which would mean the partition is not a valid reduction).
MatrixX quotient_coupling(const GraphSpec& g, const EquivalencePartition& p);

struct ShellError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Distance shells around a single marked node of an edge- and vertex-
// transitive graph.  Shell i holds the nodes at distance i; c[i] counts the
// edges from a shell-i node forward to shell i+1.
struct ShellDescriptor {
    int d = 0;             // graph diameter
    VectorXi c;            // size d, forward edge counts
    VectorXi nshell;       // size d+1, shell sizes, nshell[0] == 1

    int total_nodes() const { return nshell.sum(); }
    int num_shells() const { return d + 1; }

    // c_{i-1} n_{i-1} / n_i, the per-node edge count back to shell i-1
    // (zero for i == 0).
    double back_edges(int i) const {
        return i == 0 ? 0.0
                      : static_cast<double>(c[i - 1]) * nshell[i - 1] / nshell[i];
    }
    // c_i, with the convention c_d = 0.
    double forward_edges(int i) const { return i < d ? c[i] : 0.0; }
    // edges between shell-i nodes: c_0 - back - forward.
    double intra_edges(int i) const {
        return c[0] - back_edges(i) - forward_edges(i);
    }
};

// Builds the shell structure by BFS from the unique marked node and checks
// the arithmetic consistency conditions (uniform degrees and per-shell edge
// counts, integer back-edge counts).  Throws ShellError when the graph is
// not shell-regular.
ShellDescriptor shell_descriptor(const GraphSpec& g);

// Class-to-class coupling matrix of the shell structure (tridiagonal:
// forward c_i, backward c_{i-1} n_{i-1}/n_i).
MatrixX shell_coupling(const ShellDescriptor& s);

// Shell partition as an EquivalencePartition-style multiplicity list
// (marked shell first); used to build initial states for shell systems.
VectorXi shell_multiplicities(const ShellDescriptor& s);

}  // namespace qsearch
