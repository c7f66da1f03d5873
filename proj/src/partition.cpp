#include "qsearch/partition.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace qsearch {

namespace {

// Multiset of distances from `node` to each block, used as the refinement
// signature together with the node's current block.
using Signature = std::vector<std::vector<int>>;

std::vector<std::vector<int>> all_pairs_distances(const GraphSpec& g) {
    std::vector<std::vector<int>> dist(g.n);
    for (int v = 0; v < g.n; ++v) dist[v] = bfs_distances(g, v);
    return dist;
}

EquivalencePartition from_blocks(const GraphSpec& g,
                                 std::vector<std::vector<int>> blocks,
                                 const std::vector<std::vector<int>>& dist) {
    // Deterministic order: marked first, then distance to nearest marked
    // node, then smallest member.
    const int inf = std::numeric_limits<int>::max();
    auto key = [&](const std::vector<int>& blk) {
        bool m = g.is_marked(blk.front());
        int dmin = inf;
        for (int v : blk)
            for (int s : g.marked)
                if (dist[v][s] >= 0) dmin = std::min(dmin, dist[v][s]);
        return std::tuple<int, int, int>(m ? 0 : 1, dmin, blk.front());
    };
    for (auto& blk : blocks) std::sort(blk.begin(), blk.end());
    std::sort(blocks.begin(), blocks.end(),
              [&](const auto& a, const auto& b) { return key(a) < key(b); });

    EquivalencePartition p;
    p.classes = std::move(blocks);
    p.class_of.assign(g.n, -1);
    for (int k = 0; k < p.num_classes(); ++k)
        for (int v : p.classes[k]) p.class_of[v] = k;
    p.multiplicity.resize(p.num_classes());
    p.marked_flag.resize(p.num_classes());
    for (int k = 0; k < p.num_classes(); ++k) {
        p.multiplicity[k] = static_cast<int>(p.classes[k].size());
        p.marked_flag[k] = g.is_marked(p.classes[k].front());
    }
    return p;
}

EquivalencePartition refine_step(const GraphSpec& g,
                                 const std::vector<int>& class_of,
                                 int num_classes,
                                 const std::vector<std::vector<int>>& dist) {
    std::map<std::pair<int, Signature>, std::vector<int>> groups;
    for (int v = 0; v < g.n; ++v) {
        Signature sig(num_classes);
        for (int w = 0; w < g.n; ++w) sig[class_of[w]].push_back(dist[v][w]);
        for (auto& s : sig) std::sort(s.begin(), s.end());
        groups[{class_of[v], std::move(sig)}].push_back(v);
    }
    std::vector<std::vector<int>> blocks;
    blocks.reserve(groups.size());
    for (auto& [sig, members] : groups) blocks.push_back(std::move(members));
    return from_blocks(g, std::move(blocks), dist);
}

}  // namespace

EquivalencePartition refine_once(const GraphSpec& g,
                                 const EquivalencePartition& start) {
    auto dist = all_pairs_distances(g);
    return refine_step(g, start.class_of, start.num_classes(), dist);
}

EquivalencePartition reduce(const GraphSpec& g) {
    auto dist = all_pairs_distances(g);

    std::vector<int> class_of(g.n, 0);
    int num_classes = 1;
    if (g.num_marked() < g.n) {
        for (int v = 0; v < g.n; ++v) class_of[v] = g.is_marked(v) ? 0 : 1;
        num_classes = 2;
    }

    for (;;) {
        EquivalencePartition next = refine_step(g, class_of, num_classes, dist);
        if (next.num_classes() == num_classes && next.class_of == class_of)
            return next;
        class_of = next.class_of;
        num_classes = next.num_classes();
    }
}

MatrixX quotient_coupling(const GraphSpec& g, const EquivalencePartition& p) {
    auto adj = adjacency_lists(g);
    const int m = p.num_classes();
    MatrixX coupling = MatrixX::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        VectorXi ref = VectorXi::Zero(m);
        for (size_t idx = 0; idx < p.classes[k].size(); ++idx) {
            VectorXi counts = VectorXi::Zero(m);
            for (int w : adj[p.classes[k][idx]]) ++counts[p.class_of[w]];
            if (idx == 0)
                ref = counts;
            else if (counts != ref)
                throw std::logic_error(
                    "quotient_coupling: neighbor counts differ within a class");
        }
        coupling.row(k) = ref.cast<double>().transpose();
    }
    return coupling;
}

ShellDescriptor shell_descriptor(const GraphSpec& g) {
    if (g.num_marked() != 1)
        throw ShellError("shell_descriptor: exactly one marked node required");
    const int root = g.marked.front();
    auto dist = bfs_distances(g, root);
    int d = 0;
    for (int v = 0; v < g.n; ++v) {
        if (dist[v] < 0)
            throw ShellError("graph not shell-regular: disconnected");
        d = std::max(d, dist[v]);
    }
    if (d < 1) throw ShellError("graph not shell-regular: diameter 0");

    ShellDescriptor s;
    s.d = d;
    s.nshell = VectorXi::Zero(d + 1);
    for (int v = 0; v < g.n; ++v) ++s.nshell[dist[v]];

    // Per-node forward/backward/intra edge counts must be uniform per shell.
    auto adj = adjacency_lists(g);
    MatrixXi fwd = MatrixXi::Constant(d + 1, 3, -1);  // columns: back, intra, fwd
    for (int v = 0; v < g.n; ++v) {
        int back = 0, intra = 0, forward = 0;
        for (int w : adj[v]) {
            if (dist[w] == dist[v] - 1) ++back;
            else if (dist[w] == dist[v]) ++intra;
            else ++forward;
        }
        VectorXi counts(3);
        counts << back, intra, forward;
        if (fwd.row(dist[v])(0) < 0)
            fwd.row(dist[v]) = counts.transpose();
        else if (fwd.row(dist[v]) != counts.transpose())
            throw ShellError("graph not shell-regular: edge counts differ within shell " +
                             std::to_string(dist[v]));
    }

    s.c = VectorXi::Zero(d);
    for (int i = 0; i < d; ++i) s.c[i] = fwd(i, 2);
    if (fwd(d, 2) != 0)
        throw ShellError("graph not shell-regular: forward edges past last shell");

    // Arithmetic consistency: the quantities the reduced system divides by.
    const int c0 = s.c[0];
    for (int i = 1; i <= d; ++i) {
        long back_total = static_cast<long>(s.c[i - 1]) * s.nshell[i - 1];
        if (back_total % s.nshell[i] != 0 || back_total / s.nshell[i] != fwd(i, 0))
            throw ShellError("graph not shell-regular: back-edge count of shell " +
                             std::to_string(i) + " is not uniform");
        int intra = c0 - fwd(i, 0) - (i < d ? s.c[i] : 0);
        if (intra < 0 || intra != fwd(i, 1))
            throw ShellError("graph not shell-regular: intra-shell count of shell " +
                             std::to_string(i) + " inconsistent");
    }
    // Degree uniformity: every node has c_0 edges.
    for (int deg : degrees(g))
        if (deg != c0)
            throw ShellError("graph not shell-regular: degrees are not uniform");

    if (s.nshell.sum() != g.n || s.nshell[0] != 1)
        throw ShellError("graph not shell-regular: shell sizes inconsistent");
    return s;
}

MatrixX shell_coupling(const ShellDescriptor& s) {
    const int m = s.num_shells();
    MatrixX coupling = MatrixX::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        if (i > 0) coupling(i, i - 1) = s.back_edges(i);
        if (i < s.d) coupling(i, i + 1) = s.forward_edges(i);
        coupling(i, i) = s.intra_edges(i);
    }
    return coupling;
}

VectorXi shell_multiplicities(const ShellDescriptor& s) { return s.nshell; }

}  // namespace qsearch
