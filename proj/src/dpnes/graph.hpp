#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dpnes/dense.hpp"

namespace dpnes {

// Directed communication graph on nodes 0..n-1. Edges are (from, to) pairs;
// self-loops are implicit (every node always hears itself) and never stored.
struct Digraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
};

// Throws std::invalid_argument on bad node count, out-of-range endpoints or
// explicit self-loops. Duplicate edges are collapsed.
Digraph make_digraph(int n, std::vector<std::pair<int, int>> edges);

// In-neighbour lists including the implicit self-loop.
std::vector<std::vector<int>> in_neighbors(const Digraph& g);

// Out-degrees |N_j^+| including the implicit self-loop.
std::vector<int> out_degrees(const Digraph& g);

bool is_strongly_connected(const Digraph& g);

Digraph union_graph(const std::vector<Digraph>& graphs);

// Column-stochastic mixing matrix with entries 1/|N_j^+| on the out-edges of j
// (self-loop included), zero elsewhere.
struct WeightMatrix {
    Mat m;
};

WeightMatrix build_weight_matrix(const Digraph& g);

// Periodic sequence of digraphs. graph_at(l) = graphs[l mod period].
struct GraphSchedule {
    int n = 0;
    int period = 0;
    int d_window = 0;  // window length D for joint connectivity
    std::vector<Digraph> graphs;
    std::vector<WeightMatrix> weights;  // one per phase, prebuilt

    const Digraph& graph_at(long l) const { return graphs[static_cast<size_t>(l % period)]; }
    const Mat& weight_at(long l) const { return weights[static_cast<size_t>(l % period)].m; }
};

GraphSchedule make_schedule(int n, int period, int d_window, std::vector<Digraph> graphs);

// True iff the union over every D-step window is strongly connected. By
// periodicity only window starts r*D mod period, r = 0..period-1, are checked.
bool check_d_strong_connectivity(const GraphSchedule& s);

// Ordered product B(l)B(l-1)...B(r). Throws std::invalid_argument when l < r
// or r < 0.
Mat backward_product(const GraphSchedule& s, long l, long r);

struct MixingEstimate {
    std::vector<Vec> psi_per_phase;  // limit column of B(l:0), one per phase offset
    Vec psi;                         // phase matching the final product step
    double lambda_fit = 0.0;         // geometric decay rate, in (0,1)
    double c1_fit = 0.0;             // envelope constant: dev(l) <= c1 * lambda^l
    double delta_bar = 0.0;          // inf over l of min row sum of B(l:0)
};

// Empirically estimates the rank-one limit and decay rate of the backward
// products over [0, horizon]. The fit regresses log deviations on l, dropping
// points below 1e-13 where rounding noise dominates. Requires horizon >= 4*D
// and a schedule that passed check_d_strong_connectivity; throws otherwise.
MixingEstimate estimate_mixing(const GraphSchedule& s, long horizon);

// Line-oriented topology file:
//   n <count> period <p> D <d>
//   graph <k>          (k = 1..p, in order)
//   edge <j> <i>       (directed j -> i, 1-indexed, no self-loops)
// Blank lines and lines starting with '#' are ignored.
GraphSchedule load_topology(std::istream& in, const std::string& origin = "<stream>");
GraphSchedule load_topology_file(const std::string& path);

}  // namespace dpnes
