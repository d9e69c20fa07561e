#include "dpnes/graph.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace dpnes {

Digraph make_digraph(int n, std::vector<std::pair<int, int>> edges) {
    if (n < 1) throw std::invalid_argument("digraph: node count must be >= 1");
    std::set<std::pair<int, int>> unique;
    for (auto [j, i] : edges) {
        if (j < 0 || j >= n || i < 0 || i >= n)
            throw std::invalid_argument("digraph: edge endpoint out of range");
        if (j == i) throw std::invalid_argument("digraph: self-loops are implicit, do not list them");
        unique.insert({j, i});
    }
    Digraph g;
    g.n = n;
    g.edges.assign(unique.begin(), unique.end());
    return g;
}

std::vector<std::vector<int>> in_neighbors(const Digraph& g) {
    std::vector<std::vector<int>> in(static_cast<size_t>(g.n));
    for (int i = 0; i < g.n; ++i) in[i].push_back(i);
    for (auto [j, i] : g.edges) in[i].push_back(j);
    return in;
}

std::vector<int> out_degrees(const Digraph& g) {
    std::vector<int> deg(static_cast<size_t>(g.n), 1);  // self-loop
    for (auto [j, i] : g.edges) {
        (void)i;
        ++deg[j];
    }
    return deg;
}

WeightMatrix build_weight_matrix(const Digraph& g) {
    const auto deg = out_degrees(g);
    Mat m(g.n, g.n);
    for (int j = 0; j < g.n; ++j) m.at(j, j) = 1.0 / deg[j];
    for (auto [j, i] : g.edges) m.at(i, j) = 1.0 / deg[j];
    return WeightMatrix{std::move(m)};
}

namespace {

// Reachability over adjacency lists; self-loops are irrelevant here.
std::vector<bool> reach_from(const std::vector<std::vector<int>>& adj, int start) {
    std::vector<bool> seen(adj.size(), false);
    std::vector<int> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

}  // namespace

bool is_strongly_connected(const Digraph& g) {
    if (g.n == 1) return true;
    std::vector<std::vector<int>> fwd(static_cast<size_t>(g.n)), bwd(static_cast<size_t>(g.n));
    for (auto [j, i] : g.edges) {
        fwd[j].push_back(i);
        bwd[i].push_back(j);
    }
    const auto f = reach_from(fwd, 0);
    const auto b = reach_from(bwd, 0);
    for (int v = 0; v < g.n; ++v)
        if (!f[v] || !b[v]) return false;
    return true;
}

Digraph union_graph(const std::vector<Digraph>& graphs) {
    if (graphs.empty()) throw std::invalid_argument("union_graph: empty sequence");
    const int n = graphs.front().n;
    std::vector<std::pair<int, int>> all;
    for (const auto& g : graphs) {
        if (g.n != n) throw std::invalid_argument("union_graph: mismatched node counts");
        all.insert(all.end(), g.edges.begin(), g.edges.end());
    }
    return make_digraph(n, std::move(all));
}

GraphSchedule make_schedule(int n, int period, int d_window, std::vector<Digraph> graphs) {
    if (period < 1) throw std::invalid_argument("schedule: period must be >= 1");
    if (d_window < 1) throw std::invalid_argument("schedule: D must be >= 1");
    if (static_cast<int>(graphs.size()) != period)
        throw std::invalid_argument("schedule: need exactly one graph per phase");
    GraphSchedule s;
    s.n = n;
    s.period = period;
    s.d_window = d_window;
    for (auto& g : graphs) {
        if (g.n != n) throw std::invalid_argument("schedule: graph node count mismatch");
        s.weights.push_back(build_weight_matrix(g));
    }
    s.graphs = std::move(graphs);
    return s;
}

bool check_d_strong_connectivity(const GraphSchedule& s) {
    for (int r = 0; r < s.period; ++r) {
        const long start = static_cast<long>(r) * s.d_window;
        std::vector<Digraph> window;
        window.reserve(static_cast<size_t>(s.d_window));
        for (int k = 0; k < s.d_window; ++k) window.push_back(s.graph_at(start + k));
        if (!is_strongly_connected(union_graph(window))) return false;
    }
    return true;
}

Mat backward_product(const GraphSchedule& s, long l, long r) {
    if (r < 0 || l < r) throw std::invalid_argument("backward_product: need l >= r >= 0");
    Mat p = s.weight_at(r);
    for (long k = r + 1; k <= l; ++k) p = matmul(s.weight_at(k), p);
    return p;
}

MixingEstimate estimate_mixing(const GraphSchedule& s, long horizon) {
    if (horizon < 4L * s.d_window)
        throw std::invalid_argument("estimate_mixing: insufficient horizon (need >= 4*D)");
    if (!check_d_strong_connectivity(s))
        throw std::invalid_argument("estimate_mixing: schedule is not D-strongly connected");

    const int n = s.n;
    MixingEstimate est;
    est.psi_per_phase.assign(static_cast<size_t>(s.period), Vec(static_cast<size_t>(n), 0.0));
    est.delta_bar = std::numeric_limits<double>::infinity();

    // Pass 1: limits per phase (last occurrence wins) and row-sum infimum.
    Mat p = s.weight_at(0);
    for (long l = 0; l <= horizon; ++l) {
        if (l > 0) p = matmul(s.weight_at(l), p);
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += p.at(i, j);
            est.delta_bar = std::min(est.delta_bar, row);
        }
        // Row mean estimates the limit column: every column of B(l:0) tends
        // to the same stochastic vector.
        Vec psi(static_cast<size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            double m = 0.0;
            for (int j = 0; j < n; ++j) m += p.at(i, j);
            psi[i] = m / n;
        }
        double tot = vec_sum(psi);
        for (auto& x : psi) x = std::max(0.0, x / tot);
        est.psi_per_phase[static_cast<size_t>(l % s.period)] = psi;
    }
    est.psi = est.psi_per_phase[static_cast<size_t>(horizon % s.period)];

    // Pass 2: deviations from the phase limit, then the log-linear fit.
    std::vector<double> xs, ys;
    p = s.weight_at(0);
    for (long l = 0; l <= horizon; ++l) {
        if (l > 0) p = matmul(s.weight_at(l), p);
        const Vec& psi = est.psi_per_phase[static_cast<size_t>(l % s.period)];
        double dev = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) dev = std::max(dev, std::fabs(p.at(i, j) - psi[i]));
        if (dev > 1e-13) {
            xs.push_back(static_cast<double>(l));
            ys.push_back(std::log(dev));
        }
    }

    if (xs.size() < 2) {
        // Mixing completed within rounding noise immediately (e.g. a fixed
        // complete graph). Any decayed envelope is consistent with the data.
        est.lambda_fit = 0.5;
        est.c1_fit = 1e-12;
        return est;
    }
    const LineFit f = fit_line(xs, ys);
    if (f.slope >= 0.0)
        throw std::runtime_error("estimate_mixing: deviations do not decay over the horizon");
    est.lambda_fit = std::exp(f.slope);
    // Scale the envelope so it dominates every fitted point.
    double c1 = 0.0;
    for (size_t k = 0; k < xs.size(); ++k)
        c1 = std::max(c1, std::exp(ys[k]) / std::pow(est.lambda_fit, xs[k]));
    est.c1_fit = c1 * (1.0 + 1e-12);
    return est;
}

namespace {

[[noreturn]] void parse_fail(const std::string& origin, long line_no, const std::string& what) {
    std::ostringstream os;
    os << origin << ":" << line_no << ": " << what;
    throw std::invalid_argument(os.str());
}

}  // namespace

GraphSchedule load_topology(std::istream& in, const std::string& origin) {
    std::string line;
    long line_no = 0;
    int n = -1, period = -1, d = -1;
    std::vector<std::vector<std::pair<int, int>>> edge_blocks;
    bool saw_header = false;

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok) || tok[0] == '#') continue;
        if (tok == "n") {
            std::string kw_period, kw_d;
            if (!(ls >> n >> kw_period >> period >> kw_d >> d) || kw_period != "period" || kw_d != "D")
                parse_fail(origin, line_no, "expected header 'n <count> period <p> D <d>'");
            if (n < 1 || period < 1 || d < 1) parse_fail(origin, line_no, "header values must be positive");
            saw_header = true;
        } else if (tok == "graph") {
            if (!saw_header) parse_fail(origin, line_no, "'graph' before header");
            int k = 0;
            if (!(ls >> k) || k != static_cast<int>(edge_blocks.size()) + 1)
                parse_fail(origin, line_no, "graph blocks must be numbered 1..period in order");
            edge_blocks.emplace_back();
        } else if (tok == "edge") {
            if (edge_blocks.empty()) parse_fail(origin, line_no, "'edge' before any 'graph' block");
            int j = 0, i = 0;
            if (!(ls >> j >> i)) parse_fail(origin, line_no, "expected 'edge <from> <to>'");
            if (j < 1 || j > n || i < 1 || i > n) parse_fail(origin, line_no, "edge endpoint out of range");
            if (j == i) parse_fail(origin, line_no, "self-loops are implicit, do not list them");
            edge_blocks.back().emplace_back(j - 1, i - 1);
        } else {
            parse_fail(origin, line_no, "unknown directive '" + tok + "'");
        }
    }
    if (!saw_header) parse_fail(origin, line_no, "missing header line");
    if (static_cast<int>(edge_blocks.size()) != period)
        parse_fail(origin, line_no, "expected exactly 'period' graph blocks");

    std::vector<Digraph> graphs;
    graphs.reserve(edge_blocks.size());
    for (auto& e : edge_blocks) graphs.push_back(make_digraph(n, std::move(e)));
    return make_schedule(n, period, d, std::move(graphs));
}

GraphSchedule load_topology_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open topology file: " + path);
    return load_topology(in, path);
}

}  // namespace dpnes
