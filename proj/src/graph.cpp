#include "dqas/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

namespace dqas {
namespace {

bool connected(int n, const std::vector<Edge>& edges) {
    if (n <= 1) {
        return true;
    }
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& e : edges) {
        adj[static_cast<std::size_t>(e.u)].push_back(e.v);
        adj[static_cast<std::size_t>(e.v)].push_back(e.u);
    }
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    int count = 1;
    while (!frontier.empty()) {
        const int x = frontier.front();
        frontier.pop();
        for (int y : adj[static_cast<std::size_t>(x)]) {
            if (!seen[static_cast<std::size_t>(y)]) {
                seen[static_cast<std::size_t>(y)] = true;
                ++count;
                frontier.push(y);
            }
        }
    }
    return count == n;
}

} // namespace

Graph::Graph(int num_nodes, std::vector<Edge> edges) : num_nodes_(num_nodes), edges_(std::move(edges)) {
    if (num_nodes < 0) {
        throw std::invalid_argument("Graph: negative node count");
    }
    for (auto& e : edges_) {
        if (e.u == e.v) {
            throw std::invalid_argument("Graph: self-loop on node " + std::to_string(e.u));
        }
        if (e.u > e.v) {
            std::swap(e.u, e.v);
        }
        if (e.u < 0 || e.v >= num_nodes) {
            throw std::invalid_argument("Graph: edge endpoint out of range");
        }
        if (!std::isfinite(e.weight)) {
            throw std::invalid_argument("Graph: non-finite edge weight");
        }
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    for (std::size_t i = 1; i < edges_.size(); ++i) {
        if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v) {
            throw std::invalid_argument("Graph: duplicate edge");
        }
    }
}

double Graph::total_weight() const {
    return std::accumulate(edges_.begin(), edges_.end(), 0.0,
                           [](double acc, const Edge& e) { return acc + e.weight; });
}

int Graph::degree(int node) const {
    return static_cast<int>(
        std::count_if(edges_.begin(), edges_.end(), [node](const Edge& e) { return e.u == node || e.v == node; }));
}

bool Graph::has_edge(int u, int v) const {
    if (u > v) {
        std::swap(u, v);
    }
    return std::any_of(edges_.begin(), edges_.end(), [u, v](const Edge& e) { return e.u == u && e.v == v; });
}

Graph Graph::next_nearest() const {
    std::vector<Edge> out;
    for (int a = 0; a < num_nodes_; ++a) {
        for (int b = a + 1; b < num_nodes_; ++b) {
            if (has_edge(a, b)) {
                continue;
            }
            for (int m = 0; m < num_nodes_; ++m) {
                if (m != a && m != b && has_edge(a, m) && has_edge(m, b)) {
                    out.push_back({a, b, 1.0});
                    break;
                }
            }
        }
    }
    return Graph(num_nodes_, std::move(out));
}

Graph parse_edge_list(const std::string& text, int num_nodes) {
    std::vector<Edge> edges;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    int max_node = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        std::istringstream fields(line);
        Edge e;
        if (!(fields >> e.u)) {
            continue;
        }
        if (!(fields >> e.v)) {
            throw InputError("edge list line " + std::to_string(line_no) + ": expected 'i j [w]'");
        }
        if (!(fields >> e.weight)) {
            e.weight = 1.0;
        }
        max_node = std::max({max_node, e.u, e.v});
        edges.push_back(e);
    }
    const int n = num_nodes > 0 ? num_nodes : max_node + 1;
    try {
        return Graph(n, std::move(edges));
    } catch (const std::invalid_argument& err) {
        throw InputError(std::string("edge list: ") + err.what());
    }
}

Graph read_edge_list(const std::string& path, int num_nodes) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open edge list '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_edge_list(buffer.str(), num_nodes);
}

Graph gen_regular_graph(int num_nodes, int degree, Rng& rng) {
    if (num_nodes < 1 || degree < 0 || degree >= num_nodes || (num_nodes * degree) % 2 != 0) {
        throw std::invalid_argument("gen_regular_graph: infeasible (n, d)");
    }
    std::vector<int> stubs;
    for (int v = 0; v < num_nodes; ++v) {
        for (int k = 0; k < degree; ++k) {
            stubs.push_back(v);
        }
    }
    for (int attempt = 0; attempt < kMaxGraphRetries; ++attempt) {
        // Fisher-Yates with the stream's own integer draws.
        for (std::size_t i = stubs.size(); i > 1; --i) {
            std::swap(stubs[i - 1], stubs[rng.below(i)]);
        }
        std::vector<Edge> edges;
        bool simple = true;
        for (std::size_t i = 0; i + 1 < stubs.size() && simple; i += 2) {
            int a = stubs[i];
            int b = stubs[i + 1];
            if (a == b) {
                simple = false;
                break;
            }
            if (a > b) {
                std::swap(a, b);
            }
            for (const auto& e : edges) {
                if (e.u == a && e.v == b) {
                    simple = false;
                    break;
                }
            }
            edges.push_back({a, b, 1.0});
        }
        if (simple && (degree == 0 || connected(num_nodes, edges))) {
            return Graph(num_nodes, std::move(edges));
        }
    }
    throw std::runtime_error("gen_regular_graph: retry limit reached");
}

Graph gen_er_graph(int num_nodes, double p_edge, Rng& rng) {
    if (num_nodes < 1 || !(p_edge >= 0.0 && p_edge <= 1.0)) {
        throw std::invalid_argument("gen_er_graph: invalid arguments");
    }
    for (int attempt = 0; attempt < kMaxGraphRetries; ++attempt) {
        std::vector<Edge> edges;
        for (int a = 0; a < num_nodes; ++a) {
            for (int b = a + 1; b < num_nodes; ++b) {
                if (rng.uniform() < p_edge) {
                    edges.push_back({a, b, 1.0});
                }
            }
        }
        if (!edges.empty() && connected(num_nodes, edges)) {
            return Graph(num_nodes, std::move(edges));
        }
    }
    throw std::runtime_error("gen_er_graph: no connected graph within retry limit");
}

Graph weight_graph(const Graph& graph, Rng& rng, double mean, double stddev) {
    std::vector<Edge> edges = graph.edges();
    for (auto& e : edges) {
        e.weight = rng.normal(mean, stddev);
    }
    return Graph(graph.num_nodes(), std::move(edges));
}

double cut_value(const Graph& graph, std::uint64_t assignment) {
    const int n = graph.num_nodes();
    double value = 0.0;
    for (const auto& e : graph.edges()) {
        const bool su = (assignment >> (n - 1 - e.u)) & 1U;
        const bool sv = (assignment >> (n - 1 - e.v)) & 1U;
        if (su != sv) {
            value += e.weight;
        }
    }
    return value;
}

MaxCutResult maxcut_bruteforce(const Graph& graph) {
    const int n = graph.num_nodes();
    if (n > 24) {
        throw BudgetExceeded("maxcut_bruteforce: more than 24 nodes");
    }
    MaxCutResult best;
    if (n <= 1) {
        return best;
    }
    // Node 0 stays on side 0: assignments are the low n-1 bits.
    const std::uint64_t count = std::uint64_t{1} << (n - 1);
    for (std::uint64_t a = 0; a < count; ++a) {
        const double v = cut_value(graph, a);
        if (v > best.value) {
            best = {v, a};
        }
    }
    return best;
}

std::vector<Graph> sample_reduced_subgraphs(const Graph& graph, int count, Rng& rng) {
    if (count < 1) {
        throw std::invalid_argument("sample_reduced_subgraphs: count must be >= 1");
    }
    const std::size_t m = graph.num_edges();
    if (m < 2) {
        throw std::invalid_argument("sample_reduced_subgraphs: base graph needs >= 2 edges");
    }
    const std::size_t max_size = m / 2;
    std::vector<Graph> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<std::size_t> order(m);
    for (int c = 0; c < count; ++c) {
        const std::size_t size = 1 + rng.below(max_size);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = 0; i < size; ++i) {
            std::swap(order[i], order[i + rng.below(m - i)]);
        }
        std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(size));
        std::sort(chosen.begin(), chosen.end());
        std::vector<Edge> edges;
        for (std::size_t idx : chosen) {
            edges.push_back(graph.edges()[idx]);
        }
        out.emplace_back(graph.num_nodes(), std::move(edges));
    }
    return out;
}

} // namespace dqas
