#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dqas/common.hpp"

namespace dqas {

struct Edge {
    int u = 0;
    int v = 0;
    double weight = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected weighted graph; edges are stored with u < v, sorted, without duplicates.
class Graph {
  public:
    Graph() = default;
    Graph(int num_nodes, std::vector<Edge> edges);

    int num_nodes() const { return num_nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t num_edges() const { return edges_.size(); }
    double total_weight() const;
    int degree(int node) const;
    bool has_edge(int u, int v) const;
    /// Pairs at graph distance exactly two (next-nearest neighbours), unit weight.
    Graph next_nearest() const;

    friend bool operator==(const Graph&, const Graph&) = default;

  private:
    int num_nodes_ = 0;
    std::vector<Edge> edges_;
};

/// Reads "i j [w]" lines; node count is max index + 1 unless num_nodes > 0.
Graph read_edge_list(const std::string& path, int num_nodes = 0);
Graph parse_edge_list(const std::string& text, int num_nodes = 0);

/// Uniform d-regular graph: random pairing with rejection of self-loops and
/// multi-edges, retried until the result is simple and connected.
Graph gen_regular_graph(int num_nodes, int degree, Rng& rng);
/// Erdos-Renyi G(n, p), retried until connected.
Graph gen_er_graph(int num_nodes, double p_edge, Rng& rng);
/// Replace every weight with an independent N(1, 0.2^2) draw.
Graph weight_graph(const Graph& graph, Rng& rng, double mean = 1.0, double stddev = 0.2);

inline constexpr int kMaxGraphRetries = 1000;

struct MaxCutResult {
    double value = 0.0;
    std::uint64_t assignment = 0; // bit (n-1-i) holds node i's side
};

/// Exact MAXCUT by enumerating the 2^(n-1) assignments with node 0 fixed.
MaxCutResult maxcut_bruteforce(const Graph& graph);
double cut_value(const Graph& graph, std::uint64_t assignment);

/// Random edge subsets: each of size drawn uniformly from [1, floor(|E|/2)],
/// edges chosen uniformly without replacement, weights inherited.
std::vector<Graph> sample_reduced_subgraphs(const Graph& graph, int count, Rng& rng);

} // namespace dqas
