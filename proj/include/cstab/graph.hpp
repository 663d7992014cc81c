#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cstab/model_config.hpp"

namespace cstab {

enum class NodeKind { Embed, AttnHead, Mlp, Logits };

struct Node {
    NodeKind kind;
    int layer;  // -1 for embed/logits
    int head;   // -1 unless AttnHead
    int rank;   // residual-stream position; u feeds v iff rank(u) < rank(v)
    std::string name;
};

struct Edge {
    int src;
    int dst;
};

// Computational DAG over the residual stream: one node per attention head,
// one per MLP, plus embed and logits. There is an edge u->v for every pair
// where u writes the stream before v reads it; heads of the same layer read
// the same stream state and are not connected to each other.
//
// Node order: embed, then per layer (heads 0..H-1, then mlp), then logits.
// Edge order: destination-major, sources in node order. Both orders are the
// tie-break for every "stable ordering" rule downstream.
class ComputeDag {
public:
    static ComputeDag build(const ModelConfig& cfg);

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    int embed_node() const { return 0; }
    int logits_node() const { return node_count() - 1; }

    const std::vector<int>& in_edges(int node) const { return in_edges_[static_cast<std::size_t>(node)]; }
    const std::vector<int>& out_edges(int node) const { return out_edges_[static_cast<std::size_t>(node)]; }

    bool precedes(int u, int v) const { return node(u).rank < node(v).rank; }
    const ModelConfig& config() const { return cfg_; }

    // Fingerprint of the model config plus the node/edge enumeration.
    uint64_t structure_hash() const { return hash_; }

    std::string edge_name(int e) const {
        return node(edge(e).src).name + "->" + node(edge(e).dst).name;
    }

private:
    ModelConfig cfg_;
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> in_edges_;
    std::vector<std::vector<int>> out_edges_;
    uint64_t hash_ = 0;
};

// True iff a directed embed->...->logits path exists using only the edges
// whose ids are listed (ids must belong to the dag).
bool has_io_path(const ComputeDag& dag, const std::vector<int>& edge_ids);

// A discovered circuit: a sorted edge-id subset of a specific dag.
struct Circuit {
    std::vector<int> edge_ids;  // sorted ascending, unique
    uint64_t dag_hash = 0;
    uint64_t config_hash = 0;  // scoring/selection provenance

    int size() const { return static_cast<int>(edge_ids.size()); }
    bool contains(int edge_id) const;
    // Endpoint nodes of the edge set.
    std::vector<int> node_ids(const ComputeDag& dag) const;
    void validate_against(const ComputeDag& dag) const;
};

}  // namespace cstab
