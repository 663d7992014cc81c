#include "cstab/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace cstab {

ComputeDag ComputeDag::build(const ModelConfig& cfg) {
    cfg.validate();
    ComputeDag dag;
    dag.cfg_ = cfg;

    dag.nodes_.push_back({NodeKind::Embed, -1, -1, 0, "emb"});
    for (int l = 0; l < cfg.layers; ++l) {
        for (int h = 0; h < cfg.heads; ++h) {
            dag.nodes_.push_back({NodeKind::AttnHead, l, h, 2 * l + 1,
                                  "a" + std::to_string(l) + ".h" + std::to_string(h)});
        }
        dag.nodes_.push_back({NodeKind::Mlp, l, -1, 2 * l + 2, "m" + std::to_string(l)});
    }
    dag.nodes_.push_back({NodeKind::Logits, -1, -1, 2 * cfg.layers + 1, "logits"});

    const int n = dag.node_count();
    dag.in_edges_.resize(static_cast<std::size_t>(n));
    dag.out_edges_.resize(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        for (int u = 0; u < n; ++u) {
            if (dag.nodes_[static_cast<std::size_t>(u)].rank <
                dag.nodes_[static_cast<std::size_t>(v)].rank) {
                const int id = dag.edge_count();
                dag.edges_.push_back({u, v});
                dag.in_edges_[static_cast<std::size_t>(v)].push_back(id);
                dag.out_edges_[static_cast<std::size_t>(u)].push_back(id);
            }
        }
    }

    Fnv1a h;
    h.update("compute-dag-v1");
    h.update_u64(cfg.hash());
    for (const Node& nd : dag.nodes_) h.update(nd.name);
    for (const Edge& e : dag.edges_) {
        h.update_i64(e.src);
        h.update_i64(e.dst);
    }
    dag.hash_ = h.digest();
    return dag;
}

bool has_io_path(const ComputeDag& dag, const std::vector<int>& edge_ids) {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(dag.node_count()));
    for (int e : edge_ids) {
        if (e < 0 || e >= dag.edge_count()) throw Error("has_io_path: edge id out of range");
        adj[static_cast<std::size_t>(dag.edge(e).src)].push_back(dag.edge(e).dst);
    }
    std::vector<char> seen(static_cast<std::size_t>(dag.node_count()), 0);
    std::queue<int> q;
    q.push(dag.embed_node());
    seen[static_cast<std::size_t>(dag.embed_node())] = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        if (u == dag.logits_node()) return true;
        for (int v : adj[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                q.push(v);
            }
        }
    }
    return false;
}

bool Circuit::contains(int edge_id) const {
    return std::binary_search(edge_ids.begin(), edge_ids.end(), edge_id);
}

std::vector<int> Circuit::node_ids(const ComputeDag& dag) const {
    std::set<int> nodes;
    for (int e : edge_ids) {
        nodes.insert(dag.edge(e).src);
        nodes.insert(dag.edge(e).dst);
    }
    return {nodes.begin(), nodes.end()};
}

void Circuit::validate_against(const ComputeDag& dag) const {
    if (dag_hash != dag.structure_hash()) {
        throw Error("circuit/dag hash mismatch: circuit was built for a different graph");
    }
    for (int e : edge_ids) {
        if (e < 0 || e >= dag.edge_count()) throw Error("circuit: edge id out of range");
    }
}

}  // namespace cstab
