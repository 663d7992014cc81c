#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cstab/graph.hpp"
#include "cstab/model.hpp"

namespace cstab {

// Per-node tensors of one forward pass. outputs[v] is what node v writes to
// the residual stream ([T, d_model]; [T, vocab] for logits); inputs[v] is the
// stream state node v read (empty for embed, which has no input).
struct ActivationCache {
    std::vector<Tensor> outputs;
    std::vector<Tensor> inputs;
};

// Patching hooks. node_inputs replaces a node's input outright (upstream
// influence is cut for that node); input_offsets adds a constant to the
// computed input (gradients still flow). embed_output replaces the embedding
// node's output. An absolute node_inputs override wins over an offset.
struct ForwardOverrides {
    std::optional<Tensor> embed_output;
    std::map<int, Tensor> node_inputs;
    std::map<int, Tensor> input_offsets;
};

struct ForwardResult {
    Tensor logits;  // [T, vocab]
    ActivationCache cache;
    std::vector<NodeScratch> scratch;
    std::vector<char> input_overridden;  // per node: absolute override applied
};

ForwardResult forward_cached(const ToyTransformer& model, const ComputeDag& dag,
                             std::span<const int> tokens,
                             const ForwardOverrides* overrides = nullptr);

// Sum of upstream outputs feeding `node` (its residual-stream input).
Tensor node_input_from_outputs(const ComputeDag& dag, int node, const std::vector<Tensor>& outputs);

}  // namespace cstab
