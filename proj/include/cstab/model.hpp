#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cstab/graph.hpp"
#include "cstab/model_config.hpp"
#include "cstab/tensor.hpp"

namespace cstab {

struct HeadParams {
    Tensor wq, wk, wv;  // [d_model, head_dim]
    Tensor wo;          // [head_dim, d_model]
};

struct LayerParams {
    std::vector<HeadParams> heads;
    Tensor w1;  // [d_model, d_ff]
    Tensor w2;  // [d_ff, d_model]
};

// Forward intermediates one node keeps around for its backward pass.
struct NodeScratch {
    Tensor q, k, v, probs, ctx;  // attention
    Tensor pre, act;             // mlp
};

// Gradients aligned with ToyTransformer::parameters() order.
struct ParamGrads {
    std::vector<Tensor> grads;
};

// Decoder-only toy transformer over an additive residual stream. No layer
// norm and no biases anywhere, so every node input is exactly the sum of
// its upstream outputs and edge interventions are exact. Attention is
// causal softmax; MLP activation is exact GELU (erf form).
class ToyTransformer {
public:
    ToyTransformer() = default;
    explicit ToyTransformer(const ModelConfig& cfg);  // all-zero parameters

    // Seeded init: every entry ~ Normal(0, sigma^2) with sigma = 0.5 for the
    // token/position tables and sigma = 0.5/sqrt(fan_in) for projections.
    // Draw order is fixed: tok, pos, per layer (per head wq,wk,wv,wo; w1,w2),
    // unembed.
    static ToyTransformer random_init(const ModelConfig& cfg, uint64_t seed);

    const ModelConfig& config() const { return cfg_; }

    // Token + position embedding, shape [len, d_model].
    Tensor embed(std::span<const int> tokens) const;

    // Output of a single non-embed node given its residual-stream input.
    Tensor node_forward(const Node& node, const Tensor& input, NodeScratch* scratch = nullptr) const;

    // Gradient of the node input given the gradient of its output; forward
    // scratch must come from node_forward on the same input. Parameter
    // gradients are accumulated into pg when non-null.
    Tensor node_backward(const Node& node, const Tensor& input, const NodeScratch& scratch,
                         const Tensor& d_out, ParamGrads* pg) const;

    void embed_backward(std::span<const int> tokens, const Tensor& d_emb_out, ParamGrads& pg) const;

    // Fixed-order parameter enumeration (same order as random_init draws).
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
    ParamGrads zero_grads() const;

    uint64_t params_hash() const;

    Tensor tok_embed;  // [vocab, d_model]
    Tensor pos_embed;  // [context, d_model]
    std::vector<LayerParams> layers;
    Tensor unembed;  // [d_model, vocab]

private:
    int param_index(const Node& node) const;

    ModelConfig cfg_;
};

double gelu(double x);
double gelu_deriv(double x);

}  // namespace cstab
