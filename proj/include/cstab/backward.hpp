#pragma once

#include <span>

#include "cstab/forward.hpp"
#include "cstab/metric.hpp"

namespace cstab {

// Reverse-mode gradients of a scalar metric. input_grads[v] is d(metric) /
// d(input of v); the embed slot (and embed_grad) holds d(metric) / d(embed
// output), i.e. the gradient with respect to the input embeddings.
struct GradCache {
    std::vector<Tensor> input_grads;
    Tensor embed_grad;

    void add_(const GradCache& o) {
        for (std::size_t i = 0; i < input_grads.size(); ++i) input_grads[i].add_(o.input_grads[i]);
        embed_grad.add_(o.embed_grad);
    }
    void scale_(double s) {
        for (auto& g : input_grads) g.scale_(s);
        embed_grad.scale_(s);
    }
};

// Backward through an existing forward pass. Nodes whose input was replaced
// by an absolute override do not propagate gradient upstream (the override
// cut the link). Parameter gradients accumulate into pg when non-null.
GradCache backward_metric(const ToyTransformer& model, const ComputeDag& dag,
                          std::span<const int> tokens, const ForwardResult& fwd,
                          const Metric& metric, ParamGrads* pg = nullptr);

// forward + backward in one call; throws if any gradient entry is non-finite,
// naming the offending node.
GradCache grad_metric(const ToyTransformer& model, const ComputeDag& dag,
                      std::span<const int> tokens, const Metric& metric,
                      const ForwardOverrides* overrides = nullptr);

}  // namespace cstab
