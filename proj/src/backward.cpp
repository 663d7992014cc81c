#include "cstab/backward.hpp"

namespace cstab {

GradCache backward_metric(const ToyTransformer& model, const ComputeDag& dag,
                          std::span<const int> tokens, const ForwardResult& fwd,
                          const Metric& metric, ParamGrads* pg) {
    const int n = dag.node_count();
    GradCache gc;
    gc.input_grads.resize(static_cast<std::size_t>(n));

    std::vector<Tensor> d_out(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        d_out[static_cast<std::size_t>(v)] =
            Tensor::zeros_like(fwd.cache.outputs[static_cast<std::size_t>(v)]);
    }
    d_out[static_cast<std::size_t>(dag.logits_node())] = metric.logits_grad(fwd.logits);

    for (int v = n - 1; v >= 1; --v) {
        Tensor d_in = model.node_backward(dag.node(v), fwd.cache.inputs[static_cast<std::size_t>(v)],
                                          fwd.scratch[static_cast<std::size_t>(v)],
                                          d_out[static_cast<std::size_t>(v)], pg);
        if (!fwd.input_overridden[static_cast<std::size_t>(v)]) {
            for (int e : dag.in_edges(v)) {
                d_out[static_cast<std::size_t>(dag.edge(e).src)].add_(d_in);
            }
        }
        gc.input_grads[static_cast<std::size_t>(v)] = std::move(d_in);
    }

    gc.embed_grad = d_out[0];
    gc.input_grads[0] = std::move(d_out[0]);
    if (pg && !fwd.input_overridden[0]) {
        model.embed_backward(tokens, gc.embed_grad, *pg);
    }
    return gc;
}

GradCache grad_metric(const ToyTransformer& model, const ComputeDag& dag,
                      std::span<const int> tokens, const Metric& metric,
                      const ForwardOverrides* overrides) {
    ForwardResult fwd = forward_cached(model, dag, tokens, overrides);
    GradCache gc = backward_metric(model, dag, tokens, fwd, metric, nullptr);
    for (int v = 0; v < dag.node_count(); ++v) {
        if (!gc.input_grads[static_cast<std::size_t>(v)].all_finite()) {
            throw Error("grad_metric: non-finite gradient at node '" + dag.node(v).name + "'");
        }
    }
    return gc;
}

}  // namespace cstab
