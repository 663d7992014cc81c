#include "cstab/forward.hpp"

namespace cstab {

Tensor node_input_from_outputs(const ComputeDag& dag, int node, const std::vector<Tensor>& outputs) {
    const auto& in = dag.in_edges(node);
    if (in.empty()) throw Error("node_input_from_outputs: node has no incoming edges");
    Tensor x = Tensor::zeros_like(outputs[static_cast<std::size_t>(dag.edge(in[0]).src)]);
    for (int e : in) x.add_(outputs[static_cast<std::size_t>(dag.edge(e).src)]);
    return x;
}

ForwardResult forward_cached(const ToyTransformer& model, const ComputeDag& dag,
                             std::span<const int> tokens, const ForwardOverrides* overrides) {
    const int n = dag.node_count();
    ForwardResult res;
    res.cache.outputs.resize(static_cast<std::size_t>(n));
    res.cache.inputs.resize(static_cast<std::size_t>(n));
    res.scratch.resize(static_cast<std::size_t>(n));
    res.input_overridden.assign(static_cast<std::size_t>(n), 0);

    Tensor emb = model.embed(tokens);
    if (overrides && overrides->embed_output) {
        if (!overrides->embed_output->same_shape(emb)) {
            throw Error("override for node 'emb': expected shape " + emb.shape_str() + ", got " +
                        overrides->embed_output->shape_str());
        }
        emb = *overrides->embed_output;
        res.input_overridden[0] = 1;
    }
    res.cache.outputs[0] = std::move(emb);

    for (int v = 1; v < n; ++v) {
        Tensor x;
        bool absolute = false;
        if (overrides) {
            auto it = overrides->node_inputs.find(v);
            if (it != overrides->node_inputs.end()) {
                x = it->second;
                absolute = true;
            }
        }
        if (!absolute) {
            x = node_input_from_outputs(dag, v, res.cache.outputs);
            if (overrides) {
                auto it = overrides->input_offsets.find(v);
                if (it != overrides->input_offsets.end()) {
                    if (!it->second.same_shape(x)) {
                        throw Error("offset for node '" + dag.node(v).name + "': expected shape " +
                                    x.shape_str() + ", got " + it->second.shape_str());
                    }
                    x.add_(it->second);
                }
            }
        } else {
            if (x.rows() != static_cast<int>(tokens.size()) || x.cols() != model.config().d_model) {
                throw Error("override for node '" + dag.node(v).name + "': expected shape [" +
                            std::to_string(tokens.size()) + "," +
                            std::to_string(model.config().d_model) + "], got " + x.shape_str());
            }
            res.input_overridden[static_cast<std::size_t>(v)] = 1;
        }
        res.cache.outputs[static_cast<std::size_t>(v)] =
            model.node_forward(dag.node(v), x, &res.scratch[static_cast<std::size_t>(v)]);
        res.cache.inputs[static_cast<std::size_t>(v)] = std::move(x);
    }

    res.logits = res.cache.outputs[static_cast<std::size_t>(dag.logits_node())];
    return res;
}

}  // namespace cstab
