#include "cstab/eval.hpp"

#include <algorithm>
#include <cmath>

#include "cstab/metric.hpp"

namespace cstab {

Tensor run_as_circuit(const ToyTransformer& model, const ComputeDag& dag, const Circuit& circuit,
                      const ActivationCache& baseline, std::span<const int> tokens) {
    circuit.validate_against(dag);
    const int n = dag.node_count();
    std::vector<Tensor> out_run(static_cast<std::size_t>(n));
    out_run[0] = model.embed(tokens);
    for (int v = 1; v < n; ++v) {
        Tensor x;
        for (int e : dag.in_edges(v)) {
            const int u = dag.edge(e).src;
            const Tensor& contrib = circuit.contains(e)
                                        ? out_run[static_cast<std::size_t>(u)]
                                        : baseline.outputs[static_cast<std::size_t>(u)];
            if (x.numel() == 0) {
                x = contrib;
            } else {
                x.add_(contrib);
            }
        }
        out_run[static_cast<std::size_t>(v)] = model.node_forward(dag.node(v), x);
    }
    return out_run[static_cast<std::size_t>(dag.logits_node())];
}

namespace {

int argmax_restricted(std::span<const double> row, const PromptPair& pair, PredictionMode mode) {
    if (mode == PredictionMode::FullVocab) {
        int best = 0;
        for (std::size_t i = 1; i < row.size(); ++i) {
            if (row[i] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
        }
        return best;
    }
    std::vector<int> ids = pair.answers;
    ids.insert(ids.end(), pair.foils.begin(), pair.foils.end());
    std::sort(ids.begin(), ids.end());
    int best = ids[0];
    for (int id : ids) {
        if (row[static_cast<std::size_t>(id)] > row[static_cast<std::size_t>(best)]) best = id;
    }
    return best;
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) kl += p[i] * (std::log(p[i]) - std::log(q[i]));
    }
    return kl;
}

EvalReport evaluate_circuit(const ToyTransformer& model, const ComputeDag& dag,
                            const Circuit& circuit, const TaskDataset& data,
                            const InterventionSpec& intervention, PredictionMode mode) {
    if (data.pairs.empty()) throw Error("evaluate_circuit: empty dataset");
    BaselineProvider provider(model, dag, data, intervention);
    int mismatches = 0;
    double kl_sum = 0.0;
    for (const PromptPair& pair : data.pairs) {
        ForwardResult full = forward_cached(model, dag, pair.clean);
        ActivationCache base = provider.baseline_for(pair);
        Tensor circ_logits = run_as_circuit(model, dag, circuit, base, pair.clean);

        auto full_row = full.logits.row(full.logits.rows() - 1);
        auto circ_row = circ_logits.row(circ_logits.rows() - 1);
        if (argmax_restricted(full_row, pair, mode) != argmax_restricted(circ_row, pair, mode)) {
            ++mismatches;
        }
        std::vector<double> p(full_row.size()), q(circ_row.size());
        softmax_row(full_row, p);
        softmax_row(circ_row, q);
        kl_sum += kl_divergence(p, q);
    }
    EvalReport rep;
    rep.circuit_error = static_cast<double>(mismatches) / static_cast<double>(data.size());
    rep.kl_divergence = kl_sum / static_cast<double>(data.size());
    rep.circuit_size = circuit.size();
    rep.dataset_hash = data.content_hash();
    return rep;
}

double circuit_error(const ToyTransformer& model, const ComputeDag& dag, const Circuit& circuit,
                     const TaskDataset& data, const InterventionSpec& intervention,
                     PredictionMode mode) {
    return evaluate_circuit(model, dag, circuit, data, intervention, mode).circuit_error;
}

double circuit_divergence(const ToyTransformer& model, const ComputeDag& dag,
                          const Circuit& circuit, const TaskDataset& data,
                          const InterventionSpec& intervention) {
    return evaluate_circuit(model, dag, circuit, data, intervention).kl_divergence;
}

}  // namespace cstab
