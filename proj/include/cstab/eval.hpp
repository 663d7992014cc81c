#pragma once

#include "cstab/graph.hpp"
#include "cstab/interventions.hpp"

namespace cstab {

enum class PredictionMode { FullVocab, AnswerFoil };

struct EvalReport {
    double circuit_error = 0.0;   // in [0, 1]
    double kl_divergence = 0.0;   // >= 0, natural log
    int circuit_size = 0;
    uint64_t dataset_hash = 0;
};

// Forward pass of the circuit as a standalone model: nodes are recomputed in
// topological order, and each node input takes the recomputed upstream
// output over in-circuit edges and the intervention baseline over excluded
// edges. circuit = all edges reproduces the clean run exactly.
Tensor run_as_circuit(const ToyTransformer& model, const ComputeDag& dag, const Circuit& circuit,
                      const ActivationCache& baseline, std::span<const int> tokens);

// Fraction of pairs whose final-position argmax differs between circuit and
// full model, on clean inputs.
double circuit_error(const ToyTransformer& model, const ComputeDag& dag, const Circuit& circuit,
                     const TaskDataset& data, const InterventionSpec& intervention,
                     PredictionMode mode = PredictionMode::FullVocab);

// Mean over pairs of KL(full || circuit) between final-position softmax
// distributions.
double circuit_divergence(const ToyTransformer& model, const ComputeDag& dag,
                          const Circuit& circuit, const TaskDataset& data,
                          const InterventionSpec& intervention);

// Both metrics in one pass over the dataset.
EvalReport evaluate_circuit(const ToyTransformer& model, const ComputeDag& dag,
                            const Circuit& circuit, const TaskDataset& data,
                            const InterventionSpec& intervention,
                            PredictionMode mode = PredictionMode::FullVocab);

// KL(p || q) over two discrete distributions, natural log.
double kl_divergence(std::span<const double> p, std::span<const double> q);

}  // namespace cstab
